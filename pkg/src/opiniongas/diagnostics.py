"""Moment measurement and Eckart decomposition of a particle ensemble.

The ensemble represents the distribution with weight 1/N per particle in
the dp measure, so N^0 = (1/N) sum p^0/p^0 = 1 exactly at all times and

    N^a = (1/N) sum p^a / p^0,      T^ab = (1/N) sum p^a p^b / p^0.

Eckart decomposition (metric diag(1,-1), projector D^ab = eta^ab - U^aU^b):

    n = sqrt(N.N),  U = N/n,  e = U_a T^ab U_b / n,  chi from e, theta = 1/chi.

The dissipative moments keep the 1/3 projector coefficients of the
three-dimensional decomposition (the model's stated convention),

    p + Pi      = -(1/3) D_ab T^ab,
    q^a         = D^a_c U_b T^bc,
    Pi^<ab>     = (D^a_c D^b_d - (1/3) D^ab D_cd) T^cd,

but are evaluated on the deviation dT = T - T_eq(n, U, chi) from the
fitted equilibrium tensor: they are nonequilibrium moments and must
vanish (to Monte Carlo noise) for an equilibrium ensemble, which the
as-printed 1/3 coefficients applied to the full T would not do in 1+1
dimensions. q^a is unchanged by the subtraction.

Cold ensembles (e -> 1) report chi capped at CHI_COLD_CAP with the
`cold` flag set instead of failing, so strongly cooled runs keep
reporting.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .equilibrium import chi_from_energy, energy_density
from .kinematics import TwoVector
from .specfun import bessel_k_ratio

__all__ = [
    "FlowState",
    "HistogramPair",
    "particle_moments",
    "eckart_decompose",
    "phi_measure",
    "histogram_vs_mj",
    "measure_flow",
    "CHI_COLD_CAP",
]

CHI_COLD_CAP = 1e9


@dataclass(frozen=True)
class FlowState:
    """Eckart-decomposed macroscopic state of the ensemble at one time."""

    t: float
    n: float
    mbar: float
    u: TwoVector
    chi: float
    theta: float
    pi_dyn: float
    q1: float
    pi11: float
    phi: float
    c_param: float
    cold: bool = False

    CSV_COLUMNS = ("t", "n", "mbar", "chi", "theta", "Pi", "q1", "Pi11", "phi", "c_param")

    def csv_row(self) -> tuple[float, ...]:
        return (self.t, self.n, self.mbar, self.chi, self.theta,
                self.pi_dyn, self.q1, self.pi11, self.phi, self.c_param)


@dataclass(frozen=True)
class HistogramPair:
    """Empirical opinion density and the matched-equilibrium reference.

    Both are densities in dm over (-1, 1) with unit mass.
    """

    centers: np.ndarray
    f: np.ndarray
    f_mj: np.ndarray


def _momenta_of(state) -> np.ndarray:
    p = getattr(state, "momenta", state)
    p = np.asarray(p, dtype=float)
    if p.size == 0:
        raise ValueError("ensemble is empty")
    return p


def particle_moments(state) -> tuple[TwoVector, np.ndarray]:
    """(N^a, T^ab) estimators; N^0 = 1 exactly by construction."""
    p = _momenta_of(state)
    p0 = np.sqrt(1.0 + p * p)
    m = p / p0
    n_vec = TwoVector(1.0, float(m.mean()))
    t00 = float(p0.mean())
    t01 = float(p.mean())
    t11 = float((p * m).mean())
    return n_vec, np.array([[t00, t01], [t01, t11]])


def phi_measure(state) -> float:
    """Decision-making parameter: mean |p| (the integral of |p| f dp)."""
    p = _momenta_of(state)
    return float(np.abs(p).mean())


def _equilibrium_tensor(n: float, u: TwoVector, chi: float) -> np.ndarray:
    """T^ab of the fitted equilibrium: n [K2/K1 U^aU^b - eta^ab/chi]."""
    r21 = bessel_k_ratio(2, 1, chi)
    uu = np.array([[u.a0 * u.a0, u.a0 * u.a1], [u.a0 * u.a1, u.a1 * u.a1]])
    eta = np.diag([1.0, -1.0])
    return n * (r21 * uu - eta / chi)


def eckart_decompose(n_vec: TwoVector, t_tensor: np.ndarray,
                     t: float = 0.0, phi: float = 0.0) -> FlowState:
    """Decompose (N, T) into the macroscopic FlowState.

    Raises for spacelike or null N (degenerate flow). Cold states
    (e <= energy_density(CHI_COLD_CAP)) are flagged and capped.
    """
    nn = n_vec.dot(n_vec)
    if not nn > 0.0:
        raise ValueError(f"flow is degenerate: N.N = {nn} is not positive")
    n = float(np.sqrt(nn))
    u = TwoVector(n_vec.a0 / n, n_vec.a1 / n)
    u_lo = np.array([u.a0, -u.a1])  # U_a
    t_arr = np.asarray(t_tensor, dtype=float)
    e = float(u_lo @ t_arr @ u_lo) / n

    cold = not e > float(energy_density(CHI_COLD_CAP))
    chi = CHI_COLD_CAP if cold else chi_from_energy(e)
    theta = 1.0 / chi

    eta = np.diag([1.0, -1.0])
    uu_up = np.array([[u.a0 * u.a0, u.a0 * u.a1], [u.a0 * u.a1, u.a1 * u.a1]])
    d_up = eta - uu_up                     # D^ab
    d_mixed = np.eye(2) - np.outer(np.array([u.a0, u.a1]), u_lo)  # D^a_b
    d_lo = eta @ d_up @ eta                # D_ab

    dt = t_arr - _equilibrium_tensor(n, u, chi)
    p_plus_pi_dev = -(1.0 / 3.0) * float(np.tensordot(d_lo, dt))
    q_vec = d_mixed @ (dt @ u_lo)          # D^a_c U_b dT^bc (dT symmetric)
    pi_shear = d_mixed @ dt @ d_mixed.T - (1.0 / 3.0) * d_up * float(np.tensordot(d_lo, dt))

    return FlowState(
        t=float(t),
        n=n,
        mbar=u.a1 / u.a0,
        u=u,
        chi=float(chi),
        theta=float(theta),
        pi_dyn=p_plus_pi_dev,
        q1=float(q_vec[1]),
        pi11=float(pi_shear[1, 1]),
        phi=float(phi),
        c_param=float(u.a1 * bessel_k_ratio(2, 1, chi)),
        cold=cold,
    )


def measure_flow(state, t: float | None = None) -> FlowState:
    """Full pipeline: moments -> Eckart -> FlowState, with phi attached."""
    n_vec, t_tensor = particle_moments(state)
    time = getattr(state, "time", 0.0) if t is None else t
    return eckart_decompose(n_vec, t_tensor, t=float(time), phi=phi_measure(state))


def histogram_vs_mj(state, bins: int = 80) -> HistogramPair:
    """Opinion histogram next to the equilibrium matched to the measured flow.

    The empirical density uses uniform bins over (-1, 1); the reference is
    the measured-(n, mbar, chi) equilibrium transported to the opinion
    variable with the |dp/dm| = gamma^3 factor. Both integrate to 1.
    """
    if bins < 10:
        raise ValueError("need at least 10 bins")
    p = _momenta_of(state)
    m = p / np.sqrt(1.0 + p * p)
    edges = np.linspace(-1.0, 1.0, bins + 1)
    f_emp, _ = np.histogram(m, bins=edges, density=True)
    centers = 0.5 * (edges[1:] + edges[:-1])
    fs = measure_flow(state)
    f_ref = _mj_opinion_density(edges, fs)
    return HistogramPair(centers=centers, f=f_emp, f_mj=f_ref)


def _mj_opinion_density(edges: np.ndarray, fs: FlowState) -> np.ndarray:
    """Bin-averaged reference density over the opinion bins.

    gamma^3(m) f_MJ(p(m)) is sharply curved (bimodal for chi < 3), so the
    fair comparison with a histogram is the per-bin average, not the
    center value; 8-point Gauss-Legendre per bin.
    """
    # local import: equilibrium does not depend on diagnostics, avoid cycle at module load
    from .equilibrium import MjState, mj_pdf
    from .kinematics import gamma_of_opinion, opinion_to_momentum

    state = MjState(n=fs.n, ubar=fs.mbar, chi=fs.chi)
    gl_x, gl_w = np.polynomial.legendre.leggauss(8)
    lo = edges[:-1][:, None]
    width = (edges[1:] - edges[:-1])[:, None]
    nodes = lo + (0.5 * gl_x + 0.5)[None, :] * width
    vals = gamma_of_opinion(nodes) ** 3 * mj_pdf(opinion_to_momentum(nodes), state)
    return 0.5 * (vals @ gl_w)
