"""Maxwell-Juttner equilibrium of the (1+1)-dimensional opinion gas.

The equilibrium density is

    f_MJ(p) = n / (2 K_1(chi)) * exp(-chi * p.U),      U = gamma(mbar)(1, mbar)

treated as a density in dp (number of opinions with momentum in dp is
f dp); the moment integrals N^a = int p^a f dp/p0 and
T^ab = int p^a p^b f dp/p0 then give N^a = n U^a and
T^ab = n [K2/K1 U^aU^b - eta^ab/chi].

The scalar energy per opinion follows from those moments:

    e(chi) = U_a T^ab U_b / n = K2(chi)/K1(chi) - 1/chi
           = 1/chi + K0(chi)/K1(chi),

strictly decreasing, -> 1 + 1/(2 chi) as chi -> inf and ~ 1/chi as
chi -> 0. Everything is evaluated through scaled Bessel functions so
chi up to 1e6 works.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .kinematics import TwoVector, gamma_of_opinion
from .specfun import bessel_k_ratio, bessel_k_scaled

__all__ = [
    "MjState",
    "mj_pdf",
    "mj_sample",
    "z_moments",
    "z_star_moments",
    "energy_density",
    "chi_from_energy",
]

_ETA = np.diag([1.0, -1.0])

# chi_from_energy switches to the asymptotic branch below this energy;
# energy_density(_CHI_HUGE) is still > 1 in double precision.
_CHI_HUGE = 1.0e9


@dataclass(frozen=True)
class MjState:
    """Equilibrium state: number density n, mean opinion mbar, chi = 1/theta."""

    n: float
    ubar: float
    chi: float

    def __post_init__(self):
        if not self.n > 0.0:
            raise ValueError(f"density must be positive, got {self.n}")
        if not abs(self.ubar) < 1.0:
            raise ValueError(f"mean opinion magnitude must be < 1, got {self.ubar}")
        if not self.chi > 0.0:
            raise ValueError(f"chi must be positive, got {self.chi}")

    @property
    def u(self) -> TwoVector:
        g = gamma_of_opinion(self.ubar)
        return TwoVector(g, g * self.ubar)


def mj_pdf(p, state: MjState):
    """Equilibrium density (in dp) at momentum p.

    The exponent is written as -chi (p.U - 1); p.U >= 1 for any timelike
    pair, so with the scaled K_1 the value is finite for chi up to 1e6.
    """
    p = np.asarray(p, dtype=float)
    u = state.u
    p0 = np.sqrt(1.0 + p * p)
    pdotu_minus_1 = p0 * u.a0 - p * u.a1 - 1.0
    out = state.n / (2.0 * bessel_k_scaled(1, state.chi)) * np.exp(-state.chi * pdotu_minus_1)
    return out if out.ndim else float(out)


def _sample_energy_shifted(chi, size, rng):
    """Draw x = p0 - 1 with density prop. to exp(-chi x) sqrt(1 + 1/(x(x+2))).

    Rejection from the mixture envelope exp(-chi x)(1 + 1/sqrt(2x)):
    an exponential (Laplace tail in |p|) plus a Gamma(1/2) component for
    the x -> 0 boundary layer. Acceptance tends to 1 in both chi limits.
    """
    out = np.empty(size)
    filled = 0
    w_exp = 1.0 / chi
    w_gam = np.sqrt(np.pi / (2.0 * chi))
    p_exp = w_exp / (w_exp + w_gam)
    while filled < size:
        need = size - filled
        n_try = int(1.25 * need) + 16
        take_exp = rng.random(n_try) < p_exp
        x = np.where(
            take_exp,
            rng.exponential(1.0 / chi, n_try),
            rng.standard_normal(n_try) ** 2 / (2.0 * chi),
        )
        x = np.maximum(x, 1e-300)
        envelope = 1.0 + 1.0 / np.sqrt(2.0 * x)
        target = np.sqrt(1.0 + 1.0 / (x * (x + 2.0)))
        accepted = x[rng.random(n_try) * envelope < target]
        k = min(need, accepted.size)
        out[filled : filled + k] = accepted[:k]
        filled += k
    return out


def mj_sample(state: MjState, rng, size=None):
    """Draw momenta with density prop. to exp(-chi p.U) in the dp measure.

    Rest-frame magnitudes come from the rejection sampler above; the sign
    is then taken + with probability (1 + v|m|)/2 (v = mbar) before
    boosting, which supplies exactly the flux factor by which the boosted
    dp-density differs from a plainly boosted sample.

    Mutates only the caller-supplied generator; concurrent use requires
    independent generators.
    """
    n = 1 if size is None else int(size)
    x = _sample_energy_shifted(state.chi, n, rng)
    p_abs = np.sqrt(x * (x + 2.0))  # |p| = sqrt(p0^2 - 1)
    v = state.ubar
    if v == 0.0:
        sign = np.where(rng.random(n) < 0.5, 1.0, -1.0)
        p = sign * p_abs
    else:
        m_abs = p_abs / (1.0 + x)  # |p|/p0
        prob_plus = 0.5 * (1.0 + v * m_abs)
        sign = np.where(rng.random(n) < prob_plus, 1.0, -1.0)
        p = sign * p_abs
        gv = gamma_of_opinion(v)
        p = gv * (p + v * (1.0 + x))  # boost with p0 = 1 + x
    return float(p[0]) if size is None else p


def _u_outer(u: TwoVector, rank: int) -> np.ndarray:
    vec = np.array([u.a0, u.a1])
    out = np.array(1.0)
    for _ in range(rank):
        out = np.multiply.outer(out, vec)
    return out


def z_moments(chi: float, u: TwoVector, rank: int, scaled: bool = False):
    """Moment tensors Z^{a...} = int p^a... exp(-chi p.U) dp/p0, rank 0..4.

    Closed forms in K_n(chi) and the metric; `scaled` multiplies by e^chi
    (i.e. uses e^chi K_n throughout), useful for large chi.
    """
    if not chi > 0:
        raise ValueError("chi must be positive")
    if not np.isclose(u.dot(u), 1.0, rtol=0, atol=1e-10):
        raise ValueError("flow vector must be normalized (U.U = 1)")
    if rank not in (0, 1, 2, 3, 4):
        raise ValueError("rank must be in 0..4")
    k = [bessel_k_scaled(i, chi) for i in range(5)]
    if not scaled:
        k = [ki * np.exp(-chi) for ki in k]
    uu = [_u_outer(u, r) for r in range(5)]
    eta = _ETA
    if rank == 0:
        return 2.0 * k[0]
    if rank == 1:
        return 2.0 * k[1] * uu[1]
    if rank == 2:
        return 2.0 * k[2] * uu[2] - 2.0 * eta * k[1] / chi
    if rank == 3:
        sym = (
            np.einsum("ab,c->abc", eta, uu[1])
            + np.einsum("ac,b->abc", eta, uu[1])
            + np.einsum("bc,a->abc", eta, uu[1])
        )
        return 2.0 * k[3] * uu[3] - 2.0 * sym * k[2] / chi
    sym3 = (
        np.einsum("ab,cd->abcd", eta, uu[2])
        + np.einsum("ac,bd->abcd", eta, uu[2])
        + np.einsum("bc,ad->abcd", eta, uu[2])
        + np.einsum("ad,cb->abcd", eta, uu[2])
        + np.einsum("dc,ba->abcd", eta, uu[2])
        + np.einsum("db,ac->abcd", eta, uu[2])
    )
    sym_ee = (
        np.einsum("ab,cd->abcd", eta, eta)
        + np.einsum("ac,bd->abcd", eta, eta)
        + np.einsum("ad,bc->abcd", eta, eta)
    )
    return 2.0 * k[4] * uu[4] - 2.0 * k[3] / chi * sym3 + 2.0 * k[2] / chi**2 * sym_ee


def z_star_moments(chi: float, qstar: float, u: TwoVector, rank: int):
    """Pair-momentum moments on the mass-(qstar) shell, rank 0..2.

    Z*^{a...} = int P^a... exp(-chi P.U) dP/P0 with P.P = qstar^2.
    """
    if not chi > 0:
        raise ValueError("chi must be positive")
    if qstar < 2.0:
        raise ValueError("qstar must be >= 2 for a unit-mass pair")
    if not np.isclose(u.dot(u), 1.0, rtol=0, atol=1e-10):
        raise ValueError("flow vector must be normalized (U.U = 1)")
    if rank not in (0, 1, 2):
        raise ValueError("rank must be in 0..2")
    z = qstar * chi
    k = [bessel_k_scaled(i, z) * np.exp(-z) for i in range(3)]
    if rank == 0:
        return 2.0 * k[0]
    if rank == 1:
        return 2.0 * qstar * k[1] * _u_outer(u, 1)
    return 2.0 * qstar**2 * k[2] * _u_outer(u, 2) - 2.0 * qstar * _ETA * k[1] / chi


def energy_density(chi):
    """Equilibrium energy per opinion e(chi) = 1/chi + K0(chi)/K1(chi)."""
    chi = np.asarray(chi, dtype=float)
    if np.any(~(chi > 0.0)):
        raise ValueError("chi must be positive")
    out = 1.0 / chi + bessel_k_ratio(0, 1, chi)
    return out if out.ndim else float(out)


def chi_from_energy(e: float) -> float:
    """Invert energy_density: the chi with |e(chi) - e| < 1e-10 e.

    Bracketed bisection (brentq) on log(chi) over [1e-9, 1e9]; the flat
    large-chi tail (e - 1 ~ 1/(2 chi)) is handled by an asymptotic branch.
    """
    e = float(e)
    if not e > 1.0:
        raise ValueError(f"energy per opinion must exceed the rest value 1, got {e}")
    if e <= energy_density(_CHI_HUGE):
        # e - 1 = 1/(2 chi) (1 + O(1/chi)); relative error < 1/chi <= 1e-9
        return 0.5 / (e - 1.0)
    if e >= energy_density(1e-9):
        return 1.0 / e  # ultra-relativistic tail, e ~ 1/chi
    log_chi = brentq(
        lambda lc: energy_density(np.exp(lc)) - e,
        np.log(1e-9),
        np.log(_CHI_HUGE),
        xtol=1e-13,
        rtol=8.9e-16,
        maxiter=200,
    )
    return float(np.exp(log_chi))
