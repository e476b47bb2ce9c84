"""Closed-form companion results for the bounded opinion gas.

Contents:

- psi1 / psi1_zero: cooling rate parameter of the global interest under
  binary inelastic exchanges at equilibrium, d_t chi^{-1} =
  -n A (1-Lambda^2) psi1(chi, C) chi^{-1} with C the conserved
  U^1 K2/K1 combination. psi1(chi, 0) -> 1/8 as chi -> 0 and
  -> 2/sqrt(pi chi) as chi -> inf, with a peak 0.295 near chi = 4.14.
- psi2: analog for the drift toward an external party,
  d_t chi^{-1} = -B psi2(chi, P) chi^{-1}; limits 1 (chi -> 0) and
  2 (chi -> inf).
- chi_limit: the four limiting cooling laws integrated in closed form.
- u1_inelastic / u1_vlasov: mean-flow component at equilibrium.
- heating_rate_mj: equilibrium heating rate of a random momentum kick
  delta per exchange (elastic pairs, neutral mean opinion), as a double
  integral over opinion angles; heating_rate_quadratic is its exact
  small-delta quadratic term, with pointwise-even symmetrization making
  the numerics and the positivity manifest.
- steady_state_pdf: normalized steady opinion densities of the bounded
  Fokker-Planck family (three diffusivity variants) and the relativistic
  equilibrium transported to the opinion variable with |dp/dm| = gamma^3.

Every Bessel combination is evaluated with exponentially scaled values;
the common e^{-5 chi} factors of the psi ratios cancel identically, so
chi up to 1e6 is in range.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate

from .equilibrium import MjState, mj_pdf
from .kinematics import gamma_of_opinion, opinion_to_momentum
from .specfun import bessel_k_ratio, bessel_k_scaled

__all__ = [
    "CoolingCurve",
    "SteadyStateSpec",
    "psi1",
    "psi1_zero",
    "psi2",
    "chi_limit",
    "u1_inelastic",
    "u1_vlasov",
    "heating_rate_mj",
    "heating_rate_quadratic",
    "steady_state_pdf",
    "find_psi1_peak",
    "psi2_supremum",
    "tabulate_psi1",
    "tabulate_psi2",
]

STEADY_VARIANTS = ("toscani_sq", "toscani_abs", "toscani_lin", "relativistic")


class QuadratureError(RuntimeError):
    """Raised when an adaptive quadrature fails its self-consistency check."""


# ---------------------------------------------------------------------------
# cooling rate parameters
# ---------------------------------------------------------------------------

def _validate_chi(chi):
    chi = np.asarray(chi, dtype=float)
    if np.any(~(chi > 0.0)):
        raise ValueError("chi must be positive")
    return chi


def psi1(chi, c):
    """Cooling rate parameter of inelastic exchanges; even in c."""
    chi = _validate_chi(chi)
    c2 = float(c) * float(c)
    k0, k1, k2 = (bessel_k_scaled(i, chi) for i in (0, 1, 2))
    k0d, k1d, k2d = (bessel_k_scaled(i, 2.0 * chi) for i in (0, 1, 2))
    s = 1.0 + c2 * k1**2 / k2**2
    num = chi**2 * k2 * (2.0 * c2 * chi * k2d * k1**2 + (2.0 * chi * k0d + k1d) * k2**2)
    den = (
        2.0 * chi**2 * (c2 * chi**4 + 8.0 * c2 * chi**2 + 3.0 * chi**2 + 8.0) * k1**3 * k0**2
        + 2.0 * chi * (6.0 * chi**2 - c2 * chi**4 + 8.0 * chi**2 * c2 + 24.0) * k1**4 * k0
        - 2.0 * (c2 * chi**6 + 6.0 * c2 * chi**4 - 4.0 * chi**2 - 16.0) * k1**5
        + chi**3 * (4.0 * c2 * chi**2 + chi**2 - 8.0) * k1**2 * k0**3
        - chi**5 * k0**5
        - 6.0 * chi**4 * k1 * k0**4
    )
    out = num / (den * np.sqrt(s))
    return out if out.ndim else float(out)


def psi1_zero(chi):
    """psi1 at vanishing mean flow (same object, reduced form)."""
    chi = _validate_chi(chi)
    num = 2.0 * chi * bessel_k_scaled(0, 2.0 * chi) + bessel_k_scaled(1, 2.0 * chi)
    den = chi * (chi**2 + 4.0) * bessel_k_scaled(1, chi) ** 2 - chi**3 * bessel_k_scaled(0, chi) ** 2
    out = num / den
    return out if out.ndim else float(out)


def psi2(chi, p_drive):
    """Cooling rate parameter of the external-party drift; even in p_drive."""
    chi = _validate_chi(chi)
    p2 = float(p_drive) * float(p_drive)
    k0, k1, k2 = (bessel_k_scaled(i, chi) for i in (0, 1, 2))
    num = 4.0 * chi * k1 * k2 * (p2 * chi * k1**3 + 4.0 * p2 * k2 * k1**2 - p2 * chi * k2**2 * k1 + k2**3)
    den = (
        4.0 * p2 * k1**2 * (
            -2.0 * chi**2 * k0**3
            - chi * (chi**2 + 8.0) * k1 * k0**2
            + (chi**2 - 8.0) * k1**2 * k0
            + chi * (chi**2 + 6.0) * k1**3
        )
        + chi**2 * k2**5
        - 2.0 * chi**2 * k1**2 * k2**3
        + chi * (chi * k0 - 6.0 * k1) * k2**4
    )
    out = -num / den
    return out if out.ndim else float(out)


# ---------------------------------------------------------------------------
# limiting cooling laws and mean-flow solutions
# ---------------------------------------------------------------------------

_REGIMES = ("small_chi_collision", "large_chi_collision", "small_chi_vlasov", "large_chi_vlasov")


@dataclass(frozen=True)
class CoolingCurve:
    """A limiting cooling law: initial chi, rate constant, regime label."""

    chi0: float
    rate_const: float
    regime: str

    def __post_init__(self):
        if not self.chi0 > 0:
            raise ValueError("chi0 must be positive")
        if not self.rate_const > 0:
            raise ValueError("rate constant must be positive")
        if self.regime not in _REGIMES:
            raise ValueError(f"regime must be one of {_REGIMES}, got {self.regime!r}")


def chi_limit(curve: CoolingCurve, t):
    """Evaluate the limiting chi(t) law for t >= 0."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("time must be non-negative")
    if curve.regime == "small_chi_collision":
        out = curve.chi0 * np.exp(curve.rate_const * t / 8.0)
    elif curve.regime == "large_chi_collision":
        out = (curve.rate_const * t / np.sqrt(np.pi) + np.sqrt(curve.chi0)) ** 2
    elif curve.regime == "small_chi_vlasov":
        out = curve.chi0 * np.exp(curve.rate_const * t)
    else:
        out = curve.chi0 * np.exp(2.0 * curve.rate_const * t)
    return out if out.ndim else float(out)


def u1_inelastic(chi_t, c):
    """Mean flow U^1 = c K1(chi)/K2(chi) under pure inelastic exchanges."""
    chi_t = _validate_chi(chi_t)
    out = c * bessel_k_ratio(1, 2, chi_t)
    return out if np.ndim(out) else float(out)


def u1_vlasov(t, chi_t, p_drive, script_c, b):
    """Mean flow K1/K2 (P + C e^{-Bt}) under the external-party drift."""
    chi_t = _validate_chi(chi_t)
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("time must be non-negative")
    if not b > 0:
        raise ValueError("drift rate must be positive")
    out = bessel_k_ratio(1, 2, chi_t) * (p_drive + script_c * np.exp(-b * t))
    return out if np.ndim(out) else float(out)


# ---------------------------------------------------------------------------
# equilibrium heating rate of the random kick
# ---------------------------------------------------------------------------

def _gl_order(chi: float, order: int | None) -> int:
    if order is not None:
        return order
    # the integrand concentrates on angles ~ 1/sqrt(chi) around zero
    return min(800, max(160, int(6.0 * np.sqrt(chi))))


def _heating_integral(chi: float, delta: float, order: int) -> float:
    """Angle-space double integral over the triangle sigma < varpi.

    The energy-change factor is symmetrized pointwise in the sign of the
    kick (the integral is exactly even in delta), which removes the
    odd part analytically and leaves a manifestly non-negative, smooth
    integrand of quadratic size.
    """
    x, w = np.polynomial.legendre.leggauss(order)
    vp = 0.5 * np.pi * x  # nodes in (-pi/2, pi/2)
    wv = 0.5 * np.pi * w
    s = 0.5 * (x + 1.0)  # nodes in (0, 1)
    ws = 0.5 * w
    vpg, sg = np.meshgrid(vp, s, indexing="ij")
    sig = -0.5 * np.pi + sg * (vpg + 0.5 * np.pi)
    weight = np.outer(wv, ws) * (vpg + 0.5 * np.pi)
    tv, ts = np.tan(vpg), np.tan(sig)
    base = 1.0 / np.cos(vpg) + 1.0 / np.cos(sig)
    kick = np.abs(np.sin(vpg) - np.sin(sig)) * np.exp(-chi * (base - 2.0))

    def echange(d):
        # both orientations of the ordered pair, so the triangle covers the square
        e1 = np.sqrt((tv - d) ** 2 + 1.0) + np.sqrt((ts + d) ** 2 + 1.0) - base
        e2 = np.sqrt((ts - d) ** 2 + 1.0) + np.sqrt((tv + d) ** 2 + 1.0) - base
        return e1 + e2

    sym = 0.5 * (echange(delta) + echange(-delta))
    return float(np.sum(weight * kick * sym))


def heating_rate_mj(chi: float, delta: float, a: float = 1.0, n: float = 1.0,
                    order: int | None = None) -> float:
    """Equilibrium heating rate d_t e from a fixed kick delta (elastic pairs).

    Double Gauss-Legendre quadrature in the opinion angles (p = tan(angle));
    validated by comparing two quadrature orders. The value is even in
    delta and non-negative (the symmetrized energy change is pointwise
    non-negative by convexity of p0 in p).
    """
    chi = float(_validate_chi(chi))
    if delta == 0.0:
        return 0.0
    order = _gl_order(chi, order)
    pref = n * n * a / (8.0 * bessel_k_scaled(1, chi) ** 2)
    v1 = pref * _heating_integral(chi, delta, order)
    v2 = pref * _heating_integral(chi, delta, order + order // 2)
    if not abs(v1 - v2) <= 1e-6 * abs(v2) + 1e-280:
        raise QuadratureError(
            f"heating-rate quadrature did not converge at chi={chi}, delta={delta}: "
            f"order {order} -> {v1:.6e}, order {order + order // 2} -> {v2:.6e}"
        )
    return v2


def heating_rate_quadratic(chi: float, delta: float, a: float = 1.0, n: float = 1.0,
                           order: int | None = None) -> float:
    """Exact quadratic term of heating_rate_mj in the kick amplitude.

    The second delta-derivative of the energy change is
    cos^3(varpi) + cos^3(sigma), so the term is (delta^2/2) times its
    exchange-weighted equilibrium average; strictly positive.
    """
    chi = float(_validate_chi(chi))
    order = _gl_order(chi, order)
    x, w = np.polynomial.legendre.leggauss(order)
    vp = 0.5 * np.pi * x
    wv = 0.5 * np.pi * w
    vpg, sig = np.meshgrid(vp, vp, indexing="ij")
    weight = np.outer(wv, wv)
    base = 1.0 / np.cos(vpg) + 1.0 / np.cos(sig)
    kick = np.abs(np.sin(vpg) - np.sin(sig)) * np.exp(-chi * (base - 2.0))
    val = np.sum(weight * kick * 0.5 * delta**2 * (np.cos(vpg) ** 3 + np.cos(sig) ** 3))
    return float(n * n * a / (8.0 * bessel_k_scaled(1, chi) ** 2) * val)


# ---------------------------------------------------------------------------
# steady opinion densities
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SteadyStateSpec:
    """Steady-state family member: diffusivity variant, temperature, mean opinion."""

    variant: str
    lambda_: float
    mbar: float = 0.0

    def __post_init__(self):
        if self.variant not in STEADY_VARIANTS:
            raise ValueError(f"variant must be one of {STEADY_VARIANTS}, got {self.variant!r}")
        if not self.lambda_ > 0:
            raise ValueError("lambda must be positive")
        if not abs(self.mbar) < 1:
            raise ValueError("mean opinion magnitude must be < 1")


def _log_kernel(m: np.ndarray, spec: SteadyStateSpec) -> np.ndarray:
    lam, mb = spec.lambda_, spec.mbar
    if spec.variant == "toscani_sq":
        return (
            (-2.0 + mb / (2.0 * lam)) * np.log1p(m)
            + (-2.0 - mb / (2.0 * lam)) * np.log1p(-m)
            - (1.0 - mb * m) / (lam * (1.0 - m * m))
        )
    if spec.variant == "toscani_abs":
        am = np.abs(m)
        sgn = np.where(m >= 0.0, 1.0, -1.0)
        return (-2.0 - 2.0 / lam) * np.log1p(-am) - (1.0 - mb * sgn) / (2.0 * lam * (1.0 - am))
    if spec.variant == "toscani_lin":
        return ((1.0 + mb) / lam - 1.0) * np.log1p(m) + ((1.0 - mb) / lam - 1.0) * np.log1p(-m)
    # relativistic: gamma^3 |dp/dm| times the boosted equilibrium exponential
    gm = 1.0 / np.sqrt((1.0 - m) * (1.0 + m))
    gb = 1.0 / np.sqrt((1.0 - mb) * (1.0 + mb))
    chi = 1.0 / lam
    return 3.0 * np.log(gm) - chi * (gm * gb * (1.0 - m * mb) - 1.0)


@lru_cache(maxsize=256)
def _normalization(spec: SteadyStateSpec) -> tuple[float, float]:
    """(log_shift, integral) with density = exp(log_kernel - log_shift)/integral."""
    probe = np.tanh(np.linspace(-18.0, 18.0, 4001))
    logf = _log_kernel(probe, spec)
    shift = float(np.max(logf))
    if not np.isfinite(shift):
        bad = probe[np.argmax(~np.isfinite(logf))]
        raise ValueError(f"steady-state kernel diverges near m = {bad:+.3f}")

    def f(m):
        return np.exp(_log_kernel(np.asarray(m, float), spec) - shift)

    pieces = sorted({-1.0, 0.0, float(np.clip(spec.mbar, -0.999, 0.999)), 1.0})
    total = 0.0
    for lo, hi in zip(pieces[:-1], pieces[1:]):
        if hi <= lo:
            continue
        res = integrate.tanhsinh(f, lo, hi, atol=1e-14, rtol=1e-12)
        if not res.success:
            raise ValueError(
                f"steady-state normalization diverges on ({lo}, {hi}) for {spec}"
            )
        total += float(res.integral)
    if not (np.isfinite(total) and total > 0.0):
        raise ValueError(f"steady-state normalization is not integrable for {spec}")
    return shift, total


def steady_state_pdf(m, spec: SteadyStateSpec):
    """Normalized steady opinion density f(m) on (-1, 1), integral 1.

    The "relativistic" variant is the thermal equilibrium transported to
    the opinion variable, i.e. gamma^3(m) times the momentum-space
    equilibrium density at lambda = theta = 1/chi.
    """
    m_arr = np.asarray(m, dtype=float)
    if np.any(np.abs(m_arr) >= 1.0):
        raise ValueError("opinion magnitude must be < 1")
    shift, total = _normalization(spec)
    out = np.exp(_log_kernel(m_arr, spec) - shift) / total
    return out if out.ndim else float(out)


def transported_mj_pdf(m, chi: float, mbar: float = 0.0):
    """Equilibrium momentum density mapped to the opinion variable.

    gamma^3(m) * f_MJ(p(m)) with n = 1/U^0, so the result integrates to 1
    over (-1, 1); pointwise equal to steady_state_pdf('relativistic').
    """
    m_arr = np.asarray(m, dtype=float)
    u0 = gamma_of_opinion(mbar)
    state = MjState(n=1.0 / u0, ubar=mbar, chi=chi)
    out = gamma_of_opinion(m_arr) ** 3 * mj_pdf(opinion_to_momentum(m_arr), state)
    return out if np.ndim(out) else float(out)


# ---------------------------------------------------------------------------
# peak finding and tabulation
# ---------------------------------------------------------------------------

def _golden_max(fn, lo: float, hi: float, tol: float = 1e-6) -> tuple[float, float]:
    """Golden-section maximum of fn over [lo, hi] (log-x recommended outside)."""
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = fn(c), fn(d)
    while b - a > tol:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = fn(d)
    x = 0.5 * (a + b)
    return x, fn(x)


def find_psi1_peak(c: float = 0.0, chi_lo: float = 1e-2, chi_hi: float = 1e3,
                   tol: float = 1e-4) -> tuple[float, float]:
    """Locate the maximum of psi1(., c): coarse log-chi scan, then golden section."""
    grid = np.geomspace(chi_lo, chi_hi, 200)
    vals = psi1(grid, c)
    i = int(np.argmax(vals))
    lo = np.log(grid[max(i - 2, 0)])
    hi = np.log(grid[min(i + 2, grid.size - 1)])
    lx, v = _golden_max(lambda l: psi1(np.exp(l), c), lo, hi, tol=tol / 10.0)
    return float(np.exp(lx)), float(v)


def psi2_supremum(p_drive: float, chi_lo: float = 1e-3, chi_hi: float = 1e4) -> tuple[float, float]:
    """Largest psi2 over a log-chi grid (refined where the maximum is interior)."""
    grid = np.geomspace(chi_lo, chi_hi, 400)
    vals = psi2(grid, p_drive)
    i = int(np.argmax(vals))
    if 0 < i < grid.size - 1:
        lx, v = _golden_max(
            lambda l: psi2(np.exp(l), p_drive), np.log(grid[i - 1]), np.log(grid[i + 1]), tol=1e-7
        )
        return float(np.exp(lx)), float(v)
    return float(grid[i]), float(vals[i])


def tabulate_psi1(chis, cs) -> np.ndarray:
    """Rows (chi, c, psi1) over the grid product, for plotting."""
    rows = [(float(chi), float(c), float(psi1(chi, c))) for c in cs for chi in chis]
    return np.array(rows)


def tabulate_psi2(chis, p_drives) -> np.ndarray:
    """Rows (chi, P, psi2) over the grid product, for plotting."""
    rows = [(float(chi), float(p), float(psi2(chi, p))) for p in p_drives for chi in chis]
    return np.array(rows)
