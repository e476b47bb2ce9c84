"""Binary inelastic exchange rules with a momentum-conserving random kick.

The direct rule moves both momenta toward their midpoint an amount set by
the inelasticity Lambda and adds/subtracts half of a shared perturbation
delta, so the pair momentum sum is conserved exactly:

    p'      = p      + (1+Lambda)/2 * (pstar - p + delta)
    pstar'  = pstar  - (1+Lambda)/2 * (pstar - p + delta)

Lambda = 1 with delta = 0 is the elastic swap; Lambda = 0 is the full
compromise (both at the midpoint, split by delta/2). Total energy
sqrt(1+p^2) + sqrt(1+pstar^2) is NOT conserved; the outcome records the
change. The inverse rule and its Jacobian are verification utilities for
the gain-term bookkeeping; the forward particle method never needs them.

All functions accept floats or same-shaped numpy arrays.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "CollisionParams",
    "CollisionOutcome",
    "sample_delta",
    "collide_direct",
    "collide_inverse",
    "jacobian",
    "energy_change",
]


@dataclass(frozen=True)
class CollisionParams:
    """Inelasticity coefficient (0..1) and perturbation amplitude (>=0)."""

    lambda_: float
    delta_amp: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.lambda_ <= 1.0:
            raise ValueError(f"inelasticity must be in [0, 1], got {self.lambda_}")
        if self.delta_amp < 0.0:
            raise ValueError(f"perturbation amplitude must be >= 0, got {self.delta_amp}")


@dataclass(frozen=True)
class CollisionOutcome:
    p_out: float
    pstar_out: float
    delta_used: float
    energy_change: float


def sample_delta(delta_amp, u):
    """Perturbation delta = delta_amp*(2u - 1) from a uniform draw u in [0,1]."""
    u = np.asarray(u, dtype=float)
    if np.any((u < 0.0) | (u > 1.0)):
        raise ValueError("uniform draw must lie in [0, 1]")
    out = delta_amp * (2.0 * u - 1.0)
    return out if out.ndim else float(out)


def _total_energy(p, pstar):
    return np.sqrt(1.0 + np.asarray(p, float) ** 2) + np.sqrt(1.0 + np.asarray(pstar, float) ** 2)


def energy_change(before, after):
    """Sum of p0 after minus before, for pairs (p, pstar)."""
    out = _total_energy(*after) - _total_energy(*before)
    return out if np.ndim(out) else float(out)


def collide_direct(p, pstar, params: CollisionParams, delta):
    """Apply the direct exchange rule; pair momentum sum preserved exactly."""
    p = np.asarray(p, dtype=float)
    pstar = np.asarray(pstar, dtype=float)
    h = 0.5 * (1.0 + params.lambda_) * (pstar - p + delta)
    p_out = p + h
    pstar_out = pstar - h
    de = energy_change((p, pstar), (p_out, pstar_out))
    if p_out.ndim:
        return CollisionOutcome(p_out, pstar_out, np.asarray(delta, float), de)
    return CollisionOutcome(float(p_out), float(pstar_out), float(delta), float(de))


def collide_inverse(p, pstar, params: CollisionParams, delta):
    """Pre-collision momenta that the direct rule maps onto (p, pstar).

    Defined only for Lambda > 0 (the compromise limit is not invertible).
    For delta = 0, collide_direct(collide_inverse(p, pstar)) == (p, pstar).
    """
    if params.lambda_ <= 0.0:
        raise ZeroDivisionError("inverse exchange undefined for zero inelasticity")
    p = np.asarray(p, dtype=float)
    pstar = np.asarray(pstar, dtype=float)
    h = 0.5 * (1.0 + params.lambda_) / params.lambda_ * (pstar - p + delta)
    pin, pstar_in = p + h, pstar - h
    if pin.ndim:
        return pin, pstar_in
    return float(pin), float(pstar_in)


def jacobian(params: CollisionParams, d_delta_dp=0.0, d_delta_dpstar=0.0):
    """|det d(p'', pstar'')/d(p, pstar)|^{-1} of the inverse exchange.

    For a perturbation independent of the colliding momenta (the simulated
    case) this is just Lambda.
    """
    if params.lambda_ <= 0.0:
        raise ZeroDivisionError("Jacobian undefined for zero inelasticity")
    bracket = 1.0 / params.lambda_ + 0.5 * (1.0 + 1.0 / params.lambda_) * (
        d_delta_dpstar - d_delta_dp
    )
    if bracket == 0.0:
        raise ZeroDivisionError("degenerate exchange map (vanishing Jacobian bracket)")
    return 1.0 / abs(bracket)
