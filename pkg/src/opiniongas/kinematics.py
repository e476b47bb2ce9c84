"""(1+1)-dimensional relativistic kinematics for bounded opinions.

Conventions used throughout the package:

- An opinion m lives in (-1, 1); its momentum is p = m*gamma(m) with the
  mass fixed to 1, so p is an unbounded real and |m| < 1 is automatic for
  every finite p. Momenta are stored as plain floats / numpy arrays; the
  derived energy p0 = sqrt(1+p^2) and opinion m = p/p0 are computed on
  demand.
- Metric eta = diag(1, -1); a.b = a0*b0 - a1*b1.
- The Moller velocity g = sqrt((a.b)^2 - 1)/(a0*b0) is evaluated in the
  computing frame (it equals |m_a - m_b| there and is frame dependent, as
  Moller velocities are); evaluated on center-of-momentum momenta it
  reduces to the invariant 2Q/P0 = 2Q/sqrt(s) and is bounded by 2.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

__all__ = [
    "TwoVector",
    "CmDecomposition",
    "gamma_of_opinion",
    "opinion_to_momentum",
    "momentum_to_opinion",
    "momentum_energy",
    "four_momentum",
    "minkowski_dot",
    "boost_momentum",
    "moller_velocity",
    "cm_decompose",
]


class TwoVector(NamedTuple):
    """Minkowski two-vector (a0, a1) with metric diag(1, -1)."""

    a0: float
    a1: float

    def dot(self, other: "TwoVector") -> float:
        return self.a0 * other.a0 - self.a1 * other.a1

    def __add__(self, other):
        return TwoVector(self.a0 + other.a0, self.a1 + other.a1)

    def __sub__(self, other):
        return TwoVector(self.a0 - other.a0, self.a1 - other.a1)

    def scaled(self, c: float) -> "TwoVector":
        return TwoVector(c * self.a0, c * self.a1)


def minkowski_dot(a: TwoVector, b: TwoVector) -> float:
    return a.a0 * b.a0 - a.a1 * b.a1


def gamma_of_opinion(m):
    """Lorentz factor gamma(m) = 1/sqrt(1-m^2); weights strong opinions."""
    m = np.asarray(m, dtype=float)
    if np.any(np.abs(m) >= 1.0):
        raise ValueError("opinion magnitude must be < 1 (causality bound)")
    out = 1.0 / np.sqrt((1.0 - m) * (1.0 + m))
    return out if out.ndim else float(out)


def opinion_to_momentum(m):
    """p = m*gamma(m). Raises for |m| >= 1 (causality bound)."""
    m = np.asarray(m, dtype=float)
    if np.any(np.abs(m) >= 1.0):
        raise ValueError("opinion magnitude must be < 1 (causality bound)")
    out = m / np.sqrt((1.0 - m) * (1.0 + m))
    return out if out.ndim else float(out)


def momentum_to_opinion(p):
    """m = p/p0; |m| < 1 for every finite p (rounds to +-1.0 past |p| ~ 1e8)."""
    p = np.asarray(p, dtype=float)
    out = p / np.hypot(1.0, p)  # hypot: no overflow for huge p
    return out if out.ndim else float(out)


def momentum_energy(p):
    """p0 = sqrt(1 + p^2) (mass fixed to 1)."""
    p = np.asarray(p, dtype=float)
    out = np.hypot(1.0, p)
    return out if out.ndim else float(out)


def four_momentum(p: float) -> TwoVector:
    return TwoVector(momentum_energy(p), float(p))


def boost_momentum(p, velocity):
    """Momentum in a frame moving with `velocity` relative to the current one.

    p' = gamma_v (p + v p0); |velocity| < 1.
    """
    if abs(velocity) >= 1.0:
        raise ValueError("boost velocity magnitude must be < 1")
    p = np.asarray(p, dtype=float)
    gv = 1.0 / np.sqrt((1.0 - velocity) * (1.0 + velocity))
    out = gv * (p + velocity * np.sqrt(1.0 + p * p))
    return out if out.ndim else float(out)


def moller_velocity(p, pstar):
    """Moller relative velocity of two unit-mass momenta, 0 <= g <= 2.

    Computed as |p*b0 - pstar*a0|/(a0*b0), the cancellation-free form of
    sqrt((a.b)^2 - 1)/(a0*b0); equals |m - m_star| and reduces to 2Q/P0 on
    center-of-momentum momenta.
    """
    p = np.asarray(p, dtype=float)
    pstar = np.asarray(pstar, dtype=float)
    e = np.sqrt(1.0 + p * p)
    estar = np.sqrt(1.0 + pstar * pstar)
    out = np.abs(p * estar - pstar * e) / (e * estar)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class CmDecomposition:
    """Total/relative split of a momentum pair.

    P = a + b and Q = a - b componentwise. For unit masses
    P.P + Q.Q = 2 a.a + 2 b.b = 4 exactly, so s = P.P = 4 - Q.Q
    (= 4 + Q_cm^2 with the spatial center-of-momentum magnitude) and
    qstar = sqrt(s) >= 2 is the total center-of-momentum energy.
    """

    total: TwoVector
    relative: TwoVector
    s: float
    qstar: float

    def reconstruct(self) -> tuple[float, float]:
        """Recover the original spatial momenta (a, b)."""
        a = 0.5 * (self.total.a1 + self.relative.a1)
        b = 0.5 * (self.total.a1 - self.relative.a1)
        return a, b


def cm_decompose(p, pstar) -> CmDecomposition:
    a = four_momentum(float(p))
    b = four_momentum(float(pstar))
    total = a + b
    relative = a - b
    s = minkowski_dot(total, total)
    return CmDecomposition(total=total, relative=relative, s=s, qstar=float(np.sqrt(s)))
