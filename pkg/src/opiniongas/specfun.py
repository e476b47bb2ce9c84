"""Modified Bessel functions of the second kind K_n, plain / scaled / ratio.

Every temperature-like formula in this package is expressed through the
exponentially scaled values e^x K_n(x), so that states with chi (= 1/theta)
anywhere in [1e-6, 1e6] stay representable: plain K_n underflows past
x ~ 745 while the scaled form is O(sqrt(pi/2x)) for all large x.

Evaluation is delegated to scipy.special.kve; `bessel_k` is defined as
e^{-x} * kve(n, x) so the identity

    bessel_k_scaled(n, x) * exp(-x) == bessel_k(n, x)

holds to the last bit wherever the left side does not underflow.
"""

from __future__ import annotations

import numpy as np
from scipy import special as _special

__all__ = ["bessel_k", "bessel_k_scaled", "bessel_k_ratio"]


def _validate(n, x):
    n_arr = np.asarray(n)
    if not np.issubdtype(n_arr.dtype, np.integer):
        if not np.all(n_arr == np.floor(n_arr)):
            raise ValueError(f"order must be a non-negative integer, got {n!r}")
    if np.any(n_arr < 0):
        raise ValueError(f"order must be a non-negative integer, got {n!r}")
    x_arr = np.asarray(x, dtype=float)
    if np.any(~(x_arr > 0.0)):  # catches non-positive and NaN
        raise ValueError(f"argument must be positive, got {x!r}")
    return n_arr, x_arr


def bessel_k(n, x):
    """K_n(x) for integer n >= 0 and x > 0.

    Accurate to machine precision for x in [1e-6, ~700]; underflows to 0
    beyond x ~ 745 (use `bessel_k_scaled` there).
    """
    n_arr, x_arr = _validate(n, x)
    out = _special.kve(n_arr, x_arr) * np.exp(-x_arr)
    return out if out.ndim else float(out)


def bessel_k_scaled(n, x):
    """e^x K_n(x); overflow/underflow free for x up to 1e6 and beyond."""
    n_arr, x_arr = _validate(n, x)
    out = _special.kve(n_arr, x_arr)
    return out if out.ndim else float(out)


def bessel_k_ratio(n, m, x):
    """K_n(x)/K_m(x), formed from scaled values (no intermediate under/overflow)."""
    n_arr, x_arr = _validate(n, x)
    m_arr, _ = _validate(m, x)
    out = _special.kve(n_arr, x_arr) / _special.kve(m_arr, x_arr)
    return out if out.ndim else float(out)
