"""Bessel functions J_k and I_k of the first kind for small integer orders.

Both are summed from the ascending power series

    J_k(r) = sum_n (-1)^n (r/2)^(2n+k) / (n! (n+k)!)
    I_k(r) = sum_n        (r/2)^(2n+k) / (n! (n+k)!)

term by term until the term magnitude drops below ``abs_tol``. There is no
asymptotic branch: arguments outside the convergence budget raise
:class:`BesselEvaluationError` instead of returning a degraded value.

The alternating J series loses roughly ``max_term * eps`` absolute accuracy
to cancellation, so J additionally refuses arguments where that loss would
exceed ``cancellation_tol``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "EvalTolerance",
    "BesselEvaluationError",
    "bessel_j",
    "bessel_i",
    "DEFAULT_TOLERANCE",
    "split_series",
]

MAX_ORDER = 4
EPS = np.finfo(float).eps


class BesselEvaluationError(ArithmeticError):
    """Series evaluation failed for order ``k`` at argument ``r``."""

    def __init__(self, k, r, reason):
        self.k = k
        self.r = r
        super().__init__(f"Bessel series for order {k} at r={r!r}: {reason}")


@dataclass(frozen=True)
class EvalTolerance:
    abs_tol: float = 1e-15
    max_terms: int = 200
    max_arg: float = 50.0
    cancellation_tol: float = 1e-10

    def __post_init__(self):
        if not self.abs_tol > 0:
            raise ValueError("abs_tol must be positive")
        if self.max_terms < 1:
            raise ValueError("max_terms must be >= 1")


DEFAULT_TOLERANCE = EvalTolerance()


def _series(k, r, sign, tol):
    if not isinstance(k, (int, np.integer)) or k < 0:
        raise ValueError(f"order must be a nonnegative integer, got {k!r}")
    k = int(k)
    arr = np.asarray(r, dtype=float)
    scalar = arr.ndim == 0
    x = np.atleast_1d(arr)
    if np.any(~np.isfinite(x)) or np.any(x < 0):
        raise BesselEvaluationError(k, r, "argument must be finite and >= 0")
    if x.size and x.max() > tol.max_arg:
        raise BesselEvaluationError(k, float(x.max()), f"argument beyond budget {tol.max_arg}")

    half = 0.5 * x
    q = half * half
    term = half**k / math.factorial(k)
    total = term.copy()
    biggest = np.abs(term)
    n = 0
    while True:
        n += 1
        if n >= tol.max_terms:
            raise BesselEvaluationError(k, float(x.max()), f"no convergence within {tol.max_terms} terms")
        term = term * (sign * q / (n * (n + k)))
        total += term
        mag = np.abs(term)
        np.maximum(biggest, mag, out=biggest)
        # stop once past the peak term and below tolerance everywhere
        if np.all((mag < tol.abs_tol) | (mag == 0)) and n > half.max():
            break

    if sign < 0 and np.any(biggest * EPS > tol.cancellation_tol):
        bad = float(x[np.argmax(biggest)])
        raise BesselEvaluationError(k, bad, "cancellation in alternating series exceeds budget")
    return float(total[0]) if scalar else total.reshape(arr.shape)


def bessel_j(k, r, tol: EvalTolerance = DEFAULT_TOLERANCE):
    """Bessel function of the first kind ``J_k(r)`` for ``r >= 0``.

    Accepts a scalar or an array for ``r``; returns the same shape.
    """
    return _series(k, r, -1.0, tol)


def bessel_i(k, r, tol: EvalTolerance = DEFAULT_TOLERANCE):
    """Modified Bessel function of the first kind ``I_k(r)`` for ``r >= 0``."""
    return _series(k, r, 1.0, tol)


def split_series(k, w, parity, shift=0, tol=1e-17, max_terms=400):
    """Parity-split Bessel series in ``w = r^2``.

    Returns ``sum c_n w^(n - shift)`` over ``n >= shift`` with ``n % 2 == parity``
    and ``c_n = (1/4)^n / (n! (n+k)!)``. With ``shift = 0``,

        I_k(r) + J_k(r) = 2 (r/2)^k * split_series(k, r^2, 0)
        I_k(r) - J_k(r) = 2 (r/2)^k * split_series(k, r^2, 1)

    All coefficients are positive, so for ``w >= 0`` there is no cancellation.
    ``shift = 1`` divides out one power of ``w`` after dropping ``n = 0``,
    which is how the removable ``1/r^2`` singularities are handled.
    """
    arr = np.asarray(w, dtype=float)
    x = np.atleast_1d(arr)
    total = np.zeros_like(x)
    n = shift + ((parity - shift) % 2)
    coef = 0.25**n / (math.factorial(n) * math.factorial(n + k))
    power = x ** (n - shift)
    scale = np.maximum(1.0, np.abs(total))
    for _ in range(max_terms):
        term = coef * power
        total += term
        scale = np.maximum(scale, np.abs(total))
        if np.all(np.abs(term) <= tol * scale):
            break
        coef *= 0.25**2 / ((n + 1) * (n + 2) * (n + k + 1) * (n + k + 2))
        power = power * x * x
        n += 2
    else:
        raise BesselEvaluationError(k, float(np.max(np.abs(x))), "split series did not converge")
    return float(total[0]) if arr.ndim == 0 else total.reshape(arr.shape)
