"""Adaptive integration over the support ``[-v t, v t]``.

Integration is delegated to QUADPACK (``scipy.integrate.quad``, adaptive
21-point Gauss-Kronrod). The support is split just inside both cone points
so the adaptive bisection is not spent on the square-root behaviour of the
integrands' derivatives there.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy import integrate as _sp_integrate

from .algebra_series import UFunctionTable, evaluate
from .closed_form import ModelParams, atom_mass, density_m1, density_m2

__all__ = [
    "QuadratureSpec",
    "QuadratureError",
    "integrate",
    "integrate_support",
    "normalization_check",
    "u_integral",
    "INTEGRAL_IDENTITIES",
    "CONE_SPLIT",
]

CONE_SPLIT = 1e-4


class QuadratureError(ArithmeticError):
    def __init__(self, message, value, err_est):
        super().__init__(message)
        self.value = value
        self.err_est = err_est


@dataclass(frozen=True)
class QuadratureSpec:
    abs_tol: float = 1e-10
    rel_tol: float = 1e-12
    max_subdivisions: int = 2000

    def __post_init__(self):
        if not self.abs_tol > 0:
            raise ValueError("abs_tol must be positive")


DEFAULT_SPEC = QuadratureSpec()


def integrate(f, a, b, spec: QuadratureSpec = DEFAULT_SPEC):
    """Integrate ``f`` over ``[a, b]``; returns ``(value, err_est)``."""
    if not a < b:
        raise ValueError(f"need a < b, got [{a}, {b}]")
    value, err, info, *rest = _sp_integrate.quad(
        f, a, b, epsabs=spec.abs_tol, epsrel=spec.rel_tol,
        limit=spec.max_subdivisions, full_output=1,
    )
    if rest:
        # ier != 0; rest[0] is the QUADPACK message
        raise QuadratureError(f"integration over [{a}, {b}] failed: {rest[0]}", value, err)
    return value, err


def integrate_support(f, half_width, spec: QuadratureSpec = DEFAULT_SPEC):
    """Integrate over ``[-h, h]`` split at ``+-h (1 - CONE_SPLIT)``."""
    inner = half_width * (1 - CONE_SPLIT)
    pieces = [(-half_width, -inner), (-inner, inner), (inner, half_width)]
    total = 0.0
    err = 0.0
    for a, b in pieces:
        v, e = integrate(f, a, b, spec)
        total += v
        err += e
    return total, err


def normalization_check(params: ModelParams, t, spec: QuadratureSpec = DEFAULT_SPEC):
    """Total probability (continuous part plus atom); returns ``(total, |total - 1|)``."""
    if params.m == 1:
        fc = density_m1
    elif params.m == 2:
        fc = density_m2
    else:
        raise ValueError("normalization_check needs m in {1, 2}")
    vt = params.v * t
    cont, _ = integrate_support(lambda x: fc(params, t, min(max(x, -vt), vt)), vt, spec)
    total = cont + atom_mass(params, t)
    return total, abs(total - 1.0)


def u_integral(table: UFunctionTable, l, k, t, spec: QuadratureSpec = DEFAULT_SPEC):
    """``integral_{-t}^{t} u^l_k(t, y) dy`` for a generated table entry."""
    f = table[(l, k)]
    return integrate_support(lambda y: evaluate(f, t, min(max(y, -t), t)), t, spec)


# Closed-form values of the m = 2 table integrals over |y| <= t.
INTEGRAL_IDENTITIES = {
    (0, 0): lambda t: math.sinh(t) + math.sin(t),
    (2, 0): lambda t: math.sinh(t) - math.sin(t),
    (1, 1): lambda t: 0.0,
    (3, 1): lambda t: 0.0,
    (1, 2): lambda t: 2 * math.cosh(t) - 2 * math.cos(t),
    (3, 2): lambda t: 2 * math.cosh(t) + 2 * math.cos(t) - 4,
    (0, 4): lambda t: 2 * math.sinh(t) + 2 * math.sin(t) - 4 * t,
    (2, 4): lambda t: 2 * math.sinh(t) - 2 * math.sin(t),
}
