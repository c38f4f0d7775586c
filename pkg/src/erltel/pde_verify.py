"""Residual checks of the hyperbolic equations solved by the closed forms.

Two independent routes:

* :func:`residual_grid` applies centred finite-difference stencils to a field
  given as a Python callable and reports max/rms residuals on a fixed set of
  sample points, with a convergence-order estimate from ``h`` and ``h/2``.
* :func:`residual_exact` applies the operator symbolically to a
  :class:`~erltel.algebra_series.TermSum`.

Operators (normalized units, ``y = x``):

=========  =====================================================
``eq11``   ``(d_tt - d_yy) g - g``
``eq14``   ``(d_tt - d_yy)^2 g - g``
``eq12``   ``(d_t - d_x + 1)(d_t + d_x + 1) f - f``
``eq1_m2`` ``(d_t - d_x + 1)^2 (d_t + d_x + 1)^2 f - f``
=========  =====================================================
"""

from __future__ import annotations

import json
import math
from collections import defaultdict
from dataclasses import asdict, dataclass

import numpy as np

from .algebra_series import TermSum, diff_t, diff_y
from .closed_form import (
    ModelParams,
    boundary_limit,
    competing_solution_g2,
    density,
    gc_normalized,
)
from .monte_carlo import estimate_windows

__all__ = [
    "GridSpec",
    "ResidualReport",
    "StencilExitError",
    "OPERATORS",
    "residual_grid",
    "residual_exact",
    "apply_operator",
    "verify_conditions",
    "field_gc",
    "field_fc",
    "field_g2",
]


class StencilExitError(ValueError):
    """A stencil point falls outside ``|y| <= t``."""


@dataclass(frozen=True)
class GridSpec:
    t_range: tuple = (1.0, 2.0)
    y_fraction: float = 0.8
    h: float = 1e-2
    stencil_order: int = 2
    n_t: int = 5
    n_y: int = 5

    def __post_init__(self):
        t0, t1 = self.t_range
        if not 0 < t0 <= t1:
            raise ValueError("need 0 < t0 <= t1")
        if not 0 < self.y_fraction < 1:
            raise ValueError("y_fraction must lie in (0, 1)")
        if not self.h > 0:
            raise ValueError("h must be positive")
        if self.stencil_order not in (2, 4):
            raise ValueError("stencil_order must be 2 or 4")

    def points(self):
        t0, t1 = self.t_range
        out = []
        for t in np.linspace(t0, t1, self.n_t):
            for y in np.linspace(-self.y_fraction * t, self.y_fraction * t, self.n_y):
                out.append((float(t), float(y)))
        return out

    def halved(self):
        return GridSpec(self.t_range, self.y_fraction, self.h / 2, self.stencil_order, self.n_t, self.n_y)


@dataclass(frozen=True)
class ResidualReport:
    max_abs: float
    rms: float
    grid: GridSpec
    operator_id: str
    convergence_order_est: float

    def to_json(self, **kwargs):
        d = asdict(self)
        d["grid"]["t_range"] = list(self.grid.t_range)
        return json.dumps(d, **kwargs)


# 1-d stencils as {offset: weight} in units of h
_D1 = {
    2: {-1: -0.5, 1: 0.5},
    4: {-2: 1 / 12, -1: -8 / 12, 1: 8 / 12, 2: -1 / 12},
}
_D2 = {
    2: {-1: 1.0, 0: -2.0, 1: 1.0},
    4: {-2: -1 / 12, -1: 16 / 12, 0: -30 / 12, 1: 16 / 12, 2: -1 / 12},
}


class _Op:
    """Linear combination of shifts: {(i, j): {power_of_h: weight}}."""

    def __init__(self, terms=None):
        self.terms = terms or {}

    @classmethod
    def shift_sum(cls, stencil, axis, power):
        terms = defaultdict(lambda: defaultdict(float))
        for k, w in stencil.items():
            key = (k, 0) if axis == "t" else (0, k)
            terms[key][power] += w
        return cls(terms)

    @classmethod
    def identity(cls, c=1.0):
        return cls({(0, 0): {0: c}})

    def __add__(self, other):
        terms = defaultdict(lambda: defaultdict(float))
        for src in (self.terms, other.terms):
            for key, byp in src.items():
                for p, w in byp.items():
                    terms[key][p] += w
        return _Op(terms)

    def __rmul__(self, c):
        return _Op({k: {p: c * w for p, w in byp.items()} for k, byp in self.terms.items()})

    def __matmul__(self, other):
        terms = defaultdict(lambda: defaultdict(float))
        for (i1, j1), a in self.terms.items():
            for (i2, j2), b in other.terms.items():
                for p1, w1 in a.items():
                    for p2, w2 in b.items():
                        terms[(i1 + i2, j1 + j2)][p1 + p2] += w1 * w2
        return _Op(terms)

    def weights(self, h):
        return {k: sum(w / h**p for p, w in byp.items()) for k, byp in self.terms.items()}

    def reach(self):
        return max(max(abs(i), abs(j)) for i, j in self.terms)


def _operator(operator_id, order, params=None):
    dtt = _Op.shift_sum(_D2[order], "t", 2)
    dyy = _Op.shift_sum(_D2[order], "y", 2)
    dt = _Op.shift_sum(_D1[order], "t", 1)
    wave = dtt + (-1.0) * dyy
    if operator_id == "eq11":
        return wave, 1.0
    if operator_id == "eq14":
        return wave @ wave, 1.0
    if operator_id == "eq12":
        return dtt + 2.0 * dt + (-1.0) * dyy, 0.0
    if operator_id == "eq1_m2":
        # general (m, lam, v) may be passed; the id names the default m = 2 case
        p = params or ModelParams(2)
        damped = dtt + (2 * p.lam) * dt + _Op.identity(p.lam**2) + (-(p.v**2)) * dyy
        op = damped
        for _ in range(p.m - 1):
            op = op @ damped
        return op, p.lam ** (2 * p.m)
    raise KeyError(f"unknown operator {operator_id!r}")


OPERATORS = ("eq11", "eq14", "eq12", "eq1_m2")


def apply_operator(field, operator_id, grid: GridSpec, params=None, check_support=True):
    """Discrete operator applied to ``field`` at every grid point (no identity term)."""
    op, _ = _operator(operator_id, grid.stencil_order, params)
    weights = op.weights(grid.h)
    reach = op.reach() * grid.h
    out = []
    for t, y in grid.points():
        if check_support and abs(y) + reach > t - reach:
            raise StencilExitError(
                f"stencil of reach {reach:g} at (t={t:g}, y={y:g}) leaves |y| <= t"
            )
        acc = math.fsum(w * field(t + i * grid.h, y + j * grid.h) for (i, j), w in weights.items())
        out.append(acc)
    return np.array(out)


def _residuals(field, operator_id, grid, params):
    _, c = _operator(operator_id, grid.stencil_order, params)
    lhs = apply_operator(field, operator_id, grid, params)
    base = np.array([field(t, y) for t, y in grid.points()])
    return lhs - c * base


def residual_grid(field, operator_id, grid: GridSpec, params=None) -> ResidualReport:
    """Finite-difference residual of ``field`` under ``operator_id``.

    The convergence order is ``log2(max_abs(h) / max_abs(h/2))``; it is NaN
    when both residuals vanish.
    """
    if operator_id not in OPERATORS:
        raise KeyError(f"unknown operator {operator_id!r}")
    res = _residuals(field, operator_id, grid, params)
    res_half = _residuals(field, operator_id, grid.halved(), params)
    max_abs = float(np.max(np.abs(res)))
    rms = float(np.sqrt(np.mean(res**2)))
    half_max = float(np.max(np.abs(res_half)))
    if max_abs == 0 and half_max == 0:
        order = float("nan")
    elif half_max == 0:
        order = float("inf")
    else:
        order = math.log2(max_abs / half_max)
    return ResidualReport(max_abs, rms, grid, operator_id, order)


def residual_exact(f: TermSum, m: int) -> TermSum:
    """``(d_tt - d_yy)^m f - f`` computed term by term."""
    out = f
    for _ in range(m):
        out = diff_t(diff_t(out)) - diff_y(diff_y(out))
    return out - f


def field_gc(m):
    """Continuous part ``g(t, y)`` in normalized units."""
    return lambda t, y: gc_normalized(m, t, y)


def field_fc(m):
    """Continuous density ``exp(-t) g(t, x)`` in normalized units."""
    return lambda t, x: math.exp(-t) * gc_normalized(m, t, x)


def field_g2():
    return lambda t, y: competing_solution_g2(t, y)


def _cone_value(params, t, side, rel=1e-8):
    x = params.v * t * (1 - rel)
    return density(params, t, x if side == "upper" else -x).continuous


def verify_conditions(params: ModelParams, t_list, eps=0.02, n_samples=1_000_000, seed=0,
                      rel_tol=1e-6, workers=None):
    """Cone-limit conditions checked by the closed form and by simulation.

    For each ``t`` and side the report carries the closed-form value just
    inside the cone, the exact limit, and the simulated window rate. A
    nonzero limit must match the window rate within ``3 sigma + 0.01 limit``.
    A zero limit cannot be hit by a finite window, so there the check is that
    the rate shrinks in proportion to ``eps`` (``rate(eps) ~ 2 rate(eps/2)``).
    """
    if params.m not in (1, 2):
        raise ValueError("verify_conditions needs m in {1, 2}")
    report = []
    for t in t_list:
        wide = estimate_windows(params, t, eps, n_samples, seed, workers)
        narrow = estimate_windows(params, t, eps / 2, n_samples, seed + 1, workers)
        for side in ("upper", "lower"):
            limit = boundary_limit(params, t, side)
            closed = _cone_value(params, t, side)
            scale = max(abs(limit), params.lam / params.v * 1e-3)
            closed_ok = abs(closed - limit) <= rel_tol * scale
            est = wide[side]
            if limit > 0:
                mc_tol = 3 * est.stderr + 0.01 * limit
                mc_dev = abs(est.rate_hat - limit)
                rule = "3sigma+0.01*limit"
            else:
                half = narrow[side]
                mc_tol = 3 * math.hypot(est.stderr, 2 * half.stderr)
                mc_dev = abs(est.rate_hat - 2 * half.rate_hat)
                rule = "rate(eps)-2*rate(eps/2) within 3sigma"
            report.append({
                "m": params.m,
                "t": t,
                "side": side,
                "limit": limit,
                "closed_form": closed,
                "closed_form_pass": bool(closed_ok),
                "mc_rate": est.rate_hat,
                "mc_stderr": est.stderr,
                "mc_rule": rule,
                "mc_deviation": mc_dev,
                "mc_tolerance": mc_tol,
                "mc_pass": bool(mc_dev <= mc_tol),
            })
    return report
