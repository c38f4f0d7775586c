"""Particle-position density for the Erlang-switched telegraph motion.

Internally everything is in normalized units (rate 1, speed 1). For a model
with rate ``lam`` and speed ``v``::

    f(t, x) = (lam / v) * fhat(lam * t, lam * x / v)

where ``fhat(tau, xi) = exp(-tau) * g(tau, xi)`` and ``g`` is the continuous
part written with Bessel functions of ``r = sqrt(tau^2 - xi^2)``.

Away from the light cone ``g`` is evaluated from its Bessel form. For
``r < series_radius`` the removable ``1/r`` and ``1/r^2`` singularities are
cancelled analytically and ``g`` is summed from parity-split series in
``w = r^2`` whose terms are all positive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .special_functions import bessel_i, bessel_j, split_series

__all__ = [
    "ModelParams",
    "DensityValue",
    "ConeTolerance",
    "OutsideSupportError",
    "UnsupportedClosedFormError",
    "atom_mass",
    "density_m1",
    "density_m2",
    "density",
    "boundary_limit",
    "competing_solution_g2",
    "gc_normalized",
    "u_closed_m2",
    "UNIT",
]


class OutsideSupportError(ValueError):
    pass


class UnsupportedClosedFormError(NotImplementedError):
    pass


@dataclass(frozen=True)
class ModelParams:
    m: int = 1
    lam: float = 1.0
    v: float = 1.0

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 1:
            raise ValueError(f"m must be a positive integer, got {self.m!r}")
        if not (self.lam > 0 and math.isfinite(self.lam)):
            raise ValueError(f"lam must be positive, got {self.lam!r}")
        if not (self.v > 0 and math.isfinite(self.v)):
            raise ValueError(f"v must be positive, got {self.v!r}")

    def with_m(self, m):
        return ModelParams(m, self.lam, self.v)


UNIT = ModelParams()

REGIONS = ("interior", "upper_cone", "lower_cone", "outside")


@dataclass(frozen=True)
class DensityValue:
    continuous: float
    atom_mass: float
    region: str

    def __post_init__(self):
        if self.region not in REGIONS:
            raise ValueError(f"unknown region {self.region!r}")


@dataclass(frozen=True)
class ConeTolerance:
    """``eps_cone`` classifies points as on the cone (relative to ``v t``);
    ``series_radius`` is where evaluation switches from Bessel to series form.
    """

    eps_cone: float = 1e-6
    series_radius: float = 0.5

    def __post_init__(self):
        if not 0 < self.eps_cone < 1:
            raise ValueError("eps_cone must lie in (0, 1)")
        if not self.series_radius > 0:
            raise ValueError("series_radius must be positive")


DEFAULT_CONE = ConeTolerance()


def atom_mass(params: ModelParams, t):
    """Probability that no velocity switch happened by time ``t``.

    This is the mass sitting at ``x = v t``: ``exp(-lam t) sum_{i<m} (lam t)^i / i!``.
    """
    if not t > 0:
        raise ValueError("t must be positive")
    tau = params.lam * t
    term = 1.0
    total = 1.0
    for i in range(1, params.m):
        term *= tau / i
        total += term
    return math.exp(-tau) * total


# --- normalized continuous parts g(tau, xi) --------------------------------


def _g_m1_bessel(tau, xi, r):
    return 0.5 * bessel_i(0, r) + (tau + xi) / (2 * r) * bessel_i(1, r)


def _g_m1_series(tau, xi, w):
    e1 = split_series(1, w, 0)
    o1 = split_series(1, w, 1)
    return 0.5 * (split_series(0, w, 0) + split_series(0, w, 1)) + 0.25 * (tau + xi) * (e1 + o1)


def _g_m2_bessel(tau, xi, r):
    i0, i1, i2 = (bessel_i(k, r) for k in range(3))
    j0, j1, j2 = (bessel_j(k, r) for k in range(3))
    return (
        -0.5 * j0
        + (tau + xi) / (2 * r) * i1
        - xi * xi / (2 * r**3) * (i1 + j1)
        + tau * tau / (4 * r * r) * (i0 + i2 + j0 - j2)
    )


def _g_m2_series(tau, xi, w):
    # the 1/r^2 pieces of the xi^2 and tau^2 terms combine to exactly 1/2
    # and cancel the constant of -J_0/2
    o0 = split_series(0, w, 1)
    e1 = split_series(1, w, 0)
    o1 = split_series(1, w, 1)
    o2 = split_series(2, w, 1)
    e0_red = split_series(0, w, 0, shift=1)
    e1_red = split_series(1, w, 0, shift=1)
    return 0.5 * o0 + 0.25 * (
        (tau + xi) * (e1 + o1) + 2 * xi * xi * (e0_red - e1_red) + 0.5 * tau * tau * o2
    )


_G = {1: (_g_m1_bessel, _g_m1_series), 2: (_g_m2_bessel, _g_m2_series)}


def gc_normalized(m, tau, xi, cone: ConeTolerance = DEFAULT_CONE):
    """Continuous part ``g`` (density times ``exp(tau)``) in normalized units.

    Requires ``|xi| <= tau``; on the cone itself the limit value is returned.
    """
    if m not in _G:
        raise UnsupportedClosedFormError(
            f"no closed-form density for m={m}; use erltel.monte_carlo instead"
        )
    tau = float(tau)
    xi = float(xi)
    if abs(xi) > tau:
        raise OutsideSupportError(f"|xi|={abs(xi)} exceeds tau={tau}")
    w = max((tau - xi) * (tau + xi), 0.0)
    bessel_form, series_form = _G[m]
    if w < cone.series_radius**2:
        return series_form(tau, xi, w)
    return bessel_form(tau, xi, math.sqrt(w))


def _continuous(m, params, t, x, cone):
    if not t > 0:
        raise ValueError("t must be positive")
    if params.m != m:
        raise ValueError(f"params.m={params.m} but this evaluator is for m={m}")
    if abs(x) > params.v * t:
        raise OutsideSupportError(f"|x|={abs(x)} exceeds v t={params.v * t}")
    tau = params.lam * t
    xi = params.lam * x / params.v
    return params.lam / params.v * math.exp(-tau) * gc_normalized(m, tau, xi, cone)


def density_m1(params: ModelParams, t, x, cone: ConeTolerance = DEFAULT_CONE):
    """Continuous density for exponential sojourns (m = 1)."""
    return _continuous(1, params, t, x, cone)


def density_m2(params: ModelParams, t, x, cone: ConeTolerance = DEFAULT_CONE):
    """Continuous density for 2-Erlang sojourns, from the Bessel closed form."""
    return _continuous(2, params, t, x, cone)


def boundary_limit(params: ModelParams, t, side):
    """Limit of the continuous density at ``x -> v t`` (upper) or ``x -> -v t`` (lower)."""
    if not t > 0:
        raise ValueError("t must be positive")
    scale = params.lam / params.v
    tau = params.lam * t
    if side == "upper":
        if params.m == 1:
            return scale * 0.5 * (1 + tau) * math.exp(-tau)
        return scale * tau ** (params.m - 1) * math.exp(-tau) / (2 * math.factorial(params.m - 1))
    if side == "lower":
        return scale * 0.5 * math.exp(-tau) if params.m == 1 else 0.0
    raise ValueError(f"side must be 'upper' or 'lower', got {side!r}")


def density(params: ModelParams, t, x, cone: ConeTolerance = DEFAULT_CONE) -> DensityValue:
    """Continuous density, atom mass and region at ``(t, x)``."""
    if not t > 0:
        raise ValueError("t must be positive")
    if params.m not in _G:
        raise UnsupportedClosedFormError(
            f"no closed-form density for m={params.m}; "
            "estimate it with erltel.monte_carlo.estimate_histogram"
        )
    vt = params.v * t
    slack = cone.eps_cone * vt
    if abs(x) > vt + slack:
        return DensityValue(0.0, 0.0, "outside")
    if abs(x - vt) <= slack:
        return DensityValue(boundary_limit(params, t, "upper"), atom_mass(params, t), "upper_cone")
    if abs(x + vt) <= slack:
        return DensityValue(boundary_limit(params, t, "lower"), 0.0, "lower_cone")
    return DensityValue(_continuous(params.m, params, t, x, cone), 0.0, "interior")


# --- m = 2 function table in Bessel form -----------------------------------


def _bessels(r):
    return [bessel_i(k, r) for k in range(3)], [bessel_j(k, r) for k in range(3)]


def u_closed_m2(l, k, t, y):
    """Bessel closed form of the m = 2 table entry ``u^l_k`` for ``k <= 4``.

    Valid for ``|y| < t`` (the expressions carry removable singularities on
    the cone). ``u^2_3`` uses coefficient ``t y / (t^2 - y^2)`` on its second
    line, which is what differentiating ``u^3_1`` gives.
    """
    l %= 4
    w = t * t - y * y
    if not w > 0:
        raise OutsideSupportError("Bessel form needs |y| < t")
    r = math.sqrt(w)
    (i0, i1, i2), (j0, j1, j2) = _bessels(r)
    odd_zero = {(1, 0), (3, 0), (0, 1), (2, 1), (0, 2), (2, 2), (1, 3), (3, 3), (1, 4), (3, 4)}
    if (l, k) in odd_zero:
        return 0.0
    if (l, k) == (0, 0):
        return 0.5 * (i0 + j0)
    if (l, k) == (2, 0):
        return 0.5 * (i0 - j0)
    if (l, k) == (1, 1):
        return y / r * (i1 + j1)
    if (l, k) == (3, 1):
        return y / r * (i1 - j1)
    if (l, k) == (1, 2):
        return t / r * (i1 + j1)
    if (l, k) == (3, 2):
        return t / r * (i1 - j1)
    if (l, k) == (0, 3):
        return -2 * t * y / r**3 * (i1 + j1) + t * y / w * (i0 + i2 + j0 - j2)
    if (l, k) == (2, 3):
        return -2 * t * y / r**3 * (i1 - j1) + t * y / w * (i0 + i2 - j0 + j2)
    if (l, k) == (0, 4):
        return -2 * y * y / r**3 * (i1 + j1) + t * t / w * (i0 + i2 + j0 - j2) - i0 - j0
    if (l, k) == (2, 4):
        return -2 * y * y / r**3 * (i1 - j1) + t * t / w * (i0 + i2 - j0 + j2) - i0 + j0
    raise KeyError(f"no closed form for u^{l}_{k}")


def competing_solution_g2(t, y, cone: ConeTolerance = DEFAULT_CONE):
    """``u^2_0 + u^0_4`` for m = 2 in normalized units, for ``|y| <= t``.

    Solves the same fourth-order equation as the m = 2 density but has the
    wrong cone limits; kept for the uniqueness checks.
    """
    t = float(t)
    y = float(y)
    if abs(y) > t:
        raise OutsideSupportError(f"|y|={abs(y)} exceeds t={t}")
    w = max((t - y) * (t + y), 0.0)
    if w >= cone.series_radius**2:
        return u_closed_m2(2, 0, t, y) + u_closed_m2(0, 4, t, y)
    o0 = split_series(0, w, 1)
    o2 = split_series(2, w, 1)
    e0_red = split_series(0, w, 0, shift=1)
    e1_red = split_series(1, w, 0, shift=1)
    return o0 + 2 * y * y * (e0_red - e1_red) + 0.5 * t * t * o2
