"""Function tables u^l_k for the cyclic algebra with basis e_0 .. e_{2m-1}.

The algebra multiplies basis elements by adding indices mod 2m. Expanding
``I_0(e sqrt(t^2 - y^2))`` in that basis gives the seed functions ``u^l_0``;
higher subscripts follow from the first-order coupling relations between
``d/dt``, ``d/dy`` and neighbouring algebra indices.

Functions are carried as :class:`TermSum` objects: finite sums of
``t^a y^b S(w)`` with ``S`` a truncated power series in ``w = t^2 - y^2``.
That family is closed under differentiation, so every relation can be checked
exactly up to series truncation rather than by finite differences.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

__all__ = [
    "CyclicIndex",
    "PowerSeries",
    "TermSum",
    "UFunctionTable",
    "DomainError",
    "PrecisionLossError",
    "RELATIONS",
    "required_truncation",
    "u_zero",
    "diff_t",
    "diff_y",
    "generate_table",
    "evaluate",
    "cr_residual",
    "relation_sides",
    "relation_instances",
    "gc_m1",
    "gc_m2",
    "g2_competing",
]

SERIES_TAIL_TOL = 1e-17


class DomainError(ValueError):
    """Evaluation point lies outside the declared series domain."""


class PrecisionLossError(ArithmeticError):
    """A truncated series has no orders left to differentiate."""


@dataclass(frozen=True)
class CyclicIndex:
    """Residue ``l`` modulo ``2m``; ``+`` is addition mod 2m."""

    l: int
    m: int

    def __post_init__(self):
        if self.m < 1:
            raise ValueError(f"m must be positive, got {self.m}")
        if not 0 <= self.l < 2 * self.m:
            raise ValueError(f"index {self.l} outside 0..{2 * self.m - 1}")

    def __add__(self, other):
        step = other.l if isinstance(other, CyclicIndex) else int(other)
        return CyclicIndex((self.l + step) % (2 * self.m), self.m)

    def __int__(self):
        return self.l


class PowerSeries:
    """Truncated series ``sum_{n<=N} coeffs[n] w^n``; ``N`` is the order."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        c = np.array(coeffs, dtype=float)
        if c.ndim != 1 or c.size == 0:
            raise ValueError("coeffs must be a non-empty 1-d sequence")
        c.setflags(write=False)
        self.coeffs = c

    @property
    def order(self):
        return self.coeffs.size - 1

    def derivative(self):
        if self.order == 0:
            raise PrecisionLossError("series truncated at order 0 cannot be differentiated")
        return PowerSeries(self.coeffs[1:] * np.arange(1, self.coeffs.size))

    def __call__(self, w):
        # Horner, highest order first
        acc = 0.0
        for c in self.coeffs[::-1]:
            acc = acc * w + c
        return acc

    def __add__(self, other):
        # the sum is only known to the lower of the two orders
        n = min(self.coeffs.size, other.coeffs.size)
        return PowerSeries(self.coeffs[:n] + other.coeffs[:n])

    def scaled(self, c):
        return PowerSeries(self.coeffs * c)

    def tail_bound(self, w_max):
        """Magnitude of the last retained term at ``|w| = w_max``."""
        return abs(self.coeffs[-1]) * w_max**self.order

    def __repr__(self):
        return f"PowerSeries(order={self.order})"


@dataclass(frozen=True)
class TermSum:
    """``sum c t^a y^b S_ab(t^2 - y^2)`` with constants absorbed into ``S_ab``.

    ``radius`` bounds ``sqrt|w|`` on which the truncated series are trusted.
    Representations are not canonical (``t^2 = w + y^2``), so compare two
    TermSums by evaluating them, never by their terms.
    """

    terms: Mapping[tuple, PowerSeries] = field(default_factory=dict)
    radius: float = math.inf

    @classmethod
    def zero(cls, radius=math.inf):
        return cls({}, radius)

    def is_zero(self):
        return all(not np.any(s.coeffs) for s in self.terms.values())

    def _combine(self, pairs: Iterable, radius):
        out: dict = {}
        for key, s in pairs:
            out[key] = out[key] + s if key in out else s
        return TermSum(out, radius)

    def __add__(self, other):
        return self._combine(
            list(self.terms.items()) + list(other.terms.items()),
            min(self.radius, other.radius),
        )

    def __mul__(self, c):
        return TermSum({k: s.scaled(float(c)) for k, s in self.terms.items()}, self.radius)

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def __sub__(self, other):
        return self + (-other)

    @property
    def truncation(self):
        orders = [s.order for s in self.terms.values()]
        return min(orders) if orders else None

    def diff_t(self):
        pairs = []
        for (a, b), s in self.terms.items():
            if a > 0:
                pairs.append(((a - 1, b), s.scaled(a)))
            pairs.append(((a + 1, b), s.derivative().scaled(2.0)))
        return self._combine(pairs, self.radius)

    def diff_y(self):
        pairs = []
        for (a, b), s in self.terms.items():
            if b > 0:
                pairs.append(((a, b - 1), s.scaled(b)))
            pairs.append(((a, b + 1), s.derivative().scaled(-2.0)))
        return self._combine(pairs, self.radius)

    def __call__(self, t, y, allow_outside=False):
        return evaluate(self, t, y, allow_outside=allow_outside)

    def to_records(self):
        return [
            [1.0, a, b, s.coeffs.tolist()]
            for (a, b), s in sorted(self.terms.items())
        ]


def diff_t(f: TermSum) -> TermSum:
    """Exact ``d/dt`` of a TermSum; each series loses one order."""
    return f.diff_t()


def diff_y(f: TermSum) -> TermSum:
    """Exact ``d/dy`` of a TermSum; each series loses one order."""
    return f.diff_y()


def evaluate(f: TermSum, t, y, allow_outside=False):
    """Evaluate ``f`` at ``(t, y)`` with compensated summation over terms.

    Points with ``|y| > t`` lie outside the support and are rejected unless
    ``allow_outside`` is set. ``|t^2 - y^2|`` must not exceed ``radius^2``.
    """
    t = float(t)
    y = float(y)
    if not allow_outside and abs(y) > t:
        raise DomainError(f"(t={t}, y={y}) outside the support |y| <= t")
    w = t * t - y * y
    if abs(w) > f.radius**2 * (1 + 1e-12):
        raise DomainError(f"|t^2 - y^2| = {abs(w)} exceeds series domain radius^2 = {f.radius**2}")
    parts = [t**a * y**b * s(w) for (a, b), s in f.terms.items()]
    return math.fsum(parts)


def required_truncation(radius, extra_orders=0, tol=SERIES_TAIL_TOL):
    """Smallest ``N`` with ``(R^2/4)^N / (N!)^2 < tol``, plus headroom."""
    q = radius * radius / 4.0
    n = 0
    term = 1.0
    while term >= tol:
        n += 1
        term *= q / (n * n)
    return n + extra_orders


def u_zero(m: int, l: int, truncation=None, radius=4.0) -> TermSum:
    """Seed function ``u^l_0``: the ``e_l`` component of ``I_0(e sqrt(w))``.

    Since ``e^(2n) = e_(2n mod 2m)``, odd ``l`` components vanish and
    ``l = 2j`` collects the terms ``(w/4)^n / (n!)^2`` with ``n = j mod m``.
    """
    CyclicIndex(l, m)
    if l % 2:
        return TermSum.zero(radius)
    if truncation is None:
        truncation = required_truncation(radius)
    j = l // 2
    coeffs = np.zeros(truncation + 1)
    for n in range(j, truncation + 1, m):
        coeffs[n] = 0.25**n / math.factorial(n) ** 2
    return TermSum({(0, 0): PowerSeries(coeffs)}, radius)


@dataclass(frozen=True)
class UFunctionTable:
    m: int
    entries: Mapping[tuple, TermSum]
    max_k: int
    truncation: int
    radius: float

    def __getitem__(self, key):
        l, k = key
        if (l, k) not in self.entries:
            raise KeyError(f"u^{l}_{k} not in table (m={self.m}, max_k={self.max_k})")
        return self.entries[(l, k)]

    def u(self, l, k, t, y, allow_outside=False):
        return evaluate(self[(l % (2 * self.m), k)], t, y, allow_outside)

    def to_json(self, **kwargs):
        payload = {
            "m": self.m,
            "max_k": self.max_k,
            "truncation": self.truncation,
            "radius": self.radius,
            "entries": {f"u_{l}_{k}": f.to_records() for (l, k), f in sorted(self.entries.items())},
        }
        return json.dumps(payload, **kwargs)


def generate_table(m: int, max_k: int, truncation=None, radius=4.0) -> UFunctionTable:
    """Build ``u^l_k`` for ``0 <= l < 2m`` and ``0 <= k <= max_k``.

    Uses the t-derivative relations solved for the highest subscript:

        u^l_1 = -2 d/dy u^{l+1}_0
        u^l_2 =  2 d/dt u^{l+1}_0
        u^l_3 =  2 d/dt u^{l+1}_1
        u^l_4 =  2 d/dt u^{l+1}_2 - 2 u^l_0
        u^l_s =  2 d/dt u^{l+1}_{s-2} - u^l_{s-4}      (s >= 5)

    The y-derivative relations are left as independent checks
    (see :func:`cr_residual`).
    """
    if m < 1:
        raise ValueError("m must be positive")
    if max_k < 0:
        raise ValueError("max_k must be nonnegative")
    if truncation is None:
        truncation = required_truncation(radius, extra_orders=2 * max_k + 4)
    elif truncation <= max_k:
        raise PrecisionLossError(f"truncation {truncation} leaves no headroom for max_k={max_k}")
    size = 2 * m
    u: dict = {}
    for l in range(size):
        u[(l, 0)] = u_zero(m, l, truncation, radius)
    for s in range(1, max_k + 1):
        for l in range(size):
            nxt = (l + 1) % size
            if s == 1:
                u[(l, 1)] = -2.0 * diff_y(u[(nxt, 0)])
            elif s <= 3:
                u[(l, s)] = 2.0 * diff_t(u[(nxt, s - 2)])
            else:
                c = 2.0 if s == 4 else 1.0
                u[(l, s)] = 2.0 * diff_t(u[(nxt, s - 2)]) - c * u[(l, s - 4)]
    return UFunctionTable(m, u, max_k, truncation, radius)


# Coupling relations. Each maps an index k to
# (derivative axis, subscript differentiated at l+1, [(coef, subscript at l), ...]).
RELATIONS = {
    "t0": lambda k: ("t", 0, [(0.5, 2)]),
    "t1": lambda k: ("t", 1, [(0.5, 3)]),
    "t2": lambda k: ("t", 2, [(1.0, 0), (0.5, 4)]),
    "t_odd": lambda k: ("t", 2 * k - 1, [(0.5, 2 * k - 3), (0.5, 2 * k + 1)]),
    "t_even": lambda k: ("t", 2 * k, [(0.5, 2 * k - 2), (0.5, 2 * k + 2)]),
    "y0": lambda k: ("y", 0, [(-0.5, 1)]),
    "y1": lambda k: ("y", 1, [(1.0, 0), (-0.5, 4)]),
    "y2": lambda k: ("y", 2, [(-0.5, 3)]),
    "y_odd": lambda k: ("y", 2 * k + 1, [(0.5, 2 * k), (-0.5, 2 * k + 4)]),
    "y_even": lambda k: ("y", 2 * k + 2, [(0.5, 2 * k - 1), (-0.5, 2 * k + 3)]),
}
# smallest admissible k for the indexed families
_K_MIN = {"t_odd": 2, "t_even": 2, "y_odd": 1, "y_even": 1}


def relation_sides(table: UFunctionTable, relation: str, l: int, k=None):
    """Return the (lhs, rhs) TermSums of a coupling relation at index ``l``."""
    if relation not in RELATIONS:
        raise KeyError(f"unknown relation {relation!r}; expected one of {sorted(RELATIONS)}")
    if relation in _K_MIN:
        if k is None or k < _K_MIN[relation]:
            raise ValueError(f"relation {relation} needs k >= {_K_MIN[relation]}")
    axis, src, rhs_spec = RELATIONS[relation](k)
    size = 2 * table.m
    l = l % size
    f = table[((l + 1) % size, src)]
    lhs = diff_t(f) if axis == "t" else diff_y(f)
    rhs = TermSum.zero(table.radius)
    for c, sub in rhs_spec:
        rhs = rhs + c * table[(l, sub)]
    return lhs, rhs


def relation_instances(max_subscript: int, max_index: int = 4):
    """All (relation, k) pairs with ``k <= max_index`` the table can support."""
    out = []
    for name, rel in RELATIONS.items():
        ks = range(_K_MIN[name], max_index + 1) if name in _K_MIN else [None]
        for k in ks:
            _, src, rhs = rel(k)
            if max([src] + [s for _, s in rhs]) <= max_subscript:
                out.append((name, k))
    return out


def cr_residual(table: UFunctionTable, relation: str, l: int, t, y, k=None):
    """``|lhs - rhs|`` of a coupling relation evaluated at ``(t, y)``."""
    lhs, rhs = relation_sides(table, relation, l, k)
    return abs(evaluate(lhs, t, y) - evaluate(rhs, t, y))


def gc_m1(table: UFunctionTable) -> TermSum:
    """Continuous part for m = 1 (normalized units): ``u^0_0/2 + (u^1_1 + u^1_2)/4``."""
    if table.m != 1:
        raise ValueError("gc_m1 needs the m = 1 table")
    return 0.5 * table[(0, 0)] + 0.25 * (table[(1, 1)] + table[(1, 2)])


def gc_m2(table: UFunctionTable) -> TermSum:
    """Continuous part for m = 2: ``u^2_0/2 + (u^1_1+u^3_1+u^1_2+u^3_2+u^0_4)/4``."""
    if table.m != 2:
        raise ValueError("gc_m2 needs the m = 2 table")
    quarter = table[(1, 1)] + table[(3, 1)] + table[(1, 2)] + table[(3, 2)] + table[(0, 4)]
    return 0.5 * table[(2, 0)] + 0.25 * quarter


def g2_competing(table: UFunctionTable) -> TermSum:
    """The alternative m = 2 solution ``u^2_0 + u^0_4``."""
    if table.m != 2:
        raise ValueError("g2_competing needs the m = 2 table")
    return table[(2, 0)] + table[(0, 4)]
