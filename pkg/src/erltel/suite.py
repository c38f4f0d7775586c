"""Verification checks grouped into suites for ``erltel verify``.

Every check is a plain dict with ``suite, name, target, obtained, tolerance,
passed``; ``obtained`` is whatever quantity the tolerance applies to (a value
or a deviation, as the name says).
"""

from __future__ import annotations

import math

import numpy as np

from . import algebra_series as alg
from .closed_form import (
    ModelParams,
    atom_mass,
    boundary_limit,
    competing_solution_g2,
    density,
    gc_normalized,
)
from .monte_carlo import SimConfig, estimate_histogram
from .pde_verify import (
    GridSpec,
    field_fc,
    field_g2,
    field_gc,
    residual_exact,
    residual_grid,
    verify_conditions,
)
from .quadrature import INTEGRAL_IDENTITIES, integrate, normalization_check, u_integral

SUITES = ("normalization", "boundary", "cr", "integrals", "pde", "mc")


def _check(suite, name, target, obtained, tolerance, passed=None):
    if passed is None:
        passed = abs(obtained - target) <= tolerance
    return {
        "suite": suite,
        "name": name,
        "target": target,
        "obtained": obtained,
        "tolerance": tolerance,
        "passed": bool(passed),
    }


def interior_grid(t_lo=0.5, t_hi=3.0, frac=0.8, n=5):
    return [(t, f * t) for t in np.linspace(t_lo, t_hi, n) for f in np.linspace(-frac, frac, n)]


def normalization_checks(times=(0.5, 1, 2, 5), tol=1e-8):
    out = []
    for m in (1, 2):
        for t in times:
            total, _ = normalization_check(ModelParams(m), t)
            out.append(_check("normalization", f"m={m} t={t} total mass", 1.0, total, tol))
    return out


def boundary_checks(times=(0.5, 1, 2), mc_times=(1.0,), n_samples=1_000_000, seed=0, eps=0.02):
    out = []
    for m in (1, 2):
        p = ModelParams(m)
        for t in times:
            for side in ("upper", "lower"):
                limit = boundary_limit(p, t, side)
                x = t * (1 - 1e-8) * (1 if side == "upper" else -1)
                got = density(p, t, x).continuous
                tol = 1e-6 * max(abs(limit), 1e-3)
                out.append(_check("boundary", f"m={m} t={t} {side} cone limit", limit, got, tol))
        for row in verify_conditions(p, mc_times, eps=eps, n_samples=n_samples, seed=seed):
            out.append(_check(
                "boundary",
                f"m={m} t={row['t']} {row['side']} window rate ({row['mc_rule']})",
                0.0, row["mc_deviation"], row["mc_tolerance"], row["mc_pass"],
            ))
    return out


def cr_checks(ms=(1, 2, 3), max_index=4, tol=1e-10):
    out = []
    pts = interior_grid()
    for m in ms:
        table = alg.generate_table(m, 2 * max_index + 4)
        for rel, k in alg.relation_instances(table.max_k, max_index):
            worst = max(
                alg.cr_residual(table, rel, l, t, y, k)
                for l in range(2 * m) for t, y in pts
            )
            label = rel if k is None else f"{rel}[k={k}]"
            out.append(_check("cr", f"m={m} {label} max residual", 0.0, worst, tol))
    return out


def integral_checks(times=(0.5, 1, 2), tol=1e-8):
    table = alg.generate_table(2, 4)
    out = []
    for (l, k), exact in INTEGRAL_IDENTITIES.items():
        worst = max(abs(u_integral(table, l, k, t)[0] - exact(t)) for t in times)
        out.append(_check("integrals", f"int u^{l}_{k} dy, max dev over t={list(times)}", 0.0, worst, tol))
    return out


def pde_checks():
    out = []
    cases = [
        ("eq11", field_gc(1), 1, GridSpec(h=1e-2)),
        ("eq12", field_fc(1), 1, GridSpec(h=1e-2)),
        ("eq14", field_gc(2), 2, GridSpec(h=2e-2, t_range=(2.0, 3.0))),
        ("eq1_m2", field_fc(2), 2, GridSpec(h=2e-2, t_range=(2.0, 3.0))),
        ("eq11", field_gc(1), 1, GridSpec(h=4e-2, stencil_order=4)),
        ("eq14", field_gc(2), 2, GridSpec(h=1e-1, t_range=(2.0, 3.0), y_fraction=0.5, stencil_order=4)),
    ]
    for op, field, m, grid in cases:
        rep = residual_grid(field, op, grid)
        nominal = grid.stencil_order
        out.append(_check("pde", f"{op} m={m} order-{nominal} convergence order",
                          float(nominal), rep.convergence_order_est, 0.3))
    table = alg.generate_table(2, 4)
    table1 = alg.generate_table(1, 4)
    exact_cases = [("gc m=2", alg.gc_m2(table), 2), ("g2 m=2", alg.g2_competing(table), 2),
                   ("gc m=1", alg.gc_m1(table1), 1)]
    for name, f, m in exact_cases:
        res = residual_exact(f, m)
        worst = max(abs(alg.evaluate(res, t, y)) for t, y in interior_grid())
        out.append(_check("pde", f"exact residual {name}", 0.0, worst, 1e-10))
    # g2 solves the same equation but misses the upper cone condition g -> t/2
    for t in (0.5, 1.0, 2.0):
        g2_up = competing_solution_g2(t, t)
        out.append(_check("pde", f"g2 upper cone value at t={t} differs from t/2",
                          t / 2, g2_up, 1e-3, passed=abs(g2_up - t / 2) > 1e-3))
        gc_up = gc_normalized(2, t, t)
        out.append(_check("pde", f"gc upper cone value at t={t}", t / 2, gc_up, 1e-12))
    return out


def l1_distance(hist, params, t):
    """L1 distance between empirical bin densities and bin-averaged closed form."""
    fc = lambda x: density(params, t, x).continuous
    edges = hist.bin_edges
    exact = np.array([integrate(fc, a, b)[0] / (b - a) for a, b in zip(edges[:-1], edges[1:])])
    return float(np.sum(np.abs(hist.bin_density - exact) * hist.widths))


def mc_checks(n_samples=1_000_000, seed=0, workers=None):
    out = []
    for m in (1, 2, 3, 5):
        for t in (0.5, 1.0, 2.0):
            p = ModelParams(m)
            h = estimate_histogram(SimConfig(p, t, n_samples, seed, 10), workers)
            target = atom_mass(p, t)
            out.append(_check("mc", f"m={m} t={t} atom frequency", target, h.atom_fraction,
                              3 * math.sqrt(target * (1 - target) / n_samples)))
    for m in (1, 2):
        p = ModelParams(m)
        h = estimate_histogram(SimConfig(p, 2.0, n_samples, seed, 100), workers)
        out.append(_check("mc", f"m={m} t=2 L1 histogram vs closed form", 0.0, l1_distance(h, p, 2.0), 0.01))
    return out


def run_suite(name, m=None, n_samples=None, seed=0, workers=None):
    if name == "all":
        out = []
        for s in SUITES:
            out.extend(run_suite(s, m, n_samples, seed, workers))
        return out
    if name == "normalization":
        return normalization_checks()
    if name == "boundary":
        return boundary_checks(n_samples=n_samples or 1_000_000, seed=seed)
    if name == "cr":
        return cr_checks(ms=(m,) if m else (1, 2, 3))
    if name == "integrals":
        return integral_checks()
    if name == "pde":
        return pde_checks()
    if name == "mc":
        return mc_checks(n_samples=n_samples or 1_000_000, seed=seed, workers=workers)
    raise KeyError(f"unknown suite {name!r}")
