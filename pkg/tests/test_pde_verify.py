import json
import math

import numpy as np
import pytest

from erltel.algebra_series import TermSum, evaluate, g2_competing, gc_m2, generate_table
from erltel.closed_form import ModelParams, density
from erltel.pde_verify import (
    OPERATORS,
    GridSpec,
    StencilExitError,
    apply_operator,
    field_fc,
    field_g2,
    field_gc,
    residual_exact,
    residual_grid,
    verify_conditions,
)


@pytest.mark.parametrize("op", OPERATORS)
def test_zero_field(op):
    rep = residual_grid(lambda t, y: 0.0, op, GridSpec(h=0.05))
    assert rep.max_abs == 0.0 and rep.rms == 0.0
    assert math.isnan(rep.convergence_order_est)


def test_gc_m1_second_order():
    rep = residual_grid(field_gc(1), "eq11", GridSpec(t_range=(1.0, 2.0), h=1e-2))
    assert rep.max_abs < 1e-3
    assert 1.7 <= rep.convergence_order_est <= 2.3


@pytest.mark.parametrize(
    "op, field, grid",
    [
        ("eq14", field_gc(2), GridSpec(h=2e-2)),
        ("eq12", field_fc(1), GridSpec(h=1e-2)),
        ("eq1_m2", field_fc(2), GridSpec(h=2e-2)),
        ("eq14", field_g2(), GridSpec(h=2e-2)),
    ],
)
def test_second_order_stencils(op, field, grid):
    rep = residual_grid(field, op, grid)
    assert 1.7 <= rep.convergence_order_est <= 2.3


@pytest.mark.parametrize(
    "op, field, grid",
    [
        ("eq11", field_gc(1), GridSpec(h=4e-2, stencil_order=4)),
        ("eq12", field_fc(1), GridSpec(h=4e-2, stencil_order=4)),
        # composed fourth-order stencils divide by h^4: a coarse h keeps roundoff below truncation
        ("eq14", field_gc(2), GridSpec(h=0.1, t_range=(2.0, 3.0), y_fraction=0.5, stencil_order=4)),
        ("eq1_m2", field_fc(2), GridSpec(h=0.1, t_range=(2.0, 3.0), y_fraction=0.5, stencil_order=4)),
    ],
)
def test_fourth_order_stencils(op, field, grid):
    rep = residual_grid(field, op, grid)
    assert 3.5 <= rep.convergence_order_est <= 4.5


def test_general_parameters():
    p = ModelParams(2, 2.0, 3.0)
    rep = residual_grid(lambda t, x: density(p, t, x).continuous, "eq1_m2",
                        GridSpec(h=2e-2, t_range=(1.0, 1.5), y_fraction=0.3), params=p)
    assert 1.7 <= rep.convergence_order_est <= 2.3


def test_factorization_consistency():
    # (d_t + 1)^2 - d_yy - 1 applied to exp(-t) g equals exp(-t) ((d_tt - d_yy) g - g);
    # the eq12 stencil already carries the -1, the eq11 stencil does not
    grid = GridSpec(h=1e-2)
    damped = apply_operator(field_fc(1), "eq12", grid)
    wave = apply_operator(field_gc(1), "eq11", grid)
    g = np.array([field_gc(1)(t, y) for t, y in grid.points()])
    weights = np.array([math.exp(-t) for t, _ in grid.points()])
    assert np.max(np.abs(damped - weights * (wave - g))) < 1e-4


def test_exact_and_grid_verdicts_agree():
    table = generate_table(2, 6)
    pts = GridSpec().points()
    for ts, field in [(gc_m2(table), field_gc(2)), (g2_competing(table), field_g2())]:
        res = residual_exact(ts, 2)
        assert max(abs(evaluate(res, t, y)) for t, y in pts) < 1e-10
        assert residual_grid(field, "eq14", GridSpec(h=2e-2)).max_abs < 1e-3


def test_residual_exact_examples():
    assert residual_exact(TermSum.zero(), 2).is_zero()
    table = generate_table(2, 6)
    assert abs(evaluate(residual_exact(gc_m2(table), 2), 1.5, 0.5)) < 1e-10
    assert abs(evaluate(residual_exact(g2_competing(table), 2), 1.5, 0.5)) < 1e-10


def test_residual_exact_detects_non_solutions():
    table = generate_table(2, 6)
    res = residual_exact(table[(0, 0)] + table[(2, 0)], 1)  # I_0 solves the m = 1 equation
    assert abs(evaluate(res, 1.5, 0.5)) < 1e-10
    res = residual_exact(table[(0, 0)], 1)
    assert abs(evaluate(res, 1.5, 0.5)) > 1e-3


def test_stencil_exit():
    with pytest.raises(StencilExitError):
        apply_operator(field_gc(1), "eq11", GridSpec(t_range=(0.1, 0.2), y_fraction=0.9, h=0.05))
    with pytest.raises(KeyError):
        residual_grid(field_gc(1), "eq99", GridSpec())


@pytest.mark.parametrize("bad", [dict(t_range=(0.0, 1.0)), dict(y_fraction=1.0), dict(h=0.0), dict(stencil_order=3)])
def test_grid_validation(bad):
    with pytest.raises(ValueError):
        GridSpec(**bad)


def test_report_json():
    rep = residual_grid(field_gc(1), "eq11", GridSpec(h=2e-2))
    data = json.loads(rep.to_json())
    assert data["operator_id"] == "eq11"
    assert data["grid"]["t_range"] == [1.0, 2.0]


@pytest.mark.parametrize("m, upper, lower", [(2, 0.1839397, 0.0), (1, 0.3678794, 0.1839397)])
def test_verify_conditions(m, upper, lower):
    rows = verify_conditions(ModelParams(m), [1.0], n_samples=1_000_000, seed=0)
    by_side = {r["side"]: r for r in rows}
    assert by_side["upper"]["limit"] == pytest.approx(upper, abs=1e-7)
    assert by_side["lower"]["limit"] == pytest.approx(lower, abs=1e-7)
    for r in rows:
        assert r["closed_form_pass"]
        assert r["mc_pass"], r


def test_verify_conditions_needs_closed_form():
    with pytest.raises(ValueError):
        verify_conditions(ModelParams(3), [1.0])
