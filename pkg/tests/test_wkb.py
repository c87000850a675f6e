import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from regpoly import numeric
from regpoly.expr import parse
from regpoly.wkb import (
    WkbModel,
    approximate_drift,
    assemble_kernel,
    coefficient_csv,
    compute_c0,
    compute_ck,
    expand,
    log_kernel,
    wkb_residual,
)

XY = ("x1", "x2")


def test_zero_drift_gives_zero_coefficients():
    e = expand(WkbModel(1, (parse("0"),), (0.2,), 5))
    assert all(v == 0 for s in e.c for v in s.c.ravel())
    assert e.table() == []


def test_constant_drift_closed_form():
    e = expand(WkbModel(1, (parse("1"),), (0.0,), 3))
    assert e.table() == [(0, (1,), -1.0), (1, (0,), -0.5)]
    for x in (-0.2, 0.3):
        for t in (0.05, 0.1):
            exact = math.exp(-((0.0 - x - t) ** 2) / (2 * t)) / math.sqrt(2 * math.pi * t)
            assert float(assemble_kernel(e, t, (x,))) == pytest.approx(exact, rel=1e-13)


def test_constant_drift_two_dimensions():
    # c_0 = b.(y - x), c_1 = -|b|^2 / 2
    e = expand(WkbModel(2, (parse("1", XY), parse("-2", XY)), (0.1, 0.2), 2))
    rows = {(k, g): float(v) for k, g, v in e.table()}
    assert rows == {(0, (1, 0)): -1.0, (0, (0, 1)): 2.0, (1, (0, 0)): -2.5}


@pytest.mark.parametrize("x", [0.6, 0.75, 0.9])
def test_c0_is_minus_the_drift_integral(x):
    y = 0.7
    e = expand(WkbModel(1, (parse("sin(x1)"),), (y,), 3))
    assert float(e.value(0, (x,))) == pytest.approx(-quad(math.sin, y, x)[0], abs=1e-11)


def test_linear_drift_c0():
    y = 0.7
    e = expand(WkbModel(1, (parse("-x1"),), (y,), 2))
    for x in (0.5, 0.9):
        assert float(e.value(0, (x,))) == pytest.approx((x * x - y * y) / 2, abs=1e-15)


def test_kernel_mass_near_one():
    # the sampled point has b'(y) = 0, so the x-integral is 1 up to O(t^2)
    y = math.pi / 2
    e = expand(WkbModel(1, (parse("sin(x1)"),), (y,), 3))
    mass = quad(lambda x: float(assemble_kernel(e, 0.01, (x,))), y - 1, y + 1, points=[y])[0]
    assert mass == pytest.approx(0.99995041649, abs=1e-9)


@settings(max_examples=20, deadline=None)
@given(y=st.floats(-1, 1), t=st.floats(0.01, 0.2), dx=st.floats(-0.3, 0.3))
def test_log_kernel_constant_drift_property(y, t, dx):
    e = expand(WkbModel(1, (parse("0.5"),), (y,), 2))
    x = y + dx
    exact = -0.5 * math.log(2 * math.pi * t) - (y - x - 0.5 * t) ** 2 / (2 * t)
    assert float(log_kernel(e, t, (x,))) == pytest.approx(exact, abs=1e-12)


def test_residuals_shrink_towards_base_point():
    y = 0.7
    b = parse("sin(x1)")
    e = expand(WkbModel(1, (b,), (y,), 4))
    a = [[parse("1")]]
    far = wkb_residual(a, [b], (y,), e.c, [(y + 0.1,)])
    near = wkb_residual(a, [b], (y,), e.c, [(y + 0.01,)])
    assert near.max_abs < far.max_abs / 100
    assert max(abs(float(v)) for v in near.rk_boundary) < 1e-14
    assert abs(float(near.c0_boundary)) < 1e-15


def test_residual_of_zero_candidates_is_the_eikonal_source():
    y = (0.2,)
    b = parse("x1")
    zero = compute_c0(WkbModel(1, (parse("0"),), y, 1))
    report = wkb_residual([[parse("1")]], [b], y, [zero, zero], [(0.5,)])
    # -n/2 + (1/2) L|x-y|^2 reduces to b(x) (x - y) for unit diffusion
    assert float(report.eikonal[0]) == pytest.approx(0.5 * 0.3, abs=1e-15)


def test_two_dimensional_residual():
    y = (0.1, -0.2)
    b = (parse("sin(x2)", XY), parse("x1*x2", XY))
    e = expand(WkbModel(2, b, y, 3))
    a = [[parse("1", XY), parse("0", XY)], [parse("0", XY), parse("1", XY)]]
    report = wkb_residual(a, b, y, e.c, [(0.12, -0.19), (0.08, -0.21)])
    assert report.max_abs < 1e-6
    assert max(abs(float(v)) for v in report.rk_boundary) < 1e-14


def test_degree_validation():
    with pytest.raises(ValueError, match="need D >= 6"):
        WkbModel(1, (parse("1"),), (0.0,), 3, D=4)
    with pytest.raises(ValueError, match="one drift"):
        WkbModel(2, (parse("1"),), (0.0, 0.0), 1)
    model = WkbModel(1, (parse("x1^2"),), (0.0,), 3)
    with pytest.raises(ValueError, match="needs degree 12"):
        compute_ck(model, [compute_c0(model)], 0, degree=10)


def test_log_kernel_needs_positive_time():
    e = expand(WkbModel(1, (parse("1"),), (0.0,), 1))
    with pytest.raises(ValueError, match="positive"):
        log_kernel(e, 0.0, (0.1,))


def test_approximated_drift_gives_close_expansion():
    y = (0.4,)
    b = parse("cos(x1)")
    nodes = [0.1, 0.4, 0.7]
    approx = approximate_drift([b], nodes, 4)
    exact = expand(WkbModel(1, (b,), y, 2))
    near = expand(WkbModel(1, tuple(approx), y, 2))
    for k in range(3):
        assert float(near.value(k, (0.5,))) == pytest.approx(float(exact.value(k, (0.5,))), abs=1e-6)


def test_approximated_drift_size():
    # 20 nodes, derivatives through order 10: 20 * 11 coefficients
    p = approximate_drift([parse("1/(1+x1)")], [0.05 * i for i in range(20)], 10)[0]
    assert len(p.terms) == 220
    assert p.degree() == 219


def test_extended_mode_expansion():
    with numeric.precision(numeric.EXTENDED):
        e = expand(WkbModel(1, (parse("1"),), (numeric.num(0),), 2))
        assert float(e.value(1, (numeric.num("0.3"),))) == -0.5
        assert not isinstance(e.c[0].c.ravel()[1], float)


def test_coefficient_csv():
    e = expand(WkbModel(1, (parse("1"),), (0.0,), 1))
    assert coefficient_csv(e) == "k,multiindex,value\n0,1,-1.0\n1,0,-0.5\n"
    text = coefficient_csv(expand(WkbModel(2, (parse("1", XY), parse("0", XY)), (0.0, 0.0), 1)))
    assert text.splitlines()[1] == "0,1 0,-1.0"


def test_kernel_is_finite_and_positive():
    e = expand(WkbModel(1, (parse("sin(x1)"),), (0.0,), 3))
    vals = [float(assemble_kernel(e, 0.05, (x,))) for x in np.linspace(-0.3, 0.3, 7)]
    assert all(v > 0 and math.isfinite(v) for v in vals)
