import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from corpus import SMOOTH_1D, jittered_nodes
from regpoly import multiindex as mi
from regpoly import numeric
from regpoly.expr import eval_jet, parse
from regpoly.hermite import HermiteProblem, InterpolationError, interpolate_hermite
from regpoly.multivariate import MultiHermiteProblem, interpolate_hermite_nd
from regpoly.poly import NewtonPolynomial, ProductTerm, jet_series, poly_eval_jet
from regpoly.synthesis import BlendLog, Member, blend_many, blend_pair, condition_audit, rounds_needed

XY = ("x1", "x2")


def member(f, nodes, k):
    return Member(tuple(nodes), interpolate_hermite(HermiteProblem.from_function(f, nodes, k)), k)


def jet_error(p, f, nodes, k):
    return max(
        abs(float(poly_eval_jet(p, (x,), k)[l] - eval_jet(f, (x,), k)[l])) for x in nodes for l in range(k + 1)
    )


def test_two_constants():
    a = Member((0.0,), NewtonPolynomial(1, (ProductTerm(1.0),)), 0)
    b = Member((1.0,), NewtonPolynomial(1, (ProductTerm(2.0),)), 0)
    out = blend_pair(a, b)
    assert (out.poly(0.0), out.poly(1.0)) == (1.0, 2.0)
    assert out.nodes == ((0.0,), (1.0,))
    assert out.poly.meta["k"] == 0


def test_overlapping_partitions_rejected():
    f = parse("exp(x1)")
    with pytest.raises(ValueError, match="appears in partitions 0 and 1"):
        blend_pair(member(f, [0.0, 0.5], 1), member(f, [0.5, 1.0], 1))


def test_shared_coordinate_rejected():
    f = parse("x1+x2", XY)
    a = Member(((0.0, 0.0),), interpolate_hermite_nd(MultiHermiteProblem.from_function(f, [(0.0, 0.0)], (0, 0))), 0)
    b = Member(((0.0, 1.0),), interpolate_hermite_nd(MultiHermiteProblem.from_function(f, [(0.0, 1.0)], (0, 0))), 0)
    with pytest.raises(InterpolationError, match="share x1"):
        blend_pair(a, b)


def test_member_dimension_checked():
    with pytest.raises(ValueError, match="dimension"):
        Member(((0.0, 1.0),), NewtonPolynomial(1, (ProductTerm(1.0),)), 0)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10**6), count=st.integers(2, 6), k=st.integers(0, 2), idx=st.integers(0, 5))
def test_blend_keeps_all_conditions(seed, count, k, idx):
    nodes = jittered_nodes(np.random.default_rng(seed), count)
    f = parse(SMOOTH_1D[idx])
    cut = count // 2
    out = blend_pair(member(f, nodes[:cut], k), member(f, nodes[cut:], k))
    assert jet_error(out.poly, f, nodes, k) < 1e-8


def test_lower_order_blend():
    # members carry k = 2 but only first derivatives are kept
    f = parse("sin(x1)")
    out = blend_pair(member(f, [0.0, 0.3], 2), member(f, [0.7, 1.0], 2), k=1)
    assert out.k == 1
    assert jet_error(out.poly, f, [0.0, 0.3, 0.7, 1.0], 1) < 1e-11


def test_blend_many_tree_and_pool_agree():
    f = parse("exp(x1)")
    nodes = np.linspace(-1, 1, 10)
    members = [member(f, list(nodes[i : i + 2]), 1) for i in range(0, 10, 2)]
    log = BlendLog()
    serial = blend_many(members, log=log)
    pooled = blend_many(members, jobs=2)
    assert log.rounds == rounds_needed(5) == 3
    assert len(log.seconds) == 3
    assert serial.poly.terms == pooled.poly.terms
    assert jet_error(serial.poly, f, list(nodes), 1) < 1e-9


def test_blend_many_extended_in_workers():
    with numeric.precision(numeric.EXTENDED):
        f = parse("1/(2+x1)")
        members = [member(f, [numeric.num(a), numeric.num(a) + numeric.num("0.1")], 1) for a in (0, 1, 2)]
        out = blend_many(members, jobs=2)
        assert not isinstance(out.poly.terms[0].coeff, float)
        nodes = [x[0] for m in members for x in m.nodes]
        assert jet_error(out.poly, f, nodes, 1) < 1e-25


def test_blend_many_edge_cases():
    f = parse("exp(x1)")
    single = member(f, [0.0], 1)
    assert blend_many([single]) is single
    assert rounds_needed(1) == 0
    with pytest.raises(ValueError, match="nothing"):
        blend_many([])


def test_two_dimensional_blend():
    f = parse("exp(x1)*cos(x2)", XY)
    beta = (1, 1)

    def part(nodes):
        p = interpolate_hermite_nd(MultiHermiteProblem.from_function(f, nodes, beta))
        return Member(tuple(nodes), p, 1)

    a, b = part([(0.0, 0.1), (0.3, 0.45)]), part([(0.6, 0.8), (0.9, 0.2)])
    out = blend_pair(a, b)
    for x in a.nodes + b.nodes:
        got = jet_series(out.poly, x, beta)
        want = eval_jet(f, x, beta)
        for g in mi.box(beta):
            assert float(got.derivative(g)) == pytest.approx(float(want[g]), abs=1e-9)


def test_condition_audit_rows():
    f = parse("cos(x1)")
    a, b = member(f, [0.0, 0.4], 1), member(f, [0.9], 1)
    out = blend_pair(a, b)
    rows = condition_audit(out, [a, b])
    assert len(rows) == 3 * 2
    assert rows[0][:2] == ((0.0,), (0,))
    assert max(r[-1] for r in rows) < 1e-12
