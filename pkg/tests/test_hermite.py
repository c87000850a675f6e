import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from corpus import SMOOTH_1D, jittered_nodes
from regpoly import golden, numeric
from regpoly.expr import eval_jet, parse
from regpoly.hermite import (
    BlockLog,
    HermiteProblem,
    InterpolationError,
    basis,
    basis_coefficients,
    confluent_vandermonde,
    diagonal_block,
    global_matrix,
    interpolate_hermite,
    interpolate_operator_preserving,
    max_block_condition,
)
from regpoly.operators import DifferentialOperator
from regpoly.poly import NewtonPolynomial, poly_eval_jet, to_monomial

RECIPROCAL = parse("1/(1+x1)")


def _jet_error(p, f, nodes, k):
    return max(
        abs(float(poly_eval_jet(p, (x,), k)[l] - eval_jet(f, (x,), k)[l])) for x in nodes for l in range(k + 1)
    )


def test_basis_ordering():
    # Phi_{3,1} on nodes {0, 1}: (x-0)^2 (x-1)
    term = basis(3, 1, [0.0, 1.0])
    p = NewtonPolynomial(1, (term,))
    jet = poly_eval_jet(p, (1.0,), 1)
    assert (jet[0], jet[1]) == (0.0, 1.0)
    assert term.factors == ((0, 0.0, 2), (0, 1.0, 1))


def test_cubic_from_two_nodes():
    prob = HermiteProblem.from_function(parse("x1^3"), [0.0, 1.0], 1)
    p = interpolate_hermite(prob)
    assert basis_coefficients(p) == [0.0, 0.0, 1.0, 1.0]
    assert list(to_monomial(p)) == [0.0, 0.0, 0.0, 1.0]


def test_explicit_jets_accepted():
    prob = HermiteProblem((0.0, 2.0), 1, ((1.0, 0.0), (5.0, 4.0)))
    p = interpolate_hermite(prob)
    assert [float(c) for c in to_monomial(p)] == pytest.approx([1.0, 0.0, 1.0, 0.0])


@pytest.mark.parametrize(
    "nodes, k, data, match",
    [
        ((0.0, 0.0), 0, ((1.0,), (1.0,)), "distinct"),
        ((0.0,), -1, ((),), "nonnegative"),
        ((0.0, 1.0), 1, ((1.0, 0.0),), "data jets"),
        ((0.0,), 2, ((1.0, 0.0),), "expected 3"),
        ((), 0, (), "at least one"),
    ],
)
def test_problem_validation(nodes, k, data, match):
    with pytest.raises(ValueError, match=match):
        HermiteProblem(nodes, k, data)


def test_jet_base_point_must_match_node():
    jet = eval_jet(RECIPROCAL, (0.5,), 1)
    with pytest.raises(ValueError, match="based at"):
        HermiteProblem((0.0,), 1, (jet,))


def test_nodes_need_not_be_sorted():
    nodes = [0.9, -0.3, 0.2]
    p = interpolate_hermite(HermiteProblem.from_function(RECIPROCAL, nodes, 2))
    q = interpolate_hermite(HermiteProblem.from_function(RECIPROCAL, sorted(nodes), 2))
    assert _jet_error(p, RECIPROCAL, nodes, 2) < 1e-12
    for x in np.linspace(-0.3, 0.9, 7):
        assert float(p(x)) == pytest.approx(float(q(x)), abs=1e-12)


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 10**6), count=st.integers(1, 5), k=st.integers(0, 3), idx=st.integers(0, 5))
def test_hermite_conditions_hold(seed, count, k, idx):
    nodes = jittered_nodes(np.random.default_rng(seed), count)
    f = parse(SMOOTH_1D[idx])
    p = interpolate_hermite(HermiteProblem.from_function(f, nodes, k))
    assert _jet_error(p, f, nodes, k) < 1e-9


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10**6), count=st.integers(1, 4), k=st.integers(0, 2))
def test_polynomials_are_reproduced(seed, count, k):
    rng = np.random.default_rng(seed)
    nodes = jittered_nodes(rng, count)
    size = count * (k + 1)
    mono = rng.uniform(-2, 2, size)
    f = parse("+".join(f"({float(c)!r})*x1^{d}" for d, c in enumerate(mono)))
    p = interpolate_hermite(HermiteProblem.from_function(f, nodes, k))
    assert np.allclose(np.asarray(to_monomial(p), dtype=float)[:size], mono, atol=1e-8)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10**6), count=st.integers(2, 5), k=st.integers(0, 2))
def test_adding_a_node_keeps_earlier_coefficients(seed, count, k):
    nodes = jittered_nodes(np.random.default_rng(seed), count)
    short = interpolate_hermite(HermiteProblem.from_function(RECIPROCAL, nodes[:-1], k))
    full = interpolate_hermite(HermiteProblem.from_function(RECIPROCAL, nodes, k))
    assert basis_coefficients(full)[: len(short.terms)] == basis_coefficients(short)


def test_scaled_blocks_give_same_polynomial():
    nodes = [0.0, 0.4, 1.1]
    prob = HermiteProblem.from_function(parse("exp(x1)"), nodes, 3)
    plain, scaled = interpolate_hermite(prob), interpolate_hermite(prob, scaled=True)
    for x in np.linspace(0, 1.1, 9):
        assert float(plain(x)) == pytest.approx(float(scaled(x)), rel=1e-12)


def test_block_structure():
    nodes, k = [0.0, 0.5, 1.5], 2
    g = np.array([[float(v) for v in row] for row in global_matrix(nodes, k)])
    size = len(nodes) * (k + 1)
    assert np.allclose(np.triu(g, 1), 0)  # block lower triangular, and triangular inside blocks
    for j in range(len(nodes)):
        block = np.array([[float(v) for v in row] for row in diagonal_block(nodes, k, j)])
        w = math.prod((nodes[j] - x) ** (k + 1) for x in nodes[:j])
        assert np.allclose(np.diag(block), [math.factorial(q) * w for q in range(k + 1)])
        assert np.allclose(block, g[j * (k + 1) : (j + 1) * (k + 1), j * (k + 1) : (j + 1) * (k + 1)])
    assert g.shape == (size, size)


def test_block_log_records_each_node():
    log = BlockLog()
    interpolate_hermite(HermiteProblem.from_function(RECIPROCAL, [0.0, 0.3, 0.6], 1), log=log)
    assert len(log.blocks) == 3
    assert all(c >= 1 for c in log.conditions())


def test_blocks_are_far_better_conditioned_than_vandermonde():
    nodes = golden.nodes()
    k = golden.K
    mpmath.mp.prec = 600
    try:
        for count in (4, 8, 12, 16):
            sub = nodes[:count]
            v = mpmath.matrix(confluent_vandermonde(sub, k).tolist())
            vcond = float(mpmath.mnorm(v, 1) * mpmath.mnorm(v**-1, 1))
            bcond = max_block_condition(sub, k)
            assert bcond < 1e10
            assert vcond > 1e3 * bcond
        assert vcond > 1e50
    finally:
        mpmath.mp.prec = 53


# --------------------------------------------------------------------------
# the 19-node reciprocal example


def test_reference_problem_leading_coefficients():
    coeffs = golden.compute()
    assert len(coeffs) == 76
    assert [float(c) for c in coeffs[:4]] == pytest.approx([1, -1, 1, -1], abs=1e-12)


def test_reference_problem_double_accuracy_on_early_nodes():
    # cancellation between large product terms costs digits only on the far nodes
    nodes = golden.nodes()
    p = interpolate_hermite(HermiteProblem.from_function(RECIPROCAL, nodes, 3))
    assert _jet_error(p, RECIPROCAL, [x for x in nodes if x <= 3.0], 3) < 1e-12


def test_reference_problem_extended_accuracy():
    with numeric.precision(numeric.EXTENDED):
        nodes = golden.nodes()
        p = interpolate_hermite(HermiteProblem.from_function(RECIPROCAL, nodes, 3))
        assert _jet_error(p, RECIPROCAL, nodes, 3) < 1e-25


def test_reference_double_and_extended_agree_on_low_coefficients():
    # agreement degrades with the index: 5e-15 relative at a_4, 2e-4 at a_19
    dbl = golden.compute()
    with numeric.precision(numeric.EXTENDED):
        ext = golden.compute()
    for a, b in zip(dbl[:11], ext[:11]):
        assert float(a) == pytest.approx(float(b), rel=1e-10)


# --------------------------------------------------------------------------
# operator-preserving interpolation


def test_operator_matches_at_nodes():
    f = parse("exp(x1)")
    op = DifferentialOperator.from_strings(1, [("x1", 1)])
    nodes = [1.0, 2.0]
    p = interpolate_operator_preserving(f, [op], nodes)
    for x in nodes:
        pj, fj = poly_eval_jet(p, (x,), 1), eval_jet(f, (x,), 1)
        assert float(pj[0]) == pytest.approx(float(fj[0]), abs=1e-14)
        assert float(op.apply(pj, (x,))) == pytest.approx(float(op.apply(fj, (x,))), abs=1e-13)


def test_operator_with_gap_orders():
    # only d^2 is prescribed: value and second derivative terms
    p = interpolate_operator_preserving(parse("x1^4"), [DifferentialOperator.derivative(2)], [1.0])
    assert p.coefficients == [1.0, 6.0]
    assert p.meta["orders"] == [0, 2]


def test_two_operators_share_orders():
    f = parse("sin(x1)")
    ops = [
        DifferentialOperator.from_strings(1, [("1", 1)]),
        DifferentialOperator.from_strings(1, [("1+x1^2", 2), ("x1", 1)]),
    ]
    nodes = [0.1, 0.6, 1.2]
    p = interpolate_operator_preserving(f, ops, nodes)
    for x in nodes:
        pj, fj = poly_eval_jet(p, (x,), 2), eval_jet(f, (x,), 2)
        for op in ops:
            assert float(op.apply(pj, (x,))) == pytest.approx(float(op.apply(fj, (x,))), abs=1e-11)


def test_vanishing_leading_coefficient_with_trivial_equation_is_skipped():
    op = DifferentialOperator.from_strings(1, [("x1", 1)])
    p = interpolate_operator_preserving(parse("exp(x1)"), [op], [0.0, 1.0])
    assert float(op.apply(poly_eval_jet(p, (1.0,), 1), (1.0,))) == pytest.approx(math.e, rel=1e-14)


def test_vanishing_leading_coefficient_is_reported():
    # x u' leaves u'(0) free, so x u'' + u' cannot be matched at 0
    ops = [
        DifferentialOperator.from_strings(1, [("x1", 1)]),
        DifferentialOperator.from_strings(1, [("x1", 2), ("1", 1)]),
    ]
    with pytest.raises(InterpolationError, match=r"node 0 \(x = 0.0\), operator 1, order 2"):
        interpolate_operator_preserving(parse("exp(x1)"), ops, [0.0, 1.0])


def test_operator_without_own_order_is_rejected():
    ops = [
        DifferentialOperator.from_strings(1, [("x1", 1)]),
        DifferentialOperator.from_strings(1, [("1", 1)]),
    ]
    with pytest.raises(InterpolationError, match="operator 1 cannot be matched"):
        interpolate_operator_preserving(parse("exp(x1)"), ops, [0.0])
