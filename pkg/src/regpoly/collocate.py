"""Polynomials that satisfy a linear differential equation at nodes.

Both solvers follow the same pattern: start from a polynomial that already
carries the boundary data, then for each interior node add terms that
vanish (to high enough order) on everything matched so far, choosing each
coefficient so the node equation's residual is cancelled.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Sequence

from . import multiindex as mi
from . import numeric
from .expr import Expr, evaluate, eval_jet
from .hermite import InterpolationError
from .multivariate import AXES_ALL, AXES_AUTO, MultiHermiteProblem, interpolate_hermite_nd
from .operators import DifferentialOperator
from .poly import NewtonPolynomial, ProductTerm, poly_eval_jet

__all__ = [
    "Bvp1D",
    "CollocationProblem",
    "DifferentialOperator",
    "apply_operator",
    "node_residuals",
    "residual_csv",
    "solve_bvp_1d",
    "solve_collocation",
]


def apply_operator(op: DifferentialOperator, p: NewtonPolynomial, x) -> object:
    """``(L p)(x)`` through an exact jet of ``p``."""
    x = tuple(numeric.num(c) for c in x)
    return op.apply(poly_eval_jet(p, x, op.order), x)


def _term_action(op, factors, x, n):
    return apply_operator(op, NewtonPolynomial(n, (ProductTerm(numeric.num(1), factors),)), x)


# --------------------------------------------------------------------------
# 1D boundary value problem


@dataclass(frozen=True)
class Bvp1D:
    """``a u'' + b u' + c u = f`` on ``(d, e)`` with ``u(d) = cd``, ``u(e) = ce``."""

    a: Expr
    b: Expr
    c: Expr
    f: Expr
    d: float
    e: float
    cd: float
    ce: float
    nodes: tuple

    def __post_init__(self):
        d, e = numeric.num(self.d), numeric.num(self.e)
        if not d < e:
            raise ValueError(f"interval must satisfy d < e, got ({d}, {e})")
        nodes = tuple(numeric.num(x) for x in self.nodes)
        for j, x in enumerate(nodes):
            if x == d or x == e:
                raise ValueError(f"node {j} = {x} lies on the boundary; need x_0 ≠ d and x_0 ≠ e")
            if not d < x < e:
                raise ValueError(f"node {j} = {x} lies outside ({d}, {e})")
        if len(set(nodes)) != len(nodes):
            raise ValueError("interior nodes must be pairwise distinct")
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "e", e)
        object.__setattr__(self, "cd", numeric.num(self.cd))
        object.__setattr__(self, "ce", numeric.num(self.ce))
        object.__setattr__(self, "nodes", nodes)

    def operator(self) -> DifferentialOperator:
        return DifferentialOperator(1, ((self.a, (2,)), (self.b, (1,)), (self.c, (0,))))


def solve_bvp_1d(prob: Bvp1D) -> NewtonPolynomial:
    """Staged construction: linear boundary interpolant, then three terms per node.

    Node ``j`` adds ``(x - x_j)^s * B_j(x)`` for ``s = 2, 1, 0`` where
    ``B_0 = (x - d)(x - e)`` and ``B_j = (x - d)^3 (x - e)^3 prod_{l<j} (x - x_l)^3``.
    Each coefficient is ``(f(x_j) - L p(x_j)) / L[term](x_j)``, so after the
    first substep the later ones only absorb rounding.  Coefficient labels
    are ``0, 1`` for the boundary part and ``2+3j+2, 2+3j+1, 2+3j`` for node
    ``j``.
    """
    d, e = prob.d, prob.e
    op = prob.operator()
    a1 = (prob.ce - prob.cd) / (e - d)
    terms = [ProductTerm(prob.cd), ProductTerm(a1, ((0, d, 1),))]
    labels = [0, 1]
    p = NewtonPolynomial(1, tuple(terms))
    for j, xj in enumerate(prob.nodes):
        if evaluate(prob.a, (xj,)) == 0:
            raise InterpolationError(f"node {j} (x = {xj}): leading coefficient a(x) vanishes")
        power = 1 if j == 0 else 3
        base = ((0, d, power), (0, e, power)) + tuple((0, x, 3) for x in prob.nodes[:j])
        target = evaluate(prob.f, (xj,))
        for sub, s in enumerate((2, 1, 0), start=1):
            factors = base + ((0, xj, s),)
            pivot = _term_action(op, factors, (xj,), 1)
            resid = target - apply_operator(op, p, (xj,))
            if pivot == 0:
                if resid != 0:
                    raise InterpolationError(f"node {j} (x = {xj}), substep {sub}: zero pivot")
                coeff = numeric.num(0)
            else:
                coeff = resid / pivot
            p = p.extend(ProductTerm(coeff, factors))
            labels.append(2 + 3 * j + s)
    return p.with_meta(labels=labels, nodes=[(x,) for x in prob.nodes])


# --------------------------------------------------------------------------
# multivariate collocation


@dataclass(frozen=True)
class CollocationProblem:
    """``L u = f`` at interior nodes, boundary data matched to order ``l``.

    ``g`` gives the boundary values.  For initial-value data, ``normal``
    gives the derivative along ``normal_axis`` (``omega``); only ``l <= 1``
    is then available.
    """

    operator: DifferentialOperator
    f: Expr
    g: Expr
    boundary: tuple
    interior: tuple
    l: int = 0
    normal: Expr | None = None
    normal_axis: int | None = None

    def __post_init__(self):
        n = self.operator.dimension
        bnd = tuple(tuple(numeric.num(c) for c in x) for x in self.boundary)
        inner = tuple(tuple(numeric.num(c) for c in x) for x in self.interior)
        for x in bnd + inner:
            if len(x) != n:
                raise ValueError(f"node {x} does not have dimension {n}")
        if not bnd:
            raise ValueError("at least one boundary node is required")
        shared = set(bnd) & set(inner)
        if shared:
            raise ValueError(f"boundary and interior node sets overlap at {sorted(shared)[0]}")
        if len(set(inner)) != len(inner):
            raise ValueError("interior nodes must be pairwise distinct")
        if self.l < 0:
            raise ValueError("l must be nonnegative")
        if self.normal is not None:
            if self.normal_axis is None or not 0 <= self.normal_axis < n:
                raise ValueError("normal data needs a valid normal_axis")
            if self.l > 1:
                raise ValueError("normal-derivative data supports only l <= 1")
        object.__setattr__(self, "boundary", bnd)
        object.__setattr__(self, "interior", inner)

    @property
    def dimension(self) -> int:
        return self.operator.dimension

    def boundary_jet(self, x, beta) -> dict:
        if self.normal is None:
            jet = eval_jet(self.g, x, beta)
            return {gm: jet[gm] for gm in mi.box(beta)}
        ax = self.normal_axis
        flat = tuple(0 if i == ax else b for i, b in enumerate(beta))
        gj = eval_jet(self.g, x, flat)
        wj = eval_jet(self.normal, x, flat)
        out = {}
        for gm in mi.box(beta):
            base = tuple(0 if i == ax else c for i, c in enumerate(gm))
            out[gm] = gj[base] if gm[ax] == 0 else wj[base]
        return out


def boundary_interpolant(prob: CollocationProblem) -> NewtonPolynomial:
    beta = (prob.l,) * prob.dimension
    data = tuple(prob.boundary_jet(x, beta) for x in prob.boundary)
    return interpolate_hermite_nd(MultiHermiteProblem(prob.boundary, beta, data), axes=AXES_AUTO)


def solve_collocation(prob: CollocationProblem, axes: str = AXES_ALL) -> NewtonPolynomial:
    """Boundary interpolant plus one term per operator term per interior node.

    Interior node ``i`` adds, for each operator term ``alpha`` in descending
    grlex order (second-order terms, then drift, then potential),

        Phi_b(x) * prod_{j<i} prod_k (x^k - x^k_j)^(m+1) * (x - x_i)^alpha

    with ``Phi_b = prod_boundary prod_k (x^k - x^k_b)^(l+1)`` and ``m`` the
    operator order.  Each coefficient cancels the current residual of
    ``L p(x_i) = f(x_i)``.  ``axes="auto"`` drops inter-node factors along
    axes where two interior nodes agree.
    """
    n = prob.dimension
    op = prob.operator
    pb = boundary_interpolant(prob)
    phi_b = tuple((k, xb[k], prob.l + 1) for xb in prob.boundary for k in range(n))
    p = NewtonPolynomial(n, pb.terms)
    sweep = [alpha for _, alpha in op.sorted_terms(descending=True)]
    sweep = list(dict.fromkeys(sweep))
    m = op.order
    labels = [("boundary", i) for i in range(len(pb.terms))]
    for i, xi in enumerate(prob.interior):
        inter = tuple(
            (k, xj[k], m + 1)
            for xj in prob.interior[:i]
            for k in range(n)
            if axes == AXES_ALL or xj[k] != xi[k]
        )
        target = evaluate(prob.f, xi)
        for alpha in sweep:
            factors = phi_b + inter + tuple((k, xi[k], alpha[k]) for k in range(n))
            pivot = _term_action(op, factors, xi, n)
            resid = target - apply_operator(op, p, xi)
            if pivot == 0:
                if resid != 0:
                    raise InterpolationError(
                        f"interior node {i} {xi}, operator term {alpha}: zero pivot "
                        "(boundary multiplier or coefficient vanishes there)"
                    )
                coeff = numeric.num(0)
            else:
                coeff = resid / pivot
            p = p.extend(ProductTerm(coeff, factors))
            labels.append((i, alpha))
    return p.with_meta(labels=labels, nodes=list(prob.boundary) + list(prob.interior))


# --------------------------------------------------------------------------
# residuals


def node_residuals(op: DifferentialOperator, f: Expr, p: NewtonPolynomial, nodes: Sequence) -> list:
    """``L p(x) - f(x)`` at each node."""
    out = []
    for x in nodes:
        x = tuple(numeric.num(c) for c in x)
        out.append(apply_operator(op, p, x) - evaluate(f, x))
    return out


def residual_csv(nodes, residuals) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["node"] + [f"x{i + 1}" for i in range(len(nodes[0]))] + ["residual"])
    for j, (x, r) in enumerate(zip(nodes, residuals)):
        w.writerow([j] + [numeric.to_text(c) for c in x] + [numeric.to_text(r)])
    return buf.getvalue()
