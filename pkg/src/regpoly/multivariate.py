"""Multivariate Newton interpolation and its Hermite extension.

Node ``j`` contributes one term per ``gamma <= beta``:

    prod_i (x^i - x^i_j)^gamma_i * W_j(x),   W_j = prod_{l<j} prod_i (x^i - x^i_l)^(beta_i + 1)

Taking the rows of the node block in ascending grlex order makes the
block lower triangular with diagonal ``gamma! * W_j(x_j)``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Sequence

from . import multiindex as mi
from . import numeric
from .expr import Expr, JetValue, eval_jet
from .hermite import InterpolationError
from .poly import NewtonPolynomial, ProductTerm, jet_series

log = logging.getLogger(__name__)

AXES_ALL = "all"
AXES_AUTO = "auto"


def compare_grlex(a: Sequence[int], b: Sequence[int]) -> int:
    """-1, 0 or 1 as ``a`` is below, equal to or above ``b`` in graded lex order."""
    if len(a) != len(b):
        raise ValueError(f"multiindices of different length: {tuple(a)} vs {tuple(b)}")
    ka, kb = mi.grlex_key(a), mi.grlex_key(b)
    return (ka > kb) - (ka < kb)


def _check_nodes(nodes) -> tuple:
    pts = tuple(tuple(numeric.num(c) for c in x) for x in nodes)
    if not pts:
        raise ValueError("at least one node is required")
    n = len(pts[0])
    if any(len(x) != n for x in pts):
        raise ValueError("all nodes must have the same dimension")
    if len(set(pts)) != len(pts):
        raise ValueError("nodes must be pairwise distinct")
    return pts


def _shared_axis(pts):
    for q in range(1, len(pts)):
        for k in range(q):
            for i in range(len(pts[q])):
                if pts[q][i] == pts[k][i]:
                    return k, q, i
    return None


def interpolate_newton_nd(nodes, values) -> NewtonPolynomial:
    """Value interpolation with terms ``a_q prod_{k<q} prod_i (x^i - x^i_k)``."""
    pts = _check_nodes(nodes)
    if len(values) != len(pts):
        raise ValueError(f"{len(values)} values for {len(pts)} nodes")
    clash = _shared_axis(pts)
    if clash:
        k, q, i = clash
        raise InterpolationError(
            f"vanishing denominator: nodes {k} and {q} share coordinate x{i + 1} = {pts[q][i]}"
        )
    n = len(pts[0])
    p = NewtonPolynomial(n, (), {"nodes": list(pts), "beta": [0] * n})
    for q, xq in enumerate(pts):
        denom = numeric.num(1)
        for xk in pts[:q]:
            for i in range(n):
                denom = denom * (xq[i] - xk[i])
        a = (numeric.num(values[q]) - p(xq)) / denom
        factors = tuple((i, xk[i], 1) for xk in pts[:q] for i in range(n))
        p = p.extend(ProductTerm(a, factors))
    return p


@dataclass(frozen=True)
class MultiHermiteProblem:
    """Nodes in R^n with derivative data ``D^gamma f(x_j)`` for ``gamma <= beta``."""

    nodes: tuple
    beta: tuple
    data: tuple

    def __post_init__(self):
        pts = _check_nodes(self.nodes)
        beta = tuple(int(b) for b in self.beta)
        if len(beta) != len(pts[0]) or min(beta) < 0:
            raise ValueError(f"bound {beta} does not fit dimension {len(pts[0])}")
        if len(self.data) != len(pts):
            raise ValueError(f"{len(self.data)} data jets for {len(pts)} nodes")
        lattice = mi.box(beta)
        data = []
        for x, jet in zip(pts, self.data):
            if isinstance(jet, JetValue):
                values = {g: jet[g] for g in lattice}
            else:
                values = {tuple(g): v for g, v in dict(jet).items()}
                missing = [g for g in lattice if g not in values]
                if missing:
                    raise ValueError(f"node {x}: missing derivative data for {missing[0]}")
            data.append({g: numeric.num(values[g]) for g in lattice})
        object.__setattr__(self, "nodes", pts)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "data", tuple(data))

    @classmethod
    def from_function(cls, f: Expr | Callable, nodes, beta) -> "MultiHermiteProblem":
        data = []
        for x in nodes:
            x = tuple(numeric.num(c) for c in x)
            data.append(eval_jet(f, x, tuple(beta)) if isinstance(f, Expr) else f(x, tuple(beta)))
        return cls(tuple(nodes), tuple(beta), tuple(data))

    @property
    def dimension(self) -> int:
        return len(self.beta)


def _weight_factors(pts, j, beta, axes):
    """Factors of ``W_j``; with ``axes="auto"`` only the axes separating each pair."""
    factors = []
    for l in range(j):
        for i in range(len(beta)):
            if axes == AXES_AUTO and pts[l][i] == pts[j][i]:
                continue
            factors.append((i, pts[l][i], beta[i] + 1))
    return tuple(factors)


def interpolate_hermite_nd(prob: MultiHermiteProblem, axes: str = AXES_ALL) -> NewtonPolynomial:
    """Match ``D^gamma p(x_j) = data_j[gamma]`` for all ``gamma <= beta``.

    ``axes="all"`` uses every axis in the node multipliers, which needs
    each node to differ from all earlier ones in every coordinate.
    ``axes="auto"`` keeps, for each earlier node, only the axes where the
    two nodes differ; the multiplier still vanishes to order ``beta`` at
    the earlier node, and nodes may then share coordinates (e.g. sit on a
    common initial line).
    """
    if axes not in (AXES_ALL, AXES_AUTO):
        raise ValueError(f"axes must be 'all' or 'auto', got {axes!r}")
    pts, beta = prob.nodes, prob.beta
    if axes == AXES_ALL:
        clash = _shared_axis(pts)
        if clash:
            k, q, i = clash
            raise InterpolationError(
                f"singular node block: nodes {k} and {q} share coordinate x{i + 1} = {pts[q][i]}"
            )
    n = len(beta)
    lattice = mi.box(beta)
    p = NewtonPolynomial(n, (), {"nodes": list(pts), "beta": list(beta)})
    conditions = []
    for j, xj in enumerate(pts):
        wf = _weight_factors(pts, j, beta, axes)
        weight = jet_series(NewtonPolynomial(n, (ProductTerm(numeric.num(1), wf),)), xj, beta)
        w0 = weight.value
        if w0 == 0:
            raise InterpolationError(f"singular node block at node {j} {xj}")
        partial = jet_series(p, xj, beta) if j else None
        rhs = {g: prob.data[j][g] - (partial.derivative(g) if partial else 0) for g in lattice}
        # D^delta [(x - x_j)^gamma W_j](x_j) = C(delta, gamma) gamma! D^(delta-gamma) W_j(x_j)
        block = [
            [
                mi.binom(d, g) * mi.factorial(g) * weight.derivative(mi.sub(d, g)) if mi.leq(g, d) else 0
                for g in lattice
            ]
            for d in lattice
        ]
        coeffs = []
        for r, delta in enumerate(lattice):
            s = rhs[delta]
            for c, a in enumerate(coeffs):
                s = s - block[r][c] * a
            coeffs.append(s / block[r][r])
        conditions.append(numeric.condition_number(block))
        log.debug("node %d: block condition %.3g", j, conditions[-1])
        terms = [
            ProductTerm(a, wf + tuple((i, xj[i], g[i]) for i in range(n))) for g, a in zip(lattice, coeffs)
        ]
        p = p.extend(*terms)
    return p.with_meta(block_conditions=conditions)
