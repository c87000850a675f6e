"""Univariate extended Newton (Hermite) interpolation.

The basis is

    Phi_{m,k}(x) = (x - x_j)^q * prod_{l<j} (x - x_l)^(k+1),  j = m div (k+1), q = m mod (k+1)

so the global system is block lower triangular.  Only the diagonal
``(k+1) x (k+1)`` blocks are ever formed; coupling to earlier nodes enters
through the jet of the partially built polynomial.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import numeric
from .expr import Expr, JetValue, eval_jet
from .operators import DifferentialOperator
from .poly import NewtonPolynomial, ProductTerm, jet_series, poly_eval_jet
from .series import Series


class InterpolationError(ArithmeticError):
    """A stage of an interpolation recursion has no solution."""


def basis(m: int, k: int, nodes: Sequence) -> ProductTerm:
    """``Phi_{m,k}`` as a unit-coefficient product term."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    if not 0 <= m < len(nodes) * (k + 1):
        raise IndexError(f"basis index {m} outside 0..{len(nodes) * (k + 1) - 1}")
    j, q = divmod(m, k + 1)
    factors = [(0, nodes[l], k + 1) for l in range(j)]
    factors.append((0, nodes[j], q))
    return ProductTerm(numeric.num(1), tuple(factors))


@dataclass(frozen=True)
class HermiteProblem:
    """Nodes with values and derivatives ``f^(l)(x_i)``, ``l = 0..k``."""

    nodes: tuple
    k: int
    data: tuple

    def __post_init__(self):
        nodes = tuple(numeric.num(x) for x in self.nodes)
        if not nodes:
            raise ValueError("at least one node is required")
        if self.k < 0:
            raise ValueError("k must be nonnegative")
        if len(set(nodes)) != len(nodes):
            dup = next(x for x in nodes if nodes.count(x) > 1)
            raise ValueError(f"nodes must be pairwise distinct (repeated {dup})")
        if len(self.data) != len(nodes):
            raise ValueError(f"{len(self.data)} data jets for {len(nodes)} nodes")
        data = []
        for x, jet in zip(nodes, self.data):
            if isinstance(jet, JetValue):
                if jet.point[0] != x:
                    raise ValueError(f"jet based at {jet.point[0]} given for node {x}")
                values = [jet[(l,)] for l in range(self.k + 1)]
            else:
                values = list(jet)
                if len(values) != self.k + 1:
                    raise ValueError(f"node {x}: expected {self.k + 1} derivative values, got {len(values)}")
            data.append(tuple(numeric.num(v) for v in values))
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "data", tuple(data))

    @classmethod
    def from_function(cls, f: Expr | Callable, nodes: Sequence, k: int) -> "HermiteProblem":
        """Sample jets of an expression (or ``f(x, k) -> values``) at the nodes."""
        data = []
        for x in nodes:
            x = numeric.num(x)
            if isinstance(f, Expr):
                data.append(eval_jet(f, (x,), k))
            else:
                data.append(tuple(f(x, k)))
        return cls(tuple(nodes), k, tuple(data))

    @property
    def size(self) -> int:
        return len(self.nodes) * (self.k + 1)


@dataclass
class BlockLog:
    """Diagonal blocks of the global system, kept for diagnostics."""

    blocks: list = field(default_factory=list)

    def conditions(self) -> list[float]:
        return [numeric.condition_number(b) for b in self.blocks]


def _weight_series(nodes, j, power, at) -> Series:
    """Series at ``at`` of ``prod_{l<j} (x - x_l)^power``."""
    s = Series.constant(numeric.num(1), (power,))
    for l in range(j):
        s = s * Series.shifted_power(at - nodes[l], 0, power, (power,))
    return s


def diagonal_block(nodes, k: int, j: int, scaled: bool = False) -> list[list]:
    """Block ``A^{jj}``: row l, column q holds ``D^l Phi_{j(k+1)+q}(x_j)``."""
    w = _weight_series(nodes, j, k + 1, nodes[j])
    block = []
    for l in range(k + 1):
        row = []
        for q in range(k + 1):
            if q > l:
                row.append(numeric.num(0))
                continue
            # Leibniz: only D^q of (x - x_j)^q survives at x_j
            v = math.comb(l, q) * math.factorial(q) * w.derivative((l - q,))
            row.append(v / math.factorial(q) if scaled else v)
        block.append(row)
    return block


def interpolate_hermite(prob: HermiteProblem, scaled: bool = False, log: BlockLog | None = None) -> NewtonPolynomial:
    """Solve the block-triangular system node by node.

    With ``scaled=True`` the basis carries the factor ``1/q!``; the stored
    term coefficients then include that factor and ``meta["scale"]``
    records it so :func:`basis_coefficients` can recover ``a_m``.
    """
    nodes, k = prob.nodes, prob.k
    p = NewtonPolynomial(1, (), {"nodes": [(x,) for x in nodes], "k": k})
    scale = []
    for j, xj in enumerate(nodes):
        block = diagonal_block(nodes, k, j, scaled)
        if log is not None:
            log.blocks.append(block)
        if j:
            partial = jet_series(p, (xj,), (k,))
            rhs = [prob.data[j][l] - partial.derivative((l,)) for l in range(k + 1)]
        else:
            rhs = list(prob.data[0])
        # lower triangular: forward substitution
        coeffs = []
        for l in range(k + 1):
            s = rhs[l]
            for q in range(l):
                s = s - block[l][q] * coeffs[q]
            if block[l][l] == 0:
                raise InterpolationError(f"singular diagonal block at node {j} (x = {xj}), row {l}")
            coeffs.append(s / block[l][l])
        terms = []
        for q, a in enumerate(coeffs):
            b = basis(j * (k + 1) + q, k, nodes)
            c = a / math.factorial(q) if scaled else a
            terms.append(ProductTerm(c, b.factors))
            scale.append(math.factorial(q) if scaled else 1)
        p = p.extend(*terms)
    return p.with_meta(scale=scale)


def basis_coefficients(p: NewtonPolynomial) -> list:
    """The ``a_m`` multiplying the (possibly 1/q!-scaled) basis functions."""
    scale = p.meta.get("scale") or [1] * len(p.terms)
    return [t.coeff * s for t, s in zip(p.terms, scale)]


def global_matrix(nodes, k: int) -> list[list]:
    """Dense ``R_k``: row ``(i, l)``, column ``m``, entry ``D^l Phi_{m,k}(x_i)``.

    Only for tests and conditioning studies; the solver never builds it.
    """
    size = len(nodes) * (k + 1)
    rows = [[numeric.num(0)] * size for _ in range(size)]
    for m in range(size):
        single = NewtonPolynomial(1, (basis(m, k, nodes),))
        for i, x in enumerate(nodes):
            jet = poly_eval_jet(single, (x,), k)
            for l in range(k + 1):
                rows[i * (k + 1) + l][m] = jet[l]
    return rows


def confluent_vandermonde(nodes, k: int) -> np.ndarray:
    """Monomial-basis matrix of the same conditions: ``D^l x^d`` at each node."""
    size = len(nodes) * (k + 1)
    out = np.zeros((size, size))
    for i, x in enumerate(nodes):
        for l in range(k + 1):
            for d in range(l, size):
                out[i * (k + 1) + l, d] = math.perm(d, l) * float(x) ** (d - l)
    return out


def max_block_condition(nodes, k: int) -> float:
    return max(numeric.condition_number(diagonal_block(nodes, k, j)) for j in range(len(nodes)))


# --------------------------------------------------------------------------
# operator-preserving interpolation


def _jet_provider(f) -> Callable:
    if isinstance(f, Expr):
        return lambda x, order: eval_jet(f, (x,), order)
    return f


def interpolate_operator_preserving(
    f, ops: Sequence[DifferentialOperator], nodes: Sequence, tol: float = 1e-10
) -> NewtonPolynomial:
    """Match ``p(x_j) = f(x_j)`` and ``L_i p(x_j) = L_i f(x_j)`` at every node.

    Per node, one term is introduced for each derivative order in
    ``U = {0} | Q_1 | Q_2 | ...`` (``Q_i`` the orders used by ``L_i``),
    in ascending order.  The equation for order ``r`` is the value
    condition when ``r = 0`` and otherwise the partial operator
    ``L_i^{<=r}`` of the first operator owning ``r``.  Term ``r`` is
    ``(x - x_j)^r * prod_{l<j} (x - x_l)^(Q+1)`` with ``Q = max U``, so
    it leaves all earlier equations untouched and each coefficient solves
    one scalar equation with pivot ``r! * a^i_r(x_j) * W_j(x_j)``.

    ``f`` is an expression or a callable ``f(x, order) -> jet``.
    """
    if not ops:
        raise ValueError("at least one operator is required")
    for op in ops:
        if op.dimension != 1:
            raise ValueError("operator-preserving interpolation is univariate")
    jets = _jet_provider(f)
    nodes = tuple(numeric.num(x) for x in nodes)
    if len(set(nodes)) != len(nodes):
        raise ValueError("nodes must be pairwise distinct")
    owner: dict[int, int] = {0: -1}
    for i, op in enumerate(ops):
        for r in op.orders():
            owner.setdefault(r, i)
    orders = sorted(owner)
    top = orders[-1]
    p = NewtonPolynomial(1, (), {"nodes": [(x,) for x in nodes], "orders": orders})
    for j, xj in enumerate(nodes):
        w = _weight_series(nodes, j, top + 1, xj)
        w0 = w.value
        fj = jets(xj, top)
        for r in orders:
            i = owner[r]
            cond = None if i < 0 else ops[i].partial(r)
            pj = poly_eval_jet(p, (xj,), top)
            if cond is None:
                target, have, lead = fj[0], pj[0], numeric.num(1)
            else:
                target, have = cond.apply(fj, (xj,)), cond.apply(pj, (xj,))
                lead = cond.coefficient((r,), (xj,))
            pivot = math.factorial(r) * lead * w0
            resid = target - have
            if pivot == 0:
                if resid == 0:
                    continue
                what = "value" if i < 0 else f"operator {i}"
                raise InterpolationError(
                    f"zero pivot at node {j} (x = {xj}), {what}, order {r}: coefficient of D^{r} vanishes"
                )
            factors = tuple((0, x, top + 1) for x in nodes[:j]) + ((0, xj, r),)
            p = p.extend(ProductTerm(resid / pivot, factors))
        # operators with no order of their own are only satisfied by accident
        pj = poly_eval_jet(p, (xj,), top)
        for i, op in enumerate(ops):
            target = op.apply(fj, (xj,))
            if abs(op.apply(pj, (xj,)) - target) > tol * (1 + abs(target)):
                raise InterpolationError(
                    f"operator {i} cannot be matched at node {j} (x = {xj}): all its orders are owned by earlier operators"
                )
    return p
