"""Blending interpolants built on disjoint node sets.

For a node ``x_j`` of member ``p`` the blended polynomial contains

    q_j(x) p_p(x) - G_j(x) sum_{0 < delta <= beta} a^j_delta (x - x_j)^delta

where ``G_j = prod_{y != x_j} prod_i (x^i - y^i)^(k+1)`` runs over the whole
union and ``q_j = G_j / G_j(x_j)``.  Every other node's contribution
vanishes to order ``k`` at ``x_j``; the ``a^j`` are solved in increasing
grlex order from the Leibniz expansion of the matching condition.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

from . import multiindex as mi
from . import numeric
from .hermite import InterpolationError
from .poly import NewtonPolynomial, ProductTerm, jet_series


@dataclass(frozen=True)
class Member:
    """One partition: its nodes, its polynomial and the matched order ``k``."""

    nodes: tuple
    poly: NewtonPolynomial
    k: int

    def __post_init__(self):
        pts = tuple(tuple(numeric.num(c) for c in (x if isinstance(x, (tuple, list)) else (x,))) for x in self.nodes)
        if any(len(x) != self.poly.dimension for x in pts):
            raise ValueError("node dimension does not match the polynomial")
        object.__setattr__(self, "nodes", pts)


@dataclass
class BlendLog:
    rounds: int = 0
    seconds: list = field(default_factory=list)


def check_disjoint(members: Sequence[Member]) -> None:
    seen: dict = {}
    for m, member in enumerate(members):
        for x in member.nodes:
            if x in seen:
                raise ValueError(f"node {x} appears in partitions {seen[x]} and {m}")
            seen[x] = m


def blend_pair(first: Member, second: Member, k: int | None = None) -> Member:
    """Blend two members into one carrying both sets of jet conditions up to ``k``."""
    check_disjoint((first, second))
    k = min(first.k, second.k) if k is None else k
    n = first.poly.dimension
    if second.poly.dimension != n:
        raise ValueError("members have different dimensions")
    union = first.nodes + second.nodes
    for a in range(len(union)):
        for b in range(a):
            for i in range(n):
                if union[a][i] == union[b][i]:
                    raise InterpolationError(
                        f"zero normalization denominator: nodes {union[b]} and {union[a]} share x{i + 1}"
                    )
    bound = (k,) * n
    lattice = [g for g in mi.box(bound) if any(g)]
    terms: list = []
    for member in (first, second):
        for xj in member.nodes:
            others = tuple((i, y[i], k + 1) for y in union if y != xj for i in range(n))
            g_series = jet_series(NewtonPolynomial(n, (ProductTerm(numeric.num(1), others),)), xj, bound)
            g0 = g_series.value
            p_series = jet_series(member.poly, xj, bound)
            # D^gamma of q_j = G_j / G_j(x_j)
            dq = {g: g_series.derivative(g) / g0 for g in mi.box(bound)}
            dp = {g: p_series.derivative(g) for g in mi.box(bound)}
            coeffs: dict = {}
            for delta in lattice:
                lhs = numeric.num(0)
                for rho in mi.box(delta):
                    if any(rho):
                        lhs = lhs + mi.binom(delta, rho) * dq[rho] * dp[mi.sub(delta, rho)]
                # D^delta [G_j * sum a_gamma (x-x_j)^gamma] at x_j, known part
                known = numeric.num(0)
                for gamma, a in coeffs.items():
                    if mi.leq(gamma, delta):
                        known = known + mi.binom(delta, gamma) * mi.factorial(gamma) * g_series.derivative(mi.sub(delta, gamma)) * a
                coeffs[delta] = (lhs - known) / (g0 * mi.factorial(delta))
            scale = 1 / g0
            for t in member.poly.terms:
                terms.append(ProductTerm(t.coeff * scale, others + t.factors))
            for delta, a in coeffs.items():
                if a != 0:
                    own = tuple((i, xj[i], delta[i]) for i in range(n))
                    terms.append(ProductTerm(-a, others + own))
    poly = NewtonPolynomial(n, tuple(terms), {"nodes": list(union), "k": k})
    return Member(union, poly, k)


def _blend_in_mode(args):
    first, second, k, mode = args
    with numeric.precision(mode):
        return blend_pair(first, second, k)


def blend_many(members: Sequence[Member], k: int | None = None, jobs: int = 1, log: BlendLog | None = None) -> Member:
    """Deterministic left-balanced pairwise reduction.

    Each round pairs neighbours ``(0,1), (2,3), ...``; an odd member is
    carried to the next round.  With ``jobs > 1`` the pairs of a round are
    blended in worker processes; the tree, and so the result, is the same.
    """
    members = list(members)
    if not members:
        raise ValueError("nothing to blend")
    check_disjoint(members)
    if k is None:
        k = min(m.k for m in members)
    log = log if log is not None else BlendLog()
    mode = numeric.current_mode()
    pool = ProcessPoolExecutor(max_workers=jobs) if jobs > 1 and len(members) > 2 else None
    try:
        while len(members) > 1:
            start = time.perf_counter()
            pairs = [(members[i], members[i + 1], k, mode) for i in range(0, len(members) - 1, 2)]
            if pool is not None:
                merged = list(pool.map(_blend_in_mode, pairs))
            else:
                merged = [_blend_in_mode(p) for p in pairs]
            if len(members) % 2:
                merged.append(members[-1])
            members = merged
            log.rounds += 1
            log.seconds.append(time.perf_counter() - start)
    finally:
        if pool is not None:
            pool.shutdown()
    return members[0]


def rounds_needed(count: int) -> int:
    return math.ceil(math.log2(count)) if count > 1 else 0


def condition_audit(member: Member, targets: Sequence[Member]) -> list[tuple]:
    """Rows ``(node, order, target, achieved, |diff|)`` for every input condition."""
    rows = []
    n = member.poly.dimension
    for t in targets:
        bound = (t.k,) * n
        for x in t.nodes:
            want = jet_series(t.poly, x, bound)
            got = jet_series(member.poly, x, bound)
            for g in mi.box(bound):
                a, b = want.derivative(g), got.derivative(g)
                rows.append((x, g, a, b, abs(a - b)))
    return rows
