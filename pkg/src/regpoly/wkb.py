"""Truncated WKB expansions of the parabolic kernel with unit diffusion.

For ``du/dt = 1/2 Laplace u + b . grad u`` the kernel is written as

    p(t, x, y) = (2 pi t)^(-n/2) exp(-|x - y|^2 / (2t) + sum_k c_k(x, y) t^k)

and every ``c_k`` is kept as a Taylor polynomial in ``dx = x - y`` at a
fixed base point ``y``.  Level ``k`` is truncated at total degree
``D_k = D - 2k`` (``D = 2K + 2`` by default) which is exactly what the
next level consumes, since each step takes two derivatives.
"""

from __future__ import annotations

import csv
import io
import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import multiindex as mi
from . import numeric
from .expr import Expr, evaluate, taylor
from .hermite import HermiteProblem, interpolate_hermite
from .multivariate import MultiHermiteProblem, interpolate_hermite_nd
from .poly import NewtonPolynomial, jet_series
from .series import Series, _mask

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class WkbModel:
    """Drifts ``b_i`` (expressions or interpolating polynomials), base point, order."""

    dimension: int
    drifts: tuple
    y: tuple
    K: int
    D: int | None = None

    def __post_init__(self):
        if self.K < 0:
            raise ValueError("K must be nonnegative")
        if len(self.drifts) != self.dimension or len(self.y) != self.dimension:
            raise ValueError("need one drift and one base coordinate per dimension")
        object.__setattr__(self, "drifts", tuple(self.drifts))
        object.__setattr__(self, "y", tuple(numeric.num(c) for c in self.y))
        if self.D is not None and self.D < 2 * self.K:
            raise ValueError(f"degree D = {self.D} too small for K = {self.K}; need D >= {2 * self.K}")

    @property
    def top_degree(self) -> int:
        return 2 * self.K + 2 if self.D is None else self.D

    def degree(self, k: int) -> int:
        return self.top_degree - 2 * k

    def drift_series(self, i: int, degree: int) -> Series:
        bound = (self.top_degree,) * self.dimension
        b = self.drifts[i]
        if isinstance(b, NewtonPolynomial):
            s = jet_series(b, self.y, bound, self.top_degree)
        else:
            s = taylor(b, self.y, bound, self.top_degree)
        return truncate(s, degree)


@dataclass
class WkbExpansion:
    y: tuple
    K: int
    degrees: list
    c: list = field(default_factory=list)

    @property
    def dimension(self) -> int:
        return len(self.y)

    def value(self, k: int, x) -> object:
        """``c_k(x, y)``."""
        delta = [numeric.num(a) - b for a, b in zip(x, self.y)]
        return poly_value(self.c[k], delta)

    def table(self) -> list[tuple]:
        """Rows ``(k, multiindex, coefficient)`` for the nonzero coefficients."""
        rows = []
        for k, s in enumerate(self.c):
            for g in mi.simplex(self.dimension, self.degrees[k]):
                v = s.c[g]
                if v != 0:
                    rows.append((k, g, v))
        return rows


# --------------------------------------------------------------------------
# polynomial helpers on Series coefficient arrays


def truncate(s: Series, degree: int) -> Series:
    c = s.c.copy()
    c[_mask(c.shape, degree)] = 0
    return Series(c, degree)


def partial(s: Series, axis: int) -> Series:
    """``d/d dx_axis`` of a Taylor polynomial, same array shape."""
    c = numeric.zeros(s.c.shape)
    src = [slice(None)] * s.c.ndim
    dst = [slice(None)] * s.c.ndim
    src[axis] = slice(1, None)
    dst[axis] = slice(0, -1)
    weights = np.arange(1, s.c.shape[axis]).reshape([-1 if i == axis else 1 for i in range(s.c.ndim)])
    c[tuple(dst)] = s.c[tuple(src)] * weights
    total = None if s.total is None else max(s.total - 1, 0)
    return Series(c, total)


def scale_by_degree(s: Series, offset: int) -> Series:
    """Divide the degree-``m`` part by ``m + offset`` (termwise ``int_0^1 s^(m+offset-1) ds``)."""
    grids = np.indices(s.c.shape).sum(axis=0)
    denom = grids + offset
    out = s.c.copy()
    it = np.nditer(denom, flags=["multi_index"])
    for d in it:
        idx = it.multi_index
        if out[idx] != 0:
            out[idx] = out[idx] / int(d)
    return Series(out, s.total)


def poly_value(s: Series, delta: Sequence) -> object:
    total = numeric.num(0)
    for idx in zip(*np.nonzero(s.c)):
        term = s.c[idx]
        for d, e in zip(delta, idx):
            term = term * d ** int(e)
        total = total + term
    return total


def _monomial(n, axis, degree_cap, shape):
    c = numeric.zeros(shape)
    c[mi.unit(n, axis)] = numeric.num(1)
    return Series(c, degree_cap)


# --------------------------------------------------------------------------
# recursion


def compute_c0(model: WkbModel, degree: int | None = None) -> Series:
    """``c_0 = -sum_i dx_i int_0^1 b_i(y + s dx) ds`` as a Taylor polynomial."""
    D = model.degree(0) if degree is None else degree
    n = model.dimension
    shape = (model.top_degree + 1,) * n
    acc = Series(numeric.zeros(shape), D)
    for i in range(n):
        b = model.drift_series(i, D - 1) if D >= 1 else Series(numeric.zeros(shape), 0)
        acc = acc - _monomial(n, i, D, shape) * Series(b.c, D)
    # the integrand's degree-m part gives degree m+1 in c_0 with factor 1/(m+1)
    return truncate(scale_by_degree(acc, 0), D)


def remainder(model: WkbModel, cs: Sequence[Series], k: int, degree: int) -> Series:
    """``R_k = 1/2 sum_i sum_l d_i c_l d_i c_{k-l} + 1/2 Laplace c_k + sum_i b_i d_i c_k``."""
    for l in range(k + 1):
        have = cs[l].total
        need = degree + (2 if l == k else 1)
        if have is not None and have < need:
            raise ValueError(f"c_{l} known to degree {have}; R_{k} at degree {degree} needs degree {need}")
    n = model.dimension
    grads = [[truncate(partial(cs[l], i), degree) for i in range(n)] for l in range(k + 1)]
    shape = cs[0].c.shape
    out = Series(numeric.zeros(shape), degree)
    half = numeric.num(0.5)
    for i in range(n):
        for l in range(k + 1):
            out = out + grads[l][i] * grads[k - l][i] * half
        out = out + truncate(partial(partial(cs[k], i), i), degree) * half
        out = out + model.drift_series(i, degree) * grads[k][i]
    return truncate(out, degree)


def compute_ck(model: WkbModel, cs: Sequence[Series], k: int, degree: int | None = None) -> Series:
    """``c_{k+1}``: the degree-``m`` part of ``R_k`` divided by ``m + k + 1``."""
    D = model.degree(k + 1) if degree is None else degree
    r = remainder(model, cs, k, D)
    return scale_by_degree(r, k + 1)


def expand(model: WkbModel) -> WkbExpansion:
    cs = [compute_c0(model)]
    for k in range(model.K):
        cs.append(compute_ck(model, cs, k))
    return WkbExpansion(model.y, model.K, [model.degree(k) for k in range(model.K + 1)], cs)


def log_kernel(expansion: WkbExpansion, t, x) -> object:
    if t <= 0:
        raise ValueError("time step must be positive")
    t = numeric.num(t)
    n = expansion.dimension
    d2 = sum((numeric.num(a) - b) ** 2 for a, b in zip(x, expansion.y))
    acc = -numeric.num(n) / 2 * numeric.log(2 * numeric.pi() * t) - d2 / (2 * t)
    tk = numeric.num(1)
    for k in range(len(expansion.c)):
        acc = acc + expansion.value(k, x) * tk
        tk = tk * t
    return acc


def assemble_kernel(expansion: WkbExpansion, t, x) -> object:
    """Kernel value, accumulated in log space; overflow returns ``inf``."""
    lp = log_kernel(expansion, t, x)
    try:
        return numeric.exp(lp)
    except OverflowError:
        return math.inf


# --------------------------------------------------------------------------
# drift approximation


def approximate_drift(drifts: Sequence[Expr], nodes, order: int) -> list[NewtonPolynomial]:
    """Replace each drift by its regular interpolant matching ``order`` derivatives."""
    out = []
    for b in drifts:
        first = nodes[0]
        if np.ndim(first) == 0 or len(first) == 1:
            pts = [x if np.ndim(x) == 0 else x[0] for x in nodes]
            p = interpolate_hermite(HermiteProblem.from_function(b, pts, order))
        else:
            p = interpolate_hermite_nd(MultiHermiteProblem.from_function(b, nodes, (order,) * len(first)))
        log.info("drift approximation: %d coefficients, degree %d", len(p.terms), p.degree())
        out.append(p)
    return out


# --------------------------------------------------------------------------
# residual checker for general diffusion


@dataclass
class ResidualReport:
    eikonal: list  # eikonal residual per point
    transport: list  # transport residual per level, per point
    c0_boundary: object
    rk_boundary: list

    @property
    def max_abs(self) -> float:
        vals = [abs(v) for v in self.eikonal] + [abs(v) for lvl in self.transport for v in lvl]
        vals += [abs(self.c0_boundary)] + [abs(v) for v in self.rk_boundary]
        return float(max(vals))


def _jets(s: Series, delta):
    """Value, gradient and Hessian of a Taylor polynomial at offset ``delta``."""
    n = s.c.ndim
    val = numeric.num(0)
    grad = [numeric.num(0)] * n
    hess = [[numeric.num(0)] * n for _ in range(n)]
    for idx in zip(*np.nonzero(s.c)):
        g = [int(e) for e in idx]
        c = s.c[idx]
        val = val + c * _mono(delta, g)
        for i in range(n):
            if not g[i]:
                continue
            gi = list(g)
            gi[i] -= 1
            grad[i] = grad[i] + c * g[i] * _mono(delta, gi)
            for j in range(n):
                if gi[j]:
                    gij = list(gi)
                    gij[j] -= 1
                    hess[i][j] = hess[i][j] + c * g[i] * gi[j] * _mono(delta, gij)
    return val, grad, hess


def _mono(delta, g):
    out = numeric.num(1)
    for d, e in zip(delta, g):
        out = out * d ** e
    return out


def wkb_residual(a, b: Sequence[Expr], y, candidates: Sequence[Series], points) -> ResidualReport:
    """Left minus right of the general WKB equations at sample points.

    ``a`` is an ``n x n`` nested list of expressions, ``b`` the drifts and
    ``candidates`` the ``c_k`` as Taylor polynomials around ``y``.  The
    squared distance is ``|x - y|^2`` (coordinates already transformed).
    Only checks; the general recursion is not solved.
    """
    n = len(y)
    y = tuple(numeric.num(c) for c in y)
    half = numeric.num(0.5)

    def state(x):
        delta = [numeric.num(xi) - yi for xi, yi in zip(x, y)]
        A = [[evaluate(a[i][j], x) for j in range(n)] for i in range(n)]
        B = [evaluate(b[i], x) for i in range(n)]
        J = [_jets(c, delta) for c in candidates]
        return delta, A, B, J

    def rk(k, A, B, J):
        out = numeric.num(0)
        for i in range(n):
            for j in range(n):
                for l in range(k + 1):
                    out = out + half * A[i][j] * J[l][1][i] * J[k - l][1][j]
                out = out + half * A[i][j] * J[k][2][i][j]
            out = out + B[i] * J[k][1][i]
        return out

    eikonal = []
    transport = [[] for _ in range(len(candidates) - 1)]
    for x in points:
        x = tuple(numeric.num(c) for c in x)
        delta, A, B, J = state(x)
        # L d^2 with d^2 = |x-y|^2: 1/2 sum a_ij * 2 delta_ij + sum b_i * 2 delta_i
        ld2 = sum(A[i][i] for i in range(n)) + 2 * sum(B[i] * delta[i] for i in range(n))
        e = -numeric.num(n) / 2 + half * ld2
        for i in range(n):
            e = e + half * sum((A[i][j] + A[j][i]) * delta[j] for j in range(n)) * J[0][1][i]
        eikonal.append(e)
        for k in range(len(candidates) - 1):
            lhs = (k + 1) * J[k + 1][0]
            for i in range(n):
                for j in range(n):
                    lhs = lhs + half * A[i][j] * (delta[i] * J[k + 1][1][j] + delta[j] * J[k + 1][1][i])
            transport[k].append(lhs - rk(k, A, B, J))
    _, A, B, J = state(y)
    det = numeric.num(np.linalg.det(np.array([[float(v) for v in row] for row in A]))) if n > 1 else A[0][0]
    c0b = J[0][0] + half * numeric.log(numeric.sqrt(det))
    # the transport equation at x = y reads (k+1) c_{k+1}(y, y) = R_k(y, y)
    rkb = [(k + 1) * J[k + 1][0] - rk(k, A, B, J) for k in range(len(candidates) - 1)]
    return ResidualReport(eikonal, transport, c0b, rkb)


def coefficient_csv(expansion: WkbExpansion) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["k", "multiindex", "value"])
    for k, g, v in expansion.table():
        w.writerow([k, " ".join(str(e) for e in g), numeric.to_text(v)])
    return buf.getvalue()
