"""Error diagnostics and brute-force oracles.

Norms here are sampled stand-ins for the continuous ones: sup norm,
sum of derivative sup norms, empirical Hoelder coefficient and a
quadrature L2 norm.  No constants from the convergence theory are
estimated.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import mpmath
import numpy as np

from . import numeric
from .collocate import Bvp1D, CollocationProblem, apply_operator
from .expr import evaluate
from .hermite import HermiteProblem, interpolate_hermite
from .poly import NewtonPolynomial, ProductTerm

ORACLE_LIMIT = 40
ORACLE_BITS = 300


@dataclass(frozen=True)
class ErrorReport:
    sup: float
    ck: float
    holder: float
    l2: float
    grid_size: int
    alpha: float = 0.5
    k: int = 0

    def rows(self) -> list[tuple]:
        return [
            ("sup", self.sup, self.grid_size),
            (f"C{self.k}", self.ck, self.grid_size),
            (f"holder_{self.alpha:g}", self.holder, self.grid_size),
            ("L2", self.l2, self.grid_size),
        ]


def holder_coefficient(points, values, alpha: float = 0.5) -> float:
    """``max |h(x) - h(y)| / |x - y|^alpha`` over distinct grid pairs."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    v = np.asarray(values, dtype=float)
    if len(v) < 2:
        return 0.0
    dist = np.sqrt(((pts[:, None, :] - pts[None, :, :]) ** 2).sum(axis=-1))
    diff = np.abs(v[:, None] - v[None, :])
    mask = dist > 0
    return float(np.max(diff[mask] / dist[mask] ** alpha))


def l2_norm(points, values, volume: float | None = None) -> float:
    """Trapezoid rule on a sorted 1D grid; mean times volume otherwise."""
    pts = np.asarray(points, dtype=float)
    v = np.asarray(values, dtype=float) ** 2
    if pts.ndim == 1 or pts.shape[1] == 1:
        x = pts.ravel()
        order = np.argsort(x)
        return float(math.sqrt(np.trapezoid(v[order], x[order])))
    if volume is None:
        raise ValueError("multivariate L2 norm needs the region volume")
    return float(math.sqrt(v.mean() * volume))


def error_report(points, values, derivatives: Sequence = (), alpha: float = 0.5, volume=None) -> ErrorReport:
    """Norms of a sampled function; ``derivatives[l-1]`` holds ``D^l h`` samples."""
    v = np.abs(np.asarray(values, dtype=float))
    sup = float(v.max()) if v.size else 0.0
    ck = sup + sum(float(np.max(np.abs(np.asarray(d, dtype=float)))) for d in derivatives)
    return ErrorReport(
        sup=sup,
        ck=ck,
        holder=holder_coefficient(points, values, alpha),
        l2=l2_norm(points, values, volume),
        grid_size=len(v),
        alpha=alpha,
        k=len(derivatives),
    )


@dataclass(frozen=True)
class ResidualReport:
    delta_f: ErrorReport
    delta_g: float

    def rows(self) -> list[tuple]:
        return [("dg_sup", self.delta_g, 0)] + [("df_" + q, v, m) for q, v, m in self.delta_f.rows()]


def residual_report(p: NewtonPolynomial, problem, grid, alpha: float = 0.5, volume=None) -> ResidualReport:
    """``L p - f`` on the grid and the boundary mismatch."""
    if isinstance(problem, Bvp1D):
        op, f = problem.operator(), problem.f
        pts = [(numeric.num(x),) for x in np.ravel(grid)]
        dg = max(abs(float(p(problem.d) - problem.cd)), abs(float(p(problem.e) - problem.ce)))
    elif isinstance(problem, CollocationProblem):
        op, f = problem.operator, problem.f
        pts = [tuple(numeric.num(c) for c in x) for x in grid]
        dg = 0.0
        for x in problem.boundary:
            want = problem.boundary_jet(x, (0,) * problem.dimension)[(0,) * problem.dimension]
            dg = max(dg, abs(float(p(x) - want)))
    else:
        raise TypeError(f"no residual for {type(problem).__name__}")
    df = [float(apply_operator(op, p, x) - evaluate(f, x)) for x in pts]
    return ResidualReport(error_report([[float(c) for c in x] for x in pts], df, alpha=alpha, volume=volume), dg)


def l2_by_slice(h: Callable, x_range: tuple, slices: Sequence[float], samples: int = 101) -> list[tuple]:
    """``(s, ||h(., s)||_L2)`` on ``x_range`` for each time slice ``s``."""
    xs = np.linspace(x_range[0], x_range[1], samples)
    out = []
    for s in slices:
        v = [float(h((x, s))) for x in xs]
        out.append((s, l2_norm(xs, v)))
    return out


# --------------------------------------------------------------------------
# dense oracle


def dense_oracle(prob: HermiteProblem, center: bool = True, bits: int = ORACLE_BITS) -> NewtonPolynomial:
    """Interpolant from the full confluent Vandermonde system.

    This is the badly conditioned monomial route, so the system is solved
    by LU in ``bits``-bit software floats; only the final coefficients are
    rounded to the active precision.  The monomials are taken in
    ``(x - m)/s`` with ``m`` and ``s`` the midpoint and half-width of the
    node hull.  The double-precision 2-norm condition number is stored as
    ``meta["condition"]`` and ``meta["ill_conditioned"]`` flags values
    above 1e14.
    """
    size = prob.size
    if size > ORACLE_LIMIT:
        raise ValueError(f"dense oracle limited to {ORACLE_LIMIT} conditions, got {size}")
    ctx = mpmath.MPContext()
    ctx.prec = bits
    x = [ctx.mpf(v) for v in prob.nodes]
    mid = (max(x) + min(x)) / 2 if center else ctx.mpf(0)
    half = (max(x) - min(x)) / 2 if center and len(x) > 1 else ctx.mpf(1)
    k = prob.k
    A = ctx.matrix(size, size)
    rhs = ctx.matrix(size, 1)
    for i, xi in enumerate(x):
        u = (xi - mid) / half
        for l in range(k + 1):
            row = i * (k + 1) + l
            rhs[row] = ctx.mpf(prob.data[i][l])
            for d in range(l, size):
                A[row, d] = math.perm(d, l) * u ** (d - l) / half**l
    cond = numeric.condition_number(A.tolist())
    try:
        coeffs = ctx.lu_solve(A, rhs)
    except ZeroDivisionError as exc:
        raise numeric.SingularBlockError("dense oracle system is singular") from exc
    terms = tuple(
        ProductTerm(numeric.num(coeffs[d] / half**d), ((0, numeric.num(mid), d),)) for d in range(size)
    )
    return NewtonPolynomial(1, terms, {"condition": cond, "ill_conditioned": cond > 1e14})


# --------------------------------------------------------------------------
# convergence tables


@dataclass(frozen=True)
class ConvergenceRow:
    nodes: int
    sup: float
    l2: float


def convergence_study(build: Callable[[int], Callable], reference: Callable, counts: Sequence[int], grid) -> tuple[list, bool]:
    """Rows of sup and L2 error per node count, and whether sup decreased monotonically.

    ``build(count)`` returns a callable approximation; nothing is asserted.
    """
    grid = np.asarray(grid, dtype=float)
    ref = np.array([float(reference(x)) for x in grid])
    rows = []
    for m in counts:
        approx = build(m)
        err = np.array([float(approx(x)) for x in grid]) - ref
        rows.append(ConvergenceRow(m, float(np.max(np.abs(err))), l2_norm(grid, err)))
    monotone = all(b.sup < a.sup for a, b in zip(rows, rows[1:]))
    return rows, monotone


def hermite_family(f, lo: float, hi: float, k: int) -> Callable[[int], Callable]:
    def build(m):
        nodes = [lo + (hi - lo) * i / (m - 1) for i in range(m)] if m > 1 else [lo]
        return interpolate_hermite(HermiteProblem.from_function(f, nodes, k))

    return build


def rows_csv(header: Sequence[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([numeric.to_text(v) if isinstance(v, float) else v for v in r])
    return buf.getvalue()
