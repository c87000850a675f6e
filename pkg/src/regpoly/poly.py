"""Polynomials kept in node-anchored product form.

A term is ``coeff * prod (x_var - anchor)^exp``.  Polynomials are never
expanded during construction; :func:`to_monomial` exists for oracles and
export only.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import multiindex as mi
from . import numeric
from .expr import JetValue, jet_indices
from .series import Series

Factor = tuple  # (var index, anchor, exponent)


@dataclass(frozen=True)
class ProductTerm:
    coeff: object
    factors: tuple = ()

    def __post_init__(self):
        cleaned = tuple((int(v), a, int(e)) for v, a, e in self.factors if e != 0)
        if any(e < 0 for _, _, e in cleaned):
            raise ValueError("factor exponents must be nonnegative")
        object.__setattr__(self, "factors", cleaned)

    def value(self, x: Sequence) -> object:
        out = self.coeff
        for v, a, e in self.factors:
            out = out * (x[v] - a) ** e
        return out

    def degree(self) -> int:
        return sum(e for _, _, e in self.factors)

    def scaled(self, c) -> "ProductTerm":
        return ProductTerm(self.coeff * c, self.factors)

    def times(self, factors: Iterable[Factor], c=1) -> "ProductTerm":
        """Multiply by extra factors, placed in front so shared prefixes stay shared."""
        return ProductTerm(self.coeff * c, tuple(factors) + self.factors)


@dataclass(frozen=True)
class NewtonPolynomial:
    dimension: int
    terms: tuple = ()
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))

    def __len__(self):
        return len(self.terms)

    def extend(self, *terms: ProductTerm) -> "NewtonPolynomial":
        return NewtonPolynomial(self.dimension, self.terms + tuple(terms), dict(self.meta))

    def with_meta(self, **meta) -> "NewtonPolynomial":
        merged = dict(self.meta)
        merged.update(meta)
        return NewtonPolynomial(self.dimension, self.terms, merged)

    @property
    def coefficients(self) -> list:
        return [t.coeff for t in self.terms]

    def degree(self) -> int:
        return max((t.degree() for t in self.terms if t.coeff != 0), default=0)

    def __call__(self, x):
        return evaluate(self, x)


def _point(p: NewtonPolynomial, x) -> tuple:
    if np.ndim(x) == 0:
        x = (x,)
    if len(x) != p.dimension:
        raise ValueError(f"point of length {len(x)} for a {p.dimension}-variate polynomial")
    return tuple(numeric.num(v) for v in x)


def evaluate(p: NewtonPolynomial, x) -> object:
    """Direct product evaluation at a single point."""
    pt = _point(p, x)
    total = numeric.num(0)
    for t in p.terms:
        total = total + t.value(pt)
    return total


def evaluate_many(p: NewtonPolynomial, points) -> np.ndarray:
    """Vectorized evaluation on an ``(m, n)`` (or ``(m,)`` for n=1) array."""
    pts = np.asarray(points, dtype=float if not numeric.is_extended() else object)
    if pts.ndim == 1:
        pts = pts[:, None] if p.dimension == 1 else pts[None, :]
    if numeric.is_extended():
        return np.array([evaluate(p, row) for row in pts], dtype=object)
    out = np.zeros(len(pts))
    cache: dict = {}
    for t in p.terms:
        prod = _prefix_values(t.factors, pts, cache)
        out += t.coeff * prod
    return out


def _prefix_values(factors, pts, cache):
    node = cache
    prod = None
    for f in factors:
        entry = node.get(f)
        if entry is None:
            v, a, e = f
            val = (pts[:, v] - a) ** e
            val = val if prod is None else prod * val
            entry = (val, {})
            node[f] = entry
        prod, node = entry
    return np.ones(len(pts)) if prod is None else prod


def _jet_series(p: NewtonPolynomial, pt, bound, total) -> Series:
    """Sum of term series, sharing factor prefixes through a trie."""
    root: dict = {}
    factor_cache: dict = {}
    one = Series.constant(numeric.num(1), bound, total)
    acc = Series.zero(bound, total)
    for t in p.terms:
        if t.coeff == 0:
            continue
        node = root
        s = one
        for f in t.factors:
            entry = node.get(f)
            if entry is None:
                fs = factor_cache.get(f)
                if fs is None:
                    v, a, e = f
                    fs = Series.shifted_power(pt[v] - a, v, e, bound, total)
                    factor_cache[f] = fs
                entry = (s * fs, {})
                node[f] = entry
            s, node = entry
        acc = acc + s * t.coeff
    return acc


def poly_eval_jet(p: NewtonPolynomial, point, order) -> JetValue:
    """Exact derivatives of ``p`` at ``point`` by series propagation.

    ``order`` follows :func:`regpoly.expr.eval_jet`: an int (total degree
    when n > 1) or a per-axis bound.
    """
    pt = _point(p, point)
    indices, bound, total = jet_indices(order, p.dimension)
    s = _jet_series(p, pt, bound, total)
    return JetValue(pt, order if isinstance(order, int) else tuple(order), s.derivatives(indices))


def jet_series(p: NewtonPolynomial, point, bound, total=None) -> Series:
    return _jet_series(p, _point(p, point), tuple(bound), total)


# --------------------------------------------------------------------------
# monomial expansion


def to_monomial(p: NewtonPolynomial):
    """Expand to the monomial basis.

    Univariate: dense ascending coefficient array.  Multivariate: dict
    ``{multiindex: coefficient}``.
    """
    if p.dimension == 1:
        out = np.zeros(1, dtype=numeric.dtype())
        for t in p.terms:
            poly = np.array([t.coeff], dtype=out.dtype)
            for _, a, e in t.factors:
                lin = np.array([-a, numeric.num(1)], dtype=out.dtype)
                for _ in range(e):
                    poly = np.convolve(poly, lin) if out.dtype != object else _conv(poly, lin)
            if len(poly) > len(out):
                grown = np.zeros(len(poly), dtype=out.dtype)
                grown[: len(out)] = out
                out = grown
            out[: len(poly)] = out[: len(poly)] + poly
        return out
    result: dict = {}
    n = p.dimension
    for t in p.terms:
        poly = {(0,) * n: t.coeff}
        for v, a, e in t.factors:
            for _ in range(e):
                nxt: dict = {}
                for alpha, c in poly.items():
                    up = list(alpha)
                    up[v] += 1
                    up = tuple(up)
                    nxt[up] = nxt.get(up, 0) + c
                    nxt[alpha] = nxt.get(alpha, 0) - a * c
                poly = nxt
        for alpha, c in poly.items():
            result[alpha] = result.get(alpha, 0) + c
    return dict(sorted(result.items(), key=lambda kv: mi.grlex_key(kv[0])))


def _conv(a, b):
    out = np.zeros(len(a) + len(b) - 1, dtype=object)
    out.fill(numeric.num(0))
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] = out[i + j] + x * y
    return out


def horner(coeffs, x):
    """Evaluate an ascending monomial coefficient array."""
    acc = 0 * x
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def eval_monomial(coeffs: dict, x) -> object:
    total = 0
    for alpha, c in coeffs.items():
        term = c
        for xi, a in zip(x, alpha):
            term = term * xi**a
        total = total + term
    return total


def monomial_polynomial(coeffs, dimension: int = 1, center=None) -> NewtonPolynomial:
    """Wrap monomial coefficients as product terms anchored at ``center`` (default 0)."""
    center = tuple(center) if center is not None else (0.0,) * dimension
    terms = []
    if dimension == 1 and not isinstance(coeffs, dict):
        items = [((d,), c) for d, c in enumerate(coeffs)]
    else:
        items = list(coeffs.items())
    for alpha, c in items:
        terms.append(ProductTerm(c, tuple((v, center[v], e) for v, e in enumerate(alpha))))
    return NewtonPolynomial(dimension, tuple(terms))


# --------------------------------------------------------------------------
# serialization


def to_json_dict(p: NewtonPolynomial) -> dict:
    def scalar(x):
        return float(x) if not isinstance(x, str) and not numeric.is_extended() else numeric.to_text(x)

    out = {
        "dimension": p.dimension,
        "terms": [
            {
                "coeff": scalar(t.coeff),
                "factors": [{"var": v, "anchor": scalar(a), "exp": e} for v, a, e in t.factors],
            }
            for t in p.terms
        ],
    }
    if "nodes" in p.meta:
        out["nodes"] = [[scalar(c) for c in node] for node in p.meta["nodes"]]
    for key in ("k", "beta"):
        if key in p.meta:
            out[key] = p.meta[key]
    return out


def from_json_dict(data: dict) -> NewtonPolynomial:
    terms = []
    for t in data["terms"]:
        factors = tuple(
            (int(f["var"]), numeric.parse_scalar(f["anchor"]), int(f["exp"])) for f in t["factors"]
        )
        terms.append(ProductTerm(numeric.parse_scalar(t["coeff"]), factors))
    meta = {}
    if "nodes" in data:
        meta["nodes"] = [tuple(numeric.parse_scalar(c) for c in node) for node in data["nodes"]]
    for key in ("k", "beta"):
        if key in data:
            meta[key] = data[key]
    return NewtonPolynomial(int(data["dimension"]), tuple(terms), meta)


def dumps(p: NewtonPolynomial) -> str:
    return json.dumps(to_json_dict(p), indent=1)


def loads(text: str) -> NewtonPolynomial:
    return from_json_dict(json.loads(text))


def coefficients_csv(p: NewtonPolynomial, labels: Sequence[int] | None = None) -> str:
    """CSV of ``index,coefficient`` rows in term order."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["index", "coefficient"])
    for i, t in enumerate(p.terms):
        w.writerow([labels[i] if labels is not None else i, numeric.to_text(t.coeff)])
    return buf.getvalue()


def factorial_scale(q: int) -> float:
    return 1.0 / math.factorial(q)
