"""Truncated multivariate Taylor series (jets) with exact propagation.

A :class:`Series` stores normalized Taylor coefficients ``c[gamma] =
D^gamma f(x0) / gamma!`` on a box ``gamma <= bound``, optionally further
cut to total degree ``<= total``.  Arithmetic is exact up to truncation,
so derivatives at an anchor node come out exactly zero where a product
vanishes, which a log-derivative trick would not give.
"""

from __future__ import annotations

import functools
import math

import numpy as np

from . import multiindex as mi
from . import numeric


@functools.lru_cache(maxsize=256)
def _mask(shape: tuple[int, ...], total: int):
    grids = np.indices(shape)
    return grids.sum(axis=0) > total


class Series:
    __slots__ = ("c", "total")

    def __init__(self, c: np.ndarray, total: int | None = None):
        self.c = c
        self.total = total

    # construction -----------------------------------------------------
    @classmethod
    def zero(cls, bound, total=None):
        return cls(numeric.zeros(tuple(b + 1 for b in bound)), total)

    @classmethod
    def constant(cls, value, bound, total=None):
        s = cls.zero(bound, total)
        s.c[(0,) * len(bound)] = value
        return s

    @classmethod
    def variable(cls, value, axis: int, bound, total=None):
        s = cls.constant(value, bound, total)
        if bound[axis] >= 1 and (total is None or total >= 1):
            s.c[mi.unit(len(bound), axis)] = numeric.num(1)
        return s

    @classmethod
    def shifted_power(cls, offset, axis: int, exponent: int, bound, total=None):
        """Series of ``(x_axis - a)^exponent`` where ``offset = x0_axis - a``."""
        s = cls.zero(bound, total)
        top = min(exponent, bound[axis])
        if total is not None:
            top = min(top, total)
        idx = [0] * len(bound)
        for j in range(top + 1):
            idx[axis] = j
            s.c[tuple(idx)] = math.comb(exponent, j) * offset ** (exponent - j)
        return s

    # shape helpers ----------------------------------------------------
    @property
    def bound(self) -> tuple[int, ...]:
        return tuple(n - 1 for n in self.c.shape)

    @property
    def ndim(self) -> int:
        return self.c.ndim

    def max_degree(self) -> int:
        top = sum(self.bound)
        return top if self.total is None else min(top, self.total)

    def _like(self, c):
        if self.total is not None:
            c[_mask(c.shape, self.total)] = 0
        return Series(c, self.total)

    @property
    def value(self):
        return self.c[(0,) * self.ndim]

    def derivative(self, gamma) -> object:
        return self.c[tuple(gamma)] * mi.factorial(gamma)

    def derivatives(self, indices) -> dict:
        return {tuple(g): self.derivative(g) for g in indices}

    # arithmetic -------------------------------------------------------
    def __add__(self, other):
        if isinstance(other, Series):
            return Series(self.c + other.c, self.total)
        out = self.c.copy()
        out[(0,) * self.ndim] = out[(0,) * self.ndim] + other
        return Series(out, self.total)

    __radd__ = __add__

    def __neg__(self):
        return Series(-self.c, self.total)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Series):
            return Series(self.c * other, self.total)
        a, b = self.c, other.c
        if a.ndim == 1:
            n = a.shape[0]
            if a.dtype != object:
                return Series(np.convolve(a, b)[:n], self.total)._trim()
            out = np.zeros_like(a)
            for i in range(n):
                ai = a[i]
                if ai == 0:
                    continue
                out[i:] = out[i:] + ai * b[: n - i]
            return self._like(out)
        out = np.zeros_like(a)
        shape = a.shape
        for idx in zip(*np.nonzero(a)):
            if self.total is not None and sum(idx) > self.total:
                continue
            dst = tuple(slice(i, None) for i in idx)
            src = tuple(slice(0, n - i) for i, n in zip(idx, shape))
            out[dst] = out[dst] + a[idx] * b[src]
        return self._like(out)

    __rmul__ = __mul__

    def _trim(self):
        if self.total is not None:
            self.c[_mask(self.c.shape, self.total)] = 0
        return self

    def __truediv__(self, other):
        if isinstance(other, Series):
            return self * other.reciprocal()
        return Series(self.c / other, self.total)

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def compose(self, coeffs) -> "Series":
        """Evaluate ``sum_j coeffs[j] * h^j`` where ``h = self - self.value``.

        ``coeffs[j]`` must be ``g^(j)(value) / j!`` for the outer function g.
        """
        h = Series(self.c.copy(), self.total)
        h.c[(0,) * self.ndim] = 0
        top = min(len(coeffs) - 1, self.max_degree())
        out = Series.constant(coeffs[top], self.bound, self.total)
        for j in range(top - 1, -1, -1):
            out = out * h + coeffs[j]
        return out

    def reciprocal(self):
        v = self.value
        if v == 0:
            raise ZeroDivisionError("reciprocal of a series with zero constant term")
        top = self.max_degree()
        inv = 1 / v
        coeffs = [inv]
        for _ in range(top):
            coeffs.append(-coeffs[-1] * inv)
        return self.compose(coeffs)

    def __pow__(self, n: int):
        if not isinstance(n, int):
            raise TypeError("only integer powers are supported")
        if n < 0:
            return self.reciprocal() ** (-n)
        result = Series.constant(numeric.num(1), self.bound, self.total)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result


def exp(s: Series) -> Series:
    v = numeric.exp(s.value)
    coeffs = [v]
    for j in range(1, s.max_degree() + 1):
        coeffs.append(coeffs[-1] / j)
    return s.compose(coeffs)


def log(s: Series) -> Series:
    v = s.value
    if v <= 0:
        raise ValueError("ln of a nonpositive value")
    coeffs = [numeric.log(v)]
    inv = 1 / v
    p = numeric.num(1)
    for j in range(1, s.max_degree() + 1):
        p = p * inv
        coeffs.append((-1) ** (j - 1) * p / j)
    return s.compose(coeffs)


def sin(s: Series) -> Series:
    return _trig(s, shift=0)


def cos(s: Series) -> Series:
    return _trig(s, shift=1)


def _trig(s: Series, shift: int) -> Series:
    sv, cv = numeric.sin(s.value), numeric.cos(s.value)
    # d^j sin = sin, cos, -sin, -cos, ...
    cycle = [sv, cv, -sv, -cv]
    coeffs = []
    fact = 1
    for j in range(s.max_degree() + 1):
        if j:
            fact *= j
        coeffs.append(cycle[(j + shift) % 4] / fact)
    return s.compose(coeffs)


def sqrt(s: Series) -> Series:
    v = s.value
    top = s.max_degree()
    if v < 0 or (v == 0 and top > 0):
        raise ValueError("sqrt outside its smooth domain")
    root = numeric.sqrt(v)
    coeffs = [root]
    # generalized binomial: C(1/2, j) v^(1/2 - j)
    c = root
    for j in range(1, top + 1):
        c = c * (numeric.num(0.5) - (j - 1)) / j / v
        coeffs.append(c)
    return s.compose(coeffs)
