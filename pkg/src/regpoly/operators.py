"""Linear differential operators with expression coefficients."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from . import multiindex as mi
from . import numeric
from .expr import Expr, Num, evaluate, parse


@dataclass(frozen=True)
class DifferentialOperator:
    """``L u = sum coeff(x) * D^alpha u``.

    ``lam``/``Lam`` are ellipticity bounds kept as metadata only.
    """

    dimension: int
    terms: tuple
    lam: float | None = None
    Lam: float | None = None

    def __post_init__(self):
        terms = tuple((c, tuple(int(a) for a in alpha)) for c, alpha in self.terms)
        if not terms:
            raise ValueError("a differential operator needs at least one term")
        for _, alpha in terms:
            if len(alpha) != self.dimension or min(alpha) < 0:
                raise ValueError(f"bad derivative multiindex {alpha} for dimension {self.dimension}")
        object.__setattr__(self, "terms", terms)

    @classmethod
    def from_strings(cls, dimension: int, terms, variables: Sequence[str] | None = None, **meta):
        names = variables or tuple(f"x{i}" for i in range(1, dimension + 1))
        parsed = []
        for c, alpha in terms:
            if isinstance(alpha, int):
                alpha = (alpha,)
            parsed.append((c if isinstance(c, Expr) else parse(str(c), names), tuple(alpha)))
        return cls(dimension, tuple(parsed), **meta)

    @classmethod
    def derivative(cls, order: int):
        """Plain ``d^order/dx^order`` in one variable."""
        return cls(1, ((Num(1.0), (order,)),))

    @property
    def order(self) -> int:
        return max(sum(a) for _, a in self.terms)

    def orders(self) -> list[int]:
        """Univariate derivative orders carried by nonzero coefficients, ascending."""
        return sorted({a[0] for c, a in self.terms if not (isinstance(c, Num) and c.value == 0)})

    def coefficient(self, alpha, x):
        total = numeric.num(0)
        for c, a in self.terms:
            if a == tuple(alpha):
                total = total + evaluate(c, x)
        return total

    def apply(self, jet, x):
        """Apply to a function given by its jet at ``x``."""
        total = numeric.num(0)
        for c, a in self.terms:
            total = total + evaluate(c, x) * jet[a]
        return total

    def partial(self, max_order: int) -> "DifferentialOperator":
        """Terms of derivative order at most ``max_order``."""
        return DifferentialOperator(
            self.dimension, tuple(t for t in self.terms if sum(t[1]) <= max_order), self.lam, self.Lam
        )

    def sorted_terms(self, descending: bool = True) -> list:
        return sorted(self.terms, key=lambda t: mi.grlex_key(t[1]), reverse=descending)
