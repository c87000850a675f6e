"""Scalar arithmetic backend: IEEE double or 106-bit software floats.

Every numerical routine in the package works on plain Python scalars or
numpy arrays of them.  In ``extended`` mode the scalars are ``mpf`` values
from a private mpmath context whose mantissa matches a double-double
(2 x 53 bits), so the global mpmath state is never touched.
"""

from __future__ import annotations

import contextlib
import copyreg
import contextvars
import math

import mpmath
import numpy as np
from mpmath.ctx_mp_python import _mpf  # base class shared by every mpmath context

DOUBLE = "double"
EXTENDED = "extended"
MODES = (DOUBLE, EXTENDED)

EXTENDED_BITS = 106

_mode = contextvars.ContextVar("regpoly_precision", default=DOUBLE)

_mp = mpmath.MPContext()
_mp.prec = EXTENDED_BITS


def _restore(raw):
    return _mp.make_mpf(raw)


def _reduce(x):
    return _restore, (x._mpf_,)


# values from a private context are not importable by name, so worker
# processes receive the exact mantissa/exponent tuple instead
copyreg.pickle(type(_mp.mpf(0)), _reduce)


class SingularBlockError(ArithmeticError):
    """A dense block could not be solved (zero pivot)."""


@contextlib.contextmanager
def precision(mode: str):
    if mode not in MODES:
        raise ValueError(f"precision mode must be one of {MODES}, got {mode!r}")
    token = _mode.set(mode)
    try:
        yield
    finally:
        _mode.reset(token)


def current_mode() -> str:
    return _mode.get()


def is_extended() -> bool:
    return _mode.get() == EXTENDED


def num(x):
    """Convert ``x`` to the scalar type of the active mode."""
    if _mode.get() == EXTENDED:
        if isinstance(x, str):
            return _mp.mpf(x)
        return _mp.mpf(x)
    return float(x)


def parse_scalar(x):
    """Read a scalar from JSON input (number or decimal string)."""
    if isinstance(x, str):
        return num(x) if is_extended() else float(x)
    return num(x)


def dtype():
    return object if _mode.get() == EXTENDED else float


def zeros(shape):
    if _mode.get() == EXTENDED:
        out = np.empty(shape, dtype=object)
        out.fill(_mp.mpf(0))
        return out
    return np.zeros(shape)


def asarray(values):
    if _mode.get() == EXTENDED:
        return np.array([num(v) for v in np.ravel(values)], dtype=object).reshape(np.shape(values))
    return np.asarray(values, dtype=float)


def exp(x):
    return _mp.exp(x) if _mode.get() == EXTENDED else math.exp(x)


def log(x):
    return _mp.log(x) if _mode.get() == EXTENDED else math.log(x)


def sin(x):
    return _mp.sin(x) if _mode.get() == EXTENDED else math.sin(x)


def cos(x):
    return _mp.cos(x) if _mode.get() == EXTENDED else math.cos(x)


def sqrt(x):
    return _mp.sqrt(x) if _mode.get() == EXTENDED else math.sqrt(x)


def pi():
    return +_mp.pi if _mode.get() == EXTENDED else math.pi


def to_float(x) -> float:
    return float(x)


def to_text(x) -> str:
    """Round-trippable decimal text for a scalar."""
    if isinstance(x, _mpf):
        return _mp.nstr(x, 34, min_fixed=-4, max_fixed=18, strip_zeros=False)
    return repr(float(x))


def solve(matrix, rhs):
    """Solve a small dense system with partial pivoting.

    Raises :class:`SingularBlockError` when a pivot vanishes exactly.
    """
    n = len(rhs)
    a = [[matrix[i][j] for j in range(n)] for i in range(n)]
    b = [rhs[i] for i in range(n)]
    for col in range(n):
        piv = max(range(col, n), key=lambda r: abs(a[r][col]))
        if a[piv][col] == 0:
            raise SingularBlockError(f"zero pivot in column {col}")
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            b[col], b[piv] = b[piv], b[col]
        for r in range(col + 1, n):
            if a[r][col] == 0:
                continue
            m = a[r][col] / a[col][col]
            for c in range(col, n):
                a[r][c] -= m * a[col][c]
            b[r] -= m * b[col]
    x = [None] * n
    for r in range(n - 1, -1, -1):
        s = b[r]
        for c in range(r + 1, n):
            s -= a[r][c] * x[c]
        x[r] = s / a[r][r]
    return x


def condition_number(matrix) -> float:
    """2-norm condition number, computed in double."""
    m = np.array([[float(v) for v in row] for row in matrix])
    with np.errstate(all="ignore"):
        return float(np.linalg.cond(m))
