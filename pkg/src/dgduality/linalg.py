"""Exact linear algebra over a prime field or the rationals.

Matrices are dense numpy arrays internally (int64 for small primes, object
arrays otherwise).  ``SparseMatrix`` is the exchange format used at module
boundaries and in serialized artifacts.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from fractions import Fraction

import flint
import numpy as np

DEFAULT_PRIME = 32003
_FLOAT_EXACT = 2 ** 53


def _is_prime(n):
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


class Field:
    """Ground field: ``Field(p)`` for F_p, ``Field.rationals()`` for Q."""

    def __init__(self, p=DEFAULT_PRIME, allow_char_2=False):
        if p is None:
            self.p = None
            self.dtype = object
            return
        p = int(p)
        if not _is_prime(p):
            raise ValueError(f"{p} is not prime")
        if p == 2 and not allow_char_2:
            raise ValueError("characteristic 2 hides sign errors; pass allow_char_2=True")
        self.p = p
        # keep products of two entries plus accumulation inside int64
        self.dtype = np.int64 if p < (1 << 25) else object

    @classmethod
    def rationals(cls):
        return cls(None)

    @property
    def is_rational(self):
        return self.p is None

    def __repr__(self):
        return "Field(QQ)" if self.p is None else f"Field(p={self.p})"

    def __eq__(self, other):
        return isinstance(other, Field) and self.p == other.p

    def __hash__(self):
        return hash(("Field", self.p))

    # scalars
    def elem(self, x):
        if self.p is None:
            return Fraction(x)
        if isinstance(x, Fraction):
            return (x.numerator * pow(x.denominator, -1, self.p)) % self.p
        return int(x) % self.p

    def inv(self, x):
        if self.p is None:
            return 1 / Fraction(x)
        return pow(int(x), self.p - 2, self.p)

    def neg_one_pow(self, k):
        return self.elem(-1 if k % 2 else 1)

    # arrays
    def reduce(self, a):
        if self.p is None:
            return a
        return a % self.p

    def zeros(self, *shape):
        if self.dtype is object:
            out = np.empty(shape, dtype=object)
            out.fill(Fraction(0) if self.p is None else 0)
            return out
        return np.zeros(shape, dtype=self.dtype)

    def eye(self, n):
        out = self.zeros(n, n)
        for k in range(n):
            out[k, k] = self.elem(1)
        return out

    def array(self, data, rows=None, cols=None):
        if isinstance(data, SparseMatrix):
            return data.to_dense(self)
        arr = np.array(data, dtype=object)
        if rows is not None and cols is not None and arr.size == 0:
            return self.zeros(rows, cols)
        flat = [self.elem(x) for x in arr.ravel()]
        out = np.array(flat, dtype=self.dtype).reshape(arr.shape)
        if self.dtype is object and out.ndim == 0:
            return out
        return out

    def matmul(self, a, b):
        if a.shape[1] == 0 or a.shape[0] == 0 or b.shape[1] == 0:
            return self.zeros(a.shape[0], b.shape[1])
        if self.dtype is np.int64 and (self.p - 1) ** 2 * a.shape[1] < _FLOAT_EXACT:
            # BLAS in float64 is exact while every partial sum stays below 2^53
            prod = np.asarray(a, dtype=np.float64) @ np.asarray(b, dtype=np.float64)
            return np.mod(prod, self.p).astype(np.int64)
        return self.reduce(a @ b)

    def scale(self, a, c):
        return self.reduce(a * c)

    def add(self, a, b):
        return self.reduce(a + b)

    def sub(self, a, b):
        return self.reduce(a - b)

    def is_zero(self, a):
        if a.size == 0:
            return True
        return not np.any(a != 0)


@dataclass(frozen=True)
class SparseMatrix:
    rows: int
    cols: int
    entries: tuple = ()  # sorted ((r, c, value), ...), no stored zeros

    def __post_init__(self):
        seen = set()
        for r, c, v in self.entries:
            if not (0 <= r < self.rows and 0 <= c < self.cols):
                raise ValueError(f"entry ({r}, {c}) out of range")
            if (r, c) in seen:
                raise ValueError(f"duplicate entry ({r}, {c})")
            if v == 0:
                raise ValueError("stored zero")
            seen.add((r, c))

    @classmethod
    def from_dense(cls, a):
        a = np.asarray(a)
        rows, cols = a.shape
        entries = tuple((int(r), int(c), a[r, c]) for r, c in zip(*np.nonzero(a != 0)))
        return cls(rows, cols, entries)

    @classmethod
    def from_rows(cls, rows, field):
        return cls.from_dense(field.array(rows))

    def to_dense(self, field):
        out = field.zeros(self.rows, self.cols)
        for r, c, v in self.entries:
            out[r, c] = field.elem(v)
        return out

    @property
    def shape(self):
        return (self.rows, self.cols)

    def transpose(self):
        return SparseMatrix(self.cols, self.rows,
                            tuple(sorted((c, r, v) for r, c, v in self.entries)))


@dataclass(frozen=True)
class Subspace:
    """Subspace of F^n stored by its reduced echelon basis (unique)."""

    ambient_dim: int
    basis: np.ndarray = dc_field(compare=False)

    @property
    def dim(self):
        return self.basis.shape[0]

    def __eq__(self, other):
        return (self.ambient_dim == other.ambient_dim and self.basis.shape == other.basis.shape
                and bool(np.all(self.basis == other.basis)))

    __hash__ = None


def _dense(field, m):
    if isinstance(m, SparseMatrix):
        return m.to_dense(field)
    return m


# below this many entries the numpy loop beats the conversion cost
_FLINT_MIN = 2500
_FLINT_MIN_SIDE = 40
# very sparse matrices eliminate with little fill-in in the loop
_FLINT_MIN_DENSITY = 0.03


def _flint_rref(field, a):
    rows, cols = a.shape
    R, rk = flint.nmod_mat(rows, cols, a.ravel().tolist(), field.p).rref()
    out = np.array([int(x) for x in R.entries()[:rk * cols]], dtype=np.int64).reshape(rk, cols)
    pivots = [int(np.flatnonzero(row)[0]) for row in out]
    return out, pivots


def rref(field, m):
    """Reduced row echelon form; returns (nonzero rows, pivot columns).

    The form is unique, so the numpy loop and the FLINT path agree exactly.
    """
    a = _dense(field, m)
    if field.dtype is not np.int64 or a.size < _FLINT_MIN:
        return _loop_rref(field, a)
    # zero rows and columns do not affect the echelon form
    live_c = np.flatnonzero(a.any(axis=0))
    live_r = np.flatnonzero(a.any(axis=1))
    sub = a[np.ix_(live_r, live_c)]
    if (sub.size >= _FLINT_MIN and min(sub.shape) >= _FLINT_MIN_SIDE
            and np.count_nonzero(sub) >= _FLINT_MIN_DENSITY * sub.size):
        red, piv = _flint_rref(field, sub)
    else:
        red, piv = _loop_rref(field, sub)
    out = field.zeros(red.shape[0], a.shape[1])
    out[:, live_c] = red
    return out, [int(live_c[c]) for c in piv]


def _loop_rref(field, a):
    a = a.copy()
    rows, cols = a.shape
    pivots = []
    r = 0
    c = 0
    while r < rows and c < cols:
        nz = np.flatnonzero(a[r:, c])
        if nz.size == 0:
            c += 1
            continue
        k = r + int(nz[0])
        if k != r:
            a[[r, k]] = a[[k, r]]
        if a[r, c] != 1:
            a[r] = field.scale(a[r], field.inv(a[r, c]))
        others = np.flatnonzero(a[:, c] != 0)
        others = others[others != r]
        if others.size:
            a[others] = field.reduce(a[others] - np.outer(a[others, c], a[r]))
        pivots.append(c)
        r += 1
        c += 1
    return a[:r], pivots


def rank(field, m):
    m = _dense(field, m)
    if m.size == 0:
        return 0
    if field.dtype is np.int64 and m.size >= _FLINT_MIN:
        sub = m[np.ix_(np.flatnonzero(m.any(axis=1)), np.flatnonzero(m.any(axis=0)))]
        if (min(sub.shape) >= _FLINT_MIN_SIDE
                and np.count_nonzero(sub) >= _FLINT_MIN_DENSITY * sub.size):
            return flint.nmod_mat(*sub.shape, sub.ravel().tolist(), field.p).rank()
        m = sub
    return len(_loop_rref(field, m)[1]) if m.size else 0


def kernel(field, m, canonical=True):
    """Null space {v : m v = 0} as a Subspace of F^cols.

    With ``canonical=False`` the basis is the standard one attached to the free
    columns, which skips a second elimination.
    """
    m = _dense(field, m)
    rows, cols = m.shape
    if rows == 0 or cols == 0:
        return Subspace(cols, field.eye(cols))
    r, pivots = rref(field, m)
    pset = set(pivots)
    free = [c for c in range(cols) if c not in pset]
    basis = field.zeros(len(free), cols)
    if free:
        basis[np.arange(len(free)), free] = field.elem(1)
        if pivots:
            basis[:, pivots] = field.reduce(-r[:, free]).T
    if canonical and basis.shape[0]:
        basis, _ = rref(field, basis)
    return Subspace(cols, basis)


def image(field, m):
    """Column space of m as a Subspace of F^rows."""
    m = _dense(field, m)
    rows, cols = m.shape
    if rows == 0 or cols == 0:
        return Subspace(rows, field.zeros(0, rows))
    basis, _ = rref(field, m.T)
    return Subspace(rows, basis)


def span(field, vectors, ambient_dim):
    if len(vectors) == 0:
        return Subspace(ambient_dim, field.zeros(0, ambient_dim))
    basis, _ = rref(field, np.asarray(vectors).reshape(-1, ambient_dim))
    return Subspace(ambient_dim, basis)


def solve(field, m, b, check=True):
    """Some x with m x = b, or None when the system is inconsistent."""
    m = _dense(field, m)
    rows, cols = m.shape
    b = np.asarray(b).reshape(rows)
    if cols == 0:
        return field.zeros(0) if field.is_zero(b) else None
    aug = field.zeros(rows, cols + 1)
    aug[:, :cols] = m
    aug[:, cols] = b
    r, pivots = rref(field, aug)
    if pivots and pivots[-1] == cols:
        return None
    x = field.zeros(cols)
    for row, pc in enumerate(pivots):
        x[pc] = r[row, cols]
    if check and not field.is_zero(field.sub(field.matmul(m, x.reshape(-1, 1)).ravel(), b)):
        raise ArithmeticError("solve: substitution check failed")
    return x


def cokernel_basis(field, m):
    """(dim coker m, projection P) with P m = 0 and P surjective."""
    m = _dense(field, m)
    rows = m.shape[0]
    if m.shape[1] == 0 or rows == 0:
        return rows, field.eye(rows)
    # P is a basis of the left null space of m
    left = kernel(field, m.T)
    return left.dim, left.basis


def complement_basis(field, sub, ambient):
    """Vectors of ``ambient`` (rows, assumed to contain ``sub``) completing a basis of sub.

    Returns reduced representatives, deterministic in the fixed basis order.
    """
    n = ambient.shape[1] if ambient.ndim == 2 else 0
    if ambient.shape[0] == 0:
        return field.zeros(0, n)
    k = sub.shape[0]
    stacked = np.concatenate([sub, ambient]) if k else ambient
    r, pivots = rref(field, stacked.T)
    # pivot columns of the transposed stack pick a maximal independent set,
    # preferring sub's vectors first
    chosen = [p - k for p in pivots if p >= k]
    return ambient[chosen] if chosen else field.zeros(0, n)


def reduce_mod(field, vectors, sub_rref, sub_pivots):
    """Reduce row vectors modulo a subspace given in reduced echelon form."""
    out = vectors.copy()
    for row, pc in enumerate(sub_pivots):
        coeff = out[:, pc].copy()
        if np.any(coeff != 0):
            out = field.reduce(out - np.outer(coeff, sub_rref[row]))
    return out


def induced_rank(field, f, z_src, b_tgt):
    """Rank of the map on subquotients induced by f.

    ``z_src`` rows span source cycles, ``b_tgt`` rows span target boundaries;
    returns dim(span(f Z) + B) - dim B.
    """
    if z_src.shape[0] == 0:
        return 0
    fz = field.matmul(f, z_src.T).T
    rb = rank(field, b_tgt) if b_tgt.shape[0] else 0
    both = np.concatenate([b_tgt, fz]) if b_tgt.shape[0] else fz
    return rank(field, both) - rb
