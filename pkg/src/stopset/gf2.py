"""Dense binary matrices over GF(2).

Entries are stored as a read-only ``uint8`` array; elimination runs on rows
packed into 64-bit words so that systems with thousands of columns stay cheap.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Iterator

import numpy as np
from numba import njit


class SingularMatrixError(ValueError):
    """Raised by :func:`invert` when the matrix has no inverse over GF(2)."""


class BitMatrix:
    """Immutable binary matrix with mod-2 arithmetic."""

    __slots__ = ("_a",)

    def __init__(self, entries):
        a = np.array(entries, dtype=np.int64, copy=True)
        if a.ndim == 1:
            a = a.reshape(1, -1)
        if a.ndim != 2:
            raise ValueError(f"expected a 2-D array, got shape {a.shape}")
        a = (a & 1).astype(np.uint8)
        a.setflags(write=False)
        self._a = a

    @classmethod
    def _wrap(cls, a: np.ndarray) -> "BitMatrix":
        # trusted path: a is already uint8 0/1 and owned by us
        m = cls.__new__(cls)
        a.setflags(write=False)
        m._a = a
        return m

    @classmethod
    def identity(cls, n: int) -> "BitMatrix":
        return cls._wrap(np.eye(n, dtype=np.uint8))

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "BitMatrix":
        return cls._wrap(np.zeros((rows, cols), dtype=np.uint8))

    @classmethod
    def random(cls, rows: int, cols: int, rng: np.random.Generator) -> "BitMatrix":
        return cls._wrap(rng.integers(0, 2, size=(rows, cols), dtype=np.uint8))

    @property
    def array(self) -> np.ndarray:
        return self._a

    @property
    def rows(self) -> int:
        return self._a.shape[0]

    @property
    def cols(self) -> int:
        return self._a.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self._a.shape

    @property
    def T(self) -> "BitMatrix":
        return BitMatrix._wrap(np.ascontiguousarray(self._a.T))

    def columns(self, idx) -> "BitMatrix":
        return BitMatrix._wrap(np.ascontiguousarray(self._a[:, np.asarray(idx, dtype=np.int64)]))

    def row_subset(self, idx) -> "BitMatrix":
        return BitMatrix._wrap(np.ascontiguousarray(self._a[np.asarray(idx, dtype=np.int64), :]))

    def __getitem__(self, key):
        return self._a[key]

    def __eq__(self, other) -> bool:
        if not isinstance(other, BitMatrix):
            return NotImplemented
        return self.shape == other.shape and bool(np.array_equal(self._a, other._a))

    def __hash__(self):
        return hash((self.shape, self._a.tobytes()))

    def __matmul__(self, other: "BitMatrix") -> "BitMatrix":
        return multiply(self, other)

    def __add__(self, other: "BitMatrix") -> "BitMatrix":
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} vs {other.shape}")
        return BitMatrix._wrap(self._a ^ other._a)

    def __repr__(self):
        return f"BitMatrix({self.rows}x{self.cols})"

    def density(self) -> float:
        return float(self._a.mean()) if self._a.size else 0.0


def mod2_matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Mod-2 product of 0/1 arrays (vectors or matrices) as ``uint8``.

    Float matmul is exact here: partial sums never exceed the inner dimension.
    """
    prod = np.asarray(a, dtype=np.float64) @ np.asarray(b, dtype=np.float64)
    return (prod.astype(np.int64) & 1).astype(np.uint8)


def multiply(a: BitMatrix, b: BitMatrix) -> BitMatrix:
    if a.cols != b.rows:
        raise ValueError(f"dimension mismatch: {a.shape} x {b.shape}")
    return BitMatrix._wrap(mod2_matmul(a.array, b.array))


def transpose(a: BitMatrix) -> BitMatrix:
    return a.T


# --- packed elimination -----------------------------------------------------


def pack_rows(a: np.ndarray, extra_cols: int = 0) -> np.ndarray:
    """Pack a 0/1 matrix into rows of little-endian ``uint64`` words."""
    rows, cols = a.shape
    nwords = max(1, (cols + extra_cols + 63) // 64)
    packed = np.packbits(np.asarray(a, dtype=np.uint8), axis=1, bitorder="little")
    out = np.zeros((rows, nwords * 8), dtype=np.uint8)
    out[:, : packed.shape[1]] = packed
    return out.view(np.uint64).copy()


def unpack_rows(words: np.ndarray, cols: int) -> np.ndarray:
    raw = np.ascontiguousarray(words).view(np.uint8)
    return np.unpackbits(raw, axis=1, count=cols, bitorder="little")


@njit(cache=True, nogil=True)
def _gauss_jordan(m, ncols):
    """Reduce packed rows in place; returns the pivot column of each leading row."""
    nrows, nw = m.shape
    pivots = np.empty(min(nrows, ncols), dtype=np.int64)
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        w = c >> 6
        bit = np.uint64(1) << np.uint64(c & 63)
        p = -1
        for i in range(r, nrows):
            if m[i, w] & bit:
                p = i
                break
        if p < 0:
            continue
        if p != r:
            for j in range(w, nw):
                t = m[r, j]
                m[r, j] = m[p, j]
                m[p, j] = t
        for i in range(nrows):
            if i != r and (m[i, w] & bit):
                for j in range(w, nw):
                    m[i, j] ^= m[r, j]
        pivots[r] = c
        r += 1
    return pivots[:r]


def rref(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Reduced row echelon form of a 0/1 array and its pivot columns."""
    a = np.asarray(a, dtype=np.uint8)
    words = pack_rows(a)
    pivots = _gauss_jordan(words, a.shape[1])
    return unpack_rows(words, a.shape[1]), pivots


def rank(a: BitMatrix) -> int:
    if a.rows == 0 or a.cols == 0:
        return 0
    return len(_gauss_jordan(pack_rows(a.array), a.cols))


def independent_rows(a: BitMatrix) -> np.ndarray:
    """Indices of a maximal linearly independent subset of rows, in row order."""
    # pivots of the transposed matrix index independent columns of a.T
    if a.rows == 0:
        return np.zeros(0, dtype=np.int64)
    return _gauss_jordan(pack_rows(a.array.T), a.rows).copy()


@dataclass(frozen=True)
class Gf2Solution:
    """Solution set of ``coeff @ x = rhs``.

    ``particular`` solves the system with every free variable at 0. Column
    ``j`` of ``dependence`` lists how each pivot variable flips when free
    variable ``free_cols[j]`` is set to 1.
    """

    consistent: bool
    n_unknowns: int
    pivot_cols: np.ndarray
    free_cols: np.ndarray
    particular: np.ndarray
    dependence: np.ndarray

    @property
    def free_count(self) -> int:
        return len(self.free_cols)

    @property
    def rank(self) -> int:
        return len(self.pivot_cols)

    def assign(self, free_values) -> np.ndarray:
        """Full solution vector for one assignment of the free variables."""
        if not self.consistent:
            raise ValueError("system is inconsistent")
        f = np.asarray(free_values, dtype=np.uint8).reshape(-1) & 1
        if len(f) != self.free_count:
            raise ValueError(f"expected {self.free_count} free values, got {len(f)}")
        x = self.particular.copy()
        x[self.free_cols] = f
        if self.free_count:
            x[self.pivot_cols] ^= mod2_matmul(self.dependence, f)
        return x

    def enumerate(self) -> Iterator[np.ndarray]:
        for bits in product((0, 1), repeat=self.free_count):
            yield self.assign(bits)


def solve(coeff: BitMatrix, rhs) -> Gf2Solution:
    rhs = np.asarray(rhs, dtype=np.uint8).reshape(-1) & 1
    if coeff.rows != len(rhs):
        raise ValueError(f"coeff has {coeff.rows} rows but rhs has length {len(rhs)}")
    n = coeff.cols
    aug = np.zeros((coeff.rows, n + 1), dtype=np.uint8)
    aug[:, :n] = coeff.array
    aug[:, n] = rhs
    words = pack_rows(aug)
    pivots = _gauss_jordan(words, n).copy()
    r = len(pivots)
    red = unpack_rows(words, n + 1)
    consistent = not red[r:, n].any()
    free = np.setdiff1d(np.arange(n), pivots)
    x = np.zeros(n, dtype=np.uint8)
    x[pivots] = red[:r, n]
    dep = np.ascontiguousarray(red[:r][:, free])
    return Gf2Solution(consistent, n, pivots, free, x, dep)


def invert(a: BitMatrix) -> BitMatrix:
    if a.rows != a.cols:
        raise ValueError(f"cannot invert non-square matrix {a.shape}")
    n = a.rows
    aug = np.concatenate([a.array, np.eye(n, dtype=np.uint8)], axis=1)
    words = pack_rows(aug)
    pivots = _gauss_jordan(words, n)
    if len(pivots) < n:
        raise SingularMatrixError(f"matrix is singular (rank {len(pivots)} < {n})")
    return BitMatrix._wrap(np.ascontiguousarray(unpack_rows(words, 2 * n)[:, n:]))
