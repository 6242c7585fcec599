"""
Dense GF(2) linear algebra on word-packed bit matrices, plus GF(2)[x]
polynomial arithmetic for circulant constructions.

Rows are packed little-endian into ``uint64`` words: bit ``c`` of a row
lives in word ``c >> 6`` at position ``c & 63``.  Elimination runs in
numba kernels on private copies, so every ``BitMatrix`` stays immutable.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numba
import numpy as np

WORD = 64


def n_words(cols: int) -> int:
    return (cols + WORD - 1) // WORD


def pack_bits(dense: np.ndarray) -> np.ndarray:
    """Pack a 2-D 0/1 array into ``(rows, n_words(cols))`` uint64 words."""
    dense = np.asarray(dense, dtype=np.uint8)
    rows, cols = dense.shape
    w = n_words(cols)
    padded = np.zeros((rows, w * WORD), dtype=np.uint8)
    padded[:, :cols] = dense & 1
    packed = np.packbits(padded, axis=1, bitorder="little")
    return np.ascontiguousarray(packed).view("<u8").astype(np.uint64).reshape(rows, w)


def unpack_bits(words: np.ndarray, cols: int) -> np.ndarray:
    words = np.ascontiguousarray(words, dtype=np.uint64)
    rows = words.shape[0]
    if words.size == 0:
        return np.zeros((rows, cols), dtype=np.uint8)
    as_bytes = words.astype("<u8").view(np.uint8).reshape(rows, -1)
    return np.unpackbits(as_bytes, axis=1, bitorder="little")[:, :cols]


@numba.njit(cache=True)
def _rref_kernel(a, ncols, pivots):
    """Reduce ``a`` in place; fill ``pivots`` and return the rank."""
    nrows = a.shape[0]
    nw = a.shape[1]
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        wi = c >> 6
        bit = np.uint64(1) << np.uint64(c & 63)
        found = -1
        for i in range(r, nrows):
            if a[i, wi] & bit:
                found = i
                break
        if found < 0:
            continue
        if found != r:
            for w in range(nw):
                tmp = a[r, w]
                a[r, w] = a[found, w]
                a[found, w] = tmp
        for i in range(nrows):
            if i != r and (a[i, wi] & bit):
                for w in range(wi, nw):
                    a[i, w] ^= a[r, w]
        pivots[r] = c
        r += 1
    return r


class BitMatrix:
    """Immutable binary matrix over GF(2) with word-packed rows."""

    __slots__ = ("_words", "_rows", "_cols")

    def __init__(self, words: np.ndarray, cols: int):
        words = np.array(words, dtype=np.uint64, copy=True)
        if words.ndim != 2 or words.shape[1] != n_words(cols):
            # zero-column matrices must arrive 2-D to keep their row count
            words = words.reshape(-1, n_words(cols))
        if cols % WORD and words.size:
            tail = np.uint64((1 << (cols % WORD)) - 1)
            if np.any(words[:, -1] & ~tail):
                raise ValueError("bits set beyond the last column")
        words.flags.writeable = False
        self._words = words
        self._rows = words.shape[0]
        self._cols = int(cols)

    # construction -------------------------------------------------------

    @classmethod
    def from_dense(cls, dense) -> BitMatrix:
        arr = np.asarray(dense)
        if arr.ndim == 1:
            arr = arr.reshape(1, -1)
        if arr.ndim != 2:
            raise ValueError("expected a 2-D array")
        if arr.size and not np.all((arr == 0) | (arr == 1)):
            raise ValueError("entries must be 0 or 1")
        return cls(pack_bits(arr.astype(np.uint8)), arr.shape[1])

    @classmethod
    def zeros(cls, rows: int, cols: int) -> BitMatrix:
        return cls(np.zeros((rows, n_words(cols)), dtype=np.uint64), cols)

    @classmethod
    def identity(cls, n: int) -> BitMatrix:
        return cls.from_dense(np.eye(n, dtype=np.uint8))

    @classmethod
    def from_supports(cls, supports: Iterable[Iterable[int]], cols: int) -> BitMatrix:
        """Build from one list of set-column indices per row (duplicates cancel)."""
        supports = list(supports)
        dense = np.zeros((len(supports), cols), dtype=np.uint8)
        for i, support in enumerate(supports):
            for c in support:
                dense[i, c] ^= 1
        return cls.from_dense(dense)

    @staticmethod
    def hstack(blocks: Sequence[BitMatrix]) -> BitMatrix:
        return BitMatrix.from_dense(np.hstack([b.to_dense() for b in blocks]))

    @staticmethod
    def vstack(blocks: Sequence[BitMatrix]) -> BitMatrix:
        cols = {b.cols for b in blocks}
        if len(cols) != 1:
            raise ValueError("column counts differ")
        return BitMatrix(np.vstack([b._words for b in blocks]), cols.pop())

    # accessors ----------------------------------------------------------

    @property
    def rows(self) -> int:
        return self._rows

    @property
    def cols(self) -> int:
        return self._cols

    @property
    def shape(self) -> tuple[int, int]:
        return (self._rows, self._cols)

    @property
    def words(self) -> np.ndarray:
        """Read-only packed storage."""
        return self._words

    def to_dense(self) -> np.ndarray:
        return unpack_bits(self._words, self._cols)

    def __getitem__(self, idx: tuple[int, int]) -> int:
        r, c = idx
        if not (0 <= r < self._rows and 0 <= c < self._cols):
            raise IndexError(idx)
        return int((int(self._words[r, c >> 6]) >> (c & 63)) & 1)

    def row(self, r: int) -> np.ndarray:
        return unpack_bits(self._words[r : r + 1], self._cols)[0]

    def support(self, r: int) -> list[int]:
        return [int(c) for c in np.flatnonzero(self.row(r))]

    def row_weights(self) -> np.ndarray:
        return self.to_dense().sum(axis=1)

    def is_zero(self) -> bool:
        return not np.any(self._words)

    def take_rows(self, idx) -> BitMatrix:
        return BitMatrix(self._words[np.asarray(idx, dtype=np.intp)], self._cols)

    def take_columns(self, idx) -> BitMatrix:
        idx = np.asarray(idx, dtype=np.intp)
        return BitMatrix.from_dense(self.to_dense()[:, idx].reshape(self._rows, len(idx)))

    # algebra ------------------------------------------------------------

    @property
    def T(self) -> BitMatrix:
        return BitMatrix.from_dense(self.to_dense().T)

    def transpose(self) -> BitMatrix:
        return self.T

    def __matmul__(self, other: BitMatrix) -> BitMatrix:
        if self._cols != other.rows:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        prod = self.to_dense().astype(np.int64) @ other.to_dense().astype(np.int64)
        return BitMatrix.from_dense((prod & 1).astype(np.uint8).reshape(self._rows, other.cols))

    def __add__(self, other: BitMatrix) -> BitMatrix:
        if self.shape != other.shape:
            raise ValueError("shape mismatch")
        return BitMatrix(self._words ^ other._words, self._cols)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BitMatrix):
            return NotImplemented
        return self.shape == other.shape and np.array_equal(self._words, other._words)

    def __hash__(self) -> int:
        return hash((self._rows, self._cols, self._words.tobytes()))

    def __repr__(self) -> str:
        return f"BitMatrix({self._rows}x{self._cols})"

    def rank(self) -> int:
        return rank(self)


def rank(m: BitMatrix) -> int:
    """GF(2) row rank; ``m`` is left untouched."""
    work = np.array(m.words, copy=True)
    pivots = np.empty(max(m.rows, 1), dtype=np.int64)
    return int(_rref_kernel(work, m.cols, pivots))


def rref(m: BitMatrix) -> tuple[BitMatrix, list[int]]:
    """Reduced row-echelon form and the (increasing) pivot columns.

    Pivoting is deterministic: columns left to right, first nonzero row at
    or below the current pivot row.
    """
    work = np.array(m.words, copy=True)
    pivots = np.empty(max(m.rows, 1), dtype=np.int64)
    r = int(_rref_kernel(work, m.cols, pivots))
    return BitMatrix(work, m.cols), [int(p) for p in pivots[:r]]


def solve_in_row_span(m: BitMatrix, v) -> np.ndarray | None:
    """Return ``x`` with ``x^T m = v`` or ``None`` if ``v`` is not in the row span.

    Free variables are set to zero, so the witness is canonical.
    """
    v = np.asarray(v, dtype=np.uint8).reshape(-1)
    if v.shape[0] != m.cols:
        raise ValueError(f"vector length {v.shape[0]} != {m.cols} columns")
    if m.rows == 0:
        return np.zeros(0, dtype=np.uint8) if not v.any() else None
    aug = np.hstack([m.to_dense().T, v.reshape(-1, 1)])
    reduced, pivots = rref(BitMatrix.from_dense(aug))
    if pivots and pivots[-1] == m.rows:
        return None
    x = np.zeros(m.rows, dtype=np.uint8)
    dense = reduced.to_dense()
    for i, p in enumerate(pivots):
        x[p] = dense[i, m.rows]
    return x


def in_row_span(m: BitMatrix, v) -> bool:
    return solve_in_row_span(m, v) is not None


def nullspace(m: BitMatrix) -> BitMatrix:
    """Basis (as rows) of ``{x : m x = 0}``, one vector per free column."""
    reduced, pivots = rref(m)
    dense = reduced.to_dense()
    free = [c for c in range(m.cols) if c not in set(pivots)]
    basis = np.zeros((len(free), m.cols), dtype=np.uint8)
    for b, f in enumerate(free):
        basis[b, f] = 1
        for i, p in enumerate(pivots):
            basis[b, p] = dense[i, f]
    return BitMatrix.from_dense(basis.reshape(len(free), m.cols))


def inverse(m: BitMatrix) -> BitMatrix:
    if m.rows != m.cols:
        raise ValueError("matrix is not square")
    n = m.rows
    reduced, pivots = rref(BitMatrix.hstack([m, BitMatrix.identity(n)]))
    if pivots[:n] != list(range(n)) or len(pivots) < n:
        raise ValueError("matrix is singular over GF(2)")
    return reduced.take_columns(range(n, 2 * n))


# polynomials over GF(2) ----------------------------------------------------


@dataclass(frozen=True)
class Gf2Poly:
    """Polynomial over GF(2); bit ``i`` of ``bits`` is the coefficient of x^i."""

    bits: int = 0

    def __post_init__(self):
        if self.bits < 0:
            raise ValueError("coefficient bits must be nonnegative")

    @classmethod
    def from_exponents(cls, exponents: Iterable[int]) -> Gf2Poly:
        bits = 0
        for e in exponents:
            if e < 0:
                raise ValueError("negative exponent")
            bits ^= 1 << e
        return cls(bits)

    @classmethod
    def from_coeffs(cls, coeffs: Sequence[int]) -> Gf2Poly:
        return cls.from_exponents(i for i, c in enumerate(coeffs) if c & 1)

    @classmethod
    def cyclic_modulus(cls, ell: int) -> Gf2Poly:
        """x^ell - 1, written x^ell + 1 over GF(2)."""
        return cls((1 << ell) | 1)

    @property
    def degree(self) -> int | None:
        return self.bits.bit_length() - 1 if self.bits else None

    @property
    def exponents(self) -> list[int]:
        return [i for i in range(self.bits.bit_length()) if (self.bits >> i) & 1]

    @property
    def coeffs(self) -> list[int]:
        return [(self.bits >> i) & 1 for i in range(self.bits.bit_length())]

    @property
    def weight(self) -> int:
        return bin(self.bits).count("1")

    def __bool__(self) -> bool:
        return self.bits != 0

    def __add__(self, other: Gf2Poly) -> Gf2Poly:
        return Gf2Poly(self.bits ^ other.bits)

    __sub__ = __add__

    def __mul__(self, other: Gf2Poly) -> Gf2Poly:
        a, b, out = self.bits, other.bits, 0
        while b:
            if b & 1:
                out ^= a
            a <<= 1
            b >>= 1
        return Gf2Poly(out)

    def __divmod__(self, other: Gf2Poly) -> tuple[Gf2Poly, Gf2Poly]:
        if not other:
            raise ZeroDivisionError("division by the zero polynomial")
        q, r = 0, self.bits
        dd = other.bits.bit_length()
        while r and r.bit_length() >= dd:
            shift = r.bit_length() - dd
            q ^= 1 << shift
            r ^= other.bits << shift
        return Gf2Poly(q), Gf2Poly(r)

    def __floordiv__(self, other: Gf2Poly) -> Gf2Poly:
        return divmod(self, other)[0]

    def __mod__(self, other: Gf2Poly) -> Gf2Poly:
        return divmod(self, other)[1]

    def __str__(self) -> str:
        if not self.bits:
            return "0"
        terms = []
        for e in self.exponents:
            terms.append("1" if e == 0 else ("x" if e == 1 else f"x^{e}"))
        return " + ".join(terms)


def poly_gcd(a: Gf2Poly, b: Gf2Poly) -> Gf2Poly:
    """Greatest common divisor by Euclid's algorithm (always monic over GF(2))."""
    if not a and not b:
        raise ValueError("undefined gcd: both polynomials are zero")
    while b:
        a, b = b, a % b
    return a


def circulant(ell: int, p: Gf2Poly) -> BitMatrix:
    """``sum_j p_j P^j`` where ``P`` is the right cyclic shift, ``P[i, j] = [i-1 == j]``."""
    if ell <= 0:
        raise ValueError("circulant size must be positive")
    p = p % Gf2Poly.cyclic_modulus(ell)
    dense = np.zeros((ell, ell), dtype=np.uint8)
    rows = np.arange(ell)
    for j in p.exponents:
        dense[rows, (rows - j) % ell] ^= 1
    return BitMatrix.from_dense(dense)
