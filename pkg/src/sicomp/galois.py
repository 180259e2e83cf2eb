"""GF(2) linear algebra and GF(2^w) arithmetic.

Binary vectors are numpy ``uint8`` arrays holding 0/1 entries. Many of the
codecs also use an integer bit-mask form where bit ``j`` of the integer is
coordinate ``j`` of the vector; :func:`bits_to_int` and :func:`int_to_bits`
convert between the two.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

# Primitive polynomials, one per extension degree. Bit i is the coefficient of x^i.
PRIMITIVE_POLYS: dict[int, int] = {
    1: 0b11,  # x + 1
    2: 0b111,  # x^2 + x + 1
    3: 0b1011,  # x^3 + x + 1
    4: 0b10011,  # x^4 + x + 1
    5: 0b100101,  # x^5 + x^2 + 1
    6: 0b1000011,  # x^6 + x + 1
    7: 0b10001001,  # x^7 + x^3 + 1
    8: 0x11D,  # x^8 + x^4 + x^3 + x^2 + 1
    9: 0x211,  # x^9 + x^4 + 1
    10: 0x409,  # x^10 + x^3 + 1
    11: 0x805,  # x^11 + x^2 + 1
    12: 0x1053,  # x^12 + x^6 + x^4 + x + 1
    13: 0x201B,  # x^13 + x^4 + x^3 + x + 1
    14: 0x4443,  # x^14 + x^10 + x^6 + x + 1
    15: 0x8003,  # x^15 + x + 1
    16: 0x1100B,  # x^16 + x^12 + x^3 + x + 1
}

MAX_FIELD_DEGREE = 16


def as_bits(x, length: int | None = None) -> np.ndarray:
    """Coerce a sequence, array or '0'/'1' string into a uint8 bit vector."""
    if isinstance(x, str):
        if set(x) - {"0", "1"}:
            raise ValueError(f"bit string may only contain '0' and '1': {x!r}")
        arr = np.frombuffer(x.encode(), dtype=np.uint8) - ord("0")
    else:
        arr = np.asarray(x)
        if arr.ndim != 1:
            raise ValueError(f"bit vector must be 1-D, got shape {arr.shape}")
        if arr.size and (arr.min() < 0 or arr.max() > 1):
            raise ValueError("bit vector entries must be 0 or 1")
        arr = arr.astype(np.uint8)
    if length is not None and arr.size != length:
        raise ValueError(f"expected a length-{length} bit vector, got length {arr.size}")
    return arr


def bits_to_int(v) -> int:
    """Integer mask with bit j equal to v[j]."""
    out = 0
    for j in np.flatnonzero(as_bits(v)):
        out |= 1 << int(j)
    return out


def int_to_bits(x: int, length: int) -> np.ndarray:
    return np.array([(x >> j) & 1 for j in range(length)], dtype=np.uint8)


def weight(v) -> int:
    return int(np.count_nonzero(v))


def hamming_distance(a, b) -> int:
    a, b = np.asarray(a), np.asarray(b)
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.shape} vs {b.shape}")
    return int(np.count_nonzero(a != b))


@dataclass(frozen=True, eq=False)
class BitMatrix:
    """Dense binary matrix stored row-major as a (rows, cols) uint8 array."""

    bits: np.ndarray
    _row_masks: tuple[int, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        arr = np.asarray(self.bits)
        if arr.ndim != 2:
            raise ValueError(f"BitMatrix needs a 2-D array, got shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"BitMatrix must have at least one row and column, got {arr.shape}")
        if arr.size and (arr.min() < 0 or arr.max() > 1):
            raise ValueError("BitMatrix entries must be 0 or 1")
        arr = arr.astype(np.uint8)
        arr.setflags(write=False)
        object.__setattr__(self, "bits", arr)
        object.__setattr__(self, "_row_masks", tuple(bits_to_int(r) for r in arr))

    @classmethod
    def identity(cls, n: int) -> BitMatrix:
        return cls(np.eye(n, dtype=np.uint8))

    @classmethod
    def zeros(cls, rows: int, cols: int) -> BitMatrix:
        return cls(np.zeros((rows, cols), dtype=np.uint8))

    @classmethod
    def from_rows(cls, rows, cols: int) -> BitMatrix:
        """Build from integer row masks."""
        return cls(np.array([int_to_bits(r, cols) for r in rows], dtype=np.uint8).reshape(-1, cols))

    @property
    def rows(self) -> int:
        return self.bits.shape[0]

    @property
    def cols(self) -> int:
        return self.bits.shape[1]

    @property
    def row_masks(self) -> tuple[int, ...]:
        return self._row_masks

    def column_masks(self) -> list[int]:
        """Column j as an integer whose bit l is entry (l, j)."""
        weights = 1 << np.arange(self.rows, dtype=np.int64)
        return [int(c) for c in (self.bits.T.astype(np.int64) @ weights)]

    def vstack(self, other: BitMatrix) -> BitMatrix:
        if other.cols != self.cols:
            raise ValueError("column count mismatch")
        return BitMatrix(np.vstack([self.bits, other.bits]))

    def __eq__(self, other):
        return isinstance(other, BitMatrix) and np.array_equal(self.bits, other.bits)

    def __hash__(self):
        return hash((self.bits.shape, self.bits.tobytes()))


def matvec(M: BitMatrix, x) -> np.ndarray:
    """M x over GF(2)."""
    x = as_bits(x)
    if x.size != M.cols:
        raise ValueError(f"dimension mismatch: matrix has {M.cols} columns, vector length {x.size}")
    return ((M.bits.astype(np.int64) @ x.astype(np.int64)) & 1).astype(np.uint8)


def matmul_rows(M: BitMatrix, X: np.ndarray) -> np.ndarray:
    """Apply M to each row of X (shape (b, cols)); returns shape (b, rows)."""
    X = np.asarray(X)
    if X.shape[-1] != M.cols:
        raise ValueError(f"dimension mismatch: matrix has {M.cols} columns, rows have {X.shape[-1]}")
    return ((X.astype(np.int64) @ M.bits.T.astype(np.int64)) & 1).astype(np.uint8)


def _echelon(masks: list[int]) -> dict[int, int]:
    """Reduce integer rows; returns {pivot bit: row} for a basis of the span."""
    basis: dict[int, int] = {}
    for row in masks:
        for piv, b in basis.items():
            if row >> piv & 1:
                row ^= b
        if row:
            piv = row.bit_length() - 1
            for p2 in list(basis):
                if basis[p2] >> piv & 1:
                    basis[p2] ^= row
            basis[piv] = row
    return basis


def rank(M: BitMatrix | np.ndarray) -> int:
    if not isinstance(M, BitMatrix):
        M = BitMatrix(M)
    return len(_echelon(list(M.row_masks)))


def in_span(masks: list[int], v: int) -> bool:
    basis = _echelon(masks)
    for piv, b in basis.items():
        if v >> piv & 1:
            v ^= b
    return v == 0


def inverse(M: BitMatrix) -> BitMatrix:
    """Inverse of a square full-rank binary matrix."""
    n = M.rows
    if M.cols != n:
        raise ValueError("only square matrices are invertible")
    aug = np.hstack([M.bits, np.eye(n, dtype=np.uint8)]).astype(np.uint8)
    for col in range(n):
        pivots = np.flatnonzero(aug[col:, col])
        if pivots.size == 0:
            raise ValueError("matrix is singular over GF(2)")
        p = col + pivots[0]
        if p != col:
            aug[[col, p]] = aug[[p, col]]
        hits = np.flatnonzero(aug[:, col])
        hits = hits[hits != col]
        aug[hits] ^= aug[col]
    return BitMatrix(aug[:, n:])


def nullspace(M: BitMatrix) -> list[int]:
    """Basis of {x : M x = 0} as integer masks."""
    n = M.cols
    a = M.bits.copy()
    pivots = []
    r = 0
    for col in range(n):
        hits = np.flatnonzero(a[r:, col]) if r < a.shape[0] else np.array([], dtype=int)
        if hits.size == 0:
            continue
        p = r + hits[0]
        a[[r, p]] = a[[p, r]]
        others = np.flatnonzero(a[:, col])
        others = others[others != r]
        a[others] ^= a[r]
        pivots.append(col)
        r += 1
        if r == a.shape[0]:
            break
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for f in free:
        v = 1 << f
        for row, pc in enumerate(pivots):
            if a[row, f]:
                v |= 1 << pc
        basis.append(v)
    return basis


# --- GF(2^w) ---------------------------------------------------------------


def _generator_order(w: int, poly: int) -> int:
    x, order = 1, 0
    top = 1 << w
    while True:
        x <<= 1
        if x & top:
            x ^= poly
        order += 1
        if x == 1 or order > top:
            return order


@dataclass(frozen=True)
class FieldSpec:
    """GF(2^w) in polynomial basis; elements are integers in [0, 2^w)."""

    w: int
    primitive_poly: int

    def __post_init__(self):
        if not 1 <= self.w <= MAX_FIELD_DEGREE:
            raise ValueError(f"field degree must be in 1..{MAX_FIELD_DEGREE}, got {self.w}")
        if self.primitive_poly.bit_length() - 1 != self.w:
            raise ValueError(f"polynomial {self.primitive_poly:#x} does not have degree {self.w}")
        if _generator_order(self.w, self.primitive_poly) != (1 << self.w) - 1:
            raise ValueError(f"polynomial {self.primitive_poly:#x} is not primitive")

    @property
    def size(self) -> int:
        return 1 << self.w


class GaloisField:
    """Log/antilog tables for one FieldSpec."""

    def __init__(self, spec: FieldSpec):
        self.spec = spec
        self.w = spec.w
        self.q = 1 << spec.w
        self.order = self.q - 1
        exp = np.zeros(2 * self.order + 1, dtype=np.int64)
        log = np.full(self.q, -1, dtype=np.int64)
        x = 1
        for i in range(self.order):
            exp[i] = x
            log[x] = i
            x <<= 1
            if x & self.q:
                x ^= spec.primitive_poly
        exp[self.order : 2 * self.order] = exp[: self.order]
        exp[2 * self.order] = exp[0]
        self.exp_np, self.log_np = exp, log
        self.exp = exp.tolist()
        self.log = log.tolist()

    def _check(self, a: int) -> None:
        if not 0 <= a < self.q:
            raise ValueError(f"{a} is not an element of GF(2^{self.w})")

    def mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        return self.exp[self.log[a] + self.log[b]]

    def div(self, a: int, b: int) -> int:
        if b == 0:
            raise ZeroDivisionError("division by zero in GF(2^w)")
        if a == 0:
            return 0
        return self.exp[(self.log[a] - self.log[b]) % self.order]

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("zero has no multiplicative inverse")
        return self.exp[(self.order - self.log[a]) % self.order]

    def pow(self, a: int, e: int) -> int:
        if e == 0:
            return 1
        if a == 0:
            if e < 0:
                raise ZeroDivisionError("zero has no negative powers")
            return 0
        return self.exp[(self.log[a] * e) % self.order]

    def alpha_pow(self, e: int) -> int:
        return self.exp[e % self.order]

    # vectorised helpers used by the Reed-Solomon code
    def mul_vec(self, a: np.ndarray, b) -> np.ndarray:
        a = np.asarray(a, dtype=np.int64)
        b = np.broadcast_to(np.asarray(b, dtype=np.int64), a.shape)
        out = self.exp_np[(self.log_np[a] + self.log_np[b]) % self.order]
        return np.where((a == 0) | (b == 0), 0, out)

    # polynomials: coefficient lists, lowest degree first
    def poly_eval(self, poly: list[int], x: int) -> int:
        acc = 0
        for c in reversed(poly):
            acc = self.mul(acc, x) ^ c
        return acc

    def poly_mul(self, a: list[int], b: list[int]) -> list[int]:
        out = [0] * (len(a) + len(b) - 1)
        for i, ai in enumerate(a):
            if ai:
                for j, bj in enumerate(b):
                    if bj:
                        out[i + j] ^= self.mul(ai, bj)
        return out


@lru_cache(maxsize=None)
def default_field(w: int) -> FieldSpec:
    return FieldSpec(w, PRIMITIVE_POLYS[w])


@lru_cache(maxsize=None)
def galois_field(spec: FieldSpec) -> GaloisField:
    return GaloisField(spec)


def field_mul(f: FieldSpec, a: int, b: int) -> int:
    gf = galois_field(f)
    gf._check(a)
    gf._check(b)
    return gf.mul(a, b)


def field_inv(f: FieldSpec, a: int) -> int:
    gf = galois_field(f)
    gf._check(a)
    return gf.inv(a)


def field_pow(f: FieldSpec, a: int, e: int) -> int:
    gf = galois_field(f)
    gf._check(a)
    return gf.pow(a, e)


def validate_primitive_table() -> None:
    """Generator-order check for every shipped polynomial."""
    for w in PRIMITIVE_POLYS:
        default_field(w)
