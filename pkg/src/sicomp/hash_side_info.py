"""Zero-error compression with a set of candidate references, by random linear hashing.

Desk-scale only: every operation enumerates Hamming balls exhaustively, so
lengths are capped at ``MAX_N`` bits and enumerated sets at ``MAX_BALL``.
Vectors are handled internally as integer masks (bit j = coordinate j).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from math import comb
from pathlib import Path

import numpy as np

from .galois import BitMatrix, as_bits, rank
from .rates import entropy

MAX_N = 30
MAX_BALL = 1 << 22
MAX_HASH_BITS = 64
DEFAULT_EPSILON = 0.05

SIM_COLUMNS = ("n", "p_num", "p_den", "pp_num", "pp_den", "m_bits", "seed", "fallback_flag", "success")


class DeskScaleError(ValueError):
    """Input too large for exhaustive enumeration."""


def _check_n(n: int) -> None:
    if not 1 <= n <= MAX_N:
        raise DeskScaleError(f"vector length {n} outside the enumerable range 1..{MAX_N}")


def _mask(x, n: int) -> int:
    if isinstance(x, (int, np.integer)):
        return int(x)
    bits = as_bits(x, n)
    return int(np.dot(bits.astype(np.int64), np.int64(1) << np.arange(n, dtype=np.int64)))


def _bits(mask: int, n: int) -> np.ndarray:
    return np.array([(mask >> j) & 1 for j in range(n)], dtype=np.uint8)


def radius(alpha, n: int) -> int:
    """Integer radius floor(alpha n) of B_{alpha n}."""
    return math.floor(Fraction(alpha) * n)


def ball_size(n: int, r: int) -> int:
    return sum(comb(n, j) for j in range(max(r, -1) + 1))


# --- reference sets --------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ReferenceSet:
    n: int
    vectors: np.ndarray  # (M, n) uint8

    def __post_init__(self):
        arr = np.asarray(self.vectors, dtype=np.uint8).reshape(-1, self.n)
        if arr.size and arr.max() > 1:
            raise ValueError("reference vectors must be binary")
        masks = arr.astype(np.int64) @ (np.int64(1) << np.arange(self.n, dtype=np.int64)) if arr.size else np.zeros(0, np.int64)
        if len(np.unique(masks)) != len(masks):
            raise ValueError("reference set contains duplicate vectors")
        arr.setflags(write=False)
        object.__setattr__(self, "vectors", arr)
        object.__setattr__(self, "_masks", masks)

    @property
    def masks(self) -> np.ndarray:
        return self._masks

    def __len__(self) -> int:
        return len(self._masks)

    def __contains__(self, x) -> bool:
        return _mask(x, self.n) in set(self._masks.tolist())

    @classmethod
    def from_masks(cls, masks, n: int) -> ReferenceSet:
        masks = [int(x) for x in masks]
        return cls(n, np.array([_bits(x, n) for x in masks], dtype=np.uint8).reshape(len(masks), n))

    @classmethod
    def from_strings(cls, lines) -> ReferenceSet:
        rows = []
        for raw in lines:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if set(line) - {"0", "1"}:
                raise ValueError(f"reference line {line!r} is not a 0/1 string")
            rows.append([int(c) for c in line])
        if not rows:
            raise ValueError("reference file holds no vectors")
        n = len(rows[0])
        if any(len(r) != n for r in rows):
            raise ValueError("reference vectors have differing lengths")
        return cls(n, np.array(rows, dtype=np.uint8))

    @classmethod
    def from_file(cls, path) -> ReferenceSet:
        return cls.from_strings(Path(path).read_text().splitlines())

    def to_strings(self) -> list[str]:
        return ["".join(map(str, row)) for row in self.vectors]


def _pair_distances(masks: np.ndarray) -> np.ndarray:
    return np.bitwise_count(masks[:, None] ^ masks[None, :]).astype(np.int64)


def d_p(Z: ReferenceSet, p) -> int:
    """Largest pairwise distance among pairs at distance <= 2pn (0 if there are none)."""
    if len(Z) < 2:
        return 0
    D = _pair_distances(Z.masks)
    qual = D[(D <= radius(2 * Fraction(p), Z.n)) & ~np.eye(len(Z), dtype=bool)]
    return int(qual.max()) if qual.size else 0


def p_spread(Z: ReferenceSet, p) -> Fraction:
    return Fraction(d_p(Z, p), 2 * Z.n)


def _within(masks: np.ndarray, x: int, r: int) -> np.ndarray:
    return masks[np.bitwise_count(masks ^ np.int64(x)) <= r]


def candidates(Z: ReferenceSet, x, alpha) -> ReferenceSet:
    """Members of Z within distance alpha n of x."""
    return ReferenceSet.from_masks(_within(Z.masks, _mask(x, Z.n), radius(alpha, Z.n)), Z.n)


# --- hash functions --------------------------------------------------------


@dataclass(frozen=True)
class LinearHash:
    """u(x) = A x over GF(2); A is drawn by numpy's default PCG64 generator from ``seed``."""

    m_bits: int
    n: int
    seed: int
    rows: tuple[int, ...]  # row masks of A

    @classmethod
    def random(cls, m_bits: int, n: int, seed: int) -> LinearHash:
        if not 0 <= m_bits <= MAX_HASH_BITS:
            raise ValueError(f"hash length {m_bits} outside 0..{MAX_HASH_BITS}")
        rng = np.random.default_rng(seed)
        A = rng.integers(0, 2, size=(m_bits, n), dtype=np.uint8)
        return cls(m_bits, n, seed, _row_masks(A))

    @property
    def matrix(self) -> np.ndarray:
        return np.array([_bits(r, self.n) for r in self.rows], dtype=np.uint8).reshape(self.m_bits, self.n)

    def prefix(self, m_bits: int) -> LinearHash:
        """Hash made of the first m_bits rows (couples hashes of different lengths)."""
        if not 0 <= m_bits <= self.m_bits:
            raise ValueError(f"prefix length {m_bits} outside 0..{self.m_bits}")
        return LinearHash(m_bits, self.n, self.seed, self.rows[:m_bits])

    def __call__(self, x) -> int:
        x = _mask(x, self.n)
        return sum(((row & x).bit_count() & 1) << i for i, row in enumerate(self.rows))

    def hash_many(self, masks: np.ndarray) -> np.ndarray:
        masks = np.asarray(masks, dtype=np.int64)
        out = np.zeros(masks.shape, dtype=np.uint64)
        for i, row in enumerate(self.rows):
            out |= (np.bitwise_count(masks & np.int64(row)) & 1).astype(np.uint64) << np.uint64(i)
        return out


def _row_masks(A: np.ndarray) -> tuple[int, ...]:
    w = np.int64(1) << np.arange(A.shape[1], dtype=np.int64)
    return tuple(int(v) for v in (A.astype(np.int64) @ w)) if A.size else ()


def random_square_hash(n: int, seed: int, full_rank: bool = False) -> LinearHash:
    """n x n hash; with ``full_rank`` redraws from the same stream until A is invertible."""
    rng = np.random.default_rng(seed)
    while True:
        A = rng.integers(0, 2, size=(n, n), dtype=np.uint8)
        if not full_rank or rank(BitMatrix(A)) == n:
            return LinearHash(n, n, seed, _row_masks(A))


def hash_length_c1(n: int, p, p_prime, epsilon: float = DEFAULT_EPSILON) -> int:
    return math.ceil(n * (entropy(p) + entropy(p_prime) + epsilon))


def hash_length_c2(n: int, p_prime, epsilon: float = DEFAULT_EPSILON) -> int:
    return math.ceil(n * (2 * entropy(p_prime) + epsilon))


# --- ball enumeration ------------------------------------------------------


def ball_masks(n: int, r: int, center: int = 0) -> np.ndarray:
    """All vectors within distance r of center, by weight of the offset then lexicographic support."""
    _check_n(n)
    size = ball_size(n, r)
    if size > MAX_BALL:
        raise DeskScaleError(f"ball B_{r} in {n} dims has {size} points, above the limit {MAX_BALL}")
    out = [0]
    for w in range(1, r + 1):
        out.extend(sum(1 << j for j in s) for s in combinations(range(n), w))
    return np.array(out, dtype=np.int64) ^ np.int64(center)


def _union_of_balls(centers, n: int, r: int) -> np.ndarray:
    if len(centers) == 0:
        return np.zeros(0, dtype=np.int64)
    if len(centers) * ball_size(n, r) > 4 * MAX_BALL:
        raise DeskScaleError("union of balls too large to enumerate")
    offsets = ball_masks(n, r)
    return np.unique((np.asarray(centers, dtype=np.int64)[:, None] ^ offsets[None, :]).reshape(-1))


def ball_rank(v, d: int, n: int | None = None) -> int:
    """Index of v among vectors of weight <= d: weight first, then lexicographic support."""
    if n is None:
        n = len(v)
    x = _mask(v, n)
    w = x.bit_count()
    if w > d:
        raise ValueError(f"vector weight {w} exceeds the ball radius {d}")
    base = sum(comb(n, j) for j in range(w))
    support = [j for j in range(n) if (x >> j) & 1]
    idx, prev = 0, -1
    for i, c in enumerate(support):
        for skipped in range(prev + 1, c):
            idx += comb(n - 1 - skipped, w - 1 - i)
        prev = c
    return base + idx


def ball_unrank(index: int, n: int, d: int) -> np.ndarray:
    total = ball_size(n, d)
    if not 0 <= index < total:
        raise ValueError(f"index {index} outside [0, {total})")
    w = 0
    while index >= comb(n, w):
        index -= comb(n, w)
        w += 1
    support, start = [], 0
    for i in range(w):
        c = start
        while True:
            block = comb(n - 1 - c, w - 1 - i)
            if index < block:
                break
            index -= block
            c += 1
        support.append(c)
        start = c + 1
    out = np.zeros(n, dtype=np.uint8)
    out[support] = 1
    return out


def rank_bits(n: int, d: int) -> int:
    return max(0, math.ceil(math.log2(ball_size(n, d))))


def distance_field_bits(n: int, p) -> int:
    return max(0, math.ceil(math.log2(radius(p, n) + 1)))


# --- encodings -------------------------------------------------------------


@dataclass(frozen=True)
class HashEncoding:
    """flag 0: hash (plus d and ball index for the reference-hashing scheme); flag 1: y raw."""

    flag: int
    n: int
    m_bits: int
    hash_value: int | None = None
    raw: tuple[int, ...] | None = None
    d: int | None = None
    index: int | None = None
    d_bits: int = 0
    hashed_set_size: int = 0  # encoder-side diagnostic, not transmitted

    @property
    def bit_length(self) -> int:
        if self.flag:
            return 1 + self.n
        if self.d is None:
            return 1 + self.m_bits
        return 1 + self.m_bits + self.d_bits + rank_bits(self.n, self.d)

    def to_bits(self) -> np.ndarray:
        out = [self.flag]
        if self.flag:
            out.extend(self.raw)
        else:
            out.extend((self.hash_value >> i) & 1 for i in range(self.m_bits))
            if self.d is not None:
                out.extend((self.d >> (self.d_bits - 1 - i)) & 1 for i in range(self.d_bits))
                nb = rank_bits(self.n, self.d)
                out.extend((self.index >> (nb - 1 - i)) & 1 for i in range(nb))
        return np.array(out, dtype=np.uint8)

    @classmethod
    def from_bits(cls, bits, n: int, m_bits: int, d_bits: int | None = None) -> HashEncoding:
        """Parse a bit string; pass ``d_bits`` for the reference-hashing scheme."""
        bits = [int(b) for b in bits]
        if bits[0]:
            if len(bits) != 1 + n:
                raise ValueError("raw fallback has the wrong length")
            return cls(1, n, m_bits, raw=tuple(bits[1:]))
        h = sum(b << i for i, b in enumerate(bits[1 : 1 + m_bits]))
        if d_bits is None:
            if len(bits) != 1 + m_bits:
                raise ValueError("hash encoding has the wrong length")
            return cls(0, n, m_bits, hash_value=h)
        pos = 1 + m_bits
        d = int("".join(map(str, bits[pos : pos + d_bits])) or "0", 2)
        pos += d_bits
        nb = rank_bits(n, d)
        idx = int("".join(map(str, bits[pos : pos + nb])) or "0", 2)
        if len(bits) != pos + nb:
            raise ValueError("reference-hash encoding has the wrong length")
        return cls(0, n, m_bits, hash_value=h, d=d, index=idx, d_bits=d_bits)


def _raw(y_mask: int, n: int, m_bits: int, hashed: int = 0, d_bits: int = 0) -> HashEncoding:
    return HashEncoding(1, n, m_bits, raw=tuple(int(b) for b in _bits(y_mask, n)), d_bits=d_bits, hashed_set_size=hashed)


def encode_c1(y, Z: ReferenceSet, p, u: LinearHash) -> HashEncoding:
    """Hash y; fall back to raw y if any other vector near a plausible reference shares its hash."""
    n = Z.n
    _check_n(n)
    y = _mask(y, n)
    R = radius(p, n)
    near = _within(Z.masks, y, R)
    if len(near) == 0:
        return _raw(y, n, u.m_bits)
    pool = _union_of_balls(near, n, R)
    hy = u(y)
    clash = bool(np.any((u.hash_many(pool) == np.uint64(hy)) & (pool != y)))
    if clash:
        return _raw(y, n, u.m_bits, len(pool))
    return HashEncoding(0, n, u.m_bits, hash_value=hy, hashed_set_size=len(pool))


def decode_c1(enc: HashEncoding, z, u: LinearHash, p) -> np.ndarray:
    n = enc.n
    if enc.flag:
        return np.array(enc.raw, dtype=np.uint8)
    ball = ball_masks(n, radius(p, n), _mask(z, n))
    hits = ball[u.hash_many(ball) == np.uint64(enc.hash_value)]
    if len(hits) != 1:
        raise ValueError(f"{len(hits)} vectors near the reference match the hash; reference out of range")
    return _bits(int(hits[0]), n)


def encode_c2(y, Z: ReferenceSet, p, u: LinearHash) -> HashEncoding:
    """Hash the nearest reference z_1 and enumerate the difference y - z_1."""
    n = Z.n
    _check_n(n)
    y = _mask(y, n)
    R = radius(p, n)
    dbits = distance_field_bits(n, p)
    near = _within(Z.masks, y, R)
    if len(near) == 0:
        return _raw(y, n, u.m_bits, d_bits=dbits)
    dist = np.bitwise_count(near ^ np.int64(y))
    z1 = int(near[int(np.argmin(dist))])  # first nearest in Z order
    v1 = y ^ z1
    d = v1.bit_count()
    D = d_p(Z, p)
    pool = set()
    for zi in near.tolist():
        local = _within(Z.masks, zi, D)
        pool.update(_within(local, zi ^ v1, R).tolist())
    pool_arr = np.array(sorted(pool), dtype=np.int64)
    hz = u(z1)
    clash = bool(np.any((u.hash_many(pool_arr) == np.uint64(hz)) & (pool_arr != z1)))
    if clash:
        return _raw(y, n, u.m_bits, len(pool), dbits)
    return HashEncoding(0, n, u.m_bits, hash_value=hz, d=d, index=ball_rank(v1, d, n), d_bits=dbits, hashed_set_size=len(pool))


def decode_c2(enc: HashEncoding, z, Z_local: ReferenceSet, p, u: LinearHash) -> np.ndarray:
    """Decode against the references the decoder knows near z (modelled as the full set)."""
    n = enc.n
    if enc.flag:
        return np.array(enc.raw, dtype=np.uint8)
    z = _mask(z, n)
    v1 = _mask(ball_unrank(enc.index, n, enc.d), n)
    R = radius(p, n)
    local = _within(Z_local.masks, z, d_p(Z_local, p))
    cands = _within(local, z ^ v1, R)
    hits = cands[u.hash_many(cands) == np.uint64(enc.hash_value)]
    if len(hits) != 1:
        raise ValueError(f"{len(hits)} candidate references match the hash; reference out of range")
    return _bits(int(hits[0]) ^ v1, n)


# --- converse experiment ---------------------------------------------------


def converse_experiment(y, p, p_prime, m_bits: int, trials: int, seed: int = 0, full_rank: bool = False) -> float:
    """Fraction of hashes under which no other vector in B_{(p+p')n}(y) collides with y.

    Trial i draws an n x n matrix from seed + i and keeps its first m_bits
    rows, so sweeps over m_bits with the same seed use nested hashes.
    """
    y = as_bits(y)
    n = len(y)
    _check_n(n)
    if not 0 <= m_bits <= n:
        raise ValueError(f"m_bits must lie in 0..n={n}")
    R = radius(Fraction(p) + Fraction(p_prime), n)
    diffs = ball_masks(n, R)[1:]  # u(y') = u(y) iff A (y' - y) = 0
    if trials <= 0:
        raise ValueError("trials must be positive")
    wins = 0
    for i in range(trials):
        u = random_square_hash(n, seed + i, full_rank).prefix(m_bits)
        wins += not np.any(u.hash_many(diffs) == 0)
    return wins / trials


# --- fixtures for simulation -----------------------------------------------


def clustered_reference_set(
    n: int, p, p_prime, clusters: int, per_cluster: int, rng: np.random.Generator, chain: bool = False
) -> ReferenceSet:
    """Reference set whose spread stays at most p'.

    Cluster centers are pairwise more than 2(p + p')n apart and members lie
    within p'n of their center, so only same-cluster pairs fall within 2pn.
    With ``chain`` each cluster is a path that adds one fresh coordinate per
    step (overlapping neighbourhoods, as in nested prefix sets).
    """
    _check_n(n)
    R, Rs = radius(p, n), radius(p_prime, n)
    sep = 2 * R + 2 * Rs
    centers: list[int] = []
    for _ in range(10_000):
        if len(centers) == clusters:
            break
        c = int(rng.integers(0, 1 << n))
        if all((c ^ o).bit_count() > sep for o in centers):
            centers.append(c)
    else:
        raise ValueError("could not place well-separated cluster centers; reduce clusters or p")
    out: list[int] = []
    for c in centers:
        members = {c}
        if chain:
            coords = rng.permutation(n)[: min(Rs, per_cluster - 1)]
            x = c
            for j in coords:
                x ^= 1 << int(j)
                members.add(x)
        else:
            for _ in range(50 * per_cluster):
                if len(members) >= per_cluster or Rs == 0:
                    break
                w = int(rng.integers(1, Rs + 1))
                flip = rng.choice(n, size=w, replace=False)
                members.add(c ^ sum(1 << int(j) for j in flip))
        out.extend(sorted(members))
    return ReferenceSet.from_masks(out, n)


def random_pair(Z: ReferenceSet, p, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """(y, z) with z drawn from Z and y within distance pn of z."""
    n = Z.n
    z = int(Z.masks[int(rng.integers(len(Z)))])
    w = int(rng.integers(0, radius(p, n) + 1))
    flip = rng.choice(n, size=w, replace=False)
    return _bits(z ^ sum(1 << int(j) for j in flip), n), _bits(z, n)


@dataclass(frozen=True)
class SimulationRow:
    n: int
    p: Fraction
    p_prime: Fraction
    m_bits: int
    seed: int
    fallback_flag: int
    success: int
    hashed_set_size: int

    def csv_row(self) -> list:
        return [self.n, self.p.numerator, self.p.denominator, self.p_prime.numerator, self.p_prime.denominator,
                self.m_bits, self.seed, self.fallback_flag, self.success]


def simulate_hash(construction: int, n: int, p, seeds, *, clusters: int = 2, per_cluster: int = 4,
                  epsilon: float = DEFAULT_EPSILON, chain: bool = False) -> list[SimulationRow]:
    """One run per seed: fresh clustered Z, (y, z) pair and hash, then encode and decode."""
    if construction not in (1, 2):
        raise ValueError("construction must be 1 or 2")
    p = Fraction(p)
    rows = []
    for seed in seeds:
        rng = np.random.default_rng(seed)
        Z = clustered_reference_set(n, p, p / 2, clusters, per_cluster, rng, chain=chain)
        pp = p_spread(Z, p)
        y, z = random_pair(Z, p, rng)
        if construction == 1:
            u = LinearHash.random(hash_length_c1(n, p, pp, epsilon), n, seed)
            enc = encode_c1(y, Z, p, u)
            out = decode_c1(enc, z, u, p)
        else:
            u = LinearHash.random(hash_length_c2(n, pp, epsilon), n, seed)
            enc = encode_c2(y, Z, p, u)
            out = decode_c2(enc, z, Z, p, u)
        rows.append(SimulationRow(n, p, pp, u.m_bits, int(seed), enc.flag, int(np.array_equal(out, y)), enc.hashed_set_size))
    return rows


def write_simulation_csv(rows, fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(SIM_COLUMNS)
    for r in rows:
        w.writerow(r.csv_row())
