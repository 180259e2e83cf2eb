"""Nested binary BCH parity-check families and coset-leader decoding.

Level i of a family is the parity-check matrix S^(i) of a length-k code. The
rows of S^(i) are the rows of S^(i-1) followed by a differential block; the
last level is completed to a square invertible matrix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations

import numpy as np

from .galois import BitMatrix, as_bits, bits_to_int, default_field, galois_field, in_span, int_to_bits, nullspace

BCH_LENGTHS = (7, 15, 31, 63)
MAX_TABLE_ROWS = 24
EXHAUSTIVE_DISTANCE_MAX_K = 20
INFINITE_DISTANCE = math.inf


class InnerCodeError(ValueError):
    pass


def cyclotomic_cosets(k: int) -> list[list[int]]:
    """2-cyclotomic cosets of 1..k-1 modulo k, ordered by smallest member."""
    seen: set[int] = set()
    out = []
    for s in range(1, k):
        if s in seen:
            continue
        coset = []
        x = s
        while x not in coset:
            coset.append(x)
            x = (2 * x) % k
        seen.update(coset)
        out.append(coset)
    return out


def minimal_polynomial(k: int, coset: list[int]) -> int:
    """Binary minimal polynomial of alpha^coset[0] as an integer (bit i = x^i)."""
    w = k.bit_length()
    gf = galois_field(default_field(w))
    poly = [1]
    for e in coset:
        poly = gf.poly_mul(poly, [gf.alpha_pow(e), 1])
    if any(c > 1 for c in poly):
        raise AssertionError("minimal polynomial has non-binary coefficients")
    return sum(c << i for i, c in enumerate(poly))


def _poly_mod(a: int, m: int) -> int:
    dm = m.bit_length() - 1
    while a and a.bit_length() - 1 >= dm:
        a ^= m << (a.bit_length() - 1 - dm)
    return a


def _coset_rows(k: int, coset: list[int]) -> list[int]:
    """Parity rows expressing c(x) = 0 mod M(x) for the coset's minimal polynomial M."""
    M = minimal_polynomial(k, coset)
    deg = M.bit_length() - 1
    residues = [_poly_mod(1 << pos, M) for pos in range(k)]
    return [sum(((residues[pos] >> l) & 1) << pos for pos in range(k)) for l in range(deg)]


@dataclass(frozen=True)
class BchLevel:
    designed_distance: int
    cosets: tuple[int, ...]  # coset leaders (smallest members) of the root set
    redundancy: int


@lru_cache(maxsize=None)
def bch_ladder(k: int) -> tuple[BchLevel, ...]:
    """Narrow-sense BCH codes of length k, one per distinct root set, by increasing redundancy."""
    if k not in BCH_LENGTHS:
        raise InnerCodeError(f"block length {k} is not one of the supported BCH lengths {BCH_LENGTHS}")
    cosets = cyclotomic_cosets(k)
    owner = {e: c[0] for c in cosets for e in c}
    ladder: dict[tuple[int, ...], int] = {}
    for D in range(2, k + 1):
        roots = tuple(sorted({owner[j] for j in range(1, D)}, key=lambda s: s))
        ladder[roots] = D
    size = {c[0]: len(c) for c in cosets}
    return tuple(
        BchLevel(D, roots, sum(size[s] for s in roots)) for roots, D in sorted(ladder.items(), key=lambda kv: kv[1])
    )


@dataclass(frozen=True, eq=False)
class NestedInnerFamily:
    k: int
    matrices: tuple[BitMatrix, ...]
    diffs: tuple[BitMatrix, ...]
    distances: tuple[float, ...]  # last entry is INFINITE_DISTANCE
    distance_verified: tuple[bool, ...]  # exhaustive check (True) or trusted designed distance (False)

    @property
    def m(self) -> int:
        return len(self.matrices)

    @property
    def redundancies(self) -> tuple[int, ...]:
        return tuple(M.rows for M in self.matrices)

    @property
    def diff_redundancies(self) -> tuple[int, ...]:
        return tuple(D.rows for D in self.diffs)


def min_distance(S: BitMatrix) -> float:
    """Exact minimum distance of the code with parity-check S (inf for the zero code)."""
    basis = nullspace(S)
    if not basis:
        return INFINITE_DISTANCE
    best = S.cols
    # Gray-code walk over all nonzero codewords
    word = 0
    for i in range(1, 1 << len(basis)):
        word ^= basis[(i & -i).bit_length() - 1]
        best = min(best, word.bit_count())
    return best


def build_nested_bch(k: int, target_distances) -> NestedInnerFamily:
    """Nested BCH family whose level i has the smallest designed distance >= target i.

    One extra level is appended: the last BCH level completed to a k x k
    invertible matrix with standard-basis rows, taken in index order.
    """
    ladder = bch_ladder(k)
    targets = [Fraction(t) if not isinstance(t, float) else t for t in target_distances]
    if any(b < a for a, b in zip(targets, targets[1:])):
        raise InnerCodeError("target distances must be non-decreasing")
    chosen: list[BchLevel] = []
    for i, tgt in enumerate(targets):
        level = next((lv for lv in ladder if lv.designed_distance >= tgt), None)
        if level is None:
            raise InnerCodeError(f"no BCH code of length {k} reaches distance {float(tgt):.4g} (level {i + 1})")
        if chosen and level.redundancy == chosen[-1].redundancy:
            raise InnerCodeError(
                f"levels {i} and {i + 1} both map to BCH designed distance {level.designed_distance}; "
                "distances are not achievable in strictly nested order (reduce m or increase k)"
            )
        chosen.append(level)

    matrices: list[BitMatrix] = []
    diffs: list[BitMatrix] = []
    distances: list[float] = []
    verified: list[bool] = []
    rows: list[int] = []
    used: set[int] = set()
    for level in chosen:
        new_rows = []
        for s in level.cosets:
            if s not in used:
                coset = next(c for c in cyclotomic_cosets(k) if c[0] == s)
                new_rows.extend(_coset_rows(k, coset))
                used.add(s)
        rows.extend(new_rows)
        S = BitMatrix.from_rows(rows, k)
        matrices.append(S)
        diffs.append(BitMatrix.from_rows(new_rows, k))
        if k <= EXHAUSTIVE_DISTANCE_MAX_K:
            actual = min_distance(S)
            if actual < level.designed_distance:
                raise AssertionError(f"BCH({k}) level has distance {actual} < designed {level.designed_distance}")
            verified.append(True)
        else:
            verified.append(False)
        distances.append(level.designed_distance)

    new_rows = []
    for j in range(k):
        if not in_span(rows + new_rows, 1 << j):
            new_rows.append(1 << j)
    rows.extend(new_rows)
    matrices.append(BitMatrix.from_rows(rows, k))
    diffs.append(BitMatrix.from_rows(new_rows, k))
    distances.append(INFINITE_DISTANCE)
    verified.append(True)
    if len(rows) != k:
        raise AssertionError("full-rank completion failed")
    return NestedInnerFamily(k, tuple(matrices), tuple(diffs), tuple(distances), tuple(verified))


@dataclass(frozen=True, eq=False)
class CosetLeaderTable:
    """Minimum-weight coset leaders of S^(level), indexed by syndrome integer.

    Syndrome integers carry row l of the parity-check matrix in bit l, so the
    syndrome under S^(i-1) is the low r_{i-1} bits of the syndrome under S^(i).
    Leaders are integer masks (bit j = coordinate j).
    """

    level: int
    k: int
    r: int
    leaders: np.ndarray  # int64 masks, shape (2^r,)
    weights: np.ndarray  # uint8, shape (2^r,)

    def leader_bits(self, syndrome: int) -> np.ndarray:
        return int_to_bits(int(self.leaders[syndrome]), self.k)


def _bit_reverse_keys(masks: np.ndarray, k: int) -> np.ndarray:
    key = np.zeros_like(masks)
    for j in range(k):
        key |= ((masks >> j) & 1) << (k - 1 - j)
    return key


def leader_table_for(S: BitMatrix, level: int = 0) -> CosetLeaderTable:
    """Coset-leader table by weight-ordered enumeration.

    Ties among minimum-weight vectors go to the lexicographically smallest
    support (sorted position tuple).
    """
    r, k = S.rows, S.cols
    if r > MAX_TABLE_ROWS:
        raise InnerCodeError(f"{r} parity rows exceed the coset-leader table limit of {MAX_TABLE_ROWS}")
    cols = np.array(S.column_masks(), dtype=np.int64)
    size = 1 << r
    leaders = np.full(size, -1, dtype=np.int64)
    weights = np.zeros(size, dtype=np.uint8)
    leaders[0] = 0
    filled = 1
    # layer of weight-w supports: masks, syndromes, last index used
    masks = np.zeros(1, dtype=np.int64)
    syns = np.zeros(1, dtype=np.int64)
    last = np.full(1, -1, dtype=np.int64)
    w = 0
    while filled < size:
        w += 1
        if w > k:
            raise InnerCodeError("parity-check matrix rows are linearly dependent; some syndromes unreachable")
        parts_m, parts_s, parts_l = [], [], []
        for j in range(k):
            sel = last < j
            if not sel.any():
                continue
            parts_m.append(masks[sel] | (1 << j))
            parts_s.append(syns[sel] ^ cols[j])
            parts_l.append(np.full(int(sel.sum()), j, dtype=np.int64))
        masks, syns, last = np.concatenate(parts_m), np.concatenate(parts_s), np.concatenate(parts_l)
        fresh = leaders[syns] < 0
        if fresh.any():
            cm, cs = masks[fresh], syns[fresh]
            order = np.lexsort((-_bit_reverse_keys(cm, k), cs))
            cm, cs = cm[order], cs[order]
            _, first = np.unique(cs, return_index=True)
            leaders[cs[first]] = cm[first]
            weights[cs[first]] = w
            filled += first.size
    return CosetLeaderTable(level, k, r, leaders, weights)


def build_leader_table(fam: NestedInnerFamily, i: int) -> CosetLeaderTable:
    """Leader table for level i (1-based) of the family."""
    if not 1 <= i <= fam.m:
        raise InnerCodeError(f"level {i} out of range 1..{fam.m}")
    return leader_table_for(fam.matrices[i - 1], i)


def syndrome_int(S: BitMatrix, x) -> int:
    x = bits_to_int(as_bits(x, S.cols))
    return sum(((row & x).bit_count() & 1) << l for l, row in enumerate(S.row_masks))


def _syndrome_index(table: CosetLeaderTable, syndrome) -> int:
    if isinstance(syndrome, (int, np.integer)):
        s = int(syndrome)
        if not 0 <= s < (1 << table.r):
            raise ValueError(f"syndrome {s} out of range for {table.r} rows")
        return s
    return bits_to_int(as_bits(syndrome, table.r))


def coset_decode(table: CosetLeaderTable, syndrome) -> np.ndarray:
    """Minimum-weight vector with the given syndrome (bit vector or integer)."""
    return table.leader_bits(_syndrome_index(table, syndrome))


def bounded_decode(table: CosetLeaderTable, syndrome, threshold: int) -> np.ndarray | None:
    """Coset leader if its weight is at most ``threshold``, otherwise None (erasure)."""
    s = _syndrome_index(table, syndrome)
    if table.weights[s] > threshold:
        return None
    return table.leader_bits(s)


def detect_threshold(d: int) -> int:
    """Largest weight decoded under simultaneous correct/detect: floor((d-1)/3)."""
    return (d - 1) // 3


def combinations_by_weight(k: int, max_weight: int):
    """All supports of size <= max_weight, by weight then lexicographically."""
    for w in range(max_weight + 1):
        yield from combinations(range(k), w)
