"""Coset-coding compression with decoder-side reference vectors.

Three variants share one payload format:

* ``baseline`` -- a single syndrome of a length-n BCH code, decoded by an
  exhaustive coset-leader search (small n only).
* ``gel4`` -- nested inner BCH syndromes per length-k block, with Reed-Solomon
  parity protecting each differential syndrome layer.
* ``gel5`` -- as gel4, but inner decodes above (d-1)/3 are erased, which lets
  the outer codes run with smaller distances.

Every scheme is derived deterministically from ``SchemeParams`` so the
decoder rebuilds it from the payload header alone.
"""

from __future__ import annotations

import math
import struct
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import combinations

import numpy as np

from .galois import MAX_FIELD_DEGREE, BitMatrix, as_bits, hamming_distance, inverse, matmul_rows, matvec
from .inner_codes import (
    BCH_LENGTHS,
    CosetLeaderTable,
    InnerCodeError,
    NestedInnerFamily,
    build_nested_bch,
    detect_threshold,
    leader_table_for,
)
from .outer_codes import OuterCodeSpec, OuterDecodingError, lengthened_encode, syndrome_shift_decode

VARIANTS = ("baseline", "gel4", "gel5")
VARIANT_CODES = {"baseline": 3, "gel4": 4, "gel5": 5}
BASELINE_MAX_N = 24

MAGIC = b"GELC"
VERSION = 1
_HEADER = struct.Struct("<4sBBQQIHII8s")
HEADER_SIZE = _HEADER.size


class DesignError(ValueError):
    """The requested parameters admit no scheme under the shipped code families."""


class DecodingError(RuntimeError):
    """Decoding could not reproduce the input; the distance budget was exceeded."""


class PayloadFormatError(ValueError):
    pass


def parse_fraction(text: str) -> Fraction:
    """Parse an exact rational written as NUM/DEN (or an integer)."""
    num, sep, den = text.strip().partition("/")
    try:
        return Fraction(int(num), int(den) if sep else 1)
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"expected a rational NUM/DEN, got {text!r}") from exc


@dataclass(frozen=True)
class SchemeParams:
    """``n`` is the true input length in bits; blocks are zero-padded to a multiple of k."""

    n: int
    k: int
    m: int
    p: Fraction
    variant: str = "gel5"

    def __post_init__(self):
        object.__setattr__(self, "p", Fraction(self.p))
        if self.variant not in VARIANTS:
            raise DesignError(f"unknown variant {self.variant!r}; expected one of {VARIANTS}")
        if self.n < 1:
            raise DesignError("input length must be positive")
        if self.k not in BCH_LENGTHS:
            raise DesignError(f"block length k={self.k} must be one of {BCH_LENGTHS}")
        if self.m < 1:
            raise DesignError("level count m must be >= 1")
        if not 0 < self.p < 1:
            raise DesignError(f"distance fraction p must satisfy 0 < p < 1, got {self.p}")
        if self.variant == "gel4" and not 4 * self.p < Fraction(1, 2):
            raise DesignError(f"gel4 requires 4p < 1/2, got p = {self.p}")
        if self.variant == "gel5" and not 3 * self.p < Fraction(1, 2):
            raise DesignError(f"gel5 requires 3p < 1/2, got p = {self.p}")
        if self.variant == "baseline":
            if self.m != 1:
                raise DesignError("the baseline scheme has a single level (m = 1)")
            if self.n != self.k:
                raise DesignError("the baseline scheme codes one block: n must equal k")
            if self.n > BASELINE_MAX_N:
                raise DesignError(f"baseline exhaustive decoding is limited to n <= {BASELINE_MAX_N}")

    @property
    def t(self) -> int:
        return -(-self.n // self.k)

    @property
    def padded_n(self) -> int:
        return self.t * self.k

    @property
    def budget(self) -> int:
        """Integer error budget E = floor(p n)."""
        return math.floor(self.p * self.n)


@dataclass(frozen=True, eq=False)
class DesignedScheme:
    params: SchemeParams
    inner: NestedInnerFamily
    outer: tuple[OuterCodeSpec, ...]  # levels 2..m
    target_distances: tuple[Fraction, ...]  # levels 1..m-1, before rounding to BCH
    tables: tuple[CosetLeaderTable, ...]  # levels 1..m-1 (baseline: level 1)
    final_inverse: BitMatrix | None = field(default=None)

    @property
    def distances(self) -> tuple[float, ...]:
        return self.inner.distances

    @property
    def deltas(self) -> tuple[int, ...]:
        return tuple(o.delta for o in self.outer)

    @property
    def rhos(self) -> tuple[int, ...]:
        return tuple(o.rho for o in self.outer)

    @property
    def thresholds(self) -> tuple[int, ...]:
        """Erasure thresholds floor((d_i - 1)/3) for levels 1..m-1 (gel5)."""
        return tuple(detect_threshold(int(d)) for d in self.inner.distances[:-1])

    @property
    def p1_bits(self) -> int:
        if self.params.variant == "baseline":
            return self.inner.matrices[0].rows
        return self.inner.redundancies[0] * self.params.t

    @property
    def body_bits(self) -> int:
        """r_1 t + sum over levels i >= 2 of r~_i rho_i."""
        rt = self.inner.diff_redundancies
        return self.p1_bits + sum(rt[i + 1] * o.rho for i, o in enumerate(self.outer))

    def summary(self) -> dict:
        prm = self.params
        return {
            "variant": prm.variant,
            "n": prm.n,
            "padded_n": prm.padded_n,
            "k": prm.k,
            "t": prm.t,
            "m": prm.m,
            "p": f"{prm.p.numerator}/{prm.p.denominator}",
            "budget": prm.budget,
            "target_distances": [float(d) for d in self.target_distances],
            "distances": [None if math.isinf(d) else int(d) for d in self.inner.distances],
            "distance_verified": list(self.inner.distance_verified),
            "r": list(self.inner.redundancies),
            "r_tilde": list(self.inner.diff_redundancies),
            "delta": list(self.deltas),
            "rho": list(self.rhos),
            "fields": [f"GF(2^{o.field.w})" for o in self.outer],
            "extended_outer": [o.extended for o in self.outer],
            "body_bits": self.body_bits,
            "rate": self.body_bits / prm.n,
        }


def level_targets(params: SchemeParams) -> list[Fraction]:
    """Inner distance targets c p k + (i/m)(1/2 - c p) k + 1 for i = 1..m-1."""
    c = 4 if params.variant == "gel4" else 3
    cp = c * params.p
    return [cp * params.k + Fraction(i, params.m) * (Fraction(1, 2) - cp) * params.k + 1 for i in range(1, params.m)]


def outer_distance(variant: str, budget: int, d_prev: int) -> int:
    """Smallest outer distance meeting the level guarantee for inner distance d_prev."""
    if variant == "gel4":
        delta = (4 * budget) // (d_prev - 1) + 1
        if not delta > Fraction(4 * budget, d_prev - 1):
            raise AssertionError("gel4 outer distance fails its strict bound")
    else:
        delta = max(1, -((-3 * budget) // (d_prev - 1)))
        if not delta >= Fraction(3 * budget, d_prev - 1):
            raise AssertionError("gel5 outer distance fails its bound")
    return delta


@lru_cache(maxsize=64)
def design(params: SchemeParams) -> DesignedScheme:
    """Derive the full scheme from its parameters (cached; schemes are immutable)."""
    if params.variant == "baseline":
        return _design_baseline(params)
    targets = level_targets(params)
    try:
        fam = build_nested_bch(params.k, targets)
    except InnerCodeError as exc:
        raise DesignError(str(exc)) from exc

    t, E = params.t, params.budget
    outer = []
    for i in range(2, params.m + 1):
        d_prev = int(fam.distances[i - 2])
        delta = outer_distance(params.variant, E, d_prev)
        w = fam.diff_redundancies[i - 1]
        if w > MAX_FIELD_DEGREE:
            raise DesignError(f"level {i}: r~={w} exceeds the largest supported field GF(2^{MAX_FIELD_DEGREE})")
        if t > 1 << w:
            raise DesignError(
                f"level {i}: field GF(2^{w}) too small for t={t} outer symbols (need 2^r~ >= t); "
                "use fewer blocks, a larger k, or fewer levels"
            )
        if delta > t:
            raise DesignError(f"level {i}: outer distance {delta} exceeds the block count t={t}; lower p or raise n")
        outer.append(OuterCodeSpec.for_level(w, t, delta))

    try:
        tables = tuple(leader_table_for(fam.matrices[i], i + 1) for i in range(params.m - 1))
    except InnerCodeError as exc:
        raise DesignError(str(exc)) from exc
    return DesignedScheme(params, fam, tuple(outer), tuple(targets), tables, inverse(fam.matrices[-1]))


def _design_baseline(params: SchemeParams) -> DesignedScheme:
    target = 2 * params.budget + 1
    try:
        fam = build_nested_bch(params.k, [target])
    except InnerCodeError as exc:
        raise DesignError(f"no BCH code of length {params.k} has distance > 2pn = {2 * params.budget}") from exc
    return DesignedScheme(params, fam, (), (Fraction(target),), ())


# --- baseline coset coding -------------------------------------------------


def encode_baseline(y, S: BitMatrix) -> np.ndarray:
    return matvec(S, y)


def _min_weight_in_coset(S: BitMatrix, target: int) -> int:
    cols = S.column_masks()
    for w in range(S.cols + 1):
        for support in combinations(range(S.cols), w):
            acc = 0
            for j in support:
                acc ^= cols[j]
            if acc == target:
                return sum(1 << j for j in support)
    raise ValueError("syndrome is not in the column space of S")


def decode_baseline(s, z, S: BitMatrix, budget: int | None = None) -> np.ndarray:
    """z + v for the lowest-weight v with S v = s + S z, found by exhaustive search."""
    if S.cols > BASELINE_MAX_N:
        raise ValueError(f"exhaustive coset search is limited to n <= {BASELINE_MAX_N}")
    z = as_bits(z, S.cols)
    s = as_bits(s, S.rows)
    target_bits = s ^ matvec(S, z)
    target = sum(int(b) << l for l, b in enumerate(target_bits))
    v = _min_weight_in_coset(S, target)
    if budget is not None and v.bit_count() > budget:
        warnings.warn(f"coset leader weight {v.bit_count()} exceeds the budget {budget}; output unreliable")
    return z ^ np.array([(v >> j) & 1 for j in range(S.cols)], dtype=np.uint8)


# --- concatenated schemes --------------------------------------------------


@dataclass(frozen=True, eq=False)
class CompressedPayload:
    params: SchemeParams
    p1: np.ndarray  # uint8 bits: block-major, syndrome row order within a block
    levels: tuple[np.ndarray, ...] = ()  # outer parity symbols for levels 2..m
    symbol_bits: tuple[int, ...] = ()  # r~_i for levels 2..m

    @property
    def body_bits(self) -> int:
        return self.p1.size + sum(len(lv) * w for lv, w in zip(self.levels, self.symbol_bits))

    def __eq__(self, other):
        return (
            isinstance(other, CompressedPayload)
            and self.params == other.params
            and self.symbol_bits == other.symbol_bits
            and np.array_equal(self.p1, other.p1)
            and len(self.levels) == len(other.levels)
            and all(np.array_equal(a, b) for a, b in zip(self.levels, other.levels))
        )

    __hash__ = None


def _make_payload(scheme: DesignedScheme, p1: np.ndarray, levels) -> CompressedPayload:
    return CompressedPayload(
        scheme.params,
        np.asarray(p1, dtype=np.uint8),
        tuple(np.asarray(lv, dtype=np.int64) for lv in levels),
        tuple(o.field.w for o in scheme.outer),
    )


def _blocks(x, params: SchemeParams) -> np.ndarray:
    x = as_bits(x, params.n)
    padded = np.zeros(params.padded_n, dtype=np.uint8)
    padded[: params.n] = x
    return padded.reshape(params.t, params.k)


def _pack_ints(bits: np.ndarray) -> np.ndarray:
    """Rows of bits -> integers with column l in bit l."""
    return bits.astype(np.int64) @ (np.int64(1) << np.arange(bits.shape[1], dtype=np.int64))


def _unpack_ints(values: np.ndarray, width: int) -> np.ndarray:
    return ((np.asarray(values, dtype=np.int64)[:, None] >> np.arange(width, dtype=np.int64)) & 1).astype(np.uint8)


def level_syndromes(y, scheme: DesignedScheme) -> list[np.ndarray]:
    """True partial syndromes s_j^(i) of y for every level, as integers per block."""
    Y = _blocks(y, scheme.params)
    return [_pack_ints(matmul_rows(S, Y)) for S in scheme.inner.matrices]


def gel_encode(y, scheme: DesignedScheme) -> CompressedPayload:
    params = scheme.params
    if params.variant == "baseline":
        return _make_payload(scheme, encode_baseline(as_bits(y, params.n), scheme.inner.matrices[0]), ())
    Y = _blocks(y, params)
    p1 = matmul_rows(scheme.inner.diffs[0], Y).reshape(-1)
    levels = []
    for i in range(2, params.m + 1):
        u = _pack_ints(matmul_rows(scheme.inner.diffs[i - 1], Y))
        levels.append(lengthened_encode(scheme.outer[i - 2], u))
    return _make_payload(scheme, p1, levels)


@dataclass
class DecodeTrace:
    """Per-level decoder state, for diagnostics and tests."""

    partial_syndromes: list[np.ndarray] = field(default_factory=list)  # s^(i) estimates, i = 1..m
    inner_weights: list[np.ndarray] = field(default_factory=list)  # leader weights at level i-1, i = 2..m
    erasures: list[int] = field(default_factory=list)
    outer_corrections: list[int] = field(default_factory=list)


def gel_decode(payload: CompressedPayload, z, scheme: DesignedScheme, *, verify: bool = True) -> np.ndarray:
    return gel_decode_traced(payload, z, scheme, verify=verify)[0]


def gel_decode_traced(payload: CompressedPayload, z, scheme: DesignedScheme, *, verify: bool = True):
    """Reconstruct y from its payload and a reference z with d_H(y, z) <= E.

    With ``verify`` the estimate is re-encoded and checked against the payload
    and the distance budget; a mismatch raises DecodingError.
    """
    params = scheme.params
    if payload.params != params:
        raise ValueError("payload was produced for a different scheme")
    z = as_bits(z, params.n)
    trace = DecodeTrace()
    if params.variant == "baseline":
        y_hat = decode_baseline(payload.p1, z, scheme.inner.matrices[0])
    else:
        y_hat = _decode_levels(payload, z, scheme, trace)
    if verify:
        dist = hamming_distance(y_hat, z)
        if dist > params.budget:
            raise DecodingError(
                f"decoded vector is at distance {dist} from the reference, above the budget E={params.budget}"
            )
        if gel_encode(y_hat, scheme) != payload:
            raise DecodingError("decoded vector does not reproduce the payload; the reference is out of range")
    return y_hat, trace


def _decode_levels(payload: CompressedPayload, z, scheme: DesignedScheme, trace: DecodeTrace) -> np.ndarray:
    params, fam = scheme.params, scheme.inner
    Zb = _blocks(z, params)
    z_masks = _pack_ints(Zb)
    s_hat = _pack_ints(payload.p1.reshape(params.t, fam.redundancies[0]))
    trace.partial_syndromes.append(s_hat)
    for i in range(2, params.m + 1):
        table = scheme.tables[i - 2]
        syn_z = _pack_ints(matmul_rows(fam.matrices[i - 2], Zb))
        idx = s_hat ^ syn_z
        v = table.leaders[idx]
        wts = table.weights[idx]
        Y_hat = _unpack_ints(z_masks ^ v, params.k)
        a = _pack_ints(matmul_rows(fam.diffs[i - 1], Y_hat))
        erased = None
        if params.variant == "gel5":
            erased = wts > scheme.thresholds[i - 2]
        spec = scheme.outer[i - 2]
        try:
            u_hat = syndrome_shift_decode(spec, a, payload.levels[i - 2], erased)
        except OuterDecodingError as exc:
            raise DecodingError(f"level {i}: {exc}") from exc
        trace.inner_weights.append(wts)
        trace.erasures.append(0 if erased is None else int(erased.sum()))
        trace.outer_corrections.append(int(np.count_nonzero((u_hat != a) & ~(erased if erased is not None else False))))
        s_hat = s_hat | (u_hat << fam.redundancies[i - 2])
        trace.partial_syndromes.append(s_hat)
    S_bits = _unpack_ints(s_hat, params.k)
    Y_hat = matmul_rows(scheme.final_inverse, S_bits)
    return Y_hat.reshape(-1)[: params.n]


# --- payload wire format ---------------------------------------------------


def _header_bytes(params: SchemeParams) -> bytes:
    return _HEADER.pack(
        MAGIC,
        VERSION,
        VARIANT_CODES[params.variant],
        params.padded_n,
        params.n,
        params.k,
        params.m,
        params.p.numerator,
        params.p.denominator,
        bytes(8),
    )


def payload_serialize(payload: CompressedPayload, scheme: DesignedScheme) -> bytes:
    """Header, then the body as one MSB-first bit stream zero-padded to a byte.

    Body order: the p^(1) bits, then for each level i >= 2 its rho_i symbols,
    each written in r~_i bits, most significant bit first.
    """
    if payload.params != scheme.params:
        raise ValueError("payload was produced for a different scheme")
    if payload.p1.size != scheme.p1_bits:
        raise ValueError(f"p1 block has {payload.p1.size} bits, scheme expects {scheme.p1_bits}")
    chunks = [payload.p1.astype(np.uint8)]
    for lv, spec in zip(payload.levels, scheme.outer):
        if len(lv) != spec.rho:
            raise ValueError(f"level block has {len(lv)} symbols, scheme expects {spec.rho}")
        w = spec.field.w
        chunks.append(_unpack_ints(lv, w)[:, ::-1].reshape(-1))
    body = np.concatenate(chunks) if chunks else np.zeros(0, dtype=np.uint8)
    if body.size != scheme.body_bits:
        raise AssertionError("body size disagrees with the rate formula")
    return _header_bytes(scheme.params) + np.packbits(body).tobytes()


def parse_header(data: bytes) -> SchemeParams:
    if len(data) < HEADER_SIZE:
        raise PayloadFormatError(f"payload shorter than the {HEADER_SIZE}-byte header")
    magic, version, vcode, padded_n, n, k, m, p_num, p_den, reserved = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise PayloadFormatError(f"bad magic {magic!r}")
    if version != VERSION:
        raise PayloadFormatError(f"unsupported version {version}")
    variants = {v: name for name, v in VARIANT_CODES.items()}
    if vcode not in variants:
        raise PayloadFormatError(f"unknown variant code {vcode}")
    if reserved != bytes(8):
        raise PayloadFormatError("reserved header bytes must be zero")
    if p_den == 0:
        raise PayloadFormatError("zero denominator in p")
    try:
        params = SchemeParams(n, k, m, Fraction(p_num, p_den), variants[vcode])
    except DesignError as exc:
        raise PayloadFormatError(f"header describes an invalid scheme: {exc}") from exc
    if params.padded_n != padded_n:
        raise PayloadFormatError(f"declared padded length {padded_n} != {params.padded_n}")
    return params


def payload_parse(data: bytes, scheme: DesignedScheme | None = None) -> CompressedPayload:
    params = parse_header(data)
    if scheme is None:
        scheme = design(params)
    elif scheme.params != params:
        raise PayloadFormatError("header parameters disagree with the supplied scheme")
    body = np.frombuffer(data, dtype=np.uint8, offset=HEADER_SIZE)
    need = -(-scheme.body_bits // 8)
    if body.size < need:
        raise PayloadFormatError(f"truncated body: {body.size} bytes, expected {need}")
    if body.size > need:
        raise PayloadFormatError(f"body has {body.size - need} unexpected trailing byte(s)")
    bits = np.unpackbits(body)
    if bits[scheme.body_bits :].any():
        raise PayloadFormatError("nonzero padding bits after the body")
    pos = scheme.p1_bits
    p1 = bits[:pos].copy()
    levels = []
    for spec in scheme.outer:
        w = spec.field.w
        chunk = bits[pos : pos + w * spec.rho].reshape(spec.rho, w)[:, ::-1]
        levels.append(_pack_ints(chunk) if spec.rho else np.zeros(0, dtype=np.int64))
        pos += w * spec.rho
    return _make_payload(scheme, p1, levels)
