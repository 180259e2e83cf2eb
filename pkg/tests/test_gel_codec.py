import struct
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sicomp.galois import matvec
from sicomp.inner_codes import leader_table_for, syndrome_int
from sicomp.gel_codec import (
    HEADER_SIZE,
    DecodingError,
    DesignError,
    PayloadFormatError,
    SchemeParams,
    decode_baseline,
    design,
    encode_baseline,
    gel_decode,
    gel_decode_traced,
    gel_encode,
    level_syndromes,
    parse_fraction,
    parse_header,
    payload_parse,
    payload_serialize,
)

P = Fraction(1, 192)


def flip(y, positions):
    z = y.copy()
    z[list(positions)] ^= 1
    return z


def test_worked_gel4_design():
    s = design(SchemeParams(960, 15, 2, P, "gel4"))
    assert s.params.t == 64 and s.params.budget == 5
    assert s.target_distances == (Fraction(157, 32),)
    assert s.distances[0] == 5
    assert s.inner.redundancies == (8, 15)
    assert s.inner.diff_redundancies == (8, 7)
    assert s.deltas == (6,) and s.rhos == (5,)
    assert s.body_bits == 547
    assert s.outer[0].field.w == 7 and not s.outer[0].extended


def test_worked_gel5_design():
    s = design(SchemeParams(960, 15, 2, P, "gel5"))
    assert s.deltas == (4,) and s.rhos == (3,)
    assert s.body_bits == 8 * 64 + 7 * 3 == 533
    assert s.thresholds == (1,)


def test_second_config_uses_extended_outer_code():
    s4 = design(SchemeParams(1920, 15, 2, P, "gel4"))
    s5 = design(SchemeParams(1920, 15, 2, P, "gel5"))
    assert s4.deltas == (11,) and s5.deltas == (8,)
    assert s4.outer[0].extended and s5.outer[0].extended


@pytest.mark.parametrize(
    "params",
    [
        SchemeParams(15 * 129, 15, 2, P, "gel5"),  # 129 blocks, GF(2^7) has 128 locators
        SchemeParams(60, 15, 2, Fraction(1, 8), "gel5"),  # outer distance beyond t
        SchemeParams(1000, 31, 3, Fraction(1, 200), "gel5"),  # 25-row table
        SchemeParams(960, 15, 5, P, "gel5"),  # levels collapse onto one BCH code
    ],
)
def test_infeasible_designs_raise(params):
    with pytest.raises(DesignError):
        design(params)


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(n=960, k=16, m=2, p=P, variant="gel5"),
        dict(n=960, k=15, m=0, p=P, variant="gel5"),
        dict(n=960, k=15, m=2, p=Fraction(1, 8), variant="gel4"),
        dict(n=960, k=15, m=2, p=Fraction(1, 6), variant="gel5"),
        dict(n=960, k=15, m=2, p=0, variant="gel5"),
        dict(n=960, k=15, m=2, p=P, variant="gel6"),
        dict(n=16, k=15, m=1, p=P, variant="baseline"),
    ],
)
def test_parameter_validation(kwargs):
    with pytest.raises(DesignError):
        SchemeParams(**kwargs)


def test_parse_fraction():
    assert parse_fraction("1/192") == P
    assert parse_fraction("3") == 3
    with pytest.raises(ValueError):
        parse_fraction("1/0")
    with pytest.raises(ValueError):
        parse_fraction("x")


FEASIBLE = [
    SchemeParams(960, 15, 2, P, "gel4"),
    SchemeParams(960, 15, 2, P, "gel5"),
    SchemeParams(1000, 15, 2, P, "gel5"),  # padded to 67 blocks
    SchemeParams(112, 7, 2, Fraction(1, 50), "gel5"),
    SchemeParams(1240, 31, 2, Fraction(1, 50), "gel4"),
    SchemeParams(1240, 31, 2, Fraction(1, 50), "gel5"),
    SchemeParams(60, 15, 3, Fraction(1, 20), "gel5"),  # GF(4) extended outer code
    SchemeParams(120, 15, 1, Fraction(1, 60), "gel5"),
]


@settings(max_examples=120, deadline=None)
@given(st.sampled_from(FEASIBLE), st.integers(0, 2**32 - 1), st.booleans())
def test_roundtrip_and_trace(params, seed, clustered):
    scheme = design(params)
    rng = np.random.default_rng(seed)
    y = rng.integers(0, 2, params.n, dtype=np.uint8)
    E = params.budget
    w = int(rng.integers(0, E + 1))
    if clustered:
        start = int(rng.integers(0, params.n - w + 1))
        pos = range(start, start + w)
    else:
        pos = rng.choice(params.n, w, replace=False)
    z = flip(y, pos)
    payload = gel_encode(y, scheme)
    assert payload.body_bits == scheme.body_bits
    y_hat, trace = gel_decode_traced(payload, z, scheme)
    assert np.array_equal(y_hat, y)
    truth = level_syndromes(y, scheme)
    for i, s_hat in enumerate(trace.partial_syndromes):
        assert np.array_equal(s_hat, truth[i])


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(FEASIBLE[:4]), st.integers(0, 2**32 - 1))
def test_wire_format_roundtrip(params, seed):
    scheme = design(params)
    y = np.random.default_rng(seed).integers(0, 2, params.n, dtype=np.uint8)
    payload = gel_encode(y, scheme)
    blob = payload_serialize(payload, scheme)
    assert len(blob) == HEADER_SIZE + -(-scheme.body_bits // 8)
    assert parse_header(blob) == params
    assert payload_parse(blob) == payload
    assert payload_parse(blob, scheme) == payload


def test_header_layout():
    scheme = design(SchemeParams(1000, 15, 2, P, "gel4"))
    blob = payload_serialize(gel_encode(np.zeros(1000, dtype=np.uint8), scheme), scheme)
    magic, ver, var, padded, n, k, m, pn, pd, res = struct.unpack_from("<4sBBQQIHII8s", blob)
    assert (magic, ver, var, padded, n, k, m, pn, pd, res) == (b"GELC", 1, 4, 1005, 1000, 15, 2, 1, 192, bytes(8))
    assert HEADER_SIZE == 44


def test_malformed_payloads_rejected():
    scheme = design(SchemeParams(960, 15, 2, P, "gel5"))
    blob = payload_serialize(gel_encode(np.ones(960, dtype=np.uint8), scheme), scheme)
    bad = [
        b"XELC" + blob[4:],
        blob[:4] + b"\x02" + blob[5:],
        blob[:5] + b"\x09" + blob[6:],
        blob[:-1],
        blob + b"\x00",
        blob[:-1] + bytes([blob[-1] | 0x01]),  # 533 bits leave 3 padding bits
        blob[:36] + b"\x01" + blob[37:],
        blob[:10],
    ]
    for b in bad:
        with pytest.raises(PayloadFormatError):
            payload_parse(b)
    with pytest.raises(PayloadFormatError):
        payload_parse(blob, design(SchemeParams(960, 15, 2, P, "gel4")))


def test_reference_beyond_budget_is_detected():
    scheme = design(SchemeParams(960, 15, 2, P, "gel5"))
    rng = np.random.default_rng(5)
    y = rng.integers(0, 2, 960, dtype=np.uint8)
    payload = gel_encode(y, scheme)
    detected = 0
    for _ in range(20):
        z = flip(y, rng.choice(960, 40, replace=False))
        try:
            y_hat = gel_decode(payload, z, scheme)
        except DecodingError:
            detected += 1
            continue
        # anything accepted must be consistent with both payload and budget
        assert gel_encode(y_hat, scheme) == payload
        assert np.count_nonzero(y_hat != z) <= scheme.params.budget
    assert detected > 0


def test_decode_rejects_foreign_payload():
    a = design(SchemeParams(960, 15, 2, P, "gel5"))
    b = design(SchemeParams(960, 15, 2, P, "gel4"))
    payload = gel_encode(np.zeros(960, dtype=np.uint8), a)
    with pytest.raises(ValueError):
        gel_decode(payload, np.zeros(960, dtype=np.uint8), b)


def test_input_length_checked():
    scheme = design(SchemeParams(960, 15, 2, P, "gel5"))
    with pytest.raises(ValueError):
        gel_encode(np.zeros(959, dtype=np.uint8), scheme)


def _brute_baseline(s, z, S):
    n = S.cols
    best = None
    for x in range(1 << n):
        v = np.array([(x >> j) & 1 for j in range(n)], dtype=np.uint8)
        if np.array_equal(matvec(S, v), s):
            d = int(np.count_nonzero(v != z))
            if best is None or d < best[0]:
                best = (d, v)
    return best


def test_baseline_scheme_and_brute_force():
    scheme = design(SchemeParams(7, 7, 1, Fraction(1, 7), "baseline"))
    S = scheme.inner.matrices[0]
    assert scheme.body_bits == 3 and scheme.inner.distances[0] >= 3
    rng = np.random.default_rng(1)
    for _ in range(40):
        y = rng.integers(0, 2, 7, dtype=np.uint8)
        z = flip(y, rng.choice(7, 1, replace=False))
        s = encode_baseline(y, S)
        assert np.array_equal(decode_baseline(s, z, S), y)
        assert _brute_baseline(s, z, S)[0] == 1
        assert np.array_equal(gel_decode(gel_encode(y, scheme), z, scheme), y)


def test_baseline_warns_when_over_budget():
    scheme = design(SchemeParams(15, 15, 1, Fraction(2, 15), "baseline"))
    S = scheme.inner.matrices[0]
    table = leader_table_for(S)
    y = np.zeros(15, dtype=np.uint8)
    rng = np.random.default_rng(0)
    while True:  # a weight-3 pattern whose coset leader also has weight 3
        z = flip(y, rng.choice(15, 3, replace=False))
        if table.weights[syndrome_int(S, z)] == 3:
            break
    with pytest.warns(UserWarning):
        decode_baseline(encode_baseline(y, S), z, S, budget=2)
