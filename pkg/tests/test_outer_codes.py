from itertools import combinations, product

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sicomp.galois import galois_field, default_field
from sicomp.outer_codes import (
    OuterCodeSpec,
    OuterDecodingError,
    lengthened_encode,
    syndrome_shift_decode,
)


def gf_matvec(gf, H, x):
    out = []
    for row in H:
        acc = 0
        for h, v in zip(row.tolist(), x):
            acc ^= gf.mul(int(h), int(v))
        out.append(acc)
    return np.array(out, dtype=np.int64)


def all_solutions(spec, b):
    """Every x with [A | I] x = b (the parity block is determined by the rest)."""
    gf = spec.gf
    kfree = spec.t - spec.rho
    for front in product(range(spec.field.size), repeat=kfree):
        front = np.array(front, dtype=np.int64)
        tail = gf_matvec(gf, spec.parity_map, front) ^ b
        yield np.concatenate([front, tail])


@pytest.mark.parametrize("w,t,delta", [(2, 3, 2), (2, 4, 3), (3, 5, 3), (3, 6, 4), (3, 8, 4), (2, 4, 4)])
def test_code_is_mds(w, t, delta):
    spec = OuterCodeSpec.for_level(w, t, delta)
    zero = np.zeros(spec.rho, dtype=np.int64)
    dmin = min(np.count_nonzero(x) for x in all_solutions(spec, zero) if x.any())
    assert dmin == delta


@pytest.mark.parametrize("w,t,delta", [(3, 7, 3), (3, 8, 4), (4, 16, 5), (7, 64, 6), (7, 128, 11)])
def test_parity_relation(w, t, delta):
    spec = OuterCodeSpec.for_level(w, t, delta)
    gf = spec.gf
    rng = np.random.default_rng(t)
    for _ in range(20):
        u = rng.integers(0, spec.field.size, t)
        p = lengthened_encode(spec, u)
        assert np.array_equal(gf_matvec(gf, spec.parity_check, u), p)


@pytest.mark.parametrize("w,t,delta", [(2, 4, 3), (3, 5, 3), (3, 6, 4), (3, 8, 6)])
def test_decoder_agrees_with_nearest_solution_oracle(w, t, delta):
    spec = OuterCodeSpec.for_level(w, t, delta)
    rho = spec.rho
    rng = np.random.default_rng(w * 100 + t)
    sols_cache = {}
    for _ in range(150):
        u = rng.integers(0, spec.field.size, t)
        b = lengthened_encode(spec, u)
        s = int(rng.integers(0, rho + 1))
        e = int(rng.integers(0, (rho - s) // 2 + 1))
        pos = rng.permutation(t)
        erased = sorted(pos[:s].tolist())
        a = u.copy()
        for j in pos[s : s + e]:
            a[j] ^= int(rng.integers(1, spec.field.size))
        for j in erased:
            a[j] = int(rng.integers(0, spec.field.size))
        keep = np.ones(t, dtype=bool)
        keep[erased] = False
        key = tuple(b)
        sols = sols_cache.setdefault(key, list(all_solutions(spec, b)))
        dist = [np.count_nonzero((x != a) & keep) for x in sols]
        best = min(dist)
        nearest = [x for x, d in zip(sols, dist) if d == best]
        assert len(nearest) == 1 and np.array_equal(nearest[0], u)
        assert np.array_equal(syndrome_shift_decode(spec, a, b, erased), u)


@settings(max_examples=150, deadline=None)
@given(st.data())
def test_errors_and_erasures_within_radius(data):
    w, t, delta = data.draw(st.sampled_from([(7, 64, 4), (7, 64, 6), (4, 16, 5), (5, 32, 7), (3, 7, 7)]))
    spec = OuterCodeSpec.for_level(w, t, delta)
    rho = spec.rho
    seed = data.draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    s = data.draw(st.integers(0, rho))
    e = data.draw(st.integers(0, (rho - s) // 2))
    u = rng.integers(0, spec.field.size, t)
    b = lengthened_encode(spec, u)
    pos = rng.permutation(t)
    a = u.copy()
    for j in pos[s : s + e]:
        a[j] ^= int(rng.integers(1, spec.field.size))
    mask = np.zeros(t, dtype=bool)
    mask[pos[:s]] = True
    a[mask] = rng.integers(0, spec.field.size, s)
    assert np.array_equal(syndrome_shift_decode(spec, a, b, mask), u)


def test_too_many_erasures_flagged():
    spec = OuterCodeSpec.for_level(7, 64, 4)
    u = np.arange(64) % 128
    b = lengthened_encode(spec, u)
    with pytest.raises(OuterDecodingError):
        syndrome_shift_decode(spec, u, b, list(range(4)))


def test_no_redundancy_passthrough():
    spec = OuterCodeSpec.for_level(3, 5, 1)
    u = np.array([1, 2, 3, 4, 5])
    assert lengthened_encode(spec, u).size == 0
    assert np.array_equal(syndrome_shift_decode(spec, u, np.zeros(0, dtype=np.int64)), u)
    with pytest.raises(OuterDecodingError):
        syndrome_shift_decode(spec, u, np.zeros(0, dtype=np.int64), [0])


def test_spec_validation():
    with pytest.raises(ValueError):
        OuterCodeSpec.for_level(3, 9, 2)  # more positions than field elements
    with pytest.raises(ValueError):
        OuterCodeSpec.for_level(3, 5, 6)
    with pytest.raises(ValueError):
        OuterCodeSpec.for_level(3, 5, 0)
    spec = OuterCodeSpec.for_level(3, 8, 3)
    assert spec.extended and spec.locators[-1] == 0
    with pytest.raises(ValueError):
        lengthened_encode(spec, np.full(8, 8))
