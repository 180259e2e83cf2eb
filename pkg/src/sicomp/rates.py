"""Closed-form compression rates and rate-curve generation.

``rate_gel4``/``rate_gel5`` evaluate the asymptotic expressions built from
Gilbert-Varshamov inner redundancies and outer redundancy equal to the outer
distance. ``realized_rate`` reports the bits actually emitted by a designed
BCH + Reed-Solomon scheme, whose outer redundancy is one less than its distance.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

CSV_HEADER = ("p", "rate", "variant", "m")
GEL_FACTORS = {"gel4": 4, "gel5": 3}


def entropy(x) -> float:
    """Binary entropy in bits, with H(0) = H(1) = 0."""
    x = float(x)
    if not 0.0 <= x <= 1.0 or math.isnan(x):
        raise ValueError(f"entropy argument must lie in [0, 1], got {x}")
    if x == 0.0 or x == 1.0:
        return 0.0
    return -x * math.log2(x) - (1.0 - x) * math.log2(1.0 - x)


def _check_fraction(name: str, x, hi: float = 1.0) -> float:
    x = float(x)
    if not 0.0 <= x <= hi:
        raise ValueError(f"{name} must lie in [0, {hi}], got {x}")
    return x


def rate_c1_upper(p, p_prime) -> float:
    """H(p) + H(p'), the hash-the-input rate without its epsilon slack."""
    return entropy(_check_fraction("p", p)) + entropy(_check_fraction("p'", p_prime))


def rate_converse(p, p_prime) -> float:
    """H(p + p'), the lower bound for simple-hashing schemes."""
    s = _check_fraction("p", p) + _check_fraction("p'", p_prime)
    if s > 1.0:
        raise ValueError("p + p' must not exceed 1")
    return entropy(s)


def rate_c2_upper(p_prime, delta) -> float:
    """2 H(p') + H(delta), the hash-the-reference rate without its epsilon slack."""
    return 2 * entropy(_check_fraction("p'", p_prime)) + entropy(_check_fraction("delta", delta))


def _entropy_array(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    inner = (x > 0) & (x < 1)
    xs = np.where(inner, x, 0.5)
    return np.where(inner, -xs * np.log2(xs) - (1 - xs) * np.log2(1 - xs), 0.0)


def _gel_points(p: float, m: int, c: int) -> np.ndarray:
    """x_i = c p + (i/m)(1/2 - c p) for i = 0..m, written so x_m = 1/2 exactly."""
    cp = c * p
    i = np.arange(m + 1, dtype=float)
    return (cp * (m - i) + 0.5 * i) / m


def gel_rate_terms(p, m: int, variant: str) -> tuple[float, np.ndarray, np.ndarray]:
    """(H(x_1), [H(x_i) - H(x_{i-1})], [c p / x_{i-1}]) for i = 2..m."""
    if variant not in GEL_FACTORS:
        raise ValueError(f"variant must be one of {tuple(GEL_FACTORS)}")
    c = GEL_FACTORS[variant]
    p = float(p)
    if not 0.0 <= p or not c * p < 0.5:
        raise ValueError(f"{variant} needs 0 <= p and {c}p < 1/2, got p = {p}")
    if m < 1:
        raise ValueError("m must be >= 1")
    x = _gel_points(p, m, c)
    h = _entropy_array(x)
    h[1] = entropy(x[1])  # keeps rate(p=0) identical to the scalar H(1/(2m))
    return float(h[1]), h[2:] - h[1:-1], c * p / x[1:-1]


def _gel_rate(p, m: int, variant: str) -> float:
    head, diffs, weights = gel_rate_terms(p, m, variant)
    return math.fsum([head, *(diffs * weights).tolist()])


def rate_gel4(p, m: int) -> float:
    return _gel_rate(p, m, "gel4")


def rate_gel5(p, m: int) -> float:
    return _gel_rate(p, m, "gel5")


RATE_FUNCTIONS = {"gel4": rate_gel4, "gel5": rate_gel5}


def realized_rate(scheme) -> float:
    """Emitted body bits of a designed scheme divided by the true input length."""
    return scheme.body_bits / scheme.params.n


@dataclass(frozen=True)
class RateCurve:
    variant: str
    m: int
    points: tuple[tuple[float, float], ...]

    def __post_init__(self):
        ps = [pt[0] for pt in self.points]
        if any(b <= a for a, b in zip(ps, ps[1:])):
            raise ValueError("curve abscissae must be strictly increasing")
        if any(not 0.0 <= r <= 1.0 for _, r in self.points):
            raise ValueError("rates must lie in [0, 1]")

    @property
    def p(self) -> np.ndarray:
        return np.array([pt[0] for pt in self.points])

    @property
    def rate(self) -> np.ndarray:
        return np.array([pt[1] for pt in self.points])


def parse_grid(spec: str) -> np.ndarray:
    """START:STOP:COUNT -> COUNT evenly spaced points, both ends included."""
    parts = spec.split(":")
    if len(parts) != 3:
        raise ValueError(f"grid must be START:STOP:COUNT, got {spec!r}")
    start, stop = (float(Fraction(s)) for s in parts[:2])
    count = int(parts[2])
    if count < 0:
        raise ValueError("grid count must be non-negative")
    return np.linspace(start, stop, count)


def emit_curve(variant: str, m: int, p_grid) -> RateCurve:
    if variant not in RATE_FUNCTIONS:
        raise ValueError(f"variant must be one of {tuple(RATE_FUNCTIONS)}")
    f = RATE_FUNCTIONS[variant]
    return RateCurve(variant, m, tuple((float(p), f(p, m)) for p in p_grid))


def write_curves_csv(curves, fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for curve in curves:
        for p, r in curve.points:
            w.writerow([f"{p:.12g}", f"{r:.12g}", curve.variant, curve.m])
