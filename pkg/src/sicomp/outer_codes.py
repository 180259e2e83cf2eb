"""Reed-Solomon outer codes for the differential syndrome layers.

The level code H has length t and redundancy rho = delta - 1 over GF(2^w).
Position j carries locator alpha^j; when t = 2^w the last position carries
the locator 0 (singly-extended code), which keeps the code MDS.

H is used in systematic form H = [A | I_rho], where A = V2^{-1} V1 and
V = [V1 | V2] is the Vandermonde matrix V[l, j] = X_j^l, l = 0..rho-1.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .galois import FieldSpec, GaloisField, default_field, galois_field


class OuterDecodingError(RuntimeError):
    """Errors and erasures exceed the outer code's guaranteed radius."""


@dataclass(frozen=True, eq=False)
class OuterCodeSpec:
    field: FieldSpec
    t: int
    delta: int
    rho: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "rho", self.delta - 1)
        if self.t < 1:
            raise ValueError("outer code length must be positive")
        if self.delta < 1:
            raise ValueError(f"outer distance must be >= 1, got {self.delta}")
        if self.t > self.field.size:
            raise ValueError(
                f"GF(2^{self.field.w}) has {self.field.size} locators, too few for {self.t} outer symbols"
            )
        if self.delta > self.t:
            raise ValueError(f"outer distance {self.delta} exceeds the code length {self.t}")

    @classmethod
    def for_level(cls, w: int, t: int, delta: int) -> OuterCodeSpec:
        return cls(default_field(w), t, delta)

    @cached_property
    def gf(self) -> GaloisField:
        return galois_field(self.field)

    @cached_property
    def extended(self) -> bool:
        return self.t == self.field.size

    @cached_property
    def locators(self) -> np.ndarray:
        n_pow = self.t - 1 if self.extended else self.t
        locs = [self.gf.alpha_pow(j) for j in range(n_pow)]
        if self.extended:
            locs.append(0)
        return np.array(locs, dtype=np.int64)

    @cached_property
    def vandermonde(self) -> np.ndarray:
        """V[l, j] = X_j^l (with 0^0 = 1)."""
        V = np.zeros((self.rho, self.t), dtype=np.int64)
        gf = self.gf
        for j, X in enumerate(self.locators.tolist()):
            for l in range(self.rho):
                V[l, j] = gf.pow(X, l)
        return V

    @cached_property
    def parity_inverse(self) -> np.ndarray:
        """V2^{-1} for the last rho columns of V."""
        return _mat_inv(self.gf, self.vandermonde[:, self.t - self.rho :])

    @cached_property
    def parity_map(self) -> np.ndarray:
        """A in H = [A | I]; column j is the parity of the unit input e_j, j < t - rho."""
        return _mat_mul(self.gf, self.parity_inverse, self.vandermonde[:, : self.t - self.rho])

    @cached_property
    def parity_check(self) -> np.ndarray:
        """Systematic H = [A | I_rho] (rho x t)."""
        return np.hstack([self.parity_map, np.eye(self.rho, dtype=np.int64)])

    def check_symbols(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=np.int64)
        if u.ndim != 1:
            raise ValueError("symbol vector must be 1-D")
        if u.size and (u.min() < 0 or u.max() >= self.field.size):
            raise ValueError(f"symbols must lie in GF(2^{self.field.w})")
        return u


def _mat_mul(gf: GaloisField, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    out = np.zeros((A.shape[0], B.shape[1]), dtype=np.int64)
    for i in range(A.shape[0]):
        for l in range(A.shape[1]):
            if A[i, l]:
                out[i] ^= gf.mul_vec(B[l], A[i, l])
    return out


def _mat_vec(gf: GaloisField, A: np.ndarray, x: np.ndarray) -> np.ndarray:
    if A.shape[0] == 0:
        return np.zeros(0, dtype=np.int64)
    prod = gf.mul_vec(A, np.broadcast_to(x, A.shape))
    return np.bitwise_xor.reduce(prod, axis=1) if A.shape[1] else np.zeros(A.shape[0], dtype=np.int64)


def _mat_inv(gf: GaloisField, M: np.ndarray) -> np.ndarray:
    n = M.shape[0]
    a = np.hstack([M.astype(np.int64), np.eye(n, dtype=np.int64)])
    for col in range(n):
        nz = np.flatnonzero(a[col:, col])
        if nz.size == 0:
            raise ValueError("singular matrix over GF(2^w)")
        p = col + nz[0]
        a[[col, p]] = a[[p, col]]
        a[col] = gf.mul_vec(a[col], gf.inv(int(a[col, col])))
        for r in range(n):
            if r != col and a[r, col]:
                a[r] ^= gf.mul_vec(a[col], int(a[r, col]))
    return a[:, n:]


def lengthened_encode(spec: OuterCodeSpec, u) -> np.ndarray:
    """Parity p with [H, I] (u || p) = 0, i.e. p = A u_front + u_back."""
    u = spec.check_symbols(u)
    if u.size != spec.t:
        raise ValueError(f"expected {spec.t} information symbols, got {u.size}")
    if spec.rho == 0:
        return np.zeros(0, dtype=np.int64)
    gf = spec.gf
    front, back = u[: spec.t - spec.rho], u[spec.t - spec.rho :]
    sigma = _mat_vec(gf, spec.vandermonde[:, : spec.t - spec.rho], front)
    return _mat_vec(gf, spec.parity_inverse, sigma) ^ back


def syndromes(spec: OuterCodeSpec, a, b) -> np.ndarray:
    """V a - V2 b: the Vandermonde syndrome of e = a - x for any x with H x = b."""
    gf = spec.gf
    V = spec.vandermonde
    return _mat_vec(gf, V, a) ^ _mat_vec(gf, V[:, spec.t - spec.rho :], b)


def _errata_locator_search(gf: GaloisField, synd: list[int], locs: list[int], erased: list[int]):
    """Berlekamp-Massey with erasure initialisation, Chien search and Forney values.

    ``synd[l] = sum_j e_j X_j^l`` over nonzero locators ``locs``. Returns
    {position: value} or None when the syndromes admit no errata pattern
    within 2e + s <= len(synd).
    """
    nsyn = len(synd)
    s = len(erased)
    if s > nsyn:
        return None
    lam = [1]
    for j in erased:
        lam = gf.poly_mul(lam, [1, locs[j]])
    B = lam[:]
    L = s
    for r in range(s + 1, nsyn + 1):
        delta = 0
        for i in range(min(len(lam), r)):
            if lam[i]:
                delta ^= gf.mul(lam[i], synd[r - 1 - i])
        xB = [0] + B
        if delta == 0:
            B = xB
            continue
        T = lam + [0] * max(0, len(xB) - len(lam))
        for i, c in enumerate(xB):
            T[i] ^= gf.mul(delta, c)
        if 2 * L <= r + s - 1:
            inv = gf.inv(delta)
            B = [gf.mul(inv, c) for c in lam]
            L = r + s - L
        else:
            B = xB
        lam = T
    while len(lam) > 1 and lam[-1] == 0:
        lam.pop()
    deg = len(lam) - 1
    if deg != L or 2 * (L - s) + s > nsyn:
        return None
    roots = [j for j, X in enumerate(locs) if gf.poly_eval(lam, gf.inv(X)) == 0]
    if len(roots) != deg:
        return None
    omega = gf.poly_mul(lam, synd)[:nsyn]
    dlam = [lam[i] if i % 2 == 1 else 0 for i in range(1, len(lam))]
    values = {}
    for j in roots:
        xinv = gf.inv(locs[j])
        den = gf.poly_eval(dlam, xinv)
        if den == 0:
            return None
        val = gf.mul(locs[j], gf.div(gf.poly_eval(omega, xinv), den))
        if val:
            values[j] = val
    return values


def _solve(spec: OuterCodeSpec, synd: np.ndarray, erased: list[int]) -> np.ndarray | None:
    """Error vector e with V e = synd and 2e + s <= rho, or None."""
    gf = spec.gf
    t, rho = spec.t, spec.rho
    locs = spec.locators.tolist()
    s_list = [int(x) for x in synd]
    candidates = []
    if spec.extended:
        zpos = t - 1
        nz_locs = locs[:zpos]
        nz_erased = [j for j in erased if j != zpos]
        if zpos not in erased:
            # hypothesis: the zero-locator symbol is correct
            candidates.append(("plain", _errata_locator_search(gf, s_list, nz_locs, nz_erased)))
        # hypothesis: the zero-locator symbol is erased or wrong; drop the l = 0 syndrome
        shifted = _errata_locator_search(gf, s_list[1:], nz_locs, nz_erased)
        if shifted is not None:
            vals = {j: gf.div(v, nz_locs[j]) for j, v in shifted.items()}
            rest = s_list[0]
            for v in vals.values():
                rest ^= v
            if rest:
                vals[zpos] = rest
            candidates.append(("shifted", vals))
    else:
        candidates.append(("plain", _errata_locator_search(gf, s_list, locs, erased)))

    erased_set = set(erased)
    for _, vals in candidates:
        if vals is None:
            continue
        e = np.zeros(t, dtype=np.int64)
        for j, v in vals.items():
            e[j] = v
        n_err = sum(1 for j in vals if j not in erased_set)
        if 2 * n_err + len(erased_set) > rho:
            continue
        if np.array_equal(_mat_vec(gf, spec.vandermonde, e), synd):
            return e
    return None


def syndrome_shift_decode(spec: OuterCodeSpec, a, b, erasures=None) -> np.ndarray:
    """Return x with H x = b that is nearest to a off the erased positions.

    ``erasures`` is a boolean mask or an iterable of positions; symbols of
    ``a`` at erased positions are ignored. Raises OuterDecodingError when
    2 * errors + erasures exceeds delta - 1.
    """
    a = spec.check_symbols(a).copy()
    b = spec.check_symbols(b)
    if a.size != spec.t or b.size != spec.rho:
        raise ValueError(f"expected {spec.t} + {spec.rho} symbols, got {a.size} + {b.size}")
    if erasures is None:
        erased: list[int] = []
    else:
        er = np.asarray(erasures)
        if er.dtype == bool:
            if er.size != spec.t:
                raise ValueError("erasure mask length must equal t")
            erased = np.flatnonzero(er).tolist()
        else:
            erased = sorted({int(j) for j in er.tolist()})
            if erased and not (0 <= erased[0] and erased[-1] < spec.t):
                raise ValueError("erasure position out of range")
    a[erased] = 0
    if spec.rho == 0:
        if erased:
            raise OuterDecodingError(f"{len(erased)} erasure(s) but the outer code has no redundancy")
        return a
    synd = syndromes(spec, a, b)
    if not synd.any():
        return a
    e = _solve(spec, synd, erased)
    if e is None:
        raise OuterDecodingError(
            f"outer decoding failed: {len(erased)} erasure(s) plus unknown errors exceed "
            f"radius of GF(2^{spec.field.w}) code with delta={spec.delta}"
        )
    return a ^ e
