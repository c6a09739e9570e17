"""Sieve-backed arithmetic functions and global scale parameters."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from .errors import InvalidArgument

# Above this many entries the smallest-prime-factor sieve runs segment by segment.
SEGMENT_THRESHOLD = 1 << 26
SEGMENT_SIZE = 1 << 24

INT64_MAX = (1 << 63) - 1


def small_primes(limit: int) -> np.ndarray:
    """All primes p <= limit (plain Eratosthenes)."""
    limit = int(limit)
    if limit < 2:
        return np.zeros(0, dtype=np.int64)
    flags = np.ones(limit + 1, dtype=bool)
    flags[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if flags[p]:
            flags[p * p :: p] = False
    return np.flatnonzero(flags).astype(np.int64)


def primes_below(w: float) -> list[int]:
    """Primes p with p < w (strict)."""
    if w <= 2:
        return []
    top = math.ceil(w) - 1 if float(w).is_integer() else math.floor(w)
    return [int(p) for p in small_primes(top) if p < w]


def _spf_segment(lo: int, hi: int, base: np.ndarray) -> np.ndarray:
    seg = np.zeros(hi - lo, dtype=np.uint32)
    for p in base:
        p = int(p)
        if p * p >= hi:
            break
        start = max(p * p, -(-lo // p) * p)
        view = seg[start - lo :: p]
        view[view == 0] = p
    idx = np.arange(lo, hi, dtype=np.int64)
    unset = (seg == 0) & (idx >= 2)
    seg[unset] = idx[unset].astype(np.uint32)
    return seg


@dataclass(frozen=True, eq=False)
class FactorTable:
    """Smallest-prime-factor table for 0 <= n <= limit (spf[0]=0, spf[1]=1)."""

    limit: int
    spf: np.ndarray = field(repr=False)

    def _check(self, n: int) -> int:
        n = int(n)
        if not 1 <= n <= self.limit:
            raise InvalidArgument(f"n={n} outside [1, {self.limit}]")
        return n

    def factorize(self, n: int) -> list[tuple[int, int]]:
        n = self._check(n)
        out: list[tuple[int, int]] = []
        while n > 1:
            p = int(self.spf[n])
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out.append((p, e))
        return out

    # Dense arrays indexed by n, computed once per table.  Each block
    # [2^j, 2^{j+1}) only reads entries n // spf[n] < 2^j, which are already final.
    @cached_property
    def _multiplicative(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        L = self.limit
        spf = self.spf.astype(np.int64)
        mu = np.zeros(L + 1, dtype=np.int8)
        phi = np.zeros(L + 1, dtype=np.int64)
        pp = np.zeros(L + 1, dtype=bool)
        mu[1] = 1
        phi[1] = 1
        lo = 2
        while lo <= L:
            hi = min(2 * lo, L + 1)
            n = np.arange(lo, hi, dtype=np.int64)
            p = spf[lo:hi]
            r = n // p
            same = spf[r] == p
            mu[lo:hi] = np.where(same, 0, -mu[r])
            phi[lo:hi] = phi[r] * np.where(same, p, p - 1)
            pp[lo:hi] = (r == 1) | (same & pp[r])
            lo = hi
        return mu, phi, pp

    @cached_property
    def mobius_array(self) -> np.ndarray:
        return self._multiplicative[0]

    @cached_property
    def phi_array(self) -> np.ndarray:
        return self._multiplicative[1]

    @cached_property
    def is_prime_power_array(self) -> np.ndarray:
        return self._multiplicative[2]

    @cached_property
    def is_prime_array(self) -> np.ndarray:
        n = np.arange(self.limit + 1)
        out = self.spf.astype(np.int64) == n
        out[:2] = False
        return out

    @cached_property
    def von_mangoldt_array(self) -> np.ndarray:
        lam = np.zeros(self.limit + 1, dtype=np.float64)
        pp = self.is_prime_power_array
        lam[pp] = np.log(self.spf[pp].astype(np.float64))
        return lam

    @cached_property
    def primes(self) -> np.ndarray:
        return np.flatnonzero(self.is_prime_array).astype(np.int64)


def build_factor_table(limit: int) -> FactorTable:
    limit = int(limit)
    if limit < 2:
        raise InvalidArgument(f"factor table limit must be >= 2, got {limit}")
    if limit >= 1 << 32:
        raise InvalidArgument("limit exceeds the 32-bit spf storage")
    base = small_primes(math.isqrt(limit) + 1)
    total = limit + 1
    step = total if total <= SEGMENT_THRESHOLD else SEGMENT_SIZE
    parts = [_spf_segment(lo, min(lo + step, total), base) for lo in range(0, total, step)]
    spf = np.concatenate(parts) if len(parts) > 1 else parts[0]
    spf[0] = 0
    spf[1] = 1
    spf.setflags(write=False)
    return FactorTable(limit=limit, spf=spf)


def moebius(t: FactorTable, n: int) -> int:
    n = t._check(n)
    return int(t.mobius_array[n])


def von_mangoldt(t: FactorTable, n: int) -> float:
    n = t._check(n)
    if n == 1 or not t.is_prime_power_array[n]:
        return 0.0
    return math.log(int(t.spf[n]))


def euler_phi(t: FactorTable, n: int) -> int:
    n = t._check(n)
    return int(t.phi_array[n])


def primorial(w: float) -> int:
    """Product of the primes p < w; raises OverflowError past signed 64-bit."""
    if w < 0:
        raise InvalidArgument("primorial needs w >= 0")
    out = 1
    for p in primes_below(w):
        out *= p
        if out > INT64_MAX:
            raise OverflowError(f"primorial({w}) exceeds 64-bit integer range")
    return out


def cramer_constant(w: float) -> float:
    """prod_{p<w} p/(p-1), multiplied in increasing p."""
    c = 1.0
    for p in primes_below(w):
        c *= p / (p - 1)
    return c


def q_parameter(N: float) -> float:
    if N <= 1:
        raise InvalidArgument(f"q_parameter needs N > 1, got {N}")
    return math.exp(math.log(N) ** 0.1)


def prime_factors(n: int) -> list[int]:
    """Distinct prime factors by trial division (for moduli like W, q)."""
    n = abs(int(n))
    out = []
    p = 2
    while p * p <= n:
        if n % p == 0:
            out.append(p)
            while n % p == 0:
                n //= p
        p += 1 if p == 2 else 2
    if n > 1:
        out.append(n)
    return out


def is_squarefree(n: int) -> bool:
    n = abs(int(n))
    p = 2
    while p * p <= n:
        if n % (p * p) == 0:
            return False
        if n % p == 0:
            n //= p
        p += 1
    return True


def totient(n: int) -> int:
    n = int(n)
    out = n
    for p in prime_factors(n):
        out = out // p * (p - 1)
    return out


_CONFIG_KEYS = ("N", "Q", "w", "z", "W", "b")


@dataclass(frozen=True)
class GlobalParams:
    N: float
    Q: float
    w: float
    z: float
    W: int
    b: int
    q_overridden: bool = False

    @classmethod
    def create(cls, N: float, Q: float | None = None, w: float | None = None,
               z: float | None = None, W: int | None = None, b: int = 1) -> "GlobalParams":
        if N <= 1:
            raise InvalidArgument("N must exceed 1")
        overridden = Q is not None
        Q = q_parameter(N) if Q is None else float(Q)
        if w is None:
            w = max(2.0, math.sqrt(math.log(math.log(N))) if N > math.e else 2.0)
            w = min(w, Q)
        z = Q if z is None else float(z)
        W = primorial(w) if W is None else int(W)
        params = cls(N=float(N), Q=Q, w=float(w), z=z, W=W, b=int(b), q_overridden=overridden)
        params.validate()
        if primorial(Q) <= 2:
            warnings.warn(f"Q={Q:.4g} gives P(Q)={primorial(Q)}; sieving is trivial at this scale",
                          stacklevel=2)
        return params

    def validate(self) -> None:
        if not (2 <= self.w <= self.z <= self.Q):
            raise InvalidArgument(
                f"need 2 <= w <= z <= Q, got w={self.w}, z={self.z}, Q={self.Q}")
        if self.W < 1:
            raise InvalidArgument("W must be positive")
        if not 1 <= self.b <= self.W or math.gcd(self.b, self.W) != 1:
            raise InvalidArgument(f"b={self.b} must lie in [W] and be coprime to W={self.W}")

    def as_dict(self) -> dict:
        return {"N": self.N, "Q": self.Q, "w": self.w, "z": self.z, "W": self.W,
                "b": self.b, "Q_overridden": self.q_overridden}


def parse_key_values(text: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidArgument(f"line {lineno}: expected key=value, got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key] = value
    return out


def load_global_params(path: str | Path) -> GlobalParams:
    kv = parse_key_values(Path(path).read_text())
    unknown = sorted(set(kv) - set(_CONFIG_KEYS))
    if unknown:
        raise InvalidArgument(f"unknown config key(s): {', '.join(unknown)}")
    if "N" not in kv:
        raise InvalidArgument("config is missing N")
    return GlobalParams.create(
        N=float(kv["N"]),
        Q=float(kv["Q"]) if "Q" in kv else None,
        w=float(kv["w"]) if "w" in kv else None,
        z=float(kv["z"]) if "z" in kv else None,
        W=int(kv["W"]) if "W" in kv else None,
        b=int(kv.get("b", 1)),
    )
