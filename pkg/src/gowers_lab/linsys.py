"""Affine-linear systems: local factors, volumes, singular series and weighted counts."""
from __future__ import annotations

import io
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np
from scipy.optimize import linprog
from scipy.stats import qmc

from .arith import FactorTable, build_factor_table, small_primes
from .errors import InvalidArgument, ResourceError
from .models import SiegelConfig, cramer_values, lambda_siegel
from .parallel import exact_sum, fixed_chunks, ordered_map

DEFAULT_BUDGET = 10**8
LOCAL_BUDGET = 10**7
TAIL_CONSTANT = 4  # tail bound 4 t^2 sum_{p >= P0} p^-2


# --- systems and bodies -----------------------------------------------------------

@dataclass(frozen=True)
class AffineSystem:
    """Forms psi_i(n) = coeffs_i . n + const_i on Z^d."""

    coeffs: tuple[tuple[int, ...], ...]
    consts: tuple[int, ...]

    def __post_init__(self):
        if not self.coeffs:
            raise InvalidArgument("a system needs at least one form")
        d = len(self.coeffs[0])
        if d == 0 or any(len(c) != d for c in self.coeffs):
            raise InvalidArgument("all forms need the same positive dimension")
        if len(self.consts) != len(self.coeffs):
            raise InvalidArgument("one constant per form")
        for i, c in enumerate(self.coeffs):
            if not any(c):
                raise InvalidArgument(f"form {i} has a zero coefficient vector")
        for i, j in itertools.combinations(range(self.t), 2):
            if not any(self._minors(i, j)):
                raise InvalidArgument(f"forms {i} and {j} are parallel")

    @classmethod
    def from_forms(cls, forms) -> "AffineSystem":
        coeffs = tuple(tuple(int(a) for a in f[0]) for f in forms)
        consts = tuple(int(f[1]) for f in forms)
        return cls(coeffs, consts)

    @property
    def d(self) -> int:
        return len(self.coeffs[0])

    @property
    def t(self) -> int:
        return len(self.coeffs)

    @property
    def L(self) -> int:
        return max(abs(a) for c in self.coeffs for a in c)

    def _minors(self, i: int, j: int) -> list[int]:
        u, v = self.coeffs[i], self.coeffs[j]
        return [u[a] * v[b] - u[b] * v[a] for a, b in itertools.combinations(range(self.d), 2)] \
            if self.d > 1 else [0]

    def matrix(self) -> np.ndarray:
        return np.array(self.coeffs, dtype=np.int64)

    def offsets(self) -> np.ndarray:
        return np.array(self.consts, dtype=np.int64)

    def evaluate(self, pts: np.ndarray) -> np.ndarray:
        """Form values, shape (len(pts), t)."""
        return np.asarray(pts, dtype=np.int64) @ self.matrix().T + self.offsets()

    def constant_bound_ok(self, N: int) -> bool:
        return all(abs(c) <= self.L * N for c in self.consts)

    def exceptional_primes(self) -> set[int]:
        """Primes dividing a coefficient or every 2x2 minor of some pair."""
        out: set[int] = set()
        for c in self.coeffs:
            out.update(_prime_divisors(math.gcd(*c)))
        for i, j in itertools.combinations(range(self.t), 2):
            out.update(_prime_divisors(math.gcd(*self._minors(i, j))))
        return out


def _prime_divisors(n: int) -> list[int]:
    from .arith import prime_factors
    return prime_factors(n) if n > 1 else []


def ap_system(k: int) -> AffineSystem:
    """n1 + j n2 for j = 0..k-1."""
    if k < 2:
        raise InvalidArgument("k must be >= 2")
    return AffineSystem(tuple((1, j) for j in range(k)), (0,) * k)


@dataclass(frozen=True)
class ConvexBody:
    """{x : a . x <= c for every half-space (a, c)}."""

    normals: tuple[tuple[float, ...], ...]
    offsets: tuple[float, ...]

    @classmethod
    def from_halfspaces(cls, hs) -> "ConvexBody":
        return cls(tuple(tuple(float(a) for a in h[0]) for h in hs),
                   tuple(float(h[1]) for h in hs))

    @classmethod
    def box(cls, lows, highs) -> "ConvexBody":
        d = len(lows)
        hs = []
        for i in range(d):
            e = [0.0] * d
            e[i] = -1.0
            hs.append((tuple(e), -float(lows[i])))
            e = [0.0] * d
            e[i] = 1.0
            hs.append((tuple(e), float(highs[i])))
        return cls.from_halfspaces(hs)

    @property
    def d(self) -> int:
        return len(self.normals[0])

    def A(self) -> np.ndarray:
        return np.array(self.normals, dtype=np.float64)

    def c(self) -> np.ndarray:
        return np.array(self.offsets, dtype=np.float64)

    def contains(self, pts: np.ndarray, tol: float = 1e-9) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=np.float64))
        return np.all(pts @ self.A().T <= self.c() + tol, axis=1)

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        d = self.d
        lo, hi = np.zeros(d), np.zeros(d)
        for i in range(d):
            for sign, store in ((1.0, lo), (-1.0, hi)):
                obj = np.zeros(d)
                obj[i] = sign
                res = linprog(obj, A_ub=self.A(), b_ub=self.c(), bounds=[(None, None)] * d,
                              method="highs")
                if res.status == 3:
                    raise InvalidArgument("convex body is unbounded")
                if res.status == 2:
                    raise InvalidArgument("convex body is empty")
                if res.status != 0:
                    raise InvalidArgument(f"bounding-box LP failed: {res.message}")
                store[i] = sign * res.fun
        return lo, hi


def ap_region(N: float, k: int) -> ConvexBody:
    """{x >= 0, y >= 0, x + (k-1) y <= N}: increasing k-APs inside [0, N]."""
    return ConvexBody.from_halfspaces([((-1.0, 0.0), 0.0), ((0.0, -1.0), 0.0),
                                       ((1.0, float(k - 1)), float(N))])


def parse_system(text: str) -> tuple[AffineSystem, ConvexBody | None]:
    """Lines 'psi a1 .. ad c' and 'hs a1 .. ad c'; '#' starts a comment."""
    forms, hs = [], []
    for lineno, raw in enumerate(text.splitlines(), 1):
        parts = raw.split("#", 1)[0].split()
        if not parts:
            continue
        tag, nums = parts[0], parts[1:]
        if tag not in ("psi", "hs") or len(nums) < 2:
            raise InvalidArgument(f"line {lineno}: expected 'psi ...' or 'hs ...', got {raw!r}")
        try:
            vals = [float(x) for x in nums]
        except ValueError as exc:
            raise InvalidArgument(f"line {lineno}: {exc}") from None
        if tag == "psi":
            if any(v != int(v) for v in vals):
                raise InvalidArgument(f"line {lineno}: form coefficients must be integers")
            forms.append(([int(v) for v in vals[:-1]], int(vals[-1])))
        else:
            hs.append((vals[:-1], vals[-1]))
    if not forms:
        raise InvalidArgument("no 'psi' lines found")
    system = AffineSystem.from_forms(forms)
    body = ConvexBody.from_halfspaces(hs) if hs else None
    if body is not None and body.d != system.d:
        raise InvalidArgument("half-space dimension differs from the system dimension")
    return system, body


def load_system(path: str | Path) -> tuple[AffineSystem, ConvexBody | None]:
    return parse_system(Path(path).read_text())


# --- local factors ------------------------------------------------------------------

def _nonvanishing_count(sys: AffineSystem, p: int, budget: int) -> int:
    """#{n in (Z/p)^d : psi_i(n) != 0 mod p for all i}, solving for one pivot coordinate."""
    A = sys.matrix() % p
    c = sys.offsets() % p
    d, t = sys.d, sys.t
    # pivot: the coordinate with the most forms depending on it
    j = int(np.argmax((A != 0).sum(axis=0)))
    others = [i for i in range(d) if i != j]
    rows = p ** len(others)
    if rows * t > budget:
        raise ResourceError(f"exact local factor at p={p} needs {rows * t} steps > {budget}")
    total = 0
    inv = np.array([pow(int(a), -1, p) if a else 0 for a in A[:, j]], dtype=np.int64)
    dep = A[:, j] != 0
    chunk = max(1, (1 << 18) // max(t, 1))
    for lo, hi in fixed_chunks(rows, chunk):
        if others:
            pts = np.stack(np.unravel_index(np.arange(lo, hi), (p,) * len(others)), axis=-1)
            rest = (pts @ A[:, others].T + c) % p
        else:
            rest = np.broadcast_to(c, (hi - lo, t))
        dead = np.any((~dep) & (rest == 0), axis=1)
        roots = np.where(dep, (-rest * inv) % p, -1)
        roots.sort(axis=1)
        distinct = np.sum((roots >= 0) & np.concatenate(
            [np.ones((hi - lo, 1), dtype=bool), roots[:, 1:] != roots[:, :-1]], axis=1), axis=1)
        total += int(np.sum(np.where(dead, 0, p - distinct)))
    return total


def _local_factor_truncated(sys: AffineSystem, p: int) -> tuple[float, float]:
    """Inclusion-exclusion to pairs for a non-exceptional prime, with its error bound."""
    t = sys.t
    prob = 1 - t / p + math.comb(t, 2) / p**2
    scale = (p / (p - 1)) ** t
    return prob * scale, math.comb(t, 3) / p**2 * scale


def local_factor(sys: AffineSystem, p: int, budget: int = LOCAL_BUDGET) -> float:
    """E_{n in (Z/p)^d} prod_i (p/(p-1)) 1_{psi_i(n) != 0}."""
    p = int(p)
    if p < 2:
        raise InvalidArgument("p must be prime")
    try:
        count = _nonvanishing_count(sys, p, budget)
    except ResourceError:
        if p in sys.exceptional_primes():
            raise ResourceError(
                f"p={p} is exceptional for this system and p^(d-1) exceeds the budget; "
                "use kap_local_factor or raise the budget") from None
        return _local_factor_truncated(sys, p)[0]
    return float(Fraction(count * p**sys.t, p**sys.d * (p - 1) ** sys.t))


def kap_local_factor(k: int, p: int) -> float:
    if k < 2:
        raise InvalidArgument("k must be >= 2")
    scale = (p / (p - 1)) ** (k - 1)
    return scale / p if p <= k else (1 - (k - 1) / p) * scale


def _is_ap_system(sys: AffineSystem) -> int | None:
    if sys.d == 2 and all(c == 0 for c in sys.consts) and \
            list(sys.coeffs) == [(1, j) for j in range(sys.t)]:
        return sys.t
    return None


@dataclass(frozen=True)
class SingularSeries:
    P0: int
    value: float
    tail_bound: float
    factors: list = field(default_factory=list, repr=False)


def prime_inverse_square_tail(P0: int) -> float:
    """Upper bound for sum_{p >= P0} p^-2: exact up to 100 P0, then sum_{n >= 100 P0} n^-2."""
    top = 100 * P0
    ps = small_primes(top - 1)
    ps = ps[ps >= P0].astype(np.float64)
    return exact_sum((1.0 / ps**2).tolist()) + 1.0 / (top - 1)


def singular_series(sys: AffineSystem, P0: int, budget: int = LOCAL_BUDGET,
                    use_closed_form: bool = True) -> SingularSeries:
    """prod_{p < P0} beta_p with tail bound 4 t^2 sum_{p >= P0} p^-2."""
    P0 = int(P0)
    if P0 < 2:
        raise InvalidArgument("P0 must be >= 2")
    k = _is_ap_system(sys) if use_closed_form else None
    factors = []
    value = 1.0
    for p in small_primes(P0 - 1).tolist():
        b = kap_local_factor(k, p) if k is not None else local_factor(sys, p, budget)
        factors.append((p, b))
        value *= b
        if b == 0.0:
            return SingularSeries(P0, 0.0, 0.0, factors)
    tail = TAIL_CONSTANT * sys.t**2 * prime_inverse_square_tail(P0)
    if sys.t == 1:
        tail = 0.0  # a single form has beta_p = 1 exactly for every p
    return SingularSeries(P0, value, tail, factors)


def singular_series_oracle(k: int, P0: int) -> float:
    """Direct product of the k-AP closed form (independent of local_factor)."""
    out = 1.0
    for p in small_primes(P0 - 1).tolist():
        out *= kap_local_factor(k, p)
    return out


# --- Archimedean volumes --------------------------------------------------------------

def _positivity_halfspaces(sys: AffineSystem) -> tuple[np.ndarray, np.ndarray]:
    # psi_i > 0  <=>  -coeffs . x <= const (boundary has measure zero)
    return -sys.matrix().astype(np.float64), sys.offsets().astype(np.float64)


def _clip_polygon(poly: list[tuple[float, float]], a: np.ndarray, c: float):
    out = []
    n = len(poly)
    for i in range(n):
        P, Q = poly[i], poly[(i + 1) % n]
        fp = a[0] * P[0] + a[1] * P[1] - c
        fq = a[0] * Q[0] + a[1] * Q[1] - c
        if fp <= 0:
            out.append(P)
        if (fp < 0 < fq) or (fq < 0 < fp):
            s = fp / (fp - fq)
            out.append((P[0] + s * (Q[0] - P[0]), P[1] + s * (Q[1] - P[1])))
    return out


def _polygon_area(poly) -> float:
    if len(poly) < 3:
        return 0.0
    s = 0.0
    for i in range(len(poly)):
        x0, y0 = poly[i]
        x1, y1 = poly[(i + 1) % len(poly)]
        s += x0 * y1 - x1 * y0
    return abs(s) / 2


def _exact_volume(A: np.ndarray, c: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> float:
    if len(lo) == 1:
        left, right = lo[0], hi[0]
        for a, b in zip(A[:, 0], c):
            if a > 0:
                right = min(right, b / a)
            elif a < 0:
                left = max(left, b / a)
            elif b < 0:
                return 0.0
        return max(0.0, right - left)
    poly = [(lo[0], lo[1]), (hi[0], lo[1]), (hi[0], hi[1]), (lo[0], hi[1])]
    for a, b in zip(A, c):
        poly = _clip_polygon(poly, a, b)
        if not poly:
            return 0.0
    return _polygon_area(poly)


def _qmc_volume(A, c, lo, hi, samples: int, seed: int, replicates: int = 8):
    d = len(lo)
    per = max(1, samples // replicates)
    width = hi - lo
    box = float(np.prod(width))
    means = []
    for r in range(replicates):
        u = qmc.Halton(d=d, scramble=True, seed=seed + r).random(per)
        x = lo + u * width
        means.append(float(np.mean(np.all(x @ A.T <= c, axis=1))))
    means = np.array(means)
    return box * float(means.mean()), box * float(means.std(ddof=1)) / math.sqrt(replicates)


def archimedean_volume(sys: AffineSystem, body: ConvexBody, samples: int = 1 << 14,
                       method: str = "auto", seed: int = 0) -> tuple[float, float]:
    """vol(body cap {psi_i > 0}) and its standard error (0 when exact)."""
    if body.d != sys.d:
        raise InvalidArgument("body and system dimensions differ")
    if samples < 1000:
        raise InvalidArgument("samples must be >= 1000")
    lo, hi = body.bounding_box()
    Pa, Pc = _positivity_halfspaces(sys)
    A = np.vstack([body.A(), Pa])
    c = np.concatenate([body.c(), Pc])
    if method == "auto":
        method = "exact" if sys.d <= 2 else "qmc"
    if method == "exact":
        if sys.d > 2:
            raise InvalidArgument("exact volumes are available for d <= 2 only")
        return _exact_volume(A, c, lo, hi), 0.0
    if method == "qmc":
        return _qmc_volume(A, c, lo, hi, samples, seed)
    raise InvalidArgument(f"unknown volume method {method!r}")


# --- weighted counts ------------------------------------------------------------------

WEIGHTS = ("lambda", "lambda_prime", "cramer", "siegel")


def weight_table(weight: str, M: int, z: float | None = None, cfg: SiegelConfig | None = None,
                 table: FactorTable | None = None) -> np.ndarray:
    """Weight values at 0..M (index m); every weight is extended by zero to m <= 0."""
    M = max(int(M), 2)
    out = np.zeros(M + 1)
    if weight in ("lambda", "lambda_prime"):
        t = table if table is not None and table.limit >= M else build_factor_table(M)
        if weight == "lambda":
            out[:] = t.von_mangoldt_array[: M + 1]
        else:
            out[:] = np.where(t.is_prime_array[: M + 1], np.log(np.maximum(np.arange(M + 1), 1)), 0.0)
    elif weight == "cramer":
        if z is None:
            raise InvalidArgument("the cramer weight needs z")
        out[1:] = cramer_values(z, np.arange(1, M + 1))
    elif weight == "siegel":
        if cfg is None:
            raise InvalidArgument("the siegel weight needs a SiegelConfig")
        out[1:] = lambda_siegel(cfg, M).values
    else:
        raise InvalidArgument(f"unknown weight {weight!r}; choose from {', '.join(WEIGHTS)}")
    out[0] = 0.0
    return out


def lattice_box(body: ConvexBody) -> tuple[np.ndarray, np.ndarray]:
    lo, hi = body.bounding_box()
    return np.ceil(lo - 1e-9).astype(np.int64), np.floor(hi + 1e-9).astype(np.int64)


def count_weighted(sys: AffineSystem, body: ConvexBody, weight: str = "lambda",
                   z: float | None = None, cfg: SiegelConfig | None = None,
                   budget: int = DEFAULT_BUDGET, workers: int | None = None,
                   table: FactorTable | None = None) -> float:
    """sum over lattice points n of the body of prod_i weight(psi_i(n)), by enumeration."""
    if body.d != sys.d:
        raise InvalidArgument("body and system dimensions differ")
    lo, hi = lattice_box(body)
    sizes = hi - lo + 1
    if np.any(sizes <= 0):
        return 0.0
    npts = int(np.prod(sizes.astype(object)))
    if npts > budget:
        raise ResourceError(f"body has {npts} lattice points in its box > budget {budget}")
    corners = np.array(list(itertools.product(*zip(lo, hi))), dtype=np.int64)
    M = int(np.max(sys.evaluate(corners)))
    wt = weight_table(weight, max(M, 2), z=z, cfg=cfg, table=table)
    A, c = body.A(), body.c()
    Cm, Co = sys.matrix(), sys.offsets()
    d = sys.d
    # enumerate coordinates 0..d-2 explicitly; the last one is an interval per point
    mid = [np.arange(lo[i], hi[i] + 1) for i in range(1, d - 1)]
    mid_grid = np.stack(np.meshgrid(*mid, indexing="ij"), axis=-1).reshape(-1, d - 2) \
        if d > 2 else np.zeros((1, 0), dtype=np.int64)
    a_last = A[:, d - 1]

    def last_range(head: np.ndarray) -> tuple[int, int]:
        slack = c - A[:, : d - 1] @ head
        top, bot = float(hi[d - 1]), float(lo[d - 1])
        for a, s_ in zip(a_last, slack):
            if a > 0:
                top = min(top, s_ / a)
            elif a < 0:
                bot = max(bot, s_ / a)
            elif s_ < -1e-9:
                return 1, 0
        return math.ceil(bot - 1e-9), math.floor(top + 1e-9)

    def weighted_sum(pts: np.ndarray) -> float:
        vals = pts @ Cm.T + Co
        ok = np.all(vals > 0, axis=1)
        return float(np.sum(np.prod(wt[np.where(ok[:, None], vals, 0)], axis=1)))

    def rows(bounds) -> float:
        a, b = bounds
        parts = []
        for x0 in range(lo[0] + a, lo[0] + b):
            for m in mid_grid:
                head = np.concatenate([[x0], m]).astype(np.float64)
                u, v = last_range(head)
                if u <= v:
                    tail = np.arange(u, v + 1)
                    pts = np.empty((len(tail), d), dtype=np.int64)
                    pts[:, : d - 1] = head.astype(np.int64)
                    pts[:, d - 1] = tail
                    parts.append(weighted_sum(pts))
        return exact_sum(parts)

    if d == 1:
        pts = np.arange(lo[0], hi[0] + 1)[:, None]
        return weighted_sum(pts[np.all(pts @ A.T <= c + 1e-9, axis=1)])
    return exact_sum(ordered_map(rows, fixed_chunks(int(sizes[0]), 64), workers))


def count_ap3_weighted(N: int, weight: str = "lambda", z: float | None = None,
                       cfg: SiegelConfig | None = None, table: FactorTable | None = None) -> float:
    """count_weighted for the 3-AP system on ap_region(N, 3), by FFT.

    Lattice points with y >= 1 are increasing progressions; the y = 0 row adds sum w^3.
    """
    wt = weight_table(weight, N, z=z, cfg=cfg, table=table)[: N + 1]
    return ap3_weighted_sum(wt) + float(np.sum(wt**3))


def predict(sys: AffineSystem, body: ConvexBody, P0: int, samples: int = 1 << 14,
            seed: int = 0) -> tuple[float, float]:
    """(volume * singular series partial product, tail bound on the series)."""
    vol, _ = archimedean_volume(sys, body, samples=samples, seed=seed)
    ss = singular_series(sys, P0)
    return vol * ss.value, ss.tail_bound


# --- prime progressions ------------------------------------------------------------------

def count_prime_aps(N: int, k: int, workers: int | None = None,
                    table: FactorTable | None = None, budget: int = 10**10) -> int:
    """Number of increasing k-term progressions of primes inside [N]."""
    N, k = int(N), int(k)
    if k < 2:
        raise InvalidArgument("k must be >= 2")
    if N < 2:
        return 0
    t = table if table is not None and table.limit >= N else build_factor_table(N)
    isp = t.is_prime_array[: N + 1]
    primes = np.flatnonzero(isp)
    P = len(primes)
    if k == 2:
        return P * (P - 1) // 2
    if P * P > budget:
        raise ResourceError(f"pi(N)^2 = {P * P} pairs exceed budget {budget}")

    def block(bounds) -> int:
        a, b = bounds
        total = 0
        for i in range(a, b):
            p = primes[i]
            q = primes[i + 1 :]
            d = q - p
            d = d[p + (k - 1) * d <= N]
            alive = np.ones(len(d), dtype=bool)
            for j in range(2, k):
                alive &= isp[p + j * d]
            total += int(np.count_nonzero(alive))
        return total

    return sum(ordered_map(block, fixed_chunks(P, 256), workers))


def ap3_weighted_sum(w: np.ndarray) -> float:
    """sum over increasing 3-APs a < b < c (indices) of w(a) w(b) w(c), by FFT."""
    w = np.asarray(w, dtype=np.float64)
    n = len(w)
    size = 1 << int(2 * n - 1).bit_length()
    F = np.fft.rfft(w, size)
    conv = np.fft.irfft(F * F, size)[: 2 * n - 1]
    b = np.arange(n)
    return float(np.sum(w * (conv[2 * b] - w * w)) / 2)


def log_weighted_ap3_mass(N: int) -> float:
    """sum over increasing 3-APs x < x+y < x+2y in [2, N] of prod 1/log."""
    w = np.zeros(N + 1)
    w[2:] = 1 / np.log(np.arange(2, N + 1))
    return ap3_weighted_sum(w)


@dataclass(frozen=True)
class PrimeAPCensus:
    N: int
    count: int
    series: float
    tail_bound: float
    prediction: float
    crude_prediction: float
    weighted_count: float
    weighted_prediction: float

    @property
    def ratio(self) -> float:
        return self.count / self.prediction if self.prediction else float("nan")

    @property
    def weighted_ratio(self) -> float:
        return self.weighted_count / self.weighted_prediction if self.weighted_prediction else float("nan")


def prime_ap3_census(N: int, P0: int = 10**4, workers: int | None = None,
                     table: FactorTable | None = None) -> PrimeAPCensus:
    """Exact 3-AP prime count against singular-series predictions.

    prediction:          S * sum over 3-APs of 1/(log a log b log c)
    crude_prediction:    S * (N^2/4) / log^3 N
    weighted comparison: Lambda'-weighted count against S * vol
    """
    t = table if table is not None and table.limit >= N else build_factor_table(max(N, 2))
    sys = ap_system(3)
    ss = singular_series(sys, P0)
    count = count_prime_aps(N, 3, workers=workers, table=t)
    lam1 = np.where(t.is_prime_array[: N + 1], np.log(np.maximum(np.arange(N + 1), 1)), 0.0)
    weighted = ap3_weighted_sum(lam1)
    vol, _ = archimedean_volume(sys, ap_region(N, 3))
    return PrimeAPCensus(
        N=N, count=count, series=ss.value, tail_bound=ss.tail_bound,
        prediction=ss.value * log_weighted_ap3_mass(N),
        crude_prediction=ss.value * N * N / 4 / math.log(N) ** 3,
        weighted_count=weighted, weighted_prediction=ss.value * vol)


def shifted_prime_ap_count(A, k: int, W: int, b: int, table: FactorTable | None = None) -> float:
    """(1/log N) sum_{0 <= n, 1 <= d <= N/W} prod_j 1_{A'}(n + j d) Lambda'(W d + 1).

    A is a boolean mask with A[i] <-> i + 1 in the set; A' = {n >= 0 : Wn + b in A}.
    """
    A = np.asarray(A, dtype=bool)
    k, W, b = int(k), int(W), int(b)
    if k < 3:
        raise InvalidArgument("k must be >= 3")
    if W < 1:
        raise InvalidArgument("W must be positive")
    N = len(A)
    if N < 2:
        return 0.0
    M = N // W
    n = np.arange(M + 1)
    m = W * n + b
    Ap = np.zeros(M + 1, dtype=bool)
    ok = (m >= 1) & (m <= N)
    Ap[ok] = A[m[ok] - 1]
    if not Ap.any():
        return 0.0
    t = table if table is not None and table.limit >= W * M + 1 else build_factor_table(W * M + 1)
    isp = t.is_prime_array
    parts = []
    for d in range(1, M + 1):
        q = W * d + 1
        if not isp[q]:
            continue
        span = (k - 1) * d
        if span > M:
            break
        alive = Ap[: M + 1 - span].copy()
        for j in range(1, k):
            alive &= Ap[j * d : M + 1 - span + j * d]
        cnt = int(np.count_nonzero(alive))
        if cnt:
            parts.append(cnt * math.log(q))
    return exact_sum(parts) / math.log(N)


# --- results CSV -----------------------------------------------------------------------

RESULT_COLUMNS = ("system-id", "N", "count", "prediction", "ratio", "tail-bound")


def results_csv(rows, path: str | Path | None = None) -> str:
    buf = io.StringIO()
    buf.write(",".join(RESULT_COLUMNS) + "\n")
    for r in rows:
        ratio = r["count"] / r["prediction"] if r["prediction"] else float("nan")
        buf.write(f"{r['system-id']},{r['N']},{r['count']!r},{r['prediction']!r},"
                  f"{ratio!r},{r['tail-bound']!r}\n")
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text
