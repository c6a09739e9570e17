"""Gowers uniformity norms on finite abelian groups, on Z, on intervals and cosets.

Conventions
-----------
Group functions are numpy arrays; an array of shape (M1, ..., Mr) is a function
on Z/M1 x ... x Z/Mr.  The family index of omega in {0,1}^k is
sum_i omega_i 2^(i-1), and entries with |omega| odd are conjugated.

"raised" always means the 2^k-th power of the norm.  Group quantities are
normalized averages; Z quantities are unnormalized sums.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .arith import prime_factors, is_squarefree
from .errors import InvalidArgument, NumericConsistencyError, ResourceError
from .parallel import exact_complex_sum, exact_sum, fixed_chunks, ordered_map
from .signals import CYCLIC, INTERVAL, ArithSignal

DEFAULT_BUDGET = 5 * 10**7
# Rows per batched FFT block: a block holds about this many complex entries.
_BLOCK_ENTRIES = 1 << 20
_CLAMP = 1e-12


@dataclass(frozen=True)
class NormResult:
    """value = raised ** (1 / 2^k); normalization is ||1||^(2^k) in the unnormalized norm."""

    value: float
    raised: float
    k: int
    normalization: int


def _result(raised: float, k: int, normalization: int) -> NormResult:
    raised = float(raised)
    if raised < 0:
        if raised < -_CLAMP:
            raise NumericConsistencyError(f"raised norm {raised!r} is negative beyond round-off")
        raised = 0.0
    return NormResult(value=raised ** (1.0 / 2**k), raised=raised, k=k, normalization=normalization)


def _check_k(k: int, lo: int = 1) -> int:
    k = int(k)
    if k < lo:
        raise InvalidArgument(f"k must be >= {lo}, got {k}")
    return k


def _next_pow2(n: int) -> int:
    return 1 << max(0, int(n - 1).bit_length())


# --- translation helpers -------------------------------------------------------

def _coords(shape: tuple[int, ...]) -> np.ndarray:
    return np.stack(np.unravel_index(np.arange(math.prod(shape)), shape), axis=-1)


def _translate(shape: tuple[int, ...], coords: np.ndarray, h_flat: np.ndarray) -> np.ndarray:
    """Flat indices of x + h for every x (columns) and every h in h_flat (rows)."""
    if len(shape) == 1:
        M = shape[0]
        return (np.arange(M)[None, :] + h_flat[:, None]) % M
    hc = np.stack(np.unravel_index(h_flat, shape), axis=-1)
    pts = (coords[None, :, :] + hc[:, None, :]) % np.array(shape)
    return np.ravel_multi_index(tuple(np.moveaxis(pts, -1, 0)), shape)


def _u2_raised_batch(block: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Normalized U^2 raised norm of each row of a (B, |G|) block."""
    size = math.prod(shape)
    axes = tuple(range(1, len(shape) + 1))
    F = np.fft.fftn(block.reshape((block.shape[0],) + shape), axes=axes) / size
    a2 = (F.real**2 + F.imag**2).reshape(block.shape[0], -1)
    return np.sum(a2 * a2, axis=1)


# --- fast group engine ---------------------------------------------------------

def raised_group_fast(f, k: int, workers: int | None = None) -> float:
    """Normalized ||f||^(2^k) via the derivative recursion with a Fourier base case."""
    k = _check_k(k)
    f = np.asarray(f)
    shape = f.shape
    size = f.size
    if k == 1:
        m = complex(np.mean(f))
        return m.real**2 + m.imag**2
    if k == 2:
        return float(_u2_raised_batch(f.reshape(1, -1), shape)[0])
    flat = f.reshape(-1)
    coords = _coords(shape)
    # Enumerate the outer k-3 shifts explicitly; the innermost shift is batched.
    prefixes = list(np.ndindex(*([size] * (k - 3))))
    rows = max(1, _BLOCK_ENTRIES // size)
    h_chunks = fixed_chunks(size, rows)

    def per_prefix(prefix) -> list[float]:
        g = flat
        for h in prefix:
            g = g * np.conj(g[_translate(shape, coords, np.array([h]))[0]])
        vals: list[float] = []
        for lo, hi in h_chunks:
            idx = _translate(shape, coords, np.arange(lo, hi))
            block = g[None, :] * np.conj(g[idx])
            vals.extend(_u2_raised_batch(block, shape).tolist())
        return vals

    parts = ordered_map(per_prefix, prefixes, workers)
    total = exact_sum(v for part in parts for v in part)
    return total / size ** (k - 2)


def inner_group_fast(family: Sequence, k: int) -> complex:
    """Normalized Gowers inner product E_{x,h} prod_w C^{|w|} f_w(x + w.h)."""
    k = _check_k(k)
    fam = [np.asarray(f) for f in family]
    if len(fam) != 2**k:
        raise InvalidArgument(f"family must have 2^k = {2**k} members, got {len(fam)}")
    shape = fam[0].shape
    if any(f.shape != shape for f in fam):
        raise InvalidArgument("family members live on different groups")
    if k == 1:
        return complex(np.mean(fam[0]) * np.conj(np.mean(fam[1])))
    size = math.prod(shape)
    if k == 2:
        F = [np.fft.fftn(f) / size for f in fam]
        return complex(np.sum(F[0] * np.conj(F[1]) * np.conj(F[2]) * F[3]))
    coords = _coords(shape)
    half = 2 ** (k - 1)
    flat = [f.reshape(-1) for f in fam]
    vals = []
    for h in range(size):
        idx = _translate(shape, coords, np.array([h]))[0]
        sub = [(flat[j] * np.conj(flat[j + half][idx])).reshape(shape) for j in range(half)]
        vals.append(inner_group_fast(sub, k - 1))
    return exact_complex_sum(vals) / size


# --- naive group engine --------------------------------------------------------

def _omega_table(k: int) -> list[tuple[int, ...]]:
    return [tuple((j >> i) & 1 for i in range(k)) for j in range(2**k)]


def inner_group_naive(family: Sequence, k: int, budget: int = DEFAULT_BUDGET) -> complex:
    """Direct enumeration of all (x, h) in G^(k+1)."""
    k = _check_k(k)
    arrs = [np.asarray(f) for f in family]
    if len(arrs) != 2**k:
        raise InvalidArgument(f"family must have 2^k = {2**k} members")
    shape = arrs[0].shape
    size = math.prod(shape)
    total = size ** (k + 1)
    if total > budget:
        raise ResourceError(f"naive enumeration needs |G|^(k+1) = {total} > budget {budget}")
    real = not any(np.iscomplexobj(a) for a in arrs)
    dtype = np.float64 if real else np.complex128
    coords = _coords(shape)
    # shifted[j][t] = C^{|w_j|} f_j(. + t) as a row, for every translate t
    all_t = _translate(shape, coords, np.arange(size))
    shifted = []
    for j, om in enumerate(_omega_table(k)):
        a = arrs[j].reshape(-1).astype(dtype)
        shifted.append((np.conj(a) if sum(om) % 2 else a)[all_t])
    # flat index of omega . h for every h-tuple is built from pairwise sums
    add = _translate(shape, coords, np.arange(size))  # add[t, x] = flat(x + t)
    n_h = size**k
    rows = max(1, _BLOCK_ENTRIES // size)
    partials = []
    for lo, hi in fixed_chunks(n_h, rows):
        hs = np.stack(np.unravel_index(np.arange(lo, hi), (size,) * k), axis=-1)
        prod = None
        for j, om in enumerate(_omega_table(k)):
            off = np.zeros(hi - lo, dtype=np.int64)
            for i, bit in enumerate(om):
                if bit:
                    off = add[hs[:, i], off]
            vals = shifted[j][off]
            prod = vals if prod is None else np.multiply(prod, vals, out=prod)
        partials.append(complex(np.sum(prod)))
    return exact_complex_sum(partials) / total


def raised_group_naive(f, k: int, budget: int = DEFAULT_BUDGET) -> float:
    f = np.asarray(f)
    return inner_group_naive([f] * 2**k, k, budget).real


def raised_u2_autocorrelation(f) -> float:
    """||f||^4_{U^2(Z/M)} = E_h |E_x f(x) conj f(x + h)|^2, summed directly in O(M^2)."""
    f = np.asarray(f, dtype=np.complex128).reshape(-1)
    M = len(f)
    x = np.arange(M)
    vals = []
    for lo, hi in fixed_chunks(M, max(1, _BLOCK_ENTRIES // M)):
        shifted = np.conj(f[(x[None, :] + np.arange(lo, hi)[:, None]) % M])
        corr = (f[None, :] * shifted).mean(axis=1)
        vals.extend((corr.real**2 + corr.imag**2).tolist())
    return exact_sum(vals) / M


# --- signal-level group API ----------------------------------------------------

def _cyclic_values(f: ArithSignal) -> np.ndarray:
    if f.domain.kind != CYCLIC:
        raise InvalidArgument(f"expected a signal on Z/MZ, got domain {f.domain.kind}")
    return f.values


def norm_group_naive(f: ArithSignal, k: int, budget: int = DEFAULT_BUDGET) -> NormResult:
    vals = _cyclic_values(f)
    M = len(vals)
    return _result(raised_group_naive(vals, k, budget), k, M ** (k + 1))


def norm_group_fast(f: ArithSignal, k: int, workers: int | None = None) -> NormResult:
    k = _check_k(k, 2)
    vals = _cyclic_values(f)
    M = len(vals)
    return _result(raised_group_fast(vals, k, workers), k, M ** (k + 1))


def gowers_inner(family: Sequence[ArithSignal]) -> complex:
    k = int(round(math.log2(len(family)))) if family else 0
    if len(family) < 2 or 2**k != len(family):
        raise InvalidArgument("family size must be a power of two >= 2")
    doms = {f.domain for f in family}
    if len(doms) != 1 or family[0].domain.kind != CYCLIC:
        raise InvalidArgument("family members must share one cyclic domain")
    return inner_group_fast([f.values for f in family], k)


# --- Z and interval norms ------------------------------------------------------

def _dense_on_z(f: ArithSignal) -> np.ndarray:
    pts = f.points()
    if len(pts) == 0:
        return np.zeros(0)
    vals = f.values
    lo, hi = int(pts.min()), int(pts.max())
    dense = np.zeros(hi - lo + 1, dtype=vals.dtype)
    dense[pts - lo] = vals
    return dense


def _trim(g: np.ndarray) -> np.ndarray:
    nz = np.flatnonzero(g)
    if len(nz) == 0:
        return g[:0]
    return g[nz[0] : nz[-1] + 1]


def _z_embedding_size(length: int, k: int) -> int:
    # next power of two >= 4kL: no parallelepiped meeting the support wraps around
    return _next_pow2(4 * k * length)


def _raised_z_u2_many(rows: list[np.ndarray]) -> list[float]:
    """Unnormalized U^2(Z) raised norms, batching rows with a common FFT size."""
    out = [0.0] * len(rows)
    by_size: dict[int, list[int]] = {}
    for i, g in enumerate(rows):
        if len(g):
            by_size.setdefault(_z_embedding_size(len(g), 2), []).append(i)
    for M0, idxs in sorted(by_size.items()):
        per_block = max(1, _BLOCK_ENTRIES // M0)
        for lo, hi in fixed_chunks(len(idxs), per_block):
            sel = idxs[lo:hi]
            block = np.zeros((len(sel), M0), dtype=np.complex128)
            for r, i in enumerate(sel):
                block[r, : len(rows[i])] = rows[i]
            F = np.fft.fft(block, axis=1)
            a2 = F.real**2 + F.imag**2
            vals = np.sum(a2 * a2, axis=1) / M0
            for r, i in enumerate(sel):
                out[i] = float(vals[r])
    return out


def raised_z(g, k: int, workers: int | None = None) -> float:
    """Unnormalized ||g||^(2^k)_{U~^k(Z)} for g on consecutive integers."""
    k = _check_k(k)
    g = _trim(np.asarray(g))
    L = len(g)
    if L == 0:
        return 0.0
    if k == 1:
        s = complex(np.sum(g))
        return s.real**2 + s.imag**2
    if k == 2:
        return _raised_z_u2_many([g])[0]
    # h and -h give conjugate-translate derivatives with equal norms.
    def derivative(h: int) -> np.ndarray:
        return g[: L - h] * np.conj(g[h:])

    if k == 3:
        blocks = fixed_chunks(L, 256)

        def run(bounds):
            lo, hi = bounds
            return _raised_z_u2_many([derivative(h) for h in range(lo, hi)])
    else:
        blocks = fixed_chunks(L, 16)

        def run(bounds):
            lo, hi = bounds
            return [raised_z(derivative(h), k - 1, workers=1) for h in range(lo, hi)]

    vals = [v for part in ordered_map(run, blocks, workers) for v in part]
    return vals[0] + 2.0 * exact_sum(vals[1:])


def raised_z_naive(g, k: int, budget: int = DEFAULT_BUDGET) -> float:
    """Direct enumeration over n in support and h in (-L, L)^k."""
    k = _check_k(k)
    g = np.asarray(g)
    dtype = np.complex128 if np.iscomplexobj(g) else np.float64
    g = _trim(g.astype(dtype))
    L = len(g)
    if L == 0:
        return 0.0
    n_h = (2 * L - 1) ** k
    if n_h * L > budget:
        raise ResourceError(f"naive Z enumeration needs {n_h * L} terms > budget {budget}")
    omegas = _omega_table(k)
    # zero padding wide enough for every n + omega.h
    pad = k * L
    gp = np.zeros(L + 2 * pad, dtype=dtype)
    gp[pad : pad + L] = g
    n = np.arange(L) + pad
    rows = max(1, _BLOCK_ENTRIES // L)
    partials = []
    for lo, hi in fixed_chunks(n_h, rows):
        hs = np.stack(np.unravel_index(np.arange(lo, hi), (2 * L - 1,) * k), axis=-1) - (L - 1)
        prod = np.ones((hi - lo, L), dtype=dtype)
        for om in omegas:
            off = hs @ np.array(om, dtype=np.int64)
            vals = gp[n[None, :] + off[:, None]]
            prod *= np.conj(vals) if sum(om) % 2 else vals
        partials.append(complex(np.sum(prod)))
    return exact_complex_sum(partials).real


def inner_z(family: Sequence, k: int) -> complex:
    """Unnormalized inner product over Z^(k+1) for arrays on a common [0, L)."""
    fam = [np.asarray(f) for f in family]
    L = max(len(f) for f in fam)
    M0 = _z_embedding_size(L, k)
    padded = []
    for f in fam:
        p = np.zeros(M0, dtype=np.complex128)
        p[: len(f)] = f
        padded.append(p)
    return inner_group_fast(padded, k) * M0 ** (k + 1)


def _box_count_small(N: int, k: int) -> int:
    # C_0(L) = L;  C_k(L) = sum_{|h|<L} C_{k-1}(L - |h|)
    row = list(range(N + 1))
    for _ in range(k):
        prefix = [0] * (N + 1)
        for j in range(1, N + 1):
            prefix[j] = prefix[j - 1] + row[j]
        row = [0] + [row[L] + 2 * prefix[L - 1] for L in range(1, N + 1)]
    return row[N]


def box_count_interval(N: int, k: int) -> int:
    """Exact ||1_[N]||^(2^k)_{U~^k(Z)}: a polynomial of degree k+1 in N."""
    N, k = int(N), _check_k(k)
    if N <= 0:
        return 0
    if N <= k + 2:
        return _box_count_small(N, k)
    xs = list(range(k + 2))
    ys = [_box_count_small(x, k) for x in xs]
    total = Fraction(0)
    for i, xi in enumerate(xs):
        term = Fraction(ys[i])
        for j, xj in enumerate(xs):
            if j != i:
                term *= Fraction(N - xj, xi - xj)
        total += term
    assert total.denominator == 1
    return int(total)


def unnormalized_raised_z(f: ArithSignal, k: int, workers: int | None = None) -> float:
    return raised_z(_dense_on_z(f), k, workers)


def unnormalized_norm_z(f: ArithSignal, k: int, workers: int | None = None) -> float:
    raised = unnormalized_raised_z(f, k, workers)
    return max(raised, 0.0) ** (1.0 / 2**k)


def norm_interval(f: ArithSignal, k: int, workers: int | None = None) -> NormResult:
    """||f||_{U^k([N])} for f on the interval domain [N]."""
    if f.domain.kind != INTERVAL:
        raise InvalidArgument("norm_interval needs a signal on [N]")
    k = _check_k(k)
    N = len(f)
    box = box_count_interval(N, k)
    if box == 0:
        return NormResult(0.0, 0.0, k, 0)
    return _result(raised_z(f.values, k, workers) / box, k, box)


def coset_values(f: ArithSignal, a: int, d: int) -> np.ndarray:
    """Values of n -> f(a + d n) on the consecutive n where a + dn lies in f's support range."""
    if d < 1:
        raise InvalidArgument("d must be >= 1")
    pts = f.points()
    if len(pts) == 0:
        return np.zeros(0)
    lo = int(pts.min())
    dense = _dense_on_z(f)
    start = lo + ((a - lo) % d)
    return dense[start - lo :: d]


def coset_norm(f: ArithSignal, a: int, d: int, k: int) -> float:
    g = coset_values(f, a, d)
    return max(raised_z(g, k), 0.0) ** (1.0 / 2**k)


# --- dual functions, modulation, exponential sums ------------------------------

def dual_group(f, k: int, budget: int = DEFAULT_BUDGET) -> np.ndarray:
    """D f(x) = E_{h in G^k} prod_{w != 0} C^{|w|} f(x + w.h) on a cyclic group."""
    k = _check_k(k)
    f = np.asarray(f, dtype=np.complex128)
    M = len(f)
    if k == 1:
        return np.full(M, np.conj(np.mean(f)))
    if k == 2:
        F = np.fft.fft(f) / M
        return np.conj(np.fft.ifft(np.abs(F) ** 2 * F) * M)
    total = M ** (k + 1)
    if total > budget:
        raise ResourceError(f"dual function needs M^(k+1) = {total} > budget {budget}; use k=2")
    omegas = _omega_table(k)[1:]
    x = np.arange(M)
    rows = max(1, _BLOCK_ENTRIES // M)
    acc = []
    for lo, hi in fixed_chunks(M**k, rows):
        hs = np.stack(np.unravel_index(np.arange(lo, hi), (M,) * k), axis=-1)
        prod = np.ones((hi - lo, M), dtype=np.complex128)
        for om in omegas:
            off = hs @ np.array(om, dtype=np.int64)
            vals = f[(x[None, :] + off[:, None]) % M]
            prod *= np.conj(vals) if sum(om) % 2 else vals
        acc.append(prod.sum(axis=0))
    tot = np.array([exact_complex_sum(col) for col in np.array(acc).T])
    return tot / M**k


def dual_function(f: ArithSignal, k: int, budget: int = DEFAULT_BUDGET) -> ArithSignal:
    vals = dual_group(_cyclic_values(f), k, budget)
    if f.real:
        vals = vals.real
    return f.with_values(vals, label=f"D{k}({f.label})")


def _phase(theta: float, n: np.ndarray) -> np.ndarray:
    frac = np.mod(theta * n.astype(np.float64), 1.0)
    return np.exp(2j * np.pi * frac)


def modulate(f: ArithSignal, theta: float) -> ArithSignal:
    if theta == 0:
        return f
    return f.with_values(f.values * _phase(theta, f.points()), label=f"e({theta})*{f.label}")


def exponential_sum(f: ArithSignal, progression: tuple[int, int, int], theta: float) -> complex:
    """sum_{j < count} f(a + q j) e((a + q j) theta), progression = (a, q, count)."""
    a, q, count = (int(v) for v in progression)
    if q < 1 or count < 0:
        raise InvalidArgument("progression needs q >= 1 and count >= 0")
    pts = f.points()
    n = a + q * np.arange(count, dtype=np.int64)
    pos = np.searchsorted(pts, n)
    if count and (np.any(pos >= len(pts)) or np.any(pts[np.clip(pos, 0, len(pts) - 1)] != n)):
        raise InvalidArgument("progression leaves the signal's domain")
    terms = f.values[pos] * _phase(theta, n)
    return exact_complex_sum(terms.tolist())


# --- W-trick helpers ------------------------------------------------------------

_PRIME_NORM_CACHE: dict[tuple[int, int], float] = {}


def _coprime_prime_raised(p: int, k: int) -> float:
    key = (p, k)
    if key not in _PRIME_NORM_CACHE:
        ind = np.ones(p)
        ind[0] = 0.0
        _PRIME_NORM_CACHE[key] = raised_group_fast(ind, k)
    return _PRIME_NORM_CACHE[key]


def coprime_indicator_norm(W: int, k: int) -> float:
    """||(W/phi(W)) 1_{(.,W)=1}||_{U^k(Z/WZ)} as a product of per-prime norms."""
    W, k = int(W), _check_k(k)
    if W < 1 or not is_squarefree(W):
        raise InvalidArgument(f"W={W} must be a positive squarefree integer")
    out = 1.0
    for p in prime_factors(W):
        out *= p / (p - 1) * _coprime_prime_raised(p, k) ** (1.0 / 2**k)
    return out


def coset_sum_bound(f: ArithSignal, q: int, k: int) -> tuple[float, float]:
    """(||f||^(2^k)_{U^k[N]},  sum_{d|q} (1/d) ||f(d.) 1_{(.,q/d)=1}||_{U^k[N/d]})."""
    if f.domain.kind != INTERVAL:
        raise InvalidArgument("coset_sum_bound needs a signal on [N]")
    vals = f.values
    if np.iscomplexobj(vals) or np.any(np.abs(vals) > 1):
        raise InvalidArgument("f must be real with |f| <= 1")
    q, k = int(q), _check_k(k)
    N = len(f)
    lhs = norm_interval(f, k).raised
    rhs_terms = []
    for d in range(1, q + 1):
        if q % d:
            continue
        m = N // d
        if m == 0:
            continue
        n = np.arange(1, m + 1)
        g = vals[d * n - 1] * (np.gcd(n, q // d) == 1)
        rhs_terms.append(norm_interval(ArithSignal.interval(g), k).value / d)
    return lhs, exact_sum(rhs_terms)
