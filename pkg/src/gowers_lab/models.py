"""Model arithmetic functions: Cramér, Siegel, truncated divisor sums, GY majorants."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import mpmath
import numpy as np
from scipy import integrate

from .arith import FactorTable, build_factor_table, cramer_constant, parse_key_values, primes_below, totient
from .characters import DirichletCharacter, make_real_character
from .errors import DegenerateConfig, InvalidArgument, OutOfDomain
from .gowers import dual_group
from .parallel import exact_sum
from .signals import ArithSignal, CYCLIC

L_PRECISION = 30
DERIVATIVE_STEP = 1e-4
DEGENERATE_LPRIME = 1e-12


# --- basic signals -------------------------------------------------------------

def _table_for(N: int, table: FactorTable | None) -> FactorTable:
    if table is not None and table.limit >= N:
        return table
    return build_factor_table(max(N, 2))


def von_mangoldt_signal(N: int, table: FactorTable | None = None,
                        primes_only: bool = False) -> ArithSignal:
    """Lambda on [N]; with primes_only, the restriction Lambda' to primes."""
    t = _table_for(N, table)
    if primes_only:
        vals = np.where(t.is_prime_array[1 : N + 1], np.log(np.arange(1, N + 1)), 0.0)
    else:
        vals = t.von_mangoldt_array[1 : N + 1].copy()
    return ArithSignal.interval(vals, label="Lambda'" if primes_only else "Lambda")


def mobius_signal(N: int, table: FactorTable | None = None) -> ArithSignal:
    t = _table_for(N, table)
    return ArithSignal.interval(t.mobius_array[1 : N + 1].astype(np.float64), label="mu")


def coprime_mask(n: np.ndarray, w: float) -> np.ndarray:
    """1_{(n, P(w)) = 1}, one prime at a time so P(w) is never materialized."""
    n = np.asarray(n, dtype=np.int64)
    mask = np.ones(n.shape, dtype=bool)
    for p in primes_below(w):
        mask &= n % p != 0
    return mask


def cramer_values(w: float, n: np.ndarray) -> np.ndarray:
    return cramer_constant(w) * coprime_mask(n, w)


def cramer(w: float, N: int) -> ArithSignal:
    """Lambda_{Cramer,w} on [N]."""
    if w < 2:
        raise InvalidArgument(f"w={w} must be >= 2")
    n = np.arange(1, int(N) + 1)
    return ArithSignal.interval(cramer_values(w, n), label=f"cramer_w{w:g}")


def w_trick(f: ArithSignal, W: int, b: int) -> ArithSignal:
    """n -> (phi(W)/W) f(Wn + b) on [(N - b) / W]."""
    W, b = int(W), int(b)
    if W < 1 or not 1 <= b <= W or math.gcd(b, W) != 1:
        raise InvalidArgument(f"need 1 <= b <= W with gcd(b, W) = 1, got W={W}, b={b}")
    if f.domain.kind != "interval":
        raise InvalidArgument("w_trick needs a signal on [N]")
    M = (len(f) - b) // W
    n = np.arange(1, M + 1)
    vals = totient(W) / W * f.values[W * n + b - 1] if M > 0 else np.zeros(0)
    return ArithSignal.interval(vals, label=f"W{W}b{b}({f.label})")


# --- L-functions -----------------------------------------------------------------

def _check_nonprincipal(chi: DirichletCharacter) -> None:
    if chi.is_principal:
        raise InvalidArgument("L-function evaluation needs a nonprincipal character")


def l_function(chi: DirichletCharacter, s: float) -> float:
    """L(s, chi) = q^(-s) sum_a chi(a) zeta(s, a/q); s = 1 via the digamma formula."""
    _check_nonprincipal(chi)
    if s <= 0:
        raise OutOfDomain(f"s={s} must be positive")
    q = chi.modulus
    terms = [(a, chi(a)) for a in range(1, q + 1) if chi(a)]
    with mpmath.workdps(L_PRECISION):
        if s == 1:
            total = -mpmath.fsum(c * mpmath.digamma(mpmath.mpf(a) / q) for a, c in terms) / q
        else:
            s_mp = mpmath.mpf(s)
            total = mpmath.power(q, -s_mp) * mpmath.fsum(
                c * mpmath.zeta(s_mp, mpmath.mpf(a) / q) for a, c in terms)
        return float(total)


def l_function_derivative(chi: DirichletCharacter, s: float, h: float = DERIVATIVE_STEP) -> float:
    """Five-point central difference of l_function."""
    if s - 2 * h <= 0:
        raise OutOfDomain(f"s={s} too close to 0 for step {h}")
    f = lambda x: l_function(chi, x)
    return (-f(s + 2 * h) + 8 * f(s + h) - 8 * f(s - h) + f(s - 2 * h)) / (12 * h)


def l_function_derivative_series(chi: DirichletCharacter, s: float) -> float:
    """L'(s, chi) by differentiating the Hurwitz representation term by term."""
    _check_nonprincipal(chi)
    if s <= 0 or s == 1:
        raise OutOfDomain(f"s={s} outside the Hurwitz derivative range")
    q = chi.modulus
    with mpmath.workdps(L_PRECISION):
        s_mp = mpmath.mpf(s)
        qs = mpmath.power(q, -s_mp)
        total = mpmath.mpf(0)
        for a in range(1, q + 1):
            c = chi(a)
            if c:
                x = mpmath.mpf(a) / q
                total += c * (mpmath.zeta(s_mp, x, 1) - math.log(q) * mpmath.zeta(s_mp, x))
        return float(qs * total)


# --- Siegel configurations --------------------------------------------------------

@dataclass(frozen=True)
class SiegelConfig:
    exists: bool
    Q: float
    q: int = 1
    beta: float = 0.0
    chi: DirichletCharacter | None = field(default=None, repr=False)
    alpha: float = 0.0
    l_prime: float = 0.0
    sign: int | None = None

    def to_key_values(self) -> str:
        lines = [f"exists={int(self.exists)}", f"Q={self.Q!r}"]
        if self.exists:
            lines += [f"q={self.q}", f"beta={self.beta!r}", f"alpha={self.alpha!r}",
                      f"l_prime={self.l_prime!r}"]
            if self.sign is not None:
                lines.append(f"sign={self.sign}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_key_values(cls, text: str) -> "SiegelConfig":
        kv = parse_key_values(text)
        allowed = {"exists", "Q", "q", "beta", "alpha", "l_prime", "sign"}
        unknown = sorted(set(kv) - allowed)
        if unknown:
            raise InvalidArgument(f"unknown Siegel config key(s): {', '.join(unknown)}")
        Q = float(kv["Q"])
        if kv.get("exists", "1") == "0":
            return no_siegel_config(Q)
        sign = int(kv["sign"]) if "sign" in kv else None
        q = int(kv["q"])
        return cls(exists=True, Q=Q, q=q, beta=float(kv["beta"]),
                   chi=make_real_character(q, sign), alpha=float(kv["alpha"]),
                   l_prime=float(kv["l_prime"]), sign=sign)


def no_siegel_config(Q: float) -> SiegelConfig:
    return SiegelConfig(exists=False, Q=float(Q))


def alpha_product(chi: DirichletCharacter, beta: float, Q: float) -> float:
    """prod_{p<Q} (1 - 1/p)^(-1) (1 - chi(p) p^(-beta))^(-1)."""
    out = 1.0
    for p in primes_below(Q):
        out /= (1 - 1 / p) * (1 - chi(p) * p ** (-beta))
    return out


def make_siegel_config(q: int, beta: float, Q: float, sign: int | None = None) -> SiegelConfig:
    """Synthetic configuration treating beta as an exceptional zero of L(s, chi_q)."""
    if not 0 < beta < 1:
        raise InvalidArgument(f"beta={beta} must lie in (0, 1)")
    if not q < Q:
        raise InvalidArgument(f"conductor q={q} must be below Q={Q}")
    chi = make_real_character(q, sign)
    if chi.is_principal:
        raise InvalidArgument("a Siegel character must be nonprincipal")
    if beta <= 1 - 1 / math.log(Q):
        warnings.warn(f"beta={beta} lies below 1 - 1/log Q = {1 - 1 / math.log(Q):.4g}",
                      stacklevel=2)
    lp = l_function_derivative(chi, beta)
    if abs(lp) < DEGENERATE_LPRIME:
        raise DegenerateConfig(f"|L'(beta, chi)| = {abs(lp):.3g} is numerically zero")
    alpha = alpha_product(chi, beta, Q) / lp
    return SiegelConfig(exists=True, Q=float(Q), q=int(q), beta=float(beta), chi=chi,
                        alpha=alpha, l_prime=lp, sign=sign)


def lambda_siegel(cfg: SiegelConfig, N: int) -> ArithSignal:
    base = cramer(cfg.Q, N)
    if not cfg.exists:
        return base.with_values(base.values, label="lambda_siegel")
    n = np.arange(1, int(N) + 1, dtype=np.float64)
    corr = 1 - n ** (cfg.beta - 1) * cfg.chi(np.arange(1, int(N) + 1))
    return ArithSignal.interval(base.values * corr, label="lambda_siegel")


def _smooth_split(n: np.ndarray, Q: float) -> tuple[np.ndarray, np.ndarray]:
    """(rough part m, mu_local of the Q-smooth part n/m)."""
    m = np.asarray(n, dtype=np.int64).copy()
    sign = np.ones(m.shape, dtype=np.int64)
    for p in primes_below(Q):
        hit = m % p == 0
        if not hit.any():
            continue
        m[hit] //= p
        sign[hit] *= -1
        again = hit & (m % p == 0)
        sign[again] = 0
        while again.any():
            m[again] //= p
            again &= m % p == 0
    return m, sign


def mu_local(Q: float, N: int) -> ArithSignal:
    """mu(n) 1_{n | P(Q)} on [N]."""
    n = np.arange(1, int(N) + 1)
    m, sign = _smooth_split(n, Q)
    return ArithSignal.interval(np.where(m == 1, sign, 0).astype(np.float64), label="mu_local")


def mu_prime(cfg: SiegelConfig, N: int) -> ArithSignal:
    """alpha n^(beta-1) chi(n) 1_{(n, P(Q)) = 1} on [N]."""
    if not cfg.exists:
        return ArithSignal.interval(np.zeros(int(N)), label="mu_prime")
    n = np.arange(1, int(N) + 1)
    vals = cfg.alpha * n.astype(np.float64) ** (cfg.beta - 1) * cfg.chi(n) * coprime_mask(n, cfg.Q)
    return ArithSignal.interval(vals, label="mu_prime")


def mu_siegel_values(cfg: SiegelConfig, n: np.ndarray) -> np.ndarray:
    n = np.asarray(n, dtype=np.int64)
    if not cfg.exists:
        return np.zeros(n.shape)
    m, sign = _smooth_split(n, cfg.Q)
    return sign * cfg.alpha * m.astype(np.float64) ** (cfg.beta - 1) * cfg.chi(m)


def mu_siegel(cfg: SiegelConfig, N: int) -> ArithSignal:
    """mu_local * mu', using that exactly one divisor pair (smooth, rough) can contribute."""
    n = np.arange(1, int(N) + 1)
    return ArithSignal.interval(mu_siegel_values(cfg, n), label="mu_siegel")


def mu_siegel_convolution(cfg: SiegelConfig, N: int) -> ArithSignal:
    """Reference path: the full Dirichlet convolution mu_local * mu'."""
    from .decomp import dirichlet_convolve

    if not cfg.exists:
        return ArithSignal.interval(np.zeros(int(N)), label="mu_siegel")
    return dirichlet_convolve(mu_local(cfg.Q, N), mu_prime(cfg, N))


@dataclass(frozen=True)
class EulerCheck:
    series: float
    closed_form: float
    tail_bound: float

    @property
    def gap(self) -> float:
        return abs(self.series - self.closed_form)


def induced_character_values(cfg: SiegelConfig, q_induced: int, n: np.ndarray) -> np.ndarray:
    return cfg.chi(n) * (np.gcd(n, q_induced) == 1)


def euler_product_check(cfg: SiegelConfig, q_induced: int, s: float, X: int) -> EulerCheck:
    """Truncated series sum_{n<=X} mu_Siegel chi(n) n^(-s) against its Euler product."""
    if s <= 1:
        raise InvalidArgument(f"s={s} must exceed 1")
    if not cfg.exists:
        return EulerCheck(0.0, 0.0, 0.0)
    if q_induced % cfg.q:
        raise InvalidArgument(f"q_induced={q_induced} must be a multiple of q={cfg.q}")
    small = primes_below(cfg.Q)
    rest = q_induced
    for p in small:
        while rest % p == 0:
            rest //= p
    if rest != 1:
        raise InvalidArgument(f"q_induced={q_induced} has prime factors >= Q")
    n = np.arange(1, int(X) + 1)
    terms = mu_siegel_values(cfg, n) * induced_character_values(cfg, q_induced, n) \
        / n.astype(np.float64) ** s
    series = exact_sum(terms.tolist())

    chi, beta = cfg.chi, cfg.beta
    with mpmath.workdps(L_PRECISION):
        closed = mpmath.zeta(s + 1 - beta) / cfg.l_prime
        for p in small:
            cp = chi(p)
            closed *= (1 - mpmath.power(p, -(s + 1 - beta))) / (1 - mpmath.mpf(1) / p)
            if q_induced % p:
                closed *= (1 - cp * mpmath.power(p, -s)) / (1 - cp * mpmath.power(p, -beta))
            else:
                closed /= 1 - cp * mpmath.power(p, -beta)
        closed = float(closed)
    tail = abs(cfg.alpha) * float(X) ** (beta - s) / (s - beta)
    return EulerCheck(series=series, closed_form=closed, tail_bound=tail)


# --- truncated divisor sums and GY majorants ------------------------------------

def lambda_sharp(N: int, c1: float, table: FactorTable | None = None) -> ArithSignal:
    """-sum_{d | n, d <= N^c1} mu(d) log d on [N]."""
    if not 0 < c1 < 1:
        raise InvalidArgument(f"c1={c1} must lie in (0, 1)")
    N = int(N)
    D = int(math.floor(N**c1 + 1e-9))
    vals = np.zeros(N)
    if D >= 2:
        mu = _table_for(D, table).mobius_array
        for d in range(2, D + 1):
            if mu[d]:
                vals[d - 1 :: d] -= mu[d] * math.log(d)
    return ArithSignal.interval(vals, label=f"lambda_sharp_c{c1:g}")


def gy_cutoff(x):
    """1/2 on |x| <= 1, (1/2) cos^2(pi (|x| - 1) / 2) on 1 <= |x| <= 2, 0 beyond."""
    ax = np.abs(np.asarray(x, dtype=np.float64))
    out = np.where(ax <= 1, 0.5, 0.5 * np.cos(np.pi * (ax - 1) / 2) ** 2)
    return np.where(ax >= 2, 0.0, out)


def _gy_cutoff_derivative(x: float) -> float:
    ax = abs(x)
    if ax <= 1 or ax >= 2:
        return 0.0
    return -0.5 * np.pi * np.sin(np.pi * (ax - 1) / 2) * np.cos(np.pi * (ax - 1) / 2)


@lru_cache(maxsize=None)
def cutoff_energy() -> float:
    """int_1^2 chi'(x)^2 dx for the fixed cutoff (pi^2 / 32)."""
    val, _ = integrate.quad(lambda x: _gy_cutoff_derivative(x) ** 2, 1, 2,
                            epsabs=1e-13, epsrel=1e-13)
    return val


@dataclass(frozen=True)
class GYWeightParams:
    W: int
    b: int
    R: float
    c_chi2: float = field(default_factory=cutoff_energy)

    def __post_init__(self):
        if self.R <= 1:
            raise InvalidArgument(f"R={self.R} must exceed 1")
        if not 1 <= self.b <= self.W or math.gcd(self.b, self.W) != 1:
            raise InvalidArgument(f"b={self.b} must lie in [W] and be coprime to W={self.W}")


def gy_divisor_sum(params: GYWeightParams, N: int) -> np.ndarray:
    """sum_{d | Wn+b} mu(d) chi(log d / log R) for n in [N]."""
    W, b, R = params.W, params.b, params.R
    D = math.ceil(R * R) - 1  # chi vanishes once d >= R^2
    inner = np.zeros(int(N))
    logR = math.log(R)
    mu = build_factor_table(max(D, 2)).mobius_array
    for d in range(1, D + 1):
        if not mu[d] or math.gcd(d, W) != 1:
            continue
        weight = float(gy_cutoff(math.log(d) / logR))
        if weight == 0.0:
            continue
        n0 = (-b * pow(W, -1, d)) % d if d > 1 else 0
        if n0 == 0:
            n0 = d
        inner[n0 - 1 :: d] += mu[d] * weight
    return inner


def gy_majorant(params: GYWeightParams, N: int) -> ArithSignal:
    """nu(n) = (phi(W)/W) (1/c_chi2) log R (sum_{d | Wn+b} mu(d) chi(log d/log R))^2."""
    inner = gy_divisor_sum(params, N)
    scale = totient(params.W) / params.W / params.c_chi2 * math.log(params.R)
    return ArithSignal.interval(scale * inner**2, label="gy_nu")


def dual_moment(nu: ArithSignal, k: int, j: int) -> float:
    """E_x (D nu(x))^j on Z/MZ."""
    if j not in (0, 1, 2):
        raise InvalidArgument(f"j={j} must be 0, 1 or 2")
    if nu.domain.kind != CYCLIC:
        raise InvalidArgument("dual_moment needs a signal on Z/MZ")
    if j == 0:
        return 1.0
    D = dual_group(nu.values, k)
    return float(np.mean(D**j).real)


# --- pointwise bounds -------------------------------------------------------------

def pointwise_constants(N: int, cfg: SiegelConfig, w: float = 5.0,
                        table: FactorTable | None = None) -> dict[str, float]:
    """Observed C with |f| <= C log N (Lambda-type) or |f| <= C (mu-type) on [N]."""
    t = _table_for(N, table)
    logN = math.log(N)
    return {
        "lambda": float(np.max(von_mangoldt_signal(N, t).values)) / logN,
        "cramer": float(np.max(cramer(w, N).values)) / logN,
        "lambda_siegel": float(np.max(np.abs(lambda_siegel(cfg, N).values))) / logN,
        "mu": float(np.max(np.abs(t.mobius_array[1 : N + 1]))),
        "mu_siegel": float(np.max(np.abs(mu_siegel(cfg, N).values))),
    }
