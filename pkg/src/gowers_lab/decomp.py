"""Exact Vaughan-type decompositions of Lambda and mu on [N].

With U the integer cube root of N:

    Lambda = Lambda 1_{n<=U} - sum_{d<=U^2} a_d 1_{d|n} + sum_{d<=U} mu(d) 1_{d|n} log(n/d)
             + sum_{dw=n, d>U, w>U} Lambda(d) b_w
    mu     = 2 mu 1_{n<=U} - sum_{d<=U^2} a'_d 1_{d|n} + sum_{dw=n, d>U, w>U} mu(d) b_w

a_d  = sum_{bc=d, b,c<=U} mu(b) Lambda(c),   a'_d = sum_{bc=d, b,c<=U} mu(b) mu(c),
b_w  = sum_{c|w, c>U} mu(c) = -sum_{c|w, c<=U} mu(c)   (w > U).
"""
from __future__ import annotations

import io
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .arith import FactorTable, build_factor_table
from .characters import DirichletCharacter
from .errors import InvalidArgument
from .signals import ArithSignal

TYPE_I, TWISTED_TYPE_I, TYPE_II, NEGLIGIBLE = "TypeI", "TwistedTypeI", "TypeII", "Negligible"


@dataclass(frozen=True, eq=False)
class Component:
    kind: str
    name: str
    values: np.ndarray = field(repr=False)
    coefficients: dict = field(default_factory=dict, repr=False)


@dataclass(frozen=True, eq=False)
class VaughanDecomposition:
    N: int
    target: str
    cut1: int
    cut2: int
    target_values: np.ndarray = field(repr=False)
    components: list = field(default_factory=list)
    twist: DirichletCharacter | None = field(default=None, repr=False)

    def total(self) -> np.ndarray:
        out = np.zeros(self.N)
        for c in self.components:
            out = out + c.values
        return out

    def component(self, name: str) -> Component:
        for c in self.components:
            if c.name == name:
                return c
        raise KeyError(name)


def icbrt(N: int) -> int:
    """Largest U with U^3 <= N."""
    U = int(round(N ** (1 / 3)))
    while U**3 > N:
        U -= 1
    while (U + 1) ** 3 <= N:
        U += 1
    return U


def _convolve_arrays(f: np.ndarray, g: np.ndarray, N: int) -> np.ndarray:
    """(f*g)(n) = sum_{d|n} f(d) g(n/d); arrays are indexed by n - 1."""
    dtype = np.result_type(f, g, np.float64)
    out = np.zeros(N, dtype=dtype)
    for d in np.flatnonzero(f[:N]) + 1:
        m = N // d
        out[d - 1 :: d][:m] += f[d - 1] * g[:m]
    return out


def dirichlet_convolve(f: ArithSignal, g: ArithSignal) -> ArithSignal:
    """Dirichlet convolution of two signals on [N] by the divisor-pair sweep."""
    if f.domain.kind != "interval" or g.domain.kind != "interval":
        raise InvalidArgument("dirichlet_convolve needs signals on [N]")
    N = min(len(f), len(g))
    vals = _convolve_arrays(f.values, g.values, N)
    return ArithSignal.interval(vals, label=f"({f.label})*({g.label})")


def _divisor_sweep(coef: np.ndarray, N: int, inner: np.ndarray | None = None) -> np.ndarray:
    """sum_{d | n} coef[d] inner[n/d] (inner = 1 when omitted); coef indexed by d."""
    out = np.zeros(N)
    for d in np.flatnonzero(coef[1:]) + 1:
        m = N // d
        if m == 0:
            break
        out[d - 1 :: d][:m] += coef[d] * (1.0 if inner is None else inner[:m])
    return out


def _small_convolution(x: np.ndarray, y: np.ndarray, U: int) -> np.ndarray:
    """c_d = sum_{bc=d, b,c<=U} x[b] y[c] for d <= U^2 (index d)."""
    out = np.zeros(U * U + 1)
    for b in range(1, U + 1):
        if x[b]:
            out[b * np.arange(1, U + 1)] += x[b] * y[1 : U + 1]
    return out


def _b_coefficients(mu: np.ndarray, U: int, N: int) -> np.ndarray:
    """b_w for w <= N (index w), zero for w <= U."""
    b = np.zeros(N + 1)
    for c in range(1, U + 1):
        if mu[c]:
            b[c::c] -= mu[c]
    b[: U + 1] = 0.0
    return b


def _prepare(N: int, table: FactorTable | None):
    N = int(N)
    if N < 1:
        raise InvalidArgument("N must be positive")
    t = table if table is not None and table.limit >= N else build_factor_table(max(N, 2))
    mu = t.mobius_array[: N + 1].astype(np.float64)
    lam = t.von_mangoldt_array[: N + 1]
    return N, icbrt(N), mu, lam


def vaughan_lambda(N: int, table: FactorTable | None = None,
                   twist: DirichletCharacter | None = None) -> VaughanDecomposition:
    """Decompose Lambda (or Lambda chi when a twist character is given) on [N]."""
    N, U, mu, lam = _prepare(N, table)
    n = np.arange(1, N + 1)
    chi_full = twist(np.arange(N + 1)).astype(np.float64) if twist is not None else None
    chi_n = chi_full[1:] if twist is not None else 1.0

    a = _small_convolution(mu, lam, U)
    mu_small = np.zeros(N + 1)
    mu_small[1 : U + 1] = mu[1 : U + 1]
    b = _b_coefficients(mu, U, N)
    lam_big = lam.copy()
    lam_big[: U + 1] = 0.0

    small = np.where(n <= U, lam[1:], 0.0) * chi_n
    if twist is None:
        t1 = -_divisor_sweep(a, N)
        t2 = _divisor_sweep(mu_small, N, np.log(np.arange(1, N + 1)))
        tII = _convolve_arrays(lam_big[1:], b[1:], N)
        kind1 = TYPE_I
    else:
        # chi(n) = chi(d) chi(n/d): twist the coefficient by chi(d), the sweep by chi(n/d)
        a_tw = a * chi_full[: len(a)]
        mu_tw = mu_small * chi_full
        t1 = -_divisor_sweep(a_tw, N, chi_full[1:])
        t2 = _divisor_sweep(mu_tw, N, np.log(np.arange(1, N + 1)) * chi_full[1:])
        tII = _convolve_arrays(lam_big[1:] * chi_full[1:], b[1:] * chi_full[1:], N)
        kind1 = TWISTED_TYPE_I
    comps = [
        Component(NEGLIGIBLE, "small", small),
        Component(kind1, "divisor", t1, {"a_d": a}),
        Component(kind1, "log", t2, {"mu_d": mu_small[: U + 1]}),
        Component(TYPE_II, "bilinear", tII, {"b_w": b}),
    ]
    target = lam[1:] * chi_n
    return VaughanDecomposition(N=N, target="lambda", cut1=U, cut2=U * U,
                                target_values=target, components=comps, twist=twist)


def vaughan_mu(N: int, table: FactorTable | None = None) -> VaughanDecomposition:
    N, U, mu, _ = _prepare(N, table)
    n = np.arange(1, N + 1)
    a2 = _small_convolution(mu, mu, U)
    b = _b_coefficients(mu, U, N)
    mu_big = mu.copy()
    mu_big[: U + 1] = 0.0
    comps = [
        Component(NEGLIGIBLE, "small", np.where(n <= U, 2.0 * mu[1:], 0.0)),
        Component(TYPE_I, "divisor", -_divisor_sweep(a2, N), {"a'_d": a2}),
        Component(TYPE_II, "bilinear", _convolve_arrays(mu_big[1:], b[1:], N), {"b_w": b}),
    ]
    return VaughanDecomposition(N=N, target="mu", cut1=U, cut2=U * U,
                                target_values=mu[1:].copy(), components=comps)


def verify_decomposition(dec: VaughanDecomposition) -> float:
    """max_n |target(n) - sum of components(n)|."""
    if dec.N == 0:
        return 0.0
    return float(np.max(np.abs(dec.target_values - dec.total())))


def negligible_mass(dec: VaughanDecomposition) -> float:
    """sum_n |negligible(n)| / N."""
    tot = sum(np.sum(np.abs(c.values)) for c in dec.components if c.kind == NEGLIGIBLE)
    return float(tot) / dec.N


def decomposition_to_csv(dec: VaughanDecomposition, path: str | Path | None = None) -> str:
    buf = io.StringIO()
    buf.write(f"#decomposition=vaughan;target={dec.target};N={dec.N};"
              f"cut1={dec.cut1};cut2={dec.cut2};twisted={int(dec.twist is not None)}\n")
    buf.write("kind,component,index,re,im\n")
    for c in dec.components:
        for i, v in enumerate(c.values.tolist(), 1):
            buf.write(f"{c.kind},{c.name},{i},{float(np.real(v))!r},{float(np.imag(v))!r}\n")
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text
