import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gowers_lab.characters import make_real_character
from gowers_lab.errors import InvalidArgument, NumericConsistencyError, ResourceError
from gowers_lab.gowers import (_result, box_count_interval, coprime_indicator_norm,
                               coset_norm, coset_sum_bound, dual_function, dual_group,
                               exponential_sum, gowers_inner, inner_group_naive, inner_z,
                               modulate, norm_group_fast, norm_group_naive, norm_interval,
                               raised_group_fast, raised_group_naive,
                               raised_u2_autocorrelation, raised_z, raised_z_naive,
                               unnormalized_norm_z)
from gowers_lab.models import mobius_signal
from gowers_lab.parallel import exact_complex_sum
from gowers_lab.signals import ArithSignal
from gowers_lab.thresholds import COSET_SUM_CONSTANT, EXP_SUM_MU_CONSTANT

SLACK = 1e-9


def cplx(rng, n):
    return rng.normal(size=n) + 1j * rng.normal(size=n)


def bounded(rng, n):
    return np.exp(2j * np.pi * rng.random(n)) * rng.random(n)


def brute_dual(f, k):
    """Dual by nested loops over h in G^k."""
    M = len(f)
    out = np.zeros(M, dtype=complex)
    omegas = [tuple((i >> j) & 1 for j in range(k)) for i in range(1, 2**k)]
    for x in range(M):
        acc = 0
        for h in np.ndindex(*([M] * k)):
            p = 1
            for om in omegas:
                v = f[(x + sum(o * hh for o, hh in zip(om, h))) % M]
                p *= np.conj(v) if sum(om) % 2 else v
            acc += p
        out[x] = acc / M**k
    return out


# --- results and normalization -----------------------------------------------------

def test_norm_result_clamp():
    r = _result(-5e-13, 2, 1)
    assert r.raised == 0.0 and r.value == 0.0
    with pytest.raises(NumericConsistencyError):
        _result(-1e-6, 2, 1)
    r = _result(0.0625, 2, 8)
    assert abs(r.value - r.raised ** 0.25) < 1e-12


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_normalization_group(k):
    for M in range(1, 129):
        assert abs(raised_group_fast(np.ones(M), k) - 1) < 1e-12
    for M in (1, 2, 7, 12):
        assert abs(norm_group_naive(ArithSignal.cyclic(np.ones(M)), k).value - 1) < 1e-12


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_normalization_interval(k):
    Ns = range(1, 129) if k <= 3 else [1, 2, 3, 5, 8, 17, 33, 64, 100, 128]
    for N in Ns:
        r = norm_interval(ArithSignal.interval(np.ones(N)), k)
        assert abs(r.value - 1) < 1e-12
        assert r.normalization == box_count_interval(N, k)


# --- naive / fast group engines ------------------------------------------------------

def test_naive_examples():
    for M in (5, 12):
        for k in (1, 2, 3):
            assert norm_group_naive(ArithSignal.cyclic(np.ones(M)), k).value == pytest.approx(1, abs=1e-12)
    M = 16
    phase = ArithSignal.cyclic(np.exp(2j * np.pi * np.arange(M) / M))
    assert norm_group_naive(phase, 2).value == pytest.approx(1, abs=1e-12)
    chi = ArithSignal.cyclic(make_real_character(5).values())
    assert norm_group_naive(chi, 2).value == pytest.approx((4 / 25) ** 0.25, abs=1e-12)
    with pytest.raises(ResourceError):
        norm_group_naive(ArithSignal.cyclic(np.ones(100)), 4, budget=10**6)


def test_fast_examples(rng):
    f = cplx(rng, 256)
    assert norm_group_fast(ArithSignal.cyclic(f), 3).raised > 0
    g = ArithSignal.cyclic(f[:32])
    assert norm_group_fast(g, 3).raised == pytest.approx(norm_group_naive(g, 3).raised, rel=1e-9)
    assert norm_group_fast(ArithSignal.cyclic(np.ones(256)), 3).value == pytest.approx(1, abs=1e-12)
    even = ArithSignal.cyclic((np.arange(16) % 2 == 0).astype(float))
    assert norm_group_fast(even, 2).raised == pytest.approx(norm_group_naive(even, 2).raised, abs=1e-12)
    with pytest.raises(InvalidArgument):
        norm_group_fast(even, 1)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 20), st.integers(1, 3), st.integers(0, 2**32 - 1), st.booleans())
def test_fast_equals_naive_property(M, k, seed, real):
    rng = np.random.default_rng(seed)
    f = rng.normal(size=M) if real else cplx(rng, M)
    naive = raised_group_naive(f, k)
    assert raised_group_fast(f, k) == pytest.approx(naive, rel=1e-9, abs=1e-12)


def test_multidimensional_group_engine(rng):
    f = cplx(rng, (4, 6))
    for k in (2, 3):
        naive = inner_group_naive([f] * 2**k, k).real
        assert raised_group_fast(f, k) == pytest.approx(naive, rel=1e-9)


def test_u2_autocorrelation_oracle(rng):
    for M in (1, 17, 256, 1000):
        f = cplx(rng, M)
        assert raised_u2_autocorrelation(f) == pytest.approx(raised_group_fast(f, 2), rel=1e-9)


# --- Z and interval --------------------------------------------------------------------

def test_unnormalized_z_examples():
    two = ArithSignal.interval(np.ones(2))
    assert unnormalized_norm_z(two, 1) == pytest.approx(2, abs=1e-12)
    assert unnormalized_norm_z(two, 2) == pytest.approx(6**0.25, abs=1e-12)
    assert unnormalized_norm_z(ArithSignal.interval(np.zeros(10)), 3) == 0.0


def test_box_count_examples():
    assert box_count_interval(2, 2) == 6
    for k in range(1, 6):
        assert box_count_interval(1, k) == 1
    assert box_count_interval(3, 1) == 9


@pytest.mark.parametrize("k", [1, 2, 3])
def test_box_count_matches_enumeration(k):
    for N in range(1, 13 if k < 3 else 8):
        assert box_count_interval(N, k) == round(raised_z_naive(np.ones(N), k))


def test_box_count_large_is_polynomial():
    # interpolation against the recursion at a size past the interpolation nodes
    from gowers_lab.gowers import _box_count_small

    for k in (1, 2, 3, 4):
        assert box_count_interval(40, k) == _box_count_small(40, k)


def test_norm_interval_examples():
    assert norm_interval(ArithSignal.interval(np.ones(50)), 3).value == pytest.approx(1, abs=1e-12)
    alt = ArithSignal.interval((-1.0) ** np.arange(1, 5))
    assert norm_interval(alt, 1).value == pytest.approx(0, abs=1e-12)
    with pytest.raises(InvalidArgument):
        norm_interval(ArithSignal.cyclic(np.ones(4)), 2)


def test_mu_interval_norm_against_naive(table):
    mu = mobius_signal(256, table)
    naive = raised_z_naive(mu.values, 2, budget=10**8) / box_count_interval(256, 2)
    assert norm_interval(mu, 2).raised == pytest.approx(naive, rel=1e-9)
    # larger N: an independent O(M^2) autocorrelation on a wrap-free cyclic embedding
    N = 2000
    mu = mobius_signal(N, table)
    M0 = 4 * N
    pad = np.zeros(M0)
    pad[:N] = mu.values
    oracle = raised_u2_autocorrelation(pad) * M0**3 / box_count_interval(N, 2)
    assert norm_interval(mu, 2).raised == pytest.approx(oracle, rel=1e-9)
    assert 0 < norm_interval(mobius_signal(10**4, table), 2).value < 1


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_raised_z_matches_naive(k, rng):
    L = {1: 40, 2: 30, 3: 12, 4: 6}[k]
    for _ in range(3):
        g = cplx(rng, L)
        assert raised_z(g, k) == pytest.approx(raised_z_naive(g, k), rel=1e-9)


def test_coset_norm_examples(rng):
    f = ArithSignal.interval(cplx(rng, 30))
    assert coset_norm(f, 0, 1, 2) == pytest.approx(unnormalized_norm_z(f, 2), rel=1e-12)
    assert coset_norm(ArithSignal.interval(np.ones(4)), 1, 2, 1) == pytest.approx(2, abs=1e-12)
    z = ArithSignal.interval(np.where(np.arange(1, 21) % 3 == 0, 0.0, 1.0))
    assert coset_norm(z, 0, 3, 2) == 0.0


# --- inner products and inequalities ---------------------------------------------------

def test_gowers_inner_examples(rng):
    ones = [ArithSignal.cyclic(np.ones(9))] * 4
    assert gowers_inner(ones) == pytest.approx(1, abs=1e-12)
    f = ArithSignal.cyclic(cplx(rng, 20))
    assert gowers_inner([f] * 8).real == pytest.approx(norm_group_fast(f, 3).raised, rel=1e-9)
    for _ in range(20):
        fam = [ArithSignal.cyclic(bounded(rng, 64)) for _ in range(4)]
        bound = math.prod(norm_group_fast(g, 2).value for g in fam)
        assert abs(gowers_inner(fam)) <= bound + SLACK
    with pytest.raises(InvalidArgument):
        gowers_inner([ArithSignal.cyclic(np.ones(4)), ArithSignal.cyclic(np.ones(5))])
    with pytest.raises(InvalidArgument):
        gowers_inner([ArithSignal.cyclic(np.ones(4))] * 3)


def test_inner_fast_matches_naive(rng):
    for k in (1, 2, 3):
        fam = [cplx(rng, 10) for _ in range(2**k)]
        from gowers_lab.gowers import inner_group_fast

        assert inner_group_fast(fam, k) == pytest.approx(inner_group_naive(fam, k), rel=1e-9)


def test_triangle(rng):
    for trial in range(200):
        k = 2 + trial % 2
        f, g = cplx(rng, 24), cplx(rng, 24)
        lhs = raised_group_fast(f + g, k) ** (1 / 2**k)
        rhs = raised_group_fast(f, k) ** (1 / 2**k) + raised_group_fast(g, k) ** (1 / 2**k)
        assert lhs <= rhs + SLACK
        a = ArithSignal.interval(f)
        b = ArithSignal.interval(g)
        s = ArithSignal.interval(f + g)
        assert norm_interval(s, k).value <= norm_interval(a, k).value + norm_interval(b, k).value + SLACK


def test_gcs_group_and_z(rng):
    for trial in range(200):
        k = 2 + trial % 2
        fam = [bounded(rng, 16) for _ in range(2**k)]
        bound = math.prod(raised_group_fast(f, k) ** (1 / 2**k) for f in fam)
        from gowers_lab.gowers import inner_group_fast

        assert abs(inner_group_fast(fam, k)) <= bound + SLACK
        fam = [bounded(rng, 10) for _ in range(2**k)]
        bound = math.prod(raised_z(f, k) ** (1 / 2**k) for f in fam)
        assert abs(inner_z(fam, k)) <= bound * (1 + 1e-12) + SLACK


def test_tensor_identity(rng):
    for k in (1, 2, 3):
        f1, f2 = cplx(rng, 12), cplx(rng, 9)
        lhs = raised_group_fast(np.outer(f1, f2), k)
        assert lhs == pytest.approx(raised_group_fast(f1, k) * raised_group_fast(f2, k), rel=1e-9)


def test_fubini(rng):
    for _ in range(30):
        k = int(rng.integers(1, 4))
        d = int(rng.integers(1, 11))
        f = ArithSignal.interval(cplx(rng, int(rng.integers(10, 201))))
        F = np.array([coset_norm(f, a, d, k) for a in range(d)])
        quotient = raised_group_fast(F, k) * d ** (k + 1)
        assert unnormalized_norm_z(f, k) <= quotient ** (1 / 2**k) + SLACK


def test_monotone_in_k(rng):
    for _ in range(100):
        f = cplx(rng, 20)
        vals = [raised_group_fast(f, k) ** (1 / 2**k) for k in (1, 2, 3)]
        assert vals[0] <= vals[1] + SLACK and vals[1] <= vals[2] + SLACK


# --- dual, modulation, exponential sums --------------------------------------------------

def test_dual_examples(rng):
    ones = ArithSignal.cyclic(np.ones(11))
    for k in (1, 2, 3):
        assert np.allclose(dual_function(ones, k).values, 1, atol=1e-12)
    c = -0.8
    D = dual_function(ArithSignal.cyclic(np.full(13, c)), 2).values
    assert np.allclose(D, abs(c) ** 2 * c, atol=1e-12)
    # complex constants: the two |omega| = 1 factors are conjugated
    c = 0.7 - 0.4j
    D = dual_function(ArithSignal.cyclic(np.full(13, c)), 2).values
    assert np.allclose(D, abs(c) ** 2 * np.conj(c), atol=1e-12)
    for k in (1, 2, 3):
        f = cplx(rng, 9)
        D = dual_group(f, k)
        assert np.allclose(D, brute_dual(f, k), atol=1e-10)
        assert np.mean(f * D) == pytest.approx(raised_group_naive(f, k), rel=1e-9)
    real = dual_function(ArithSignal.cyclic(rng.normal(size=8)), 2)
    assert real.real and not np.iscomplexobj(real.values)


def test_dual_decomposition_identity(rng):
    for q in (1, 6, 12, 30):
        f = cplx(rng, 60)
        F = dual_group(f, 2)
        n = np.arange(1, 61)
        terms = f * F
        whole = exact_complex_sum(terms.tolist())
        pieces = []
        for d in (d for d in range(1, q + 1) if q % d == 0):
            pieces.extend(terms[(n % d == 0) & (np.gcd(n, q) == d)].tolist())
        assert exact_complex_sum(pieces) == whole


def test_modulate(rng):
    f = ArithSignal.interval(cplx(rng, 40))
    assert modulate(f, 0.0) is f
    alt = modulate(ArithSignal.interval(np.ones(4)), 0.5).values
    assert np.allclose(alt, [-1, 1, -1, 1], atol=1e-12)
    for _ in range(20):
        theta = float(rng.random())
        g = modulate(f, theta)
        for k in (2, 3):
            assert norm_interval(g, k).value == pytest.approx(norm_interval(f, k).value, rel=1e-9)
        c = ArithSignal.cyclic(cplx(rng, 30))
        assert norm_group_fast(modulate(c, int(rng.integers(30)) / 30), 2).value == pytest.approx(
            norm_group_fast(c, 2).value, rel=1e-9)


def test_exponential_sums(table):
    ones = ArithSignal.interval(np.ones(100))
    assert exponential_sum(ones, (1, 1, 100), 0.0) == pytest.approx(100, abs=1e-12)
    assert abs(exponential_sum(ones, (1, 1, 100), 0.5)) < 1e-9
    assert exponential_sum(ones, (2, 3, 10), 0.0) == pytest.approx(10, abs=1e-12)
    with pytest.raises(InvalidArgument):
        exponential_sum(ones, (95, 1, 10), 0.0)
    N = 10**4
    mu = mobius_signal(N, table)
    s = exponential_sum(mu, (1, 1, N), (1 + math.sqrt(5)) / 2)
    direct = sum(mu.values[n - 1] * np.exp(2j * np.pi * n * (1 + math.sqrt(5)) / 2) for n in range(1, N + 1))
    assert s == pytest.approx(direct, abs=1e-6)
    assert abs(s) <= EXP_SUM_MU_CONSTANT * math.sqrt(N)


# --- W-trick helpers ----------------------------------------------------------------------

def test_coprime_indicator_norm():
    assert coprime_indicator_norm(1, 3) == 1.0
    assert coprime_indicator_norm(2, 2) == pytest.approx(2 * (1 / 8) ** 0.25, abs=1e-12)
    for W in (6, 30):
        ind = (np.gcd(np.arange(W), W) == 1) * W / math.prod(p - 1 for p in (2, 3, 5) if W % p == 0)
        for k in (2, 3):
            direct = raised_group_naive(ind, k) ** (1 / 2**k)
            assert coprime_indicator_norm(W, k) == pytest.approx(direct, rel=1e-9)
    with pytest.raises(InvalidArgument):
        coprime_indicator_norm(12, 2)


def test_coset_sum_bound(rng):
    assert coset_sum_bound(ArithSignal.interval(np.zeros(50)), 6, 2) == (0.0, 0.0)
    f = ArithSignal.interval(rng.choice([-1.0, 1.0], size=80))
    lhs, rhs = coset_sum_bound(f, 1, 2)
    assert lhs == pytest.approx(rhs**4, rel=1e-12)
    with pytest.raises(InvalidArgument):
        coset_sum_bound(ArithSignal.interval(np.full(10, 2.0)), 6, 2)
    trial_rng = np.random.default_rng(20240601)
    ratios = []
    for _ in range(100):
        f = ArithSignal.interval(trial_rng.choice([-1.0, 1.0], size=200))
        lhs, rhs = coset_sum_bound(f, 6, 2)
        ratios.append(lhs / rhs)
    assert max(ratios) <= COSET_SUM_CONSTANT
