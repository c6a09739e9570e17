import math

import numpy as np
import pytest

import gowers_lab.models as models
from gowers_lab.arith import primes_below
from gowers_lab.characters import make_real_character
from gowers_lab.errors import DegenerateConfig, InvalidArgument, InvalidConductor, OutOfDomain
from gowers_lab.gowers import norm_interval
from gowers_lab.models import (GYWeightParams, SiegelConfig, cramer, cutoff_energy, dual_moment,
                               euler_product_check, gy_majorant, l_function,
                               l_function_derivative, l_function_derivative_series,
                               lambda_sharp, lambda_siegel, make_siegel_config, mu_local,
                               mu_prime, mu_siegel, mu_siegel_convolution, no_siegel_config,
                               pointwise_constants, von_mangoldt_signal, w_trick)
from gowers_lab.signals import ArithSignal
from gowers_lab.thresholds import (ALPHA_BOUND, ALPHA_Q5, ALPHA_REPRO_TOL, EULER_SLACK,
                                   GY_MEAN_OBSERVED, LAMBDA_SHARP_MEAN_1E6,
                                   POINTWISE_STABILITY)


@pytest.fixture(scope="module")
def cfg5():
    return make_siegel_config(5, 0.99, 50.0)


# --- Cramer and W-trick ----------------------------------------------------------

def test_cramer_examples():
    assert np.array_equal(cramer(2, 50).values, np.ones(50))
    c3 = cramer(3, 20).values
    n = np.arange(1, 21)
    assert np.array_equal(c3, np.where(n % 2, 2.0, 0.0))
    c5 = cramer(5, 10).values
    assert c5[6] == pytest.approx(3.0, abs=1e-12) and c5[3] == 0.0
    big = cramer(10**4, 200).values  # no primorial is materialized
    assert np.count_nonzero(big) == 1 and big[0] > 0
    with pytest.raises(InvalidArgument):
        cramer(1.5, 10)


def test_w_trick_examples(table):
    f = ArithSignal.interval(np.arange(1.0, 21.0))
    g = w_trick(f, 1, 1)
    assert np.array_equal(g.values, np.arange(2.0, 21.0))
    for W in (2, 6, 30, 210):
        h = w_trick(cramer(2, 1000), W, 1)
        assert np.allclose(h.values, math.prod(p - 1 for p in primes_below(11) if W % p == 0) / W)
    lam = von_mangoldt_signal(10**5, table)
    assert 0.9 <= w_trick(lam, 6, 1).values.mean() <= 1.1
    with pytest.raises(InvalidArgument):
        w_trick(f, 6, 3)


# --- L-functions ------------------------------------------------------------------

def test_l_function_at_one():
    chi = make_real_character(5)
    # period-averaged partial sums (Abel/Cesaro acceleration of the conditionally convergent series)
    X0, q = 20000, 5
    n = np.arange(1, X0 + q + 1)
    partial = np.cumsum(chi(n) / n)
    accelerated = partial[X0 - 1 : X0 + q - 1].mean()
    assert l_function(chi, 1.0) == pytest.approx(accelerated, abs=1e-6)
    assert l_function(chi, 1.0) == pytest.approx(2 * math.log((1 + math.sqrt(5)) / 2) / math.sqrt(5), abs=1e-12)
    for q in (3, 4, 5, 7, 8, 13, 40, 85):
        assert l_function(make_real_character(q), 1.0) > 0


def test_l_function_at_two():
    chi = make_real_character(5)
    n = np.arange(1, 10**6 + 1)
    series = math.fsum((chi(n) / n.astype(float) ** 2).tolist())
    assert l_function(chi, 2.0) == pytest.approx(series, abs=1e-6)


def test_l_function_errors():
    chi = make_real_character(5)
    with pytest.raises(OutOfDomain):
        l_function(chi, 0.0)
    with pytest.raises(InvalidArgument):
        l_function(make_real_character(1), 2.0)


@pytest.mark.parametrize("q", [5, 13, 40])
@pytest.mark.parametrize("s", [0.5, 0.99, 1.5, 2.0])
def test_derivative_stencil_vs_series(q, s):
    chi = make_real_character(q)
    assert l_function_derivative(chi, s) == pytest.approx(l_function_derivative_series(chi, s), abs=1e-6)


# --- Siegel configurations ---------------------------------------------------------

def test_siegel_config_examples(cfg5, table):
    off = no_siegel_config(50.0)
    assert np.array_equal(lambda_siegel(off, 2000).values, cramer(50.0, 2000).values)
    assert not np.any(mu_siegel(off, 2000).values)
    again = make_siegel_config(5, 0.99, 50.0)
    assert abs(again.alpha - ALPHA_Q5) <= ALPHA_REPRO_TOL
    assert abs(cfg5.alpha) <= ALPHA_BOUND
    assert cfg5.alpha == pytest.approx(models.alpha_product(cfg5.chi, 0.99, 50.0) / cfg5.l_prime, rel=1e-15)


def test_siegel_config_errors(monkeypatch):
    with pytest.raises(InvalidArgument):
        make_siegel_config(5, 1.0, 50)
    with pytest.raises(InvalidArgument):
        make_siegel_config(5, 0.99, 5)
    with pytest.raises(InvalidArgument):
        make_siegel_config(1, 0.99, 50)
    with pytest.raises(InvalidConductor):
        make_siegel_config(9, 0.99, 50)
    with pytest.warns(UserWarning, match="below"):
        make_siegel_config(5, 0.5, 50)
    monkeypatch.setattr(models, "l_function_derivative", lambda chi, s: 1e-14)
    with pytest.raises(DegenerateConfig):
        make_siegel_config(5, 0.99, 50)


def test_siegel_key_values_roundtrip(cfg5):
    back = SiegelConfig.from_key_values(cfg5.to_key_values())
    assert (back.q, back.beta, back.Q, back.alpha, back.l_prime) == (
        cfg5.q, cfg5.beta, cfg5.Q, cfg5.alpha, cfg5.l_prime)
    assert not SiegelConfig.from_key_values(no_siegel_config(7.0).to_key_values()).exists
    with pytest.raises(InvalidArgument, match="bogus"):
        SiegelConfig.from_key_values("Q=50\nbogus=1\n")


def test_lambda_siegel_examples(cfg5):
    N = 5000
    lam = lambda_siegel(cfg5, N).values
    base = cramer(50.0, N).values
    n = np.arange(1, N + 1)
    chi = cfg5.chi(n)
    # chi(n) = 0 forces a shared prime with q < Q, so the Cramer factor already vanishes
    assert np.array_equal(lam[chi == 0], base[chi == 0])
    assert np.allclose(lam, base * (1 - n ** (cfg5.beta - 1.0) * chi), rtol=0, atol=1e-15)
    near = make_siegel_config(5, 1 - 1e-9, 50.0)
    hit = (chi == 1) & (base > 0)
    assert np.max(np.abs(lambda_siegel(near, N).values[hit])) < 1e-6


def test_mu_siegel_examples(cfg5):
    N = 3000
    vals = mu_siegel(cfg5, N).values
    n = np.arange(1, N + 1)
    rough = np.ones(N, dtype=bool)
    for p in primes_below(50):
        rough &= n % p != 0
    expect = cfg5.alpha * n[rough] ** (cfg5.beta - 1.0) * cfg5.chi(n[rough])
    assert np.allclose(vals[rough], expect, rtol=1e-15, atol=0)
    for m in (4, 12, 18, 4 * 53, 9 * 59, 25 * 7):
        assert vals[m - 1] == 0.0
    assert vals[2 * 53 - 1] == pytest.approx(-cfg5.alpha * 53 ** (cfg5.beta - 1) * cfg5.chi(53))


def test_mu_siegel_fast_equals_convolution(cfg5):
    for cfg in (cfg5, make_siegel_config(13, 0.95, 30.0)):
        fast = mu_siegel(cfg, 10**4).values
        slow = mu_siegel_convolution(cfg, 10**4).values
        assert np.array_equal(fast, slow)
    assert np.array_equal(mu_local(50.0, 100).values[:6], [1, -1, -1, 0, -1, 1])
    assert mu_prime(cfg5, 60).values[52] != 0 and mu_prime(cfg5, 60).values[48] == 0


# --- Euler products --------------------------------------------------------------------

def test_euler_product_check(cfg5):
    chk = euler_product_check(cfg5, 5, 2.0, 10**6)
    assert chk.gap <= chk.tail_bound + EULER_SLACK
    # tail oracle: the next 10^6 terms are dominated by the bound
    n = np.arange(10**6 + 1, 2 * 10**6 + 1)
    nxt = np.sum(np.abs(models.mu_siegel_values(cfg5, n)) / n.astype(float) ** 2)
    assert nxt <= chk.tail_bound
    chk30 = euler_product_check(cfg5, 30, 2.0, 10**6)
    assert chk30.gap <= chk30.tail_bound + EULER_SLACK
    off = euler_product_check(no_siegel_config(50.0), 5, 2.0, 10**4)
    assert (off.series, off.closed_form) == (0.0, 0.0)
    with pytest.raises(InvalidArgument):
        euler_product_check(cfg5, 5, 1.0, 100)
    with pytest.raises(InvalidArgument):
        euler_product_check(cfg5, 7, 2.0, 100)
    with pytest.raises(InvalidArgument):
        euler_product_check(cfg5, 5 * 53, 2.0, 100)


def test_euler_check_scales_with_alpha(cfg5):
    from dataclasses import replace

    a = euler_product_check(cfg5, 5, 2.0, 10**5)
    b = euler_product_check(replace(cfg5, alpha=2 * cfg5.alpha, l_prime=cfg5.l_prime / 2), 5, 2.0, 10**5)
    assert b.series == pytest.approx(2 * a.series, rel=1e-12)
    assert b.closed_form == pytest.approx(2 * a.closed_form, rel=1e-12)


# --- truncated divisor sums ----------------------------------------------------------------

def test_lambda_sharp_examples(table):
    N, c1 = 10**4, 0.3
    D = N**c1
    vals = lambda_sharp(N, c1, table).values
    for p in (17, 101, 9973):
        assert p > D and vals[p - 1] == pytest.approx(0.0, abs=1e-12)
    for p in (2, 3, 5, 11, 13):
        assert vals[p - 1] == pytest.approx(math.log(p), abs=1e-12)
    with pytest.raises(InvalidArgument):
        lambda_sharp(N, 1.0)


def test_lambda_sharp_mean(table):
    N = 10**6
    mean = lambda_sharp(N, 0.2, table).values.mean()
    mu = table.mobius_array
    D = int(N**0.2 + 1e-9)
    oracle = -math.fsum(mu[d] * math.log(d) * (N // d) for d in range(2, D + 1)) / N
    assert mean == pytest.approx(oracle, rel=1e-12)
    assert mean == pytest.approx(LAMBDA_SHARP_MEAN_1E6, rel=1e-12)
    # the mean approaches 1 once the truncation is long enough
    assert abs(lambda_sharp(N, 0.4, table).values.mean() - 1) <= 0.05


# --- GY majorant ----------------------------------------------------------------------------

def test_cutoff_energy():
    assert cutoff_energy() == pytest.approx(math.pi**2 / 32, abs=1e-10)
    x = np.array([0.0, 0.5, 1.0, 1.5, 2.0, 3.0, -1.5])
    assert np.allclose(models.gy_cutoff(x), [0.5, 0.5, 0.5, 0.25, 0.0, 0.0, 0.25])


def test_gy_majorant_examples(table):
    N, W, b = 2000, 30, 1
    R = N ** 0.25
    params = GYWeightParams(W, b, R)
    nu = gy_majorant(params, N).values
    single = (8 / 30) * math.log(R) / (4 * params.c_chi2)
    n = np.arange(1, N + 1)
    m = W * n + b
    prime_big = table.is_prime_array[m] & (m > R * R)
    assert np.allclose(nu[prime_big], single, rtol=1e-12)
    # brute divisor enumeration at a few points
    for i in (0, 6, 100, 1234):
        v = int(m[i])
        s = sum(table.mobius_array[d] * float(models.gy_cutoff(math.log(d) / math.log(R)))
                for d in range(1, v + 1) if v % d == 0)
        assert nu[i] == pytest.approx((8 / 30) / params.c_chi2 * math.log(R) * s * s, rel=1e-12, abs=1e-15)
    with pytest.raises(InvalidArgument):
        GYWeightParams(30, 6, R)
    with pytest.raises(InvalidArgument):
        GYWeightParams(30, 1, 1.0)


def test_gy_mean_recorded():
    N = 10**5
    nu = gy_majorant(GYWeightParams(30, 1, N ** (1 / 20)), N)
    assert nu.values.mean() == pytest.approx(GY_MEAN_OBSERVED, rel=1e-12)


def test_dual_moment_examples():
    ones = ArithSignal.cyclic(np.ones(64))
    for j in (0, 1, 2):
        assert dual_moment(ones, 2, j) == pytest.approx(1, abs=1e-12)
    rng = np.random.default_rng(3)
    assert dual_moment(ArithSignal.cyclic(rng.random(50)), 3, 0) == 1.0
    with pytest.raises(InvalidArgument):
        dual_moment(ones, 2, 3)


# --- pointwise bounds and uniformity trends ---------------------------------------------------

def test_pointwise_constants_stable(cfg5, table):
    runs = [pointwise_constants(N, cfg5, table=table) for N in (10**4, 10**5, 10**6)]
    for key in runs[0]:
        vals = [r[key] for r in runs]
        assert max(vals) <= POINTWISE_STABILITY * min(vals), key


def test_siegel_correction_decreases_with_conductor():
    N = 10**5
    Q = 50.0
    norms = []
    for q in (5, 13, 40):
        cfg = make_siegel_config(q, 0.99, Q)
        diff = lambda_siegel(cfg, N).values - cramer(Q, N).values
        norms.append(norm_interval(ArithSignal.interval(diff), 2).value)
    assert norms[0] > norms[1] > norms[2], norms
