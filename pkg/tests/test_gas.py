import importlib
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from arcgas import _kernels_py, gas, kernels
from arcgas.arcs import make_circular_arc, make_interval
from arcgas.equilibrium import ChebSeries
from arcgas.selberg import brute_expectation_interval, logZ_beta2_product

try:
    compiled = importlib.import_module("arcgas._kernels")
except ImportError:
    compiled = None


@pytest.fixture(scope="module")
def perturbed_model(perturbed_an):
    return gas.gas_model(perturbed_an, K=16)


def random_config(rng, n):
    return np.sort(rng.uniform(0.05, np.pi - 0.05, n))


# exact beta = 2 partition functions


@pytest.mark.parametrize("n", [1, 2, 5, 12, 30])
def test_gram_matches_product_on_interval(n):
    assert gas.logZ_beta2_gram(make_interval(), n) == pytest.approx(logZ_beta2_product(n), abs=1e-9)


@pytest.mark.parametrize("n", [2, 3])
def test_gram_matches_brute_force_on_circle(n):
    spec = make_circular_arc(np.pi / 2)
    assert gas.logZ_beta2_gram(spec, n) == pytest.approx(gas.brute_logZ_arc(spec, n, 2.0), abs=1e-9)


def test_gram_extended_precision_route():
    spec = make_circular_arc(np.pi / 3)
    t, wt = np.polynomial.legendre.leggauss(64)
    z, w = spec.point(t), wt * np.abs(spec.tangent(t))
    fast, _ = gas._gram_norms(z, w, 5, gas._dot)
    import mpmath
    with mpmath.workdps(40):
        zm = np.array([mpmath.mpc(c) for c in z], dtype=object)
        wm = np.array([mpmath.mpf(x) for x in w], dtype=object)
        slow, defect = gas._gram_norms(zm, wm, 5, gas._mp_dot, mpmath.sqrt, mpmath.log)
    assert defect < 1e-30
    assert np.allclose([float(v) for v in slow], fast, atol=1e-12)


def test_gram_rejects_coarse_rule():
    with pytest.raises(ValueError):
        gas.logZ_beta2_gram(make_interval(), 20, quad_M=100)


def test_arclength():
    assert gas.arclength(make_circular_arc(np.pi / 2)) == pytest.approx(np.pi, abs=1e-13)
    assert gas.arclength(make_interval()) == pytest.approx(2)


# the model and its moves


def test_params_validation():
    for bad in ({"n": 1}, {"n": 4, "s": 1.5}, {"n": 4, "beta": 0.0}):
        with pytest.raises(ValueError):
            gas.GasParams(**bad)


def test_interval_model_is_free(interval_an):
    model = gas.gas_model(None, K=4)
    assert not model.A.any() and not model.dvec.any()
    with pytest.raises(ValueError):
        gas.gas_model(interval_an, K=65)


def test_padded_model(perturbed_model):
    big = perturbed_model.padded(20)
    assert big.K == 20 and big.K_int == 16
    assert np.array_equal(big.A[:16, :16], perturbed_model.A)
    assert perturbed_model.padded(4) is perturbed_model


@pytest.mark.parametrize("beta,s", [(2.0, 1.0), (1.0, 0.3), (4.0, 0.8)])
def test_move_delta_matches_density_difference(perturbed_model, beta, s):
    rng = np.random.default_rng(1)
    theta = random_config(rng, 9)
    for mu in range(9):
        new = rng.uniform(0.01, np.pi - 0.01)
        moved = theta.copy()
        moved[mu] = new
        expect = (gas.log_density(perturbed_model, moved, beta, s)
                  - gas.log_density(perturbed_model, theta, beta, s))
        assert gas.move_delta(perturbed_model, theta, mu, new, beta, s) == pytest.approx(expect, abs=1e-10)


@settings(max_examples=200)
@given(st.floats(0.001, math.pi - 0.001), st.floats(0.001, math.pi - 0.001), st.floats(0.01, math.pi))
def test_proposal_is_symmetric(x, y, step):
    assert gas.proposal_density(x, y, step) == gas.proposal_density(y, x, step)


def test_proposal_normalized():
    x, step = 0.2, 0.5
    ys = np.linspace(0, np.pi, 200001)
    dens = np.array([gas.proposal_density(x, y, step) for y in ys[::10]])
    assert np.trapezoid(dens, ys[::10]) == pytest.approx(1, abs=1e-3)


@given(st.floats(-math.pi, 2 * math.pi))
def test_reflect_lands_in_range(x):
    y = gas.kernels_reflect(x)
    assert 0 <= y <= math.pi
    assert _kernels_py._reflect(x) == y


@pytest.mark.skipif(compiled is None, reason="compiled kernels not built")
@pytest.mark.parametrize("beta,s", [(2.0, 1.0), (1.0, 0.5)])
def test_backends_agree(perturbed_model, beta, s):
    rng = np.random.default_rng(7)
    n = 40
    theta = random_config(rng, n)
    states = []
    for impl in (compiled, _kernels_py):
        th = theta.copy()
        X = _kernels_py.cos_sums(th, perturbed_model.K)
        st_ = [th, np.cos(th), X, perturbed_model.A @ X]
        draws = np.random.default_rng(3)
        acc = 0
        for _ in range(30):
            r = draws.random(2 * n)
            acc += impl.sweep(*st_, perturbed_model.A, perturbed_model.dvec, beta, s, 0.3, r[:n], 1 - r[n:])
        states.append((acc, st_))
    (a1, s1), (a2, s2) = states
    assert a1 == a2
    for u, v in zip(s1, s2):
        assert np.allclose(u, v, atol=1e-11)
    th = theta.copy()
    args = (th, np.cos(th), perturbed_model.A @ _kernels_py.cos_sums(th, 16), perturbed_model.A,
            perturbed_model.dvec, beta, s, 3, 1.234)
    assert compiled.delta_energy(*args) == pytest.approx(_kernels_py.delta_energy(*args), abs=1e-11)
    assert np.allclose(compiled.cos_sums(th, 16), _kernels_py.cos_sums(th, 16), atol=1e-12)


def test_backend_reported():
    assert kernels.BACKEND in ("cython", "python")


def test_detailed_balance(perturbed_model):
    # pi(x) q(x -> y) min(1, r) is symmetric in (x, y)
    rng = np.random.default_rng(11)
    beta, s, step = 1.5, 0.7, 0.4
    for _ in range(50):
        theta = random_config(rng, 6)
        mu = rng.integers(6)
        new = gas.kernels_reflect(theta[mu] + step * (2 * rng.random() - 1))
        moved = theta.copy()
        moved[mu] = new
        lx = gas.log_density(perturbed_model, theta, beta, s)
        ly = gas.log_density(perturbed_model, moved, beta, s)
        fwd = lx + math.log(gas.proposal_density(theta[mu], new, step)) + min(0, ly - lx)
        bwd = ly + math.log(gas.proposal_density(new, theta[mu], step)) + min(0, lx - ly)
        assert abs(fwd - bwd) <= 1e-12 * max(1, abs(fwd))


# chains


def test_batch_means_iid():
    x = np.random.default_rng(0).standard_normal(32000)
    mean, se, ess = gas.batch_means(x)
    assert abs(mean) < 4 * se
    assert se == pytest.approx(1 / math.sqrt(32000), rel=0.35)
    assert ess > 10000
    with pytest.raises(ValueError):
        gas.batch_means(np.ones(10))


def test_chain_is_deterministic(perturbed_model):
    p = gas.GasParams(n=12, beta=2.0, s=0.5, seed=5, sweeps=400, burn_in=100, checkpoint=100)
    a = gas.mcmc_run(p, perturbed_model, keep_series=True)
    b = gas.mcmc_run(p, perturbed_model, keep_series=True)
    assert a.to_dict() == b.to_dict()
    assert a.series_csv() == b.series_csv()
    c = gas.mcmc_run(p, perturbed_model, chain=1)
    assert c.stats["X1"] != a.stats["X1"]


def test_chain_summary_contents(perturbed_model):
    p = gas.GasParams(n=16, beta=2.0, sweeps=640, burn_in=200, checkpoint=64)
    u = ChebSeries.from_coeffs([1.0, 0.5])
    summ = gas.mcmc_run(p, perturbed_model, {"linear": gas.linear_statistic(u)}, keep_series=True)
    assert 0.2 <= summ.acceptance <= 0.5
    assert summ.cache_deviation < 1e-9
    assert summ.backend == kernels.BACKEND
    lines = summ.series_csv().splitlines()
    assert lines[0].split(",")[:3] == ["sweep", "X1", "X2"] and lines[0].endswith("linear")
    assert len(lines) == 641
    s = summ.series
    assert np.allclose(s["linear"], s["X1"] + 0.5 * s["X2"])


def test_two_particle_second_moment():
    p = gas.GasParams(n=2, beta=2.0, sweeps=64000, burn_in=2000, seed=3)
    model = gas.gas_model(None, K=1)
    summ = gas.mcmc_run(p, model, {"sq": lambda X, m: X[:, 0] ** 2})
    exact = brute_expectation_interval(2, 2.0, lambda x: x.sum(axis=1) ** 2)
    est = summ.stats["sq"]
    assert abs(est["mean"] - exact) < 4 * est["se"]


def test_exact_mode_tracks_truncated_density(perturbed_an, perturbed_model):
    # the K = 16 density differs from the pairwise one by a configuration-independent constant
    exact = gas.ExactSweeper(perturbed_an.eq)
    rng = np.random.default_rng(2)
    diffs = []
    for _ in range(10):
        theta = random_config(rng, 8)
        diffs.append(exact.log_density(theta, 2.0, 1.0) - gas.log_density(perturbed_model, theta, 2.0, 1.0))
    assert np.ptp(diffs) < 1e-6


def test_exact_sweeper_runs(perturbed_an, perturbed_model):
    p = gas.GasParams(n=6, beta=2.0, sweeps=320, burn_in=50, checkpoint=32)
    summ = gas.mcmc_run(p, perturbed_model, sweeper=gas.ExactSweeper(perturbed_an.eq))
    assert summ.cache_deviation < 1e-9


def test_thermo_interval_is_zero():
    res = gas.thermo_log_ratio(gas.gas_model(None, K=4), 10, 2.0, sweeps=64, burn_in=8)
    assert res["estimate"] == 0 and res["se"] == 0 and len(res["nodes"]) == 8


def test_b_prime_constant_terms(perturbed_model):
    n, beta = 10, 1.0
    X = np.zeros((1, perturbed_model.K))
    const = gas.b_prime_request(n, beta)(X, perturbed_model)[0]
    assert const == pytest.approx(0.5 * n * n * perturbed_model.log_2cap + 0.5 * n * perturbed_model.l0)


def test_exact_interval_means():
    from fractions import Fraction
    u = ChebSeries.from_coeffs([0.0, 1.0])
    for n in (2, 3, 4):
        rational = gas.exact_interval_mean_rational(n, 2)
        # E[sum T_2] = -n / (2n + 1) at beta = 1
        assert Fraction(str(rational)) == Fraction(-n, 2 * n + 1)
    assert gas.exact_interval_mean(3, 1.0, u) == pytest.approx(-3 / 7, abs=1e-12)


def test_fallback_selected_by_environment():
    import os
    import subprocess
    import sys
    env = dict(os.environ, ARCGAS_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "from arcgas import kernels; print(kernels.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
