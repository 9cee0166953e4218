import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import optimize

from kairos.synth import SynthSpec, _rng, gen_participation_counts, sample_discrete_power_law
from kairos.tails import (
    TailFit,
    ccdf,
    fit_tail,
    golden_section_max,
    log_likelihood,
    moment_stability,
    survival,
)


def reference_log_norm(mu, x_min, cut=20_000):
    """log of sum_{x >= x_min} x^-mu via a direct sum plus an Euler-Maclaurin tail."""
    x = np.arange(x_min, cut, dtype=float)
    head = np.sum(x ** -mu)
    tail = cut ** (1 - mu) / (mu - 1) + 0.5 * cut ** -mu + mu * cut ** (-mu - 1) / 12
    return np.log(head + tail)


def reference_mle(values, x_min):
    t = np.asarray(values, dtype=float)
    t = t[t >= x_min]
    s, n = np.log(t).sum(), t.size
    res = optimize.minimize_scalar(lambda m: m * s + n * reference_log_norm(m, x_min),
                                   bounds=(1.01, 6), method="bounded", options={"xatol": 1e-7})
    return res.x


# -- ccdf ------------------------------------------------------------------


def test_ccdf_small_examples():
    x, p = ccdf([1, 1, 2])
    assert list(x) == [1, 2] and p == pytest.approx([1 / 3, 0])
    x, p = ccdf([5])
    assert list(x) == [5] and list(p) == [0]


def test_ccdf_rejects_bad_input():
    with pytest.raises(ValueError):
        ccdf([])
    with pytest.raises(ValueError):
        ccdf([0, 1])
    with pytest.raises(ValueError):
        ccdf([1.5, 2])


def test_ccdf_brute_force():
    draws = sample_discrete_power_law(1000, 2.2, 1, _rng(5, 0))
    x, p = ccdf(draws)
    srt = sorted(draws.tolist())
    for xv, pv in zip(x, p):
        assert pv == sum(1 for d in srt if d > xv) / len(srt)


@given(st.lists(st.integers(1, 60), min_size=1, max_size=80))
def test_ccdf_monotone(vals):
    x, p = ccdf(vals)
    assert p[0] <= 1 and p[-1] == 0
    assert np.all(np.diff(p) <= 0) and np.all(np.diff(x) > 0)


# -- fitting ---------------------------------------------------------------


def test_golden_section_quadratic():
    assert golden_section_max(lambda m: -(m - 2.7) ** 2, 1.01, 6) == pytest.approx(2.7, abs=1e-6)
    assert golden_section_max(lambda m: m, 1.01, 6) == 6


@pytest.mark.parametrize("x_min", [1, 3])
def test_mle_matches_independent_optimizer(x_min):
    draws = sample_discrete_power_law(3000, 2.6, x_min, _rng(9, x_min))
    fit = fit_tail(draws, x_min=x_min)
    assert fit.mu == pytest.approx(reference_mle(draws, x_min), abs=1e-5)
    tail = draws[draws >= x_min]
    ll_ref = -fit.mu * np.log(tail).sum() - tail.size * reference_log_norm(fit.mu, x_min)
    assert fit.log_likelihood == pytest.approx(ll_ref, rel=1e-9)


def test_recovers_mu_2_5_from_1e5_draws():
    draws = sample_discrete_power_law(100_000, 2.5, 1, _rng(21, 0))
    assert abs(fit_tail(draws, x_min=1).mu - 2.5) < 0.05
    assert abs(fit_tail(draws).mu - 2.5) < 0.05


def test_stderr_near_asymptotic_formula():
    draws = sample_discrete_power_law(20_000, 2.4, 10, _rng(3, 0))
    fit = fit_tail(draws, x_min=10)
    # continuous-limit approximation (mu - 1) / sqrt(n) is accurate for large x_min
    assert fit.mu_stderr == pytest.approx((fit.mu - 1) / np.sqrt(fit.n_tail), rel=0.05)


def test_local_optimality():
    draws = sample_discrete_power_law(5000, 2.3, 2, _rng(4, 0))
    fit = fit_tail(draws)
    t = draws[draws >= fit.x_min]
    for d in (-0.1, 0.1):
        assert fit.log_likelihood >= log_likelihood(fit.mu + d, np.log(t).sum(), t.size, fit.x_min)


def test_permutation_invariance():
    draws = sample_discrete_power_law(3000, 2.8, 1, _rng(6, 0))
    perm = np.random.default_rng(0).permutation(draws)
    assert fit_tail(draws) == fit_tail(perm)


def test_degenerate_and_insufficient():
    with pytest.raises(ValueError, match="degenerate support"):
        fit_tail([7] * 50)
    with pytest.raises(ValueError, match="insufficient"):
        fit_tail([1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12], x_min=5)
    with pytest.raises(ValueError, match="insufficient"):
        fit_tail([1, 2, 3])


def test_small_sample_may_fail_cleanly():
    draws = sample_discrete_power_law(10, 3.0, 1, _rng(8, 0))
    try:
        fit = fit_tail(draws)
    except ValueError as exc:
        assert "insufficient" in str(exc) or "degenerate" in str(exc)
    else:
        assert fit.n_tail >= 10


@pytest.mark.parametrize("planted", [1, 4])
def test_ks_selected_xmin_close_to_planted(planted):
    hits = 0
    for seed in range(100):
        counts = gen_participation_counts(SynthSpec(seed=seed, mu_planted=2.37, x_min_planted=planted), n=2000)
        hits += fit_tail(counts).x_min <= planted + 2
    assert hits >= 90


def test_ks_distance_is_small_at_truth():
    draws = sample_discrete_power_law(50_000, 2.37, 4, _rng(1, 1))
    fit = fit_tail(draws, x_min=4)
    assert fit.ks_distance < 0.01


def test_survival_function_basics():
    assert survival(4, 2.37, 4) == pytest.approx(1.0)
    s = survival(np.arange(4, 100), 2.37, 4)
    assert np.all(np.diff(s) < 0)


# -- moments ---------------------------------------------------------------


def test_moment_conventions():
    assert moment_stability(2.37, "ccdf").finite == {1: True, 2: True}
    assert moment_stability(2.37, "pmf").finite == {1: True, 2: False}
    assert moment_stability(1.5, "ccdf").finite == {1: True, 2: False}
    assert moment_stability(3.1, "pmf").finite == {1: True, 2: True}
    assert moment_stability(3.1, "ccdf").finite == {1: True, 2: True}
    fit = TailFit(2.37, 0.02, 4, -5.63e5, 1000, 0.01, 2000)
    rep = moment_stability(fit)
    assert rep.convention == "pmf" and "k + 1" in rep.describe()
    with pytest.raises(ValueError):
        moment_stability(2.0, "cdf")
