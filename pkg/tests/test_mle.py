from __future__ import annotations

import json
import math

import numpy as np
import pytest

from hawkes_lob.hawkes import EventSequence, HawkesSpec, simulate
from hawkes_lob.mle import (
    FitConfig,
    empirical_unit_arrivals,
    expected_unit_arrivals,
    fit_mle,
    log_likelihood,
)

TABLE3 = {
    "AAPL": (1.4683, 1045.2676, 2556.1844),
    "AMZN": (0.6443, 653.7524, 1556.1702),
}


def direct_loglik(baseline, alpha, beta, events):
    """O(n^2) double sum straight from the intensity and its integral."""
    t = events.times
    T = events.horizon
    ll = 0.0
    for i in range(t.size):
        ll += math.log(baseline + alpha * np.sum(np.exp(-beta * (t[i] - t[:i]))))
    comp = baseline * T + (alpha / beta) * np.sum(1.0 - np.exp(-beta * (T - t)))
    return ll - comp


def test_trivial_likelihoods():
    assert log_likelihood(2.0, 1.0, 3.0, EventSequence([], 5.0)) == pytest.approx(-10.0)
    ev = EventSequence([0.5, 1.0, 4.0], 5.0)
    assert log_likelihood(2.0, 0.0, 3.0, ev) == pytest.approx(3 * math.log(2.0) - 10.0)
    with pytest.raises(ValueError):
        log_likelihood(0.0, 1.0, 1.0, ev)


def test_recursion_matches_direct_sum():
    rng = np.random.default_rng(0)
    for _ in range(20):
        lam, a, b = rng.uniform(0.2, 2.0), rng.uniform(0.0, 3.0), rng.uniform(0.5, 5.0)
        if a / b >= 0.95:
            a = 0.5 * b
        events = simulate(HawkesSpec.exponential(lam, a, b), 300.0, seed=rng.integers(1 << 31))
        ref = direct_loglik(lam, a, b, events)
        assert log_likelihood(lam, a, b, events) == pytest.approx(ref, rel=1e-10)


def test_long_horizon_tail_cutoff():
    # events far before T contribute exactly alpha/beta to the compensator
    ev = EventSequence([1.0, 1.5, 2.0], 1e4)
    assert log_likelihood(1.0, 2.0, 5.0, ev) == pytest.approx(direct_loglik(1.0, 2.0, 5.0, ev), rel=1e-14)


def test_expected_unit_arrivals():
    assert expected_unit_arrivals(*TABLE3["AAPL"]) == pytest.approx(2.4841, abs=5e-4)
    assert expected_unit_arrivals(*TABLE3["AMZN"]) == pytest.approx(1.1110, abs=5e-4)
    assert expected_unit_arrivals(1.5, 0.0, 2.0) == 1.5
    with pytest.raises(ValueError, match="supercritical"):
        expected_unit_arrivals(1.0, 2.0, 2.0)


def test_empirical_unit_arrivals():
    assert empirical_unit_arrivals(EventSequence(np.linspace(0.1, 50, 100), 50.0)) == 2.0
    assert empirical_unit_arrivals(EventSequence([], 10.0)) == 0.0
    rates = [empirical_unit_arrivals(simulate(HawkesSpec.exponential(*TABLE3["AAPL"]), 1e4, seed=s))
             for s in range(8)]
    se = np.std(rates, ddof=1) / math.sqrt(len(rates))
    assert abs(np.mean(rates) - 2.484) < 3 * se


def test_config_validation():
    with pytest.raises(ValueError):
        FitConfig(baseline_bounds=(0.0, 1.0))
    with pytest.raises(ValueError):
        FitConfig(alpha_bounds=(2.0, 1.0))
    with pytest.raises(ValueError):
        FitConfig(budget=0)


def test_too_few_events():
    with pytest.raises(ValueError, match="unidentifiable"):
        fit_mle(EventSequence([1.0, 2.0, 3.0, 4.0, 5.0], 10.0))


def test_fit_recovers_parameters():
    truth = (0.8, 1.2, 2.0)
    events = simulate(HawkesSpec.exponential(*truth), 4000.0, seed=21)
    fit = fit_mle(events, FitConfig(seed=1))
    assert fit.converged
    np.testing.assert_allclose([fit.baseline, fit.alpha, fit.beta], truth, rtol=0.15)
    assert fit.mu_hat == pytest.approx(0.6, rel=0.1)
    # the optimum beats the truth on the same data
    assert fit.loglik >= log_likelihood(*truth, events) - 1e-6


def test_fit_is_deterministic():
    events = simulate(HawkesSpec.exponential(0.8, 1.2, 2.0), 500.0, seed=2)
    a = fit_mle(events, FitConfig(seed=3, budget=3000))
    b = fit_mle(events, FitConfig(seed=3, budget=3000))
    assert a == b


def test_poisson_truth_gives_small_branching_ratio():
    events = simulate(HawkesSpec(2.0), 5000.0, seed=8)
    fit = fit_mle(events, FitConfig(seed=0))
    assert fit.mu_hat < 0.02
    assert fit.expected_unit_arrivals == pytest.approx(len(events) / 5000.0, rel=0.02)


def test_budget_exhaustion_reports_not_converged():
    events = simulate(HawkesSpec.exponential(0.8, 1.2, 2.0), 200.0, seed=2)
    fit = fit_mle(events, FitConfig(budget=1))
    assert not fit.converged
    assert fit.evaluations == 1
    payload = json.loads(fit.to_json())
    assert payload["converged"] is False
