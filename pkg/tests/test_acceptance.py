"""Acceptance suite.

Each test checks one criterion at its stated tolerance and prints a single
``PASS``/``FAIL criterion N`` line; the lines are repeated in the terminal
summary. Seeds and seed sets are fixed in advance and never re-drawn.
"""

from __future__ import annotations

import math

import numpy as np
import pytest

from hawkes_lob.compound import CompoundModel
from hawkes_lob.diffusion import chpdo_closed_form, compute_limit_params, diffusion_coefficient, two_state_closed_form
from hawkes_lob.empirical import (
    best_fit_coefficient,
    empirical_std_curve,
    fit_state_model,
    mean_squared_residual,
    theoretical_std_curve,
    verify_fclt,
    verify_lln,
)
from hawkes_lob.hawkes import Capped, EventSequence, ExponentialKernel, HawkesSpec, simulate
from hawkes_lob.lob import PriceChangeSeries, build_quantile_states
from hawkes_lob.markov import simulate_chain, stationary_distribution
from hawkes_lob.mle import FitConfig, expected_unit_arrivals, fit_mle, log_likelihood
from hawkes_lob.synthetic import PROFILES, synthetic_changes

pytestmark = pytest.mark.slow

# reference Hawkes fits (baseline, alpha, beta) and the unit-interval rates they imply
HAWKES = {
    "AAPL": (1.4683, 1045.2676, 2556.1844),
    "AMZN": (0.6443, 653.7524, 1556.1702),
    "GOOG": (0.4985, 865.8553, 1980.4409),
    "MSFT": (0.0659, 479.3482, 908.0032),
    "INTC": (0.0471, 399.6389, 760.4991),
}
UNIT_ARRIVALS = {"AAPL": 2.4841, "AMZN": 1.1110, "GOOG": 0.8857, "MSFT": 0.1396, "INTC": 0.0992}

# fixed-tick sign chains: p_dd, p_uu, sigma, a*
SIGN_CHAINS = {
    "AAPL": (0.4956, 0.4933, 0.0049, -1.1463e-5),
    "AMZN": (0.4635, 0.4576, 0.0046, -2.7373e-5),
    "GOOG": (0.4769, 0.4461, 0.0046, -1.4301e-4),
    "MSFT": (0.6269, 0.5827, 0.0062, -2.7956e-4),
    "INTC": (0.6106, 0.5588, 0.0059, -3.1185e-4),
}
COEFFICIENTS = {"INTC": 0.00186, "MSFT": 0.00231}
DELTA = 0.005
TRIM = 900.0


def trimmed(changes: PriceChangeSeries, trim: float = TRIM) -> PriceChangeSeries:
    start, end = changes.start + trim, changes.end - trim
    keep = (changes.times >= start) & (changes.times <= end)
    return PriceChangeSeries(changes.times[keep], changes.changes[keep], changes.s0, start, end)


def model_coefficient(sigma_star: float, spec: HawkesSpec) -> float:
    return diffusion_coefficient(sigma_star, spec.baseline, spec.branching_ratio)


# 1 ---------------------------------------------------------------------------


def test_criterion_01_unit_arrivals(criterion):
    rec = criterion(1)
    errs = {k: abs(expected_unit_arrivals(*HAWKES[k]) - UNIT_ARRIVALS[k]) for k in HAWKES}
    worst = max(errs, key=errs.get)
    rec.finish(max(errs.values()) <= 5e-4,
               f"expected unit arrivals, worst abs error {errs[worst]:.2e} ({worst}) <= 5e-4")


# 2 ---------------------------------------------------------------------------


def test_criterion_02_fixed_tick_closed_form(criterion):
    rec = criterion(2)
    sig_err, a_err = {}, {}
    for k, (p_dd, p_uu, sigma, a_star) in SIGN_CHAINS.items():
        lp = chpdo_closed_form(p_dd, p_uu, DELTA)
        sig_err[k] = abs(lp.sigma_star - sigma)
        a_err[k] = abs(lp.a_star / a_star - 1)
    ok = max(sig_err.values()) <= 1e-4 and max(a_err.values()) <= 0.05
    rec.finish(ok, f"sigma worst abs error {max(sig_err.values()):.2e} <= 1e-4, "
                   f"a* worst rel error {100 * max(a_err.values()):.2f}% <= 5%")


# 3 ---------------------------------------------------------------------------


def test_criterion_03_theoretical_coefficients(criterion):
    rec = criterion(3)
    errs = {}
    for k, target in COEFFICIENTS.items():
        baseline, alpha, beta = HAWKES[k]
        coef = diffusion_coefficient(SIGN_CHAINS[k][2], baseline, alpha / beta)
        errs[k] = abs(coef / target - 1)
    rec.finish(max(errs.values()) <= 0.01,
               ", ".join(f"{k} rel error {100 * v:.2f}%" for k, v in errs.items()) + " <= 1%")


# 4 ---------------------------------------------------------------------------


def variance_oracle(P: np.ndarray, marks: np.ndarray) -> tuple[float, float]:
    """Mean and CLT variance from the fundamental matrix Z = (I - P + 1 pi)^-1."""
    n = P.shape[0]
    w, v = np.linalg.eig(P.T)
    pi = np.real(v[:, np.argmin(np.abs(w - 1))])
    pi = pi / pi.sum()
    Z = np.linalg.inv(np.eye(n) - P + np.outer(np.ones(n), pi))
    b = marks - pi @ marks
    return float(pi @ marks), float(2 * pi @ (b * (Z @ b)) - pi @ (b * b))


def variance_growth(P, marks, a_star, t_rel, steps, seed) -> float:
    """Growth rate of Var(sum of centred marks) from one stationary path.

    Overlapping batch sums at lengths b and 2b; ``2 V(2b) - V(b)`` cancels
    the leading 1/b bias. The batch length scales with the relaxation time.
    """
    x = simulate_chain(P, stationary_distribution(P), steps, seed=seed)
    c = np.concatenate([[0.0], np.cumsum(marks[x] - a_star)])

    def obm(b):
        return float(np.var(c[b:] - c[:-b])) / b

    b = int(max(25, math.ceil(10 * t_rel)))
    return 2 * obm(2 * b) - obm(b)


def test_criterion_04_general_formula_equivalence(criterion):
    rec = criterion(4)
    rng = np.random.default_rng(20240521)
    worst_alg, worst_mc, checked2 = 0.0, 0.0, 0
    for _ in range(1000):
        n = int(rng.integers(2, 13))
        P = rng.dirichlet(np.ones(n), size=n)
        marks = rng.normal(size=n)
        lp = compute_limit_params(P, marks)
        a_ref, var_ref = variance_oracle(P, marks)
        worst_alg = max(worst_alg, abs(lp.a_star - a_ref) / (1 + abs(a_ref)),
                        abs(lp.sigma_star ** 2 - var_ref) / var_ref)

        # two-state specialisations against the general formula
        p_dd, p_uu = rng.uniform(0.01, 0.99, 2)
        P2 = np.array([[p_dd, 1 - p_dd], [1 - p_uu, p_uu]])
        a1, a2 = np.sort(rng.normal(size=2))
        delta = rng.uniform(1e-3, 1.0)
        for closed, m in ((two_state_closed_form(p_dd, p_uu, a1, a2), [a1, a2]),
                          (chpdo_closed_form(p_dd, p_uu, delta), [-delta, delta])):
            ref = compute_limit_params(P2, m)
            worst_alg = max(worst_alg, abs(closed.a_star - ref.a_star) / (1 + abs(ref.a_star)),
                            abs(closed.sigma_star - ref.sigma_star) / ref.sigma_star)
            checked2 += 1

        t_rel = 1 / (1 - np.sort(np.abs(np.linalg.eigvals(P)))[-2])
        mc = variance_growth(P, marks, lp.a_star, t_rel, 10**6, int(rng.integers(1 << 31)))
        worst_mc = max(worst_mc, abs(mc / lp.sigma_star ** 2 - 1))
    ok = worst_alg <= 1e-10 and worst_mc <= 0.05
    rec.finish(ok, f"1000 chains + {checked2} two-state cases, worst algebraic rel gap {worst_alg:.1e} <= 1e-10, "
                   f"worst simulated variance-growth rel gap {100 * worst_mc:.2f}% <= 5%")


# 5 ---------------------------------------------------------------------------


def test_criterion_05_mle_round_trip(criterion):
    rec = criterion(5)
    truth = np.array(HAWKES["AAPL"])
    mu_true = truth[1] / truth[2]
    hits, worst = 0, []
    for seed in range(10):
        events = simulate(HawkesSpec.exponential(*truth), 3e4, seed=seed)
        fit = fit_mle(events, FitConfig(seed=seed))
        rel = np.abs(np.array([fit.baseline, fit.alpha, fit.beta]) / truth - 1)
        mu_rel = abs(fit.mu_hat / mu_true - 1)
        hits += bool(np.all(rel <= 0.10) and mu_rel <= 0.05)
        worst.append(max(rel.max(), mu_rel))
    rec.finish(hits >= 8, f"{hits}/10 seeds recover parameters within 10% and branching ratio within 5% "
                          f"(median worst rel error {100 * np.median(worst):.1f}%), need >= 8")


# 6 ---------------------------------------------------------------------------


def test_criterion_06_fclt(criterion):
    rec = criterion(6)
    model = CompoundModel.chpdo(HawkesSpec.exponential(1.0, 1.0, 2.0), 0.5, 0.5, DELTA)
    report = verify_fclt(model, n=1e4, paths=1000, seed=0, jobs=4)
    target = DELTA * math.sqrt(2.0)
    assert report.predicted == pytest.approx(target, rel=1e-12)
    ok = abs(report.z) <= 3 and report.ks_pvalue >= 0.01
    rec.finish(ok, f"sample std {report.sample:.6f} vs {target:.6f}, z {report.z:+.2f} (|z| <= 3), "
                   f"KS p {report.ks_pvalue:.3f} >= 0.01")


# 7 ---------------------------------------------------------------------------


def test_criterion_07_lln(criterion):
    rec = criterion(7)
    p_dd, p_uu = SIGN_CHAINS["AAPL"][:2]
    linear = CompoundModel.chpdo(HawkesSpec.exponential(*HAWKES["AAPL"]), p_dd, p_uu, DELTA)
    a = verify_lln(linear, n=1e5, paths=100, seed=0, jobs=4)
    capped = CompoundModel(
        HawkesSpec(0.8, ExponentialKernel(1.5, 2.0), Capped(2.0)),
        [[0.6, 0.3, 0.1], [0.2, 0.5, 0.3], [0.3, 0.3, 0.4]],
        [-0.01, 0.005, 0.02],
    )
    b = verify_lln(capped, n=1e4, paths=200, seed=0, jobs=4)
    ok = abs(a.z) <= 3 and abs(b.z) <= 3
    rec.finish(ok, f"linear CHPDO z {a.z:+.2f}, capped-link z {b.z:+.2f} (|z| <= 3)")


# 8 ---------------------------------------------------------------------------

# synthetic days scored for the regression check; fixed before any were run
HARNESS_SEEDS = range(200)


def day_percent_error(ticker: str, seed: int) -> float:
    profile = PROFILES[ticker]
    changes = trimmed(synthetic_changes(profile, seed))
    _, _, lp = fit_state_model(changes, "chpdo")
    coef = model_coefficient(lp.sigma_star, profile.spec)
    return best_fit_coefficient(empirical_std_curve(changes, lp.a_star), coef).percent_error


def test_criterion_08_harness_self_consistency(criterion):
    rec = criterion(8)
    fixed = best_fit_coefficient(theoretical_std_curve(0.00186), 0.00186)
    exact = fixed.coefficient == pytest.approx(0.00186, rel=1e-12) and fixed.percent_error < 1e-9
    parts, ok = [f"fixed point error {fixed.percent_error:.1e}%"], exact
    for ticker in ("INTC", "MSFT"):
        errs = np.array([day_percent_error(ticker, s) for s in HARNESS_SEEDS])
        med = float(np.median(errs))
        ok = ok and med < 10.0
        parts.append(f"{ticker} median {med:.2f}% < 10% over {errs.size} days "
                     f"(single days under 10%: {100 * np.mean(errs < 10):.0f}%)")
    rec.finish(ok, "; ".join(parts))


# 9 ---------------------------------------------------------------------------


def direct_loglik(baseline, alpha, beta, events: EventSequence) -> float:
    t, T = events.times, events.horizon
    lags = t[:, None] - t[None, :]
    excite = np.where(lags > 0, np.exp(-beta * np.where(lags > 0, lags, 0.0)), 0.0).sum(axis=1)
    comp = baseline * T + (alpha / beta) * np.sum(1.0 - np.exp(-beta * (T - t)))
    return float(np.sum(np.log(baseline + alpha * excite)) - comp)


def test_criterion_09_likelihood_oracle(criterion):
    rec = criterion(9)
    rng = np.random.default_rng(99)
    worst = 0.0
    for _ in range(100):
        baseline, beta = rng.uniform(0.2, 2.0), rng.uniform(0.5, 5.0)
        alpha = rng.uniform(0.0, 0.9) * beta
        spec = HawkesSpec.exponential(baseline, alpha, beta)
        horizon = 2000.0 / spec.stationary_rate()
        events = simulate(spec, horizon, seed=int(rng.integers(1 << 31)))
        while len(events) < 1000:
            horizon *= 2
            events = simulate(spec, horizon, seed=int(rng.integers(1 << 31)))
        events = EventSequence(events.times[:1000], float(events.times[999]) + rng.exponential())
        ref = direct_loglik(baseline, alpha, beta, events)
        worst = max(worst, abs(log_likelihood(baseline, alpha, beta, events) / ref - 1))
    rec.finish(worst <= 1e-8, f"100 paths of 1000 events, worst rel gap {worst:.1e} <= 1e-8")


# 10 --------------------------------------------------------------------------


def test_criterion_10_quantile_states(criterion):
    rec = criterion(10)
    rng = np.random.default_rng(10)
    bad = 0
    for _ in range(100):
        size = int(rng.integers(50, 5000))
        x = rng.choice([-1, 1], size) * DELTA * np.floor(rng.pareto(1.5, size) + 1)
        q = int(rng.choice([2, 4, 8, 16, 32]))
        model, states = build_quantile_states(x, q)
        means = np.array([x[states == i].mean() for i in range(model.n)])
        bad += not (
            np.array_equal(model.assign(x), states)
            and np.bincount(states, minlength=model.n).min() >= 1
            and np.allclose(model.marks, means, rtol=1e-12, atol=0)
            and np.all(np.diff(model.marks) > 0)
            and np.all(np.sign(model.marks[states]) == np.sign(x))
        )
    day = trimmed(synthetic_changes(PROFILES["AMZN"], 0))
    model, _ = build_quantile_states(day.changes, 16)
    ok = bad == 0 and 10 <= model.n <= 14 and np.all(np.diff(model.marks) > 0)
    rec.finish(ok, f"{100 - bad}/100 random series satisfy the partition invariants; "
                   f"AMZN-like day gives {model.n} monotone states (need 10-14)")


# 11 --------------------------------------------------------------------------

# synthetic AAPL-like days averaged for the ordering check; fixed in advance
MSE_SEEDS = range(100)
MSE_VARIANTS = (("quantile 16", "quantile", 16), ("quantile 8", "quantile", 8),
                ("two-state", "two-state", 0), ("chpdo", "chpdo", 0))


def day_mse(seed: int) -> list[float]:
    profile = PROFILES["AAPL"]
    changes = trimmed(synthetic_changes(profile, seed))
    out = []
    for _, variant, q in MSE_VARIANTS:
        _, _, lp = fit_state_model(changes, variant, quantiles=max(q, 2))
        emp = empirical_std_curve(changes, lp.a_star)
        theo = theoretical_std_curve(model_coefficient(lp.sigma_star, profile.spec))
        out.append(mean_squared_residual(emp, theo))
    return out


def test_criterion_11_monotone_mse(criterion):
    rec = criterion(11)
    table = np.array([day_mse(s) for s in MSE_SEEDS])
    mean = table.mean(axis=0)
    ok = bool(np.all(np.diff(mean) >= 0))
    single = np.mean(np.all(np.diff(table, axis=1) >= 0, axis=1))
    names = " <= ".join(f"{name} {m:.3g}" for (name, _, _), m in zip(MSE_VARIANTS, mean))
    rec.finish(ok, f"mean MSE over {len(MSE_SEEDS)} days: {names} "
                   f"(ordering holds on {100 * single:.0f}% of single days)")
