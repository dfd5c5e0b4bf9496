from __future__ import annotations

import numpy as np
import pytest

from hawkes_lob.lob import HALF_TICK, liquidity_summary, mid_price_events, parse_lob, tick_histogram, write_lob
from hawkes_lob.synthetic import PROFILES, SESSION, _book_path, half_tick_pmf, synthetic_changes, synthetic_day


def test_pmf():
    p = half_tick_pmf({1: 0.39}, 0.61, 5.0)
    assert p.sum() == pytest.approx(1.0)
    assert p[0] == pytest.approx(0.39)
    assert np.dot(np.arange(2, p.size + 1), p[1:]) / p[1:].sum() == pytest.approx(5.0, rel=1e-3)


def test_book_path_never_crosses():
    rng = np.random.default_rng(0)
    steps = rng.choice([-1, 1], 5000) * rng.integers(1, 9, 5000)
    bid, ask = _book_path(steps, 5_000_000 - 50, 5_000_000 + 50)
    spread = ask - bid
    assert np.all(spread >= 100) and np.all(spread <= 200)
    np.testing.assert_array_equal(np.diff(np.concatenate([[10_000_000], bid + ask])), steps * 100)


def test_changes_are_half_tick_multiples():
    pcs = synthetic_changes(PROFILES["AMZN"], seed=0)
    k = pcs.changes / HALF_TICK
    np.testing.assert_allclose(k, np.rint(k), atol=1e-9)
    assert (pcs.start, pcs.end) == SESSION


def test_profile_targets():
    aapl = synthetic_changes(PROFILES["AAPL"], seed=0)
    # about 61% of moves exceed one half tick
    assert tick_histogram(aapl)["fraction_above_half_tick"] == pytest.approx(0.61, abs=0.02)
    # count per session follows the stationary Hawkes rate
    expected = PROFILES["AAPL"].spec.stationary_rate() * (SESSION[1] - SESSION[0])
    assert len(aapl) == pytest.approx(expected, rel=0.05)
    intc = synthetic_changes(PROFILES["INTC"], seed=0)
    assert np.all(np.abs(intc.changes) == HALF_TICK)


def test_day_pipeline_recovers_changes(tmp_path):
    profile = PROFILES["GOOG"]
    day = synthetic_day(profile, seed=5, orders_per_second=3.0)
    write_lob(day, tmp_path / "m.csv", tmp_path / "o.csv")
    back = parse_lob(tmp_path / "m.csv", tmp_path / "o.csv")
    assert back.equals(day)
    extracted = mid_price_events(back, trim=900.0)
    reference = synthetic_changes(profile, np.random.SeedSequence(5).spawn(2)[0])
    keep = (reference.times >= extracted.start) & (reference.times <= extracted.end)
    np.testing.assert_array_equal(extracted.times, reference.times[keep])
    np.testing.assert_allclose(extracted.changes, reference.changes[keep], atol=1e-12)
    rate = liquidity_summary(back, extracted)["orders_per_second"]
    assert rate == pytest.approx(3.0, rel=0.05)


def test_day_is_deterministic():
    a = synthetic_day(PROFILES["MSFT"], seed=1, orders_per_second=2.0)
    b = synthetic_day(PROFILES["MSFT"], seed=1, orders_per_second=2.0)
    assert a.equals(b)
