"""Synthetic level-1 trading days in LOBSTER format.

The original 2012 order book files cannot be redistributed, so tests and
examples run on generated days. Each :class:`DayProfile` holds Hawkes
arrival parameters, a sign transition matrix and per-side distributions of
move sizes in half ticks, calibrated to published per-ticker summaries.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .compound import CompoundModel
from .hawkes import HawkesSpec, as_seed_sequence, simulate
from .lob import HALF_TICK, PRICE_SCALE, LobSeries, PriceChangeSeries
from .markov import simulate_chain

SESSION = (34_200.0, 57_600.0)
CENT = PRICE_SCALE // 100


def half_tick_pmf(head: dict[int, float], tail_weight: float = 0.0, tail_mean: float = 0.0,
                  k_max: int = 400) -> np.ndarray:
    """Probabilities over move sizes ``1..k_max`` half ticks.

    ``head`` fixes the mass of small sizes; the remaining ``tail_weight`` is
    spread geometrically from just past the head with mean ``tail_mean``.
    """
    p = np.zeros(k_max)
    for k, w in head.items():
        p[k - 1] = w
    if tail_weight > 0:
        start = max(head) + 1 if head else 1
        ks = np.arange(1, k_max + 1)
        rate = 1.0 / (tail_mean - start + 1.0)
        tail = np.where(ks >= start, (1 - rate) ** np.maximum(ks - start, 0) * rate, 0.0)
        p += tail_weight * tail / tail.sum()
    return p / p.sum()


@dataclass(frozen=True, eq=False)
class DayProfile:
    name: str
    spec: HawkesSpec
    p_dd: float
    p_uu: float
    down_pmf: np.ndarray
    up_pmf: np.ndarray
    orders_per_second: float
    s0: float = 100.0

    @property
    def sign_matrix(self) -> np.ndarray:
        return np.array([[self.p_dd, 1 - self.p_dd], [1 - self.p_uu, self.p_uu]])

    def chpdo_model(self) -> CompoundModel:
        return CompoundModel.chpdo(self.spec, self.p_dd, self.p_uu, HALF_TICK)


_SINGLE = half_tick_pmf({1: 1.0})

PROFILES = {
    "AAPL": DayProfile(
        "AAPL", HawkesSpec.exponential(1.4683, 1045.2676, 2556.1844), 0.4956, 0.4933,
        half_tick_pmf({1: 0.39}, 0.61, 5.0), half_tick_pmf({1: 0.39}, 0.61, 5.0), 51.0, 585.0,
    ),
    "AMZN": DayProfile(
        "AMZN", HawkesSpec.exponential(0.6443, 653.7524, 1556.1702), 0.4635, 0.4576,
        half_tick_pmf({1: 0.234, 2: 0.091, 3: 0.0576, 4: 0.0382, 5: 0.0264, 6: 0.0141, 7: 0.0140},
                      0.0275, 10.5),
        half_tick_pmf({1: 0.2321, 2: 0.0923, 3: 0.0578, 4: 0.0353, 5: 0.0206, 6: 0.0206}, 0.0387, 9.5),
        25.0, 220.0,
    ),
    "GOOG": DayProfile(
        "GOOG", HawkesSpec.exponential(0.4985, 865.8553, 1980.4409), 0.4769, 0.4461,
        half_tick_pmf({1: 0.29}, 0.71, 8.2), half_tick_pmf({1: 0.29}, 0.71, 8.2), 21.0, 565.0,
    ),
    "MSFT": DayProfile(
        "MSFT", HawkesSpec.exponential(0.0659, 479.3482, 908.0032), 0.6269, 0.5827,
        _SINGLE, _SINGLE, 173.0, 30.0,
    ),
    "INTC": DayProfile(
        "INTC", HawkesSpec.exponential(0.0471, 399.6389, 760.4991), 0.6106, 0.5588,
        _SINGLE, _SINGLE, 176.0, 27.0,
    ),
}


def _ns_times(t: np.ndarray) -> np.ndarray:
    # whole nanoseconds keep the 9-decimal text form an exact round trip
    return np.rint(t * 1e9) / 1e9


def synthetic_changes(profile: DayProfile, seed=None, session=SESSION) -> PriceChangeSeries:
    """Mid-price moves of a simulated day over the whole session (no trimming)."""
    ss = as_seed_sequence(seed)
    arr_seq, sign_seq, size_seq = ss.spawn(3)
    open_, close = session
    events = simulate(profile.spec, close - open_, np.random.default_rng(arr_seq))
    times = np.unique(_ns_times(open_ + events.times))
    n = times.size
    if n == 0:
        return PriceChangeSeries(times, np.empty(0), profile.s0, open_, close)
    P = profile.sign_matrix
    pi_down = (1 - P[1, 1]) / ((1 - P[1, 1]) + (1 - P[0, 0]))
    signs = simulate_chain(P, [pi_down, 1 - pi_down], n, np.random.default_rng(sign_seq))
    rng = np.random.default_rng(size_seq)
    ks = np.arange(1, profile.up_pmf.size + 1)
    size = np.where(
        signs == 1,
        rng.choice(ks, size=n, p=profile.up_pmf),
        rng.choice(np.arange(1, profile.down_pmf.size + 1), size=n, p=profile.down_pmf),
    )
    changes = np.where(signs == 1, 1, -1) * size * HALF_TICK
    return PriceChangeSeries(times, changes, profile.s0, open_, close)


def _book_path(half_ticks: np.ndarray, bid0: int, ask0: int) -> tuple[np.ndarray, np.ndarray]:
    """Bid/ask (1e-4 $) after each signed mid move of ``half_ticks`` half ticks.

    A move of k half ticks shifts bid + ask by k cents; odd k moves one
    side a cent further than the other, widening a one-cent spread and
    narrowing any wider one.
    """
    bid = np.empty(half_ticks.size, dtype=np.int64)
    ask = np.empty(half_ticks.size, dtype=np.int64)
    b, a = bid0, ask0
    for i, move in enumerate(half_ticks):
        s, k = (1 if move > 0 else -1), abs(int(move))
        lo, hi = k // 2, k - k // 2
        if k % 2 == 0:
            b += s * lo * CENT
            a += s * lo * CENT
        elif a - b == CENT:
            # widen: the leading side moves further
            if s > 0:
                a, b = a + hi * CENT, b + lo * CENT
            else:
                b, a = b - hi * CENT, a - lo * CENT
        else:
            if s > 0:
                b, a = b + hi * CENT, a + lo * CENT
            else:
                a, b = a - hi * CENT, b - lo * CENT
        bid[i], ask[i] = b, a
    return bid, ask


def synthetic_day(profile: DayProfile, seed=None, session=SESSION,
                  orders_per_second: float | None = None) -> LobSeries:
    """A full LOBSTER-style day whose mid-price follows :func:`synthetic_changes`.

    Rows that do not move the mid are non-marketable limit orders at the
    current best quotes; they only change the displayed sizes.
    """
    ss = as_seed_sequence(seed)
    change_seq, filler_seq = ss.spawn(2)
    moves = synthetic_changes(profile, change_seq, session)
    open_, close = session
    rate = profile.orders_per_second if orders_per_second is None else orders_per_second
    rng = np.random.default_rng(filler_seq)
    n_fill = max(int(rng.poisson(max(rate * (close - open_) - len(moves), 0.0))), 2)
    fill_t = _ns_times(np.sort(rng.uniform(open_, close, n_fill)))
    fill_t[0], fill_t[-1] = open_, close
    fill_t = np.setdiff1d(fill_t, moves.times)

    mid2_0 = int(round(profile.s0 * PRICE_SCALE)) * 2
    bid0 = (mid2_0 - CENT) // 2
    ask0 = bid0 + CENT
    steps = np.rint(moves.changes / HALF_TICK).astype(np.int64)
    bid_c, ask_c = _book_path(steps, bid0, ask0)

    time = np.concatenate([fill_t, moves.times])
    is_move = np.concatenate([np.zeros(fill_t.size, bool), np.ones(moves.times.size, bool)])
    order = np.argsort(time, kind="stable")
    time, is_move = time[order], is_move[order]
    n = time.size
    idx = np.cumsum(is_move) - 1
    bid = np.where(idx >= 0, bid_c[np.maximum(idx, 0)], bid0) if moves.times.size else np.full(n, bid0)
    ask = np.where(idx >= 0, ask_c[np.maximum(idx, 0)], ask0) if moves.times.size else np.full(n, ask0)

    direction = rng.choice(np.array([-1, 1]), size=n)
    size = rng.integers(1, 500, size=n)
    msg_type = np.where(is_move, 4, 1)
    price = np.where(direction > 0, bid, ask)
    messages = np.column_stack([msg_type, np.arange(1, n + 1), size, price, direction]).astype(np.int64)
    return LobSeries(
        time=time,
        ask_price=ask,
        ask_size=rng.integers(100, 2000, size=n),
        bid_price=bid,
        bid_size=rng.integers(100, 2000, size=n),
        messages=messages,
    )
