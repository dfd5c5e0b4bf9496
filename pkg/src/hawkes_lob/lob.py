"""Level-1 limit order book ingestion and mark/state construction.

Input follows the LOBSTER convention: a message file
``time,type,orderid,size,price,direction`` and an orderbook file
``askprice,asksize,bidprice,bidsize`` with one row per message, no header
and prices in integer units of 1e-4 dollars.
"""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .hawkes import EventSequence
from .markov import chain_to_json

log = logging.getLogger(__name__)

PRICE_SCALE = 10_000
HALF_TICK = 0.005
# LOBSTER fills empty book levels with +-9999999999
DUMMY_PRICE = 9_999_999_999
DEFAULT_TRIM = 900.0


@dataclass(frozen=True, eq=False)
class LobSeries:
    """Level-1 book snapshots, one per message.

    Prices are kept as integers in 1e-4 dollar units; :attr:`bid` and
    :attr:`ask` give dollars.
    """

    time: np.ndarray
    ask_price: np.ndarray
    ask_size: np.ndarray
    bid_price: np.ndarray
    bid_size: np.ndarray
    messages: np.ndarray | None = None
    rejected: int = 0

    def __post_init__(self):
        n = len(self.time)
        for name in ("ask_price", "ask_size", "bid_price", "bid_size"):
            if len(getattr(self, name)) != n:
                raise ValueError(f"column {name} has the wrong length")
        if self.messages is not None and self.messages.shape != (n, 5):
            raise ValueError("messages must be an (n, 5) integer array")
        if n and np.any(np.diff(self.time) < 0):
            raise ValueError("times must be non-decreasing")
        if np.any(self.bid_price > self.ask_price):
            raise ValueError("crossed book rows present")

    def __len__(self) -> int:
        return len(self.time)

    @property
    def bid(self) -> np.ndarray:
        return self.bid_price / PRICE_SCALE

    @property
    def ask(self) -> np.ndarray:
        return self.ask_price / PRICE_SCALE

    @property
    def mid(self) -> np.ndarray:
        return (self.bid_price + self.ask_price) / (2 * PRICE_SCALE)

    def equals(self, other: "LobSeries") -> bool:
        cols = ("time", "ask_price", "ask_size", "bid_price", "bid_size")
        same = all(np.array_equal(getattr(self, c), getattr(other, c)) for c in cols)
        if self.messages is None or other.messages is None:
            return same and self.messages is other.messages
        return same and np.array_equal(self.messages, other.messages)


def _read_rows(path: Path, width: int):
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row:
                continue
            if len(row) < width:
                raise ValueError(f"{path}:{lineno}: expected {width} columns, got {len(row)}")
            yield lineno, row


def parse_lob(message_file, orderbook_file) -> LobSeries:
    """Read a LOBSTER message/orderbook pair, keeping the level-1 columns.

    Crossed rows (bid > ask) and rows with an empty side are dropped and
    counted in :attr:`LobSeries.rejected`.
    """
    message_file, orderbook_file = Path(message_file), Path(orderbook_file)
    for p in (message_file, orderbook_file):
        if not p.exists():
            raise FileNotFoundError(f"no such file: {p}")
    times, msgs, book = [], [], []
    for lineno, row in _read_rows(message_file, 6):
        try:
            times.append(float(row[0]))
            msgs.append([int(float(x)) for x in row[1:6]])
        except ValueError as exc:
            raise ValueError(f"{message_file}:{lineno}: malformed message row {row!r}") from exc
    for lineno, row in _read_rows(orderbook_file, 4):
        try:
            book.append([int(x) for x in row[:4]])
        except ValueError as exc:
            raise ValueError(f"{orderbook_file}:{lineno}: malformed orderbook row {row!r}") from exc
    if not times:
        raise ValueError(f"{message_file}: empty message file")
    if len(times) != len(book):
        raise ValueError(
            f"row count mismatch: {len(times)} messages vs {len(book)} orderbook rows"
        )
    time = np.asarray(times, dtype=float)
    book = np.asarray(book, dtype=np.int64)
    msgs = np.asarray(msgs, dtype=np.int64)
    ask, bid = book[:, 0], book[:, 2]
    ok = (bid <= ask) & (bid > 0) & (ask < DUMMY_PRICE) & (bid > -DUMMY_PRICE)
    rejected = int((~ok).sum())
    if rejected:
        log.warning("rejected %d crossed or one-sided book rows", rejected)
    return LobSeries(
        time=time[ok],
        ask_price=ask[ok],
        ask_size=book[ok, 1],
        bid_price=bid[ok],
        bid_size=book[ok, 3],
        messages=msgs[ok],
        rejected=rejected,
    )


def write_lob(series: LobSeries, message_file, orderbook_file) -> None:
    """Write ``series`` in the format :func:`parse_lob` reads (times at ns resolution)."""
    n = len(series)
    msgs = series.messages if series.messages is not None else np.zeros((n, 5), dtype=np.int64)
    with open(message_file, "w") as fh:
        for t, m in zip(series.time, msgs):
            fh.write(f"{t:.9f},{m[0]},{m[1]},{m[2]},{m[3]},{m[4]}\n")
    with open(orderbook_file, "w") as fh:
        for row in zip(series.ask_price, series.ask_size, series.bid_price, series.bid_size):
            fh.write("%d,%d,%d,%d\n" % row)


# --------------------------------------------------------------------------
# mid-price change series


@dataclass(frozen=True, eq=False)
class PriceChangeSeries:
    """Signed mid-price moves inside an observation window ``[start, end]``."""

    times: np.ndarray
    changes: np.ndarray
    s0: float
    start: float
    end: float

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        changes = np.asarray(self.changes, dtype=float)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "changes", changes)
        if times.shape != changes.shape:
            raise ValueError("times and changes must have the same length")
        if times.size and np.any(np.diff(times) <= 0):
            raise ValueError("change times must be strictly increasing")
        if np.any(changes == 0):
            raise ValueError("zero price changes are not events")
        if not self.start <= self.end:
            raise ValueError("start must not exceed end")
        if times.size and (times[0] < self.start or times[-1] > self.end):
            raise ValueError("change times fall outside [start, end]")

    def __len__(self) -> int:
        return self.times.size

    @property
    def duration(self) -> float:
        return self.end - self.start

    def to_events(self) -> EventSequence:
        """Event times relative to the window start."""
        return EventSequence(self.times - self.start, self.duration)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["time", "change"])
            for t, c in zip(self.times, self.changes):
                writer.writerow([repr(float(t)), repr(float(c))])

    @classmethod
    def from_csv(cls, path, start: float | None = None, end: float | None = None, s0: float = 0.0):
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        times = data[:, 0] if data.size else np.empty(0)
        changes = data[:, 1] if data.size else np.empty(0)
        start = float(times[0]) if start is None and times.size else (start or 0.0)
        end = float(times[-1]) if end is None and times.size else (end or start)
        return cls(times, changes, s0, start, end)


def mid_price_events(series: LobSeries, trim: float = DEFAULT_TRIM, session=None) -> PriceChangeSeries:
    """Mid-price changes within ``[open + trim, close - trim]``.

    ``session`` is ``(open, close)`` and defaults to the first and last
    timestamps. At repeated timestamps only the last book state counts;
    consecutive equal mids are collapsed so every emitted change is non-zero.
    """
    if not len(series):
        raise ValueError("empty order book series")
    t = series.time
    open_, close = session if session is not None else (float(t[0]), float(t[-1]))
    start, end = open_ + trim, close - trim
    if start > end:
        raise ValueError(f"trim of {trim}s leaves an empty window")
    inside = np.flatnonzero((t > start) & (t <= end))
    # the reference mid is the book in force at the window start
    before = np.flatnonzero(t <= start)
    if before.size:
        rows = np.concatenate([[before[-1]], inside])
    elif inside.size:
        rows = inside
    else:
        raise ValueError(f"no book rows inside [{start}, {end}]")
    t = t[rows]
    mid2 = (series.bid_price + series.ask_price)[rows]
    last = np.append(t[1:] != t[:-1], True)
    t, mid2 = t[last], mid2[last]
    moved = np.flatnonzero(np.diff(mid2) != 0) + 1
    changes = np.diff(mid2)[moved - 1] / (2 * PRICE_SCALE)
    return PriceChangeSeries(t[moved], changes, float(mid2[0]) / (2 * PRICE_SCALE), start, end)


def liquidity_summary(series: LobSeries, changes: PriceChangeSeries) -> dict:
    """Average book events per second over the untrimmed session, and the daily change count."""
    span = float(series.time[-1] - series.time[0]) if len(series) > 1 else 0.0
    rate = len(series) / span if span > 0 else float("nan")
    return {"orders_per_second": rate, "daily_price_changes": len(changes)}


def tick_histogram(changes, half_tick: float = HALF_TICK) -> dict:
    """Counts of ``|change|`` per multiple of the half tick, and the share above one half tick."""
    values = np.abs(_values(changes))
    if values.size == 0:
        return {"multiple": [], "count": [], "fraction_above_half_tick": 0.0}
    multiples = np.rint(values / half_tick).astype(np.int64)
    ks, counts = np.unique(multiples, return_counts=True)
    above = float(np.mean(values > half_tick * (1 + 1e-9)))
    return {"multiple": ks.tolist(), "count": counts.tolist(), "fraction_above_half_tick": above}


# --------------------------------------------------------------------------
# state models


@dataclass(frozen=True, eq=False)
class StateModel:
    """Partition of observed changes into ordered states with a mark per state.

    State ``i`` holds changes ``c`` with ``boundaries[i] <= c < boundaries[i + 1]``;
    the last state runs up to and including ``upper``.
    """

    boundaries: np.ndarray
    marks: np.ndarray
    upper: float
    kind: str = "quantile"
    counts: np.ndarray = field(default=None)

    def __post_init__(self):
        b = np.asarray(self.boundaries, dtype=float)
        m = np.asarray(self.marks, dtype=float)
        object.__setattr__(self, "boundaries", b)
        object.__setattr__(self, "marks", m)
        if b.shape != m.shape or b.size == 0:
            raise ValueError("need one lower boundary per state")
        if np.any(np.diff(b) <= 0):
            raise ValueError("boundaries must be strictly increasing")
        if self.upper < b[-1]:
            raise ValueError("upper bound lies below the last boundary")

    @property
    def n(self) -> int:
        return self.marks.size

    def assign(self, changes) -> np.ndarray:
        """0-based state of each change; values outside the fitted range are clamped."""
        x = _values(changes)
        return np.clip(np.searchsorted(self.boundaries, x, side="right") - 1, 0, self.n - 1)

    def to_json(self, P=None) -> str:
        extra = {"boundaries": self.boundaries, "upper": float(self.upper), "kind": self.kind}
        if self.counts is not None:
            extra["counts"] = np.asarray(self.counts).tolist()
        if P is None:
            payload = {"n": self.n, "a": self.marks.tolist(), **extra}
            payload["boundaries"] = self.boundaries.tolist()
            return json.dumps(payload, indent=2)
        return chain_to_json(P, self.marks, **extra)


def _values(changes) -> np.ndarray:
    if isinstance(changes, PriceChangeSeries):
        return changes.changes
    return np.asarray(changes, dtype=float).reshape(-1)


def _sign_model(x: np.ndarray, marks, kind: str) -> tuple[StateModel, np.ndarray]:
    states = (x > 0).astype(np.int64)
    lo = min(float(x.min()), -HALF_TICK) if x.size else -HALF_TICK
    hi = max(float(x.max()), HALF_TICK) if x.size else HALF_TICK
    counts = np.bincount(states, minlength=2)
    model = StateModel(np.array([lo, 0.0]), np.asarray(marks, dtype=float), hi, kind, counts)
    return model, states


def build_fixed_tick(changes, delta: float = HALF_TICK) -> tuple[StateModel, np.ndarray]:
    """Sign-only model: state 0 carries ``-delta`` and state 1 carries ``+delta``.

    One-sided data still yields two states; estimating transitions from the
    resulting sequence then fails on the unobserved state.
    """
    x = _values(changes)
    if np.any(x == 0):
        raise ValueError("changes must be non-zero")
    return _sign_model(x, [-delta, delta], "chpdo")


def build_two_state_mean(changes) -> tuple[StateModel, np.ndarray]:
    """Sign-based states whose marks are the mean down and mean up moves."""
    x = _values(changes)
    down, up = x[x < 0], x[x > 0]
    if down.size == 0 or up.size == 0:
        raise ValueError("need at least one change of each sign")
    return _sign_model(x, [down.mean(), up.mean()], "two-state")


def _side_edges(x: np.ndarray, q: int) -> np.ndarray:
    levels = np.arange(1, q) / q
    return np.unique(np.concatenate([[x.min()], np.quantile(x, levels)]))


def build_quantile_states(changes, q: int, per_side: bool = True) -> tuple[StateModel, np.ndarray]:
    """Quantile-binned states built separately on down and up moves.

    Each side is cut at its empirical quantiles ``j/q`` (``j = 1..q-1``,
    linear interpolation) and the side minimum is added as the first edge.
    Repeated cut values collapse, and bins that catch no observation are
    dropped. Marks are the mean change of each bin. With ``per_side=False``
    the ``q`` levels are split evenly between the two sides.
    """
    if q < 2:
        raise ValueError("q must be >= 2")
    x = _values(changes)
    down, up = x[x < 0], x[x > 0]
    if down.size == 0 or up.size == 0:
        raise ValueError("need at least one change of each sign")
    q_side = q if per_side else max(q // 2, 1)
    edges = np.concatenate([_side_edges(down, q_side), _side_edges(up, q_side)])
    raw = np.searchsorted(edges, x, side="right") - 1
    occupied, states = np.unique(raw, return_inverse=True)
    counts = np.bincount(states)
    sums = np.bincount(states, weights=x)
    model = StateModel(edges[occupied], sums / counts, float(x.max()), f"quantile{q}", counts)
    return model, states.astype(np.int64)
