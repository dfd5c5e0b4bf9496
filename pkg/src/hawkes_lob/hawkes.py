"""One-dimensional Hawkes processes: kernels, links, intensity, compensator, sampling.

A :class:`HawkesSpec` bundles the baseline rate, an excitation kernel and a
monotone link applied to the linear intensity::

    rate(t) = link(baseline + sum_{t_i < t} kernel(t - t_i))

Event times are plain floats in seconds measured from the start of the
observation window.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

import numpy as np
from scipy import integrate

from . import _kernels

DEFAULT_MAX_EVENTS = 10_000_000
QUAD_TOL = 1e-10


class SupercriticalError(ValueError):
    """Raised when a linear Hawkes process has branching ratio >= 1."""


class SimulationError(RuntimeError):
    """Raised when a simulated path exceeds the event cap."""


# --------------------------------------------------------------------------
# kernels


@dataclass(frozen=True)
class NullKernel:
    """No excitation; the process is Poisson with the (linked) baseline rate."""

    def __call__(self, t):
        return np.zeros_like(np.asarray(t, dtype=float))

    @property
    def branching_ratio(self) -> float:
        return 0.0

    @property
    def has_finite_first_moment(self) -> bool:
        return True


@dataclass(frozen=True)
class ExponentialKernel:
    """``alpha * exp(-beta t)``."""

    alpha: float
    beta: float

    def __post_init__(self):
        if not (self.alpha >= 0 and math.isfinite(self.alpha)):
            raise ValueError(f"alpha must be finite and >= 0, got {self.alpha}")
        if not (self.beta > 0 and math.isfinite(self.beta)):
            raise ValueError(f"beta must be finite and > 0, got {self.beta}")

    def __call__(self, t):
        return self.alpha * np.exp(-self.beta * np.asarray(t, dtype=float))

    @property
    def branching_ratio(self) -> float:
        return self.alpha / self.beta

    @property
    def has_finite_first_moment(self) -> bool:
        return True


@dataclass(frozen=True)
class PowerLawKernel:
    """Omori-type kernel ``k / (c + t)**p``; ``p > 1`` keeps its mass finite."""

    k: float
    c: float
    p: float

    def __post_init__(self):
        if not self.k >= 0:
            raise ValueError(f"k must be >= 0, got {self.k}")
        if not self.c > 0:
            raise ValueError(f"c must be > 0, got {self.c}")
        if not self.p > 1:
            raise ValueError(f"p must be > 1, got {self.p}")

    def __call__(self, t):
        return self.k / (self.c + np.asarray(t, dtype=float)) ** self.p

    @property
    def branching_ratio(self) -> float:
        return self.k * self.c ** (1.0 - self.p) / (self.p - 1.0)

    @property
    def has_finite_first_moment(self) -> bool:
        return self.p > 2


Kernel = Union[NullKernel, ExponentialKernel, PowerLawKernel]


def branching_ratio(kernel: Kernel) -> float:
    """Total kernel mass, i.e. the mean number of direct offspring per event."""
    return kernel.branching_ratio


# --------------------------------------------------------------------------
# links


@dataclass(frozen=True)
class Identity:
    code = _kernels.LINK_IDENTITY
    ceiling = math.inf

    def __call__(self, x):
        return np.asarray(x, dtype=float)


@dataclass(frozen=True)
class Indicator:
    """``1`` for positive input, else ``0``."""

    code = _kernels.LINK_INDICATOR
    ceiling = 1.0

    def __call__(self, x):
        return (np.asarray(x, dtype=float) > 0).astype(float)


@dataclass(frozen=True)
class Capped:
    """Clip the linear intensity to ``[0, ceiling]``."""

    ceiling: float
    code = _kernels.LINK_CAPPED

    def __post_init__(self):
        if not (self.ceiling > 0 and math.isfinite(self.ceiling)):
            raise ValueError(f"ceiling must be finite and > 0, got {self.ceiling}")

    def __call__(self, x):
        return np.clip(np.asarray(x, dtype=float), 0.0, self.ceiling)


Link = Union[Identity, Indicator, Capped]


@dataclass(frozen=True)
class HawkesSpec:
    baseline: float
    kernel: Kernel = field(default_factory=NullKernel)
    link: Link = field(default_factory=Identity)

    def __post_init__(self):
        if not (self.baseline > 0 and math.isfinite(self.baseline)):
            raise ValueError(f"baseline rate must be finite and > 0, got {self.baseline}")

    @classmethod
    def exponential(cls, baseline: float, alpha: float, beta: float, link: Link | None = None):
        return cls(baseline, ExponentialKernel(alpha, beta), link or Identity())

    @property
    def branching_ratio(self) -> float:
        return self.kernel.branching_ratio

    @property
    def is_linear(self) -> bool:
        return isinstance(self.link, Identity)

    @property
    def is_stationary(self) -> bool:
        """Linear specs need branching ratio < 1; capped or indicator links are bounded."""
        if self.is_linear:
            return self.branching_ratio < 1
        return True

    def require_stationary(self) -> None:
        if not self.is_stationary:
            raise SupercriticalError(
                f"supercritical: branching ratio {self.branching_ratio:.6g} >= 1 "
                "with an identity link"
            )

    def stationary_rate(self) -> float:
        """Mean arrivals per unit time ``baseline / (1 - branching ratio)`` (linear specs)."""
        if not self.is_linear:
            raise ValueError("no closed-form stationary rate for a non-linear link")
        self.require_stationary()
        return self.baseline / (1.0 - self.branching_ratio)


# --------------------------------------------------------------------------
# event sequences


@dataclass(frozen=True, eq=False)
class EventSequence:
    """Strictly increasing event times on ``[0, horizon]``."""

    times: np.ndarray
    horizon: float

    def __post_init__(self):
        times = np.ascontiguousarray(self.times, dtype=float).reshape(-1)
        times.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "horizon", float(self.horizon))
        if not self.horizon >= 0:
            raise ValueError(f"horizon must be >= 0, got {self.horizon}")
        if times.size:
            if times[0] < 0:
                raise ValueError("event times must be >= 0")
            if np.any(np.diff(times) <= 0):
                raise ValueError("event times must be strictly increasing")
            if times[-1] > self.horizon:
                raise ValueError(
                    f"last event {times[-1]} lies beyond the horizon {self.horizon}"
                )

    def __len__(self) -> int:
        return self.times.size

    def __eq__(self, other):
        if not isinstance(other, EventSequence):
            return NotImplemented
        return self.horizon == other.horizon and np.array_equal(self.times, other.times)

    def to_csv(self, path, marks=None) -> None:
        """Write ``time,mark`` rows; the mark column is left empty when not given."""
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["time", "mark"])
            for i, t in enumerate(self.times):
                writer.writerow([repr(float(t)), "" if marks is None else repr(float(marks[i]))])

    @classmethod
    def from_csv(cls, path, horizon: float | None = None) -> "EventSequence":
        """Read a ``time[,mark]`` file; the horizon defaults to the last event time."""
        path = Path(path)
        times = []
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None or not header or header[0].strip() != "time":
                raise ValueError(f"{path}: expected a 'time' header column")
            for lineno, row in enumerate(reader, start=2):
                if not row:
                    continue
                try:
                    times.append(float(row[0]))
                except ValueError as exc:
                    raise ValueError(f"{path}:{lineno}: bad time value {row[0]!r}") from exc
        times = np.asarray(times, dtype=float)
        if horizon is None:
            horizon = float(times[-1]) if times.size else 0.0
        return cls(times, horizon)


# --------------------------------------------------------------------------
# intensity and compensator


def _linear_intensity(spec: HawkesSpec, history: np.ndarray, t):
    """Baseline plus excitation from events strictly before each ``t``."""
    t = np.asarray(t, dtype=float)
    flat = np.atleast_1d(t)
    out = np.full(flat.shape, spec.baseline, dtype=float)
    if not isinstance(spec.kernel, NullKernel) and history.size:
        for j, tj in enumerate(flat):
            past = history[: np.searchsorted(history, tj, side="left")]
            if past.size:
                out[j] += float(np.sum(spec.kernel(tj - past)))
    return out.reshape(t.shape)


def intensity_at(spec: HawkesSpec, events: EventSequence, t):
    """Conditional intensity at ``t`` (left limit: an event at ``t`` is not counted)."""
    if np.any(np.asarray(t) < 0):
        raise ValueError("t must be >= 0")
    return spec.link(_linear_intensity(spec, events.times, t))


def _gap_compensator(spec: HawkesSpec, history: np.ndarray, lo: float, hi: float) -> float:
    """Integral of the intensity over ``[lo, hi]`` given no events inside the gap."""
    if hi <= lo:
        return 0.0
    kernel = spec.kernel
    if isinstance(kernel, ExponentialKernel):
        decay = float(np.sum(np.exp(-kernel.beta * (lo - history)))) if history.size else 0.0

        def rate(s):
            return spec.link(spec.baseline + kernel.alpha * decay * math.exp(-kernel.beta * (s - lo)))

    elif isinstance(kernel, PowerLawKernel):

        def rate(s):
            return spec.link(spec.baseline + float(np.sum(kernel(s - history))))

    else:
        return float(spec.link(spec.baseline)) * (hi - lo)
    value, _ = integrate.quad(rate, lo, hi, epsabs=QUAD_TOL, epsrel=1e-12, limit=200)
    return value


def _closed_form_compensator(spec: HawkesSpec, times: np.ndarray, t):
    """Identity-link compensator evaluated at each entry of ``t``."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    out = spec.baseline * t
    kernel = spec.kernel
    if isinstance(kernel, NullKernel) or not times.size:
        return out
    counts = np.searchsorted(times, t, side="left")
    for j, (tj, m) in enumerate(zip(t, counts)):
        lags = tj - times[:m]
        if isinstance(kernel, ExponentialKernel):
            out[j] += (kernel.alpha / kernel.beta) * np.sum(-np.expm1(-kernel.beta * lags))
        else:
            k, c, p = kernel.k, kernel.c, kernel.p
            out[j] += k / (p - 1.0) * np.sum(c ** (1.0 - p) - (c + lags) ** (1.0 - p))
    return out


def _quadrature_compensator(spec: HawkesSpec, times: np.ndarray, t):
    t = np.atleast_1d(np.asarray(t, dtype=float))
    order = np.argsort(t)
    out = np.empty_like(t)
    acc = 0.0
    pos = 0.0
    idx = 0
    for j in order:
        target = t[j]
        while idx < times.size and times[idx] < target:
            acc += _gap_compensator(spec, times[:idx], pos, times[idx])
            pos = times[idx]
            idx += 1
        acc += _gap_compensator(spec, times[:idx], pos, target)
        pos = target
        out[j] = acc
    return out


def compensator(spec: HawkesSpec, events: EventSequence, t, method: str = "auto"):
    """Integrated intensity ``Lambda(t)`` for ``t`` in ``[0, horizon]``.

    ``method='auto'`` uses the closed form for identity links and adaptive
    quadrature between event times otherwise; ``'quad'`` forces quadrature.
    """
    arr = np.asarray(t, dtype=float)
    if np.any(arr < 0) or np.any(arr > events.horizon):
        raise ValueError(f"t must lie in [0, {events.horizon}]")
    if method not in ("auto", "quad"):
        raise ValueError(f"unknown method {method!r}")
    if method == "auto" and spec.is_linear:
        out = _closed_form_compensator(spec, events.times, arr)
    else:
        out = _quadrature_compensator(spec, events.times, arr)
    return out.reshape(arr.shape) if arr.ndim else float(out[0])


def rescaled_interarrivals(spec: HawkesSpec, events: EventSequence, method: str = "auto") -> np.ndarray:
    """Time-rescaled gaps ``Lambda(t_i) - Lambda(t_{i-1})`` with ``t_0 = 0``.

    Under the true model these are i.i.d. unit exponentials.
    """
    if not len(events):
        raise ValueError("need at least one event")
    times = events.times
    if method == "auto" and spec.is_linear and isinstance(spec.kernel, ExponentialKernel):
        # O(n) recursion instead of re-summing the history at every event
        a, b = spec.kernel.alpha, spec.kernel.beta
        gaps = np.diff(times, prepend=0.0)
        out = spec.baseline * gaps
        state = 0.0
        for i in range(1, times.size):
            state = math.exp(-b * gaps[i - 1]) * state + 1.0 if i > 1 else 1.0
            out[i] += (a / b) * state * -math.expm1(-b * gaps[i])
        return out
    lam = compensator(spec, events, times, method=method)
    return np.diff(lam, prepend=0.0)


# --------------------------------------------------------------------------
# simulation


def as_seed_sequence(seed) -> np.random.SeedSequence:
    """Accept an int, ``None`` or an existing :class:`~numpy.random.SeedSequence`."""
    return seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)


def simulate(
    spec: HawkesSpec,
    horizon: float,
    seed=None,
    max_events: int = DEFAULT_MAX_EVENTS,
) -> EventSequence:
    """Sample a path on ``[0, horizon]`` by thinning, starting from an empty history.

    ``seed`` may be anything :func:`numpy.random.default_rng` accepts,
    including a ``Generator``.
    """
    if not horizon > 0:
        raise ValueError(f"horizon must be > 0, got {horizon}")
    spec.require_stationary()
    rng = np.random.default_rng(seed)
    kernel, link = spec.kernel, spec.link
    ceiling = float(link.ceiling) if math.isfinite(link.ceiling) else 0.0
    if isinstance(kernel, PowerLawKernel):
        times, exploded = _kernels.simulate_power_law(
            rng, spec.baseline, kernel.k, kernel.c, kernel.p, link.code, ceiling,
            float(horizon), int(max_events),
        )
    else:
        alpha, beta = (kernel.alpha, kernel.beta) if isinstance(kernel, ExponentialKernel) else (0.0, 1.0)
        times, exploded = _kernels.simulate_exponential(
            rng, spec.baseline, alpha, beta, link.code, ceiling, float(horizon), int(max_events),
        )
    if exploded:
        raise SimulationError(
            f"path exceeded {max_events} events before t={horizon}; "
            f"last accepted event at t={times[-1]:.6g} "
            f"(branching ratio {spec.branching_ratio:.4g})"
        )
    return EventSequence(times, horizon)


def stationary_unit_arrivals(
    spec: HawkesSpec,
    seed=None,
    horizon: float | None = None,
    burn_in: float = 0.1,
    batches: int = 20,
) -> tuple[float, float]:
    """Estimate ``E[N[0,1]]`` by one long simulated path.

    The first ``burn_in`` fraction of the path is discarded and the rest is
    cut into ``batches`` equal blocks; returns the mean rate and its
    batch-means standard error.
    """
    if horizon is None:
        horizon = 1e5 / spec.baseline
    path = simulate(spec, horizon, seed)
    start = burn_in * horizon
    edges = np.linspace(start, horizon, batches + 1)
    counts = np.diff(np.searchsorted(path.times, edges, side="left"))
    rates = counts / np.diff(edges)
    return float(rates.mean()), float(rates.std(ddof=1) / math.sqrt(batches))


def warn_if_no_first_moment(kernel: Kernel) -> None:
    if not kernel.has_finite_first_moment:
        warnings.warn(
            "kernel has an infinite first moment (power law with p <= 2); "
            "the diffusion limit is not guaranteed",
            RuntimeWarning,
            stacklevel=3,
        )
