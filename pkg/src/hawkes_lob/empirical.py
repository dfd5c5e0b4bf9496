"""Windowed residual statistics, standard-deviation curves and Monte Carlo checks."""

from __future__ import annotations

import csv
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np
from scipy import stats

from .compound import CompoundModel, sample_marks
from .diffusion import compute_limit_params, diffusion_coefficient, lln_drift, nonlinear_diffusion_coefficient
from .hawkes import EventSequence, as_seed_sequence, simulate, stationary_unit_arrivals, warn_if_no_first_moment
from .lob import HALF_TICK, PriceChangeSeries, build_fixed_tick, build_quantile_states, build_two_state_mean
from .markov import estimate_transitions

DEFAULT_WINDOWS = np.arange(10, 1201, 10, dtype=float)
KINDS = ("empirical", "theoretical", "sqrt-empirical", "sqrt-theoretical")


@dataclass(frozen=True, eq=False)
class StdCurve:
    windows: np.ndarray
    std: np.ndarray
    kind: str = "empirical"

    def __post_init__(self):
        w = np.asarray(self.windows, dtype=float)
        s = np.asarray(self.std, dtype=float)
        object.__setattr__(self, "windows", w)
        object.__setattr__(self, "std", s)
        if w.shape != s.shape:
            raise ValueError("windows and std must have the same length")
        if np.any(np.diff(w) <= 0):
            raise ValueError("window sizes must be strictly increasing")
        if np.any(s < 0):
            raise ValueError("standard deviations must be >= 0")

    def __len__(self) -> int:
        return self.windows.size


def write_curves(path, curves) -> None:
    """CSV with header ``window_seconds,std,kind``, one row per curve point."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["window_seconds", "std", "kind"])
        for curve in curves:
            for w, s in zip(curve.windows, curve.std):
                writer.writerow([repr(float(w)), repr(float(s)), curve.kind])


def read_curves(path) -> dict[str, StdCurve]:
    rows: dict[str, list] = {}
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            rows.setdefault(row["kind"], []).append((float(row["window_seconds"]), float(row["std"])))
    return {k: StdCurve([r[0] for r in v], [r[1] for r in v], k) for k, v in rows.items()}


# --------------------------------------------------------------------------
# window residuals and curves


def window_residuals(changes: PriceChangeSeries, a_star: float, n: float, marks=None) -> np.ndarray:
    """Per-window displacement minus ``a_star`` times the window's event count.

    Windows are the disjoint intervals ``[start + i n, start + (i + 1) n)``
    that fit completely in the session; a trailing partial window is
    dropped. ``marks`` replaces the observed change values when given.
    """
    if not n > 0:
        raise ValueError("window length must be > 0")
    values = changes.changes if marks is None else np.asarray(marks, dtype=float)
    if values.shape != changes.times.shape:
        raise ValueError("need one mark per change")
    k = int(math.floor(changes.duration / n + 1e-9))
    if k < 2:
        raise ValueError(f"window of {n}s leaves fewer than 2 complete windows")
    edges = changes.start + n * np.arange(k + 1)
    idx = np.searchsorted(changes.times, edges, side="left")
    csum = np.concatenate([[0.0], np.cumsum(values)])
    displacement = np.diff(csum[idx])
    counts = np.diff(idx)
    return displacement - a_star * counts


def empirical_std_curve(changes: PriceChangeSeries, a_star: float, windows=DEFAULT_WINDOWS,
                        marks=None) -> StdCurve:
    """Sample std (ddof=1) of the window residuals for each window size."""
    windows = np.asarray(windows, dtype=float)
    std = [np.std(window_residuals(changes, a_star, w, marks), ddof=1) for w in windows]
    return StdCurve(windows, np.asarray(std), "empirical")


def theoretical_std_curve(coefficient: float, windows=DEFAULT_WINDOWS) -> StdCurve:
    if coefficient < 0:
        raise ValueError("coefficient must be >= 0")
    windows = np.asarray(windows, dtype=float)
    return StdCurve(windows, coefficient * np.sqrt(windows), "theoretical")


def sqrt_transform(curve: StdCurve) -> StdCurve:
    kind = curve.kind if curve.kind.startswith("sqrt") else f"sqrt-{curve.kind}"
    return StdCurve(curve.windows, np.sqrt(curve.std), kind)


def mean_squared_residual(empirical: StdCurve, theoretical: StdCurve, transform: bool = True) -> float:
    """Mean squared gap between two curves on the same grid.

    With ``transform=True`` untransformed inputs are square-rooted first;
    curves already marked ``sqrt-*`` are used as they are.
    """
    if not np.array_equal(empirical.windows, theoretical.windows):
        raise ValueError("curves are on different window grids")

    def prep(c):
        return sqrt_transform(c) if transform and not c.kind.startswith("sqrt") else c

    return float(np.mean((prep(empirical).std - prep(theoretical).std) ** 2))


@dataclass(frozen=True)
class BestFit:
    coefficient: float
    theoretical: float | None = None
    percent_error: float | None = None


def best_fit_coefficient(empirical: StdCurve, theoretical: float | None = None) -> BestFit:
    """Least-squares ``c`` in ``std(n) ~ c sqrt(n)`` on the untransformed curve."""
    if len(empirical) < 2:
        raise ValueError("need at least two curve points")
    if not np.any(empirical.std > 0):
        raise ValueError("all-zero curve has no meaningful fit")
    w = empirical.windows
    c = float(np.sum(empirical.std * np.sqrt(w)) / np.sum(w))
    if theoretical is None:
        return BestFit(c)
    return BestFit(c, float(theoretical), abs(theoretical - c) / c * 100.0)


# --------------------------------------------------------------------------
# arrival diagnostics


def qq_poisson_data(events: EventSequence) -> tuple[np.ndarray, np.ndarray]:
    """Sorted inter-arrival times against exponential quantiles of the same mean.

    Plotting positions are ``(i - 0.5) / m`` for ``m`` gaps.
    """
    if len(events) < 10:
        raise ValueError("need at least 10 events")
    gaps = np.sort(np.diff(events.times, prepend=0.0))
    m = gaps.size
    probs = (np.arange(1, m + 1) - 0.5) / m
    return gaps, stats.expon.ppf(probs, scale=gaps.mean())


def clustering_counts(events: EventSequence, window: float = 60.0, step: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """Events in ``[t, t + window)`` for ``t`` on a regular grid with spacing ``step``."""
    if not events.horizon > window:
        raise ValueError("horizon must exceed the window")
    if not len(events):
        return np.empty(0), np.empty(0, dtype=np.int64)
    grid = np.arange(0.0, events.horizon - window + 1e-12, step)
    lo = np.searchsorted(events.times, grid, side="left")
    hi = np.searchsorted(events.times, grid + window, side="left")
    return grid, hi - lo


# --------------------------------------------------------------------------
# Monte Carlo limit-theorem checks


@dataclass(frozen=True)
class VerifyReport:
    sample: float
    predicted: float
    z: float
    paths: int
    seed: int | None
    se: float
    ks_pvalue: float | None = None

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def default_jobs() -> int:
    return max(int(os.environ.get("HAWKES_LOB_JOBS", "1")), 1)


def _path_sums(model: CompoundModel, n: float, t: float, burn_in: float, ss: np.random.SeedSequence,
               a_ref: float) -> tuple[float, float]:
    """``S_{nt}`` and ``sum (a(X_k) - a_ref)`` for one path after a burn-in period."""
    arr_seq, mark_seq = ss.spawn(2)
    span = n * t
    burn = burn_in * span
    events = simulate(model.spec, burn + span, np.random.default_rng(arr_seq))
    count = len(events) - int(np.searchsorted(events.times, burn, side="right"))
    states = sample_marks(model, count, np.random.default_rng(mark_seq))
    marks = model.marks[states]
    return float(marks.sum()), float(np.sum(marks - a_ref))


def _run_paths(model, n, t, paths, path_seq, burn_in, a_ref, jobs):
    seeds = path_seq.spawn(paths)

    def one(ss):
        return _path_sums(model, n, t, burn_in, ss, a_ref)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            out = list(pool.map(one, seeds))
    else:
        out = [one(ss) for ss in seeds]
    return np.asarray(out)


def _arrival_rate(model: CompoundModel, seed: np.random.SeedSequence, rate_horizon=None) -> tuple[float, float]:
    """Stationary arrivals per unit time and its standard error (0 for linear specs)."""
    if model.spec.is_linear:
        return model.spec.stationary_rate(), 0.0
    return stationary_unit_arrivals(model.spec, np.random.default_rng(seed), horizon=rate_horizon)


def _streams(seed) -> tuple[np.random.SeedSequence, np.random.SeedSequence]:
    # one stream for the stationary-rate estimate, one parent for the paths
    rate_seq, path_seq = as_seed_sequence(seed).spawn(2)
    return rate_seq, path_seq


def verify_fclt(model: CompoundModel, n: float, t: float = 1.0, paths: int = 1000, seed=None,
                jobs: int = 1, burn_in: float = 0.1, a_star: float | None = None,
                rate_horizon: float | None = None) -> VerifyReport:
    """Compare the spread of ``(S_{nt} - N(nt) a*) / sqrt(n)`` with its diffusion limit.

    The predicted standard deviation is the diffusion coefficient times
    ``sqrt(t)``. ``a_star`` overrides the model's stationary mean mark in
    the statistic (the prediction is unchanged). The z-score uses the
    large-sample standard error ``s / sqrt(2 (paths - 1))`` of a sample
    standard deviation.
    """
    if paths < 100:
        raise ValueError("need at least 100 paths")
    model.spec.require_stationary()
    warn_if_no_first_moment(model.spec.kernel)
    lp = model.limit_params
    a_ref = lp.a_star if a_star is None else a_star
    rate_seq, path_seq = _streams(seed)
    if model.spec.is_linear:
        coef = diffusion_coefficient(lp.sigma_star, model.spec.baseline, model.spec.branching_ratio)
    else:
        rate, _ = _arrival_rate(model, rate_seq, rate_horizon)
        coef = nonlinear_diffusion_coefficient(lp.sigma_star, rate)
    predicted = coef * math.sqrt(t)
    sums = _run_paths(model, n, t, paths, path_seq, burn_in, a_ref, jobs)
    stat = sums[:, 1] / math.sqrt(n)
    sample = float(np.std(stat, ddof=1))
    se = sample / math.sqrt(2 * (paths - 1))
    z = _z(sample, predicted, se)
    pvalue = float(stats.kstest(stat / predicted, "norm").pvalue) if predicted > 0 else None
    return VerifyReport(sample, predicted, z, paths, _seed_repr(seed), se, pvalue)


def verify_lln(model: CompoundModel, n: float, t: float = 1.0, paths: int = 100, seed=None,
               jobs: int = 1, burn_in: float = 0.1, a_star: float | None = None,
               rate_horizon: float | None = None) -> VerifyReport:
    """Compare the ensemble mean of ``S_{nt} / n`` with the drift ``a* rate t``.

    For non-linear links the arrival rate comes from a long stationary
    simulation and its standard error enters the z-score.
    """
    if paths < 100:
        raise ValueError("need at least 100 paths")
    model.spec.require_stationary()
    warn_if_no_first_moment(model.spec.kernel)
    lp = model.limit_params
    a_ref = lp.a_star if a_star is None else a_star
    rate_seq, path_seq = _streams(seed)
    if model.spec.is_linear:
        rate = lln_drift(1.0, model.spec.baseline, model.spec.branching_ratio)
        rate_se = 0.0
    else:
        rate, rate_se = _arrival_rate(model, rate_seq, rate_horizon)
    predicted = a_ref * rate * t
    sums = _run_paths(model, n, t, paths, path_seq, burn_in, lp.a_star, jobs)
    stat = sums[:, 0] / n
    sample = float(stat.mean())
    se = math.hypot(float(stat.std(ddof=1)) / math.sqrt(paths), abs(a_ref) * t * rate_se)
    return VerifyReport(sample, predicted, _z(sample, predicted, se), paths, _seed_repr(seed), se)


def _z(sample: float, predicted: float, se: float) -> float:
    if se > 0:
        return (sample - predicted) / se
    return 0.0 if math.isclose(sample, predicted, abs_tol=1e-15) else math.copysign(math.inf, sample - predicted)


def _seed_repr(seed):
    return seed if seed is None or isinstance(seed, int) else None


# --------------------------------------------------------------------------
# state models from observed changes

VARIANTS = ("chpdo", "two-state", "quantile", "nonlinear")


def fit_state_model(changes, variant: str = "quantile", quantiles: int = 16, per_side: bool = True,
                    delta: float = HALF_TICK):
    """Build the mark states for ``variant`` and estimate their transition matrix.

    Returns ``(state_model, P, limit_params)``. The non-linear variant uses
    the same quantile states; only its arrival rate differs.
    """
    if variant == "chpdo":
        model, states = build_fixed_tick(changes, delta)
    elif variant == "two-state":
        model, states = build_two_state_mean(changes)
    elif variant in ("quantile", "nonlinear"):
        model, states = build_quantile_states(changes, quantiles, per_side)
    else:
        raise ValueError(f"unknown variant {variant!r}; choose from {', '.join(VARIANTS)}")
    P = estimate_transitions(states, model.n)
    return model, P, compute_limit_params(P, model.marks)
