"""Maximum-likelihood fitting of exponential-kernel Hawkes processes."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import minimize

from . import _kernels
from .hawkes import EventSequence

MIN_EVENTS = 10
# log-space search cannot reach alpha = 0 exactly
ALPHA_FLOOR = 1e-8


def log_likelihood(baseline: float, alpha: float, beta: float, events: EventSequence) -> float:
    """``sum_i log rate(t_i) - Lambda(T)`` via the O(n) exponential recursion."""
    if not (baseline > 0 and alpha >= 0 and beta > 0):
        raise ValueError("need baseline > 0, alpha >= 0, beta > 0")
    ll = _kernels.exponential_loglik(events.times, events.horizon, float(baseline), float(alpha), float(beta))
    if not math.isfinite(ll):
        raise FloatingPointError(f"log-likelihood is not finite at ({baseline}, {alpha}, {beta})")
    return ll


def expected_unit_arrivals(baseline: float, alpha: float, beta: float) -> float:
    """Stationary mean number of events per unit time."""
    ratio = alpha / beta
    if ratio >= 1:
        raise ValueError(f"supercritical fit: alpha/beta = {ratio:.6g} >= 1")
    return baseline / (1.0 - ratio)


def empirical_unit_arrivals(events: EventSequence) -> float:
    if not events.horizon > 0:
        raise ValueError("horizon must be > 0")
    return len(events) / events.horizon


@dataclass(frozen=True)
class FitConfig:
    """Search box, evaluation budget and restarts for :func:`fit_mle`."""

    baseline_bounds: tuple[float, float] = (1e-6, 1e3)
    alpha_bounds: tuple[float, float] = (0.0, 1e6)
    beta_bounds: tuple[float, float] = (1e-6, 1e6)
    budget: int = 20_000
    restarts: int = 4
    seed: int | None = 0
    tolerance: float = 1e-6
    particles: int = 16

    def __post_init__(self):
        for name in ("baseline_bounds", "alpha_bounds", "beta_bounds"):
            lo, hi = getattr(self, name)
            if not (0 <= lo < hi):
                raise ValueError(f"{name} must satisfy 0 <= lo < hi, got {(lo, hi)}")
        if not self.baseline_bounds[0] > 0 or not self.beta_bounds[0] > 0:
            raise ValueError("baseline and beta lower bounds must be > 0")
        if self.budget < 1:
            raise ValueError("budget must be >= 1")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")

    def log_box(self) -> np.ndarray:
        lo_a = max(self.alpha_bounds[0], ALPHA_FLOOR)
        return np.log(
            np.array(
                [
                    self.baseline_bounds,
                    (lo_a, self.alpha_bounds[1]),
                    self.beta_bounds,
                ],
                dtype=float,
            )
        )


@dataclass(frozen=True)
class FitResult:
    baseline: float
    alpha: float
    beta: float
    loglik: float
    mu_hat: float
    expected_unit_arrivals: float
    converged: bool
    evaluations: int
    supercritical: bool = False
    extra: dict = field(default_factory=dict)

    def to_json(self) -> str:
        d = asdict(self)
        if not math.isfinite(d["expected_unit_arrivals"]):
            d["expected_unit_arrivals"] = None
        return json.dumps(d, indent=2)

    def table_row(self, label: str = "") -> str:
        return f"{label:<6} {self.baseline:>10.4f} {self.alpha:>12.4f} {self.beta:>12.4f}"


class _BudgetExhausted(Exception):
    pass


class _Objective:
    """Negative log-likelihood in log-parameters with an evaluation counter."""

    def __init__(self, events: EventSequence, budget: int):
        self.times = events.times
        self.horizon = events.horizon
        self.budget = budget
        self.calls = 0
        self.best_x = None
        self.best_f = math.inf

    def __call__(self, x) -> float:
        if self.calls >= self.budget:
            raise _BudgetExhausted
        self.calls += 1
        lam, a, b = np.exp(x)
        f = -_kernels.exponential_loglik(self.times, self.horizon, lam, a, b)
        if not math.isfinite(f):
            f = math.inf
        if f < self.best_f:
            self.best_f = f
            self.best_x = np.array(x, dtype=float)
        return f


def _particle_swarm(obj: _Objective, box: np.ndarray, rng: np.random.Generator, n_particles: int,
                    max_evals: int, tol: float, patience: int = 10) -> tuple[np.ndarray, float]:
    """Global-best PSO with constriction coefficients, clipped to the box."""
    lo, hi = box[:, 0], box[:, 1]
    span = hi - lo
    w, c1, c2 = 0.7298, 1.49618, 1.49618
    pos = lo + rng.random((n_particles, lo.size)) * span
    vel = (rng.random(pos.shape) - 0.5) * span * 0.2
    pbest = pos.copy()
    pbest_f = np.array([obj(p) for p in pos])
    g = int(np.argmin(pbest_f))
    gbest, gbest_f = pbest[g].copy(), pbest_f[g]
    stale = 0
    used = n_particles
    while used + n_particles <= max_evals and stale < patience:
        r1 = rng.random(pos.shape)
        r2 = rng.random(pos.shape)
        vel = w * vel + c1 * r1 * (pbest - pos) + c2 * r2 * (gbest - pos)
        vel = np.clip(vel, -0.25 * span, 0.25 * span)
        pos = np.clip(pos + vel, lo, hi)
        f = np.array([obj(p) for p in pos])
        used += n_particles
        better = f < pbest_f
        pbest[better], pbest_f[better] = pos[better], f[better]
        g = int(np.argmin(pbest_f))
        if pbest_f[g] < gbest_f - tol * (1.0 + abs(gbest_f)):
            stale = 0
        else:
            stale += 1
        if pbest_f[g] < gbest_f:
            gbest, gbest_f = pbest[g].copy(), pbest_f[g]
    return gbest, gbest_f


def fit_mle(events: EventSequence, config: FitConfig | None = None) -> FitResult:
    """Maximise the exponential-kernel log-likelihood over the configured box.

    Each restart runs a seeded particle swarm in log-parameter space and then
    polishes the swarm optimum with Nelder-Mead. The best restart wins. When
    the evaluation budget runs out the best point seen so far is returned
    with ``converged=False``.
    """
    config = config or FitConfig()
    if len(events) < MIN_EVENTS:
        raise ValueError(f"unidentifiable: need at least {MIN_EVENTS} events, got {len(events)}")
    box = config.log_box()
    obj = _Objective(events, config.budget)
    seeds = np.random.SeedSequence(config.seed).spawn(config.restarts)
    per_restart = max(config.budget // config.restarts, 1)
    exhausted = False
    polished_ok = []
    optima = []
    try:
        for ss in seeds:
            rng = np.random.default_rng(ss)
            limit = min(obj.calls + per_restart, config.budget)
            swarm_evals = int(0.7 * (limit - obj.calls))
            x0, _ = _particle_swarm(obj, box, rng, config.particles, swarm_evals, config.tolerance)
            res = minimize(
                lambda x: obj(np.clip(x, box[:, 0], box[:, 1])),
                x0,
                method="Nelder-Mead",
                options={
                    "maxfev": max(limit - obj.calls, 1),
                    "xatol": 1e-8,
                    "fatol": config.tolerance,
                    "initial_simplex": x0 + np.vstack([np.zeros(3), 0.05 * np.eye(3)]),
                },
            )
            polished_ok.append(bool(res.success))
            optima.append(float(res.fun))
    except _BudgetExhausted:
        exhausted = True
    if obj.best_x is None:
        lam, a, b = np.exp(box.mean(axis=1))
        best_f = math.inf
    else:
        lam, a, b = np.exp(np.clip(obj.best_x, box[:, 0], box[:, 1]))
        best_f = obj.best_f
    # agreement of at least two independent restarts on the optimum
    optima = sorted(optima)
    agreed = len(optima) >= 2 and optima[1] - optima[0] <= config.tolerance * (1.0 + abs(optima[0]))
    converged = (not exhausted) and any(polished_ok) and (agreed or config.restarts == 1)
    mu_hat = a / b
    supercritical = mu_hat >= 1
    return FitResult(
        baseline=float(lam),
        alpha=float(a),
        beta=float(b),
        loglik=-float(best_f),
        mu_hat=float(mu_hat),
        expected_unit_arrivals=math.inf if supercritical else float(lam / (1 - mu_hat)),
        converged=bool(converged and not supercritical),
        evaluations=obj.calls,
        supercritical=bool(supercritical),
        extra={"restart_optima": [-f for f in optima]},
    )
