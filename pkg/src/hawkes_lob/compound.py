"""Compound Hawkes mid-price paths ``S_t = S_0 + sum_{k <= N(t)} a(X_k)``."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import _kernels
from .diffusion import LimitParams, compute_limit_params
from .hawkes import EventSequence, HawkesSpec, as_seed_sequence, simulate
from .markov import check_ergodic


@dataclass(frozen=True, eq=False)
class CompoundModel:
    """Hawkes arrivals with marks read off an independent Markov chain."""

    spec: HawkesSpec
    P: np.ndarray
    marks: np.ndarray

    def __post_init__(self):
        P = check_ergodic(self.P)
        marks = np.asarray(self.marks, dtype=float)
        if marks.shape != (P.shape[0],):
            raise ValueError("need one mark per chain state")
        object.__setattr__(self, "P", P)
        object.__setattr__(self, "marks", marks)

    @classmethod
    def chpdo(cls, spec: HawkesSpec, p_dd: float, p_uu: float, delta: float = 0.005):
        P = np.array([[p_dd, 1 - p_dd], [1 - p_uu, p_uu]])
        return cls(spec, P, np.array([-delta, delta]))

    @cached_property
    def limit_params(self) -> LimitParams:
        return compute_limit_params(self.P, self.marks)


@dataclass(frozen=True, eq=False)
class CompoundPath:
    events: EventSequence
    states: np.ndarray
    changes: np.ndarray
    s0: float = 0.0

    def prices(self) -> np.ndarray:
        """Price right after each event."""
        return self.s0 + np.cumsum(self.changes)


def simulate_compound(
    model: CompoundModel,
    horizon: float,
    seed=None,
    s0: float = 0.0,
    initial=None,
) -> CompoundPath:
    """Sample arrivals and marks on ``[0, horizon]``.

    The first mark state is drawn from ``initial`` (a state index or a
    distribution), defaulting to the stationary distribution. Arrivals and
    marks use independent child streams of ``seed``.
    """
    ss = as_seed_sequence(seed)
    arrival_seq, mark_seq = ss.spawn(2)
    events = simulate(model.spec, horizon, np.random.default_rng(arrival_seq))
    states = sample_marks(model, len(events), np.random.default_rng(mark_seq), initial)
    return CompoundPath(events, states, model.marks[states], s0)


def sample_marks(model: CompoundModel, count: int, rng: np.random.Generator, initial=None) -> np.ndarray:
    if count == 0:
        return np.empty(0, dtype=np.int64)
    n = model.P.shape[0]
    if initial is None:
        initial = model.limit_params.pi
    if np.ndim(initial) == 0:
        start = int(initial)
    else:
        start = int(min(np.searchsorted(np.cumsum(initial), rng.random(), side="right"), n - 1))
    return _kernels.simulate_chain(rng, np.cumsum(model.P, axis=1), start, count)
