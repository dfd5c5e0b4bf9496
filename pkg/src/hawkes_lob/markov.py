"""Finite ergodic Markov chains driving the price-change marks.

States are 0-based indices into the transition matrix. Matrices are plain
``numpy`` arrays validated on entry to each function.
"""

from __future__ import annotations

import json
import math
from functools import reduce

import numpy as np
from scipy.sparse.csgraph import connected_components

from . import _kernels

ROW_TOL = 1e-12


class ChainError(ValueError):
    """The chain does not meet the structural requirement of an operation."""


def check_transition_matrix(P) -> np.ndarray:
    """Return ``P`` as a float array after checking it is row-stochastic."""
    P = np.array(P, dtype=float)
    if P.ndim != 2 or P.shape[0] != P.shape[1] or P.shape[0] == 0:
        raise ValueError(f"transition matrix must be square and non-empty, got shape {P.shape}")
    if not np.all(np.isfinite(P)) or np.any(P < 0) or np.any(P > 1):
        raise ValueError("transition probabilities must lie in [0, 1]")
    bad = np.flatnonzero(np.abs(P.sum(axis=1) - 1.0) > ROW_TOL)
    if bad.size:
        raise ValueError(f"rows {bad.tolist()} do not sum to 1")
    return P


def is_irreducible(P) -> bool:
    n_comp, _ = connected_components(np.asarray(P) > 0, directed=True, connection="strong")
    return n_comp == 1


def period(P) -> int:
    """Period of an irreducible chain, from BFS levels over the transition graph."""
    adj = np.asarray(P) > 0
    n = adj.shape[0]
    level = np.full(n, -1)
    level[0] = 0
    frontier = [0]
    while frontier:
        nxt = []
        for u in frontier:
            for v in np.flatnonzero(adj[u]):
                if level[v] < 0:
                    level[v] = level[u] + 1
                    nxt.append(v)
        frontier = nxt
    diffs = [abs(int(level[u]) + 1 - int(level[v])) for u, v in zip(*np.nonzero(adj)) if level[u] >= 0]
    return reduce(math.gcd, diffs, 0)


def check_ergodic(P) -> np.ndarray:
    P = check_transition_matrix(P)
    if not is_irreducible(P):
        raise ChainError("chain is reducible: no unique stationary distribution")
    d = period(P)
    if d != 1:
        raise ChainError(f"chain is periodic with period {d}")
    return P


def estimate_transitions(states, n: int) -> np.ndarray:
    """Empirical transition matrix from a 0-based state sequence."""
    states = np.asarray(states, dtype=np.int64)
    if states.ndim != 1 or states.size < 2:
        raise ValueError("need a state sequence of length >= 2")
    if states.min() < 0 or states.max() >= n:
        raise ValueError(f"states must lie in 0..{n - 1}")
    counts = np.zeros((n, n))
    np.add.at(counts, (states[:-1], states[1:]), 1.0)
    totals = counts.sum(axis=1)
    empty = np.flatnonzero(totals == 0)
    if empty.size:
        seen = set(np.unique(states).tolist())
        detail = ", ".join(
            f"state {s} {'has no successor' if s in seen else 'never observed'}" for s in empty
        )
        raise ChainError(f"cannot estimate transitions: {detail}; merge states or reduce n")
    return counts / totals[:, None]


def stationary_distribution(P) -> np.ndarray:
    """Unique ``pi`` with ``pi P = pi`` and ``sum(pi) = 1``.

    Solves ``(P^T - I) pi = 0`` with the last equation replaced by the
    normalisation constraint.
    """
    P = check_ergodic(P)
    n = P.shape[0]
    A = P.T - np.eye(n)
    A[-1, :] = 1.0
    rhs = np.zeros(n)
    rhs[-1] = 1.0
    pi = np.linalg.solve(A, rhs)
    pi = np.clip(pi, 0.0, None)
    return pi / pi.sum()


def fundamental_solve(P, pi, b) -> np.ndarray:
    """Solve ``(P + Pi* - I) g = b`` where every row of ``Pi*`` equals ``pi``."""
    P = check_transition_matrix(P)
    pi = np.asarray(pi, dtype=float)
    b = np.asarray(b, dtype=float)
    n = P.shape[0]
    if pi.shape != (n,) or b.shape != (n,):
        raise ValueError("pi and b must have one entry per state")
    if not np.all(np.isfinite(b)):
        raise ValueError("b must be finite")
    M = P + np.tile(pi, (n, 1)) - np.eye(n)
    cond = np.linalg.cond(M)
    if not np.isfinite(cond) or cond > 1e14:
        raise ChainError(f"fundamental system is singular (condition number {cond:.3g})")
    g = np.linalg.solve(M, b)
    resid = np.max(np.abs(M @ g - b)) if n else 0.0
    if resid > 1e-10 * (1.0 + np.max(np.abs(b))):
        # one step of iterative refinement
        g = g + np.linalg.solve(M, b - M @ g)
    return g


def simulate_chain(P, pi0, steps: int, seed=None) -> np.ndarray:
    """Sample ``steps`` consecutive states.

    ``pi0`` is either an initial state index or an initial distribution.
    Periodic chains are allowed; reducible ones are rejected.
    """
    P = check_transition_matrix(P)
    if steps < 1:
        raise ValueError("steps must be >= 1")
    if not is_irreducible(P):
        raise ChainError("chain is reducible")
    rng = np.random.default_rng(seed)
    n = P.shape[0]
    if np.ndim(pi0) == 0:
        start = int(pi0)
        if not 0 <= start < n:
            raise ValueError(f"start state {start} out of range")
    else:
        dist = np.asarray(pi0, dtype=float)
        if dist.shape != (n,) or np.any(dist < 0) or abs(dist.sum() - 1) > 1e-9:
            raise ValueError("initial distribution must be a probability vector over the states")
        start = int(min(np.searchsorted(np.cumsum(dist), rng.random(), side="right"), n - 1))
    return _kernels.simulate_chain(rng, np.cumsum(P, axis=1), start, int(steps))


def chain_to_json(P, marks, **extra) -> str:
    P = np.asarray(P, dtype=float)
    payload = {"n": int(P.shape[0]), "P": P.tolist(), "a": [float(x) for x in marks]}
    for key, value in extra.items():
        payload[key] = value.tolist() if isinstance(value, np.ndarray) else value
    return json.dumps(payload, indent=2)


def chain_from_json(text: str) -> tuple[np.ndarray, np.ndarray, dict]:
    """Inverse of :func:`chain_to_json`; returns ``(P, marks, extra)``."""
    payload = json.loads(text)
    missing = {"P", "a"} - set(payload)
    if missing:
        raise ValueError(f"chain JSON is missing {', '.join(sorted(missing))}")
    P = check_transition_matrix(payload.pop("P"))
    marks = np.asarray(payload.pop("a"), dtype=float)
    n = payload.pop("n", P.shape[0])
    if P.shape[0] != n or marks.shape != (n,):
        raise ValueError("inconsistent chain JSON: n, P and a disagree")
    return P, marks, payload
