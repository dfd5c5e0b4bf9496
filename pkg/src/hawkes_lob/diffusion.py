"""Drift and diffusion coefficients of compound Hawkes mid-price models.

The n-state formula in :func:`compute_limit_params` is the reference
implementation. The two-state and fixed-tick closed forms are computed
independently and are expected to agree with it.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from .markov import check_transition_matrix, fundamental_solve, stationary_distribution


@dataclass(frozen=True)
class LimitParams:
    """Mark-chain quantities behind the law of large numbers and the FCLT.

    Attributes
    ----------
    a_star : float
        Stationary mean mark.
    sigma_star : float
        Volatility per event of the centred mark sums.
    b, g, v : ndarray
        Centred marks, fundamental solution and per-state variance terms.
    pi : ndarray
        Stationary distribution of the chain.
    """

    a_star: float
    sigma_star: float
    b: np.ndarray
    g: np.ndarray
    v: np.ndarray
    pi: np.ndarray

    def to_dict(self) -> dict:
        out = asdict(self)
        for key in ("b", "g", "v", "pi"):
            out[key] = [float(x) for x in out[key]]
        return out

    def to_json(self) -> str:
        # json writes floats with repr, so values round-trip exactly
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "LimitParams":
        d = json.loads(text)
        return cls(
            a_star=d["a_star"],
            sigma_star=d["sigma_star"],
            **{k: np.asarray(d[k], dtype=float) for k in ("b", "g", "v", "pi")},
        )


def _variance_terms(P: np.ndarray, b: np.ndarray, g: np.ndarray) -> np.ndarray:
    # jumps[i, j] = g(j) - g(i)
    jumps = g[None, :] - g[:, None]
    v = b**2 + np.sum(jumps**2 * P, axis=1) - 2.0 * b * np.sum(jumps * P, axis=1)
    # v(i) is a conditional second moment; clip round-off below zero
    return np.clip(v, 0.0, None)


def compute_limit_params(P, marks) -> LimitParams:
    """Stationary mean mark and mark-chain volatility for an ergodic chain."""
    P = check_transition_matrix(P)
    a = np.asarray(marks, dtype=float)
    if a.shape != (P.shape[0],):
        raise ValueError(f"expected {P.shape[0]} marks, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("marks must be finite")
    pi = stationary_distribution(P)
    a_star = float(pi @ a)
    b = a - a_star
    g = fundamental_solve(P, pi, b)
    v = _variance_terms(P, b, g)
    return LimitParams(a_star, math.sqrt(float(pi @ v)), b, g, v, pi)


def _check_two_state(p_dd: float, p_uu: float) -> None:
    for name, p in (("p_dd", p_dd), ("p_uu", p_uu)):
        if not 0 < p < 1:
            raise ValueError(f"{name} must lie strictly inside (0, 1), got {p}")


def _two_state_pieces(p_dd, p_uu, a1, a2):
    P = np.array([[p_dd, 1 - p_dd], [1 - p_uu, p_uu]])
    pi_down = (1 - p_uu) / ((1 - p_uu) + (1 - p_dd))
    pi = np.array([pi_down, 1 - pi_down])
    a_star = pi_down * a1 + (1 - pi_down) * a2
    b = np.array([a1, a2]) - a_star
    # b is orthogonal to pi, hence a right eigenvector of P with eigenvalue p_dd + p_uu - 1
    rho = p_dd + p_uu - 1
    g = b / (rho - 1)
    return P, pi, a_star, b, g, rho


def two_state_closed_form(p_dd: float, p_uu: float, a1: float, a2: float) -> LimitParams:
    """Two-state chain (state 0 = down, state 1 = up) in closed form.

    Uses ``sigma^2 = pi_1 pi_2 (a1 - a2)^2 (1 + rho) / (1 - rho)`` with
    ``rho = p_dd + p_uu - 1`` the second eigenvalue of the chain.
    """
    _check_two_state(p_dd, p_uu)
    P, pi, a_star, b, g, rho = _two_state_pieces(p_dd, p_uu, a1, a2)
    var = pi[0] * pi[1] * (a1 - a2) ** 2 * (1 + rho) / (1 - rho)
    return LimitParams(a_star, math.sqrt(var), b, g, _variance_terms(P, b, g), pi)


def chpdo_closed_form(p_dd: float, p_uu: float, delta: float) -> LimitParams:
    """Fixed-tick model with marks ``-delta`` (down) and ``+delta`` (up).

    ``pi_up`` is the stationary probability of the up state, ``p = p_uu``
    and ``p' = p_dd``::

        a*      = delta (2 pi_up - 1)
        sigma^2 = 4 delta^2 ((1 - p' + pi_up (p' - p)) / (p + p' - 2)^2 - pi_up (1 - pi_up))
    """
    _check_two_state(p_dd, p_uu)
    if not delta > 0:
        raise ValueError(f"delta must be > 0, got {delta}")
    P, pi, _, b, g, _ = _two_state_pieces(p_dd, p_uu, -delta, delta)
    p, pp, pi_up = p_uu, p_dd, pi[1]
    a_star = delta * (2 * pi_up - 1)
    var = 4 * delta**2 * ((1 - pp + pi_up * (pp - p)) / (p + pp - 2) ** 2 - pi_up * (1 - pi_up))
    return LimitParams(a_star, math.sqrt(max(var, 0.0)), b, g, _variance_terms(P, b, g), pi)


def diffusion_coefficient(sigma_star: float, baseline: float, branching_ratio: float) -> float:
    """``sigma* sqrt(baseline / (1 - branching_ratio))``, the Brownian scale of the price."""
    if branching_ratio >= 1:
        raise ValueError(f"supercritical: branching ratio {branching_ratio} >= 1, no diffusion limit")
    if not baseline > 0:
        raise ValueError(f"baseline must be > 0, got {baseline}")
    if sigma_star < 0:
        raise ValueError("sigma_star must be >= 0")
    return sigma_star * math.sqrt(baseline / (1.0 - branching_ratio))


def nonlinear_diffusion_coefficient(sigma_star: float, expected_unit_arrivals: float) -> float:
    """``sigma* sqrt(E[N[0,1]])``; reduces to :func:`diffusion_coefficient` for linear Hawkes."""
    if expected_unit_arrivals < 0:
        raise ValueError("expected_unit_arrivals must be >= 0")
    if sigma_star < 0:
        raise ValueError("sigma_star must be >= 0")
    return sigma_star * math.sqrt(expected_unit_arrivals)


def lln_drift(a_star: float, baseline: float, branching_ratio: float) -> float:
    if branching_ratio >= 1:
        raise ValueError(f"supercritical: branching ratio {branching_ratio} >= 1, no LLN")
    if not baseline > 0:
        raise ValueError(f"baseline must be > 0, got {baseline}")
    return a_star * baseline / (1.0 - branching_ratio)
