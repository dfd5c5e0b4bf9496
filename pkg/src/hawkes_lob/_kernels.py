"""Compiled inner loops for simulation and likelihood evaluation.

Everything here works on plain floats and arrays; the public wrappers in
:mod:`hawkes_lob.hawkes`, :mod:`hawkes_lob.markov` and :mod:`hawkes_lob.mle`
validate inputs before calling in.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

LINK_IDENTITY = 0
LINK_INDICATOR = 1
LINK_CAPPED = 2


@njit(cache=True, nogil=True)
def apply_link(x, link_code, ceiling):
    if link_code == LINK_IDENTITY:
        return x
    if link_code == LINK_INDICATOR:
        return 1.0 if x > 0.0 else 0.0
    if x < 0.0:
        return 0.0
    return x if x < ceiling else ceiling


@njit(cache=True, nogil=True)
def _grow(buf):
    out = np.empty(2 * buf.size, dtype=buf.dtype)
    out[: buf.size] = buf
    return out


@njit(cache=True, nogil=True)
def simulate_exponential(rng, baseline, alpha, beta, link_code, ceiling, horizon, max_events):
    """Thinning for an exponential kernel.

    ``decay`` holds sum_i exp(-beta (t - t_i)) at the current time ``t`` so
    each candidate costs O(1). Between events the linear intensity only
    decays, so the intensity at ``t`` dominates the rest of the gap.

    Returns ``(times, exploded)``; when ``exploded`` is true the path was cut
    after ``max_events`` events.
    """
    buf = np.empty(1024, dtype=np.float64)
    n = 0
    t = 0.0
    decay = 0.0
    while True:
        bound = apply_link(baseline + alpha * decay, link_code, ceiling)
        if bound <= 0.0:
            break
        wait = rng.exponential(1.0 / bound)
        if t + wait > horizon:
            break
        t += wait
        decay *= math.exp(-beta * wait)
        rate = apply_link(baseline + alpha * decay, link_code, ceiling)
        if rng.random() * bound <= rate:
            if n == max_events:
                return buf[:n].copy(), True
            if n == buf.size:
                buf = _grow(buf)
            if n > 0 and t <= buf[n - 1]:
                # the wait fell below the float spacing at t; keep times strictly increasing
                t = np.nextafter(buf[n - 1], np.inf)
            buf[n] = t
            n += 1
            decay += 1.0
    return buf[:n].copy(), False


@njit(cache=True, nogil=True)
def _power_excitation(times, n, t, k, c, p):
    total = 0.0
    for i in range(n):
        total += k / (c + (t - times[i])) ** p
    return total


@njit(cache=True, nogil=True)
def simulate_power_law(rng, baseline, k, c, p, link_code, ceiling, horizon, max_events):
    """Thinning for the power-law kernel; O(n) per candidate."""
    buf = np.empty(1024, dtype=np.float64)
    n = 0
    t = 0.0
    while True:
        bound = apply_link(baseline + _power_excitation(buf, n, t, k, c, p), link_code, ceiling)
        if bound <= 0.0:
            break
        wait = rng.exponential(1.0 / bound)
        if t + wait > horizon:
            break
        t += wait
        rate = apply_link(baseline + _power_excitation(buf, n, t, k, c, p), link_code, ceiling)
        if rng.random() * bound <= rate:
            if n == max_events:
                return buf[:n].copy(), True
            if n == buf.size:
                buf = _grow(buf)
            if n > 0 and t <= buf[n - 1]:
                # the wait fell below the float spacing at t; keep times strictly increasing
                t = np.nextafter(buf[n - 1], np.inf)
            buf[n] = t
            n += 1
    return buf[:n].copy(), False


@njit(cache=True, nogil=True)
def exponential_loglik(times, horizon, baseline, alpha, beta):
    """Log-likelihood of an exponential-kernel Hawkes path in O(n)."""
    ll = 0.0
    state = 0.0
    prev = 0.0
    tail = 0.0
    for i in range(times.size):
        if i > 0:
            state = math.exp(-beta * (times[i] - prev)) * (1.0 + state)
        ll += math.log(baseline + alpha * state)
        lag = beta * (horizon - times[i])
        # exp(-lag) is below double precision relative to 1 past lag ~ 37
        if lag < 40.0:
            tail += math.exp(-lag)
        prev = times[i]
    comp = baseline * horizon + (alpha / beta) * (times.size - tail)
    return ll - comp


@njit(cache=True, nogil=True)
def simulate_chain(rng, cumulative, start, steps):
    """Sample ``steps`` states of a chain whose row CDFs are ``cumulative``."""
    n_states = cumulative.shape[0]
    out = np.empty(steps, dtype=np.int64)
    state = start
    out[0] = state
    for s in range(1, steps):
        u = rng.random()
        row = cumulative[state]
        j = 0
        while j < n_states - 1 and u >= row[j]:
            j += 1
        state = j
        out[s] = state
    return out
