"""Neighbor-count Markov chain observed at communication-session boundaries.

The number of nodes sharing a cell with a tagged node is modeled as a
discrete-time birth-death chain sampled every session: at most one arrival
and one departure can occur within a session, arrivals come from the pool of
not-yet-neighboring nodes at the intermeeting rate, and departures end
contacts at the contact-time rate.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .mobility import MobilityStats

# Sessions are assumed short next to contacts; above this ratio the one-event-
# per-session assumption starts to bite.
_SESSION_CONTACT_WARN_RATIO = 0.5

_ROW_SUM_TOL = 1e-12


@dataclass(frozen=True)
class MacParams:
    """Session-MAC parameters.

    ``alpha`` is the maximum number of nodes admitted to one cell's
    communication session, ``session_time`` the session length in seconds,
    and ``pair_budget`` the number of messages one node may send to one other
    node within a single session.
    """

    alpha: int
    session_time: float
    pair_budget: int
    link_bandwidth: float | None = None
    message_size: float | None = None

    def __post_init__(self) -> None:
        if self.alpha < 2:
            raise ValueError(f"alpha must be >= 2, got {self.alpha}")
        if self.session_time <= 0.0:
            raise ValueError(f"session_time must be > 0, got {self.session_time}")
        if self.pair_budget < 1:
            raise ValueError(f"pair_budget must be >= 1, got {self.pair_budget}")

    @classmethod
    def from_bandwidth(
        cls,
        alpha: int,
        session_time: float,
        link_bandwidth: float,
        message_size: float,
    ) -> "MacParams":
        """Derive the per-pair session budget from a link bandwidth (bits/s)
        and message size (bits): whole messages per session, at least one."""
        if link_bandwidth <= 0.0:
            raise ValueError(f"link_bandwidth must be > 0, got {link_bandwidth}")
        if message_size <= 0.0:
            raise ValueError(f"message_size must be > 0, got {message_size}")
        budget = max(1, math.floor(link_bandwidth * session_time / message_size))
        return cls(
            alpha=alpha,
            session_time=session_time,
            pair_budget=budget,
            link_bandwidth=link_bandwidth,
            message_size=message_size,
        )


@dataclass(frozen=True)
class NeighborChain:
    """Tridiagonal session-boundary chain over neighbor counts 0..n_max."""

    transition: np.ndarray      # (n_max+1, n_max+1), row stochastic
    arrival_rates: np.ndarray   # effective arrival rate per state
    departure_rates: np.ndarray

    @property
    def n_max(self) -> int:
        return self.transition.shape[0] - 1

    def up(self, n: int) -> float:
        """P(n+1 | n); zero at the top state."""
        if n >= self.n_max:
            return 0.0
        return float(self.transition[n, n + 1])

    def down(self, n: int) -> float:
        """P(n-1 | n); zero at zero neighbors."""
        if n <= 0:
            return 0.0
        return float(self.transition[n, n - 1])

    def stay(self, n: int) -> float:
        return float(self.transition[n, n])


@dataclass(frozen=True)
class NeighborDistribution:
    """Steady-state probabilities of having 0..n_max neighbors."""

    probabilities: np.ndarray

    def __post_init__(self) -> None:
        p = self.probabilities
        if p.ndim != 1 or p.size == 0:
            raise ValueError("probabilities must be a non-empty 1-d array")
        if np.any(p < 0.0) or abs(float(p.sum()) - 1.0) > _ROW_SUM_TOL:
            raise ValueError("probabilities must be nonnegative and sum to 1")

    @property
    def n_max(self) -> int:
        return self.probabilities.size - 1

    def __getitem__(self, j: int) -> float:
        if 0 <= j < self.probabilities.size:
            return float(self.probabilities[j])
        return 0.0

    def tail_mass(self, n: int) -> float:
        """Total probability of having more than ``n`` neighbors."""
        return float(self.probabilities[n + 1:].sum())

    def mean(self) -> float:
        return float(self.probabilities @ np.arange(self.probabilities.size))


def _event_probability(rate: float, session_time: float) -> float:
    """Probability of exactly one event of a Poisson flow within a session."""
    x = rate * session_time
    return x * math.exp(-x)


def _birth_death_rows(
    stats: MobilityStats, session_time: float, n_tot: int, n_max: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    states = np.arange(n_max + 1, dtype=float)
    arrival = (n_tot - 1 - states) / stats.intermeeting_time
    departure = states / stats.contact_time
    p_arr = arrival * session_time * np.exp(-arrival * session_time)
    p_dep = departure * session_time * np.exp(-departure * session_time)
    up = p_arr * (1.0 - p_dep)
    down = (1.0 - p_arr) * p_dep
    return arrival, departure, up, down


def build_neighbor_chain(
    stats: MobilityStats,
    mac: MacParams,
    n_tot: int,
    n_max: int | None = None,
) -> NeighborChain:
    """Build the session-boundary neighbor chain for a network of ``n_tot`` nodes.

    Up-transitions are "one arrival and no departure", down-transitions the
    symmetric opposite, everything else stays put.  The up-mass of the capped
    top state is folded into its self-transition to keep rows stochastic.
    """
    if n_tot < 2:
        raise ValueError(f"n_tot must be >= 2, got {n_tot}")
    if stats.intermeeting_time <= 0.0 or stats.contact_time <= 0.0:
        raise ValueError("intermeeting and contact times must be positive")
    if n_max is None:
        n_max = default_n_max(stats, mac, n_tot)
    if n_max < 1:
        raise ValueError(f"n_max must be >= 1, got {n_max}")
    if n_max >= n_tot:
        raise ValueError(f"n_max ({n_max}) must be at most n_tot - 1 ({n_tot - 1})")
    if mac.session_time > _SESSION_CONTACT_WARN_RATIO * stats.contact_time:
        warnings.warn(
            f"session_time ({mac.session_time:g}s) is not small next to the "
            f"contact time ({stats.contact_time:g}s); the one-event-per-session "
            "assumption may be inaccurate",
            stacklevel=2,
        )

    arrival, departure, up, down = _birth_death_rows(stats, mac.session_time, n_tot, n_max)
    size = n_max + 1
    transition = np.zeros((size, size))
    for n in range(size):
        if n < n_max:
            transition[n, n + 1] = up[n]
        if n > 0:
            transition[n, n - 1] = down[n]
        transition[n, n] = 1.0 - transition[n].sum()
    return NeighborChain(
        transition=transition, arrival_rates=arrival, departure_rates=departure
    )


def steady_state(chain: NeighborChain) -> NeighborDistribution:
    """Stationary distribution of the chain.

    Solved directly from the birth-death balance equations
    ``v[n] * P(n+1|n) = v[n+1] * P(n|n+1)``.
    """
    n_max = chain.n_max
    weights = np.empty(n_max + 1)
    weights[0] = 1.0
    for n in range(n_max):
        up = chain.up(n)
        down = chain.down(n + 1)
        if up > 0.0 and down <= 0.0:
            raise ValueError(
                f"balance equations are singular: P({n}|{n + 1}) = 0 while "
                f"P({n + 1}|{n}) > 0"
            )
        weights[n + 1] = weights[n] * (up / down) if down > 0.0 else 0.0
    total = weights.sum()
    if not math.isfinite(total) or total <= 0.0:
        raise ValueError("balance equations did not yield a normalizable solution")
    return NeighborDistribution(probabilities=weights / total)


def default_n_max(
    stats: MobilityStats, mac: MacParams, n_tot: int, tail_tol: float = 1e-6
) -> int:
    """Smallest neighbor cap whose excess tail mass is below ``tail_tol``.

    A pre-solve of the chain capped at ``n_tot - 1`` provides the tail; the
    result is clamped to [1, n_tot - 1].
    """
    if n_tot < 2:
        raise ValueError(f"n_tot must be >= 2, got {n_tot}")
    cap = n_tot - 1
    _, _, up, down = _birth_death_rows(stats, mac.session_time, n_tot, cap)
    weights = np.empty(cap + 1)
    weights[0] = 1.0
    for n in range(cap):
        weights[n + 1] = weights[n] * (up[n] / down[n + 1]) if down[n + 1] > 0.0 else 0.0
    v = weights / weights.sum()
    tail = np.concatenate([np.cumsum(v[::-1])[-2::-1], [0.0]])  # tail[n] = sum_{j>n} v[j]
    candidates = np.nonzero(tail < tail_tol)[0]
    n_max = int(candidates[0]) if candidates.size else cap
    return min(max(n_max, 1), cap)
