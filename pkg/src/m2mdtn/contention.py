"""Contention model for epidemic copy spreading under session MAC.

Builds, per copy count ``i``, the probability that a session spreads the
tagged message to ``i' - i`` new relays, the probability that some carrier
delivers it, and the expected time the network dwells at ``i`` copies before
either event.  The dwell time comes from a joint walk over a carrier's
neighbor count and its per-session transmission attempts: the expected time
to escape the set of states ``{n, ..., n_max}`` ("the n-system") satisfies a
one-step recursion terminated at the cap.

Formula outputs are clamped to [0, 1]; the tables count how many entries
needed clamping so out-of-regime configurations are visible rather than
silently propagated.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .neighbors import MacParams, NeighborChain, NeighborDistribution

_DEGENERATE_TOL = 1e-15


class _ClampCounter:
    """Clamp values into [0, 1], counting how often clamping fired."""

    __slots__ = ("count",)

    def __init__(self) -> None:
        self.count = 0

    def __call__(self, value: float) -> float:
        if 0.0 <= value <= 1.0:
            return value
        self.count += 1
        return min(max(value, 0.0), 1.0)


def _clamp01(value: float) -> float:
    return min(max(value, 0.0), 1.0)


@dataclass(frozen=True)
class ContentionTables:
    """Dense per-configuration contention tables.

    Copy-count indexed arrays use the copy count itself as index (row 0 is
    unused); neighbor-indexed axes run over 0..n_max.
    """

    n_tot: int
    alpha: int
    transmit: np.ndarray       # (n_tot,): per-session transmit probability at i copies
    spread: np.ndarray         # (n_tot, n_tot + alpha): P(i -> i') per session
    deliver: np.ndarray        # (n_tot,): per-session delivery probability
    dwell: np.ndarray          # (n_tot,): expected dwell at i copies, seconds
    no_spread: np.ndarray      # (n_tot, n_max+1): no-transmission probability
    stay_prob: np.ndarray      # (n_tot, n_max+1): same neighbors, no transmission
    up_prob: np.ndarray        # (n_tot, n_max+1): climb given a state change
    return_prob: np.ndarray    # (n_tot, n_max+1): [i, n] = drop back to n from the (n+1)-system
    state_time: np.ndarray     # (n_tot, n_max+1): expected dwell in one neighbor state
    system_time: np.ndarray    # (n_tot, n_max+1): expected dwell in the n-system
    clamp_events: int

    @property
    def n_max(self) -> int:
        return self.no_spread.shape[1] - 1

    def copy_counts(self) -> range:
        return range(1, self.n_tot)


def transmit_probability(
    copies: int,
    n_tot: int,
    pair_budget: int,
    buffer_occupancy: float,
    clamp=_clamp01,
) -> float:
    """Per-session probability that a carrier pushes the tagged message to one
    given communicating neighbor.

    The first factor is the chance the neighbor still lacks the message, the
    second the chance the message wins one of the session's budget slots in
    the carrier's buffer.  Clamped to [0, 1]: the budget factor exceeds one at
    very small loads.
    """
    if not 1 <= copies <= n_tot:
        raise ValueError(f"copies must be in [1, {n_tot}], got {copies}")
    if buffer_occupancy <= 0.0:
        raise ValueError(f"buffer_occupancy must be > 0, got {buffer_occupancy}")
    fresh = 1.0 - (copies - 1) / (n_tot - 1)
    return clamp(fresh * (pair_budget / buffer_occupancy))


def copy_increase_probability(
    copies: int,
    next_copies: int,
    dist: NeighborDistribution,
    mac: MacParams,
    transmit_prob: float,
    binomial: bool = False,
    clamp=_clamp01,
) -> float:
    """Per-session probability that the copy count rises from ``copies`` to
    ``next_copies``.

    At most one of the carriers transmits in a session, hence the leading
    factor ``copies`` and zero probability for jumps of ``alpha - 1`` cells
    or more.  The sum runs over the carrier's possible neighbor counts; the
    new-copy pattern term carries no subset-choice factor by default
    (``binomial=True`` adds ``C(j, k)`` for sensitivity comparisons).
    """
    if next_copies <= copies:
        raise ValueError(
            f"next_copies ({next_copies}) must exceed copies ({copies})"
        )
    if copies < 1:
        raise ValueError(f"copies must be >= 1, got {copies}")
    gained = next_copies - copies
    if gained >= mac.alpha:
        return 0.0
    total = 0.0
    for j in range(gained, mac.alpha):
        v_j = dist[j]
        if v_j == 0.0:
            continue
        term = (
            v_j
            * min(mac.alpha / (j + 1), 1.0)
            * transmit_prob ** gained
            * (1.0 - transmit_prob) ** (j - gained)
        )
        if binomial:
            term *= math.comb(j, gained)
        total += term
    return clamp(copies * total)


def delivery_probability(
    copies: int,
    dist: NeighborDistribution,
    mac: MacParams,
    n_tot: int,
    clamp=_clamp01,
) -> float:
    """Per-session probability that some carrier meets the destination and
    both are admitted to the session.

    The value does not depend on the copy count: the destination is one of
    the carrier's ``j`` neighbors with probability ``j / (n_tot - 1)`` and no
    carrier-count factor appears.
    """
    if copies < 1:
        raise ValueError(f"copies must be >= 1, got {copies}")
    if n_tot < 2:
        raise ValueError(f"n_tot must be >= 2, got {n_tot}")
    total = 0.0
    for j in range(1, dist.probabilities.size):
        p_comm = min(mac.alpha / (j + 1), 1.0)
        total += dist[j] * (j / (n_tot - 1)) * p_comm * p_comm
    return clamp(total)


def no_spread_probability(
    n: int, transmit_prob: float, alpha: int, clamp=_clamp01
) -> float:
    """Probability a carrier with ``n`` session neighbors transmits to nobody.

    With at most ``alpha - 1`` neighbors everyone communicates; beyond that
    the carrier itself is admitted only with probability ``alpha / n``.
    """
    if n < 0:
        raise ValueError(f"neighbor count must be >= 0, got {n}")
    if n == 0:
        return 1.0
    miss_all = (1.0 - transmit_prob) ** n
    if n <= alpha - 1:
        return clamp(miss_all)
    admit = alpha / n
    return clamp(1.0 - admit + admit * miss_all)


def state_dwell_time(
    n: int, chain: NeighborChain, mac: MacParams, transmit_prob: float
) -> float:
    """Expected time spent at exactly ``n`` neighbors with no transmission.

    The number of sessions is geometric with success probability
    ``1 - P(n|n) * p_no_spread(n)``.
    """
    p_stay = chain.stay(n) * no_spread_probability(n, transmit_prob, mac.alpha)
    if p_stay >= 1.0 - _DEGENERATE_TOL:
        raise ValueError(
            f"state {n} is absorbing: P(stay) * P(no spread) = {p_stay}"
        )
    return mac.session_time / (1.0 - p_stay)


def _dwell_arrays(
    chain: NeighborChain,
    dist: NeighborDistribution,
    mac: MacParams,
    transmit_prob: float,
    clamp: _ClampCounter | None = None,
) -> tuple[np.ndarray, ...]:
    """All dwell-recursion intermediates for one transmit probability.

    Returns (no_spread, stay, state_time, up, ret, system_time), each indexed
    by neighbor count 0..n_max.
    """
    if clamp is None:
        clamp = _ClampCounter()
    n_max = chain.n_max
    if dist.n_max != n_max:
        raise ValueError(
            f"distribution cap ({dist.n_max}) does not match chain cap ({n_max})"
        )
    ns = np.empty(n_max + 1)
    stay = np.empty(n_max + 1)
    t_state = np.empty(n_max + 1)
    up = np.zeros(n_max + 1)
    ret = np.zeros(n_max + 1)
    t_system = np.empty(n_max + 1)

    for n in range(n_max + 1):
        ns[n] = no_spread_probability(n, transmit_prob, mac.alpha, clamp=clamp)
        stay[n] = clamp(chain.stay(n) * ns[n])
        if stay[n] >= 1.0 - _DEGENERATE_TOL:
            raise ValueError(f"state {n} is absorbing under the joint walk")
        t_state[n] = mac.session_time / (1.0 - stay[n])

    v = dist.probabilities
    for n in range(n_max):
        up[n] = clamp(ns[n] * chain.up(n) / (1.0 - stay[n]))
        # Probability that leaving the (n+1)-system means dropping back to n
        # rather than a transmission somewhere inside it; the occupancy within
        # the system is taken as stationary.
        exit_down = v[n + 1] * chain.down(n + 1)
        exit_spread = float(np.dot(v[n + 1:], 1.0 - ns[n + 1:]))
        denom = exit_down + exit_spread
        ret[n] = clamp(exit_down / denom) if denom > 0.0 else 0.0

    t_system[n_max] = t_state[n_max]
    for n in range(n_max - 1, -1, -1):
        denom = 1.0 - up[n] * ret[n]
        if denom <= 0.0:
            raise ValueError(
                f"dwell recursion is degenerate at state {n}: "
                f"1 - p_up * p_return = {denom}"
            )
        t_system[n] = (t_state[n] + up[n] * t_system[n + 1]) / denom
    return ns, stay, t_state, up, ret, t_system


def system_dwell_time(
    n: int,
    chain: NeighborChain,
    dist: NeighborDistribution,
    mac: MacParams,
    transmit_prob: float,
) -> float:
    """Expected time to escape the n-system (neighbor states n..n_max) without
    counting re-entries from below, evaluated top-down from the cap."""
    if not 0 <= n <= chain.n_max:
        raise ValueError(f"n must be in [0, {chain.n_max}], got {n}")
    return float(_dwell_arrays(chain, dist, mac, transmit_prob)[5][n])


def expected_state_duration(
    copies: int,
    chain: NeighborChain,
    dist: NeighborDistribution,
    mac: MacParams,
    transmit_prob: float,
) -> float:
    """Expected time at ``copies`` copies before the next spread or delivery.

    The single-carrier escape time from zero neighbors is divided by the
    number of carriers: per-state dwell times are short enough to treat as
    exponential, so racing ``i`` independent carriers divides the mean.
    """
    if copies < 1:
        raise ValueError(f"copies must be >= 1, got {copies}")
    return system_dwell_time(0, chain, dist, mac, transmit_prob) / copies


def build_contention_tables(
    dist: NeighborDistribution,
    chain: NeighborChain,
    mac: MacParams,
    n_tot: int,
    buffer_occupancy: float,
    binomial: bool = False,
) -> ContentionTables:
    """Precompute the contention tables for every copy count.

    The delay solver queries these repeatedly; everything is evaluated once
    per configuration into dense arrays.
    """
    if n_tot < 2:
        raise ValueError(f"n_tot must be >= 2, got {n_tot}")
    n_max = chain.n_max
    clamp = _ClampCounter()

    transmit = np.zeros(n_tot)
    spread = np.zeros((n_tot, n_tot + mac.alpha))
    deliver = np.zeros(n_tot)
    dwell = np.zeros(n_tot)
    shape = (n_tot, n_max + 1)
    no_spread = np.zeros(shape)
    stay_prob = np.zeros(shape)
    up_prob = np.zeros(shape)
    return_prob = np.zeros(shape)
    state_time = np.zeros(shape)
    system_time = np.zeros(shape)

    for i in range(1, n_tot):
        p_tx = transmit_probability(
            i, n_tot, mac.pair_budget, buffer_occupancy, clamp=clamp
        )
        transmit[i] = p_tx
        deliver[i] = delivery_probability(i, dist, mac, n_tot, clamp=clamp)
        for nxt in range(i + 1, i + mac.alpha):
            spread[i, nxt] = copy_increase_probability(
                i, nxt, dist, mac, p_tx, binomial=binomial, clamp=clamp
            )
        ns, stay, t_state, up, ret, t_system = _dwell_arrays(
            chain, dist, mac, p_tx, clamp
        )
        no_spread[i] = ns
        stay_prob[i] = stay
        up_prob[i] = up
        return_prob[i] = ret
        state_time[i] = t_state
        system_time[i] = t_system
        dwell[i] = t_system[0] / i

    return ContentionTables(
        n_tot=n_tot,
        alpha=mac.alpha,
        transmit=transmit,
        spread=spread,
        deliver=deliver,
        dwell=dwell,
        no_spread=no_spread,
        stay_prob=stay_prob,
        up_prob=up_prob,
        return_prob=return_prob,
        state_time=state_time,
        system_time=system_time,
        clamp_events=clamp.count,
    )
