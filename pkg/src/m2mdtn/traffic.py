"""Per-node traffic accounting: arrival rates, session/contact success
probabilities, expected waiting time, and Little's-law buffer occupancy.

Traffic is symmetric (every message gets a uniformly random destination) and
epidemic relaying floods copies, so the relay arrival rate at a node is
approximated by its stability lower bound: everyone else's generation rate.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .mobility import MobilityStats
from .neighbors import MacParams, NeighborDistribution


@dataclass(frozen=True)
class TrafficParams:
    """Message generation: ``gen_rate`` messages/s per node, ``n_tot`` nodes."""

    gen_rate: float
    n_tot: int

    def __post_init__(self) -> None:
        if self.gen_rate <= 0.0:
            raise ValueError(f"gen_rate must be > 0, got {self.gen_rate}")
        if self.n_tot < 2:
            raise ValueError(f"n_tot must be >= 2, got {self.n_tot}")


@dataclass(frozen=True)
class TrafficStats:
    """Derived traffic quantities for one configuration."""

    arrival_rate: float          # generated + relayed, per node
    relay_rate: float
    session_success: float       # per-session success with the destination
    contact_success: float       # per-contact success with the destination
    waiting_time: float          # expected buffer waiting time, seconds
    buffer_occupancy: float      # expected messages buffered per node
    comm_probs: np.ndarray       # per-session communication probability by neighbor count


def relay_arrival_rate(traffic: TrafficParams) -> float:
    """Stability lower bound on the relay arrival rate at one node."""
    return traffic.gen_rate * (traffic.n_tot - 1)


def total_arrival_rate(traffic: TrafficParams) -> float:
    """Total per-node message arrival rate: own generation plus relays."""
    return traffic.gen_rate + relay_arrival_rate(traffic)


def communication_probability(j: int, mac: MacParams) -> float:
    """Probability a tagged node is admitted to its cell's session when the
    cell holds the node plus ``j`` neighbors."""
    if j < 0:
        raise ValueError(f"neighbor count must be >= 0, got {j}")
    return min(mac.alpha / (j + 1), 1.0)


def session_success_probability(dist: NeighborDistribution, mac: MacParams) -> float:
    """Probability of exchanging with the destination within one session,
    given the destination is currently a neighbor.

    Conditions the neighbor distribution on having at least one neighbor;
    both endpoints must be admitted to the session independently.
    """
    v = dist.probabilities
    mass = float(v[1:].sum())
    if mass <= 0.0:
        raise ValueError("degenerate neighbor distribution: never any neighbors")
    total = 0.0
    for j in range(1, v.size):
        p_comm = communication_probability(j, mac)
        total += float(v[j]) / mass * p_comm * p_comm
    return total


def contact_success_probability(
    session_success: float, stats: MobilityStats, mac: MacParams
) -> float:
    """Probability of exchanging with the destination during one contact.

    A contact spans ``contact_time / session_time`` sessions on average; the
    exponent is used as a real number, not rounded.
    """
    if not 0.0 <= session_success <= 1.0:
        raise ValueError(f"session_success must be in [0, 1], got {session_success}")
    sessions_per_contact = stats.contact_time / mac.session_time
    if sessions_per_contact < 1.0:
        warnings.warn(
            f"contact time ({stats.contact_time:g}s) is shorter than one session "
            f"({mac.session_time:g}s); per-contact success may fall below the "
            "per-session value",
            stacklevel=2,
        )
    return 1.0 - (1.0 - session_success) ** sessions_per_contact


def expected_waiting_time(stats: MobilityStats, contact_success: float) -> float:
    """Expected time a message waits in a node's buffer until that node
    successfully communicates with the message's destination.

    Meetings with the destination recur every intermeeting time, and the
    number of meetings needed is geometric with the per-contact success.
    """
    if contact_success <= 0.0:
        raise ValueError(f"contact_success must be > 0, got {contact_success}")
    if contact_success > 1.0:
        raise ValueError(f"contact_success must be <= 1, got {contact_success}")
    return stats.intermeeting_time / contact_success


def little_law_buffer(arrival_rate: float, waiting_time: float) -> float:
    """Little's law: mean buffered messages from arrival rate and mean wait."""
    if arrival_rate < 0.0 or waiting_time < 0.0:
        raise ValueError("arrival_rate and waiting_time must be nonnegative")
    return arrival_rate * waiting_time


def expected_buffer_occupancy(traffic: TrafficParams, waiting_time: float) -> float:
    """Expected number of messages buffered at one node."""
    return little_law_buffer(total_arrival_rate(traffic), waiting_time)


def compute_traffic_stats(
    dist: NeighborDistribution,
    mac: MacParams,
    stats: MobilityStats,
    traffic: TrafficParams,
) -> TrafficStats:
    """Evaluate the full traffic chain for one configuration."""
    p_session = session_success_probability(dist, mac)
    p_contact = contact_success_probability(p_session, stats, mac)
    wait = expected_waiting_time(stats, p_contact)
    rate = total_arrival_rate(traffic)
    comm = np.array(
        [communication_probability(j, mac) for j in range(dist.probabilities.size)]
    )
    return TrafficStats(
        arrival_rate=rate,
        relay_rate=relay_arrival_rate(traffic),
        session_success=p_session,
        contact_success=p_contact,
        waiting_time=wait,
        buffer_occupancy=little_law_buffer(rate, wait),
        comm_probs=comm,
    )
