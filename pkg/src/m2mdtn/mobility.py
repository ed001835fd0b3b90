"""Closed-form random-direction mobility statistics on a square-tiled terrain.

Everything here is a pure function of the walker parameters and the tile
geometry: expected tile coverage per epoch, hitting/meeting/intermeeting
times, and contact times.  Communication range is one tile, so "meeting"
means co-residence in a tile and contact times are tile-transit times.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

# Mean relative speed between two independent random-direction walkers,
# expressed in units of the mean scalar speed.
RELATIVE_SPEED_FACTOR = 1.27

_SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class MobilityParams:
    """Random-direction walker parameters.

    Speeds are drawn uniformly from ``[min_speed, max_speed]``, headings
    uniformly from ``[0, 2*pi)``, epoch durations from an exponential law
    with mean ``mean_epoch_length / mean_speed`` (independent of the epoch's
    speed draw), and halts uniformly from ``[0, 2 * mean_halt]``.

    ``min_speed == max_speed`` is rejected: the contact-time closed form is
    singular there.
    """

    min_speed: float
    max_speed: float
    mean_epoch_length: float
    mean_halt: float = 0.0

    def __post_init__(self) -> None:
        if not 0.0 < self.min_speed < self.max_speed:
            raise ValueError(
                f"speed range must satisfy 0 < min < max, got "
                f"[{self.min_speed}, {self.max_speed}]"
            )
        if self.mean_epoch_length <= 0.0:
            raise ValueError(f"mean_epoch_length must be > 0, got {self.mean_epoch_length}")
        if self.mean_halt < 0.0:
            raise ValueError(f"mean_halt must be >= 0, got {self.mean_halt}")

    @property
    def mean_speed(self) -> float:
        return 0.5 * (self.min_speed + self.max_speed)

    @property
    def mean_epoch_duration(self) -> float:
        return self.mean_epoch_length / self.mean_speed


@dataclass(frozen=True)
class TerrainParams:
    """Square terrain of side ``side`` tiled by square cells of side ``cell_side``."""

    side: float
    cell_side: float

    def __post_init__(self) -> None:
        if self.cell_side <= 0.0:
            raise ValueError(f"cell_side must be > 0, got {self.cell_side}")
        if self.side <= 0.0:
            raise ValueError(f"side must be > 0, got {self.side}")
        ratio = self.side / self.cell_side
        if abs(ratio - round(ratio)) > 1e-9:
            raise ValueError(
                f"side ({self.side}) must be an integer multiple of "
                f"cell_side ({self.cell_side})"
            )

    @property
    def area(self) -> float:
        return self.side * self.side

    @property
    def cells_per_side(self) -> int:
        return round(self.side / self.cell_side)

    @property
    def n_cells(self) -> int:
        return self.cells_per_side ** 2


@dataclass(frozen=True)
class ContactTerms:
    """Intermediate quantities of the stationary contact-time closed form.

    ``adjacent_wall`` and ``opposite_wall`` are each an exit-time expectation
    already weighted by the probability of leaving through that wall;
    ``speed_norm`` is the normalizing constant of the entry speed/angle
    density.
    """

    speed_norm: float
    adjacent_wall: float
    opposite_wall: float


@dataclass(frozen=True)
class MobilityStats:
    """Derived mobility statistics for one (walker, terrain) configuration."""

    cells_per_epoch: float
    epoch_area: float
    hitting_time: float
    meeting_time: float
    intermeeting_time: float
    moving_prob: float
    contact_static: float
    contact_moving: float
    contact_time: float
    speed_norm: float
    adjacent_wall: float
    opposite_wall: float


def _cell_count(mean_epoch_length: float, cell_side: float) -> float:
    # Internal form without the > 0 requirement on the epoch length, so the
    # degenerate limit (no displacement -> 2 cells) stays probe-able.
    if cell_side <= 0.0:
        raise ValueError(f"cell_side must be > 0, got {cell_side}")
    if mean_epoch_length < 0.0:
        raise ValueError(f"mean_epoch_length must be >= 0, got {mean_epoch_length}")
    return 2.0 + 4.0 * mean_epoch_length / (math.pi * cell_side)


def mean_epoch_cell_count(mob: MobilityParams, terrain: TerrainParams) -> float:
    """Expected number of distinct cells a walker covers in one epoch.

    This is the closed-form upper bound ``2 + 4*L/(pi*a)`` obtained by
    relaxing the ceiling in the wall-crossing counts; the sampled mean lies
    within one cell below it.
    """
    return _cell_count(mob.mean_epoch_length, terrain.cell_side)


def mean_epoch_area(mob: MobilityParams, terrain: TerrainParams) -> float:
    """Expected area covered in one epoch: cell count times cell area."""
    a = terrain.cell_side
    return _cell_count(mob.mean_epoch_length, a) * a * a


def hitting_time(mob: MobilityParams, terrain: TerrainParams) -> float:
    """Expected time for a walker started from stationarity to reach a random
    static target cell: terrain area over per-epoch coverage area, times the
    mean epoch-plus-halt duration."""
    area_per_epoch = mean_epoch_area(mob, terrain)
    if area_per_epoch <= 0.0:
        raise ValueError("per-epoch coverage area must be positive")
    return terrain.area / area_per_epoch * (mob.mean_epoch_duration + mob.mean_halt)


def moving_probability(mob: MobilityParams) -> float:
    """Long-run fraction of time a walker spends moving (epoch over epoch+halt)."""
    t_move = mob.mean_epoch_duration
    return t_move / (t_move + mob.mean_halt)


def meeting_time(mob: MobilityParams, terrain: TerrainParams) -> float:
    """Expected time until two independent walkers share a cell.

    Scales the hitting time by the effective relative speed: a factor of
    ``RELATIVE_SPEED_FACTOR`` while both walkers move, 2 while one is halted
    (either walker may be the halted one).  The intermeeting time is
    approximately exponential with this mean.
    """
    p_m = moving_probability(mob)
    denom = p_m * RELATIVE_SPEED_FACTOR + 2.0 * (1.0 - p_m)
    return hitting_time(mob, terrain) / denom


def intermeeting_time(mob: MobilityParams, terrain: TerrainParams) -> float:
    """Mean intermeeting time; equals the meeting time."""
    return meeting_time(mob, terrain)


def contact_time_terms(mob: MobilityParams, terrain: TerrainParams) -> ContactTerms:
    """Wall-exit terms of the stationary contact time.

    A moving node enters the cell of a halted node through one wall, with
    uniform entry point, uniform entry angle, and uniform speed; it exits
    through one of the two adjacent walls or the opposite wall.
    """
    a = terrain.cell_side
    norm = 1.0 / (a * math.pi * (mob.max_speed - mob.min_speed))
    speed_log = math.log(mob.max_speed / mob.min_speed)
    adjacent = 0.5 * norm * a * a * speed_log * (math.log(_SQRT2 + 1.0) + (_SQRT2 - 1.0))
    opposite = 2.0 * norm * a * a * speed_log * (math.log(_SQRT2 + 1.0) + (1.0 - _SQRT2))
    return ContactTerms(speed_norm=norm, adjacent_wall=adjacent, opposite_wall=opposite)


def contact_time_stationary(mob: MobilityParams, terrain: TerrainParams) -> float:
    """Expected contact time when one of the two nodes is halted."""
    terms = contact_time_terms(mob, terrain)
    return 2.0 * terms.adjacent_wall + terms.opposite_wall


def contact_time_moving(mob: MobilityParams, terrain: TerrainParams) -> float:
    """Expected contact time when both nodes move.

    The single-mover transit time is treated as exponential; both-moving
    contact is the minimum of two such times, halving the mean.
    """
    return 0.5 * contact_time_stationary(mob, terrain)


def contact_time(mob: MobilityParams, terrain: TerrainParams) -> float:
    """Expected contact time: mixture of the one-halted and both-moving cases,
    weighted by the probability that the second node is moving."""
    p_m = moving_probability(mob)
    t_static = contact_time_stationary(mob, terrain)
    return (1.0 - p_m) * t_static + p_m * 0.5 * t_static


def compute_mobility_stats(mob: MobilityParams, terrain: TerrainParams) -> MobilityStats:
    """Evaluate all mobility statistics for one configuration."""
    terms = contact_time_terms(mob, terrain)
    t_static = 2.0 * terms.adjacent_wall + terms.opposite_wall
    p_m = moving_probability(mob)
    t_meet = meeting_time(mob, terrain)
    return MobilityStats(
        cells_per_epoch=mean_epoch_cell_count(mob, terrain),
        epoch_area=mean_epoch_area(mob, terrain),
        hitting_time=hitting_time(mob, terrain),
        meeting_time=t_meet,
        intermeeting_time=t_meet,
        moving_prob=p_m,
        contact_static=t_static,
        contact_moving=0.5 * t_static,
        contact_time=(1.0 - p_m) * t_static + p_m * 0.5 * t_static,
        speed_norm=terms.speed_norm,
        adjacent_wall=terms.adjacent_wall,
        opposite_wall=terms.opposite_wall,
    )
