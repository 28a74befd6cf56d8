"""Venue/building geometry and 3D line-of-sight occlusion tests.

Buildings are axis-aligned boxes extending from the ground (z=0) up to
their height. A link is blocked only when the straight UAV-UE segment
enters the *open* interior of a box; grazing a face or edge exactly does
not block. All tests are pure functions on immutable inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import _kernels

# Penetration shallower than this counts as face-grazing, i.e. still LoS.
GRAZE_TOL = 1e-9


@dataclass(frozen=True)
class Position3:
    """A point in venue coordinates; z is altitude above ground (>= 0)."""

    x: float
    y: float
    z: float

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.x, self.y, self.z)):
            raise ValueError("position components must be finite")
        if self.z < 0:
            raise ValueError("altitude z must be >= 0")

    def distance_to(self, other: "Position3") -> float:
        return math.sqrt(
            (self.x - other.x) ** 2
            + (self.y - other.y) ** 2
            + (self.z - other.z) ** 2
        )

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.x, self.y, self.z)


@dataclass(frozen=True)
class Building:
    """Axis-aligned box obstacle; floors/rooms are metadata only."""

    x_min: float
    x_max: float
    y_min: float
    y_max: float
    height: float
    floors: int = 1
    rooms_x: int = 1
    rooms_y: int = 1

    def __post_init__(self):
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise ValueError("building footprint must have positive extent")
        if self.height <= 0:
            raise ValueError("building height must be > 0")

    def contains_interior(self, p: Position3, tol: float = GRAZE_TOL) -> bool:
        """True iff p lies strictly inside the box by more than tol."""
        return (
            self.x_min + tol < p.x < self.x_max - tol
            and self.y_min + tol < p.y < self.y_max - tol
            and tol < p.z < self.height - tol
        )


@dataclass(frozen=True)
class VenueSpec:
    """Rectangular venue footprint (W x D meters)."""

    width: float
    depth: float

    def __post_init__(self):
        if self.width <= 0 or self.depth <= 0:
            raise ValueError("venue dimensions must be > 0")

    @property
    def area(self) -> float:
        return self.width * self.depth


@dataclass(frozen=True)
class ActionZone:
    """Closed box of admissible UAV positions."""

    x_range: tuple[float, float]
    y_range: tuple[float, float]
    z_range: tuple[float, float]

    def __post_init__(self):
        for lo, hi in (self.x_range, self.y_range, self.z_range):
            if lo > hi:
                raise ValueError("zone intervals must be non-empty")
        if self.z_range[0] < 0:
            raise ValueError("zone floor must be >= 0")

    def contains(self, p: Position3) -> bool:
        return (
            self.x_range[0] <= p.x <= self.x_range[1]
            and self.y_range[0] <= p.y <= self.y_range[1]
            and self.z_range[0] <= p.z <= self.z_range[1]
        )


def segment_intersects_box(p0: Position3, p1: Position3, b: Building) -> bool:
    """True iff the closed segment p0-p1 enters the open interior of b.

    Slab method against the box shrunk by GRAZE_TOL on every face, so an
    exact face/edge tangency reports False.
    """
    return _kernels.backend.segment_intersects_box(
        p0.x, p0.y, p0.z, p1.x, p1.y, p1.z,
        b.x_min, b.x_max, b.y_min, b.y_max, b.height, GRAZE_TOL,
    )


def has_los(uav: Position3, ue: Position3, buildings: list[Building]) -> bool:
    """True iff no building blocks the straight UAV-UE segment."""
    return all(not segment_intersects_box(uav, ue, b) for b in buildings)


def count_los(
    uav: Position3, ues: list[Position3], buildings: list[Building]
) -> int:
    """Number of UEs with line of sight to the UAV (the reward's nLoS)."""
    if not ues:
        raise ValueError("ues must be non-empty")
    return sum(1 for ue in ues if has_los(uav, ue, buildings))


def clamp_to_zone(
    p: Position3,
    zone: ActionZone,
    buildings: list[Building],
    previous: Position3 | None = None,
) -> Position3:
    """Clamp p into the zone; reject moves that end inside a building.

    When the clamped point lies in a building interior the pre-move
    position `previous` is returned unchanged (the move is a no-op).
    """
    clamped = Position3(
        min(max(p.x, zone.x_range[0]), zone.x_range[1]),
        min(max(p.y, zone.y_range[0]), zone.y_range[1]),
        min(max(p.z, zone.z_range[0]), zone.z_range[1]),
    )
    if any(b.contains_interior(clamped) for b in buildings):
        if previous is None:
            raise ValueError("move lands inside a building and no fallback given")
        return previous
    return clamped
