"""Target-area world model: grid, node placement, mobility, sensing, files.

The target area is rasterized into square cells; sensing drones cover the
cells whose centers fall inside a regular polygon (given apothem and side
count) around their ground projection. Drones follow a random-waypoint walk
at fixed altitude; the ground vehicle sits still at the area center.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .config import ScenarioConfig


class ConfigurationError(ValueError):
    pass


class NodeKind(enum.Enum):
    SENSING_UAV = "sensing_uav"
    COOP_UAV = "coop_uav"
    GROUND_VEHICLE = "ground_vehicle"


@dataclass
class GridMap:
    """Rasterized target area.

    Cells are indexed row-major: ``cell_id = iy * nx + ix``. Centers are the
    geometric cell centers, so they always lie strictly inside the area.
    """

    nx: int
    ny: int
    cell_side: float
    origin: np.ndarray          # (2,) lower-left corner, meters
    extent: np.ndarray          # (2,) area size, meters
    cell_centers: np.ndarray = field(repr=False)  # (C, 2) meters

    @property
    def cell_count(self) -> int:
        return self.nx * self.ny

    @property
    def cell_area(self) -> float:
        return self.cell_side**2


@dataclass
class NodeState:
    """One network node; drones carry mobility and (for sensors) footprint data."""

    id: int
    kind: NodeKind
    position: np.ndarray                 # (3,) meters
    speed_mps: float = 0.0
    waypoint: np.ndarray | None = None   # (2,) meters, drones only
    apothem: float | None = None         # sensing drones only
    polygon_sides: int | None = None


@dataclass
class MapFile:
    """A map segment captured by one sensing drone in one slot."""

    owner_su: int
    size_bits: float
    coverage: np.ndarray     # cell ids, sorted
    slot: int


def build_grid(config: ScenarioConfig) -> GridMap:
    """Rasterize the target area into cell_side x cell_side cells."""
    ex, ey = config.area_extent_m
    side = config.cell_side_m
    nxf, nyf = ex / side, ey / side
    if abs(nxf - round(nxf)) > 1e-9 or abs(nyf - round(nyf)) > 1e-9:
        raise ConfigurationError(
            f"area extent {ex}x{ey} m is not divisible by cell side {side} m")
    nx, ny = int(round(nxf)), int(round(nyf))
    xs = (np.arange(nx) + 0.5) * side
    ys = (np.arange(ny) + 0.5) * side
    gx, gy = np.meshgrid(xs, ys)
    centers = np.column_stack([gx.ravel(), gy.ravel()])
    return GridMap(nx=nx, ny=ny, cell_side=side,
                   origin=np.zeros(2), extent=np.array([ex, ey]),
                   cell_centers=centers)


def make_nodes(config: ScenarioConfig, rng: np.random.Generator
               ) -> tuple[list[NodeState], list[NodeState], NodeState]:
    """Place sensing drones, caching drones, and the ground vehicle.

    Drones start uniformly inside the area at the configured altitude, each
    with a fresh uniform waypoint. The ground vehicle is pinned to the area
    center at ground level. Draw order is fixed for reproducibility.
    """
    extent = np.asarray(config.area_extent_m, dtype=float)
    alt = config.uav_altitude_m

    def drone(node_id: int, kind: NodeKind, **extra) -> NodeState:
        xy = rng.uniform(low=[0.0, 0.0], high=extent)
        wp = rng.uniform(low=[0.0, 0.0], high=extent)
        return NodeState(id=node_id, kind=kind,
                         position=np.array([xy[0], xy[1], alt]),
                         speed_mps=config.uav_speed_mps, waypoint=wp, **extra)

    sus = [drone(i, NodeKind.SENSING_UAV, apothem=config.apothem_m,
                 polygon_sides=config.polygon_sides)
           for i in range(config.su_count)]
    cus = [drone(config.su_count + j, NodeKind.COOP_UAV)
           for j in range(config.cu_count)]
    gv = NodeState(id=config.su_count + config.cu_count,
                   kind=NodeKind.GROUND_VEHICLE,
                   position=np.array([extent[0] / 2.0, extent[1] / 2.0, 0.0]))
    return sus, cus, gv


def polygon_normals(sides: int) -> np.ndarray:
    """Outward unit normals of the regular polygon, first one along +x."""
    angles = 2.0 * np.pi * np.arange(sides) / sides
    return np.column_stack([np.cos(angles), np.sin(angles)])


def polygon_vertices(center_xy: np.ndarray, apothem: float, sides: int) -> np.ndarray:
    """Vertices (counterclockwise); circumradius follows from the apothem."""
    r = apothem / math.cos(math.pi / sides)
    angles = 2.0 * np.pi * np.arange(sides) / sides + np.pi / sides
    return center_xy + r * np.column_stack([np.cos(angles), np.sin(angles)])


def sensing_footprint(su: NodeState, grid: GridMap) -> np.ndarray:
    """Cell ids whose centers lie inside the drone's sensing polygon.

    A center is inside iff its signed distance along every outward normal is
    at most the apothem; centers exactly on an edge count as covered.
    """
    if su.apothem is None or su.polygon_sides is None:
        raise ValueError(f"node {su.id} has no sensing geometry")
    if su.apothem <= 0 or su.polygon_sides < 3:
        raise ValueError(f"invalid sensing polygon (apothem {su.apothem}, "
                         f"sides {su.polygon_sides})")
    offsets = grid.cell_centers - su.position[:2]
    normals = polygon_normals(su.polygon_sides)
    # nanometer slack keeps exactly-on-edge centers inside despite trig noise
    inside = np.all(offsets @ normals.T <= su.apothem + 1e-9, axis=1)
    return np.flatnonzero(inside)


def step_mobility(nodes: list[NodeState], extent: np.ndarray,
                  rng: np.random.Generator, dt: float) -> list[NodeState]:
    """Advance every drone one slot of random-waypoint motion.

    Each drone moves toward its waypoint at its own speed; if it can reach it
    within this slot it stops there and draws a fresh uniform waypoint.
    Altitude is preserved and positions are clamped to the area. Ground
    nodes and zero-speed drones are untouched (no generator draws).
    """
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    extent = np.asarray(extent, dtype=float)
    for node in nodes:
        if node.kind is NodeKind.GROUND_VEHICLE or node.speed_mps * dt == 0.0:
            continue
        assert node.waypoint is not None
        delta = node.waypoint - node.position[:2]
        dist = float(np.hypot(delta[0], delta[1]))
        reach = node.speed_mps * dt
        if dist <= reach:
            node.position[:2] = node.waypoint
            node.waypoint = rng.uniform(low=[0.0, 0.0], high=extent)
        else:
            node.position[:2] += delta * (reach / dist)
        np.clip(node.position[:2], 0.0, extent, out=node.position[:2])
    return nodes


def sample_file_size(config: ScenarioConfig, rng: np.random.Generator,
                     coverage_cells: int) -> float:
    """File size in bits: per-cell content draw times number of covered cells.

    The per-cell draw is consumed from the generator even for an empty
    footprint, keeping slot randomness independent of drone geometry; an
    empty footprint yields size 0 (the drone is unschedulable that slot).
    """
    lo, hi = config.content_bits_per_cell
    if lo > hi:
        raise ValueError(f"content range [{lo}, {hi}] has lo > hi")
    per_cell = rng.uniform(lo, hi)
    return per_cell * coverage_cells


def make_map_file(config: ScenarioConfig, grid: GridMap, su: NodeState,
                  slot: int, rng: np.random.Generator) -> MapFile:
    """Capture one slot's map segment for a sensing drone."""
    coverage = sensing_footprint(su, grid)
    size = sample_file_size(config, rng, coverage.size)
    return MapFile(owner_su=su.id, size_bits=size, coverage=coverage, slot=slot)
