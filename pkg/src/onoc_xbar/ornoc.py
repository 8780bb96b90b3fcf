"""Two-layer ring crossbar: ring choice, wavelength chains and per-pair paths.

Each layer carries a serpentine ring through every core interface, served in
both directions (C and CC) by separate waveguides. Layer 2's ring is the
transpose of layer 1's, so it runs column by column.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from onoc_xbar.errors import SelfCommunication
from onoc_xbar.geometry import (
    GridArchitecture,
    PhotonicLayout,
    offset_polygon,
    ring_distance_units,
    ring_length_units,
    serpentine_index,
    serpentine_polygon,
)
from onoc_xbar.loss_model import PathCharacteristics

DIRECTIONS = ("C", "CC")
DEFAULT_MAX_WAVELENGTHS = 64


@dataclass(frozen=True)
class RingChoice:
    layer: int
    direction: str
    arc_units: int


@dataclass
class RingAssignment:
    """Chosen (layer, direction) for every ordered core pair; arcs in units of pitch."""

    grid: GridArchitecture
    table: dict

    def __getitem__(self, pair) -> RingChoice:
        src, dst = pair
        if src == dst:
            raise SelfCommunication(f"core {src} cannot send to itself")
        return self.table[pair]

    def arc_mm(self, src: int, dst: int) -> float:
        return self[src, dst].arc_units * self.grid.pitch_mm


def assign_rings(grid: GridArchitecture) -> RingAssignment:
    """Pick the shortest of the four rings for each unordered pair.

    Ties prefer layer 1 (no optical vias), then direction C. The reverse
    communication uses the same layer in the opposite direction, which has the
    same arc length.
    """
    n = grid.n
    table = {}
    for a in range(1, grid.cores + 1):
        for b in range(a + 1, grid.cores + 1):
            best = None
            for layer in (1, 2):
                for direction in DIRECTIONS:
                    dist = ring_distance_units(n, a, b, layer, direction)
                    if best is None or dist < best.arc_units:
                        best = RingChoice(layer, direction, dist)
            table[a, b] = best
            table[b, a] = RingChoice(best.layer, "CC" if best.direction == "C" else "C", best.arc_units)
    return RingAssignment(grid, table)


@dataclass(frozen=True)
class ChannelSlot:
    layer: int
    direction: str
    waveguide: int
    wavelength: int


@dataclass
class WavelengthAssignment:
    grid: GridArchitecture
    max_wavelengths: int
    slots: dict
    # (layer, direction) -> {"wavelengths": distinct indices, "waveguides": count}
    ring_totals: dict = field(default_factory=dict)

    @property
    def total_waveguides(self) -> int:
        return sum(v["waveguides"] for v in self.ring_totals.values())

    @property
    def distinct_wavelengths(self) -> int:
        return max((v["wavelengths"] for v in self.ring_totals.values()), default=0)


def _chain_pass(comms_from, remaining_out, length, start):
    """One greedy chain from ``start``: longest fitting arc first, ties to the lowest destination."""
    chain = []
    room = length
    cur = start
    while True:
        best = None
        for dst, dist in comms_from[cur]:
            if (cur, dst) in remaining_out and dist <= room:
                if best is None or dist > best[1] or (dist == best[1] and dst < best[0]):
                    best = (dst, dist)
        if best is None:
            break
        remaining_out.discard((cur, best[0]))
        chain.append((cur, best[0]))
        room -= best[1]
        cur = best[0]
        if cur == start:
            break
    return chain


def assign_wavelengths(
    grid: GridArchitecture, rings: RingAssignment, max_wavelengths: int = DEFAULT_MAX_WAVELENGTHS
) -> WavelengthAssignment:
    """Greedy wavelength chains on each C ring, mirrored onto the CC ring.

    Chains start from each core in ascending id order and are rebuilt pass by
    pass until every communication of the ring has a wavelength. Every chain
    gets a fresh wavelength; a full waveguide opens a new one that reuses the
    wavelength indices from zero.
    """
    if max_wavelengths < 1:
        raise ValueError("max_wavelengths must be at least 1")
    n = grid.n
    length = ring_length_units(n)
    slots = {}
    totals = {}
    for layer in (1, 2):
        comms_from = {c: [] for c in range(1, grid.cores + 1)}
        remaining = set()
        for (src, dst), choice in sorted(rings.table.items()):
            if choice.layer == layer and choice.direction == "C":
                comms_from[src].append((dst, choice.arc_units))
                remaining.add((src, dst))
        chains = 0
        while remaining:
            for start in range(1, grid.cores + 1):
                if not any((start, d) in remaining for d, _ in comms_from[start]):
                    continue
                chain = _chain_pass(comms_from, remaining, length, start)
                waveguide, wavelength = divmod(chains, max_wavelengths)
                for src, dst in chain:
                    slots[src, dst] = ChannelSlot(layer, "C", waveguide, wavelength)
                    slots[dst, src] = ChannelSlot(layer, "CC", waveguide, wavelength)
                chains += 1
        waveguides = -(-chains // max_wavelengths)
        for direction in DIRECTIONS:
            totals[layer, direction] = {
                "wavelengths": min(chains, max_wavelengths),
                "waveguides": waveguides,
            }
    return WavelengthAssignment(grid, max_wavelengths, slots, totals)


def arc_interval(grid: GridArchitecture, src: int, dst: int, choice: RingChoice) -> tuple[int, int]:
    """Occupied stretch of the ring as (start, length) in C-ring coordinates."""
    length = ring_length_units(grid.n)
    if choice.direction == "C":
        start = serpentine_index(grid.n, src, choice.layer)
    else:
        start = serpentine_index(grid.n, dst, choice.layer)
    return start % length, choice.arc_units


def ornoc_path(grid: GridArchitecture, rings: RingAssignment, src: int, dst: int) -> PathCharacteristics:
    """One injection, pass-through along the ring and a single same-layer drop.

    Layer-2 paths go through two vertical couplers, one up and one down.
    """
    choice = rings[src, dst]
    return PathCharacteristics(
        length_cm=choice.arc_units * grid.pitch_mm / 10.0,
        n_crossing=0,
        n_drop1=1,
        n_drop2=0,
        n_coupler=2 if choice.layer == 2 else 0,
    )


def ornoc_resources(grid: GridArchitecture, assignment: WavelengthAssignment) -> dict:
    channels = (grid.cores - 1) * grid.cores
    return {
        "lasers": channels,
        "photodetectors": channels,
        "receiver_mrs": channels,
        "mr_count": channels,
        "wavelengths": assignment.distinct_wavelengths,
        "waveguides": assignment.total_waveguides,
        "rings": {f"L{layer}-{d}": dict(v) for (layer, d), v in sorted(assignment.ring_totals.items())},
    }


class OrnocML:
    """The two-layer ring crossbar on a given grid."""

    kind = "ornoc"
    label = "ornoc-ml"
    layout_style = "-"
    layer_mode = "multi"

    def __init__(self, grid: GridArchitecture, max_wavelengths: int = DEFAULT_MAX_WAVELENGTHS):
        self.grid = grid
        self.max_wavelengths = max_wavelengths
        self.rings = _cached_rings(grid.n)
        self.assignment = _cached_wavelengths(grid.n, max_wavelengths)

    def with_pitch(self, pitch_mm: float) -> "OrnocML":
        return OrnocML(self.grid.with_pitch(pitch_mm), self.max_wavelengths)

    def pairs(self):
        return list(self.grid.pairs())

    def path(self, src: int, dst: int) -> PathCharacteristics:
        return ornoc_path(self.grid, self.rings, src, dst)

    @cached_property
    def counter_matrix(self) -> np.ndarray:
        """Per-pair counters in ``grid.pairs()`` order, columns as ``PathCharacteristics.counters``."""
        return np.array([self.path(s, d).counters() for s, d in self.pairs()], dtype=float)

    def resources(self) -> dict:
        return ornoc_resources(self.grid, self.assignment)

    def assignment_csv(self) -> str:
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["src", "dst", "layer", "direction", "waveguide", "wavelength", "arc_mm"])
        for src, dst in self.pairs():
            slot = self.assignment.slots[src, dst]
            writer.writerow(
                [src, dst, slot.layer, slot.direction, slot.waveguide, slot.wavelength,
                 f"{self.rings[src, dst].arc_units * self.grid.pitch_mm:.6g}"]
            )
        return out.getvalue()

    def layout(self) -> PhotonicLayout:
        """Nested ring waveguides on both layers plus interface devices."""
        n = self.grid.n
        layout = PhotonicLayout(unit_mm=self.grid.pitch_mm)
        lane = 0.2
        for layer in (1, 2):
            outline = serpentine_polygon(n, layer, lane)
            rings = [(d, w) for d in DIRECTIONS for w in range(self.assignment.ring_totals[layer, d]["waveguides"])]
            step = lane / (2 * (len(rings) + 1))
            for k, (direction, wg) in enumerate(rings):
                pts = offset_polygon(outline, k * step) if k else list(outline)
                if direction == "CC":
                    pts = pts[:1] + pts[1:][::-1]
                layout.add_waveguide(f"ring-L{layer}-{direction}-{wg}", layer, pts + [pts[0]])
        for (src, dst), slot in sorted(self.assignment.slots.items()):
            sx, sy = self.grid.coords(src)
            dx, dy = self.grid.coords(dst)
            layout.add_device("laser", sx, sy, (1,), slot.wavelength)
            layout.add_device("MR_same_layer", dx, dy, (slot.layer,), slot.wavelength)
            layout.add_device("photodetector", dx, dy, (1,), slot.wavelength)
        for core in range(1, self.grid.cores + 1):
            x, y = self.grid.coords(core)
            layout.add_device("vertical_coupler", x, y, (1, 2))
        return layout


_RING_CACHE: dict = {}
_WL_CACHE: dict = {}


def _cached_rings(n: int) -> RingAssignment:
    # assignments depend only on the grid side; arcs are kept in pitch units
    if n not in _RING_CACHE:
        _RING_CACHE[n] = assign_rings(GridArchitecture(n, 1.0))
    return _RING_CACHE[n]


def _cached_wavelengths(n: int, max_wavelengths: int) -> WavelengthAssignment:
    key = (n, max_wavelengths)
    if key not in _WL_CACHE:
        grid = GridArchitecture(n, 1.0)
        _WL_CACHE[key] = assign_wavelengths(grid, _cached_rings(n), max_wavelengths)
    return _WL_CACHE[key]
