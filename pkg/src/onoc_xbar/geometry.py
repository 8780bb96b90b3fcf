"""Core grid, serpentine ring positions, Manhattan layouts and crossing counting.

Layout coordinates are expressed in units of the inter-core pitch ``d`` so a
layout built once can be rescaled to any pitch; ``PhotonicLayout.unit_mm``
carries the conversion.
"""

from __future__ import annotations

import bisect
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra

from onoc_xbar.errors import CollinearOverlap, SelfCommunication, Unroutable

EPS = 1e-9
LAYERS = (1, 2)
DEVICE_KINDS = (
    "MR_same_layer",
    "MR_cross_layer",
    "PSE_same_layer",
    "PSE_cross_layer",
    "vertical_coupler",
    "laser",
    "photodetector",
)


def snap(v: float) -> float:
    return round(float(v), 9) + 0.0


@dataclass(frozen=True)
class GridArchitecture:
    """``n`` x ``n`` IP cores on a square grid of pitch ``pitch_mm``.

    Cores are numbered 1..n*n in row-major order from the top-left corner.
    """

    n: int
    pitch_mm: float = 1.0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise ValueError(f"grid side must be an integer >= 2, got {self.n}")
        if not self.pitch_mm > 0:
            raise ValueError(f"pitch must be positive, got {self.pitch_mm}")

    @property
    def cores(self) -> int:
        return self.n * self.n

    @property
    def is_even_side(self) -> bool:
        return self.n % 2 == 0

    def check_core(self, core: int):
        if not 1 <= core <= self.cores:
            raise ValueError(f"core {core} outside 1..{self.cores}")

    def coords(self, core: int) -> tuple[int, int]:
        """(column, row), zero based."""
        self.check_core(core)
        row, col = divmod(core - 1, self.n)
        return col, row

    def position(self, core: int) -> tuple[float, float]:
        col, row = self.coords(core)
        return col * self.pitch_mm, row * self.pitch_mm

    def core_at(self, col: int, row: int) -> int:
        return row * self.n + col + 1

    def pairs(self):
        """All ordered (src, dst) pairs of distinct cores, src-major."""
        for s in range(1, self.cores + 1):
            for t in range(1, self.cores + 1):
                if s != t:
                    yield s, t

    def die_side_mm(self) -> float:
        return self.n * self.pitch_mm

    def die_area_cm2(self) -> float:
        return (self.die_side_mm() / 10.0) ** 2

    def with_pitch(self, pitch_mm: float) -> "GridArchitecture":
        return GridArchitecture(self.n, pitch_mm)


# -- serpentine rings ---------------------------------------------------------


def serpentine_index(n: int, core: int, layer: int) -> int:
    """Position of ``core`` along the serpentine of ``layer``.

    Layer 1 visits rows boustrophedon-style starting left to right; layer 2 is
    the same ring turned a quarter: columns, starting top to bottom.
    """
    row, col = divmod(core - 1, n)
    if layer == 1:
        return row * n + (col if row % 2 == 0 else n - 1 - col)
    if layer == 2:
        return col * n + (row if col % 2 == 0 else n - 1 - row)
    raise ValueError(f"layer must be 1 or 2, got {layer}")


def closure_units(n: int) -> int:
    # even n ends on the first column/row; odd n ends in the far corner
    return (n - 1) if n % 2 == 0 else 2 * (n - 1)


def ring_length_units(n: int) -> int:
    return n * n - 1 + closure_units(n)


def ring_length_mm(grid: GridArchitecture) -> float:
    return ring_length_units(grid.n) * grid.pitch_mm


def serpentine_arc_position(grid: GridArchitecture, core: int, layer: int) -> float:
    """Arc length (mm) from the ring origin (core 1) to ``core`` on ``layer``."""
    grid.check_core(core)
    return serpentine_index(grid.n, core, layer) * grid.pitch_mm


def ring_distance_units(n: int, src: int, dst: int, layer: int, direction: str) -> int:
    if src == dst:
        raise SelfCommunication(f"core {src} cannot send to itself")
    length = ring_length_units(n)
    cw = (serpentine_index(n, dst, layer) - serpentine_index(n, src, layer)) % length
    if direction == "C":
        return cw
    if direction == "CC":
        return length - cw
    raise ValueError(f"direction must be 'C' or 'CC', got {direction!r}")


def ring_distance(grid: GridArchitecture, src: int, dst: int, layer: int, direction: str) -> float:
    """Distance in mm from ``src`` to ``dst`` along one ring."""
    grid.check_core(src)
    grid.check_core(dst)
    return ring_distance_units(grid.n, src, dst, layer, direction) * grid.pitch_mm


def serpentine_polygon(n: int, layer: int, lane: float = 0.2) -> list[tuple[float, float]]:
    """Closed ring outline (d units) through every core of ``layer``.

    The closing run sits ``lane`` outside the first column (row for layer 2) so
    it never overlaps the serpentine's own turns.
    """
    pts = []
    for r in range(n):
        ends = [(0, r), (n - 1, r)]
        pts.extend(ends if r % 2 == 0 else ends[::-1])
    last = pts[-1]
    if n % 2 == 0:
        pts += [(-lane, last[1]), (-lane, 0)]
    else:
        pts += [(n - 1, n - 1 + lane), (-lane, n - 1 + lane), (-lane, 0)]
    pts = _compress(pts + [pts[0]])[:-1]
    if layer == 2:
        pts = [(y, x) for x, y in pts]
    return [(float(x), float(y)) for x, y in pts]


def offset_polygon(pts: Sequence[tuple[float, float]], delta: float) -> list[tuple[float, float]]:
    """Inward offset of a simple rectilinear polygon by ``delta``."""
    k = len(pts)
    area = sum(pts[i][0] * pts[(i + 1) % k][1] - pts[(i + 1) % k][0] * pts[i][1] for i in range(k))
    sign = 1.0 if area > 0 else -1.0

    def inward(a, b):
        dx, dy = b[0] - a[0], b[1] - a[1]
        norm = abs(dx) + abs(dy)
        return (-dy / norm * sign, dx / norm * sign)

    out = []
    for i in range(k):
        prev_n = inward(pts[i - 1], pts[i])
        next_n = inward(pts[i], pts[(i + 1) % k])
        if prev_n == next_n:
            # straight-through vertex
            next_n = (0.0, 0.0)
        out.append((pts[i][0] + delta * (prev_n[0] + next_n[0]), pts[i][1] + delta * (prev_n[1] + next_n[1])))
    return out


# -- layouts ------------------------------------------------------------------


@dataclass(frozen=True)
class Segment:
    layer: int
    x1: float
    y1: float
    x2: float
    y2: float
    wg: str

    @property
    def horizontal(self) -> bool:
        return abs(self.y1 - self.y2) <= EPS

    @property
    def length(self) -> float:
        return abs(self.x2 - self.x1) + abs(self.y2 - self.y1)


@dataclass(frozen=True)
class Device:
    kind: str
    x: float
    y: float
    layers: tuple
    wavelength: Optional[int] = None


@dataclass
class PhotonicLayout:
    """Layered Manhattan waveguides plus device placements.

    Segments of one waveguide are stored in propagation order; consecutive
    segments share an endpoint.
    """

    unit_mm: float = 1.0
    segments: list = field(default_factory=list)
    devices: list = field(default_factory=list)

    def add_waveguide(self, wg: str, layer: int, points: Sequence[tuple[float, float]]):
        if layer not in LAYERS:
            raise ValueError(f"layer must be 1 or 2, got {layer}")
        pts = _compress([(snap(x), snap(y)) for x, y in points])
        if len(pts) < 2:
            raise ValueError(f"waveguide {wg} has no extent")
        for (x1, y1), (x2, y2) in zip(pts, pts[1:]):
            if abs(x1 - x2) > EPS and abs(y1 - y2) > EPS:
                raise ValueError(f"waveguide {wg}: segment {(x1, y1)}->{(x2, y2)} is not axis-aligned")
            self.segments.append(Segment(layer, x1, y1, x2, y2, wg))

    def add_device(self, kind: str, x: float, y: float, layers, wavelength=None):
        if kind not in DEVICE_KINDS:
            raise ValueError(f"unknown device kind {kind!r}")
        self.devices.append(Device(kind, snap(x), snap(y), tuple(layers), wavelength))

    def waveguide(self, wg: str) -> list:
        return [s for s in self.segments if s.wg == wg]

    def waveguide_ids(self) -> list:
        seen = {}
        for s in self.segments:
            seen.setdefault(s.wg, None)
        return list(seen)

    def check_invariants(self):
        """Axis alignment, layer tags and per-waveguide continuity."""
        last = {}
        for s in self.segments:
            if s.layer not in LAYERS:
                raise ValueError(f"segment of {s.wg} has layer {s.layer}")
            if abs(s.x1 - s.x2) > EPS and abs(s.y1 - s.y2) > EPS:
                raise ValueError(f"segment of {s.wg} is not axis-aligned")
            prev = last.get(s.wg)
            if prev is not None and (abs(prev.x2 - s.x1) > EPS or abs(prev.y2 - s.y1) > EPS):
                raise ValueError(f"waveguide {s.wg} is not continuous")
            last[s.wg] = s

    def dump(self) -> str:
        """Line-oriented text: one segment or device per line, coordinates in mm."""
        u = self.unit_mm
        lines = [f"# onoc-xbar layout v1 unit=mm segments={len(self.segments)} devices={len(self.devices)}"]
        for s in self.segments:
            lines.append(
                f"segment {s.layer} {_fmt(s.x1 * u)} {_fmt(s.y1 * u)} {_fmt(s.x2 * u)} {_fmt(s.y2 * u)} {s.wg}"
            )
        for dv in self.devices:
            wl = "-" if dv.wavelength is None else str(dv.wavelength)
            layers = ",".join(str(v) for v in dv.layers)
            lines.append(f"device {dv.kind} {_fmt(dv.x * u)} {_fmt(dv.y * u)} {layers} {wl}")
        return "\n".join(lines) + "\n"

    @classmethod
    def parse(cls, text: str) -> "PhotonicLayout":
        layout = cls(unit_mm=1.0)
        for line in text.splitlines():
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split()
            if parts[0] == "segment":
                layer, x1, y1, x2, y2 = int(parts[1]), *map(float, parts[2:6])
                layout.segments.append(Segment(layer, x1, y1, x2, y2, parts[6]))
            elif parts[0] == "device":
                wl = None if parts[5] == "-" else int(parts[5])
                layers = tuple(int(v) for v in parts[4].split(","))
                layout.devices.append(Device(parts[1], float(parts[2]), float(parts[3]), layers, wl))
            else:
                raise ValueError(f"unrecognised layout line: {line!r}")
        return layout


def _fmt(v: float) -> str:
    return f"{v:.9g}"


def _compress(pts):
    """Drop repeated points and interior points of straight runs."""
    out = []
    for p in pts:
        if out and abs(out[-1][0] - p[0]) <= EPS and abs(out[-1][1] - p[1]) <= EPS:
            continue
        if len(out) >= 2:
            a, b = out[-2], out[-1]
            if (abs(a[0] - b[0]) <= EPS and abs(b[0] - p[0]) <= EPS) or (
                abs(a[1] - b[1]) <= EPS and abs(b[1] - p[1]) <= EPS
            ):
                # same axis: keep only if not reversing direction
                if (b[0] - a[0]) * (p[0] - b[0]) >= 0 and (b[1] - a[1]) * (p[1] - b[1]) >= 0:
                    out[-1] = p
                    continue
        out.append(p)
    return out


def polyline_length(points) -> float:
    return sum(abs(b[0] - a[0]) + abs(b[1] - a[1]) for a, b in zip(points, points[1:]))


# -- crossing counting ---------------------------------------------------------


def _strictly_inside(v, a, b):
    lo, hi = (a, b) if a <= b else (b, a)
    return lo + EPS < v < hi - EPS


def _interior_cross(h: Segment, v: Segment):
    """Intersection point if interior to both (h horizontal, v vertical)."""
    if _strictly_inside(v.x1, h.x1, h.x2) and _strictly_inside(h.y1, v.y1, v.y2):
        return (v.x1, h.y1)
    return None


def _overlap_1d(a1, a2, b1, b2) -> bool:
    lo = max(min(a1, a2), min(b1, b2))
    hi = min(max(a1, a2), max(b1, b2))
    return hi - lo > EPS


def check_collinear_overlaps(segments: Iterable[Segment]):
    """Raise ``CollinearOverlap`` if two waveguides share a collinear stretch on a layer."""
    groups = defaultdict(list)
    for s in segments:
        if s.horizontal:
            groups[(s.layer, "h", round(s.y1, 7))].append((min(s.x1, s.x2), max(s.x1, s.x2), s))
        else:
            groups[(s.layer, "v", round(s.x1, 7))].append((min(s.y1, s.y2), max(s.y1, s.y2), s))
    for key, items in groups.items():
        items.sort(key=lambda t: (t[0], t[1]))
        reach_end, reach_seg = None, None
        for lo, hi, s in items:
            if reach_seg is not None and reach_end - lo > EPS and reach_seg.wg != s.wg:
                raise CollinearOverlap(
                    f"waveguides {reach_seg.wg} and {s.wg} overlap on layer {key[0]} at "
                    f"{'y' if key[1] == 'h' else 'x'}={key[2]}"
                )
            if reach_end is None or hi > reach_end:
                reach_end, reach_seg = hi, s


class _SegmentIndex:
    """Vertical and horizontal segments of one layer sorted for range queries."""

    def __init__(self, segments):
        self.v = sorted((s for s in segments if not s.horizontal), key=lambda s: s.x1)
        self.h = sorted((s for s in segments if s.horizontal), key=lambda s: s.y1)
        self.vx = [s.x1 for s in self.v]
        self.hy = [s.y1 for s in self.h]

    def crossing(self, seg: Segment):
        """Yield (other, point) for interior transversal intersections with ``seg``."""
        if seg.horizontal:
            lo, hi = sorted((seg.x1, seg.x2))
            i = bisect.bisect_right(self.vx, lo + EPS)
            j = bisect.bisect_left(self.vx, hi - EPS)
            for other in self.v[i:j]:
                p = _interior_cross(seg, other)
                if p is not None:
                    yield other, p
        else:
            lo, hi = sorted((seg.y1, seg.y2))
            i = bisect.bisect_right(self.hy, lo + EPS)
            j = bisect.bisect_left(self.hy, hi - EPS)
            for other in self.h[i:j]:
                p = _interior_cross(other, seg)
                if p is not None:
                    yield other, p


def count_effective_crossings(layout: PhotonicLayout, traversed) -> int:
    """Number of same-layer X-crossings met by the traversed waveguide or pieces.

    ``traversed`` is either a waveguide id or a list of segments (possibly
    clipped sub-segments of waveguides, identified by their ``wg``). A crossing
    is a point interior to both a traversed segment and a segment of another
    waveguide on the same layer; bends, junctions and other layers are free.
    """
    if isinstance(traversed, str):
        pieces = layout.waveguide(traversed)
    else:
        pieces = list(traversed)
    check_collinear_overlaps(layout.segments)
    by_layer = defaultdict(list)
    for s in layout.segments:
        by_layer[s.layer].append(s)
    indexes = {layer: _SegmentIndex(segs) for layer, segs in by_layer.items()}
    count = 0
    for piece in pieces:
        idx = indexes.get(piece.layer)
        if idx is None:
            continue
        for other, _ in idx.crossing(piece):
            if other.wg != piece.wg:
                count += 1
    return count


def count_crossings_naive(segments: Sequence[Segment], traversed: Sequence[Segment]) -> int:
    """All-pairs reference counter used to check the indexed one."""
    count = 0
    for piece in traversed:
        for other in segments:
            if other.layer != piece.layer or other.wg == piece.wg:
                continue
            if piece.horizontal == other.horizontal:
                continue
            h, v = (piece, other) if piece.horizontal else (other, piece)
            if _interior_cross(h, v) is not None:
                count += 1
    return count


def crossing_events(layout: PhotonicLayout) -> dict:
    """Arc-length positions of every crossing along each waveguide.

    Returns ``{wg: sorted list of positions}``; positions are measured from the
    waveguide's first point. A path that uses the stretch ``(s_in, s_out)`` of
    a waveguide meets exactly the events strictly inside that interval.
    """
    check_collinear_overlaps(layout.segments)
    starts = {}
    arc = defaultdict(float)
    for s in layout.segments:
        starts[id(s)] = arc[s.wg]
        arc[s.wg] += s.length
    events = defaultdict(list)
    by_layer = defaultdict(list)
    for s in layout.segments:
        by_layer[s.layer].append(s)
    for segs in by_layer.values():
        hs = [s for s in segs if s.horizontal]
        vs = [s for s in segs if not s.horizontal]
        if not hs or not vs:
            continue
        # columns: fixed coordinate, span lo, span hi, start coordinate, arc start
        H = np.array([(s.y1, min(s.x1, s.x2), max(s.x1, s.x2), s.x1, starts[id(s)]) for s in hs])
        V = np.array([(s.x1, min(s.y1, s.y2), max(s.y1, s.y2), s.y1, starts[id(s)]) for s in vs])
        hw = np.array([s.wg for s in hs], dtype=object)
        vw = np.array([s.wg for s in vs], dtype=object)
        chunk = max(1, 4_000_000 // len(vs))
        for c in range(0, len(hs), chunk):
            h = H[c : c + chunk]
            hit = (
                (h[:, 1:2] + EPS < V[None, :, 0])
                & (V[None, :, 0] < h[:, 2:3] - EPS)
                & (V[None, :, 1] + EPS < h[:, 0:1])
                & (h[:, 0:1] < V[None, :, 2] - EPS)
            )
            hi, vi = np.nonzero(hit)
            keep = hw[c + hi] != vw[vi]
            hi, vi = hi[keep], vi[keep]
            hpos = h[hi, 4] + np.abs(V[vi, 0] - h[hi, 3])
            vpos = V[vi, 4] + np.abs(h[hi, 0] - V[vi, 3])
            for wg, pos in zip(hw[c + hi], hpos.tolist()):
                events[wg].append(pos)
            for wg, pos in zip(vw[vi], vpos.tolist()):
                events[wg].append(pos)
    return {wg: sorted(pos) for wg, pos in events.items()}


def waveguide_lengths(layout: PhotonicLayout) -> dict:
    total = defaultdict(float)
    for s in layout.segments:
        total[s.wg] += s.length
    return dict(total)


def events_between(events: Sequence[float], s_in: float, s_out: float) -> int:
    return bisect.bisect_left(events, s_out - EPS) - bisect.bisect_right(events, s_in + EPS)


def clip_waveguide(layout: PhotonicLayout, wg: str, s_in: float, s_out: float) -> list:
    """Sub-segments of ``wg`` between arc positions ``s_in`` and ``s_out``."""
    out = []
    pos = 0.0
    for seg in layout.waveguide(wg):
        a, b = pos, pos + seg.length
        pos = b
        lo, hi = max(a, s_in), min(b, s_out)
        if hi - lo <= EPS:
            continue
        fx = (seg.x2 - seg.x1) / seg.length
        fy = (seg.y2 - seg.y1) / seg.length
        out.append(
            Segment(
                seg.layer,
                seg.x1 + fx * (lo - a),
                seg.y1 + fy * (lo - a),
                seg.x1 + fx * (hi - a),
                seg.y1 + fy * (hi - a),
                wg,
            )
        )
    return out


# -- routing -----------------------------------------------------------------


class PlanarRouter:
    """Crossing-free Manhattan router with an adaptive track grid.

    The track grid is rebuilt for every route from each coordinate in use on
    the layer (segment ends, keep-out edges, reserved terminals) and a frame
    one unit beyond everything. Each gap between consecutive coordinates gets
    a track ``spacing`` away from both sides, or its midline when it is too
    narrow, and a coarse lattice adds room for short detours. Between any two
    parallel obstacles there is therefore always a free track, so whenever a
    gap exists in the plane the router can use it.

    Keep-outs are closed rectangles shared by all layers; an end point on a
    keep-out edge is reachable only from outside.
    """

    def __init__(
        self, keepouts=(), layers=LAYERS, bend_cost: float = 0.02, lattice: float = 0.1, spacing: float = 0.004
    ):
        self.keepouts = [tuple(snap(v) for v in box) for box in keepouts]
        self.bend_cost = bend_cost
        self.lattice = lattice
        self.spacing = spacing
        self.polylines = {layer: [] for layer in layers}
        self.terminals: dict = {}

    def add_terminal(self, point, owner: str):
        """Keep ``point`` free on every layer except for routes named ``owner``."""
        key = (snap(point[0]), snap(point[1]))
        if self.terminals.get(key, owner) != owner:
            raise Unroutable(f"terminal {key} claimed by {self.terminals[key]} and {owner}")
        self.terminals[key] = owner

    def mark(self, points, layer: int):
        """Register a polyline as an obstacle on ``layer``."""
        self.polylines[layer].append([(snap(x), snap(y)) for x, y in points])

    def _tracks(self, layer, start, end):
        xs, ys = {start[0], end[0]}, {start[1], end[1]}
        for x0, y0, x1, y1 in self.keepouts:
            xs.update((x0, x1))
            ys.update((y0, y1))
        for x, y in self.terminals:
            xs.add(x)
            ys.add(y)
        for line in self.polylines[layer]:
            for x, y in line:
                xs.add(x)
                ys.add(y)
        out = []
        for vals in (xs, ys):
            lo, hi = min(vals) - 1.0, max(vals) + 1.0
            v = np.array(sorted(vals | {lo, hi}))
            a, b = v[:-1], v[1:]
            wide = b - a > 2 * self.spacing + EPS
            # one free track next to every obstacle, or the midline of a narrow gap
            extra = [a[wide] + self.spacing, b[wide] - self.spacing, (a[~wide] + b[~wide]) / 2]
            lattice = np.arange(np.ceil(lo / self.lattice), hi / self.lattice) * self.lattice
            out.append(np.unique(np.round(np.concatenate([v, lattice, *extra]), 9)))
        return out

    def route(self, name: str, start, end, layer: int) -> list[tuple[float, float]]:
        """Shortest route (plus a small cost per bend) meeting nothing on ``layer``; it is then marked."""
        start = (snap(start[0]), snap(start[1]))
        end = (snap(end[0]), snap(end[1]))
        xs, ys = self._tracks(layer, start, end)
        nx, ny = len(xs), len(ys)
        n = nx * ny
        gx, gy = np.meshgrid(xs, ys)
        node_x, node_y = gx.ravel(), gy.ravel()
        blocked = np.zeros(n, dtype=bool)
        grid = blocked.reshape(ny, nx)
        for x0, y0, x1, y1 in self.keepouts:
            blocked |= (node_x >= x0 - EPS) & (node_x <= x1 + EPS) & (node_y >= y0 - EPS) & (node_y <= y1 + EPS)

        def col(x):
            return int(np.searchsorted(xs, x - EPS))

        def row(y):
            return int(np.searchsorted(ys, y - EPS))

        for line in self.polylines[layer]:
            for (ax, ay), (bx, by) in zip(line, line[1:]):
                i0, i1 = sorted((col(ax), col(bx)))
                j0, j1 = sorted((row(ay), row(by)))
                grid[j0:j1 + 1, i0:i1 + 1] = True
        for (x, y), owner in self.terminals.items():
            if owner != name:
                grid[row(y), col(x)] = True
        s, t = row(start[1]) * nx + col(start[0]), row(end[1]) * nx + col(end[0])
        free = ~blocked
        free[s] = free[t] = True
        idx = np.arange(n).reshape(ny, nx)
        hu, hv = idx[:, :-1].ravel(), idx[:, 1:].ravel()
        hw = np.broadcast_to(np.diff(xs), (ny, nx - 1)).ravel()
        vu, vv = idx[:-1, :].ravel(), idx[1:, :].ravel()
        vw = np.broadcast_to(np.diff(ys)[:, None], (ny - 1, nx)).ravel()
        hok = free[hu] & free[hv]
        vok = free[vu] & free[vv]
        nodes = np.flatnonzero(free)
        # two states per node (moving horizontally / vertically); switching costs a bend
        src = np.concatenate([hu[hok], n + vu[vok], nodes])
        dst = np.concatenate([hv[hok], n + vv[vok], n + nodes])
        w = np.concatenate([hw[hok], vw[vok], np.full(len(nodes), self.bend_cost)])
        graph = csr_matrix((w + 1e-12, (src, dst)), shape=(2 * n, 2 * n))
        dist, pred = dijkstra(graph, directed=False, indices=s, return_predecessors=True)
        target = t if dist[t] <= dist[n + t] else n + t
        if not np.isfinite(dist[target]):
            raise Unroutable(f"no crossing-free route for {name} on layer {layer}")
        path = [target]
        while path[-1] != s:
            path.append(int(pred[path[-1]]))
        pts = _compress([(float(node_x[v % n]), float(node_y[v % n])) for v in reversed(path)])
        self.mark(pts, layer)
        return pts


def route_manhattan(
    start,
    end,
    layer: int = 1,
    style: str = "shortest",
    layout: Optional[PhotonicLayout] = None,
    keepouts=(),
) -> list[tuple[float, float]]:
    """Manhattan polyline from ``start`` to ``end``.

    ``shortest`` returns an L-shaped route (horizontal leg first) of exactly
    the Manhattan length. ``crossing-averse`` maze-routes on a grid derived
    from the existing layout so the route never meets any same-layer segment
    already in ``layout``; it raises ``Unroutable`` if that is impossible.
    """
    start = (snap(start[0]), snap(start[1]))
    end = (snap(end[0]), snap(end[1]))
    if style == "shortest":
        return _compress([start, (end[0], start[1]), end])
    if style != "crossing-averse":
        raise ValueError(f"unknown routing style {style!r}")
    router = PlanarRouter(keepouts=keepouts, layers=(layer,))
    if layout is not None:
        for seg in layout.segments:
            if seg.layer == layer:
                router.mark([(seg.x1, seg.y1), (seg.x2, seg.y2)], layer)
    return router.route("route", start, end, layer)
