"""Matrix, lambda-router and Snake crossbars with their access-waveguide layouts.

Every crossbar has ``P = n*n`` ports, one per core. The switching block sits in
the middle of the optical layer and is reached through access waveguides: a
transmit waveguide from each core to its input port and a receive waveguide
from each output port back to the core. Layout ``A`` routes access waveguides
without any same-layer crossing; layout ``B`` uses near-Manhattan-length
routes and accepts crossings.

The lambda-router is an odd-even (brick) lattice of ``P`` stages and the Snake
a triangular lattice of ``2P - 3`` time slots; in both, every pair of lines
meets in exactly one PSE. A signal from input ``i`` to the output reached by
line ``l`` follows line ``i`` up to the PSE shared with ``l``, drops there and
continues on line ``l``; the output reached by line ``i`` itself is served
without any drop. PSEs that would only serve self-communication are removed
(they still leave a plain waveguide crossing).
"""

from __future__ import annotations

import csv
import io
import warnings
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Optional

import numpy as np

from onoc_xbar.errors import NoRoute, SelfCommunication, Unroutable, UnsupportedSize
from onoc_xbar.geometry import (
    GridArchitecture,
    PhotonicLayout,
    crossing_events,
    events_between,
    waveguide_lengths,
)
from onoc_xbar.loss_model import PathCharacteristics

KINDS = ("matrix", "lambda-router", "snake")
LAYER_MODES = ("single", "multi")
STYLES = ("A", "B")
DEFAULT_BLOCK_RATIO = 0.1
DEFAULT_MAX_WAVELENGTHS = 64
PORT_OFFSET = 0.02  # TX/RX points sit this far left/right of the core centre (d units)


# -- switching meshes ---------------------------------------------------------


@dataclass
class PSEMesh:
    """Lines and 2x2 PSEs of a lambda-router or Snake with ``ports`` lines.

    ``comparators`` lists ``(time, pos, upper_line, lower_line)`` in firing
    order; line ``l`` starts at input position ``l``.
    """

    kind: str
    ports: int
    slots: int
    comparators: list
    meet: dict  # frozenset({a, b}) -> comparator index
    events: dict  # line -> [(comparator index, other line)] in order
    out_pos: dict  # line -> output position
    line_at_output: dict  # output position -> line
    removed: frozenset  # indices of self-communication PSEs

    def route(self, src: int, dst: int):
        """(input line, drop PSE index or None, output line) for positions src -> dst."""
        if src == dst:
            raise SelfCommunication(f"port {src} cannot send to itself")
        line_out = self.line_at_output[dst]
        if line_out == src:
            return src, None, src
        return src, self.meet[frozenset((src, line_out))], line_out


def _schedule(kind: str, ports: int):
    if kind == "lambda-router":
        comps = [(s, p) for s in range(ports) for p in range(s % 2, ports - 1, 2)]
        return comps, ports
    if kind == "snake":
        comps = [(2 * k + p, p) for k in range(ports - 1) for p in range(ports - 1 - k)]
        comps.sort()
        return comps, max(2 * ports - 3, 1)
    raise ValueError(f"not a PSE mesh kind: {kind}")


@lru_cache(maxsize=None)
def build_mesh(kind: str, ports: int) -> PSEMesh:
    schedule, slots = _schedule(kind, ports)
    at = list(range(ports))
    comparators, meet = [], {}
    events = {line: [] for line in range(ports)}
    for t, p in schedule:
        a, b = at[p], at[p + 1]
        k = len(comparators)
        comparators.append((t, p, a, b))
        meet[frozenset((a, b))] = k
        events[a].append((k, b))
        events[b].append((k, a))
        at[p], at[p + 1] = b, a
    out_pos = {line: pos for pos, line in enumerate(at)}
    removed = frozenset(
        meet[frozenset((line, at[line]))] for line in range(ports) if at[line] != line
    )
    if len(meet) != ports * (ports - 1) // 2:
        raise NoRoute(f"{kind} mesh with {ports} ports does not connect every pair of lines")
    return PSEMesh(kind, ports, slots, comparators, meet, events, out_pos, dict(enumerate(at)), removed)


def _relabel(ports: int) -> list:
    """Relabelling that gives self-communication PSEs even colours (P divisible by 4)."""
    if ports % 4:
        return list(range(ports))
    sigma = [0] * ports
    for c in range(ports // 2):
        sigma[c] = c
        sigma[ports - 1 - c] = c + ports // 2
    return sigma


def line_layer(line: int, layer_mode: str) -> int:
    """Input lines alternate between layers in multi-layer mode."""
    return 1 if layer_mode == "single" or line % 2 == 0 else 2


def mesh_crossing_table(kind: str, ports: int, layer_mode: str) -> np.ndarray:
    """Same-layer PSE crossings met inside the block, as a ``ports x ports`` array.

    Entry ``[i, o]`` is for input position ``i`` to output position ``o``; the
    diagonal is unused and set to -1.
    """
    if kind == "matrix":
        i = np.arange(ports)[:, None]
        j = np.arange(ports)[None, :]
        if layer_mode == "multi":
            table = np.zeros((ports, ports), dtype=int)
        else:
            table = j + (ports - 1 - i) + np.zeros_like(i)
        np.fill_diagonal(table, -1)
        return table
    mesh = build_mesh(kind, ports)
    layer = np.array([line_layer(line, layer_mode) for line in range(ports)])
    # prefix[l, m] = same-layer crossings among the first m PSEs on line l
    prefix = np.zeros((ports, ports), dtype=int)
    where = np.zeros((ports, ports), dtype=int)  # where[l, o] = index of PSE with o in l's list
    for line, evs in mesh.events.items():
        others = np.array([o for _, o in evs], dtype=int)
        same = (layer[others] == layer[line]).astype(int)
        prefix[line, 1:] = np.cumsum(same)
        where[line, others] = np.arange(len(others))
    total = prefix[:, -1]
    table = np.full((ports, ports), -1, dtype=int)
    for o in range(ports):
        l = mesh.line_at_output[o]
        for i in range(ports):
            if i == o:
                continue
            if i == l:
                table[i, o] = total[i]
            else:
                table[i, o] = prefix[i, where[i, l]] + total[l] - prefix[l, where[l, i] + 1]
    return table


def worst_case_crossings(kind: str, m: int, layer_mode: str = "single") -> int:
    """Worst-case same-layer crossings inside the block for an ``m x m`` core grid.

    Obtained by tracing every pair through the mesh (``m*m`` ports).
    """
    kind = _norm_kind(kind)
    if m < 1 or m * m < 2:
        raise ValueError("need at least two ports")
    return int(mesh_crossing_table(kind, m * m, layer_mode).max())


def closed_form_crossings(kind: str, m: int) -> Optional[int]:
    """Single-layer worst case for an ``m x m`` grid: ``m^2 - 1`` (lambda-router), ``2m^2 - 5`` (Snake)."""
    kind = _norm_kind(kind)
    if kind == "lambda-router":
        return m * m - 1
    if kind == "snake":
        return 2 * m * m - 5
    return None


def _norm_kind(kind: str) -> str:
    k = kind.lower().replace("_", "-")
    aliases = {"lambda": "lambda-router", "lambdarouter": "lambda-router", "λ-router": "lambda-router"}
    k = aliases.get(k, k)
    if k not in KINDS:
        raise ValueError(f"unknown crossbar kind {kind!r}; choose from {KINDS}")
    return k


# -- unit-pitch instance ------------------------------------------------------


@dataclass
class _UnitBuild:
    """Everything about an instance that does not depend on the pitch."""

    layout: PhotonicLayout
    pairs: list
    counters: np.ndarray  # length in d units, crossings, drop1, drop2, couplers
    access_crossings: np.ndarray
    wavelength: dict
    mr_count: int
    waveguides: int


class _Block:
    """Placement of the switching block and its ports, in d units."""

    def __init__(self, kind: str, n: int, ratio: float):
        ports = n * n
        self.ports = ports
        if kind == "matrix":
            cols, rows = ports, ports
        else:
            cols, rows = build_mesh(kind, ports).slots, ports
        self.q = min(ratio, 0.5 / max(cols, rows))
        cx = cy = (n - 1) // 2 + 0.5
        self.x0 = cx - cols * self.q / 2
        self.x1 = self.x0 + cols * self.q
        self.y0 = cy - rows * self.q / 2
        self.y1 = self.y0 + rows * self.q
        self.cols = cols

    def row_y(self, p):
        return self.y0 + (p + 0.5) * self.q

    def col_x(self, t):
        return self.x0 + (t + 0.5) * self.q

    @property
    def box(self):
        return (self.x0, self.y0, self.x1, self.y1)


def _matrix_lines(layout, block, layer_mode):
    """Rows then columns; returns arc position helpers for tracing."""
    ports = block.ports
    for i in range(ports):
        y = block.row_y(i)
        layout.add_waveguide(f"row-{i}", 1, [(block.x0, y), (block.x1, y)])
    for j in range(ports):
        x = block.col_x(j)
        layout.add_waveguide(f"col-{j}", 2 if layer_mode == "multi" else 1, [(x, block.y0), (x, block.y1)])


def _pse_lines(layout, block, mesh, layer_mode):
    """Polyline for every line of the mesh; returns PSE arc positions per line."""
    q, h = block.q, block.q / 4
    pts = {line: [(block.x0, block.row_y(line))] for line in range(mesh.ports)}
    arc = {line: 0.0 for line in range(mesh.ports)}
    at_pse = {}

    def extend(line, p):
        last = pts[line][-1]
        arc[line] += abs(p[0] - last[0]) + abs(p[1] - last[1])
        pts[line].append(p)

    for k, (t, p, a, b) in enumerate(mesh.comparators):
        x, ymid = block.col_x(t), block.y0 + (p + 1) * q
        ya, yb = block.row_y(p), block.row_y(p + 1)
        extend(a, (x - h, ya))
        extend(a, (x - h, ymid))
        at_pse[a, k] = arc[a] + h
        extend(a, (x + h, ymid))
        extend(a, (x + h, yb))
        extend(b, (x, yb))
        at_pse[b, k] = arc[b] + (yb - ymid)
        extend(b, (x, ya))
    for line in range(mesh.ports):
        extend(line, (block.x1, block.row_y(mesh.out_pos[line])))
        layout.add_waveguide(f"line-{line}", line_layer(line, layer_mode), pts[line])
    return at_pse


def _b_routes(grid_n, block, kind):
    """Manhattan-length access routes: per-row ribbons into a bus beside the block.

    Every route is a monotone staircase, so its length is the Manhattan
    distance around the block. Cores on the port side of the block run in the
    band between their row and the block; cores on the far side run in the
    band on the other side of their row. Bus positions follow the port order
    so that no route crosses another at a port entry; the remaining crossings
    come from far-side ribbons passing the bus lines of earlier rows.
    South ports (Matrix outputs) of the upper rows are reached around the
    west side of the block; those of the lower rows straight from below.
    """
    n = grid_n
    e = PORT_OFFSET
    m = (n - 1) // 2 + 1  # rows above the block channel
    cx = m - 0.5
    half = max(m, n - m) * n
    a = 0.12 / (2 * n + 2)
    gb = 0.18 / (2 * half + 2)
    hb = 0.1 / (half + 1)

    plan = {}
    bands = {}
    for core in range(1, block.ports + 1):
        k = core - 1
        row, col = divmod(k, n)
        upper = row < m
        for name, side, term in (
            (f"tx-{core}", "W", (col - e, row)),
            (f"rx-{core}", "S" if kind == "matrix" else "E", (col + e, row)),
        ):
            west = col < cx
            near = west if side in "WS" else not west
            if side == "S" and not upper:
                band = -1
            elif upper:
                band = 1 if near else -1
            else:
                band = -1 if near else 1
            # lower-half cores west of the block nest with the eastmost core nearest the row
            key = (name.startswith("rx"), -col if (west and not upper) else col)
            plan[name] = (side, k, row, term, upper)
            bands.setdefault((row, band), []).append((key, name))
    lane = {}
    for (row, band), members in bands.items():
        for s, (_, name) in enumerate(sorted(members)):
            lane[name] = row + band * a * (s + 1)

    routes = {}
    for side in ("W", "E", "S"):
        for upper in (True, False):
            group = sorted((v[1], nm) for nm, v in plan.items() if v[0] == side and v[4] == upper)
            if not upper and side != "S":
                group.reverse()  # lower half: the bottom port sits nearest the block
            for rank, (k, nm) in enumerate(group):
                term, ly = plan[nm][3], lane[nm]
                if side == "S":
                    px = block.col_x(k)
                    if upper:
                        xv = block.x0 - gb * (2 * rank + 2)
                        yb = block.y1 + hb * (rank + 1)
                        pts = [term, (term[0], ly), (xv, ly), (xv, yb), (px, yb), (px, block.y1)]
                    else:
                        pts = [term, (term[0], ly), (px, ly), (px, block.y1)]
                else:
                    py = block.row_y(k)
                    edge, sign = (block.x0, -1) if side == "W" else (block.x1, 1)
                    xb = edge + sign * gb * (2 * rank + 1)
                    pts = [term, (term[0], ly), (xb, ly), (xb, py), (edge, py)]
                # receive routes run from the block port to the core
                routes[nm] = pts[::-1] if nm.startswith("rx") else pts
    return routes


def _planar_routes(grid_n, block, kind, layers):
    """Bundle-and-trunk access routes that never cross, or None if the plan does not apply.

    West and south ports are fed by per-row bundles running east in the
    channel above each row into trunks east of the grid; the upper half
    reaches the block over its top, the lower half under its bottom. East
    ports are fed by bundles running west below each row into a trunk that
    goes around the top of the grid and enters the block channel from the far
    east, between the two inner trunks. At every merge and turn lanes keep
    the relative order their ports need, so no two routes meet. The plan does
    not cover west and south ports on the same layer.
    """
    e = PORT_OFFSET
    a, g, b = 0.05, 0.03, 0.1
    n = grid_n
    m = (n - 1) // 2 + 1  # rows above the block channel
    upper_max, lower_max = m * n, (n - m) * n
    above = block.y0 - (m - 1) - a - 2 * g
    below = m - block.y1 - a - 2 * g
    step = min(0.004, above / (n + upper_max + 1), below / (n + max(upper_max, lower_max) + 1))
    x_trunk = n - 1 + b
    x_far = x_trunk + max(upper_max, lower_max) * step + g
    y_top = -(a + n * step + g)

    nets = {}
    for core in range(1, block.ports + 1):
        k = core - 1
        row, col = divmod(k, n)
        nets[f"tx-{core}"] = ("W", k, row, col, (col - e, row))
        nets[f"rx-{core}"] = ("S" if kind == "matrix" else "E", k, row, col, (col + e, row))
    routes = {}
    for layer in (1, 2):
        mine = {name: v for name, v in nets.items() if layers[name] == layer}
        sides = {v[0] for v in mine.values()}
        if {"W", "S"} <= sides:
            return None
        inward = sorted((v[1], name) for name, v in mine.items() if v[0] in "WS")
        outward = sorted((v[1], name) for name, v in mine.items() if v[0] == "E")

        def lanes(group, below_row):
            # lane height per net: the first core to join sits farthest from its row
            by_row = {}
            for _, name in group:
                by_row.setdefault(mine[name][2], []).append(name)
            out = {}
            for row, names in by_row.items():
                names.sort(key=lambda nm: mine[nm][3], reverse=below_row)
                count = len(names)
                for j, nm in enumerate(names):
                    off = a + (count - 1 - j) * step
                    out[nm] = row + off if below_row else row - off
            return out

        lane = lanes(inward, False)
        lane.update(lanes(outward, True))
        upper = [nm for _, nm in inward if mine[nm][2] < m]
        lower = [nm for _, nm in inward if mine[nm][2] >= m]
        for t, nm in enumerate(upper):
            side, k, _, _, term = mine[nm]
            x_t = x_trunk + (len(upper) - 1 - t) * step
            y_h = block.y0 - g - t * step
            x_h = block.x0 - g - t * step
            pts = [term, (term[0], lane[nm]), (x_t, lane[nm]), (x_t, y_h), (x_h, y_h)]
            if side == "W":
                pts += [(x_h, block.row_y(k)), (block.x0, block.row_y(k))]
            else:
                y_s = block.y1 + g + t * step
                pts += [(x_h, y_s), (block.col_x(k), y_s), (block.col_x(k), block.y1)]
            routes[nm] = pts
        for t, nm in enumerate(lower):
            side, k, _, _, term = mine[nm]
            x_t = x_trunk + t * step
            y_l = block.y1 + g + (len(lower) - 1 - t) * step
            pts = [term, (term[0], lane[nm]), (x_t, lane[nm]), (x_t, y_l)]
            if side == "W":
                x_h = block.x0 - g - (len(lower) - 1 - t) * step
                pts += [(x_h, y_l), (x_h, block.row_y(k)), (block.x0, block.row_y(k))]
            else:
                pts += [(block.col_x(k), y_l), (block.col_x(k), block.y1)]
            routes[nm] = pts
        for u, (k, nm) in enumerate(outward):
            term = mine[nm][4]
            x_w, y_n, x_f = -b - u * step, y_top - u * step, x_far + u * step
            py = block.row_y(k)
            routes[nm] = [term, (term[0], lane[nm]), (x_w, lane[nm]), (x_w, y_n), (x_f, y_n), (x_f, py), (block.x1, py)]
    # receive routes run from the block port to the core
    return {nm: (pts[::-1] if nm.startswith("rx") else pts) for nm, pts in routes.items()}


def _a_routes(grid_n, block, kind, layers):
    routes = _planar_routes(grid_n, block, kind, layers)
    if routes is None:
        # Core k's transmit and receive routes, its interface and the block close a
        # loop that leaves west port k' and south port k' of any other core on
        # opposite sides, so a crossing is unavoidable.
        raise Unroutable(
            "west inputs and south outputs on one layer cannot all reach their cores without a crossing"
        )
    return routes


@lru_cache(maxsize=None)
def _build_unit(kind: str, n: int, layer_mode: str, style: str, ratio: float) -> _UnitBuild:
    ports = n * n
    block = _Block(kind, n, ratio)
    layout = PhotonicLayout(unit_mm=1.0)
    mesh = None
    if kind == "matrix":
        _matrix_lines(layout, block, layer_mode)
        at_pse = None
    else:
        mesh = build_mesh(kind, ports)
        at_pse = _pse_lines(layout, block, mesh, layer_mode)

    # layer of each access waveguide follows the block waveguide it extends
    layers = {}
    for core in range(1, ports + 1):
        k = core - 1
        if kind == "matrix":
            layers[f"tx-{core}"] = 1
            layers[f"rx-{core}"] = 2 if layer_mode == "multi" else 1
        else:
            layers[f"tx-{core}"] = line_layer(k, layer_mode)
            layers[f"rx-{core}"] = line_layer(mesh.line_at_output[k], layer_mode)
    routes = _b_routes(n, block, kind) if style == "B" else _a_routes(n, block, kind, layers)
    for core in range(1, ports + 1):
        for wg in (f"tx-{core}", f"rx-{core}"):
            layout.add_waveguide(wg, layers[wg], routes[wg])
    layout.check_invariants()

    events = crossing_events(layout)
    lengths = waveguide_lengths(layout)

    def count(wg, lo=-1.0, hi=None):
        ev = events.get(wg, [])
        return events_between(ev, lo, lengths[wg] + 1 if hi is None else hi)

    sigma = _relabel(ports)
    pairs, rows, access, wavelength = [], [], [], {}
    for src in range(1, ports + 1):
        for dst in range(1, ports + 1):
            if src == dst:
                continue
            i, o = src - 1, dst - 1
            tx, rx = f"tx-{src}", f"rx-{dst}"
            acc = count(tx) + count(rx)
            length = lengths[tx] + lengths[rx]
            couplers = int(layers[tx] == 2) + int(layers[rx] == 2)
            drop1 = drop2 = 0
            if kind == "matrix":
                row, col = f"row-{i}", f"col-{o}"
                s_row = block.col_x(o) - block.x0
                s_col = block.row_y(i) - block.y0
                inner = count(row, -1.0, s_row) + count(col, s_col)
                length += s_row + lengths[col] - s_col
                if layer_mode == "multi":
                    drop2 = 1
                else:
                    drop1 = 1
                wavelength[src, dst] = (o - i) % ports
            else:
                line_in, k, line_out = mesh.route(i, o)
                if k is None:
                    inner = count(f"line-{i}")
                    length += lengths[f"line-{i}"]
                    wavelength[src, dst] = (2 * sigma[i]) % ports
                else:
                    s_in = at_pse[line_in, k]
                    s_out = at_pse[line_out, k]
                    inner = count(f"line-{line_in}", -1.0, s_in) + count(f"line-{line_out}", s_out)
                    length += s_in + lengths[f"line-{line_out}"] - s_out
                    if line_layer(line_in, layer_mode) == line_layer(line_out, layer_mode):
                        drop1 = 1
                    else:
                        drop2 = 1
                    wavelength[src, dst] = (sigma[line_in] + sigma[line_out]) % ports
            pairs.append((src, dst))
            rows.append((length, acc + inner, drop1, drop2, couplers))
            access.append(acc)

    _place_devices(layout, kind, block, mesh, layer_mode, layers, wavelength, sigma, n)
    if kind == "matrix":
        mr_count, waveguides = ports * (ports - 1), 2 * ports
    else:
        mr_count, waveguides = 2 * (len(mesh.comparators) - len(mesh.removed)), ports
    return _UnitBuild(
        layout, pairs, np.array(rows, dtype=float), np.array(access), wavelength, mr_count, waveguides
    )


def _place_devices(layout, kind, block, mesh, layer_mode, layers, wavelength, sigma, n):
    ports = block.ports
    if kind == "matrix":
        cross = layer_mode == "multi"
        for i in range(ports):
            for j in range(ports):
                if i != j:
                    layout.add_device(
                        "MR_cross_layer" if cross else "MR_same_layer",
                        block.col_x(j), block.row_y(i), (1, 2) if cross else (1,), (j - i) % ports,
                    )
    else:
        for k, (t, p, a, b) in enumerate(mesh.comparators):
            if k in mesh.removed:
                continue
            la, lb = line_layer(a, layer_mode), line_layer(b, layer_mode)
            layout.add_device(
                "PSE_same_layer" if la == lb else "PSE_cross_layer",
                block.col_x(t), block.y0 + (p + 1) * block.q, tuple(sorted({la, lb})),
                (sigma[a] + sigma[b]) % ports,
            )
    for (src, dst), wl in sorted(wavelength.items()):
        sr, sc = divmod(src - 1, n)
        dr, dc = divmod(dst - 1, n)
        layout.add_device("laser", sc - PORT_OFFSET, sr, (1,), wl)
        layout.add_device("photodetector", dc + PORT_OFFSET, dr, (1,), wl)
    for core in range(1, ports + 1):
        r, c = divmod(core - 1, n)
        if layers[f"tx-{core}"] == 2:
            layout.add_device("vertical_coupler", c - PORT_OFFSET, r, (1, 2))
        if layers[f"rx-{core}"] == 2:
            layout.add_device("vertical_coupler", c + PORT_OFFSET, r, (1, 2))


# -- public instance ----------------------------------------------------------


@dataclass
class CrossbarInstance:
    kind: str
    grid: GridArchitecture
    layer_mode: str
    layout_style: str
    block_ratio: float = DEFAULT_BLOCK_RATIO
    max_wavelengths: int = DEFAULT_MAX_WAVELENGTHS
    _unit: _UnitBuild = field(default=None, repr=False)

    @property
    def ports(self) -> int:
        return self.grid.cores

    @property
    def label(self) -> str:
        ml = "-ml" if self.layer_mode == "multi" else ""
        return f"{self.kind}{ml}-{self.layout_style.lower()}"

    def with_pitch(self, pitch_mm: float) -> "CrossbarInstance":
        return CrossbarInstance(
            self.kind, self.grid.with_pitch(pitch_mm), self.layer_mode, self.layout_style,
            self.block_ratio, self.max_wavelengths, self._unit,
        )

    def pairs(self) -> list:
        return list(self._unit.pairs)

    @cached_property
    def _index(self) -> dict:
        return {pair: k for k, pair in enumerate(self._unit.pairs)}

    @cached_property
    def counter_matrix(self) -> np.ndarray:
        """Per-pair counters in ``pairs()`` order; length already in cm."""
        m = self._unit.counters.copy()
        m[:, 0] *= self.grid.pitch_mm / 10.0
        return m

    def trace_path(self, src: int, dst: int) -> PathCharacteristics:
        if src == dst:
            raise SelfCommunication(f"core {src} cannot send to itself")
        self.grid.check_core(src)
        self.grid.check_core(dst)
        k = self._index.get((src, dst))
        if k is None:
            raise NoRoute(f"no route from {src} to {dst}")
        length, x, d1, d2, c = self.counter_matrix[k]
        return PathCharacteristics(float(length), int(x), int(d1), int(d2), int(c))

    path = trace_path

    def access_crossings(self, src: int, dst: int) -> int:
        return int(self._unit.access_crossings[self._index[src, dst]])

    def wavelength(self, src: int, dst: int) -> int:
        return self._unit.wavelength[src, dst]

    @property
    def wavelengths(self) -> int:
        return len(set(self._unit.wavelength.values()))

    def layout(self) -> PhotonicLayout:
        unit = self._unit.layout
        return PhotonicLayout(self.grid.pitch_mm, list(unit.segments), list(unit.devices))

    def resources(self) -> dict:
        channels = (self.ports - 1) * self.ports
        return {
            "lasers": channels,
            "photodetectors": channels,
            "receiver_mrs": channels,
            "mr_count": self._unit.mr_count,
            "wavelengths": self.wavelengths,
            "waveguides": self._unit.waveguides,
        }

    def trace_csv(self) -> str:
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["src", "dst", "wavelength", "length_cm", "n_crossing", "n_drop1", "n_drop2", "n_coupler"])
        for src, dst in self.pairs():
            p = self.trace_path(src, dst)
            writer.writerow(
                [src, dst, self.wavelength(src, dst), f"{p.length_cm:.6g}", p.n_crossing, p.n_drop1, p.n_drop2,
                 p.n_coupler]
            )
        return out.getvalue()


def build_crossbar(
    kind: str,
    grid: GridArchitecture,
    layer_mode: str = "multi",
    layout_style: str = "B",
    block_ratio: float = DEFAULT_BLOCK_RATIO,
    max_wavelengths: int = DEFAULT_MAX_WAVELENGTHS,
) -> CrossbarInstance:
    """Build a reduced crossbar for ``grid`` with routed access waveguides.

    The build is done once per (kind, grid side, layer mode, style, ratio) in
    pitch units and rescaled for every pitch.
    """
    kind = _norm_kind(kind)
    if layer_mode not in LAYER_MODES:
        raise ValueError(f"layer_mode must be one of {LAYER_MODES}")
    style = layout_style.upper()
    if style not in STYLES:
        raise ValueError(f"layout_style must be one of {STYLES}")
    if not block_ratio > 0:
        raise ValueError("block_ratio must be positive")
    unit = _build_unit(kind, grid.n, layer_mode, style, float(block_ratio))
    inst = CrossbarInstance(kind, grid, layer_mode, style, block_ratio, max_wavelengths, unit)
    if inst.wavelengths > max_wavelengths:
        warnings.warn(
            f"{inst.label} on {grid.n}x{grid.n} needs {inst.wavelengths} wavelengths, "
            f"above the cap of {max_wavelengths}",
            UnsupportedSize,
            stacklevel=2,
        )
    return inst
