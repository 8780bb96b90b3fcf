"""Loss evaluation over all core pairs and the three experiment families.

A topology instance is anything exposing ``grid``, ``label``, ``layout_style``,
``layer_mode``, ``pairs()``, ``counter_matrix``, ``resources()`` and
``with_pitch()``: the ring crossbar and every multistage crossbar qualify.
"""

from __future__ import annotations

import csv
import io
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.optimize import brentq

from onoc_xbar.crossbars import build_crossbar
from onoc_xbar.errors import DegenerateFrontier, MismatchedRuns, MissingCoefficient
from onoc_xbar.geometry import GridArchitecture
from onoc_xbar.loss_model import COEFFICIENTS, FRONTIER_DROPS, LossParams
from onoc_xbar.ornoc import OrnocML

THREADS_ENV = "ONOC_XBAR_THREADS"

# CLI name -> (kind, layer mode, layout style); ``None`` kind is the ring
TOPOLOGIES = {"ornoc-ml": (None, "multi", "-")}
for _kind in ("matrix", "lambda-router", "snake"):
    for _style in ("a", "b"):
        TOPOLOGIES[f"{_kind}-ml-{_style}"] = (_kind, "multi", _style.upper())
        TOPOLOGIES[f"{_kind}-{_style}"] = (_kind, "single", _style.upper())

# the ring crossbar and the six multi-layer crossbars
SEVEN = (
    "ornoc-ml",
    "matrix-ml-a", "matrix-ml-b",
    "lambda-router-ml-a", "lambda-router-ml-b",
    "snake-ml-a", "snake-ml-b",
)

RESULT_COLUMNS = (
    "topology", "layout", "layer_mode", "grid", "pitch_mm", "param_set",
    "worst_db", "avg_db", "wavelengths", "waveguides", "mr_count",
)


def fmt(value) -> str:
    """Fixed CSV number format: 6 significant digits."""
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{float(value):.6g}"


def build_topology(name: str, grid: GridArchitecture, max_wavelengths: int = 64):
    if name not in TOPOLOGIES:
        raise KeyError(f"unknown topology {name!r}; choose from {sorted(TOPOLOGIES)}")
    kind, mode, style = TOPOLOGIES[name]
    if kind is None:
        return OrnocML(grid, max_wavelengths)
    return build_crossbar(kind, grid, mode, style, max_wavelengths=max_wavelengths)


def topology_name(inst) -> str:
    """CLI name of an instance, e.g. ``matrix-ml-b`` or ``ornoc-ml``."""
    return inst.label


def worker_count() -> int:
    raw = os.environ.get(THREADS_ENV, "0").strip() or "0"
    try:
        value = int(raw)
    except ValueError:
        raise ValueError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    if value < 0:
        raise ValueError(f"{THREADS_ENV} must be >= 0, got {value}")
    return value or min(8, os.cpu_count() or 1)


def parallel_map(fn: Callable, items: Sequence, workers: Optional[int] = None) -> list:
    """Map in a thread pool; results keep the input order."""
    items = list(items)
    workers = worker_count() if workers is None else workers
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


@dataclass(frozen=True)
class EvaluationResult:
    topology: str
    layout: str
    layer_mode: str
    grid: int
    pitch_mm: float
    param_set: str
    worst_case_db: float
    average_db: float
    pairs: tuple = field(repr=False)
    losses: np.ndarray = field(repr=False)
    resources: dict = field(repr=False, default_factory=dict)

    def row(self) -> list:
        return [
            self.topology, self.layout, self.layer_mode, self.grid, fmt(self.pitch_mm), self.param_set,
            fmt(self.worst_case_db), fmt(self.average_db),
            self.resources.get("wavelengths", ""), self.resources.get("waveguides", ""),
            self.resources.get("mr_count", ""),
        ]

    def pair_csv(self) -> str:
        """Per-pair losses, with enough digits to re-aggregate to 1e-9 dB."""
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["src", "dst", "loss_db"])
        for (src, dst), loss in zip(self.pairs, self.losses):
            writer.writerow([src, dst, f"{loss:.12g}"])
        return out.getvalue()


def results_csv(results: Sequence[EvaluationResult]) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(RESULT_COLUMNS)
    for r in results:
        writer.writerow(r.row())
    return out.getvalue()


def pair_losses(counters: np.ndarray, params: LossParams) -> np.ndarray:
    """Loss of every row of a counter matrix.

    Terms are added in the same order as ``compute_total_loss`` so each entry
    equals the scalar result bit for bit.
    """
    total = np.zeros(len(counters))
    for j, key in enumerate(COEFFICIENTS):
        column = counters[:, j]
        if np.any(column):
            total = total + params.coefficient(key) * column
    return total


def evaluate(inst, params: LossParams) -> EvaluationResult:
    """Worst-case and average loss over all ordered pairs of distinct cores."""
    losses = pair_losses(inst.counter_matrix, params)
    return EvaluationResult(
        topology=topology_name(inst),
        layout=inst.layout_style,
        layer_mode=inst.layer_mode,
        grid=inst.grid.n,
        pitch_mm=inst.grid.pitch_mm,
        param_set=params.name,
        worst_case_db=float(losses.max()),
        average_db=float(losses.mean()),
        pairs=tuple(inst.pairs()),
        losses=losses,
        resources=inst.resources(),
    )


def sweep_distance(topologies: Sequence, pitches: Sequence[float], params: LossParams,
                   workers: Optional[int] = None) -> list[EvaluationResult]:
    """One result per (topology, pitch), topologies outermost."""
    pitches = [float(p) for p in pitches]
    if not pitches or any(not p > 0 for p in pitches):
        raise ValueError("pitches must be a nonempty list of positive values")
    jobs = [(inst, p) for inst in topologies for p in pitches]
    return parallel_map(lambda job: evaluate(job[0].with_pitch(job[1]), params), jobs, workers)


def calibrate_pitch(inst, params: LossParams, target_db: float, bracket=(0.05, 20.0)) -> float:
    """Pitch in mm at which the worst-case loss of ``inst`` equals ``target_db``."""

    def gap(pitch):
        return evaluate(inst.with_pitch(pitch), params).worst_case_db - target_db

    lo, hi = bracket
    if gap(lo) > 0 or gap(hi) < 0:
        raise ValueError(f"target {target_db} dB is not reachable for pitches in {bracket} mm")
    return float(brentq(gap, lo, hi, xtol=1e-12))


# -- break-even frontier -------------------------------------------------------


@dataclass(frozen=True)
class FrontierPoint:
    p_crossing: float
    p_propagation: Optional[float]
    status: str  # crossover, crossover-inverted, a-wins, b-wins, tie


def _affine_parts(inst, drops: dict):
    """Per-pair (slope in dB/cm, crossings, constant dB) of the loss in (p_prop, p_cross)."""
    m = inst.counter_matrix
    const = np.zeros(len(m))
    for j, key in enumerate(COEFFICIENTS[2:], start=2):
        if np.any(m[:, j]):
            if drops.get(key) is None:
                raise MissingCoefficient(key, "frontier drops")
            const = const + drops[key] * m[:, j]
    return m[:, 0], m[:, 1], const


def _envelope_breaks(slope, intercept, lo, hi) -> list:
    """Breakpoints in (lo, hi) of the upper envelope of lines ``slope*x + intercept``."""
    best = {}
    for s, c in zip(slope, intercept):
        if s not in best or c > best[s]:
            best[s] = c
    lines = sorted(best.items())
    hull = []  # (slope, intercept, x from which it is on top)
    for s, c in lines:
        while hull:
            s0, c0, x0 = hull[-1]
            x = (c0 - c) / (s - s0)
            if x <= x0:
                hull.pop()
            else:
                hull.append((s, c, x))
                break
        if not hull:
            hull.append((s, c, -np.inf))
    return [x for _, _, x in hull[1:] if lo < x < hi]


def worst_case_at(parts, p_crossing: float, p_propagation: float) -> float:
    slope, cross, const = parts
    return float((p_propagation * slope + p_crossing * cross + const).max())


def breakeven_frontier(
    inst_a,
    inst_b,
    p_crossings: Optional[Sequence[float]] = None,
    drops: dict = FRONTIER_DROPS,
    p_propagation_range: tuple = (0.0, 2.0),
) -> list[FrontierPoint]:
    """For each crossing loss, the propagation loss at which both worst cases are equal.

    The worst case of each topology is the upper envelope of per-pair affine
    functions, so on every interval between envelope breakpoints the gap is
    linear and its root is exact. Below the reported value ``inst_a`` has the
    lower worst case (status ``crossover``); ``crossover-inverted`` means it
    wins above it instead. When the gap keeps one sign the status is
    ``a-wins`` or ``b-wins`` and no value is reported.
    """
    if p_crossings is None:
        p_crossings = np.linspace(0.0, 0.2, 21)
    pa, pb = _affine_parts(inst_a, drops), _affine_parts(inst_b, drops)
    if _same_structure(pa, pb):
        raise DegenerateFrontier("both topologies have identical loss structure")
    lo, hi = p_propagation_range
    points = []
    for pc in p_crossings:
        pc = float(pc)
        xs = sorted(
            {lo, hi}
            | set(_envelope_breaks(pa[0], pc * pa[1] + pa[2], lo, hi))
            | set(_envelope_breaks(pb[0], pc * pb[1] + pb[2], lo, hi))
        )

        def gap(pp):
            return worst_case_at(pa, pc, pp) - worst_case_at(pb, pc, pp)

        values = [gap(x) for x in xs]
        points.append(_first_crossover(pc, xs, values))
    return points


def _first_crossover(pc: float, xs: list, values: list) -> FrontierPoint:
    """First zero of a piecewise-linear gap sampled at its breakpoints."""
    signs = np.sign(values)
    if not signs.any():
        return FrontierPoint(pc, None, "tie")
    for i, (x, v) in enumerate(zip(xs, values)):
        if v == 0:
            root = x
        elif i + 1 < len(xs) and signs[i] * signs[i + 1] < 0:
            root = x + (xs[i + 1] - x) * v / (v - values[i + 1])
        else:
            continue
        # the topology with the lower worst case just above the root wins above it
        after = [s for s, xx in zip(signs, xs) if xx > root and s != 0]
        before = [s for s, xx in zip(signs, xs) if xx < root and s != 0]
        a_wins_above = after[0] < 0 if after else before[-1] > 0
        return FrontierPoint(pc, float(root), "crossover-inverted" if a_wins_above else "crossover")
    return FrontierPoint(pc, None, "a-wins" if signs.max() < 0 else "b-wins")


def _same_structure(pa, pb) -> bool:
    rows_a = {tuple(np.round(r, 12)) for r in np.column_stack(pa)}
    rows_b = {tuple(np.round(r, 12)) for r in np.column_stack(pb)}
    return rows_a == rows_b


def classify_point(inst_a, inst_b, p_crossing: float, p_propagation: float, drops: dict = FRONTIER_DROPS) -> dict:
    """Worst cases of both topologies at one (crossing, propagation) point."""
    wa = worst_case_at(_affine_parts(inst_a, drops), p_crossing, p_propagation)
    wb = worst_case_at(_affine_parts(inst_b, drops), p_crossing, p_propagation)
    region = "a wins" if wa < wb else ("b wins" if wb < wa else "tie")
    return {"worst_a": wa, "worst_b": wb, "delta": wa - wb, "region": region}


def frontier_csv(points: Sequence[FrontierPoint]) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["p_crossing_db", "p_propagation_star_db_per_cm", "status"])
    for p in points:
        writer.writerow([fmt(p.p_crossing), "" if p.p_propagation is None else fmt(p.p_propagation), p.status])
    return out.getvalue()


# -- improvement percentages ---------------------------------------------------


@dataclass(frozen=True)
class Improvement:
    grid: int
    metric: str  # worst or average
    definition: str  # best-competitor or mean-of-competitors
    percent: float


def improvement_report(baseline: Sequence[EvaluationResult], ornoc: Sequence[EvaluationResult]) -> list[Improvement]:
    """Percent improvement ``(baseline - ornoc) / baseline`` per scale and metric.

    Two definitions are emitted: against the best competitor for that metric,
    and the mean of the improvements over all competitors. Rows with grid 0
    hold the mean over scales.
    """
    def key(r):
        return (r.grid, round(r.pitch_mm, 12), r.param_set)

    ours = {}
    for r in ornoc:
        if key(r) in ours:
            raise MismatchedRuns(f"two ring results for {key(r)}")
        ours[key(r)] = r
    theirs = {}
    for r in baseline:
        theirs.setdefault(key(r), []).append(r)
    if set(ours) != set(theirs):
        raise MismatchedRuns(
            f"runs differ: ring covers {sorted(ours)}, competitors cover {sorted(theirs)}"
        )
    rows = []
    for k in sorted(ours):
        o = ours[k]
        for metric, get in (("worst", lambda r: r.worst_case_db), ("average", lambda r: r.average_db)):
            values = [get(r) for r in theirs[k]]
            best = min(values)
            gains = [(v - get(o)) / v for v in values]
            rows.append(Improvement(k[0], metric, "best-competitor", 100.0 * (best - get(o)) / best))
            rows.append(Improvement(k[0], metric, "mean-of-competitors", 100.0 * float(np.mean(gains))))
    means = []
    for metric in ("worst", "average"):
        for definition in ("best-competitor", "mean-of-competitors"):
            sel = [r.percent for r in rows if r.metric == metric and r.definition == definition]
            means.append(Improvement(0, metric, definition, float(np.mean(sel))))
    return rows + means


def improvement_csv(rows: Sequence[Improvement]) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["grid", "metric", "definition", "improvement_percent"])
    for r in rows:
        writer.writerow(["mean" if r.grid == 0 else r.grid, r.metric, r.definition, fmt(r.percent)])
    return out.getvalue()
