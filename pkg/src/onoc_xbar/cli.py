"""Command-line front end: evaluate, sweep, frontier, resources and reproduce.

Exit status: 0 success, 2 bad flags, 3 missing loss coefficient, 4 unroutable
layout, 5 internal failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
import warnings
from pathlib import Path

import numpy as np

from onoc_xbar import analysis as an
from onoc_xbar.crossbars import closed_form_crossings, worst_case_crossings
from onoc_xbar.errors import MissingCoefficient, UnsupportedSize, Unroutable
from onoc_xbar.geometry import GridArchitecture
from onoc_xbar.loss_model import FRONTIER_DROPS, ML_DEFAULTS, builtin_presets, get_preset, load_params

EXIT_BAD_FLAGS = 2
EXIT_MISSING_COEFFICIENT = 3
EXIT_UNROUTABLE = 4
EXIT_INTERNAL = 5

PROG = "onoc-xbar"
DEFAULT_PITCHES = "1,1.5,2,2.5,3"
ALL_TOPOLOGIES = tuple(an.TOPOLOGIES)

# published values the reproduce summary is compared against
PUBLISHED = {
    "ornoc_worst_8x8": 4.5,
    "ornoc_avg_8x8": 2.02,
    "matrix_b_worst_8x8": 4.75,
    "matrix_b_avg_8x8": 4.0,
    "improvement_worst": (22.0, 36.9),
    "improvement_avg": (51.4, 55.2),
    "improvement_avg_8x8": 56.3,
    "wavelengths_8x8": {"matrix-ml-b": 63, "lambda-router-ml-b": 64, "snake-ml-b": 64},
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _positive_float(text):
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not value > 0:
        raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
    return value


def _nonneg_float(text):
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not value >= 0:
        raise argparse.ArgumentTypeError(f"must be non-negative: {text!r}")
    return value


def _grid_side(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 2:
        raise argparse.ArgumentTypeError("grid side must be at least 2")
    return value


def _pitch_list(text):
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad pitch list: {text!r}") from None
    if not values or any(not v > 0 for v in values):
        raise argparse.ArgumentTypeError("pitches must be positive")
    return values


def _topologies(values, default):
    names = []
    for value in values or []:
        names.extend(v.strip() for v in value.split(",") if v.strip())
    names = names or list(default)
    unknown = [n for n in names if n not in an.TOPOLOGIES]
    if unknown:
        raise UsageError(f"unknown topology {unknown[0]!r}; choose from {', '.join(ALL_TOPOLOGIES)}")
    return list(dict.fromkeys(names))


def _add_params(p):
    p.add_argument("--params", default="biberman", help="preset name or key=value parameter file (default: biberman)")
    p.add_argument("--p-propagation", type=_nonneg_float, help="override propagation loss, dB/cm")
    p.add_argument("--p-crossing", type=_nonneg_float, help="override crossing loss, dB")
    p.add_argument("--p-drop1", type=_nonneg_float, help="override same-layer drop loss, dB")
    p.add_argument("--p-drop2", type=_nonneg_float, help="override cross-layer drop loss, dB")
    p.add_argument("--p-coupler", type=_nonneg_float, help="override vertical coupler loss, dB")
    p.add_argument(
        "--strict-params", action="store_true",
        help="do not fill unpublished p_drop2/p_coupler with 1 dB/0.1 dB",
    )


def _add_common(p, grid_default, pitch=True):
    p.add_argument("--grid", type=_grid_side, default=grid_default, help=f"cores per side (default: {grid_default})")
    if pitch:
        p.add_argument("--pitch-mm", type=_positive_float, default=2.5, help="inter-core distance (default: 2.5)")
    p.add_argument("--max-wavelengths", type=int, default=64, help="wavelengths per waveguide (default: 64)")
    p.add_argument("--out", type=Path, help="output directory (default: print to stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog=PROG, description="Loss and resource exploration of optical crossbars on one or two layers.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    names = ", ".join(ALL_TOPOLOGIES)

    p = sub.add_parser("evaluate", help="worst-case and average loss of topologies")
    p.add_argument("--topology", action="append", help=f"one or more of: {names} (repeatable, comma lists ok)")
    _add_common(p, 8)
    _add_params(p)
    p.add_argument("--pairs", action="store_true", help="also write per-pair losses (needs --out)")

    p = sub.add_parser("sweep", help="losses over a range of inter-core distances")
    p.add_argument("--topology", action="append", help="topologies (default: ring plus six multi-layer crossbars)")
    _add_common(p, 6, pitch=False)
    p.add_argument("--pitches", type=_pitch_list, default=_pitch_list(DEFAULT_PITCHES), help="comma list of pitches in mm")
    _add_params(p)

    p = sub.add_parser("frontier", help="break-even propagation loss against crossing loss")
    p.add_argument("--a", default="ornoc-ml", help="topology a (default: ornoc-ml)")
    p.add_argument("--b", default="matrix-ml-b", help="topology b (default: matrix-ml-b)")
    _add_common(p, 8)
    p.add_argument("--p-crossing-max", type=_nonneg_float, default=0.2, help="largest crossing loss sampled, dB")
    p.add_argument("--samples", type=int, default=21, help="number of crossing-loss samples")
    p.add_argument("--p-propagation-max", type=_positive_float, default=2.0, help="search range end, dB/cm")
    p.add_argument("--p-drop1", type=_nonneg_float, default=FRONTIER_DROPS["p_drop1"])
    p.add_argument("--p-drop2", type=_nonneg_float, default=FRONTIER_DROPS["p_drop2"])
    p.add_argument("--p-coupler", type=_nonneg_float, default=FRONTIER_DROPS["p_coupler"])

    p = sub.add_parser("resources", help="lasers, detectors, MRs, wavelengths and waveguides")
    p.add_argument("--topology", action="append", help="topologies (default: all)")
    _add_common(p, 8, pitch=False)

    p = sub.add_parser("reproduce", help="run every experiment family and compare with published values")
    p.add_argument("--out", type=Path, required=True, help="output directory")
    p.add_argument("--pitch-mm", type=_positive_float, default=2.5, help="pitch for the scale comparison")
    p.add_argument("--max-wavelengths", type=int, default=64)
    return parser


def resolve_params(args):
    source = args.params
    path = Path(source)
    try:
        params = load_params(path) if path.is_file() else get_preset(source)
    except (KeyError, ValueError) as exc:
        raise UsageError(str(exc).strip("'\"")) from None
    try:
        params = params.with_overrides(
            p_propagation=args.p_propagation, p_crossing=args.p_crossing, p_drop1=args.p_drop1,
            p_drop2=args.p_drop2, p_coupler=args.p_coupler,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return params if args.strict_params else params.with_defaults(ML_DEFAULTS)


def _csv_text(header, rows) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return out.getvalue()


class _Output:
    """Collects named CSV files; writes them at the end (to a directory or stdout)."""

    def __init__(self, directory):
        self.directory = directory
        self.files = {}
        self.notes = []

    def add(self, name, text):
        self.files[name] = text

    def flush(self, stream):
        if self.directory is None:
            stream.write("\n".join(self.files.values()))
            return
        self.directory.mkdir(parents=True, exist_ok=True)
        for name, text in self.files.items():
            with open(self.directory / name, "w", newline="") as fh:
                fh.write(text)


def _build(name, grid, max_wavelengths):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UnsupportedSize)
        return an.build_topology(name, grid, max_wavelengths)


def cmd_evaluate(args, out):
    names = _topologies(args.topology, ["ornoc-ml"])
    if args.pairs and args.out is None:
        raise UsageError("--pairs needs --out")
    params = resolve_params(args)
    grid = GridArchitecture(args.grid, args.pitch_mm)
    results = [an.evaluate(_build(n, grid, args.max_wavelengths), params) for n in names]
    out.add("results.csv", an.results_csv(results))
    if args.pairs:
        for r in results:
            out.add(f"pairs-{r.topology}.csv", r.pair_csv())


def _sweep_csv(results):
    rows = []
    for r in results:
        grid = GridArchitecture(r.grid, r.pitch_mm)
        rows.append(r.row() + [an.fmt(grid.die_side_mm()), an.fmt(grid.die_area_cm2())])
    return _csv_text(an.RESULT_COLUMNS + ("die_side_mm", "die_area_cm2"), rows)


def cmd_sweep(args, out):
    names = _topologies(args.topology, an.SEVEN)
    params = resolve_params(args)
    grid = GridArchitecture(args.grid, 1.0)
    insts = [_build(n, grid, args.max_wavelengths) for n in names]
    out.add("sweep.csv", _sweep_csv(an.sweep_distance(insts, args.pitches, params)))


POINT_COLUMNS = ("preset", "p_crossing_db", "p_propagation_db_per_cm", "worst_a_db", "worst_b_db", "delta_db", "region")


def _frontier_files(a, b, drops, samples, pc_max, pp_max):
    pcs = np.linspace(0.0, pc_max, samples)
    points = an.breakeven_frontier(a, b, pcs, drops, (0.0, pp_max))
    rows = []
    for preset in builtin_presets():
        c = an.classify_point(a, b, preset.p_crossing, preset.p_propagation, drops)
        rows.append([
            preset.name, an.fmt(preset.p_crossing), an.fmt(preset.p_propagation),
            an.fmt(c["worst_a"]), an.fmt(c["worst_b"]), an.fmt(c["delta"]), c["region"],
        ])
    return an.frontier_csv(points), _csv_text(POINT_COLUMNS, rows)


def cmd_frontier(args, out):
    for name in (args.a, args.b):
        _topologies([name], [])
    if args.samples < 1:
        raise UsageError("--samples must be at least 1")
    grid = GridArchitecture(args.grid, args.pitch_mm)
    a, b = _build(args.a, grid, args.max_wavelengths), _build(args.b, grid, args.max_wavelengths)
    drops = {"p_drop1": args.p_drop1, "p_drop2": args.p_drop2, "p_coupler": args.p_coupler}
    frontier, points = _frontier_files(a, b, drops, args.samples, args.p_crossing_max, args.p_propagation_max)
    out.add("frontier.csv", frontier)
    out.add("frontier_points.csv", points)


RESOURCE_COLUMNS = (
    "topology", "layout", "layer_mode", "grid", "lasers", "photodetectors", "receiver_mrs",
    "mr_count", "wavelengths", "waveguides",
)


def _resource_row(inst):
    r = inst.resources()
    return [an.topology_name(inst), inst.layout_style, inst.layer_mode, inst.grid.n] + [
        r[k] for k in RESOURCE_COLUMNS[4:]
    ]


def cmd_resources(args, out):
    names = _topologies(args.topology, ALL_TOPOLOGIES)
    grid = GridArchitecture(args.grid, 1.0)
    rows = []
    for name in names:
        if args.topology:
            inst = _build(name, grid, args.max_wavelengths)
        else:
            # the default list skips layouts that cannot be routed
            skipped = []
            inst = _try_build(name, grid, args.max_wavelengths, skipped)
            for topology, _, _, reason in skipped:
                out.notes.append(f"skipping {topology}: {reason}")
        if inst is not None:
            rows.append(_resource_row(inst))
    out.add("resources.csv", _csv_text(RESOURCE_COLUMNS, rows))


# -- reproduce ----------------------------------------------------------------

SCALES = (2, 4, 6, 8)
FRONTIER_PITCHES = (1.0, 2.5)


def _try_build(name, grid, max_wavelengths, skipped, preset="-"):
    try:
        return _build(name, grid, max_wavelengths)
    except Unroutable as exc:
        skipped.append([name, grid.n, preset, f"unroutable: {exc}"])
        return None


def cmd_reproduce(args, out):
    pitch = args.pitch_mm
    mw = args.max_wavelengths
    presets = [p.with_defaults(ML_DEFAULTS) for p in builtin_presets()]
    biberman = presets[0]
    skipped = []
    summary = []

    def note(item, computed, published="", extra=""):
        if published == "":
            delta = ""
        else:
            delta = an.fmt(float(computed) - float(published))
        summary.append([item, an.fmt(computed), "" if published == "" else an.fmt(published), delta, extra])

    # scale comparison over every topology and preset
    jobs = []
    for n in SCALES:
        grid = GridArchitecture(n, pitch)
        for name in ALL_TOPOLOGIES:
            inst = _try_build(name, grid, mw, skipped)
            if inst is not None:
                jobs.append((name, n, inst))
    results, by_key = [], {}
    for name, n, inst in jobs:
        for params in presets:
            try:
                r = an.evaluate(inst, params)
            except MissingCoefficient as exc:
                skipped.append([name, n, params.name, f"missing coefficient {exc.name}"])
                continue
            results.append(r)
            by_key[name, n, params.name] = r
    out.add("scales.csv", an.results_csv(results))

    # distance sweep on 6x6
    grid6 = GridArchitecture(6, 1.0)
    sweep = an.sweep_distance([_build(n, grid6, mw) for n in an.SEVEN], _pitch_list(DEFAULT_PITCHES), biberman)
    out.add("sweep.csv", _sweep_csv(sweep))

    # break-even frontier on 8x8
    for fp in FRONTIER_PITCHES:
        grid8 = GridArchitecture(8, fp)
        a, b = _build("ornoc-ml", grid8, mw), _build("matrix-ml-b", grid8, mw)
        frontier, points = _frontier_files(a, b, FRONTIER_DROPS, 21, 0.2, 2.0)
        out.add(f"frontier_{fp:g}mm.csv", frontier)
        out.add(f"frontier_points_{fp:g}mm.csv", points)
        if fp == 2.5:
            k = an.classify_point(a, b, 0.12, 1.0)
            note("kirman_point_abs_delta_worst_db_2.5mm", abs(k["delta"]), 0.0, "equal worst cases published")

    # resources on the largest scale
    grid8 = GridArchitecture(8, pitch)
    rows = []
    for name in ALL_TOPOLOGIES:
        inst = _try_build(name, grid8, mw, [])
        if inst is not None:
            rows.append(_resource_row(inst))
    out.add("resources.csv", _csv_text(RESOURCE_COLUMNS, rows))

    # comparison with published values
    for key, name, metric in (
        ("ornoc_worst_8x8", "ornoc-ml", "worst_case_db"),
        ("ornoc_avg_8x8", "ornoc-ml", "average_db"),
        ("matrix_b_worst_8x8", "matrix-ml-b", "worst_case_db"),
        ("matrix_b_avg_8x8", "matrix-ml-b", "average_db"),
    ):
        note(f"{key}_biberman_{pitch:g}mm", getattr(by_key[name, 8, biberman.name], metric), PUBLISHED[key])
    ring8 = _build("ornoc-ml", grid8, mw)
    calibrated = an.calibrate_pitch(ring8, biberman, PUBLISHED["ornoc_worst_8x8"])
    note("calibrated_pitch_mm", calibrated, "", "pitch at which the ring worst case is 4.5 dB")
    for key, name, metric in (
        ("matrix_b_worst_8x8", "matrix-ml-b", "worst_case_db"),
        ("matrix_b_avg_8x8", "matrix-ml-b", "average_db"),
        ("ornoc_avg_8x8", "ornoc-ml", "average_db"),
    ):
        inst = _build(name, GridArchitecture(8, calibrated), mw)
        note(f"{key}_biberman_calibrated", getattr(an.evaluate(inst, biberman), metric), PUBLISHED[key])
    for name, expected in PUBLISHED["wavelengths_8x8"].items():
        note(f"wavelengths_8x8_{name}", _build(name, grid8, mw).wavelengths, expected)
    for kind, m in (("lambda-router", 4), ("snake", 4)):
        note(f"worst_crossings_{kind}_{m}x{m}_single", worst_case_crossings(kind, m), closed_form_crossings(kind, m))
    note("worst_crossings_lambda-router_4x4_multi", worst_case_crossings("lambda-router", 4, "multi"), 12)
    note("worst_crossings_snake_4x4_multi", worst_case_crossings("snake", 4, "multi"), 13)

    ring = [by_key["ornoc-ml", n, biberman.name] for n in SCALES]
    rivals = [by_key[name, n, biberman.name] for n in SCALES for name in an.SEVEN[1:] if (name, n, biberman.name) in by_key]
    improvements = an.improvement_report(rivals, ring)
    out.add("improvements.csv", an.improvement_csv(improvements))
    for imp in improvements:
        if imp.grid == 0:
            best, mean = PUBLISHED["improvement_worst" if imp.metric == "worst" else "improvement_avg"]
            published = best if imp.definition == "best-competitor" else mean
            note(f"improvement_{imp.metric}_{imp.definition}_mean_over_scales", imp.percent, published,
                 "published definition not stated")
        elif imp.grid == 8 and imp.metric == "average":
            note(f"improvement_average_{imp.definition}_8x8", imp.percent, PUBLISHED["improvement_avg_8x8"],
                 "published value averages over competitors")

    out.add("skipped.csv", _csv_text(("topology", "grid", "param_set", "reason"), skipped))
    out.add("summary.csv", _csv_text(("item", "computed", "published", "delta", "note"), summary))


COMMANDS = {
    "evaluate": cmd_evaluate,
    "sweep": cmd_sweep,
    "frontier": cmd_frontier,
    "resources": cmd_resources,
    "reproduce": cmd_reproduce,
}


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        if args.command is None:
            raise UsageError("a command is required: " + ", ".join(COMMANDS))
        if getattr(args, "max_wavelengths", 64) < 1:
            raise UsageError("--max-wavelengths must be at least 1")
        an.worker_count()
        out = _Output(args.out)
        COMMANDS[args.command](args, out)
        for note in out.notes:
            print(f"{PROG}: {note}", file=stderr)
        out.flush(stdout)
        return 0
    except UsageError as exc:
        print(f"{PROG}: error: {exc}", file=stderr)
        return EXIT_BAD_FLAGS
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except MissingCoefficient as exc:
        print(f"{PROG}: error: {exc}", file=stderr)
        return EXIT_MISSING_COEFFICIENT
    except Unroutable as exc:
        print(f"{PROG}: error: unroutable layout: {exc}", file=stderr)
        return EXIT_UNROUTABLE
    except ValueError as exc:
        if "ONOC_XBAR_THREADS" in str(exc):
            print(f"{PROG}: error: {exc}", file=stderr)
            return EXIT_BAD_FLAGS
        print(f"{PROG}: internal error: {exc}", file=stderr)
        return EXIT_INTERNAL
    except Exception as exc:  # anything else is a broken invariant
        print(f"{PROG}: internal error: {type(exc).__name__}: {exc}", file=stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
