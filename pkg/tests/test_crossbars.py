import warnings

import numpy as np
import pytest

from onoc_xbar.crossbars import (
    build_crossbar,
    build_mesh,
    closed_form_crossings,
    mesh_crossing_table,
    worst_case_crossings,
)
from onoc_xbar.errors import SelfCommunication, UnsupportedSize, Unroutable
from onoc_xbar.geometry import GridArchitecture, check_collinear_overlaps, clip_waveguide, count_crossings_naive


def stages(kind, ports):
    """Comparator positions per time step, written out from the mesh definitions."""
    if kind == "lambda-router":
        return [[p for p in range(t % 2, ports - 1, 2)] for t in range(ports)]
    steps = [[] for _ in range(2 * ports)]
    for k in range(ports - 1):
        for p in range(ports - 1 - k):
            steps[2 * k + p].append(p)
    return steps


def simulate(kind, ports, layer_of):
    """Same-layer crossings of every (input, output) route by stepping signals through the mesh."""
    at = list(range(ports))
    history = []  # (upper line, lower line) per comparator, in firing order
    for step in stages(kind, ports):
        for p in step:
            history.append((at[p], at[p + 1]))
            at[p], at[p + 1] = at[p + 1], at[p]
    final_line = {pos: line for pos, line in enumerate(at)}
    table = {}
    for i in range(ports):
        for o in range(ports):
            if i == o:
                continue
            target = final_line[o]
            line, count, dropped = i, 0, target == i
            for a, b in history:
                if line not in (a, b):
                    continue
                other = b if line == a else a
                if not dropped and other == target:
                    line, dropped = target, True
                    continue
                count += layer_of(line) == layer_of(other)
            table[i, o] = count
    return table


@pytest.mark.parametrize("kind", ["lambda-router", "snake"])
@pytest.mark.parametrize("ports", [2, 3, 4, 5, 8, 9, 16])
@pytest.mark.parametrize("mode", ["single", "multi"])
def test_crossing_table_matches_simulation(kind, ports, mode):
    layer_of = (lambda line: 1) if mode == "single" else (lambda line: 1 + line % 2)
    expected = simulate(kind, ports, layer_of)
    table = mesh_crossing_table(kind, ports, mode)
    for (i, o), count in expected.items():
        assert table[i, o] == count


@pytest.mark.parametrize("m", [2, 3, 4])
def test_single_layer_closed_forms(m):
    assert worst_case_crossings("lambda-router", m) == closed_form_crossings("lambda-router", m) == m * m - 1
    assert worst_case_crossings("snake", m) == 2 * m * m - 5


def test_multi_layer_reduction():
    assert worst_case_crossings("lambda-router", 4, "multi") == 12
    assert worst_case_crossings("snake", 4, "multi") == 13
    assert worst_case_crossings("matrix", 4, "multi") == 0


@pytest.mark.parametrize("kind", ["lambda-router", "snake"])
def test_mesh_connects_every_pair_once(kind):
    mesh = build_mesh(kind, 9)
    assert len(mesh.comparators) == 9 * 8 // 2
    assert sorted(mesh.line_at_output.values()) == list(range(9))
    with pytest.raises(SelfCommunication):
        mesh.route(3, 3)


@pytest.mark.parametrize("kind", ["matrix", "lambda-router", "snake"])
def test_eight_by_eight_wavelengths(kind):
    inst = build_crossbar(kind, GridArchitecture(8, 2.5), "multi", "B")
    assert inst.wavelengths == (63 if kind == "matrix" else 64)


@pytest.mark.parametrize("kind", ["matrix", "lambda-router", "snake"])
@pytest.mark.parametrize("n", [2, 3, 4])
def test_wavelengths_distinct_per_sender_and_receiver(kind, n):
    inst = build_crossbar(kind, GridArchitecture(n, 1.0), "multi", "B")
    cores = range(1, n * n + 1)
    for c in cores:
        sent = [inst.wavelength(c, d) for d in cores if d != c]
        received = [inst.wavelength(s, c) for s in cores if s != c]
        assert len(set(sent)) == len(sent)
        assert len(set(received)) == len(received)


@pytest.mark.parametrize("n", [2, 3, 5, 8])
@pytest.mark.parametrize("kind", ["matrix", "lambda-router", "snake"])
def test_resource_counts(n, kind):
    r = build_crossbar(kind, GridArchitecture(n, 1.0), "multi", "B").resources()
    channels = (n * n - 1) * n * n
    assert r["lasers"] == r["photodetectors"] == r["receiver_mrs"] == channels
    assert r["waveguides"] == (2 * n * n if kind == "matrix" else n * n)


@pytest.mark.parametrize(
    "kind,mode", [("matrix", "multi"), ("lambda-router", "multi"), ("lambda-router", "single"),
                  ("snake", "multi"), ("snake", "single")]
)
@pytest.mark.parametrize("n", [2, 3, 4])
def test_layout_a_has_no_access_crossings(kind, mode, n):
    inst = build_crossbar(kind, GridArchitecture(n, 1.0), mode, "A")
    for src, dst in inst.pairs():
        assert inst.access_crossings(src, dst) == 0


def test_single_layer_matrix_a_is_unroutable():
    with pytest.raises(Unroutable):
        build_crossbar("matrix", GridArchitecture(3, 1.0), "single", "A")


@pytest.mark.parametrize("kind", ["matrix", "lambda-router", "snake"])
@pytest.mark.parametrize("mode", ["single", "multi"])
def test_layout_b_is_clean(kind, mode):
    inst = build_crossbar(kind, GridArchitecture(5, 1.0), mode, "B")
    layout = inst.layout()
    layout.check_invariants()
    check_collinear_overlaps(layout.segments)


def test_matrix_path_matches_geometric_recount():
    n = 3
    inst = build_crossbar("matrix", GridArchitecture(n, 1.0), "single", "B")
    layout = inst.layout()
    segs = layout.segments

    def wg_length(wg):
        return sum(s.length for s in layout.waveguide(wg))

    def at(wg, x=None, y=None):
        # arc position along a straight block line of the point with the given coordinate
        seg = layout.waveguide(wg)[0]
        return abs(x - seg.x1) if x is not None else abs(y - seg.y1)

    for src, dst in [(1, 9), (9, 1), (5, 2), (3, 7)]:
        i, o = src - 1, dst - 1
        col_x = layout.waveguide(f"col-{o}")[0].x1
        row_y = layout.waveguide(f"row-{i}")[0].y1
        pieces = (
            clip_waveguide(layout, f"tx-{src}", 0, wg_length(f"tx-{src}"))
            + clip_waveguide(layout, f"row-{i}", 0, at(f"row-{i}", x=col_x))
            + clip_waveguide(layout, f"col-{o}", at(f"col-{o}", y=row_y), wg_length(f"col-{o}"))
            + clip_waveguide(layout, f"rx-{dst}", 0, wg_length(f"rx-{dst}"))
        )
        path = inst.trace_path(src, dst)
        assert path.n_crossing == count_crossings_naive(segs, pieces)
        assert path.length_cm * 10 == pytest.approx(sum(p.length for p in pieces))
        assert (path.n_drop1, path.n_drop2, path.n_coupler) == (1, 0, 0)


def test_multi_layer_matrix_drops_across_layers():
    inst = build_crossbar("matrix", GridArchitecture(4, 1.0), "multi", "B")
    counters = inst.counter_matrix
    assert np.all(counters[:, 2] == 0) and np.all(counters[:, 3] == 1)
    assert np.all(counters[:, 4] == 1)  # every receiver sits on the upper layer


def test_pitch_rescales_length_only():
    a = build_crossbar("snake", GridArchitecture(4, 1.0), "multi", "B")
    b = a.with_pitch(3.0)
    assert np.allclose(b.counter_matrix[:, 0], 3 * a.counter_matrix[:, 0])
    assert np.array_equal(b.counter_matrix[:, 1:], a.counter_matrix[:, 1:])


def test_multi_layer_never_worse_than_single():
    for kind in ("lambda-router", "snake"):
        single = build_crossbar(kind, GridArchitecture(4, 1.0), "single", "B").counter_matrix[:, 1]
        multi = build_crossbar(kind, GridArchitecture(4, 1.0), "multi", "B").counter_matrix[:, 1]
        assert multi.max() < single.max()


def test_wavelength_cap_warns():
    with pytest.warns(UnsupportedSize):
        build_crossbar("snake", GridArchitecture(4, 1.0), "multi", "B", max_wavelengths=8)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        build_crossbar("snake", GridArchitecture(4, 1.0), "multi", "B")


def test_argument_validation():
    g = GridArchitecture(2, 1.0)
    with pytest.raises(ValueError):
        build_crossbar("butterfly", g)
    with pytest.raises(ValueError):
        build_crossbar("snake", g, "triple")
    with pytest.raises(ValueError):
        build_crossbar("snake", g, "multi", "C")
    inst = build_crossbar("snake", g)
    with pytest.raises(SelfCommunication):
        inst.trace_path(1, 1)
