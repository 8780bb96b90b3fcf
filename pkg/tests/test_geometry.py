import random

import pytest

from onoc_xbar.errors import CollinearOverlap, SelfCommunication, Unroutable
from onoc_xbar.geometry import (
    GridArchitecture,
    PhotonicLayout,
    Segment,
    check_collinear_overlaps,
    clip_waveguide,
    count_crossings_naive,
    count_effective_crossings,
    crossing_events,
    events_between,
    polyline_length,
    ring_distance,
    ring_distance_units,
    ring_length_units,
    route_manhattan,
    serpentine_index,
    serpentine_polygon,
)


def walk_order(n, layer):
    """Cores in visiting order, built by stepping through the grid."""
    order = []
    for major in range(n):
        minors = range(n) if major % 2 == 0 else range(n - 1, -1, -1)
        for minor in minors:
            row, col = (major, minor) if layer == 1 else (minor, major)
            order.append(row * n + col + 1)
    return order


def random_layout(rng, wires=6, bends=4, layers=(1, 2)):
    layout = PhotonicLayout()
    for w in range(wires):
        x, y = rng.randint(0, 400) / 40 + 0.0007 * w, rng.randint(0, 400) / 40 + 0.0011 * w
        pts = [(x, y)]
        for k in range(bends):
            if k % 2 == 0:
                x = rng.randint(0, 400) / 40 + 0.0007 * w
            else:
                y = rng.randint(0, 400) / 40 + 0.0011 * w
            pts.append((x, y))
        try:
            layout.add_waveguide(f"w{w}", rng.choice(layers), pts)
        except ValueError:
            continue
    return layout


def test_grid_numbering():
    g = GridArchitecture(4, 2.5)
    assert g.cores == 16
    assert g.coords(1) == (0, 0) and g.coords(6) == (1, 1)
    assert g.position(16) == (7.5, 7.5)
    assert g.core_at(3, 2) == 12
    assert len(list(g.pairs())) == 16 * 15
    assert g.die_side_mm() == 10.0 and g.die_area_cm2() == pytest.approx(1.0)
    with pytest.raises(ValueError):
        GridArchitecture(1)
    with pytest.raises(ValueError):
        GridArchitecture(4, 0.0)
    with pytest.raises(ValueError):
        g.coords(17)


@pytest.mark.parametrize("n", range(2, 9))
@pytest.mark.parametrize("layer", [1, 2])
def test_serpentine_matches_walk(n, layer):
    order = walk_order(n, layer)
    assert [serpentine_index(n, c, layer) for c in order] == list(range(n * n))


def test_four_by_four_example_distance():
    assert ring_distance_units(4, 1, 9, 1, "C") == 8
    assert ring_distance(GridArchitecture(4, 2.5), 1, 9, 1, "C") == pytest.approx(20.0)


@pytest.mark.parametrize("n", range(2, 9))
def test_both_directions_cover_the_ring(n):
    length = ring_length_units(n)
    for src in range(1, n * n + 1):
        for dst in range(1, n * n + 1):
            if src == dst:
                continue
            for layer in (1, 2):
                c = ring_distance_units(n, src, dst, layer, "C")
                cc = ring_distance_units(n, src, dst, layer, "CC")
                assert c + cc == length and c > 0 and cc > 0


def test_self_distance_rejected():
    with pytest.raises(SelfCommunication):
        ring_distance_units(3, 2, 2, 1, "C")


@pytest.mark.parametrize("n", [2, 3, 4, 7])
def test_ring_outline_is_closed_rectilinear(n):
    for layer in (1, 2):
        pts = serpentine_polygon(n, layer, lane=0.2)
        closed = pts + [pts[0]]
        for (x1, y1), (x2, y2) in zip(closed, closed[1:]):
            assert x1 == x2 or y1 == y2
        # the outline runs the unit-spaced serpentine plus the closing lane
        extra = 2 * 0.2 if n % 2 == 0 else 4 * 0.2
        assert polyline_length(closed) == pytest.approx(ring_length_units(n) + extra)


def test_counter_matches_naive_on_500_random_layouts():
    rng = random.Random(7)
    checked = 0
    while checked < 500:
        layout = random_layout(rng)
        try:
            check_collinear_overlaps(layout.segments)
        except CollinearOverlap:
            continue
        for wg in layout.waveguide_ids():
            expected = count_crossings_naive(layout.segments, layout.waveguide(wg))
            assert count_effective_crossings(layout, wg) == expected
        checked += 1


def test_events_agree_with_clipped_counts():
    rng = random.Random(11)
    done = 0
    while done < 50:
        layout = random_layout(rng, wires=5)
        try:
            events = crossing_events(layout)
        except CollinearOverlap:
            continue
        for wg in layout.waveguide_ids():
            total = sum(s.length for s in layout.waveguide(wg))
            a, b = sorted(rng.uniform(0, total) for _ in range(2))
            piece = clip_waveguide(layout, wg, a, b)
            assert sum(s.length for s in piece) == pytest.approx(b - a)
            assert events_between(events.get(wg, []), a, b) == count_crossings_naive(layout.segments, piece)
        done += 1


def test_plus_sign_and_other_layer():
    layout = PhotonicLayout()
    layout.add_waveguide("h", 1, [(0, 0), (2, 0)])
    layout.add_waveguide("v", 1, [(1, -1), (1, 1)])
    layout.add_waveguide("up", 2, [(0.5, -1), (0.5, 1)])
    layout.add_waveguide("touch", 1, [(2, -1), (2, 1)])  # meets h only at its end
    assert count_effective_crossings(layout, "h") == 1
    assert count_effective_crossings(layout, "up") == 0
    assert count_effective_crossings(layout, "touch") == 0
    assert crossing_events(layout) == {"h": [1.0], "v": [1.0]}


def test_collinear_overlap_detected():
    layout = PhotonicLayout()
    layout.add_waveguide("a", 1, [(0, 0), (2, 0)])
    layout.add_waveguide("b", 1, [(1, 0), (3, 0)])
    with pytest.raises(CollinearOverlap):
        count_effective_crossings(layout, "a")
    layout.segments[-1] = Segment(2, 1, 0, 3, 0, "b")
    assert count_effective_crossings(layout, "a") == 0


def test_waveguide_validation():
    layout = PhotonicLayout()
    with pytest.raises(ValueError):
        layout.add_waveguide("d", 1, [(0, 0), (1, 1)])
    with pytest.raises(ValueError):
        layout.add_waveguide("z", 3, [(0, 0), (1, 0)])
    with pytest.raises(ValueError):
        layout.add_device("antenna", 0, 0, (1,))


def test_dump_parse_round_trip():
    layout = PhotonicLayout(unit_mm=1.0)
    layout.add_waveguide("w", 2, [(0, 0), (1.5, 0), (1.5, 2)])
    layout.add_device("laser", 0, 0, (1,), 3)
    again = PhotonicLayout.parse(layout.dump())
    assert again.segments == layout.segments
    assert again.devices == layout.devices


def test_shortest_route_is_manhattan():
    pts = route_manhattan((0, 0), (3, 2))
    assert polyline_length(pts) == pytest.approx(5.0)


def test_crossing_averse_route_avoids_existing_waveguides():
    layout = PhotonicLayout()
    layout.add_waveguide("wall", 1, [(1, -2), (1, 2)])
    pts = route_manhattan((0, 0), (2, 0), 1, "crossing-averse", layout)
    layout.add_waveguide("route", 1, pts)
    assert count_effective_crossings(layout, "route") == 0
    assert polyline_length(pts) > 2.0
    # a second-layer route may go straight over the wall
    assert polyline_length(route_manhattan((0, 0), (2, 0), 2, "crossing-averse", layout)) == pytest.approx(2.0)


def test_crossing_averse_route_reports_enclosed_target():
    layout = PhotonicLayout()
    layout.add_waveguide("box", 1, [(-1, -1), (1, -1), (1, 1), (-1, 1), (-1, -1)])
    with pytest.raises(Unroutable):
        route_manhattan((5, 5), (0, 0), 1, "crossing-averse", layout)
