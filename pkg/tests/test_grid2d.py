import io
import math
import random
import time
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gepase.bench import dijkstra_oracle
from gepase.core import EdgeKey
from gepase.grid2d import (
    BLOCKED,
    MOVES,
    EuclideanMetric,
    GridDomain,
    GridMap,
    MapParseError,
    calibrate_delay,
    feasible_anchors,
    footprint_feasible,
    load_movingai_file,
    load_movingai_map,
    move_costs,
    scale_map,
)

from conftest import random_grid
from oracles import footprint_bruteforce, grid_dijkstra_all, metric_reference, sweep_bruteforce


def _map_text(rows):
    return "type octile\nheight {}\nwidth {}\nmap\n{}\n".format(len(rows), len(rows[0]), "\n".join(rows))


def test_all_free_map():
    m = load_movingai_map(io.BytesIO(_map_text(["..", ".."]).encode()))
    assert (m.width, m.height) == (2, 2)
    assert m.blocked_count() == 0


def test_single_obstacle_glyph():
    m = load_movingai_map(_map_text([".@."]))
    assert m.blocked_count() == 1
    assert m.is_blocked(1, 0)
    assert not m.is_blocked(0, 0) and not m.is_blocked(2, 0)


@pytest.mark.parametrize("glyph", sorted(BLOCKED))
def test_every_obstacle_glyph_blocks(glyph):
    m = load_movingai_map(_map_text(["G" + glyph]))
    assert not m.is_blocked(0, 0) and m.is_blocked(1, 0)


def test_outside_queries_are_blocked():
    m = load_movingai_map(_map_text(["..", ".."]))
    for x, y in [(-1, 0), (0, -1), (2, 0), (0, 2)]:
        assert m.is_blocked(x, y)


def test_city_map_matches_text_scan(city_map_path):
    with open(city_map_path) as fh:
        lines = fh.read().splitlines()
    rows = lines[lines.index("map") + 1 :]
    expected = sum(ch in "@OTWS" for row in rows for ch in row)
    m = load_movingai_file(city_map_path)
    assert m.blocked_count() == expected
    assert (m.width, m.height) == (len(rows[0]), len(rows))


@pytest.mark.parametrize(
    "text, line",
    [
        ("type octile\nheight 2\nwidth x\nmap\n..\n..\n", 4),
        ("type octile\nheight 2\nmap\n..\n..\n", 3),
        ("type octile\nheight 2\nwidth 2\nfoo bar\nmap\n..\n..\n", 4),
        ("type octile\nheight 2\nwidth 2\nmap\n..\n.\n", 6),
        ("type octile\nheight 2\nwidth 2\nmap\n..\n.?\n", 6),
        ("type octile\nheight 3\nwidth 2\nmap\n..\n..\n", 7),
        ("type octile\nheight 1\nwidth 2\nmap\n..\n..\n", 6),
    ],
)
def test_parse_errors_name_the_line(text, line):
    with pytest.raises(MapParseError) as info:
        load_movingai_map(text)
    assert info.value.line == line
    assert f"line {line}" in str(info.value)


def test_roundtrip_through_movingai_text():
    g = random_grid(5, size=12, scale=1)
    assert np.array_equal(load_movingai_map(g.to_movingai()).blocked, g.blocked)


def test_scale_identity():
    g = random_grid(1, scale=1)
    assert np.array_equal(scale_map(g, 1).blocked, g.blocked)


def test_scale_block_replication():
    g = load_movingai_map(_map_text([".@", "@@"]))
    s = scale_map(g, 3)
    assert (s.width, s.height) == (6, 6)
    assert s.blocked_count() == 9 * g.blocked_count()


def test_scale_exhaustive():
    g = random_grid(2, size=16, scale=1)
    s = scale_map(g, 4)
    for y in range(64):
        for x in range(64):
            assert s.is_blocked(x, y) == g.is_blocked(x // 4, y // 4)


def test_scale_rejects_zero():
    with pytest.raises(ValueError):
        scale_map(random_grid(0, scale=1), 0)


def test_footprint_free_map(free_grid):
    assert footprint_feasible(free_grid, 0, 0, 32)


def test_footprint_overlapping_obstacle():
    b = np.zeros((64, 64), dtype=bool)
    b[10, 10] = True
    assert not footprint_feasible(GridMap(b), 0, 0, 32)
    assert footprint_feasible(GridMap(b), 11, 0, 32)


def test_footprint_out_of_bounds(free_grid):
    assert not footprint_feasible(free_grid, 33, 0, 32)
    assert not footprint_feasible(free_grid, -1, 0, 2)


@given(st.integers(0, 10_000), st.integers(-3, 40), st.integers(-3, 40), st.integers(1, 9))
def test_footprint_matches_cell_scan(seed, x, y, side):
    g = random_grid(seed % 50, size=10, density=0.1, scale=4)
    assert footprint_feasible(g, x, y, side) == footprint_bruteforce(g.blocked, x, y, side)


def test_feasible_anchor_mask_matches_cell_scan():
    g = random_grid(9, size=12, density=0.1, scale=3)
    mask = feasible_anchors(g, 5)
    for y in range(g.height):
        for x in range(g.width):
            assert mask[y, x] == footprint_bruteforce(g.blocked, x, y, 5)


def test_move_costs():
    assert move_costs(1) == (1000, 1414)
    assert move_costs(25) == (25000, 35355)
    for step in range(1, 60):
        card, diag = move_costs(step)
        assert card == 1000 * step
        assert diag == round(1000 * math.sqrt(2) * step)


def test_east_move_on_free_map(free_grid):
    d = GridDomain(free_grid, (0, 0))
    succ, cost = d.generate_successor(EdgeKey(d.state_id(0, 0), 0))
    assert d.coords(succ) == (25, 0)
    assert cost == 25000


def test_diagonal_move_on_free_map(free_grid):
    d = GridDomain(free_grid, (0, 0))
    assert MOVES[1] == (1, 1)
    succ, cost = d.generate_successor(EdgeKey(d.state_id(0, 0), 1))
    assert d.coords(succ) == (25, 25)
    assert cost == 35355


def test_wall_on_interpolated_path_only():
    b2 = np.zeros((80, 80), dtype=bool)
    b2[5, 22] = True  # inside footprints anchored at x in [3, 22], clear of x=0 and x=25
    g2 = GridMap(b2)
    d = GridDomain(g2, (0, 0), step=25, footprint=20)
    assert footprint_feasible(g2, 0, 0, 20) and footprint_feasible(g2, 25, 0, 20)
    assert not sweep_bruteforce(b2, 0, 0, 1, 0, 25, 20)
    assert d.generate_successor(EdgeKey(d.state_id(0, 0), 0)) is None


def test_interpolated_sweep_matches_bruteforce_on_random_edges():
    rng = random.Random(11)
    for trial in range(1000):
        g = random_grid(trial % 20, size=16, density=0.12, scale=4)
        d = GridDomain(g, (0, 0), step=rng.choice([1, 3, 7, 12]), footprint=rng.choice([1, 2, 4, 6]))
        x, y = rng.randrange(-2, 64), rng.randrange(-2, 64)
        a = rng.randrange(8)
        dx, dy = MOVES[a]
        expected = sweep_bruteforce(g.blocked, x, y, dx, dy, d.step, d.footprint)
        assert (d.move(x, y, a) is not None) == expected


def test_heuristic_examples(free_grid):
    d = GridDomain(free_grid, (3, 4))
    s = d.state_id(0, 0)
    assert d.pairwise_heuristic(s, s) == 0
    assert d.pairwise_heuristic(s, d.state_id(3, 4)) == 5000
    assert d.heuristic(s) == 5000
    assert d.heuristic(d.goal) == 0


@pytest.mark.parametrize("step", [1, 2, 3, 25, 40])
def test_metric_is_exact_ceiling(step):
    m = EuclideanMetric(step)
    kappa = Fraction(m.num, m.DENOM)
    rng = random.Random(step)
    for _ in range(300):
        dx, dy = rng.randrange(-600, 600), rng.randrange(-600, 600)
        assert m(dx, dy) == metric_reference(kappa, dx, dy)


@pytest.mark.parametrize("step", [1, 2, 3, 5, 25, 40, 99])
def test_metric_never_exceeds_move_cost(step):
    m = EuclideanMetric(step)
    card, diag = move_costs(step)
    assert m(step, 0) <= card and m(step, step) <= diag
    # shrink factor stays close to one
    assert 0.9998 * 500_000 <= m(300, 400) <= 500_000


def test_triangle_inequality_random_triples():
    rng = random.Random(0)
    m = EuclideanMetric(25)
    for _ in range(10_000):
        p = [(rng.randrange(1024), rng.randrange(1024)) for _ in range(3)]
        ab = m(p[0][0] - p[1][0], p[0][1] - p[1][1])
        bc = m(p[1][0] - p[2][0], p[1][1] - p[2][1])
        ac = m(p[0][0] - p[2][0], p[0][1] - p[2][1])
        assert ac <= ab + bc
        assert m(p[0][0] - p[1][0], p[0][1] - p[1][1]) == m(p[1][0] - p[0][0], p[1][1] - p[0][1])


def test_collinear_diagonal_consistency():
    # rounding the diagonal cost down makes plain floor(Euclid) inconsistent here
    d = GridDomain(GridMap(np.zeros((300, 300), dtype=bool)), (250, 250), step=25, footprint=1)
    for k in range(10):
        s = d.state_id(25 * k, 25 * k)
        succ, cost = d.generate_successor(EdgeKey(s, 1))
        assert d.heuristic(s) <= cost + d.heuristic(succ)


@pytest.mark.parametrize("seed", range(3))
def test_consistency_exhaustive_64(seed):
    g = random_grid(seed, size=16, density=0.12, scale=4)
    anchors = np.argwhere(feasible_anchors(g, 4))
    goal = tuple(int(v) for v in anchors[len(anchors) // 2][::-1])
    d = GridDomain(g, goal, step=3, footprint=4)
    for y, x in anchors:
        s = d.state_id(x, y)
        for a in range(8):
            out = d.generate_successor(EdgeKey(s, a))
            if out is not None:
                assert d.heuristic(s) <= out[1] + d.heuristic(out[0])


def test_admissible_against_oracle():
    g = random_grid(4, size=16, density=0.12, scale=4)
    anchors = np.argwhere(feasible_anchors(g, 4))
    start = tuple(int(v) for v in anchors[0][::-1])
    d0 = GridDomain(g, start, step=3, footprint=4)
    dist = grid_dijkstra_all(d0, start)
    assert len(dist) > 50
    for (x, y), c in dist.items():
        d = GridDomain(g, (x, y), step=3, footprint=4)
        assert d.heuristic(d.state_id(*start)) <= c


def test_expensive_labels_are_the_diagonals(free_grid):
    d = GridDomain(free_grid, (0, 0))
    classes = [a.cls.value for a in d.actions()]
    assert classes.count("expensive") == 4 and classes.count("cheap") == 4
    assert all(MOVES[a.index][0] != 0 and MOVES[a.index][1] != 0 for a in d.actions() if a.cls.value == "expensive")


def test_delay_calibration_ratio(city_map_path):
    g = scale_map(load_movingai_file(city_map_path), 4)
    rc = 30
    delay = calibrate_delay(g, rc, step=25, footprint=32, seed=1)
    d = GridDomain(g, (0, 0), delay=delay)
    anchors = np.argwhere(feasible_anchors(g, 32))
    rng = np.random.default_rng(2)
    cheap, exp = [], []
    for i in range(2000):
        y, x = anchors[rng.integers(len(anchors))]
        a = int(rng.integers(8))
        e = EdgeKey(d.state_id(int(x), int(y)), a)
        t = time.perf_counter()
        d.generate_successor(e)
        dt = time.perf_counter() - t
        (exp if a % 2 else cheap).append(dt)
    ratio = np.mean(exp) / np.mean(cheap)
    assert len(cheap) + len(exp) >= 1000
    assert rc / 2 <= ratio <= 2 * rc, ratio


def test_no_delay_below_ratio_one(free_grid):
    assert calibrate_delay(free_grid, 1).iterations == 0


def test_oracle_small_examples():
    g = GridMap(np.zeros((3, 3), dtype=bool))
    assert dijkstra_oracle(g, (0, 0), (0, 0), step=1, footprint=1) == 0
    assert dijkstra_oracle(g, (0, 0), (2, 2), step=1, footprint=1) == 2 * round(1000 * math.sqrt(2))
