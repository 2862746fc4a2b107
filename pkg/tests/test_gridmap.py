from collections import deque

import pytest
from hypothesis import given, settings, strategies as st

from gradband.gridmap import (
    GridMap,
    MapError,
    MapGenerationError,
    MapParseError,
    add_baffle,
    from_rows,
    generate_random_map,
    is_connected,
    obstacle_edge_points,
    parse,
    serialize,
)


def flood_fill_connected(grid: GridMap) -> bool:
    """Independent oracle: stack-based flood fill over the glyph rows."""
    rows = serialize(grid).splitlines()[1:]
    n = grid.size_n
    blocked = {(x, n - 1 - r) for r, row in enumerate(rows) for x, g in enumerate(row) if g == "#"}
    stack, seen = [grid.start], {grid.start}
    while stack:
        x, y = stack.pop()
        if (x, y) == grid.goal:
            return True
        for nx, ny in ((x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1)):
            if 0 <= nx < n and 0 <= ny < n and (nx, ny) not in blocked and (nx, ny) not in seen:
                seen.add((nx, ny))
                stack.append((nx, ny))
    return False


def test_empty_map_is_connected():
    grid = generate_random_map(5, 0.0, seed=3)
    assert grid.obstacles == frozenset()
    assert is_connected(grid)


def test_wall_column_disconnects():
    grid = from_rows(["..#.G", "..#..", "..#..", "..#..", "S.#.."])
    assert not is_connected(grid)


def test_generation_is_deterministic():
    a = generate_random_map(10, 0.15, seed=7)
    b = generate_random_map(10, 0.15, seed=7)
    assert serialize(a) == serialize(b)


def test_start_and_goal_quadrants():
    for seed in range(50):
        g = generate_random_map(12, 0.2, seed)
        assert g.start[0] < 6 and g.start[1] < 6
        assert g.goal[0] >= 6 and g.goal[1] >= 6


def test_generated_maps_always_connected():
    for seed in range(1000):
        grid = generate_random_map(10, 0.15, seed)
        assert is_connected(grid)
        assert flood_fill_connected(grid)


def test_is_connected_matches_flood_fill_oracle():
    # dense maps built directly, so disconnected cases occur too
    import numpy as np

    outcomes = set()
    for seed in range(500):
        rng = np.random.default_rng(seed)
        cells = {(int(x), int(y)) for x, y in rng.integers(0, 10, size=(40, 2))}
        cells -= {(0, 0), (9, 9)}
        grid = GridMap(10, frozenset(cells), (0, 0), (9, 9))
        got = is_connected(grid)
        assert got == flood_fill_connected(grid)
        outcomes.add(got)
    assert outcomes == {True, False}


def test_generation_failure_is_explicit():
    with pytest.raises(MapGenerationError):
        generate_random_map(10, 0.9, seed=1)


@pytest.mark.parametrize("bad", [-0.1, 1.0, 1.5])
def test_invalid_density_rejected(bad):
    with pytest.raises(ValueError):
        generate_random_map(10, bad, seed=1)


def test_constructor_invariants():
    with pytest.raises(MapError):
        GridMap(5, frozenset({(0, 0)}), (0, 0), (4, 4))
    with pytest.raises(MapError):
        GridMap(5, frozenset(), (1, 1), (1, 1))
    with pytest.raises(MapError):
        GridMap(5, frozenset({(5, 0)}), (0, 0), (4, 4))


def test_edge_points_single_obstacle():
    grid = GridMap(5, frozenset({(2, 2)}), (0, 0), (4, 4))
    assert obstacle_edge_points(grid) == [(2, 2)]


def test_edge_points_solid_block_excludes_centre():
    block = {(x, y) for x in range(3, 6) for y in range(3, 6)}
    grid = GridMap(9, frozenset(block), (0, 0), (8, 8))
    edges = obstacle_edge_points(grid)
    assert len(edges) == 8
    assert (4, 4) not in edges
    assert set(edges) == block - {(4, 4)}


def test_edge_points_empty_map():
    assert obstacle_edge_points(GridMap(5, frozenset(), (0, 0), (4, 4))) == []


def test_edge_points_row_major_order():
    grid = GridMap(6, frozenset({(4, 1), (1, 1), (2, 4)}), (0, 0), (5, 5))
    assert obstacle_edge_points(grid) == [(1, 1), (4, 1), (2, 4)]


@settings(max_examples=60, deadline=None)
@given(st.integers(5, 20), st.floats(0.0, 0.35), st.integers(0, 2**32))
def test_edge_points_properties(n, density, seed):
    grid = generate_random_map(n, density, seed)
    for cell in obstacle_edge_points(grid):
        assert cell in grid.obstacles
        assert grid.neighbours(cell)


def test_add_baffle_identity_and_counts():
    grid = generate_random_map(10, 0.0, seed=2)
    assert add_baffle(grid, []) == grid
    free = next(c for c in grid.free_cells() if c not in (grid.start, grid.goal))
    assert len(add_baffle(grid, [free]).obstacles) == len(grid.obstacles) + 1


def test_add_baffle_overlap_absorbed():
    base = GridMap(10, frozenset({(2, 5), (4, 5)}), (0, 0), (9, 9))
    cells = [(x, 5) for x in range(1, 6)]
    out = add_baffle(base, cells)
    assert len(out.obstacles) == len(base.obstacles) + 3
    assert base.obstacles == frozenset({(2, 5), (4, 5)})
    assert (out.start, out.goal, out.size_n) == (base.start, base.goal, base.size_n)


def test_add_baffle_rejects_endpoints():
    grid = generate_random_map(10, 0.1, seed=4)
    with pytest.raises(MapError):
        add_baffle(grid, [grid.start])
    with pytest.raises(MapError):
        add_baffle(grid, [grid.goal])


def test_round_trip_random_maps():
    for seed in range(200):
        grid = generate_random_map(5 + seed % 26, (seed % 9) * 0.04, seed)
        text = serialize(grid)
        assert parse(text) == grid
        assert serialize(parse(text)) == text


def test_serialized_layout():
    grid = from_rows(["..G", "...", "S.."])
    text = serialize(grid)
    lines = text.splitlines()
    assert lines[0] == "gridmap v1 3"
    assert len(lines) == 4 and all(len(r) == 3 for r in lines[1:])
    assert grid.start == (0, 0) and grid.goal == (2, 2)
    assert text.endswith("\n") and "\r" not in text


def test_parse_duplicate_start_reports_position():
    with pytest.raises(MapParseError) as err:
        parse("gridmap v1 3\nS..\n.S.\n..G\n")
    assert (err.value.line, err.value.column) == (3, 2)


@pytest.mark.parametrize(
    "text",
    [
        "gridmap v1 3\nS..\n..\n..G\n",  # ragged
        "gridmap v1 3\n...\n...\n..G\n",  # no start
        "gridmap v1 3\nS..\n...\n...\n",  # no goal
        "gridmap v1 3\nS.G\n...\n..G\n",  # duplicate goal
        "gridmap v2 3\nS..\n...\n..G\n",  # header
        "gridmap v1 3\nS..\n.x.\n..G\n",  # glyph
        "gridmap v1 3\nS..\n...\n",  # missing row
    ],
)
def test_parse_errors(text):
    with pytest.raises(MapParseError):
        parse(text)


def test_transpose_swaps_axes():
    grid = generate_random_map(8, 0.2, seed=9)
    t = grid.transpose()
    assert t.start == grid.start[::-1] and t.goal == grid.goal[::-1]
    assert t.transpose() == grid
