"""Grid-world maps: representation, random generation, connectivity and a text format.

Coordinates are ``(x, y)`` with the origin at the bottom-left cell, x growing
rightward and y growing upward. Movement and connectivity are 4-neighbour.
"""

from __future__ import annotations

import hashlib
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

Cell = tuple[int, int]

FORMAT_HEADER = "gridmap v1"
MAX_GENERATION_ATTEMPTS = 1000
NEIGHBOURS = ((0, 1), (0, -1), (-1, 0), (1, 0))


class MapError(ValueError):
    """A map violates a structural invariant."""


class MapGenerationError(MapError):
    """Rejection sampling could not produce a connected map."""


class MapParseError(MapError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


@dataclass(frozen=True)
class GridMap:
    size_n: int
    obstacles: frozenset[Cell]
    start: Cell
    goal: Cell
    _occ: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        obstacles = frozenset((int(x), int(y)) for x, y in self.obstacles)
        object.__setattr__(self, "obstacles", obstacles)
        object.__setattr__(self, "start", (int(self.start[0]), int(self.start[1])))
        object.__setattr__(self, "goal", (int(self.goal[0]), int(self.goal[1])))
        n = self.size_n
        if n < 2:
            raise MapError(f"size_n must be >= 2, got {n}")
        for label, cell in (("start", self.start), ("goal", self.goal)):
            if not self.in_bounds(cell):
                raise MapError(f"{label} {cell} outside the {n}x{n} box")
            if cell in obstacles:
                raise MapError(f"{label} {cell} is an obstacle")
        if self.start == self.goal:
            raise MapError("start and goal coincide")
        occ = np.zeros((n, n), dtype=bool)
        for cell in obstacles:
            if not self.in_bounds(cell):
                raise MapError(f"obstacle {cell} outside the {n}x{n} box")
            occ[cell] = True
        occ.flags.writeable = False
        object.__setattr__(self, "_occ", occ)

    @property
    def occupancy(self) -> np.ndarray:
        """Read-only boolean array indexed ``[x, y]``; True marks an obstacle."""
        return self._occ

    @property
    def density(self) -> float:
        return len(self.obstacles) / (self.size_n * self.size_n)

    @property
    def map_id(self) -> str:
        return hashlib.sha256(serialize(self).encode()).hexdigest()[:12]

    def in_bounds(self, cell: Cell) -> bool:
        return 0 <= cell[0] < self.size_n and 0 <= cell[1] < self.size_n

    def is_free(self, cell: Cell) -> bool:
        return self.in_bounds(cell) and not self._occ[cell]

    def free_cells(self) -> list[Cell]:
        xs, ys = np.nonzero(~self._occ)
        return [(int(x), int(y)) for x, y in zip(xs, ys)]

    def neighbours(self, cell: Cell) -> list[Cell]:
        x, y = cell
        return [(x + dx, y + dy) for dx, dy in NEIGHBOURS if self.is_free((x + dx, y + dy))]

    def transpose(self) -> GridMap:
        """Mirror across the diagonal, swapping the roles of x and y."""
        return GridMap(
            self.size_n,
            frozenset((y, x) for x, y in self.obstacles),
            (self.start[1], self.start[0]),
            (self.goal[1], self.goal[0]),
        )

    def check(self) -> None:
        """Raise MapError unless the goal is reachable from the start."""
        if not is_connected(self):
            raise MapError("goal is not reachable from start")


def reachable(grid: GridMap, source: Cell) -> np.ndarray:
    """Boolean ``[x, y]`` mask of free cells 4-connected to ``source``."""
    n = grid.size_n
    seen = np.zeros((n, n), dtype=bool)
    if not grid.is_free(source):
        return seen
    seen[source] = True
    queue = deque([source])
    occ = grid.occupancy
    while queue:
        x, y = queue.popleft()
        for dx, dy in NEIGHBOURS:
            nx, ny = x + dx, y + dy
            if 0 <= nx < n and 0 <= ny < n and not occ[nx, ny] and not seen[nx, ny]:
                seen[nx, ny] = True
                queue.append((nx, ny))
    return seen


def is_connected(grid: GridMap) -> bool:
    return bool(reachable(grid, grid.start)[grid.goal])


def shortest_path_length(grid: GridMap, source: Cell | None = None) -> int | None:
    """BFS distance from ``source`` (default: start) to the goal, None if unreachable."""
    source = grid.start if source is None else source
    dist = {source: 0}
    queue = deque([source])
    while queue:
        cell = queue.popleft()
        if cell == grid.goal:
            return dist[cell]
        for nxt in grid.neighbours(cell):
            if nxt not in dist:
                dist[nxt] = dist[cell] + 1
                queue.append(nxt)
    return None


def obstacle_edge_points(grid: GridMap) -> list[Cell]:
    """Obstacle cells with at least one free in-map 4-neighbour, ordered by (y, x)."""
    occ = grid.occupancy
    free = np.pad(~occ, 1, constant_values=False)
    has_free = free[:-2, 1:-1] | free[2:, 1:-1] | free[1:-1, :-2] | free[1:-1, 2:]
    xs, ys = np.nonzero(occ & has_free)
    return sorted(((int(x), int(y)) for x, y in zip(xs, ys)), key=lambda c: (c[1], c[0]))


def add_baffle(grid: GridMap, cells: Iterable[Cell]) -> GridMap:
    cells = [(int(x), int(y)) for x, y in cells]
    for cell in cells:
        if cell == grid.start or cell == grid.goal:
            raise MapError(f"baffle cell {cell} would cover the start or goal")
        if not grid.in_bounds(cell):
            raise MapError(f"baffle cell {cell} outside the map")
    if not cells:
        return grid
    return GridMap(grid.size_n, grid.obstacles | frozenset(cells), grid.start, grid.goal)


def generate_random_map(n: int, obstacle_density: float, seed: int) -> GridMap:
    """Random connected map with the start in the lower-left quadrant and the goal
    in the upper-right one.

    Obstacles are a uniform sample of ``round(density * n * n)`` cells, resampled
    until the goal is reachable; gives up after 1000 attempts.
    """
    if n < 5:
        raise ValueError(f"map size must be >= 5, got {n}")
    if not 0.0 <= obstacle_density < 1.0:
        raise ValueError(f"obstacle density must lie in [0, 1), got {obstacle_density}")
    rng = np.random.default_rng(seed)
    half = n // 2
    start = (int(rng.integers(0, half)), int(rng.integers(0, half)))
    goal = (int(rng.integers(n - half, n)), int(rng.integers(n - half, n)))
    candidates = np.array([(x, y) for x in range(n) for y in range(n) if (x, y) not in (start, goal)])
    n_obstacles = int(round(obstacle_density * n * n))
    n_obstacles = min(n_obstacles, len(candidates))
    for _ in range(MAX_GENERATION_ATTEMPTS):
        picks = rng.choice(len(candidates), size=n_obstacles, replace=False)
        grid = GridMap(n, frozenset(map(tuple, candidates[picks].tolist())), start, goal)
        if is_connected(grid):
            return grid
    raise MapGenerationError(
        f"no connected {n}x{n} map at density {obstacle_density} after "
        f"{MAX_GENERATION_ATTEMPTS} attempts (seed {seed})"
    )


def serialize(grid: GridMap) -> str:
    n = grid.size_n
    lines = [f"{FORMAT_HEADER} {n}"]
    for y in range(n - 1, -1, -1):
        row = []
        for x in range(n):
            if (x, y) == grid.start:
                row.append("S")
            elif (x, y) == grid.goal:
                row.append("G")
            elif grid.occupancy[x, y]:
                row.append("#")
            else:
                row.append(".")
        lines.append("".join(row))
    return "\n".join(lines) + "\n"


def parse(text: str) -> GridMap:
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise MapParseError("empty document", 1, 1)
    header = lines[0].split()
    if len(header) != 3 or " ".join(header[:2]) != FORMAT_HEADER:
        raise MapParseError(f"expected header '{FORMAT_HEADER} <N>'", 1, 1)
    try:
        n = int(header[2])
    except ValueError:
        raise MapParseError(f"bad size {header[2]!r}", 1, len(FORMAT_HEADER) + 2) from None
    if n < 2:
        raise MapParseError(f"size must be >= 2, got {n}", 1, len(FORMAT_HEADER) + 2)
    rows = lines[1:]
    if len(rows) != n:
        raise MapParseError(f"expected {n} grid rows, found {len(rows)}", min(len(lines), n + 1) + 1, 1)
    obstacles: set[Cell] = set()
    start = goal = None
    for r, row in enumerate(rows):
        line_no = r + 2
        if len(row) != n:
            raise MapParseError(f"row has {len(row)} glyphs, expected {n}", line_no, min(len(row), n) + 1)
        y = n - 1 - r
        for x, glyph in enumerate(row):
            if glyph == "#":
                obstacles.add((x, y))
            elif glyph == "S":
                if start is not None:
                    raise MapParseError("duplicate start marker 'S'", line_no, x + 1)
                start = (x, y)
            elif glyph == "G":
                if goal is not None:
                    raise MapParseError("duplicate goal marker 'G'", line_no, x + 1)
                goal = (x, y)
            elif glyph != ".":
                raise MapParseError(f"unknown glyph {glyph!r}", line_no, x + 1)
    if start is None:
        raise MapParseError("missing start marker 'S'", n + 1, 1)
    if goal is None:
        raise MapParseError("missing goal marker 'G'", n + 1, 1)
    return GridMap(n, frozenset(obstacles), start, goal)


def load_map(path) -> GridMap:
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read())


def save_map(grid: GridMap, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(serialize(grid))


def from_rows(rows: Sequence[str]) -> GridMap:
    """Build a map from glyph rows given top row first (test and REPL helper)."""
    return parse(f"{FORMAT_HEADER} {len(rows)}\n" + "\n".join(rows) + "\n")
