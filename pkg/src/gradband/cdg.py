"""Dominant adversarial example generation along the value-gradient band.

Pipeline: critic value surface -> inverted surface -> steepest-descent trace
from the robot start -> least-squares polynomial through the trace -> band
bounded by offset copies of that polynomial through the nearest obstacle edge
points -> one baffle per row and per column cross-section of the band.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .gridmap import Cell, GridMap, add_baffle, is_connected, obstacle_edge_points
from .surface import ValueSurface

__all__ = [
    "CdgConfig",
    "DegenerateFitError",
    "DominantExample",
    "GradientBand",
    "GradientFit",
    "GradientTrace",
    "TraceError",
    "ValueSurface",
    "cdg",
    "compute_gradient_band",
    "distance_to_curve",
    "fit_gradient_function",
    "generate_baffles",
    "gradient_descent_trace",
    "preprocess_values",
]

BAND_TOL = 1e-9


class DegenerateFitError(ValueError):
    def __init__(self, message: str, x_spread: float):
        super().__init__(f"{message} (x-spread {x_spread:.4g})")
        self.x_spread = x_spread


class TraceError(ValueError):
    pass


@dataclass
class CdgConfig:
    degree: int = 3
    eps_gd: float = 1e-4
    max_iter_factor: int = 10  # iteration cap = factor * N**2
    initial_step: float = 1.0  # cells
    armijo_c: float = 1e-4
    shrink: float = 0.5
    min_x_spread: float = 1.0
    trace_start: str = "start"  # or "surface-min": the lowest-value free cell

    def validate(self) -> None:
        if not 1 <= self.degree <= 6:
            raise ValueError(f"polynomial degree must be in 1..6, got {self.degree}")
        if self.trace_start not in ("start", "surface-min"):
            raise ValueError(f"unknown trace_start {self.trace_start!r}")


# ---------------------------------------------------------------- surface


def preprocess_values(surface: ValueSurface) -> ValueSurface:
    """Flip the surface so that the highest-value region becomes the minimum."""
    return ValueSurface(surface.size_n, surface.value_max - surface.values, surface.free)


def fill_obstacles(values: np.ndarray, free: np.ndarray) -> np.ndarray:
    """Replace non-free entries layer by layer with the mean of already-known
    4-neighbours, so obstacles neither attract nor repel the descent."""
    out = np.array(values, dtype=float)
    known = np.array(free, dtype=bool)
    while not known.all():
        vals = np.pad(np.where(known, out, 0.0), 1)
        cnt = np.pad(known.astype(float), 1)
        total = vals[:-2, 1:-1] + vals[2:, 1:-1] + vals[1:-1, :-2] + vals[1:-1, 2:]
        count = cnt[:-2, 1:-1] + cnt[2:, 1:-1] + cnt[1:-1, :-2] + cnt[1:-1, 2:]
        layer = ~known & (count > 0)
        if not layer.any():
            break
        out[layer] = total[layer] / count[layer]
        known |= layer
    return out


class BilinearField:
    """Bilinear interpolant of cell-centre values on the box [0, N-1]^2."""

    def __init__(self, values: np.ndarray):
        self.v = np.asarray(values, dtype=float)
        self.n = self.v.shape[0]
        self.hi = self.n - 1

    def clip(self, p) -> np.ndarray:
        return np.clip(np.asarray(p, dtype=float), 0.0, self.hi)

    def _cell(self, c: float) -> tuple[int, float]:
        i = min(int(math.floor(c)), self.n - 2)
        return i, c - i

    def value(self, p) -> float:
        x, y = p
        i, fx = self._cell(x)
        j, fy = self._cell(y)
        v = self.v
        return float(
            (1 - fx) * (1 - fy) * v[i, j]
            + fx * (1 - fy) * v[i + 1, j]
            + (1 - fx) * fy * v[i, j + 1]
            + fx * fy * v[i + 1, j + 1]
        )

    def _partials(self, i: int, fx: float, j: int, fy: float) -> tuple[float, float]:
        v = self.v
        gx = (1 - fy) * (v[i + 1, j] - v[i, j]) + fy * (v[i + 1, j + 1] - v[i, j + 1])
        gy = (1 - fx) * (v[i, j + 1] - v[i, j]) + fx * (v[i + 1, j + 1] - v[i + 1, j])
        return gx, gy

    def gradient(self, p) -> np.ndarray:
        """Analytic gradient of the interpolant; on a cell edge the two one-sided
        derivatives across that edge are averaged."""
        x, y = p
        i, fx = self._cell(x)
        j, fy = self._cell(y)
        gx, gy = self._partials(i, fx, j, fy)
        if fx == 0.0 and 0 < i:
            gx = 0.5 * (gx + self._partials(i - 1, 1.0, j, fy)[0])
        if fy == 0.0 and 0 < j:
            gy = 0.5 * (gy + self._partials(i, fx, j - 1, 1.0)[1])
        return np.array([gx, gy])


@dataclass
class GradientTrace:
    points: np.ndarray  # (k, 2)
    steps_taken: list[tuple[float, float]]
    values: list[float] = field(default_factory=list)
    degenerate: bool = False
    stop_reason: str = ""

    def to_dict(self) -> dict:
        return {
            "points": self.points.tolist(),
            "steps_taken": [list(s) for s in self.steps_taken],
            "values": list(self.values),
            "degenerate": self.degenerate,
            "stop_reason": self.stop_reason,
        }


def gradient_descent_trace(surface_pre: ValueSurface, start, cfg: CdgConfig | None = None) -> GradientTrace:
    """Steepest descent with Armijo backtracking on the interpolated surface.

    Each iteration tries a first step of ``initial_step`` cells along the negative
    gradient and halves it until the Armijo condition holds. Stops once an
    iteration lowers the value by less than ``eps_gd``. Only free-cell values
    shape the field; obstacle cells are filled from their free neighbours.
    """
    cfg = cfg or CdgConfig()
    fld = BilinearField(fill_obstacles(surface_pre.values, surface_pre.free))
    p = np.asarray(start, dtype=float)
    if np.any(p < 0) or np.any(p > fld.hi):
        raise TraceError(f"trace start {tuple(p)} outside the map box")
    cell = (int(round(p[0])), int(round(p[1])))
    if not surface_pre.free[cell]:
        raise TraceError(f"trace start {cell} lies in an obstacle cell")
    f = fld.value(p)
    points, steps, values = [p.copy()], [], [f]
    cap = cfg.max_iter_factor * surface_pre.size_n**2
    reason = "iteration-cap"
    for _ in range(cap):
        g = fld.gradient(p)
        gnorm = float(np.hypot(*g))
        if gnorm < 1e-14:
            reason = "zero-gradient"
            break
        alpha = cfg.initial_step / gnorm
        while True:
            q = fld.clip(p - alpha * g)
            fq = fld.value(q)
            # clipping can shorten the step, so use the realised displacement
            if fq <= f + cfg.armijo_c * float(g @ (q - p)) and fq <= f:
                break
            alpha *= cfg.shrink
            if alpha * gnorm < 1e-9:
                q = None
                break
        if q is None or np.array_equal(q, p):
            reason = "no-descent"
            break
        drop = f - fq
        points.append(q)
        steps.append((alpha, alpha))
        values.append(fq)
        p, f = q, fq
        if drop < cfg.eps_gd:
            reason = "small-drop"
            break
    pts = np.array(points)
    return GradientTrace(pts, steps, values, degenerate=len(pts) == 1, stop_reason=reason)


# ---------------------------------------------------------------- fitting


@dataclass
class GradientFit:
    degree: int
    coeffs: np.ndarray  # a_0 .. a_k
    residual: float

    def __post_init__(self) -> None:
        self.coeffs = np.asarray(self.coeffs, dtype=float)

    def __call__(self, x):
        return np.polynomial.polynomial.polyval(x, self.coeffs)

    def derivative(self, x, order: int = 1):
        return np.polynomial.polynomial.polyval(x, np.polynomial.polynomial.polyder(self.coeffs, order))

    def f(self, x, y):
        """Implicit form y - p(x)."""
        return y - self(x)

    def to_dict(self) -> dict:
        return {"degree": self.degree, "coeffs": self.coeffs.tolist(), "residual": self.residual}

    @classmethod
    def from_dict(cls, data: dict) -> GradientFit:
        return cls(int(data["degree"]), np.array(data["coeffs"], dtype=float), float(data["residual"]))


def sum_squared_deviation(points: np.ndarray, coeffs: np.ndarray) -> float:
    x, y = points[:, 0], points[:, 1]
    r = y - np.polynomial.polynomial.polyval(x, coeffs)
    return float(r @ r)


def fit_gradient_function(trace: GradientTrace | np.ndarray, k: int = 3, min_x_spread: float = 1.0) -> GradientFit:
    """Least-squares polynomial y = a_0 + ... + a_k x^k through the trace points."""
    pts = np.asarray(trace.points if isinstance(trace, GradientTrace) else trace, dtype=float)
    x, y = pts[:, 0], pts[:, 1]
    spread = float(x.max() - x.min()) if len(x) else 0.0
    distinct = len(np.unique(np.round(x, 9)))
    if len(pts) < k + 1 or distinct < k + 1:
        raise DegenerateFitError(f"need {k + 1} distinct x values, have {distinct}", spread)
    if spread < min_x_spread:
        raise DegenerateFitError("trace is (near-)vertical", spread)
    vander = np.vander(x, k + 1, increasing=True)
    scale = np.linalg.norm(vander, axis=0)
    sol, _, rank, _ = np.linalg.lstsq(vander / scale, y, rcond=None)
    if rank < k + 1:
        raise DegenerateFitError("rank-deficient Vandermonde system", spread)
    coeffs = sol / scale
    return GradientFit(k, coeffs, sum_squared_deviation(pts, coeffs))


def distance_to_curve(point, fit: GradientFit, seeds: int = 256) -> tuple[float, np.ndarray]:
    """Perpendicular distance from ``point`` to the curve y = p(x) and the foot.

    Any foot closer than the vertical drop |p(px) - py| lies within that
    horizontal radius of px, so Newton on the stationarity condition
    (x - px) + (p(x) - py) p'(x) = 0 is seeded across that interval.
    """
    px, py = float(point[0]), float(point[1])
    d0 = abs(float(fit(px)) - py)
    if d0 == 0.0:
        return 0.0, np.array([px, py])
    c = fit.coeffs
    d1 = np.polynomial.polynomial.polyder(c)
    d2 = np.polynomial.polynomial.polyder(c, 2)
    pv = np.polynomial.polynomial.polyval
    xs = np.linspace(px - d0, px + d0, seeds)
    for _ in range(60):
        p, p1, p2 = pv(xs, c), pv(xs, d1), pv(xs, d2)
        g = (xs - px) + (p - py) * p1
        h = 1.0 + p1 * p1 + (p - py) * p2
        h = np.where(np.abs(h) < 1e-300, 1e-300, h)
        step = g / h
        xs = np.clip(xs - step, px - d0, px + d0)
        if np.all(np.abs(step) < 1e-15 * (1 + np.abs(xs))):
            break
    p, p1 = pv(xs, c), pv(xs, d1)
    g = (xs - px) + (p - py) * p1
    dist2 = (xs - px) ** 2 + (p - py) ** 2
    ok = np.abs(g) <= 1e-9 * (1.0 + d0) * (1.0 + np.abs(p1))
    if ok.any():
        best = xs[ok][np.argmin(dist2[ok])]
    else:
        best = _dense_minimize(px, py, fit, px - d0, px + d0)
    foot = np.array([best, float(fit(best))])
    return float(math.hypot(foot[0] - px, foot[1] - py)), foot


def _dense_minimize(px: float, py: float, fit: GradientFit, lo: float, hi: float) -> float:
    xs = np.linspace(lo, hi, 100_001)
    d2 = (xs - px) ** 2 + (fit(xs) - py) ** 2
    i = int(np.argmin(d2))
    a, b = xs[max(i - 1, 0)], xs[min(i + 1, len(xs) - 1)]
    invphi = (math.sqrt(5) - 1) / 2
    obj = lambda t: (t - px) ** 2 + (float(fit(t)) - py) ** 2  # noqa: E731
    c_, d_ = b - invphi * (b - a), a + invphi * (b - a)
    for _ in range(200):
        if obj(c_) < obj(d_):
            b = d_
        else:
            a = c_
        c_, d_ = b - invphi * (b - a), a + invphi * (b - a)
    return 0.5 * (a + b)


# ---------------------------------------------------------------- band


@dataclass
class GradientBand:
    fit: GradientFit
    upper_offset: float
    lower_offset: float
    x_lower: float
    y_lower: float
    x_max: float
    y_max: float
    case_tag: str  # "both-sides" | "one-side"
    degenerate: bool = False
    derived_side: str = "both"  # which offsets come from obstacle edge points
    upper_anchor: Cell | None = None
    lower_anchor: Cell | None = None
    nearest_upper: Cell | None = None
    nearest_lower: Cell | None = None
    corner_offsets: dict = field(default_factory=dict)

    def upper(self, x):
        return self.fit(x) + self.upper_offset

    def lower(self, x):
        return self.fit(x) + self.lower_offset

    def in_domain(self, x, y) -> np.ndarray:
        return (
            (x >= self.x_lower - BAND_TOL)
            & (x <= self.x_max + BAND_TOL)
            & (y >= self.y_lower - BAND_TOL)
            & (y <= self.y_max + BAND_TOL)
        )

    def contains(self, x, y) -> np.ndarray:
        """Closed band membership of points (cell centres)."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        off = y - self.fit(x)
        inside = (off >= self.lower_offset - BAND_TOL) & (off <= self.upper_offset + BAND_TOL)
        return inside & self.in_domain(x, y)

    def strictly_inside(self, x, y) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        off = y - self.fit(x)
        inside = (off > self.lower_offset + BAND_TOL) & (off < self.upper_offset - BAND_TOL)
        return inside & self.in_domain(x, y)

    def to_dict(self) -> dict:
        return {
            "fit": self.fit.to_dict(),
            "U": self.upper_offset,
            "L": self.lower_offset,
            "X_L": self.x_lower,
            "Y_L": self.y_lower,
            "X_max": self.x_max,
            "Y_max": self.y_max,
            "case_tag": self.case_tag,
            "degenerate": self.degenerate,
            "derived_side": self.derived_side,
            "upper_anchor": None if self.upper_anchor is None else list(self.upper_anchor),
            "lower_anchor": None if self.lower_anchor is None else list(self.lower_anchor),
            "nearest_upper": None if self.nearest_upper is None else list(self.nearest_upper),
            "nearest_lower": None if self.nearest_lower is None else list(self.nearest_lower),
            "corner_offsets": self.corner_offsets,
        }

    @classmethod
    def from_dict(cls, d: dict) -> GradientBand:
        cell = lambda v: None if v is None else (int(v[0]), int(v[1]))  # noqa: E731
        return cls(
            GradientFit.from_dict(d["fit"]),
            float(d["U"]),
            float(d["L"]),
            float(d["X_L"]),
            float(d["Y_L"]),
            float(d["X_max"]),
            float(d["Y_max"]),
            d["case_tag"],
            bool(d["degenerate"]),
            d.get("derived_side", "both"),
            cell(d.get("upper_anchor")),
            cell(d.get("lower_anchor")),
            cell(d.get("nearest_upper")),
            cell(d.get("nearest_lower")),
            d.get("corner_offsets", {}),
        )


def _domain(fit: GradientFit, lower_offset: float, n: int) -> tuple[float, float]:
    """(X_L, Y_L): where the lower bound meets the x and y axes inside the map.

    An axis the lower bound does not cross within the map imposes no limit (0).
    """
    hi = float(n - 1)
    coeffs = fit.coeffs.copy()
    coeffs[0] += lower_offset
    coeffs = np.trim_zeros(coeffs, "b")
    x_lower = 0.0
    if len(coeffs) > 1:
        roots = np.polynomial.polynomial.polyroots(coeffs)
        real = sorted(r.real for r in roots if abs(r.imag) < 1e-9 and 0.0 <= r.real <= hi)
        if real:
            x_lower = float(real[0])
    y0 = float(coeffs[0]) if len(coeffs) else 0.0
    y_lower = y0 if 0.0 <= y0 <= hi else 0.0
    return x_lower, y_lower


def compute_gradient_band(grid: GridMap, fit: GradientFit) -> GradientBand:
    """Band around the fitted curve bounded by its nearest obstacle edge points.

    The nearest edge point above and below the curve is chosen by perpendicular
    distance; the bound is the vertical translate of the curve through it. If a
    different edge point inside the domain box would sit strictly inside the
    band, the bound is pulled in to pass through that point instead. With
    obstacles on one side only, the other bound passes through whichever of the
    map corners (X_max, 0), (0, Y_max) lies on that side nearest the curve.
    """
    n = grid.size_n
    hi = float(n - 1)
    corners = {"(X_max,0)": (hi, 0.0), "(0,Y_max)": (0.0, hi), "(0,0)": (0.0, 0.0), "(X_max,Y_max)": (hi, hi)}
    corner_off = {k: float(y - fit(x)) for k, (x, y) in corners.items()}
    edges = obstacle_edge_points(grid)
    if not edges:
        xs, ys = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
        off = ys.ravel() - fit(xs.ravel())
        return GradientBand(
            fit, float(off.max()), float(off.min()), 0.0, 0.0, hi, hi, "one-side",
            degenerate=True, derived_side="none", corner_offsets=corner_off,
        )

    pts = np.array(edges, dtype=float)
    offsets = pts[:, 1] - fit(pts[:, 0])
    dists = np.array([distance_to_curve(p, fit)[0] for p in pts])
    above = offsets >= 0
    below = ~above

    def nearest(mask):
        idx = np.flatnonzero(mask)
        return int(idx[np.argmin(dists[idx])]) if idx.size else None

    i_up, i_lo = nearest(above), nearest(below)
    nearest_up = edges[i_up] if i_up is not None else None
    nearest_lo = edges[i_lo] if i_lo is not None else None

    if i_up is not None and i_lo is not None:
        case, derived = "both-sides", "both"
        upper, lower = float(offsets[i_up]), float(offsets[i_lo])
    elif i_lo is not None:
        case, derived = "one-side", "lower"
        lower = float(offsets[i_lo])
        cands = [corner_off[k] for k in ("(X_max,0)", "(0,Y_max)") if corner_off[k] > 0]
        upper = min(cands) if cands else max(0.0, max(corner_off.values()))
    else:
        case, derived = "one-side", "upper"
        upper = float(offsets[i_up])
        cands = [corner_off[k] for k in ("(X_max,0)", "(0,Y_max)") if corner_off[k] < 0]
        lower = max(cands) if cands else min(0.0, min(corner_off.values()))

    anchor_up = nearest_up if derived in ("both", "upper") else None
    anchor_lo = nearest_lo if derived in ("both", "lower") else None
    # pull obstacle-derived bounds in until no edge point sits strictly inside
    for _ in range(20):
        x_lower, y_lower = _domain(fit, lower, n)
        in_dom = (pts[:, 0] >= x_lower - BAND_TOL) & (pts[:, 1] >= y_lower - BAND_TOL)
        changed = False
        if derived in ("both", "upper"):
            inner = np.flatnonzero(above & in_dom & (offsets < upper - BAND_TOL))
            if inner.size:
                k = int(inner[np.argmin(offsets[inner])])
                upper, anchor_up, changed = float(offsets[k]), edges[k], True
        if derived in ("both", "lower"):
            inner = np.flatnonzero(below & in_dom & (offsets > lower + BAND_TOL))
            if inner.size:
                k = int(inner[np.argmax(offsets[inner])])
                lower, anchor_lo, changed = float(offsets[k]), edges[k], True
        if not changed:
            break
    x_lower, y_lower = _domain(fit, lower, n)
    if upper <= lower:
        upper = lower + BAND_TOL * 10
    return GradientBand(
        fit, upper, lower, x_lower, y_lower, hi, hi, case,
        degenerate=False, derived_side=derived,
        upper_anchor=anchor_up, lower_anchor=anchor_lo,
        nearest_upper=nearest_up, nearest_lower=nearest_lo,
        corner_offsets=corner_off,
    )


# ---------------------------------------------------------------- baffles


@dataclass(frozen=True)
class DominantExample:
    base_map_id: str
    baffle_cells: tuple[Cell, ...]
    orientation: str  # "row" | "column"
    index: int

    @property
    def example_id(self) -> str:
        return f"{self.orientation}-{self.index}"

    def apply(self, grid: GridMap) -> GridMap:
        return add_baffle(grid, self.baffle_cells)

    def to_dict(self) -> dict:
        return {
            "example_id": self.example_id,
            "base_map_id": self.base_map_id,
            "orientation": self.orientation,
            "index": self.index,
            "baffle_cells": [list(c) for c in self.baffle_cells],
        }

    @classmethod
    def from_dict(cls, d: dict) -> DominantExample:
        return cls(d["base_map_id"], tuple((int(x), int(y)) for x, y in d["baffle_cells"]), d["orientation"], int(d["index"]))


def _runs(flags: Sequence[bool]) -> list[tuple[int, int]]:
    """Half-open [start, stop) index ranges of consecutive True entries."""
    out, start = [], None
    for i, f in enumerate(list(flags) + [False]):
        if f and start is None:
            start = i
        elif not f and start is not None:
            out.append((start, i))
            start = None
    return out


def generate_baffles(grid: GridMap, band: GradientBand, min_length: int = 2) -> list[DominantExample]:
    """One candidate per row index 1..N-1 and per column index 1..N-1.

    Each baffle is the longest run of free in-band cells along that line (ties
    go to the run passing closest to the fitted curve). Short baffles and those
    that would cut the start off from the goal are dropped.
    """
    n = grid.size_n
    axis = np.arange(n)
    usable = ~grid.occupancy.copy()
    usable[grid.start] = False
    usable[grid.goal] = False
    map_id = grid.map_id
    out: list[DominantExample] = []
    for orientation in ("row", "column"):
        for idx in range(1, n):
            if orientation == "row":
                cells = [(int(x), idx) for x in axis]
                xs, ys = axis, np.full(n, idx)
            else:
                cells = [(idx, int(y)) for y in axis]
                xs, ys = np.full(n, idx), axis
            inside = band.contains(xs, ys) & usable[xs, ys]
            runs = [r for r in _runs(inside) if r[1] - r[0] >= min_length]
            if not runs:
                continue
            gap = np.abs(ys - band.fit(xs))
            start, stop = max(runs, key=lambda r: (r[1] - r[0], -gap[r[0] : r[1]].min(), -r[0]))
            baffle = tuple(cells[start:stop])
            if not is_connected(add_baffle(grid, baffle)):
                continue
            out.append(DominantExample(map_id, baffle, orientation, idx))
    return out


# ---------------------------------------------------------------- pipeline


@dataclass
class CdgResult:
    examples: list[DominantExample]
    record: dict


def _trace_origin(grid: GridMap, surface_pre: ValueSurface, cfg: CdgConfig) -> tuple[float, float]:
    if cfg.trace_start == "start":
        return float(grid.start[0]), float(grid.start[1])
    x, y = preprocess_values(surface_pre).argmin()
    return float(x), float(y)


def cdg_from_surface(grid: GridMap, surface: ValueSurface, cfg: CdgConfig | None = None) -> CdgResult:
    """Run the generation pipeline on a precomputed value surface."""
    cfg = cfg or CdgConfig()
    cfg.validate()
    pre = preprocess_values(surface)
    trace = gradient_descent_trace(pre, _trace_origin(grid, pre, cfg), cfg)
    # fit along the trace's dominant axis; the other orientation is the retry
    spread = np.ptp(trace.points, axis=0)
    order = [False, True] if spread[0] >= spread[1] else [True, False]
    errors = []
    for swapped in order:
        pts = trace.points[:, ::-1] if swapped else trace.points
        try:
            fit = fit_gradient_function(pts, cfg.degree, cfg.min_x_spread)
            break
        except DegenerateFitError as exc:
            errors.append(exc)
    else:
        raise DegenerateFitError(
            f"degenerate in both orientations: {errors[0]}; {errors[1]}", errors[0].x_spread
        )
    frame = grid.transpose() if swapped else grid
    band = compute_gradient_band(frame, fit)
    examples = generate_baffles(frame, band)
    if swapped:
        examples = [
            DominantExample(
                grid.map_id,
                tuple((y, x) for x, y in e.baffle_cells),
                "column" if e.orientation == "row" else "row",
                e.index,
            )
            for e in examples
        ]
        examples.sort(key=lambda e: (e.orientation != "row", e.index))
    record = {
        "kind": "cdg-run",
        "map_id": grid.map_id,
        "size_n": grid.size_n,
        "start": list(grid.start),
        "goal": list(grid.goal),
        "obstacles": sorted([list(c) for c in grid.obstacles]),
        "surface": surface.to_dict(),
        "trace": trace.to_dict(),
        "axes_swapped": swapped,
        "fit": fit.to_dict(),
        "band": band.to_dict(),
        "config": cfg.__dict__.copy(),
        "candidates": [e.to_dict() for e in examples],
    }
    return CdgResult(examples, record)


def cdg(grid: GridMap, agent, cfg: CdgConfig | None = None) -> CdgResult:
    """Generate dominant adversarial examples against ``agent`` on ``grid``."""
    from .a3c import extract_value_surface

    return cdg_from_surface(grid, extract_value_surface(agent, grid), cfg)


def band_in_map_frame(record: dict) -> tuple[GradientBand, bool]:
    """Band stored in a run record plus whether it lives in the transposed frame."""
    return GradientBand.from_dict(record["band"]), bool(record.get("axes_swapped", False))


def example_in_band(example: DominantExample, band: GradientBand, swapped: bool) -> bool:
    cells = np.array(example.baffle_cells, dtype=float)
    if swapped:
        cells = cells[:, ::-1]
    return bool(np.all(band.contains(cells[:, 0], cells[:, 1])))
