"""Static figures for CDG run records and corpus summaries.

All images are written with the Agg backend; no display is needed. The band
overlay is laid out at a fixed ``px_per_cell`` with the axes filling the whole
canvas, so cell (x, y) has its centre at pixel
``((x + 0.5) * px, (N - 0.5 - y) * px)`` counted from the top-left corner.
"""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from matplotlib.colors import ListedColormap  # noqa: E402

from .cdg import GradientBand  # noqa: E402
from .surface import ValueSurface  # noqa: E402

BOUND_COLOR = "#0000ff"
FIT_COLOR = "#d62728"
TRACE_COLOR = "#ff00ff"
BAFFLE_COLOR = "#ff8c00"
BAND_FILL = "#9ecae1"

REQUIRED_FIELDS = ("size_n", "start", "goal", "obstacles", "surface", "trace", "band")


class RecordSchemaError(ValueError):
    pass


def cdg_record_of(record: dict) -> dict:
    """Accept either a bare CDG run record or a per-map experiment record."""
    inner = record.get("cdg", record)
    if not isinstance(inner, dict):
        raise RecordSchemaError("record has no CDG section")
    missing = [k for k in REQUIRED_FIELDS if k not in inner]
    if missing:
        raise RecordSchemaError(f"run record is missing fields: {', '.join(missing)}")
    return inner


def _map_axes(n: int, px_per_cell: int, dpi: int = 100):
    side = n * px_per_cell / dpi
    fig = plt.figure(figsize=(side, side), dpi=dpi)
    ax = fig.add_axes((0.0, 0.0, 1.0, 1.0))
    ax.set_xlim(-0.5, n - 0.5)
    ax.set_ylim(-0.5, n - 0.5)
    ax.set_axis_off()
    return fig, ax


def _bound_curve(band: GradientBand, offset: float, n: int, swapped: bool, samples: int = 4000):
    u = np.linspace(-0.5, n - 0.5, samples)
    v = band.fit(u) + offset
    return (v, u) if swapped else (u, v)


def plot_value_contour(record: dict, path, levels: int = 20) -> Path:
    rec = cdg_record_of(record)
    surface = ValueSurface.from_dict(rec["surface"])
    n = surface.size_n
    fig, ax = plt.subplots(figsize=(6, 5.4))
    xs, ys = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    values = np.where(surface.free, surface.values, surface.value_min)
    cs = ax.contourf(xs, ys, values, levels=levels, cmap="viridis")
    ax.contour(xs, ys, values, levels=levels, colors="k", linewidths=0.3, alpha=0.4)
    fig.colorbar(cs, ax=ax, label="state value")
    blocked = np.ma.masked_equal(np.where(surface.free, 0, 1).T, 0)
    ax.imshow(blocked, origin="lower", cmap=ListedColormap(["#333333"]), extent=(-0.5, n - 0.5, -0.5, n - 0.5),
              interpolation="nearest", zorder=2)
    trace = np.array(rec["trace"]["points"], dtype=float).reshape(-1, 2)
    if len(trace):
        ax.plot(trace[:, 0], trace[:, 1], color=TRACE_COLOR, lw=2.5, label="steepest ascent")
    ax.plot(*rec["start"], "o", color="#2ca02c", ms=8, label="start")
    ax.plot(*rec["goal"], "*", color="#ffdd00", mec="k", ms=12, label="goal")
    ax.set_xlim(-0.5, n - 0.5)
    ax.set_ylim(-0.5, n - 0.5)
    ax.set_aspect("equal")
    ax.set_title(f"value surface, {n}x{n}")
    ax.legend(loc="upper left", fontsize=7, framealpha=0.8)
    out = Path(path)
    fig.savefig(out)
    plt.close(fig)
    return out


def plot_band_overlay(record: dict, path, px_per_cell: int = 10, candidates: Sequence | None = None) -> Path:
    """Map with the band, its bounds, the fitted curve and every baffle candidate."""
    rec = cdg_record_of(record)
    n = int(rec["size_n"])
    band = GradientBand.from_dict(rec["band"])
    swapped = bool(rec.get("axes_swapped", False))
    fig, ax = _map_axes(n, px_per_cell)

    occ = np.zeros((n, n))
    for x, y in rec["obstacles"]:
        occ[y, x] = 1.0
    ax.imshow(occ, origin="lower", cmap=ListedColormap(["#ffffff", "#555555"]), vmin=0, vmax=1,
              extent=(-0.5, n - 0.5, -0.5, n - 0.5), interpolation="nearest", zorder=0)

    if not band.degenerate:
        gx, gy = np.meshgrid(np.arange(n, dtype=float), np.arange(n, dtype=float), indexing="ij")
        bx, by = (gy, gx) if swapped else (gx, gy)
        inside = band.contains(bx, by) & (occ.T == 0)
        if inside.any():
            cx, cy = np.nonzero(inside)
            ax.scatter(cx, cy, marker="s", s=(0.6 * px_per_cell * 72 / 100) ** 2, c=BAND_FILL, lw=0, zorder=1)

    for c in candidates if candidates is not None else rec.get("candidates", []):
        cells = np.array(c["baffle_cells"] if isinstance(c, dict) else c, dtype=float).reshape(-1, 2)
        ax.plot(cells[:, 0], cells[:, 1], "s", color=BAFFLE_COLOR, ms=0.5 * px_per_cell * 72 / 100, zorder=2)

    for key in ("upper_anchor", "lower_anchor"):
        cell = rec["band"].get(key)
        if cell is not None:
            x, y = (cell[1], cell[0]) if swapped else cell
            ax.plot(x, y, "o", mfc="none", mec="k", ms=0.8 * px_per_cell * 72 / 100, mew=0.8, zorder=3)

    fx, fy = _bound_curve(band, 0.0, n, swapped)
    ax.plot(fx, fy, color=FIT_COLOR, lw=0.8, ls="--", zorder=4)
    if not band.degenerate:
        for offset in (band.upper_offset, band.lower_offset):
            bx, by = _bound_curve(band, offset, n, swapped)
            ax.plot(bx, by, color=BOUND_COLOR, lw=1.0, zorder=5)

    ax.plot(*rec["start"], "o", color="#2ca02c", ms=0.6 * px_per_cell * 72 / 100, zorder=6)
    ax.plot(*rec["goal"], "*", color="#ffdd00", mec="k", mew=0.3, ms=0.8 * px_per_cell * 72 / 100, zorder=6)
    out = Path(path)
    fig.savefig(out, dpi=100)
    plt.close(fig)
    return out


def plot_precision_curve(rows: Sequence[dict], path) -> Path:
    """Generation and immune precision against map size.

    ``rows`` hold ``size_n``, ``generation_precision`` and ``immune_precision``
    (either may be None when undefined for that size).
    """
    rows = sorted(rows, key=lambda r: r["size_n"])
    fig, ax = plt.subplots(figsize=(6, 4))
    drawn = False
    for key, label, marker in (
        ("generation_precision", "generation precision", "o-"),
        ("immune_precision", "immune precision", "s-"),
    ):
        pts = [(r["size_n"], r[key]) for r in rows if r.get(key) is not None]
        if pts:
            xs, ys = zip(*pts)
            ax.plot(xs, [100 * y for y in ys], marker, label=label)
            drawn = True
    ax.set_xlabel("map size N")
    ax.set_ylabel("precision (%)")
    ax.set_ylim(0, 105)
    ax.grid(alpha=0.3)
    if drawn:
        ax.set_xticks(sorted({r["size_n"] for r in rows}))
        ax.legend(loc="lower left")
    else:
        ax.text(0.5, 0.5, "no precision data", ha="center", va="center", transform=ax.transAxes)
    out = Path(path)
    fig.savefig(out)
    plt.close(fig)
    return out


def write_surface_csv(record: dict, path) -> Path:
    """Long-format value surface (x, y, value, inverted value, free) for 3-D plotting tools."""
    rec = cdg_record_of(record)
    surface = ValueSurface.from_dict(rec["surface"])
    top = surface.value_max
    out = Path(path)
    with out.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["x", "y", "value", "inverted_value", "free"])
        for x in range(surface.size_n):
            for y in range(surface.size_n):
                v = float(surface.values[x, y])
                writer.writerow([x, y, repr(v), repr(top - v), int(surface.free[x, y])])
    return out


def precision_rows_of(record: dict) -> list[dict]:
    """Precision rows carried by a per-map record or a corpus summary."""
    if "size_classes" in record:
        return [dict(r) for r in record["size_classes"]]
    if "generation_precision" in record or "immune_precision" in record:
        return [
            {
                "size_n": record["size_n"] if "size_n" in record else cdg_record_of(record)["size_n"],
                "generation_precision": record.get("generation_precision"),
                "immune_precision": record.get("immune_precision"),
            }
        ]
    return []


def render_record(record: dict, out_dir, fmt: str = "svg", summary: dict | None = None) -> list[Path]:
    """Write the three figures for one run record (plus the surface CSV)."""
    rec = cdg_record_of(record)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stem = rec.get("map_id", "record")
    rows = precision_rows_of(summary) if summary is not None else precision_rows_of(record)
    images = [
        plot_value_contour(rec, out / f"{stem}_contour.{fmt}"),
        plot_band_overlay(rec, out / f"{stem}_band.{fmt}"),
        plot_precision_curve(rows, out / f"{stem}_precision.{fmt}"),
    ]
    write_surface_csv(rec, out / f"{stem}_surface.csv")
    return images
