"""Corpus generation, the per-map attack/immunity pipeline and aggregation."""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import os
import statistics
import time
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from .a3c import save_agent, success_rate, train
from .cdg import DegenerateFitError, band_in_map_frame, cdg
from .config import Config
from .gridmap import GridMap, generate_random_map, load_map, serialize
from .immunize import immunize
from .validation import AttackParams, calibrate_epsilon, validate_examples

log = logging.getLogger(__name__)

MANIFEST_SCHEMA = "gradband.manifest/1"
RECORD_SCHEMA = "gradband.map-record/1"
SUMMARY_SCHEMA = "gradband.summary/1"
MANIFEST = "manifest.json"


class DataError(ValueError):
    """Inputs on disk are missing, malformed or inconsistent."""


def write_atomic(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def map_seeds(n: int, density: float, seed: int, count: int) -> list[int]:
    """Per-map 63-bit seeds; the first k seeds do not depend on ``count``."""
    root = np.random.SeedSequence([seed, n, int(round(density * 1_000_000))])
    return [int(v) >> 1 for v in root.generate_state(count, np.uint64)]


# ---------------------------------------------------------------- corpus


def generate_corpus(n: int, count: int, density: float, seed: int, out_dir) -> dict:
    """Write ``count`` maps plus a manifest; existing identical files are kept.

    Raises DataError when a file on disk disagrees with what this seed produces.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest_path = out / MANIFEST
    manifest = read_manifest(manifest_path) if manifest_path.exists() else {"schema": MANIFEST_SCHEMA, "maps": []}
    entries = {m["file"]: m for m in manifest["maps"]}
    for i, map_seed in enumerate(map_seeds(n, density, seed, count)):
        name = f"map_n{n}_d{int(round(density * 100)):02d}_s{seed}_{i:04d}.txt"
        path = out / name
        grid = generate_random_map(n, density, map_seed)
        text = serialize(grid)
        if path.exists():
            if path.read_text() != text:
                raise DataError(f"{path} exists with different content than seed {map_seed} produces")
        else:
            write_atomic(path, text)
        entries[name] = {
            "file": name, "n": n, "density": density, "corpus_seed": seed, "index": i,
            "seed": map_seed, "map_id": grid.map_id,
        }
    manifest["maps"] = sorted(entries.values(), key=lambda m: (m["n"], m["file"]))
    write_atomic(manifest_path, json.dumps(manifest, indent=2) + "\n")
    return manifest


def read_manifest(path) -> dict:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise DataError(f"cannot read manifest {path}: {exc}") from exc
    if data.get("schema") != MANIFEST_SCHEMA or not isinstance(data.get("maps"), list):
        raise DataError(f"{path} is not a {MANIFEST_SCHEMA} manifest")
    return data


def resolve_manifest(maps_arg) -> tuple[Path, dict]:
    path = Path(maps_arg)
    if path.is_dir():
        path = path / MANIFEST
    if not path.exists():
        raise DataError(f"no manifest at {path}")
    return path.parent, read_manifest(path)


# ---------------------------------------------------------------- per map


def attack_params(cfg: Config, epsilon: float) -> AttackParams:
    v = cfg.validation
    return AttackParams(v.omega1, v.omega2, epsilon, v.mode)


def run_map(grid: GridMap, map_seed: int, cfg: Config, out_dir: Path, name: str = "") -> dict:
    """Train, generate, validate and immunize on one map. Never raises for
    pipeline failures; they are recorded in the returned record."""
    out_dir.mkdir(parents=True, exist_ok=True)
    n = grid.size_n
    tcfg = replace(cfg.train, seed=(map_seed + cfg.train.seed) % (1 << 63))
    cap = tcfg.cap(n)
    record: dict = {
        "schema": RECORD_SCHEMA,
        "file": name,
        "map_id": grid.map_id,
        "size_n": n,
        "density": grid.density,
        "seed": map_seed,
        "status": "ok",
        "failure": None,
        "generation_precision": None,
        "immune_precision": None,
    }
    stage = "train"
    try:
        t0 = time.perf_counter()
        agent = train(grid, tcfg)
        record["train_seconds"] = time.perf_counter() - t0
        record["train_steps"] = agent.train_steps
        save_agent(agent, out_dir / "agent.bin")
        record["clean_success"] = success_rate(agent, grid, cap)
        if record["clean_success"] == 0.0:
            raise RuntimeError("trained agent does not reach the goal on its own map")

        stage = "cdg"
        result = cdg(grid, agent, cfg.cdg)
        record["cdg"] = result.record
        band, swapped = band_in_map_frame(result.record)

        stage = "validation"
        v = cfg.validation
        epsilon = v.epsilon if v.epsilon is not None else calibrate_epsilon(agent, grid, cap, v.mode, v.epsilon_factor, v.trials)
        params = attack_params(cfg, epsilon)
        report = validate_examples(
            agent, grid, result.examples, params, cap, v.trials, v.rollout_mode, map_seed, band, swapped
        )
        record["validation"] = report.to_dict()
        record["n_candidates"] = report.total
        record["n_valid"] = len(report.valid)
        write_atomic(out_dir / "validation.csv", report.to_csv())
        if report.total:
            record["generation_precision"] = report.generation_precision

        stage = "immunize"
        if len(report.valid) >= 2:
            baseline = cfg.experiment.baseline and len(report.valid) >= cfg.experiment.min_baseline_valid
            imm, agent_new = immunize(
                agent, grid, report.valid, params, tcfg, cfg.immunize, map_seed, baseline, band, swapped
            )
            save_agent(agent_new, out_dir / "agent_new.bin")
            record["immunity"] = imm.to_dict()
            record["immune_precision"] = imm.immune_precision
            write_atomic(out_dir / "immunity.csv", imm.to_csv())

        stage = "plot"
        if cfg.experiment.plots:
            from .plotting import render_record

            render_record(record, out_dir / "plots", cfg.experiment.plot_format)
    except DegenerateFitError as exc:
        record.update(status="failed", failure={"stage": stage, "error": f"degenerate fit: {exc}"})
    except Exception as exc:  # recorded per map, the corpus carries on
        log.warning("map %s failed at %s: %s", grid.map_id, stage, exc)
        record.update(
            status="failed",
            failure={"stage": stage, "error": f"{type(exc).__name__}: {exc}", "traceback": traceback.format_exc()},
        )
    return record


def _map_job(args: tuple) -> tuple[str, str]:
    map_path, entry, cfg, out_root = args
    target = Path(out_root) / "maps" / Path(entry["file"]).stem
    record_path = target / "record.json"
    if record_path.exists():
        return entry["file"], "cached"
    grid = load_map(map_path)
    record = run_map(grid, int(entry["seed"]), cfg, target, entry["file"])
    write_atomic(record_path, json.dumps(record, indent=1) + "\n")
    return entry["file"], record["status"]


def run_experiment(maps_arg, cfg: Config, out_dir, workers: int | None = None) -> dict:
    """Run every manifest map not already checkpointed, then aggregate."""
    map_dir, manifest = resolve_manifest(maps_arg)
    out = Path(out_dir)
    (out / "maps").mkdir(parents=True, exist_ok=True)
    write_atomic(out / "config.json", json.dumps(cfg.to_dict(), indent=2) + "\n")
    workers = workers or cfg.experiment.workers
    jobs = []
    for entry in manifest["maps"]:
        path = map_dir / entry["file"]
        if not path.exists():
            raise DataError(f"manifest lists {entry['file']} but {path} is missing")
        jobs.append((path, entry, cfg, out))
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(workers) as pool:
            for name, status in pool.map(_map_job, jobs):
                log.info("%s: %s", name, status)
    else:
        for job in jobs:
            name, status = _map_job(job)
            log.info("%s: %s", name, status)
    return aggregate(out)


# ---------------------------------------------------------------- aggregation


def _mean(values: list) -> float | None:
    values = [v for v in values if v is not None]
    return statistics.fmean(values) if values else None


def load_records(out_dir) -> list[dict]:
    records = []
    for path in sorted(Path(out_dir, "maps").glob("*/record.json")):
        try:
            rec = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise DataError(f"corrupt record {path}: {exc}") from exc
        if rec.get("schema") != RECORD_SCHEMA:
            raise DataError(f"{path} is not a {RECORD_SCHEMA} record")
        records.append(rec)
    return sorted(records, key=lambda r: (r["size_n"], r["map_id"], r["file"]))


def aggregate(out_dir) -> dict:
    """Per-size means of per-map precisions and timings; writes summary files."""
    out = Path(out_dir)
    records = load_records(out)
    sizes = sorted({r["size_n"] for r in records})
    classes = []
    for n in sizes:
        group = [r for r in records if r["size_n"] == n]
        ok = [r for r in group if r["status"] == "ok"]
        imm = [r["immunity"] for r in ok if r.get("immunity")]
        timed = [i for i in imm if i.get("baseline_wall_seconds") is not None]
        classes.append(
            {
                "size_n": n,
                "maps": len(group),
                "maps_ok": len(ok),
                "maps_failed": len(group) - len(ok),
                "maps_with_candidates": sum(1 for r in ok if r.get("n_candidates")),
                "maps_immunized": len(imm),
                "candidates": sum(r.get("n_candidates", 0) for r in ok),
                "valid": sum(r.get("n_valid", 0) for r in ok),
                "generation_precision": _mean([r["generation_precision"] for r in ok]),
                "immune_precision": _mean([r["immune_precision"] for r in ok]),
                "clean_success_after": _mean([i["clean_success"] for i in imm]),
                "retrain_failed": sum(1 for i in imm if i["retrain_failed"]),
                "maps_timed": len(timed),
                "gradient_band_seconds": _mean([i["retrain_wall_seconds"] for i in timed]),
                "traditional_seconds": _mean([i["baseline_wall_seconds"] for i in timed]),
                "speedup": _mean([i["speedup"] for i in timed]),
                "min_speedup": min((i["speedup"] for i in timed), default=None),
            }
        )
    summary = {
        "schema": SUMMARY_SCHEMA,
        "maps": len(records),
        "failures": [
            {"file": r["file"], "map_id": r["map_id"], **{k: v for k, v in r["failure"].items() if k != "traceback"}}
            for r in records
            if r["status"] != "ok"
        ],
        "size_classes": classes,
    }
    write_atomic(out / "summary.json", json.dumps(summary, indent=2) + "\n")
    write_atomic(out / "precision.csv", precision_csv(classes))
    write_atomic(out / "timing.csv", timing_csv(classes))
    return summary


def _pct(v) -> str:
    return "" if v is None else f"{100 * v:.2f}"


def _secs(v) -> str:
    return "" if v is None or (isinstance(v, float) and math.isnan(v)) else f"{v:.2f}"


def precision_csv(classes: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["map_size", "maps", "maps_with_candidates", "generation_precision_pct", "immune_precision_pct"])
    for c in classes:
        n = c["size_n"]
        w.writerow([f"{n}x{n}", c["maps_ok"], c["maps_with_candidates"], _pct(c["generation_precision"]), _pct(c["immune_precision"])])
    return buf.getvalue()


def timing_csv(classes: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["method"] + [f"{c['size_n']}x{c['size_n']}" for c in classes])
    w.writerow(["traditional_adversarial_training_s"] + [_secs(c["traditional_seconds"]) for c in classes])
    w.writerow(["gradient_band_training_s"] + [_secs(c["gradient_band_seconds"]) for c in classes])
    w.writerow(["speedup"] + [_secs(c["speedup"]) for c in classes])
    return buf.getvalue()
