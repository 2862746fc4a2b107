"""End-to-end acceptance checks.

Each check records one PASS/FAIL line that is printed in the terminal summary.
The desk-scale corpus (20 maps each of 10x10 and 30x30 at density 0.15) is
built once through the experiment runner and cached under the pytest cache,
keyed by the configuration, so reruns only re-read the per-map records.
Set GRADBAND_ACCEPTANCE_DIR to keep the corpus somewhere else.
"""

import hashlib
import json
import math
import os
from pathlib import Path

import mpmath
import numpy as np
import pytest

from gradband.a3c import (
    Agent,
    EpisodeResult,
    TrainConfig,
    agent_from_bytes,
    agent_to_bytes,
    init_params,
    loss_and_grad,
    make_arch,
    param_count,
    train,
)
from gradband.cdg import (
    DegenerateFitError,
    DominantExample,
    GradientBand,
    GradientFit,
    band_in_map_frame,
    cdg,
    cdg_from_surface,
    distance_to_curve,
    example_in_band,
    fit_gradient_function,
)
from gradband.config import Config, CorpusConfig
from gradband.experiment import generate_corpus, load_records, run_experiment
from gradband.gridmap import GridMap, add_baffle, generate_random_map, is_connected, parse, serialize
from gradband.immunize import immunize
from gradband.surface import ValueSurface
from gradband.validation import AttackParams, calibrate_epsilon, f_attack, validate_examples

REFERENCE_GENERATION = 0.9444
REFERENCE_IMMUNE = 0.9864

pytestmark = pytest.mark.slow


def report(lines, criterion, ok, text):
    lines.append(f"criterion {criterion}: {'PASS' if ok else 'FAIL'}  {text}")
    return ok


def pct(v):
    return "n/a" if v is None else f"{100 * v:.2f}%"


# ---------------------------------------------------------------- corpus


def corpus_config() -> Config:
    cfg = Config()
    cfg.corpus = CorpusConfig(sizes=(10, 30), count=20, density=0.15, seed=0)
    return cfg


@pytest.fixture(scope="session")
def corpus(request):
    cfg = corpus_config()
    key = hashlib.sha256(json.dumps(cfg.to_dict(), sort_keys=True).encode()).hexdigest()[:12]
    root = os.environ.get("GRADBAND_ACCEPTANCE_DIR")
    base = Path(root) if root else Path(request.config.cache.mkdir("gradband-acceptance"))
    work = base / key
    maps = work / "maps"
    for n in cfg.corpus.sizes:
        generate_corpus(n, cfg.corpus.count, cfg.corpus.density, cfg.corpus.seed, maps)
    summary = run_experiment(maps, cfg, work / "run", workers=int(os.environ.get("GRADBAND_WORKERS", "1")))
    records = load_records(work / "run")
    return {c["size_n"]: c for c in summary["size_classes"]}, records


# ---------------------------------------------------------------- 1: kernels


def test_kernels_match_oracles(acceptance_lines):
    rng = np.random.default_rng(7)
    mpmath.mp.dps = 60
    worst_fit = 0.0
    for _ in range(20):
        k = int(rng.integers(1, 5))
        pts = np.c_[rng.uniform(0, 30, 40), rng.uniform(0, 30, 40)]
        fit = fit_gradient_function(pts, k)
        x = [mpmath.mpf(float(v)) for v in pts[:, 0]]
        y = [mpmath.mpf(float(v)) for v in pts[:, 1]]
        a = mpmath.matrix([[mpmath.fsum(xx ** (i + j) for xx in x) for j in range(k + 1)] for i in range(k + 1)])
        b = mpmath.matrix([mpmath.fsum(yy * xx**i for xx, yy in zip(x, y)) for i in range(k + 1)])
        oracle = np.array([float(c) for c in mpmath.lu_solve(a, b)])
        scale = np.abs(oracle) + np.abs(oracle).max() * 1e-6
        worst_fit = max(worst_fit, float(np.max(np.abs(fit.coeffs - oracle) / scale)))

    worst_dist = 0.0
    for _ in range(20):
        fit = GradientFit(3, rng.uniform(-1, 1, 4) * [1, 1, 0.5, 0.1], 0.0)
        p = rng.uniform(-3, 3, 2)
        d, _ = distance_to_curve(p, fit)
        xs = np.linspace(p[0] - 5, p[0] + 5, 1_000_001)
        d2 = (xs - p[0]) ** 2 + (fit(xs) - p[1]) ** 2
        i = int(np.argmin(d2))
        lo, hi = xs[max(i - 1, 0)], xs[min(i + 1, len(xs) - 1)]
        for _ in range(200):
            m1, m2 = lo + (hi - lo) / 3, hi - (hi - lo) / 3
            f1 = (m1 - p[0]) ** 2 + (fit(m1) - p[1]) ** 2
            f2 = (m2 - p[0]) ** 2 + (fit(m2) - p[1]) ** 2
            lo, hi = (lo, m2) if f1 < f2 else (m1, hi)
        t = 0.5 * (lo + hi)
        worst_dist = max(worst_dist, abs(d - math.hypot(t - p[0], fit(t) - p[1])))

    arch = make_arch(2, (2, 2))
    params = rng.normal(0, 0.7, param_count(arch))
    obs = rng.choice([-1.0, 0.0, 1.0], size=(6, arch[0]))
    args = (arch, obs, rng.integers(0, 4, 6), rng.normal(size=6), rng.normal(size=6), 0.05, 0.5)
    grad = loss_and_grad(params, *args)[1]
    h = 1e-6
    num = np.array([(loss_and_grad(params + h * e, *args)[0] - loss_and_grad(params - h * e, *args)[0]) / (2 * h)
                    for e in np.eye(params.size)])
    worst_grad = float(np.max(np.abs(grad - num) / np.maximum(np.abs(grad) + np.abs(num), 1e-8)))

    ok = worst_fit <= 1e-9 and worst_dist <= 1e-6 and worst_grad <= 1e-4
    report(acceptance_lines, 1, ok,
           f"fit rel err {worst_fit:.1e} (<=1e-9), distance err {worst_dist:.1e} (<=1e-6), "
           f"gradient rel err {worst_grad:.1e} (<=1e-4)")
    assert ok


# ---------------------------------------------------------------- 2: geometry


def synthetic_surface(grid, rng):
    n = grid.size_n
    xs, ys = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    v = 0.99 ** np.hypot(xs - grid.goal[0], ys - grid.goal[1]) + 0.01 * rng.standard_normal((n, n))
    free = ~grid.occupancy
    return ValueSurface(n, np.where(free, v, v[free].min()), free)


def check_candidates(grid, examples, band, swapped):
    bad = 0
    for e in examples:
        inside = example_in_band(e, band, swapped)
        bad += not (inside and is_connected(add_baffle(grid, e.baffle_cells)))
    bad += len(examples) > 2 * (grid.size_n - 1)
    return bad


def test_geometry_invariants(corpus, acceptance_lines):
    _, records = corpus
    maps = candidates = violations = 0
    for rec in records:
        if "cdg" not in rec:
            continue
        c = rec["cdg"]
        grid = GridMap(c["size_n"], frozenset(map(tuple, c["obstacles"])), tuple(c["start"]), tuple(c["goal"]))
        band, swapped = GradientBand.from_dict(c["band"]), bool(c["axes_swapped"])
        exs = [DominantExample.from_dict(d) for d in c["candidates"]]
        maps, candidates = maps + 1, candidates + len(exs)
        violations += check_candidates(grid, exs, band, swapped)
    rng = np.random.default_rng(2024)
    while maps < 200:
        n = int(rng.integers(10, 31))
        grid = generate_random_map(n, 0.15, int(rng.integers(0, 2**31)))
        try:
            result = cdg_from_surface(grid, synthetic_surface(grid, rng))
        except DegenerateFitError:
            continue
        band, swapped = band_in_map_frame(result.record)
        maps, candidates = maps + 1, candidates + len(result.examples)
        violations += check_candidates(grid, result.examples, band, swapped)
    ok = violations == 0
    report(acceptance_lines, 2, ok, f"{candidates} candidates on {maps} maps, {violations} violations")
    assert ok


# ---------------------------------------------------------------- 3: zero score


def test_zero_score_case(acceptance_lines):
    reached = EpisodeResult(True, 8, 8.0, (19, 19), [(19, 19)])
    score = f_attack(reached, (19, 19), AttackParams(0.3, 0.7, 60.0))
    seconds = f_attack(reached, (19, 19), AttackParams(0.3, 0.7, 60.0, "seconds"))
    ok = score == 0.0 and seconds == 0.0
    report(acceptance_lines, 3, ok, f"score {score!r} for 8 steps to (19,19) with epsilon 60 (reference 0.00)")
    assert ok


# ---------------------------------------------------------------- 4-7: corpus


def test_generation_precision(corpus, acceptance_lines):
    classes, _ = corpus
    c = classes[10]
    gen = c["generation_precision"]
    ok = c["maps_ok"] >= 20 and gen is not None and gen >= 0.70
    report(acceptance_lines, 4, ok,
           f"10x10 generation precision {pct(gen)} (reference {100 * REFERENCE_GENERATION:.2f}%), threshold 70%, "
           f"{c['maps_ok']} maps trained, {c['maps_with_candidates']} with candidates, {c['valid']}/{c['candidates']} valid")
    assert ok


def test_immune_precision(corpus, acceptance_lines):
    classes, _ = corpus
    c = classes[10]
    imm, clean = c["immune_precision"], c["clean_success_after"]
    ok = imm is not None and imm >= 0.70 and clean is not None and clean >= 0.80
    report(acceptance_lines, 5, ok,
           f"10x10 immune precision {pct(imm)} (reference {100 * REFERENCE_IMMUNE:.2f}%), threshold 70%; "
           f"clean success after retraining {pct(clean)}, threshold 80%; {c['maps_immunized']} maps immunized, "
           f"{c['retrain_failed']} retrains failed")
    assert ok


def test_speedup(corpus, acceptance_lines):
    _, records = corpus
    ratios = []
    for rec in records:
        imm = rec.get("immunity")
        if imm and imm.get("baseline_wall_seconds") is not None and rec.get("n_valid", 0) >= 5:
            ratios.append(imm["speedup"])
    ok = bool(ratios) and min(ratios) >= 2.0
    text = (f"min traditional/single time ratio {min(ratios):.2f} over {len(ratios)} maps "
            f"(median {float(np.median(ratios)):.2f}), threshold 2.0" if ratios else "no map with >= 5 valid examples")
    report(acceptance_lines, 6, ok, text)
    assert ok


def test_precision_does_not_grow_with_size(corpus, acceptance_lines):
    classes, _ = corpus
    small, large = classes[10], classes[30]
    parts, ok = [], True
    for key in ("generation_precision", "immune_precision"):
        a, b = small[key], large[key]
        if a is None or b is None:
            parts.append(f"{key.split('_')[0]} n/a (10x10 {pct(a)}, 30x30 {pct(b)})")
            ok = False
            continue
        ok &= b <= a + 0.05
        parts.append(f"{key.split('_')[0]} 10x10 {pct(a)} vs 30x30 {pct(b)}")
    report(acceptance_lines, 7, ok, "; ".join(parts) + "; tolerance 5 points")
    assert ok


# ---------------------------------------------------------------- 8: determinism


def test_determinism_and_round_trips(acceptance_lines):
    grid = generate_random_map(10, 0.15, 3)
    cfg = TrainConfig(seed=3)
    runs = []
    for _ in range(2):
        agent = train(grid, cfg)
        result = cdg(grid, agent)
        cap = cfg.cap(10)
        params = AttackParams(epsilon=calibrate_epsilon(agent, grid, cap))
        rep = validate_examples(agent, grid, result.examples, params, cap)
        state = [agent.params.tobytes(), json.dumps(result.record, sort_keys=True),
                 [(s.outcome.steps, s.outcome.end_position, s.f_attack) for s in rep.scored]]
        if len(rep.valid) >= 2:
            imm, new = immunize(agent, grid, rep.valid, params, cfg, selection_seed=1)
            state += [new.params.tobytes(), [(s.outcome.steps, s.f_attack) for s in imm.scored]]
        runs.append(state)
    same = runs[0] == runs[1]

    rng = np.random.default_rng(8)
    map_trips = agent_trips = 0
    for k in range(200):
        m = generate_random_map(int(rng.integers(5, 31)), float(rng.uniform(0, 0.3)), k)
        map_trips += parse(serialize(m)) == m
        arch = make_arch(2, tuple(int(h) for h in rng.integers(1, 65, 2)))
        a = Agent(init_params(arch, rng), arch, 2, int(rng.integers(5, 31)), m.map_id, int(rng.integers(0, 10**7)), k)
        back = agent_from_bytes(agent_to_bytes(a))
        agent_trips += back == a and back.params.tobytes() == a.params.tobytes()
    ok = same and map_trips == 200 and agent_trips == 200
    report(acceptance_lines, 8, ok,
           f"pipeline rerun identical: {same}; map round-trips {map_trips}/200; agent round-trips {agent_trips}/200")
    assert ok
