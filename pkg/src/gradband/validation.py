"""Attack scoring and validation of candidate adversarial examples."""

from __future__ import annotations

import csv
import io
import json
import math
import statistics
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .a3c import Agent, EpisodeResult, rollout
from .cdg import DominantExample, GradientBand
from .gridmap import Cell, GridMap

NEAR_START, NEAR_GOAL, DENSE_BAND = "near-start", "near-goal", "dense-band-region"


class UndefinedPrecisionError(ZeroDivisionError):
    pass


@dataclass(frozen=True)
class AttackParams:
    omega1: float = 0.3
    omega2: float = 0.7
    epsilon: float = 1.0
    mode: str = "steps"  # or "seconds"

    def __post_init__(self) -> None:
        if abs(self.omega1 + self.omega2 - 1.0) > 1e-12:
            raise ValueError(f"weights must sum to 1, got {self.omega1} + {self.omega2}")
        if not self.omega2 > self.omega1:
            raise ValueError("the not-reached weight omega2 must exceed omega1")
        if self.omega1 < 0:
            raise ValueError("weights must be nonnegative")
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if self.mode not in ("steps", "seconds"):
            raise ValueError(f"unknown time mode {self.mode!r}")

    def time_of(self, outcome: EpisodeResult) -> float:
        return float(outcome.steps) if self.mode == "steps" else float(outcome.wall_seconds)

    def to_dict(self) -> dict:
        return {"omega1": self.omega1, "omega2": self.omega2, "epsilon": self.epsilon, "mode": self.mode}


def euclidean_distance(a, b) -> float:
    return math.sqrt(sum((float(p) - float(q)) ** 2 for p, q in zip(a, b)))


def relu_excess_time(t_total: float, epsilon: float) -> float:
    return max(0.0, t_total - epsilon)


def f_attack(outcome: EpisodeResult, goal: Cell, params: AttackParams) -> float:
    """Weighted attack effect; zero exactly when the goal was reached in normal time."""
    return params.omega1 * relu_excess_time(params.time_of(outcome), params.epsilon) + params.omega2 * euclidean_distance(
        outcome.end_position, goal
    )


def generation_precision(n_success: int, m_total: int) -> float:
    if m_total == 0:
        raise UndefinedPrecisionError("generation precision undefined: no candidates")
    if not 0 <= n_success <= m_total:
        raise ValueError(f"successes {n_success} outside [0, {m_total}]")
    return n_success / m_total


def immune_precision(i_success: int, n_success: int) -> float:
    if n_success == 0:
        raise UndefinedPrecisionError("immune precision undefined: no valid examples")
    if not 0 <= i_success <= n_success:
        raise ValueError(f"immunised count {i_success} outside [0, {n_success}]")
    return i_success / n_success


@dataclass
class ScoredExample:
    example: DominantExample
    outcome: EpisodeResult
    f_attack: float
    failure_tags: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "example": self.example.to_dict(),
            "outcome": self.outcome.to_dict(),
            "f_attack": self.f_attack,
            "failure_tags": list(self.failure_tags),
        }

    @classmethod
    def from_dict(cls, d: dict) -> ScoredExample:
        return cls(
            DominantExample.from_dict(d["example"]),
            EpisodeResult.from_dict(d["outcome"]),
            float(d["f_attack"]),
            list(d["failure_tags"]),
        )


@dataclass
class SampleSpaceReport:
    map_id: str
    goal: Cell
    params: AttackParams
    step_cap: int
    scored: list[ScoredExample]

    @property
    def total(self) -> int:
        return len(self.scored)

    @property
    def valid(self) -> list[ScoredExample]:
        return [s for s in self.scored if s.f_attack > 0]

    @property
    def generation_precision(self) -> float:
        return generation_precision(len(self.valid), self.total)

    def to_dict(self) -> dict:
        return {
            "map_id": self.map_id,
            "goal": list(self.goal),
            "params": self.params.to_dict(),
            "step_cap": self.step_cap,
            "total": self.total,
            "n_valid": len(self.valid),
            "generation_precision": self.generation_precision if self.total else None,
            "scored": [s.to_dict() for s in self.scored],
        }

    @classmethod
    def from_dict(cls, d: dict) -> SampleSpaceReport:
        return cls(
            d["map_id"],
            tuple(d["goal"]),
            AttackParams(**d["params"]),
            int(d["step_cap"]),
            [ScoredExample.from_dict(s) for s in d["scored"]],
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_csv(self) -> str:
        return scored_csv(self.scored, self.params, self.step_cap)


def scored_csv(scored: list[ScoredExample], params: AttackParams, step_cap: int) -> str:
    """One row per scored example: time, arrival cell, score and tags."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    unit = "steps" if params.mode == "steps" else "s"
    writer.writerow(["example_id", f"time_{unit}", "hit_cap", "actual_arrived_point", "f_attack", "failure_tags"])
    for s in scored:
        t = params.time_of(s.outcome)
        hit_cap = not s.outcome.reached and s.outcome.steps >= step_cap
        x, y = s.outcome.end_position
        writer.writerow(
            [s.example.example_id, f"{t:g}", "T_max" if hit_cap else "", f"({x},{y})", f"{s.f_attack:.2f}", ";".join(s.failure_tags)]
        )
    return buf.getvalue()


def rescore(report: SampleSpaceReport) -> list[float]:
    return [f_attack(s.outcome, report.goal, report.params) for s in report.scored]


# ---------------------------------------------------------------- tagging


def _chebyshev(a: Cell, b: Cell) -> int:
    return max(abs(a[0] - b[0]), abs(a[1] - b[1]))


def failure_tags(
    example: DominantExample,
    grid: GridMap,
    band: GradientBand | None = None,
    band_swapped: bool = False,
    radius: int = 2,
) -> list[str]:
    """Diagnostic tags: baffle near the start/goal, or sitting in an obstacle-dense
    stretch of the band (local band obstacle density above twice the map mean)."""
    tags = []
    if any(_chebyshev(c, grid.start) <= radius for c in example.baffle_cells):
        tags.append(NEAR_START)
    if any(_chebyshev(c, grid.goal) <= radius for c in example.baffle_cells):
        tags.append(NEAR_GOAL)
    if band is not None and grid.obstacles:
        n = grid.size_n
        near = np.zeros((n, n), dtype=bool)
        for x, y in example.baffle_cells:
            near[max(0, x - radius) : x + radius + 1, max(0, y - radius) : y + radius + 1] = True
        xs, ys = np.nonzero(near)
        bx, by = (ys, xs) if band_swapped else (xs, ys)
        in_band = band.contains(bx.astype(float), by.astype(float))
        if in_band.any():
            local = grid.occupancy[xs[in_band], ys[in_band]].mean()
            if local > 2.0 * grid.density:
                tags.append(DENSE_BAND)
    return tags


# ---------------------------------------------------------------- validation


def representative_outcome(outcomes: list[EpisodeResult], params: AttackParams) -> EpisodeResult:
    """Majority reached-verdict, then the median-time trial among that majority."""
    reached = [o for o in outcomes if o.reached]
    missed = [o for o in outcomes if not o.reached]
    pool = reached if len(reached) > len(missed) else missed
    pool = sorted(pool, key=params.time_of)
    return pool[(len(pool) - 1) // 2]


def calibrate_epsilon(agent: Agent, grid: GridMap, step_cap: int, mode: str = "steps", factor: float = 3.0, trials: int = 5) -> float:
    """Normal-time threshold: ``factor`` times the median clean greedy rollout time."""
    runs = [rollout(agent, grid, step_cap, "greedy") for _ in range(1 if mode == "steps" else trials)]
    times = [float(r.steps) if mode == "steps" else r.wall_seconds for r in runs]
    return factor * max(statistics.median(times), 1.0 if mode == "steps" else 1e-6)


def score_example(
    agent: Agent,
    grid: GridMap,
    example: DominantExample,
    params: AttackParams,
    step_cap: int,
    trials: int = 5,
    rollout_mode: str = "greedy",
    seed: int = 0,
    band: GradientBand | None = None,
    band_swapped: bool = False,
) -> ScoredExample:
    perturbed = example.apply(grid)
    # a greedy rollout is deterministic in steps; one run stands for all trials
    runs = 1 if (rollout_mode == "greedy" and params.mode == "steps") else trials
    seeds = np.random.SeedSequence(seed).generate_state(runs)
    outcomes = [rollout(agent, perturbed, step_cap, rollout_mode, int(s)) for s in seeds]
    outcome = representative_outcome(outcomes, params)
    return ScoredExample(example, outcome, f_attack(outcome, grid.goal, params), failure_tags(example, grid, band, band_swapped))


def validate_examples(
    agent: Agent,
    grid: GridMap,
    examples: list[DominantExample],
    params: AttackParams,
    step_cap: int,
    trials: int = 5,
    rollout_mode: str = "greedy",
    seed: int = 0,
    band: GradientBand | None = None,
    band_swapped: bool = False,
    workers: int = 1,
) -> SampleSpaceReport:
    """Score every candidate against ``agent``; the report's valid set holds those
    with a positive attack score."""
    seeds = np.random.SeedSequence(seed).generate_state(max(len(examples), 1))

    def job(i: int) -> ScoredExample:
        return score_example(agent, grid, examples[i], params, step_cap, trials, rollout_mode, int(seeds[i]), band, band_swapped)

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            scored = list(pool.map(job, range(len(examples))))
    else:
        scored = [job(i) for i in range(len(examples))]
    return SampleSpaceReport(grid.map_id, grid.goal, params, step_cap, scored)
