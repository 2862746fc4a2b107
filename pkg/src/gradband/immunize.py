"""Adversarial retraining against baffle examples and immunity measurement."""

from __future__ import annotations

import csv
import io
import json
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .a3c import Agent, TrainConfig, rollout, success_rate, train
from .cdg import DominantExample, GradientBand
from .gridmap import GridMap
from .validation import AttackParams, ScoredExample, immune_precision, validate_examples


class RetrainFailedError(RuntimeError):
    """The retrained agent still cannot solve the map it was retrained on."""

    def __init__(self, message: str, agent: Agent, success: float):
        super().__init__(message)
        self.agent = agent
        self.success = success


@dataclass(frozen=True)
class RetrainConfig:
    budget_fraction: float = 0.2
    mix_clean: bool = False
    from_scratch: bool = False
    required_success: float = 0.2  # below this (>= 80% failing rollouts) retraining has failed
    rollouts: int = 100

    def __post_init__(self) -> None:
        if not 0.0 <= self.budget_fraction <= 0.2:
            raise ValueError(f"retrain budget fraction must lie in [0, 0.2], got {self.budget_fraction}")


def retrain_budget(agent: Agent, cfg: TrainConfig, rcfg: RetrainConfig) -> int:
    original = agent.train_steps if agent.train_steps > 0 else cfg.budget(agent.size_n)
    return int(original * rcfg.budget_fraction)


def _fine_tune(agent: Agent, maps: list[GridMap], cfg: TrainConfig, budget: int, from_scratch: bool) -> Agent:
    if budget <= 0:
        return agent.copy()
    if from_scratch:
        return train(maps, cfg, budget=budget)
    return train(maps, cfg, init=agent, budget=budget)


def _check(agent_new: Agent, grid: GridMap, cfg: TrainConfig, rcfg: RetrainConfig) -> None:
    rate = success_rate(agent_new, grid, cfg.cap(grid.size_n), rcfg.rollouts)
    if rate < rcfg.required_success:
        raise RetrainFailedError(
            f"retrained agent reaches the goal of {grid.map_id} in {rate:.0%} of greedy rollouts",
            agent_new,
            rate,
        )


def gradient_band_retrain(
    agent: Agent,
    example: DominantExample,
    base_map: GridMap,
    cfg: TrainConfig | None = None,
    rcfg: RetrainConfig | None = None,
) -> Agent:
    """Fine-tune ``agent`` on the single perturbed map ``example.apply(base_map)``.

    Raises RetrainFailedError (carrying the retrained agent) when the result
    still fails on the perturbed map. A zero budget returns an identical copy.
    """
    cfg = cfg or TrainConfig()
    rcfg = rcfg or RetrainConfig()
    perturbed = example.apply(base_map)
    maps = [perturbed, base_map] if rcfg.mix_clean else [perturbed]
    budget = retrain_budget(agent, cfg, rcfg)
    agent_new = _fine_tune(agent, maps, cfg, budget, rcfg.from_scratch)
    if budget > 0:
        _check(agent_new, perturbed, cfg, rcfg)
    return agent_new


def traditional_adversarial_training(
    agent: Agent,
    examples: list[DominantExample],
    base_map: GridMap,
    cfg: TrainConfig | None = None,
    rcfg: RetrainConfig | None = None,
) -> tuple[Agent, float]:
    """Fine-tune over every perturbed map round-robin; the budget is the
    single-example budget times the number of examples."""
    if not examples:
        raise ValueError("traditional adversarial training needs at least one example")
    cfg = cfg or TrainConfig()
    rcfg = rcfg or RetrainConfig()
    maps = [e.apply(base_map) for e in examples]
    if rcfg.mix_clean:
        maps.append(base_map)
    budget = retrain_budget(agent, cfg, rcfg) * len(examples)
    t0 = time.perf_counter()
    agent_new = _fine_tune(agent, maps, cfg, budget, rcfg.from_scratch)
    return agent_new, time.perf_counter() - t0


def choose_training_example(valid: list[ScoredExample], seed: int) -> int:
    if not valid:
        raise ValueError("valid set is empty")
    return int(np.random.default_rng(seed).integers(len(valid)))


@dataclass
class ImmunityReport:
    map_id: str
    training_example_id: str
    selection_seed: int
    retrain_wall_seconds: float
    scored: list[ScoredExample]
    clean_success: float
    own_success: float
    retrain_failed: bool = False
    baseline_wall_seconds: float | None = None
    baseline_immune_precision: float | None = None
    params: AttackParams = field(default_factory=AttackParams)

    @property
    def n_immunized(self) -> int:
        return sum(1 for s in self.scored if s.f_attack == 0)

    @property
    def immune_precision(self) -> float:
        return immune_precision(self.n_immunized, len(self.scored))

    @property
    def speedup(self) -> float | None:
        if self.baseline_wall_seconds is None or self.retrain_wall_seconds <= 0:
            return None
        return self.baseline_wall_seconds / self.retrain_wall_seconds

    def to_dict(self) -> dict:
        return {
            "map_id": self.map_id,
            "training_example_id": self.training_example_id,
            "selection_seed": self.selection_seed,
            "retrain_wall_seconds": self.retrain_wall_seconds,
            "baseline_wall_seconds": self.baseline_wall_seconds,
            "speedup": self.speedup,
            "clean_success": self.clean_success,
            "own_success": self.own_success,
            "retrain_failed": self.retrain_failed,
            "immune_precision": self.immune_precision if self.scored else None,
            "baseline_immune_precision": self.baseline_immune_precision,
            "params": self.params.to_dict(),
            "scored": [s.to_dict() for s in self.scored],
        }

    @classmethod
    def from_dict(cls, d: dict) -> ImmunityReport:
        return cls(
            d["map_id"],
            d["training_example_id"],
            int(d["selection_seed"]),
            float(d["retrain_wall_seconds"]),
            [ScoredExample.from_dict(s) for s in d["scored"]],
            float(d["clean_success"]),
            float(d["own_success"]),
            bool(d["retrain_failed"]),
            d["baseline_wall_seconds"],
            d["baseline_immune_precision"],
            AttackParams(**d["params"]),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["example_id", "reached", "steps", "actual_arrived_point", "f_attack", "immunized", "failure_tags"])
        for s in self.scored:
            x, y = s.outcome.end_position
            writer.writerow(
                [
                    s.example.example_id,
                    int(s.outcome.reached),
                    s.outcome.steps,
                    f"({x},{y})",
                    f"{s.f_attack:.2f}",
                    int(s.f_attack == 0),
                    ";".join(s.failure_tags),
                ]
            )
        return buf.getvalue()


def evaluate_immunity(
    agent_new: Agent,
    base_map: GridMap,
    remaining: list[DominantExample],
    params: AttackParams,
    step_cap: int,
    band: GradientBand | None = None,
    band_swapped: bool = False,
    workers: int = 1,
) -> list[ScoredExample]:
    """Score the examples the original agent was vulnerable to against ``agent_new``."""
    if not remaining:
        raise ValueError("no remaining valid examples to evaluate immunity on")
    report = validate_examples(
        agent_new, base_map, remaining, params, step_cap, band=band, band_swapped=band_swapped, workers=workers
    )
    return report.scored


def immunize(
    agent: Agent,
    base_map: GridMap,
    valid: list[ScoredExample],
    params: AttackParams,
    cfg: TrainConfig | None = None,
    rcfg: RetrainConfig | None = None,
    selection_seed: int = 0,
    baseline: bool = False,
    band: GradientBand | None = None,
    band_swapped: bool = False,
) -> tuple[ImmunityReport, Agent]:
    """Pick one valid example at random, retrain on it, and attack the result
    with the rest of the valid set. With ``baseline`` the traditional
    all-examples retraining is timed as well."""
    cfg = cfg or TrainConfig()
    rcfg = rcfg or RetrainConfig()
    if len(valid) < 2:
        raise ValueError("immunity needs at least two valid examples")
    k = choose_training_example(valid, selection_seed)
    example = valid[k].example
    remaining = [s.example for i, s in enumerate(valid) if i != k]
    cap = cfg.cap(base_map.size_n)

    failed = False
    t0 = time.perf_counter()
    try:
        agent_new = gradient_band_retrain(agent, example, base_map, cfg, rcfg)
    except RetrainFailedError as exc:
        agent_new, failed = exc.agent, True
    retrain_seconds = time.perf_counter() - t0

    scored = evaluate_immunity(agent_new, base_map, remaining, params, cap, band, band_swapped)
    report = ImmunityReport(
        map_id=base_map.map_id,
        training_example_id=example.example_id,
        selection_seed=selection_seed,
        retrain_wall_seconds=retrain_seconds,
        scored=scored,
        clean_success=success_rate(agent_new, base_map, cap),
        own_success=float(rollout(agent_new, example.apply(base_map), cap).reached),
        retrain_failed=failed,
        params=params,
    )
    if baseline:
        all_examples = [s.example for s in valid]
        agent_trad, seconds = traditional_adversarial_training(agent, all_examples, base_map, cfg, rcfg)
        report.baseline_wall_seconds = seconds
        trad_scored = evaluate_immunity(agent_trad, base_map, remaining, params, cap)
        report.baseline_immune_precision = immune_precision(sum(s.f_attack == 0 for s in trad_scored), len(trad_scored))
    return report, agent_new
