"""Asynchronous advantage actor-critic for grid path finding, in plain numpy.

The network maps a local observation (a square window around the agent plus
the goal offset) through two tanh layers to 4 action logits and a scalar
value. Workers share one parameter store guarded by a lock; each worker steps
a small batch of environments in lockstep and pushes n-step gradients.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
import struct
import threading
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .gridmap import Cell, GridMap
from .surface import ValueSurface

log = logging.getLogger(__name__)

# up, down, left, right in (dx, dy)
ACTIONS = np.array([(0, 1), (0, -1), (-1, 0), (1, 0)], dtype=np.int64)
N_ACTIONS = len(ACTIONS)

WALL, FREE, GOAL = -1.0, 0.0, 1.0


class TrainingDivergedError(RuntimeError):
    def __init__(self, step: int, detail: str):
        super().__init__(f"non-finite loss or parameters at env step {step}: {detail}")
        self.step = step


class AgentFileError(ValueError):
    """Checkpoint is truncated, corrupted or from an unknown format version."""


@dataclass
class TrainConfig:
    workers: int = 1
    envs_per_worker: int = 16
    total_env_steps: int | None = None  # None: reference_budget(N)
    n_step: int = 8
    gamma: float = 0.99
    lr: float = 3e-4
    entropy_coef: float = 0.01
    value_coef: float = 0.5
    max_grad_norm: float = 5.0
    step_cap: int | None = None  # T_max; None: 4 * N * N
    goal_reward: float = 1.0
    step_penalty: float = -0.002
    collision_penalty: float = -0.01
    random_start_prob: float = 0.5
    hidden: tuple[int, int] = (64, 64)
    window: int = 2
    seed: int = 0

    def validate(self, n: int) -> None:
        if self.workers < 1 or self.envs_per_worker < 1:
            raise ValueError("workers and envs_per_worker must be >= 1")
        if not 0.0 < self.gamma < 1.0:
            raise ValueError(f"gamma must lie in (0, 1), got {self.gamma}")
        if self.n_step < 1:
            raise ValueError("n_step must be >= 1")
        if self.cap(n) < 4 * n:
            raise ValueError(f"step cap {self.cap(n)} below 4N = {4 * n}")
        if self.lr <= 0 or self.entropy_coef < 0 or self.value_coef < 0:
            raise ValueError("lr must be positive, loss coefficients nonnegative")
        if not 0.0 <= self.random_start_prob <= 1.0:
            raise ValueError("random_start_prob must lie in [0, 1]")

    def cap(self, n: int) -> int:
        return 4 * n * n if self.step_cap is None else int(self.step_cap)

    def budget(self, n: int) -> int:
        return reference_budget(n) if self.total_env_steps is None else int(self.total_env_steps)


def reference_budget(n: int) -> int:
    """Environment steps that reliably train an agent on an n x n map."""
    return 2000 * n * n


# ---------------------------------------------------------------- network


def make_arch(window: int = 2, hidden: Sequence[int] = (64, 64)) -> tuple[int, ...]:
    side = 2 * window + 1
    return (side * side + 2, *[int(h) for h in hidden], N_ACTIONS)


def _shapes(arch: Sequence[int]) -> list[tuple[int, ...]]:
    d, h1, h2, a = arch
    return [(d, h1), (h1,), (h1, h2), (h2,), (h2, a), (a,), (h2, 1), (1,)]


def param_count(arch: Sequence[int]) -> int:
    return sum(math.prod(s) for s in _shapes(arch))


def unpack(params: np.ndarray, arch: Sequence[int]) -> list[np.ndarray]:
    out, i = [], 0
    for shape in _shapes(arch):
        size = math.prod(shape)
        out.append(params[i : i + size].reshape(shape))
        i += size
    if i != params.size:
        raise ValueError(f"parameter vector has {params.size} entries, arch needs {i}")
    return out


def init_params(arch: Sequence[int], rng: np.random.Generator) -> np.ndarray:
    d, h1, h2, a = arch
    parts = [
        rng.normal(0.0, 1.0 / math.sqrt(d), (d, h1)),
        np.zeros(h1),
        rng.normal(0.0, 1.0 / math.sqrt(h1), (h1, h2)),
        np.zeros(h2),
        rng.normal(0.0, 0.01 / math.sqrt(h2), (h2, a)),
        np.zeros(a),
        rng.normal(0.0, 1.0 / math.sqrt(h2), (h2, 1)),
        np.zeros(1),
    ]
    return np.concatenate([p.ravel() for p in parts])


def forward(params: np.ndarray, arch: Sequence[int], obs: np.ndarray):
    """Return (probs, values, cache) for a batch of observations."""
    w1, b1, w2, b2, wp, bp, wv, bv = unpack(params, arch)
    h1 = np.tanh(obs @ w1 + b1)
    h2 = np.tanh(h1 @ w2 + b2)
    logits = h2 @ wp + bp
    logits = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(logits)
    probs = e / e.sum(axis=1, keepdims=True)
    values = (h2 @ wv + bv)[:, 0]
    return probs, values, (obs, h1, h2, logits)


def loss_and_grad(
    params: np.ndarray,
    arch: Sequence[int],
    obs: np.ndarray,
    actions: np.ndarray,
    returns: np.ndarray,
    advantages: np.ndarray,
    entropy_coef: float,
    value_coef: float,
) -> tuple[float, np.ndarray]:
    """Mean A3C loss over the batch and its gradient.

    loss_i = -log pi(a_i|s_i) * A_i - entropy_coef * H(pi(.|s_i)) + value_coef * (R_i - V(s_i))**2

    Advantages enter as constants, as in the actor-critic update.
    """
    w1, b1, w2, b2, wp, bp, wv, bv = unpack(params, arch)
    probs, values, (x, h1, h2, logits) = forward(params, arch, obs)
    batch = obs.shape[0]
    rows = np.arange(batch)
    logp = logits - np.log(np.exp(logits).sum(axis=1, keepdims=True))
    entropy = -(probs * logp).sum(axis=1)
    diff = values - returns
    loss = (-logp[rows, actions] * advantages - entropy_coef * entropy + value_coef * diff**2).mean()

    dlogits = probs * advantages[:, None]
    dlogits[rows, actions] -= advantages
    dlogits += entropy_coef * probs * (logp + entropy[:, None])
    dlogits /= batch
    dvalues = (2.0 * value_coef / batch) * diff

    g_wp = h2.T @ dlogits
    g_bp = dlogits.sum(axis=0)
    g_wv = h2.T @ dvalues[:, None]
    g_bv = np.array([dvalues.sum()])
    dh2 = dlogits @ wp.T + dvalues[:, None] @ wv.T
    da2 = dh2 * (1.0 - h2 * h2)
    g_w2 = h1.T @ da2
    g_b2 = da2.sum(axis=0)
    da1 = (da2 @ w2.T) * (1.0 - h1 * h1)
    g_w1 = x.T @ da1
    g_b1 = da1.sum(axis=0)
    grad = np.concatenate(
        [g.ravel() for g in (g_w1, g_b1, g_w2, g_b2, g_wp, g_bp, g_wv, g_bv)]
    )
    return float(loss), grad


# ---------------------------------------------------------------- agent


@dataclass
class Agent:
    params: np.ndarray
    arch: tuple[int, ...]
    window: int
    size_n: int
    trained_on: str = ""
    train_steps: int = 0
    seed: int = 0

    def __post_init__(self) -> None:
        self.params = np.asarray(self.params, dtype=np.float64)
        self.arch = tuple(int(a) for a in self.arch)
        if self.params.ndim != 1 or self.params.size != param_count(self.arch):
            raise ValueError(
                f"params length {self.params.size} does not match arch {self.arch} "
                f"({param_count(self.arch)})"
            )
        if (2 * self.window + 1) ** 2 + 2 != self.arch[0]:
            raise ValueError(f"window radius {self.window} inconsistent with input size {self.arch[0]}")

    def __eq__(self, other) -> bool:
        if not isinstance(other, Agent):
            return NotImplemented
        return (
            self.arch == other.arch
            and self.window == other.window
            and self.size_n == other.size_n
            and self.trained_on == other.trained_on
            and self.train_steps == other.train_steps
            and self.seed == other.seed
            and self.params.tobytes() == other.params.tobytes()
        )

    def copy(self, **changes) -> Agent:
        return replace(self, params=self.params.copy(), **changes)

    def policy_value(self, obs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        probs, values, _ = forward(self.params, self.arch, obs)
        return probs, values


# ---------------------------------------------------------------- environment


def _glyph_grid(grid: GridMap, window: int) -> np.ndarray:
    """Padded ``[x, y]`` glyph array: walls/obstacles -1, free 0, goal +1."""
    n = grid.size_n
    g = np.full((n + 2 * window, n + 2 * window), WALL)
    inner = np.where(grid.occupancy, WALL, FREE)
    inner[grid.goal] = GOAL
    g[window : window + n, window : window + n] = inner
    return g


class GridEnvBatch:
    """``count`` copies of a grid world stepped in lockstep.

    Each episode runs on one of ``maps`` (all the same size and goal), chosen
    round-robin across resets. Moving into a wall or obstacle keeps the agent in
    place and costs the collision penalty.
    """

    def __init__(self, maps: Sequence[GridMap], count: int, cfg: TrainConfig, rng: np.random.Generator):
        sizes = {m.size_n for m in maps}
        if len(sizes) != 1:
            raise ValueError("all training maps must share one size")
        self.maps = list(maps)
        self.n = sizes.pop()
        self.cfg = cfg
        self.window = cfg.window
        self.count = count
        self.rng = rng
        self.cap = cfg.cap(self.n)
        self.glyphs = np.stack([_glyph_grid(m, self.window) for m in self.maps])
        self.goals = np.array([m.goal for m in self.maps], dtype=np.int64)
        self.starts = np.array([m.start for m in self.maps], dtype=np.int64)
        self.free_cells = [
            np.array([c for c in m.free_cells() if c != m.goal], dtype=np.int64) for m in self.maps
        ]
        side = 2 * self.window + 1
        ox, oy = np.meshgrid(np.arange(side), np.arange(side), indexing="ij")
        self._ox, self._oy = ox.ravel(), oy.ravel()
        self._next_map = 0
        self.map_idx = np.zeros(count, dtype=np.int64)
        self.pos = np.zeros((count, 2), dtype=np.int64)
        self.t = np.zeros(count, dtype=np.int64)
        self.episodes = 0
        self.successes = 0
        for i in range(count):
            self._reset(i)

    def _reset(self, i: int) -> None:
        m = self._next_map
        self._next_map = (self._next_map + 1) % len(self.maps)
        self.map_idx[i] = m
        if self.rng.random() < self.cfg.random_start_prob:
            cells = self.free_cells[m]
            self.pos[i] = cells[self.rng.integers(len(cells))]
        else:
            self.pos[i] = self.starts[m]
        self.t[i] = 0

    def observe(self, pos: np.ndarray | None = None, map_idx: np.ndarray | None = None) -> np.ndarray:
        pos = self.pos if pos is None else pos
        map_idx = self.map_idx if map_idx is None else map_idx
        win = self.glyphs[map_idx[:, None], pos[:, :1] + self._ox, pos[:, 1:] + self._oy]
        delta = (self.goals[map_idx] - pos) / self.n
        return np.concatenate([win, delta], axis=1)

    def step(self, actions: np.ndarray):
        """Advance every copy; returns (rewards, terminal, truncated, final_obs).

        ``final_obs`` holds the pre-reset observation of truncated copies (zeros elsewhere).
        """
        cfg = self.cfg
        target = self.pos + ACTIONS[actions]
        w = self.window
        blocked = self.glyphs[self.map_idx, target[:, 0] + w, target[:, 1] + w] == WALL
        self.pos = np.where(blocked[:, None], self.pos, target)
        self.t += 1
        at_goal = np.all(self.pos == self.goals[self.map_idx], axis=1)
        rewards = cfg.step_penalty + cfg.collision_penalty * blocked + cfg.goal_reward * at_goal
        truncated = ~at_goal & (self.t >= self.cap)
        final_obs = np.zeros((self.count, self._ox.size + 2))
        if truncated.any():
            final_obs[truncated] = self.observe()[truncated]
        done = at_goal | truncated
        if done.any():
            self.episodes += int(done.sum())
            self.successes += int(at_goal.sum())
            for i in np.flatnonzero(done):
                self._reset(int(i))
        return rewards, at_goal, truncated, final_obs


def observation(grid: GridMap, cell: Cell, window: int = 2) -> np.ndarray:
    """Observation vector the agent receives standing on ``cell``."""
    glyphs = _glyph_grid(grid, window)
    side = 2 * window + 1
    x, y = cell
    win = glyphs[x : x + side, y : y + side].ravel()
    delta = (np.array(grid.goal) - np.array(cell)) / grid.size_n
    return np.concatenate([win, delta])


# ---------------------------------------------------------------- training


class SharedParameterStore:
    """Parameters plus Adam moments; updates are serialized by a lock."""

    def __init__(self, params: np.ndarray, lr: float, max_grad_norm: float):
        self.params = params.copy()
        self.lr = lr
        self.max_grad_norm = max_grad_norm
        self.m = np.zeros_like(self.params)
        self.v = np.zeros_like(self.params)
        self.t = 0
        self.applied = 0
        self.env_steps = 0
        self._lock = threading.Lock()

    def snapshot(self) -> np.ndarray:
        with self._lock:
            return self.params.copy()

    def reserve(self, steps: int, budget: int) -> bool:
        """Claim ``steps`` of the environment budget; False once it is spent."""
        with self._lock:
            if self.env_steps >= budget:
                return False
            self.env_steps += steps
            return True

    def apply(self, grad: np.ndarray) -> None:
        norm = float(np.sqrt(grad @ grad))
        if self.max_grad_norm and norm > self.max_grad_norm:
            grad = grad * (self.max_grad_norm / norm)
        with self._lock:
            self.t += 1
            self.m = 0.9 * self.m + 0.1 * grad
            self.v = 0.999 * self.v + 0.001 * grad * grad
            m_hat = self.m / (1 - 0.9**self.t)
            v_hat = self.v / (1 - 0.999**self.t)
            self.params = self.params - self.lr * m_hat / (np.sqrt(v_hat) + 1e-8)
            self.applied += 1


def nstep_returns(rewards, terminal, truncated, trunc_values, bootstrap, gamma):
    """Discounted n-step returns for arrays shaped (steps, envs)."""
    steps = rewards.shape[0]
    out = np.empty_like(rewards)
    running = bootstrap
    for t in range(steps - 1, -1, -1):
        running = np.where(truncated[t], trunc_values[t], running)
        running = rewards[t] + gamma * running * (~terminal[t])
        out[t] = running
    return out


def _worker(store: SharedParameterStore, maps, cfg: TrainConfig, arch, budget: int, rng, produced: list, errors: list):
    try:
        env = GridEnvBatch(maps, cfg.envs_per_worker, cfg, rng)
        obs = env.observe()
        count = cfg.envs_per_worker
        batch_steps = count * cfg.n_step
        while store.reserve(batch_steps, budget):
            params = store.snapshot()
            obs_buf, act_buf, val_buf = [], [], []
            rew_buf, term_buf, trunc_buf, tv_buf = [], [], [], []
            for _ in range(cfg.n_step):
                probs, values, _ = forward(params, arch, obs)
                u = rng.random(count)[:, None]
                actions = np.minimum((probs.cumsum(axis=1) < u).sum(axis=1), N_ACTIONS - 1)
                rewards, terminal, truncated, final_obs = env.step(actions)
                if truncated.any():
                    _, tv, _ = forward(params, arch, final_obs)
                    tv = np.where(truncated, tv, 0.0)
                else:
                    tv = np.zeros(count)
                obs_buf.append(obs)
                act_buf.append(actions)
                val_buf.append(values)
                rew_buf.append(rewards)
                term_buf.append(terminal)
                trunc_buf.append(truncated)
                tv_buf.append(tv)
                obs = env.observe()
            _, bootstrap, _ = forward(params, arch, obs)
            returns = nstep_returns(
                np.array(rew_buf), np.array(term_buf), np.array(trunc_buf), np.array(tv_buf), bootstrap, cfg.gamma
            )
            advantages = returns - np.array(val_buf)
            loss, grad = loss_and_grad(
                params,
                arch,
                np.concatenate(obs_buf),
                np.concatenate(act_buf),
                returns.ravel(),
                advantages.ravel(),
                cfg.entropy_coef,
                cfg.value_coef,
            )
            if not (math.isfinite(loss) and np.all(np.isfinite(grad))):
                raise TrainingDivergedError(store.env_steps, f"loss={loss}")
            store.apply(grad)
            produced.append(1)
    except BaseException as exc:  # surfaced by the caller after join
        errors.append(exc)


def train(
    grid: GridMap | Sequence[GridMap],
    cfg: TrainConfig | None = None,
    init: Agent | None = None,
    budget: int | None = None,
) -> Agent:
    """Train (or, with ``init``, fine-tune) an agent.

    ``grid`` may be a list of same-size maps, visited round-robin per episode.
    With ``workers == 1`` and a fixed seed the result is bit-reproducible.
    """
    cfg = cfg or TrainConfig()
    maps = [grid] if isinstance(grid, GridMap) else list(grid)
    n = maps[0].size_n
    cfg.validate(n)
    budget = cfg.budget(n) if budget is None else int(budget)
    seq = np.random.SeedSequence(cfg.seed)
    init_rng, *worker_seeds = seq.spawn(cfg.workers + 1)
    if init is None:
        arch = make_arch(cfg.window, cfg.hidden)
        params = init_params(arch, np.random.default_rng(init_rng))
        prior_steps = 0
    else:
        if init.size_n != n or init.window != cfg.window:
            raise ValueError("initial agent does not match map size / window")
        arch, params, prior_steps = init.arch, init.params, init.train_steps
    agent = Agent(params.copy(), arch, cfg.window, n, maps[0].map_id, prior_steps, cfg.seed)
    if budget <= 0:
        return agent

    store = SharedParameterStore(params, cfg.lr, cfg.max_grad_norm)
    produced: list = []
    errors: list = []
    rngs = [np.random.default_rng(s) for s in worker_seeds]
    if cfg.workers == 1:
        _worker(store, maps, cfg, arch, budget, rngs[0], produced, errors)
    else:
        threads = [
            threading.Thread(target=_worker, args=(store, maps, cfg, arch, budget, rngs[k], produced, errors))
            for k in range(cfg.workers)
        ]
        for th in threads:
            th.start()
        for th in threads:
            th.join()
    if errors:
        raise errors[0]
    if len(produced) != store.applied:
        raise RuntimeError(f"lost updates: produced {len(produced)}, applied {store.applied}")
    if not np.all(np.isfinite(store.params)):
        raise TrainingDivergedError(store.env_steps, "non-finite parameters")
    agent.params = store.params
    agent.train_steps = prior_steps + store.env_steps
    return agent


# ---------------------------------------------------------------- evaluation


@dataclass
class EpisodeResult:
    reached: bool
    steps: int
    wall_seconds: float
    end_position: Cell
    path: list[Cell] = field(repr=False)

    def to_dict(self) -> dict:
        return {
            "reached": self.reached,
            "steps": self.steps,
            "wall_seconds": self.wall_seconds,
            "end_position": list(self.end_position),
            "path": [list(c) for c in self.path],
        }

    @classmethod
    def from_dict(cls, data: dict) -> EpisodeResult:
        return cls(
            bool(data["reached"]),
            int(data["steps"]),
            float(data["wall_seconds"]),
            tuple(data["end_position"]),
            [tuple(c) for c in data["path"]],
        )


def rollout(
    agent: Agent,
    grid: GridMap,
    step_cap: int,
    mode: str = "greedy",
    seed: int = 0,
) -> EpisodeResult:
    if grid.size_n != agent.size_n:
        raise ValueError(f"agent trained for {agent.size_n}x{agent.size_n}, map is {grid.size_n}x{grid.size_n}")
    if mode not in ("greedy", "stochastic"):
        raise ValueError(f"unknown rollout mode {mode!r}")
    rng = np.random.default_rng(seed)
    w = agent.window
    side = 2 * w + 1
    glyphs = _glyph_grid(grid, w)
    goal = np.array(grid.goal)
    n = grid.size_n
    w1, b1, w2, b2, wp, bp, wv, bv = unpack(agent.params, agent.arch)
    x, y = grid.start
    path = [(x, y)]
    obs = np.empty(side * side + 2)
    t0 = time.perf_counter()
    steps = 0
    while steps < step_cap and (x, y) != grid.goal:
        obs[:-2] = glyphs[x : x + side, y : y + side].ravel()
        obs[-2] = (goal[0] - x) / n
        obs[-1] = (goal[1] - y) / n
        logits = np.tanh(np.tanh(obs @ w1 + b1) @ w2 + b2) @ wp + bp
        if mode == "greedy":
            a = int(np.argmax(logits))
        else:
            p = np.exp(logits - logits.max())
            p /= p.sum()
            a = min(int((p.cumsum() < rng.random()).sum()), N_ACTIONS - 1)
        dx, dy = ACTIONS[a]
        if glyphs[x + dx + w, y + dy + w] != WALL:
            x, y = x + int(dx), y + int(dy)
        steps += 1
        path.append((x, y))
    wall = time.perf_counter() - t0
    return EpisodeResult((x, y) == grid.goal, steps, wall, (x, y), path)


def success_rate(agent: Agent, grid: GridMap, step_cap: int, rollouts: int = 100, mode: str = "greedy", seed: int = 0) -> float:
    """Fraction of rollouts reaching the goal. Greedy rollouts are deterministic,
    so one episode stands for all of them."""
    if mode == "greedy":
        return 1.0 if rollout(agent, grid, step_cap, "greedy").reached else 0.0
    seeds = np.random.SeedSequence(seed).generate_state(rollouts)
    hits = sum(rollout(agent, grid, step_cap, "stochastic", int(s)).reached for s in seeds)
    return hits / rollouts


def extract_value_surface(agent: Agent, grid: GridMap, terminal_value: float | None = None) -> ValueSurface:
    """Critic value at every free cell.

    The goal is absorbing and never evaluated by the critic during training;
    it carries ``terminal_value`` (default: the arrival reward 1.0). Obstacles
    carry the minimum free-cell value.
    """
    if grid.size_n != agent.size_n:
        raise ValueError("agent and map sizes differ")
    n = grid.size_n
    cells = [c for c in grid.free_cells() if c != grid.goal]
    values = np.zeros((n, n))
    free = ~grid.occupancy
    if cells:
        glyphs = _glyph_grid(grid, agent.window)
        side = 2 * agent.window + 1
        obs = np.array(
            [
                np.concatenate(
                    [glyphs[x : x + side, y : y + side].ravel(), (np.array(grid.goal) - (x, y)) / n]
                )
                for x, y in cells
            ]
        )
        _, v, _ = forward(agent.params, agent.arch, obs)
        for (x, y), val in zip(cells, v):
            values[x, y] = val
    values[grid.goal] = TrainConfig.goal_reward if terminal_value is None else terminal_value
    fill = values[free].min()
    values[~free] = fill
    return ValueSurface(n, values, free)


# ---------------------------------------------------------------- checkpoints

MAGIC = b"GBAGENT\x00"
FORMAT_VERSION = 1
_PREFIX = struct.Struct("<8sII")


def agent_to_bytes(agent: Agent) -> bytes:
    payload = agent.params.astype("<f8").tobytes()
    header = json.dumps(
        {
            "arch": list(agent.arch),
            "window": agent.window,
            "size_n": agent.size_n,
            "trained_on": agent.trained_on,
            "train_steps": agent.train_steps,
            "seed": agent.seed,
            "n_params": int(agent.params.size),
            "sha256": hashlib.sha256(payload).hexdigest(),
        },
        sort_keys=True,
    ).encode()
    return _PREFIX.pack(MAGIC, FORMAT_VERSION, len(header)) + header + payload


def agent_from_bytes(blob: bytes) -> Agent:
    if len(blob) < _PREFIX.size:
        raise AgentFileError("checkpoint shorter than its fixed prefix")
    magic, version, header_len = _PREFIX.unpack_from(blob)
    if magic != MAGIC:
        raise AgentFileError("not an agent checkpoint (bad magic)")
    if version != FORMAT_VERSION:
        raise AgentFileError(f"unsupported checkpoint version {version} (expected {FORMAT_VERSION})")
    start = _PREFIX.size
    if len(blob) < start + header_len:
        raise AgentFileError("checkpoint truncated inside header")
    try:
        header = json.loads(blob[start : start + header_len])
    except ValueError as exc:
        raise AgentFileError(f"corrupt header: {exc}") from None
    payload = blob[start + header_len :]
    if len(payload) != 8 * header["n_params"]:
        raise AgentFileError(f"expected {8 * header['n_params']} parameter bytes, found {len(payload)}")
    if hashlib.sha256(payload).hexdigest() != header["sha256"]:
        raise AgentFileError("parameter checksum mismatch")
    params = np.frombuffer(payload, dtype="<f8").astype(np.float64)
    return Agent(
        params,
        tuple(header["arch"]),
        int(header["window"]),
        int(header["size_n"]),
        header["trained_on"],
        int(header["train_steps"]),
        int(header["seed"]),
    )


def save_agent(agent: Agent, path) -> None:
    Path(path).write_bytes(agent_to_bytes(agent))


def load_agent(path) -> Agent:
    return agent_from_bytes(Path(path).read_bytes())
