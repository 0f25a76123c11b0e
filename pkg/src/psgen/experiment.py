"""Monte Carlo harness: N independent agent-environment pairs, T steps each.

Agents are embarrassingly parallel; agent i draws from the substream
``mix(master_seed, i)`` (see :mod:`psgen.rng`), results land in per-agent
slots and are reduced in agent-index order, so output depends only on the
config and the master seed.  Two engines produce identical results: the
compiled kernel (default) and the pure-Python reference loop built from the
library classes, kept around for cross-checking and for custom environments.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import analytics
from .agent import Agent, AgentConfig
from .clips import ACTION, WILDCARD
from .environments import (
    ALL_IRRELEVANT,
    DRIVER,
    NEVERENDING_COLOR,
    EnvironmentSpec,
)
from .kernels import (
    ENV_COLORS,
    ENV_COLORS_ALL_IRRELEVANT,
    ENV_DRIVER,
    run_ensemble_kernel,
)
from .rng import Xoshiro256StarStar

_ENV_CODES = {
    DRIVER: ENV_DRIVER,
    NEVERENDING_COLOR: ENV_COLORS,
    ALL_IRRELEVANT: ENV_COLORS_ALL_IRRELEVANT,
}


@dataclass
class ExperimentConfig:
    env: EnvironmentSpec
    agent: AgentConfig
    n_agents: int
    n_steps: int
    master_seed: int
    output_path: str | None = None
    analytic_overlay: bool = False
    track_learning_time: bool = False
    engine: str = "kernel"  # "kernel" | "reference"

    def __post_init__(self):
        if self.n_agents < 1 or self.n_steps < 1:
            raise ValueError("n_agents and n_steps must be positive")
        if self.engine not in ("kernel", "reference"):
            raise ValueError(f"unknown engine {self.engine!r}")
        if self.agent.n_actions != self.env.n_actions:
            raise ValueError("agent and environment disagree on action count")
        if self.agent.categories != self.env.categories:
            raise ValueError("agent and environment disagree on category count")
        if self.agent.h0 != 1.0:
            raise ValueError("the ensemble harness assumes h0=1")
        if self.env.variant == DRIVER and self.n_steps > 4000:
            raise ValueError("driver runs are limited to the 4000-step schedule")
        if self.analytic_overlay and not (
            self.env.variant == NEVERENDING_COLOR
            and self.env.categories == 2
            and self.agent.generalization
        ):
            raise ValueError(
                "the analytic overlay is defined for the enhanced agent in the "
                "2-category neverending-color scenario"
            )
        if self.track_learning_time and not (
            self.env.variant == NEVERENDING_COLOR and self.agent.generalization
        ):
            raise ValueError(
                "learning-time tracking needs the enhanced agent in the "
                "neverending-color scenario"
            )


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    success_counts: np.ndarray  # rewarded agents per step, int64, length T
    efficiency: np.ndarray  # success_counts / n_agents
    analytic: np.ndarray | None = None
    tau: np.ndarray | None = None  # per-agent learning time, 0 = not reached
    actions: np.ndarray | None = None

    @property
    def tau_mean(self) -> float:
        reached = self.tau[self.tau > 0]
        return float(reached.mean()) if reached.size else float("nan")

    @property
    def tau_missing(self) -> int:
        return int((self.tau == 0).sum())

    def tail_mean(self, fraction: float = 0.1) -> float:
        """Mean efficiency over the final `fraction` of steps."""
        start = int(round(len(self.efficiency) * (1.0 - fraction)))
        return float(self.efficiency[start:].mean())

    def to_csv(self) -> str:
        lines = ["t,efficiency,analytic" if self.analytic is not None else "t,efficiency"]
        for i, e in enumerate(self.efficiency):
            if self.analytic is not None:
                lines.append(f"{i + 1},{e:.6f},{self.analytic[i]:.6f}")
            else:
                lines.append(f"{i + 1},{e:.6f}")
        return "\n".join(lines) + "\n"


def _next_pow2(x: int) -> int:
    p = 1
    while p < x:
        p *= 2
    return p


def _kernel_bounds(cfg: ExperimentConfig) -> tuple[int, int, int, int]:
    n = cfg.env.n_actions
    k = cfg.env.categories
    if cfg.env.variant == DRIVER:
        max_clips = 16
        max_edges = 256
        w_cap = 8
        max_sigs = 1
    else:
        cards = cfg.env.extra_cardinalities or (2,) * (k - 2)
        w_cap = n + 1
        sigs = n
        for c in cards:
            w_cap *= c + 1
            sigs *= c
        max_clips = cfg.n_steps + w_cap + 4
        max_sigs = sigs + 1
        if cfg.agent.generalization:
            max_edges = cfg.n_steps * (n + 2 ** (k - 1)) + w_cap * (n + w_cap) + 64
        else:
            max_edges = cfg.n_steps * n + 64
    hash_mask = _next_pow2(max(64, 4 * w_cap)) - 1
    return max_clips, max_edges, hash_mask, max_sigs


def _run_kernel(cfg: ExperimentConfig, record_actions: bool):
    n = cfg.env.n_actions
    k = cfg.env.categories
    cards = np.zeros(max(k, 2), np.int64)
    if cfg.env.variant != DRIVER:
        extra = cfg.env.extra_cardinalities or (2,) * (k - 2)
        for i, c in enumerate(extra):
            cards[2 + i] = c
    max_clips, max_edges, hash_mask, max_sigs = _kernel_bounds(cfg)
    success = np.zeros((cfg.n_agents, cfg.n_steps), np.uint8)
    actions = np.zeros(
        (cfg.n_agents if record_actions else 1, cfg.n_steps), np.int16
    )
    tau = np.zeros(cfg.n_agents, np.int32)
    run_ensemble_kernel(
        _ENV_CODES[cfg.env.variant],
        n,
        k,
        cards,
        cfg.agent.generalization,
        float(cfg.agent.gamma),
        float(cfg.env.reward),
        int(cfg.agent.majority_votes or 0),
        cfg.n_agents,
        cfg.n_steps,
        np.uint64(cfg.master_seed & ((1 << 64) - 1)),
        cfg.track_learning_time,
        success,
        actions,
        record_actions,
        tau,
        max_clips,
        max_edges,
        hash_mask,
        max_sigs,
    )
    return success, (actions if record_actions else None), tau


def _run_reference(cfg: ExperimentConfig, record_actions: bool):
    success = np.zeros((cfg.n_agents, cfg.n_steps), np.uint8)
    actions = (
        np.zeros((cfg.n_agents, cfg.n_steps), np.int16) if record_actions else None
    )
    tau = np.zeros(cfg.n_agents, np.int32)
    k = cfg.env.categories
    for i in range(cfg.n_agents):
        rng = Xoshiro256StarStar(cfg.master_seed, i)
        env = cfg.env.build()
        agent = Agent(cfg.agent)
        for t in range(1, cfg.n_steps + 1):
            percept = env.next_percept(t, rng)
            action = agent.step(percept, rng)
            reward = env.evaluate(t, percept, action)
            agent.learn(reward)
            if reward > 0:
                success[i, t - 1] = 1
            if record_actions:
                actions[i, t - 1] = action
            if (
                cfg.track_learning_time
                and reward > 0
                and tau[i] == 0
                and cfg.env.variant == NEVERENDING_COLOR
                and percept[0] == 0
            ):
                # learning time for a designated arrow symbol (arrow 0):
                # first rewarded traversal of the (0, #, ..., #) -> action 0
                # edge, matching the 1/(n(n+1)(n+2)) per-step rate of the
                # closed-form expected learning time
                net = agent.network
                for src, dst in agent.last_path:
                    clip = net.clips[src]
                    if (
                        clip.kind == WILDCARD
                        and clip.slots[0] == 0
                        and clip.layer == k - 1
                        and net.clips[dst].kind == ACTION
                        and net.clips[dst].action_id == 0
                    ):
                        tau[i] = t
                        break
    return success, actions, tau


def run_experiment(cfg: ExperimentConfig, record_actions: bool = False) -> ExperimentResult:
    runner = _run_kernel if cfg.engine == "kernel" else _run_reference
    success, actions, tau = runner(cfg, record_actions)
    counts = success.sum(axis=0, dtype=np.int64)
    efficiency = counts / cfg.n_agents
    analytic = None
    if cfg.analytic_overlay:
        n = cfg.env.n_actions
        analytic = np.array(
            [analytics.expected_efficiency(n, t) for t in range(1, cfg.n_steps + 1)]
        )
    result = ExperimentResult(
        config=cfg,
        success_counts=counts,
        efficiency=efficiency,
        analytic=analytic,
        tau=tau if cfg.track_learning_time else None,
        actions=actions,
    )
    if cfg.output_path:
        with open(cfg.output_path, "w", newline="") as f:
            f.write(result.to_csv())
    return result


def measure_learning_time(cfg: ExperimentConfig) -> tuple[float, int]:
    """Mean learning time over agents that reached it, plus the count of
    agents that never did within the run."""
    if not cfg.track_learning_time:
        raise ValueError("config must enable track_learning_time")
    result = run_experiment(cfg)
    return result.tau_mean, result.tau_missing
