"""Percept -> deliberate -> act -> learn cycle around a ClipNetwork."""

from __future__ import annotations

from dataclasses import dataclass

from .clips import ClipNetwork, WILDCARD


@dataclass
class AgentConfig:
    n_actions: int
    categories: int
    generalization: bool = True
    gamma: float = 0.0
    h0: float = 1.0
    majority_votes: int | None = None  # odd; None = single walk per step

    def __post_init__(self):
        if self.n_actions < 2:
            raise ValueError("n_actions must be >= 2")
        if self.categories < 1:
            raise ValueError("categories must be >= 1")
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError("gamma must lie in [0, 1]")
        if self.h0 <= 0:
            raise ValueError("h0 must be positive")
        if self.majority_votes is not None and (
            self.majority_votes < 1 or self.majority_votes % 2 == 0
        ):
            raise ValueError("majority_votes must be a positive odd integer")


class Agent:
    """A single learning agent.

    step() and learn() must strictly alternate: every action taken is
    rewarded (possibly with 0) exactly once before the next percept.
    """

    def __init__(self, config: AgentConfig):
        self.config = config
        self.network = ClipNetwork(
            config.n_actions, h0=config.h0, generalization=config.generalization
        )
        self.last_path: list[tuple[int, int]] | None = None
        self.steps_taken = 0
        self._awaiting_learn = False

    def step(self, percept: tuple, rng) -> int:
        if self._awaiting_learn:
            raise RuntimeError("step() called before learn() for the previous step")
        if len(percept) != self.config.categories:
            raise ValueError(
                f"percept arity {len(percept)} != {self.config.categories}"
            )
        pid, _ = self.network.add_percept(percept)
        votes = self.config.majority_votes
        if votes is None:
            action, path = self.network.random_walk(pid, rng)
        else:
            # majority voting amplifies the output; reward credit goes to the
            # last walk that produced the winning action
            counts = [0] * self.config.n_actions
            paths = []
            for _ in range(votes):
                a, p = self.network.random_walk(pid, rng)
                counts[a] += 1
                paths.append((a, p))
            action = max(range(self.config.n_actions), key=lambda a: (counts[a], -a))
            path = next(p for a, p in reversed(paths) if a == action)
        self.last_path = path
        self.steps_taken += 1
        self._awaiting_learn = True
        return action

    def learn(self, reward: float) -> None:
        if not self._awaiting_learn:
            raise RuntimeError("learn() called without a preceding step()")
        self.network.update_weights(self.last_path, reward, self.config.gamma)
        self._awaiting_learn = False

    def wildcard_clip_count(self) -> int:
        return sum(1 for c in self.network.clips if c.kind == WILDCARD)
