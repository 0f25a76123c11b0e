"""Benchmark environments: the four-phase driver task and the
neverending-color task (with its all-irrelevant-categories variant).

Percept layout shared by all environments: slot 0 is the arrow, slot 1 the
color, slots 2.. are extra finite categories.  Rewards are {0, reward}.
"""

from __future__ import annotations

from dataclasses import dataclass

DRIVER = "driver"
NEVERENDING_COLOR = "neverending-color"
ALL_IRRELEVANT = "all-irrelevant"

# driver encoding: arrow 0=left 1=right, color 0=green 1=red,
# action 0=drive(+) 1=stop(-)
DRIVE, STOP = 0, 1

#: (first step, last step, rule) for the driver scenario
DRIVER_PHASES = (
    (1, 1000, "stop-at-red"),
    (1001, 2000, "stop-at-green"),
    (2001, 3000, "follow-arrow"),
    (3001, 4000, "always-drive"),
)


class DriverEnvironment:
    """Traffic-signal task: 2 categories, 2 actions, 4 reward phases."""

    n_actions = 2
    categories = 2

    def __init__(self, reward: float = 1.0):
        if reward <= 0:
            raise ValueError("reward must be positive")
        self.reward = float(reward)

    def next_percept(self, t: int, rng) -> tuple[int, int]:
        combo = int(rng.random() * 4)
        return (combo & 1, combo >> 1)

    def correct_action(self, t: int, percept: tuple[int, int]) -> int:
        arrow, color = percept
        if t < 1 or t > 4000:
            raise ValueError(f"t={t} outside the driver phase schedule [1, 4000]")
        if t <= 1000:
            return STOP if color == 1 else DRIVE
        if t <= 2000:
            return STOP if color == 0 else DRIVE
        if t <= 3000:
            return DRIVE if arrow == 0 else STOP
        return DRIVE

    def evaluate(self, t: int, percept: tuple, action: int) -> float:
        return self.reward if action == self.correct_action(t, percept) else 0.0


class NeverendingColorEnvironment:
    """Arrow-following task where the color category never repeats.

    The color is a per-step monotone counter, so no percept is ever shown
    twice.  Extra categories (index 2..K-1) take uniform values from small
    finite sets, binary by default.  With ``all_irrelevant=True`` the reward
    ignores the arrow too: action 0 is always the correct one.
    """

    def __init__(
        self,
        n_actions: int,
        categories: int = 2,
        reward: float = 1000.0,
        extra_cardinalities: tuple[int, ...] | None = None,
        all_irrelevant: bool = False,
    ):
        if n_actions < 2:
            raise ValueError("n_actions must be >= 2")
        if categories < 2:
            raise ValueError("need at least the arrow and color categories")
        if reward <= 0:
            raise ValueError("reward must be positive")
        if extra_cardinalities is None:
            extra_cardinalities = (2,) * (categories - 2)
        if len(extra_cardinalities) != categories - 2:
            raise ValueError("one cardinality per extra category expected")
        if any(c < 1 for c in extra_cardinalities):
            raise ValueError("cardinalities must be positive")
        self.n_actions = n_actions
        self.categories = categories
        self.reward = float(reward)
        self.extra_cardinalities = tuple(extra_cardinalities)
        self.all_irrelevant = all_irrelevant

    def next_percept(self, t: int, rng) -> tuple:
        arrow = int(rng.random() * self.n_actions)
        extras = tuple(int(rng.random() * c) for c in self.extra_cardinalities)
        return (arrow, t) + extras

    def correct_action(self, t: int, percept: tuple) -> int:
        return 0 if self.all_irrelevant else percept[0]

    def evaluate(self, t: int, percept: tuple, action: int) -> float:
        return self.reward if action == self.correct_action(t, percept) else 0.0


@dataclass
class EnvironmentSpec:
    """Declarative environment description, buildable from CLI flags."""

    variant: str
    n_actions: int = 2
    categories: int = 2
    reward: float = 1.0
    extra_cardinalities: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.variant not in (DRIVER, NEVERENDING_COLOR, ALL_IRRELEVANT):
            raise ValueError(f"unknown environment variant {self.variant!r}")
        if self.variant == DRIVER:
            if self.n_actions != 2 or self.categories != 2:
                raise ValueError("the driver scenario fixes K=2 and n=2")

    def build(self):
        if self.variant == DRIVER:
            return DriverEnvironment(reward=self.reward)
        return NeverendingColorEnvironment(
            self.n_actions,
            categories=self.categories,
            reward=self.reward,
            extra_cardinalities=self.extra_cardinalities,
            all_irrelevant=self.variant == ALL_IRRELEVANT,
        )
