"""Closed-form test environment for the exploration logic.

Each recipe adds a delta drawn uniformly from ``[mean - w, mean + w]`` to a
scalar size, optionally only when the previous recipe was a given one.  The
default bench hides a pair trap: recipe 28 alone is harmful (+3) but enables
recipe 29 (-8), so the plan (28, 29) nets -5 while per-recipe statistics
rank 28 as a bad move.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .metrics import MetricVector
from .recipes import NUM_RECIPES

DEFAULT_START = 200.0
DEFAULT_FLOOR = 50.0


@dataclass(frozen=True)
class Rule:
    mean: float
    width: float = 0.0
    requires: int | None = None


@dataclass(frozen=True)
class SyntheticParams:
    rules: tuple[Rule, ...]
    start: float = DEFAULT_START
    floor: float = DEFAULT_FLOOR

    def __post_init__(self):
        if len(self.rules) != NUM_RECIPES:
            raise ValueError(f"synthetic bench needs exactly {NUM_RECIPES} rules")
        if self.start < self.floor:
            raise ValueError("start size below the floor")
        for r in self.rules:
            if r.width < 0:
                raise ValueError("noise half-width must be non-negative")
            if r.requires is not None and not 0 <= r.requires < NUM_RECIPES:
                raise ValueError("precondition names an unknown recipe")

    def to_dict(self) -> dict:
        return {"start": self.start, "floor": self.floor,
                "rules": [{"mean": r.mean, "width": r.width, "requires": r.requires}
                          for r in self.rules]}

    @classmethod
    def from_dict(cls, d: dict) -> "SyntheticParams":
        rules = tuple(Rule(float(r["mean"]), float(r.get("width", 0.0)), r.get("requires"))
                      for r in d["rules"])
        return cls(rules, float(d.get("start", DEFAULT_START)), float(d.get("floor", DEFAULT_FLOOR)))

    def uniform_step_mean(self) -> float:
        """Expected delta of a uniformly drawn recipe after a uniformly drawn one (ignoring the floor)."""
        total = 0.0
        for r in self.rules:
            p = 1.0 if r.requires is None else 1.0 / NUM_RECIPES
            total += p * r.mean
        return total / NUM_RECIPES


def default_params() -> SyntheticParams:
    rules = [Rule(0.0, 2.0) for _ in range(26)]
    rules += [Rule(-1.0, 1.0), Rule(-1.0, 1.0)]
    rules += [Rule(3.0, 0.0), Rule(-8.0, 0.0, requires=28)]
    return SyntheticParams(tuple(rules))


class SyntheticEnvironment:
    """State is ``(size, previous recipe)``; snapshots are plain tuples."""

    def __init__(self, params: SyntheticParams | None = None, seed: int = 0):
        self.params = params or default_params()
        self.size = self.params.start
        self.prev: int | None = None
        self.rng = random.Random(seed)

    def snapshot(self):
        return (self.size, self.prev)

    def restore(self, token) -> None:
        self.size, self.prev = token

    def reseed(self, seed: int) -> None:
        self.rng = random.Random(seed)

    def apply(self, recipe_id: int) -> None:
        if not 0 <= recipe_id < NUM_RECIPES:
            raise ValueError(f"recipe id {recipe_id} out of range")
        rule = self.params.rules[recipe_id]
        delta = 0.0
        if rule.requires is None or self.prev == rule.requires:
            delta = rule.mean
            if rule.width:
                delta += self.rng.uniform(-rule.width, rule.width)
        self.size = max(self.params.floor, self.size + delta)
        self.prev = recipe_id

    def current_metrics(self) -> MetricVector:
        # The size stands in for every metric except depth.
        s = self.size
        return MetricVector(s, 0, s, s)


def default_bench(seed: int = 0) -> SyntheticEnvironment:
    return SyntheticEnvironment(default_params(), seed)
