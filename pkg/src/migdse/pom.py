"""Policy module: softmax-with-temperature sampling over predicted sizes."""

from __future__ import annotations

import bisect
import enum
import itertools
import math
import random
from dataclasses import dataclass
from typing import Sequence

from .metrics import MetricVector
from .prm import NUM_PAIRS, Model, StatModel1SA, StatModel2SA, predict_1sa, predict_2sa
from .recipes import NUM_RECIPES


class PolicyError(ValueError):
    pass


class Mode(enum.Enum):
    UNIFORM = "uniform"
    GUIDED_1SA = "1sa"
    GUIDED_2SA = "2sa"


@dataclass(frozen=True)
class PolicyConfig:
    mode: Mode = Mode.UNIFORM
    temperature: float = 5.0

    def __post_init__(self):
        if not isinstance(self.mode, Mode):
            object.__setattr__(self, "mode", Mode(self.mode))
        if self.mode is not Mode.UNIFORM:
            t = self.temperature
            if not (isinstance(t, (int, float)) and math.isfinite(t) and t > 0):
                raise PolicyError("guided policies need a finite temperature > 0")

    @property
    def plan_length(self) -> int:
        return 2 if self.mode is Mode.GUIDED_2SA else 1


def softmax_temperature(sizes: Sequence[float], temperature: float) -> list[float]:
    """p_i proportional to exp(-s_i / T), computed with a max shift."""
    if not sizes:
        raise PolicyError("softmax of an empty list")
    if not (math.isfinite(temperature) and temperature > 0):
        raise PolicyError("temperature must be finite and positive")
    if not all(math.isfinite(s) for s in sizes):
        raise PolicyError("predicted sizes must be finite")
    logits = [-s / temperature for s in sizes]
    top = max(logits)
    ws = [math.exp(v - top) for v in logits]
    total = math.fsum(ws)
    return [w / total for w in ws]


def sample_action(probs: Sequence[float], rng: random.Random) -> int:
    """Inverse-CDF draw over ``probs`` in the given order."""
    if not probs or any(not (p >= 0.0) or math.isinf(p) for p in probs):
        raise PolicyError("invalid probability vector")
    total = math.fsum(probs)
    if abs(total - 1.0) > 1e-9:
        raise PolicyError(f"probabilities sum to {total}, not 1")
    u = rng.random() * total
    acc = 0.0
    last = 0
    for i, p in enumerate(probs):
        if p > 0.0:
            last = i
            acc += p
            if u < acc:
                return i
    return last


def action_distribution(policy: PolicyConfig, model: Model | None, current: MetricVector,
                        history: Sequence[MetricVector] | None = None) -> list[float]:
    """Probabilities over recipes (30) or ordered pairs (900, index a * 30 + b)."""
    if policy.mode is Mode.UNIFORM:
        return [1.0 / NUM_RECIPES] * NUM_RECIPES
    if model is None:
        raise PolicyError(f"{policy.mode.value} policy needs a prediction model")
    if policy.mode is Mode.GUIDED_2SA:
        if not isinstance(model, StatModel2SA):
            raise PolicyError("2sa policy needs a stat2sa model")
        return softmax_temperature(predict_2sa(model, current), policy.temperature)
    return softmax_temperature(predict_1sa(model, current, history), policy.temperature)


def _draw(probs: Sequence[float], cum: Sequence[float], rng: random.Random) -> int:
    # Same result as sample_action, by bisection on the running sums.
    u = rng.random() * cum[-1]
    i = bisect.bisect_right(cum, u)
    if i < len(cum):
        return i
    return max(k for k, p in enumerate(probs) if p > 0.0)


# Statistical predictions are the current size plus a fixed delta, so their
# softmax does not depend on the state; it is computed once per model.
_STATIC: dict[tuple, tuple] = {}


def _static_table(policy: PolicyConfig, model: Model):
    key = (id(model), policy.mode, policy.temperature)
    hit = _STATIC.get(key)
    if hit is None or hit[0] is not model:
        zero = MetricVector(0, 0, 0, 0)
        probs = action_distribution(policy, model, zero)
        cum = list(itertools.accumulate(probs))
        if len(_STATIC) > 64:
            _STATIC.clear()
        hit = _STATIC[key] = (model, probs, cum)
    return hit[1], hit[2]


def select_step(policy: PolicyConfig, model: Model | None, current: MetricVector,
                rng: random.Random, history: Sequence[MetricVector] | None = None) -> list[int]:
    """Recipe plan for the next step(s): one id, or an ordered pair under 2SA."""
    if policy.mode is Mode.UNIFORM:
        return [rng.randrange(NUM_RECIPES)]
    if isinstance(model, (StatModel1SA, StatModel2SA)):
        probs, cum = _static_table(policy, model)
        k = _draw(probs, cum, rng)
    else:
        probs = action_distribution(policy, model, current, history)
        k = sample_action(probs, rng)
    if len(probs) == NUM_PAIRS:
        return [k // NUM_RECIPES, k % NUM_RECIPES]
    return [k]
