"""Exploration engine: chains, iterations with best-circuit restarts, and runs.

Random streams are positional.  Each chain draws from
``derive_seed(seed, run, iteration, chain, stream)``, so results do not depend
on the order in which chains or runs are executed, nor on how many worker
processes execute them.
"""

from __future__ import annotations

import hashlib
import os
import random
from array import array
from dataclasses import dataclass, field
from typing import Callable, Protocol, Sequence

from .metrics import MetricVector, check_metric, compute_metrics
from .mig import Mig
from .pom import Mode, PolicyConfig, select_step
from .prm import Model
from .recipes import apply_recipe
from .trajectory import Dataset, Trajectory

_MASK = (1 << 64) - 1
POLICY_STREAM = 0
ENV_STREAM = 1


def _mix(z: int) -> int:
    z = (z + 0x9E3779B97F4A7C15) & _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def derive_seed(seed: int, *coords: int) -> int:
    """64-bit seed for a position (run, iteration, chain, ...) under ``seed``."""
    h = _mix(seed & _MASK)
    for c in coords:
        h = _mix(h ^ (c & _MASK))
    return h


class Environment(Protocol):
    def snapshot(self): ...
    def restore(self, token) -> None: ...
    def apply(self, recipe_id: int) -> None: ...
    def current_metrics(self) -> MetricVector: ...
    def reseed(self, seed: int) -> None: ...


# -- MIG environment ------------------------------------------------------

def _digest(mig: Mig) -> bytes:
    flat = array("q", mig.flat_fanins())
    flat.extend(mig.pos)
    flat.append(mig.num_pis)
    return hashlib.blake2b(flat.tobytes(), digest_size=16).digest()


class StateCache:
    """Interned circuits and recipe transitions; bounded, cleared when full.

    Recipes are deterministic, so caching changes only speed.
    """

    def __init__(self, max_states: int = 20000):
        self.max_states = max_states
        self.states: dict[bytes, tuple[Mig, MetricVector]] = {}
        self.moves: dict[tuple[bytes, int], bytes] = {}
        self.hits = 0
        self.misses = 0

    def intern(self, mig: Mig) -> tuple[bytes, Mig, MetricVector]:
        d = _digest(mig)
        hit = self.states.get(d)
        if hit is None:
            if len(self.states) >= self.max_states:
                self.states.clear()
                self.moves.clear()
            hit = (mig, compute_metrics(mig))
            self.states[d] = hit
        return d, hit[0], hit[1]

    def step(self, digest: bytes, mig: Mig, recipe_id: int) -> tuple[bytes, Mig, MetricVector]:
        d = self.moves.get((digest, recipe_id))
        if d is not None:
            hit = self.states.get(d)
            if hit is not None:
                self.hits += 1
                return d, hit[0], hit[1]
        self.misses += 1
        out = self.intern(apply_recipe(mig, recipe_id))
        self.moves[(digest, recipe_id)] = out[0]
        return out


class MigEnvironment:
    def __init__(self, mig: Mig, cache: StateCache | None = None):
        self.cache = cache if cache is not None else StateCache()
        self._digest, self.mig, self._metrics = self.cache.intern(mig)

    def snapshot(self):
        return (self._digest, self.mig, self._metrics)

    def restore(self, token) -> None:
        self._digest, self.mig, self._metrics = token

    def reseed(self, seed: int) -> None:
        pass  # recipes are deterministic

    def apply(self, recipe_id: int) -> None:
        self._digest, self.mig, self._metrics = self.cache.step(self._digest, self.mig,
                                                                recipe_id)

    def current_metrics(self) -> MetricVector:
        return self._metrics


def snapshot_mig(token) -> Mig | None:
    """Circuit behind a MIG environment snapshot (``None`` for other environments)."""
    if isinstance(token, tuple) and len(token) == 3 and isinstance(token[1], Mig):
        return token[1]
    return None


@dataclass(frozen=True)
class MigEnvFactory:
    mig: Mig
    max_states: int = 20000

    def __call__(self) -> MigEnvironment:
        return MigEnvironment(self.mig, StateCache(self.max_states))


# -- configuration and results -------------------------------------------

@dataclass(frozen=True)
class DseConfig:
    chain_length: int = 50
    num_chains: int = 1
    num_iterations: int = 1
    policy: PolicyConfig = field(default_factory=PolicyConfig)
    target: str = "transistors"
    seed: int = 0
    runs: int = 1

    def __post_init__(self):
        check_metric(self.target)
        if self.chain_length < 0:
            raise ValueError("chain length must be non-negative")
        for name in ("num_chains", "num_iterations", "runs"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be at least 1")

    @property
    def steps_per_run(self) -> int:
        return self.chain_length * self.num_chains * self.num_iterations

    @property
    def budget(self) -> int:
        return self.runs * self.steps_per_run


@dataclass
class ChainResult:
    chain_id: int
    trajectory: Trajectory
    final: object
    best: object
    best_value: float


@dataclass
class RunResult:
    run_id: int
    initial: MetricVector
    best_value: float
    best_metrics: MetricVector
    best_snapshot: object
    trajectories: list[Trajectory]
    selected_chains: list[int]

    @property
    def trace(self) -> list[MetricVector]:
        return [r.metrics for t in self.trajectories for r in t.steps]

    def summary(self) -> dict:
        """Plain, comparable description (snapshot excluded)."""
        return {"run": self.run_id, "initial": list(self.initial.as_tuple()),
                "best_value": self.best_value, "best": list(self.best_metrics.as_tuple()),
                "selected_chains": list(self.selected_chains),
                "trace": [[r.recipe_id, *r.metrics.as_tuple()]
                          for t in self.trajectories for r in t.steps]}


def run_chain(env: Environment, start, chain_length: int, policy: PolicyConfig,
              model: Model | None, rng: random.Random, target: str,
              ident: tuple[int, int, int] = (0, 0, 0)) -> ChainResult:
    """Apply exactly ``chain_length`` recipes from ``start``.

    The best state includes the starting point.  A 2SA plan that would
    overrun the chain is truncated.
    """
    env.restore(start)
    cur = env.current_metrics()
    traj = Trajectory(*ident, cur)
    best, best_value = start, cur.get(target)
    history = [cur]
    guided_ctx = policy.mode is Mode.GUIDED_1SA
    while len(traj) < chain_length:
        plan = select_step(policy, model, cur, rng, history if guided_ctx else None)
        for r in plan[:chain_length - len(traj)]:
            env.apply(r)
            cur = env.current_metrics()
            traj.append(r, cur)
            history.append(cur)
            v = cur.get(target)
            if v < best_value:
                best, best_value = env.snapshot(), v
        if len(history) > 64:
            del history[:-32]
    return ChainResult(ident[2], traj, env.snapshot(), best, best_value)


def iism_select(chains: Sequence[ChainResult]) -> ChainResult:
    """Chain with the lowest best value; ties go to the lowest chain id."""
    if not chains:
        raise ValueError("no chains to select from")
    return min(chains, key=lambda c: (c.best_value, c.chain_id))


def run_iterated(env: Environment, config: DseConfig, model: Model | None = None,
                 run_id: int = 0, start=None) -> RunResult:
    """One run: iterations of parallel chains, each restarting from the best so far."""
    if start is not None:
        env.restore(start)
    start = env.snapshot()
    initial = env.current_metrics()
    target = config.target
    best, best_value, best_metrics = start, initial.get(target), initial
    trajs: list[Trajectory] = []
    selected: list[int] = []
    for it in range(config.num_iterations):
        chains = []
        for c in range(config.num_chains):
            env.reseed(derive_seed(config.seed, run_id, it, c, ENV_STREAM))
            rng = random.Random(derive_seed(config.seed, run_id, it, c, POLICY_STREAM))
            chains.append(run_chain(env, best, config.chain_length, config.policy, model,
                                    rng, target, (run_id, it, c)))
            trajs.append(chains[-1].trajectory)
        pick = iism_select(chains)
        selected.append(pick.chain_id)
        if pick.best_value < best_value:
            best, best_value = pick.best, pick.best_value
            env.restore(best)
            best_metrics = env.current_metrics()
    env.restore(best)
    return RunResult(run_id, initial, best_value, best_metrics, best, trajs, selected)


_WORKER: dict = {}


def _init_worker(factory, config, model) -> None:
    _WORKER["env"] = factory()
    _WORKER["start"] = _WORKER["env"].snapshot()
    _WORKER["config"] = config
    _WORKER["model"] = model


def _work(run_id: int) -> RunResult:
    return run_iterated(_WORKER["env"], _WORKER["config"], _WORKER["model"], run_id,
                        _WORKER["start"])


def default_jobs() -> int:
    try:
        return max(1, len(os.sched_getaffinity(0)))
    except AttributeError:  # pragma: no cover - non-Linux
        return os.cpu_count() or 1


def run_experiment(config: DseConfig, model: Model | None,
                   env_factory: Callable[[], Environment], jobs: int = 1,
                   first_run: int = 0) -> list[RunResult]:
    """``config.runs`` independent runs; identical output for any ``jobs``.

    The factory must be picklable when ``jobs > 1``.
    """
    run_ids = range(first_run, first_run + config.runs)
    if jobs <= 1 or config.runs == 1:
        env = env_factory()
        start = env.snapshot()
        return [run_iterated(env, config, model, r, start) for r in run_ids]
    import multiprocessing as mp
    with mp.get_context("fork" if hasattr(os, "fork") else "spawn").Pool(
            min(jobs, config.runs), _init_worker, (env_factory, config, model)) as pool:
        return pool.map(_work, run_ids, chunksize=max(1, config.runs // (4 * jobs)))


def results_dataset(results: Sequence[RunResult], benchmark: str = "", seed: int = 0) -> Dataset:
    ds = Dataset(benchmark, seed=seed)
    for r in results:
        ds.trajectories.extend(r.trajectories)
    return ds
