"""Trajectory records and their line-oriented JSON store.

File layout: the first line is a header object carrying provenance and the
initial metric vector of every trajectory; each following line is one step
record with the keys ``run, iter, chain, step, recipe, mig_nodes, depth,
lut6, transistors`` in exactly that order.
"""

from __future__ import annotations

import io
import json
import math
import random
import warnings
from dataclasses import dataclass, field
from typing import IO, Iterable, Iterator

from .metrics import METRIC_NAMES, MetricVector
from .recipes import NUM_RECIPES, manifest_hash

FORMAT = "migdse-trajectories"
VERSION = 1
RECORD_KEYS = ("run", "iter", "chain", "step", "recipe") + METRIC_NAMES


class TrajectoryFormatError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class ProvenanceWarning(UserWarning):
    pass


@dataclass(frozen=True)
class StepRecord:
    run_id: int
    iteration: int
    chain_id: int
    step: int
    recipe_id: int
    metrics: MetricVector

    def to_json(self) -> str:
        vals = (self.run_id, self.iteration, self.chain_id, self.step, self.recipe_id)
        vals += self.metrics.as_tuple()
        return json.dumps(dict(zip(RECORD_KEYS, vals)), separators=(",", ":"))


@dataclass
class Trajectory:
    run_id: int
    iteration: int
    chain_id: int
    initial: MetricVector
    steps: list[StepRecord] = field(default_factory=list)

    @property
    def ident(self) -> tuple[int, int, int]:
        return (self.run_id, self.iteration, self.chain_id)

    def append(self, recipe_id: int, metrics: MetricVector) -> StepRecord:
        rec = StepRecord(self.run_id, self.iteration, self.chain_id, len(self.steps),
                         recipe_id, metrics)
        self.steps.append(rec)
        return rec

    def recipes(self) -> list[int]:
        return [r.recipe_id for r in self.steps]

    def values(self, metric: str) -> list[int]:
        """Target metric before the first step and after every step."""
        return [self.initial.get(metric)] + [r.metrics.get(metric) for r in self.steps]

    def metric_history(self) -> list[MetricVector]:
        return [self.initial] + [r.metrics for r in self.steps]

    def __len__(self) -> int:
        return len(self.steps)


@dataclass
class Dataset:
    benchmark: str = ""
    recipe_table_hash: str = field(default_factory=manifest_hash)
    seed: int = 0
    trajectories: list[Trajectory] = field(default_factory=list)

    def __len__(self) -> int:
        return sum(len(t) for t in self.trajectories)

    def records(self) -> Iterator[StepRecord]:
        for t in self.trajectories:
            yield from t.steps

    def run_ids(self) -> list[int]:
        return sorted({t.run_id for t in self.trajectories})

    def subset(self, runs: Iterable[int]) -> "Dataset":
        keep = set(runs)
        return Dataset(self.benchmark, self.recipe_table_hash, self.seed,
                       [t for t in self.trajectories if t.run_id in keep])

    @property
    def hash_matches(self) -> bool:
        return self.recipe_table_hash == manifest_hash()


def _header(ds: Dataset) -> str:
    return json.dumps({
        "format": FORMAT,
        "version": VERSION,
        "benchmark": ds.benchmark,
        "recipe_table_hash": ds.recipe_table_hash,
        "seed": ds.seed,
        "trajectories": [[t.run_id, t.iteration, t.chain_id, list(t.initial.as_tuple())]
                         for t in ds.trajectories],
    }, separators=(",", ":"))


def dumps(ds: Dataset) -> str:
    lines = [_header(ds)]
    for t in ds.trajectories:
        lines.extend(r.to_json() for r in t.steps)
    return "\n".join(lines) + "\n"


def write_jsonl(ds: Dataset, sink: str | IO[str]) -> None:
    text = dumps(ds)
    if isinstance(sink, str):
        with open(sink, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sink.write(text)


def _int(value, what: str, lineno: int) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise TrajectoryFormatError(f"{what} must be an integer", lineno)
    return value


def _metrics(vals, lineno: int) -> MetricVector:
    if not isinstance(vals, list) or len(vals) != len(METRIC_NAMES):
        raise TrajectoryFormatError("metric vector must have four entries", lineno)
    for v in vals:
        # Synthetic environments record real-valued sizes.
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not v >= 0 \
                or v == float("inf"):
            raise TrajectoryFormatError("metrics must be finite non-negative numbers", lineno)
    return MetricVector(*vals)


def loads(text: str, expected_hash: str | None = None) -> Dataset:
    return read_jsonl(io.StringIO(text), expected_hash)


def read_jsonl(source: str | IO[str], expected_hash: str | None = None) -> Dataset:
    """Parse a trajectory file.

    A recipe-table hash different from ``expected_hash`` (default: the
    current table) raises a :class:`ProvenanceWarning`; the data is still
    returned.
    """
    if isinstance(source, str):
        with open(source, encoding="utf-8") as fh:
            return read_jsonl(fh, expected_hash)
    lines = source.read().split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise TrajectoryFormatError("missing header", 1)
    try:
        head = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise TrajectoryFormatError(f"malformed header: {exc.msg}", 1) from None
    if not isinstance(head, dict) or head.get("format") != FORMAT:
        raise TrajectoryFormatError("not a trajectory file", 1)
    if head.get("version") != VERSION:
        raise TrajectoryFormatError(f"unsupported version {head.get('version')!r}", 1)
    ds = Dataset(str(head.get("benchmark", "")), str(head.get("recipe_table_hash", "")),
                 _int(head.get("seed", 0), "seed", 1))
    index: dict[tuple[int, int, int], Trajectory] = {}
    for entry in head.get("trajectories", []):
        if not isinstance(entry, list) or len(entry) != 4:
            raise TrajectoryFormatError("bad trajectory entry in header", 1)
        ident = tuple(_int(v, "trajectory id", 1) for v in entry[:3])
        if ident in index:
            raise TrajectoryFormatError(f"duplicate trajectory {ident}", 1)
        t = Trajectory(*ident, _metrics(entry[3], 1))
        index[ident] = t
        ds.trajectories.append(t)
    for lineno, line in enumerate(lines[1:], start=2):
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise TrajectoryFormatError(f"malformed record: {exc.msg}", lineno) from None
        if not isinstance(obj, dict) or tuple(obj) != RECORD_KEYS:
            raise TrajectoryFormatError("record keys must be " + ", ".join(RECORD_KEYS), lineno)
        run, it, chain, step, recipe = (_int(obj[k], k, lineno) for k in RECORD_KEYS[:5])
        t = index.get((run, it, chain))
        if t is None:
            raise TrajectoryFormatError(f"record for undeclared trajectory {(run, it, chain)}",
                                        lineno)
        if step != len(t.steps):
            raise TrajectoryFormatError(f"expected step {len(t.steps)}, got {step}", lineno)
        if not 0 <= recipe < NUM_RECIPES:
            raise TrajectoryFormatError(f"recipe id {recipe} out of range", lineno)
        t.append(recipe, _metrics([obj[k] for k in METRIC_NAMES], lineno))
    want = manifest_hash() if expected_hash is None else expected_hash
    if ds.recipe_table_hash != want:
        warnings.warn(f"trajectory file was recorded with recipe table {ds.recipe_table_hash}, "
                      f"current table is {want}", ProvenanceWarning, stacklevel=2)
    return ds


def split_dataset(ds: Dataset, validation_fraction: float = 0.1,
                  seed: int = 0) -> tuple[Dataset, Dataset]:
    """Split by whole runs; the validation side gets floor(fraction * runs), at least one."""
    if not 0.0 < validation_fraction < 1.0:
        raise ValueError("validation fraction must lie strictly between 0 and 1")
    runs = ds.run_ids()
    if len(runs) < 2:
        raise ValueError("need at least two runs to split")
    n_valid = max(1, math.floor(validation_fraction * len(runs) + 1e-9))
    order = list(runs)
    random.Random(seed).shuffle(order)
    valid = set(order[:n_valid])
    return ds.subset(r for r in runs if r not in valid), ds.subset(valid)
