"""Prediction module: models of the target metric after a recipe or recipe pair.

Every model predicts an absolute value as ``current + predicted delta``.
The statistical models are per-recipe (and per ordered pair) mean deltas;
the context model is a one-hidden-layer ReLU regressor over the candidate
recipe and a window of past metric vectors.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .metrics import METRIC_NAMES, MetricVector, check_metric
from .recipes import NUM_RECIPES, manifest_hash
from .trajectory import Dataset

MAX_CONTEXT = 20
NUM_PAIRS = NUM_RECIPES * NUM_RECIPES


class ModelError(ValueError):
    pass


# -- statistical models ---------------------------------------------------

@dataclass
class StatModel1SA:
    target: str
    means: list[float]
    counts: list[int]
    fallback: float
    recipe_table_hash: str = field(default_factory=manifest_hash)
    kind = "stat1sa"

    def delta(self, r: int) -> float:
        return self.means[r] if self.counts[r] > 0 else self.fallback


@dataclass
class StatModel2SA:
    target: str
    pair_means: list[list[float]]  # [first][second]
    pair_counts: list[list[int]]
    single: StatModel1SA
    recipe_table_hash: str = field(default_factory=manifest_hash)
    kind = "stat2sa"

    def delta(self, a: int, b: int) -> float:
        if self.pair_counts[a][b] > 0:
            return self.pair_means[a][b]
        return self.single.delta(a) + self.single.delta(b)


def _require(ds: Dataset) -> None:
    if len(ds) == 0:
        raise ModelError("cannot fit on an empty dataset")


def fit_statistical_1sa(train: Dataset, target: str = "transistors") -> StatModel1SA:
    check_metric(target)
    _require(train)
    sums = [0.0] * NUM_RECIPES
    counts = [0] * NUM_RECIPES
    total = 0.0
    for t in train.trajectories:
        vals = t.values(target)
        for i, r in enumerate(t.recipes()):
            d = vals[i + 1] - vals[i]
            sums[r] += d
            counts[r] += 1
            total += d
    n = sum(counts)
    means = [sums[r] / counts[r] if counts[r] else 0.0 for r in range(NUM_RECIPES)]
    return StatModel1SA(target, means, counts, total / n, train.recipe_table_hash)


def fit_statistical_2sa(train: Dataset, target: str = "transistors") -> StatModel2SA:
    """Mean two-step delta per ordered pair, over overlapping windows."""
    single = fit_statistical_1sa(train, target)
    sums = [[0.0] * NUM_RECIPES for _ in range(NUM_RECIPES)]
    counts = [[0] * NUM_RECIPES for _ in range(NUM_RECIPES)]
    for t in train.trajectories:
        vals = t.values(target)
        rs = t.recipes()
        for i in range(len(rs) - 1):
            a, b = rs[i], rs[i + 1]
            sums[a][b] += vals[i + 2] - vals[i]
            counts[a][b] += 1
    means = [[sums[a][b] / counts[a][b] if counts[a][b] else 0.0 for b in range(NUM_RECIPES)]
             for a in range(NUM_RECIPES)]
    return StatModel2SA(target, means, counts, single, train.recipe_table_hash)


# -- context model --------------------------------------------------------

@dataclass
class ContextConfig:
    context: int = 8
    hidden: int = 64
    epochs: int = 50
    lr: float = 0.01
    batch: int = 64
    momentum: float = 0.9
    seed: int = 0

    def validate(self) -> None:
        if not 1 <= self.context <= MAX_CONTEXT:
            raise ModelError(f"context length must be in 1..{MAX_CONTEXT}")
        if self.hidden < 1 or self.epochs < 0 or self.batch < 1:
            raise ModelError("hidden, epochs and batch must be positive")
        if not (self.lr > 0 and math.isfinite(self.lr)):
            raise ModelError("learning rate must be positive")
        if not 0.0 <= self.momentum < 1.0:
            raise ModelError("momentum must lie in [0, 1)")


@dataclass
class ContextModel:
    target: str
    context: int
    hidden: int
    mean: np.ndarray  # (4,) per-metric offset
    scale: np.ndarray  # (4,) per-metric scale, > 0
    delta_scale: float
    w1: np.ndarray  # (inputs, hidden)
    b1: np.ndarray
    w2: np.ndarray  # (hidden,)
    b2: float
    recipe_table_hash: str = field(default_factory=manifest_hash)
    kind = "context"

    @property
    def inputs(self) -> int:
        return input_width(self.context)

    def params(self) -> list[np.ndarray]:
        return [self.w1, self.b1, self.w2, np.array([self.b2])]

    def context_features(self, history: Sequence[MetricVector]) -> np.ndarray:
        return context_features(history, self.context, self.mean, self.scale)

    def predict_deltas(self, history: Sequence[MetricVector]) -> np.ndarray:
        """Predicted target delta for every recipe given the state history."""
        ctx = self.context_features(history)
        x = np.hstack([np.eye(NUM_RECIPES), np.tile(ctx, (NUM_RECIPES, 1))])
        out, _ = _forward(self.params(), x)
        return out * self.delta_scale


def input_width(context: int) -> int:
    return NUM_RECIPES + context * (len(METRIC_NAMES) + 1)


def context_features(history: Sequence[MetricVector], context: int, mean: np.ndarray,
                     scale: np.ndarray) -> np.ndarray:
    """Most-recent-first normalised metric vectors, zero-padded, then a validity mask."""
    width = len(METRIC_NAMES)
    feats = np.zeros(context * width)
    mask = np.zeros(context)
    recent = list(history)[-context:][::-1]
    for i, mv in enumerate(recent):
        feats[i * width:(i + 1) * width] = (np.asarray(mv.as_tuple(), float) - mean) / scale
        mask[i] = 1.0
    return np.concatenate([feats, mask])


def _forward(params, x):
    w1, b1, w2, b2 = params
    pre = x @ w1 + b1
    h = np.maximum(pre, 0.0)
    return h @ w2 + b2[0], (pre, h)


def loss_and_grad(params, x: np.ndarray, y: np.ndarray):
    """Half mean squared error and its analytic gradient for each parameter."""
    w1, b1, w2, b2 = params
    out, (pre, h) = _forward(params, x)
    n = x.shape[0]
    err = out - y
    loss = 0.5 * float(err @ err) / n
    g_out = err / n
    g_w2 = h.T @ g_out
    g_b2 = np.array([g_out.sum()])
    g_h = np.outer(g_out, w2) * (pre > 0)
    g_w1 = x.T @ g_h
    g_b1 = g_h.sum(axis=0)
    return loss, [g_w1, g_b1, g_w2, g_b2]


def _samples(ds: Dataset, target: str, context: int, mean, scale):
    xs, ys = [], []
    for t in ds.trajectories:
        hist = t.metric_history()
        vals = t.values(target)
        for i, r in enumerate(t.recipes()):
            onehot = np.zeros(NUM_RECIPES)
            onehot[r] = 1.0
            xs.append(np.concatenate([onehot, context_features(hist[:i + 1], context, mean,
                                                               scale)]))
            ys.append(vals[i + 1] - vals[i])
    return np.array(xs), np.array(ys, dtype=float)


def init_params(inputs: int, hidden: int, rng: np.random.Generator) -> list[np.ndarray]:
    w1 = rng.normal(0.0, math.sqrt(2.0 / inputs), size=(inputs, hidden))
    # context rows start at zero: training begins from a recipe-only model
    w1[NUM_RECIPES:] = 0.0
    b1 = np.zeros(hidden)
    w2 = rng.normal(0.0, math.sqrt(1.0 / hidden), size=hidden)
    return [w1, b1, w2, np.zeros(1)]


@dataclass
class TrainReport:
    kind: str
    target: str
    rmse: float | None
    train_samples: int
    valid_samples: int
    hyperparameters: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {"kind": self.kind, "target": self.target, "rmse": self.rmse,
                "train_samples": self.train_samples, "valid_samples": self.valid_samples,
                "hyperparameters": dict(self.hyperparameters)}


def fit_context_model(train: Dataset, config: ContextConfig | None = None,
                      target: str = "transistors", valid: Dataset | None = None):
    """Mini-batch SGD (heavy-ball momentum) on the squared error of the scaled delta."""
    cfg = config or ContextConfig()
    cfg.validate()
    check_metric(target)
    _require(train)
    states = np.array([mv.as_tuple() for t in train.trajectories for mv in t.metric_history()],
                      dtype=float)
    mean = states.mean(axis=0)
    scale = states.std(axis=0)
    scale[scale <= 0] = 1.0
    x, y = _samples(train, target, cfg.context, mean, scale)
    delta_scale = float(np.abs(y).max()) or 1.0
    y = y / delta_scale
    rng = np.random.default_rng(cfg.seed)
    params = init_params(x.shape[1], cfg.hidden, rng)
    n = x.shape[0]
    velocity = [np.zeros_like(p) for p in params]
    for _ in range(cfg.epochs):
        order = rng.permutation(n)
        for start in range(0, n, cfg.batch):
            idx = order[start:start + cfg.batch]
            _, grads = loss_and_grad(params, x[idx], y[idx])
            for p, v, g in zip(params, velocity, grads):
                v *= cfg.momentum
                v -= cfg.lr * g
                p += v
    w1, b1, w2, b2 = params
    model = ContextModel(target, cfg.context, cfg.hidden, mean, scale, delta_scale,
                         w1, b1, w2, float(b2[0]), train.recipe_table_hash)
    hyper = {"context": cfg.context, "hidden": cfg.hidden, "epochs": cfg.epochs,
             "lr": cfg.lr, "batch": cfg.batch, "momentum": cfg.momentum, "seed": cfg.seed}
    report = TrainReport("context", target, None, n, 0, hyper)
    if valid is not None and len(valid):
        r = evaluate_rmse(model, valid)
        report.rmse, report.valid_samples = r.rmse, r.valid_samples
    return model, report


# -- prediction -----------------------------------------------------------

Model = StatModel1SA | StatModel2SA | ContextModel


def predict_1sa(model: Model, current: MetricVector,
                history: Sequence[MetricVector] | None = None) -> list[float]:
    """Predicted target value after each of the 30 recipes.

    ``history`` lists past states oldest first and may end with ``current``;
    only the context model reads it.
    """
    base = current.get(model.target)
    if isinstance(model, StatModel2SA):
        model = model.single
    if isinstance(model, StatModel1SA):
        return [base + model.delta(r) for r in range(NUM_RECIPES)]
    hist = list(history or [])
    if not hist or hist[-1] != current:
        hist.append(current)
    return [base + float(d) for d in model.predict_deltas(hist)]


def predict_2sa(model: Model, current: MetricVector) -> list[float]:
    """Predicted value after each ordered pair; index ``a * 30 + b``."""
    if not isinstance(model, StatModel2SA):
        raise ModelError("two-step predictions need a stat2sa model")
    base = current.get(model.target)
    return [base + model.delta(a, b) for a in range(NUM_RECIPES) for b in range(NUM_RECIPES)]


def rmse(predicted: Sequence[float], actual: Sequence[float]) -> float:
    if len(predicted) != len(actual) or not predicted:
        raise ModelError("rmse needs two equal-length, nonempty sequences")
    return math.sqrt(sum((p - a) ** 2 for p, a in zip(predicted, actual)) / len(predicted))


def evaluate_rmse(model: Model, valid: Dataset) -> TrainReport:
    """RMSE of the predicted absolute next value (two steps ahead for stat2sa)."""
    target = model.target
    pred: list[float] = []
    truth: list[float] = []
    for t in valid.trajectories:
        vals = t.values(target)
        rs = t.recipes()
        if isinstance(model, StatModel2SA):
            for i in range(len(rs) - 1):
                pred.append(vals[i] + model.delta(rs[i], rs[i + 1]))
                truth.append(vals[i + 2])
        elif isinstance(model, StatModel1SA):
            for i, r in enumerate(rs):
                pred.append(vals[i] + model.delta(r))
                truth.append(vals[i + 1])
        else:
            hist = t.metric_history()
            for i, r in enumerate(rs):
                ctx = model.context_features(hist[:i + 1])
                x = np.zeros((1, model.inputs))
                x[0, r] = 1.0
                x[0, NUM_RECIPES:] = ctx
                out, _ = _forward(model.params(), x)
                pred.append(vals[i] + float(out[0]) * model.delta_scale)
                truth.append(vals[i + 1])
    if not pred:
        raise ModelError("validation set has no usable steps")
    return TrainReport(model.kind, target, rmse(pred, truth), 0, len(pred))


# -- serialization --------------------------------------------------------

def model_to_dict(model: Model) -> dict:
    out = {"kind": model.kind, "target": model.target,
           "recipe_table_hash": model.recipe_table_hash}
    if isinstance(model, StatModel1SA):
        out.update(means=model.means, counts=model.counts, fallback=model.fallback)
    elif isinstance(model, StatModel2SA):
        s = model.single
        out.update(pair_means=model.pair_means, pair_counts=model.pair_counts,
                   means=s.means, counts=s.counts, fallback=s.fallback)
    else:
        out.update(context=model.context, hidden=model.hidden, mean=model.mean.tolist(),
                   scale=model.scale.tolist(), delta_scale=model.delta_scale,
                   w1=model.w1.tolist(), b1=model.b1.tolist(), w2=model.w2.tolist(),
                   b2=model.b2)
    return out


def model_from_dict(d: dict) -> Model:
    try:
        kind, target, h = d["kind"], check_metric(d["target"]), d.get("recipe_table_hash", "")
        if kind == "stat1sa":
            return StatModel1SA(target, list(map(float, d["means"])), list(map(int, d["counts"])),
                                float(d["fallback"]), h)
        if kind == "stat2sa":
            single = StatModel1SA(target, list(map(float, d["means"])),
                                  list(map(int, d["counts"])), float(d["fallback"]), h)
            pm = [list(map(float, row)) for row in d["pair_means"]]
            pc = [list(map(int, row)) for row in d["pair_counts"]]
            if len(pm) != NUM_RECIPES or any(len(row) != NUM_RECIPES for row in pm):
                raise ModelError("pair table must be 30x30")
            return StatModel2SA(target, pm, pc, single, h)
        if kind == "context":
            m = ContextModel(target, int(d["context"]), int(d["hidden"]),
                             np.array(d["mean"], float), np.array(d["scale"], float),
                             float(d["delta_scale"]), np.array(d["w1"], float),
                             np.array(d["b1"], float), np.array(d["w2"], float),
                             float(d["b2"]), h)
            if m.w1.shape != (m.inputs, m.hidden) or m.w2.shape != (m.hidden,):
                raise ModelError("weight shapes inconsistent with context/hidden")
            if not (np.all(np.isfinite(m.scale)) and np.all(m.scale > 0)):
                raise ModelError("normalisation scale must be finite and positive")
            return m
    except (KeyError, TypeError) as exc:
        raise ModelError(f"malformed model document: {exc}") from None
    raise ModelError(f"unknown model kind {kind!r}")


def save_model(model: Model, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model_to_dict(model), fh, indent=1)
        fh.write("\n")


def load_model(path: str) -> Model:
    with open(path, encoding="utf-8") as fh:
        try:
            return model_from_dict(json.load(fh))
        except json.JSONDecodeError as exc:
            raise ModelError(f"{path}: not a model document ({exc.msg})") from None
