"""Command-line entry point.

Exit codes: 0 success, 1 domain failure (bad input file, failed check...),
2 usage error.  ``check-equiv`` reports its verdict through the exit code as
0 equivalent, 1 not equivalent, 2 probably equivalent.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys

from . import benchmarks
from .engine import DseConfig, MigEnvFactory, default_jobs, results_dataset, run_experiment, \
    snapshot_mig
from .evaluation import (GRID_COLUMNS, SWEEP_COLUMNS, UndefinedSpeedup, emit_csv, emit_svg_chart,
                         grid_chart, iism_grid, percentile_target, speedup, sweep_chart,
                         temperature_sweep)
from .io import ParseError, read_circuit, write_circuit
from .metrics import METRIC_NAMES
from .mig import MigError, Verdict, check_equivalence
from .pom import Mode, PolicyConfig, PolicyError
from .prm import (ContextConfig, ModelError, evaluate_rmse, fit_context_model,
                  fit_statistical_1sa, fit_statistical_2sa, load_model, save_model)
from .synthetic import SyntheticEnvironment, SyntheticParams, default_params
from .trajectory import TrajectoryFormatError, read_jsonl, split_dataset, write_jsonl

log = logging.getLogger("migdse")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class CliError(Exception):
    """Domain failure reported with exit code 1."""


# -- circuit and environment resolution ----------------------------------

SYNTHETIC = "synthetic"


def load_circuit(spec: str):
    """Circuit from a path, a bundled benchmark name, or ``builtin:<name>``."""
    name = spec[len("builtin:"):] if spec.startswith("builtin:") else None
    if name is None and not os.path.exists(spec) and spec in benchmarks.names():
        name = spec
    if name is not None:
        if name not in benchmarks.names():
            raise CliError(f"unknown bundled benchmark {name!r} "
                           f"(available: {', '.join(benchmarks.names())})")
        return benchmarks.load(name)
    if not os.path.exists(spec):
        raise CliError(f"circuit file not found: {spec}")
    return read_circuit(spec)


class SyntheticFactory:
    def __init__(self, params: SyntheticParams):
        self.params = params

    def __call__(self):
        return SyntheticEnvironment(self.params)


def env_factory(args):
    if args.circuit == SYNTHETIC or args.circuit.startswith(SYNTHETIC + ":"):
        params = default_params()
        if ":" in args.circuit:
            with open(args.circuit.split(":", 1)[1], encoding="utf-8") as fh:
                params = SyntheticParams.from_dict(json.load(fh))
        return SyntheticFactory(params), None, SYNTHETIC
    mig = load_circuit(args.circuit)
    return MigEnvFactory(mig), mig, os.path.basename(args.circuit)


def _policy(args, model):
    mode = Mode(args.mode)
    if mode is not Mode.UNIFORM and model is None:
        raise CliError(f"--mode {args.mode} needs --model")
    return PolicyConfig(mode, args.temperature)


def _model(args):
    return load_model(args.model) if getattr(args, "model", None) else None


def _floats(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _ints(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return v


def _nonneg(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be non-negative")
    return v


def _jobs(args) -> int:
    return args.jobs if args.jobs else default_jobs()


# -- subcommands ----------------------------------------------------------

def cmd_collect(args) -> int:
    factory, _, bench = env_factory(args)
    cfg = DseConfig(chain_length=args.steps, runs=args.runs, seed=args.seed,
                    target=args.target)
    results = run_experiment(cfg, None, factory, _jobs(args))
    write_jsonl(results_dataset(results, bench, args.seed), args.out)
    log.info("wrote %d records to %s", args.runs * args.steps, args.out)
    return EXIT_OK


def cmd_fit(args) -> int:
    ds = read_jsonl(args.data)
    train, valid = split_dataset(ds, args.valid_frac, args.seed)
    if args.model == "stat1sa":
        model = fit_statistical_1sa(train, args.target)
    elif args.model == "stat2sa":
        model = fit_statistical_2sa(train, args.target)
    else:
        cfg = ContextConfig(args.context, args.hidden, args.epochs, args.lr, args.batch,
                            seed=args.seed)
        model, _ = fit_context_model(train, cfg, args.target)
    report = evaluate_rmse(model, valid)
    report.train_samples = len(train)
    if args.model == "context":
        report.hyperparameters = {"context": args.context, "hidden": args.hidden,
                                  "epochs": args.epochs, "lr": args.lr, "batch": args.batch}
    report.hyperparameters.update(valid_frac=args.valid_frac, seed=args.seed)
    save_model(model, args.out)
    doc = report.as_dict()
    with open(args.report or args.out + ".report.json", "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")
    print(json.dumps(doc))
    return EXIT_OK


def _best(results):
    return min(results, key=lambda r: (r.best_value, r.run_id))


def cmd_explore(args) -> int:
    factory, mig, bench = env_factory(args)
    model = _model(args)
    cfg = DseConfig(args.chain_length, args.chains, args.iterations, _policy(args, model),
                    args.target, args.seed, args.runs)
    results = run_experiment(cfg, model, factory, _jobs(args))
    best = _best(results)
    if args.out_traces:
        write_jsonl(results_dataset(results, bench, args.seed), args.out_traces)
    out = {"target": args.target, "initial": best.initial.as_dict(),
           "best": best.best_metrics.as_dict(), "run": best.run_id}
    if mig is not None:
        circuit = snapshot_mig(best.best_snapshot)
        verdict = check_equivalence(mig, circuit)
        out["equivalence"] = verdict.verdict.value
        if verdict.verdict is Verdict.NOT_EQUIVALENT:
            print(json.dumps(out))
            raise CliError("best circuit is not equivalent to the input")
        if args.out_best:
            write_circuit(circuit, args.out_best)
    elif args.out_best:
        raise CliError("--out-best needs a circuit environment")
    print(json.dumps(out))
    return EXIT_OK


def _sweep_targets(args, baseline) -> list[float]:
    targets = list(args.targets or [])
    for q in args.target_quantiles or []:
        targets.append(percentile_target(baseline, q))
    if not targets:
        targets.append(percentile_target(baseline, 0.2))
    return targets


def cmd_sweep(args) -> int:
    factory, _, _ = env_factory(args)
    model = _model(args)
    if model is None:
        raise CliError("sweep-temperature needs --model")
    mode = Mode(args.mode)
    if mode is Mode.UNIFORM:
        raise CliError("sweep-temperature needs a guided --mode")
    template = DseConfig(args.chain_length, args.chains, args.iterations, PolicyConfig(),
                         args.target, args.seed, args.runs)
    base = run_experiment(template, None, factory, _jobs(args))
    targets = _sweep_targets(args, base)
    rows, _ = temperature_sweep(template, args.temperatures, targets, model, factory,
                                _jobs(args), mode, base)
    emit_csv(rows, SWEEP_COLUMNS, args.out_csv)
    emit_svg_chart(sweep_chart(rows), args.out_svg)
    return EXIT_OK


def cmd_grid(args) -> int:
    factory, _, _ = env_factory(args)
    model = _model(args)
    template = DseConfig(1, 1, args.iterations, _policy(args, model), args.target, args.seed, 1)
    rows, _ = iism_grid(args.chain_lengths, args.chain_counts, args.budget, template, model,
                        factory, _jobs(args))
    emit_csv(rows, GRID_COLUMNS, args.out_csv)
    emit_svg_chart(grid_chart(rows, args.stat), args.out_svg)
    return EXIT_OK


def _run_bests(path: str, target: str) -> list[float]:
    ds = read_jsonl(path)
    best: dict[int, float] = {}
    for t in ds.trajectories:
        v = min(t.values(target))
        best[t.run_id] = min(v, best.get(t.run_id, math.inf))
    if not best:
        raise CliError(f"{path}: no trajectories")
    return [best[r] for r in sorted(best)]


def cmd_evaluate(args) -> int:
    method = _run_bests(args.method, args.target)
    base = _run_bests(args.baseline, args.target)
    targets = list(args.targets or []) or [percentile_target(base, q)
                                           for q in (args.target_quantiles or [0.2])]
    rows = []
    for t in targets:
        try:
            rep = speedup(method, base, t)
        except UndefinedSpeedup as exc:
            raise CliError(str(exc)) from None
        rows.append({"target": t, "method_fraction": rep.method_fraction,
                     "baseline_fraction": rep.baseline_fraction, "speedup": rep.speedup,
                     "method_runs": rep.method_runs, "baseline_runs": rep.baseline_runs,
                     "method_ci_low": rep.method_ci[0], "method_ci_high": rep.method_ci[1],
                     "baseline_ci_low": rep.baseline_ci[0], "baseline_ci_high": rep.baseline_ci[1]})
    cols = ("target", "method_fraction", "baseline_fraction", "speedup", "method_runs",
            "baseline_runs", "method_ci_low", "method_ci_high", "baseline_ci_low",
            "baseline_ci_high")
    emit_csv(rows, cols, args.out_csv if args.out_csv else sys.stdout)
    return EXIT_OK


def cmd_convert(args) -> int:
    mig = load_circuit(args.input)
    write_circuit(mig, args.output)
    if args.verify:
        again = read_circuit(args.output)
        if check_equivalence(mig, again).verdict is Verdict.NOT_EQUIVALENT:
            raise CliError("converted circuit is not equivalent")
    return EXIT_OK


def cmd_check_equiv(args) -> int:
    a, b = load_circuit(args.first), load_circuit(args.second)
    res = check_equivalence(a, b, patterns=args.patterns, seed=args.seed)
    line = res.verdict.value
    if res.counterexample is not None:
        bits = "".join(str(v) for v in res.counterexample)
        line += f" output={res.output} counterexample={bits}"
    print(line)
    return {Verdict.EQUIVALENT: 0, Verdict.NOT_EQUIVALENT: 1,
            Verdict.PROBABLY_EQUIVALENT: 2}[res.verdict]


# -- parser ---------------------------------------------------------------

def _add_common(p, circuit=True):
    if circuit:
        p.add_argument("--circuit", required=True,
                       help="AIGER (.aag) or BLIF file, bundled benchmark name, "
                            "'builtin:<name>', or 'synthetic[:params.json]'")
    p.add_argument("--seed", type=int, default=0, help="64-bit experiment seed")
    p.add_argument("--target", choices=METRIC_NAMES, default="transistors",
                   help="metric to minimise and predict")
    p.add_argument("--jobs", type=_nonneg, default=0,
                   help="worker processes (0 = available cores); output is identical for any value")


def _add_search(p):
    p.add_argument("--model", help="fitted model file (needed by guided modes)")
    p.add_argument("--mode", choices=[m.value for m in Mode], default="uniform")
    p.add_argument("--temperature", type=float, default=5.0, help="softmax temperature")
    p.add_argument("--runs", type=_positive, default=1)
    p.add_argument("--iterations", type=_positive, default=1)
    p.add_argument("--chains", type=_positive, default=1)
    p.add_argument("--chain-length", type=_nonneg, default=50)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="migdse", description=(
        "Guided design space exploration of MIG optimisation recipe sequences."))
    ap.add_argument("--config", help="JSON file of flag defaults (keys mirror flag names)")
    sub = ap.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("collect", help="record uniform-policy trajectories")
    _add_common(p)
    p.add_argument("--runs", type=_positive, default=10)
    p.add_argument("--steps", type=_nonneg, default=100, help="chain length per run")
    p.add_argument("--out", required=True, help="trajectory file to write")
    p.set_defaults(func=cmd_collect)

    p = sub.add_parser("fit", help="fit a prediction model and report validation RMSE")
    p.add_argument("--data", required=True, help="trajectory file")
    p.add_argument("--model", choices=("stat1sa", "stat2sa", "context"), default="stat1sa")
    p.add_argument("--target", choices=METRIC_NAMES, default="transistors")
    p.add_argument("--valid-frac", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--context", type=int, default=8, help="context length (context model)")
    p.add_argument("--hidden", type=int, default=64, help="hidden width (context model)")
    p.add_argument("--epochs", type=int, default=50)
    p.add_argument("--lr", type=float, default=0.01)
    p.add_argument("--batch", type=int, default=64)
    p.add_argument("--out", required=True, help="model file to write")
    p.add_argument("--report", help="report file (default: <out>.report.json)")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("explore", help="run guided or uniform exploration")
    _add_common(p)
    _add_search(p)
    p.add_argument("--out-best", help="write the best circuit (.aag or .blif)")
    p.add_argument("--out-traces", help="write all trajectories")
    p.set_defaults(func=cmd_explore)

    p = sub.add_parser("sweep-temperature", help="speedup as a function of temperature")
    _add_common(p)
    _add_search(p)
    p.set_defaults(mode="1sa")
    p.add_argument("--temperatures", type=_floats, default=[0.5, 2.0, 5.0, 20.0])
    p.add_argument("--targets", type=_floats, help="absolute target values")
    p.add_argument("--target-quantiles", type=_floats,
                   help="targets as quantiles of the baseline's best values (default 0.2)")
    p.add_argument("--out-csv", required=True)
    p.add_argument("--out-svg", required=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("grid-iism", help="chain length x parallel chains at a fixed budget")
    _add_common(p)
    p.add_argument("--model")
    p.add_argument("--mode", choices=[m.value for m in Mode], default="uniform")
    p.add_argument("--temperature", type=float, default=5.0)
    p.add_argument("--iterations", type=_positive, default=1)
    p.add_argument("--chain-lengths", type=_ints, default=[10, 50, 100])
    p.add_argument("--chain-counts", type=_ints, default=[1, 2, 4])
    p.add_argument("--budget", type=_positive, required=True, help="total steps per cell")
    p.add_argument("--stat", choices=("min", "mean", "median"), default="median")
    p.add_argument("--out-csv", required=True)
    p.add_argument("--out-svg", required=True)
    p.set_defaults(func=cmd_grid)

    p = sub.add_parser("evaluate", help="speedup of one trajectory file over a baseline file")
    p.add_argument("--method", required=True)
    p.add_argument("--baseline", required=True)
    p.add_argument("--target", choices=METRIC_NAMES, default="transistors")
    p.add_argument("--targets", type=_floats)
    p.add_argument("--target-quantiles", type=_floats)
    p.add_argument("--out-csv")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("convert", help="convert between AIGER and BLIF")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--verify", action="store_true", help="re-read and equivalence-check")
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("check-equiv", help="combinational equivalence (exit 0/1/2)")
    p.add_argument("first")
    p.add_argument("second")
    p.add_argument("--patterns", type=_positive, default=256,
                   help="64-bit random words used above the exhaustive limit")
    p.add_argument("--seed", type=int, default=0x5EED)
    p.set_defaults(func=cmd_check_equiv)
    return ap


def _apply_config(ap: argparse.ArgumentParser, argv: list[str]) -> argparse.Namespace:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return ap.parse_args(argv)
    try:
        with open(known.config, encoding="utf-8") as fh:
            conf = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        ap.error(f"cannot read config {known.config}: {exc}")
    if not isinstance(conf, dict):
        ap.error("config must be a JSON object")
    first = ap.parse_args(argv)
    sub = ap._subparsers._group_actions[0].choices[first.command]
    dests = {a.dest: a for a in sub._actions}
    defaults = {}
    for key, value in conf.items():
        dest = key.replace("-", "_").lstrip("_")
        if dest not in dests or dest in ("help", "func"):
            ap.error(f"config key {key!r} is not a flag of {first.command}")
        action = dests[dest]
        if isinstance(value, list) and action.type in (_floats, _ints):
            value = ",".join(str(v) for v in value)
        if isinstance(value, str) and action.type is not None:
            try:
                value = action.type(value)
            except (argparse.ArgumentTypeError, ValueError) as exc:
                ap.error(f"config key {key!r}: {exc}")
        defaults[dest] = value
        action.required = False
    sub.set_defaults(**defaults)
    return ap.parse_args(argv)


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=os.environ.get("MIGDSE_LOG_LEVEL", "WARNING").upper(),
                        format="%(levelname)s %(message)s")
    ap = build_parser()
    args = _apply_config(ap, list(sys.argv[1:] if argv is None else argv))
    try:
        return args.func(args)
    except (CliError, ParseError, MigError, ModelError, PolicyError, TrajectoryFormatError,
            OSError) as exc:
        print(f"migdse {args.command}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except ValueError as exc:
        print(f"migdse {args.command}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
