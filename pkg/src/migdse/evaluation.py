"""Evaluation harness: success fractions, speedups, sweeps, grids, CSV and SVG.

Speed is read as the per-run probability of reaching the target within the
step budget, so the speedup of a method is the ratio of its success fraction
to the uniform baseline's.  Fractions carry 95% Wilson intervals.

CSV schemas (column names are stable):

* temperature sweep: ``temperature, target, speedup, fraction, runs,
  ci_low, ci_high`` (the uniform baseline appears as temperature ``inf``)
* IISM grid: ``chain_length, chains, runs, min, mean, median``
"""

from __future__ import annotations

import csv
import io
import math
import statistics
from dataclasses import dataclass, replace
from typing import IO, Callable, Iterable, Sequence

from .engine import DseConfig, Environment, RunResult, run_experiment
from .pom import Mode, PolicyConfig
from .prm import Model

SWEEP_COLUMNS = ("temperature", "target", "speedup", "fraction", "runs", "ci_low", "ci_high")
GRID_COLUMNS = ("chain_length", "chains", "runs", "min", "mean", "median")
Z95 = 1.959963984540054


class UndefinedSpeedup(ValueError):
    pass


def _bests(results: Sequence[RunResult] | Sequence[float]) -> list[float]:
    return [r.best_value if isinstance(r, RunResult) else float(r) for r in results]


def success_fraction(results, target: float) -> float:
    bests = _bests(results)
    if not bests:
        raise ValueError("success fraction of an empty result set")
    return sum(b <= target for b in bests) / len(bests)


def wilson_interval(successes: int, n: int, z: float = Z95) -> tuple[float, float]:
    if n <= 0:
        raise ValueError("interval needs at least one trial")
    p = successes / n
    denom = 1 + z * z / n
    centre = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    return max(0.0, centre - half), min(1.0, centre + half)


@dataclass(frozen=True)
class SpeedupReport:
    target: float
    method_fraction: float
    baseline_fraction: float
    speedup: float
    method_runs: int
    baseline_runs: int
    method_ci: tuple[float, float]
    baseline_ci: tuple[float, float]

    @property
    def separated(self) -> bool:
        """Whether the method's interval lies entirely above the baseline's."""
        return self.method_ci[0] > self.baseline_ci[1]


def speedup(method, baseline, target: float) -> SpeedupReport:
    m, b = _bests(method), _bests(baseline)
    fm, fb = success_fraction(m, target), success_fraction(b, target)
    if fb <= 0:
        raise UndefinedSpeedup(f"baseline never reaches target {target}")
    km = sum(x <= target for x in m)
    kb = sum(x <= target for x in b)
    return SpeedupReport(target, fm, fb, fm / fb, len(m), len(b),
                         wilson_interval(km, len(m)), wilson_interval(kb, len(b)))


def percentile_target(results, q: float) -> float:
    """Best value reached by the fraction ``q`` of runs (lower empirical quantile)."""
    bests = sorted(_bests(results))
    k = min(len(bests) - 1, max(0, math.ceil(q * len(bests)) - 1))
    return bests[k]


# -- sweeps and grids -----------------------------------------------------

def temperature_sweep(template: DseConfig, temperatures: Sequence[float],
                      targets: Sequence[float], model: Model,
                      env_factory: Callable[[], Environment], jobs: int = 1,
                      mode: Mode = Mode.GUIDED_1SA, baseline: Sequence[RunResult] | None = None):
    """Rows per (temperature, target) plus the uniform baseline as ``inf``.

    Returns ``(rows, results)`` where ``results`` maps each temperature (and
    ``math.inf``) to its run results.
    """
    if baseline is None:
        baseline = run_experiment(replace(template, policy=PolicyConfig(Mode.UNIFORM)),
                                  None, env_factory, jobs)
    results = {math.inf: list(baseline)}
    for t in temperatures:
        cfg = replace(template, policy=PolicyConfig(mode, t))
        results[t] = run_experiment(cfg, model, env_factory, jobs)
    rows = []
    for t in list(temperatures) + [math.inf]:
        for target in targets:
            rows.append(_sweep_row(t, target, results[t], baseline))
    return rows, results


def _sweep_row(t: float, target: float, results, baseline) -> dict:
    bests = _bests(results)
    k = sum(b <= target for b in bests)
    lo, hi = wilson_interval(k, len(bests))
    try:
        s = speedup(results, baseline, target).speedup
    except UndefinedSpeedup:
        s = math.nan
    return {"temperature": t, "target": target, "speedup": s, "fraction": k / len(bests),
            "runs": len(bests), "ci_low": lo, "ci_high": hi}


def grid_runs(budget: int, chain_length: int, chains: int, iterations: int = 1) -> int:
    return budget // (chain_length * chains * iterations)


def iism_grid(chain_lengths: Sequence[int], chain_counts: Sequence[int], budget: int,
              template: DseConfig, model: Model | None,
              env_factory: Callable[[], Environment], jobs: int = 1):
    """Min/mean/median best per (chain length, chain count) at a fixed step budget.

    The number of iterations per run is taken from ``template``; a cell whose
    run count rounds to zero is reported with ``runs = 0`` and empty stats.
    """
    rows, results = [], {}
    for length in chain_lengths:
        for chains in chain_counts:
            runs = grid_runs(budget, length, chains, template.num_iterations)
            cell = {"chain_length": length, "chains": chains, "runs": runs}
            if runs == 0:
                cell.update({"min": None, "mean": None, "median": None})
            else:
                cfg = replace(template, chain_length=length, num_chains=chains, runs=runs)
                res = run_experiment(cfg, model, env_factory, jobs)
                results[(length, chains)] = res
                cell.update(cell_stats(res))
            rows.append(cell)
    return rows, results


def cell_stats(results) -> dict:
    bests = _bests(results)
    return {"min": min(bests), "mean": statistics.fmean(bests), "median": statistics.median(bests)}


# -- emission -------------------------------------------------------------

def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        if math.isnan(v):
            return "nan"
        return repr(round(v, 10))
    return str(v)


def emit_csv(rows: Iterable[dict], columns: Sequence[str], sink: str | IO[str]) -> None:
    if isinstance(sink, str):
        with open(sink, "w", encoding="utf-8", newline="") as fh:
            emit_csv(rows, columns, fh)
        return
    w = csv.writer(sink, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_fmt(row.get(c)) for c in columns])


def csv_text(rows: Iterable[dict], columns: Sequence[str]) -> str:
    buf = io.StringIO()
    emit_csv(rows, columns, buf)
    return buf.getvalue()


_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b")


def _esc(s: str) -> str:
    return (str(s).replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
            .replace('"', "&quot;"))


def _n(v: float) -> str:
    return f"{v:.2f}"


def svg_line_chart(series: dict[str, Sequence[tuple[float, float]]], x_labels: Sequence[str],
                   title: str = "", x_label: str = "", y_label: str = "") -> str:
    """Line chart over categorical x positions ``0..len(x_labels)-1``."""
    w, h, left, right, top, bottom = 640, 400, 70, 150, 40, 60
    pw, ph = w - left - right, h - top - bottom
    ys = [y for pts in series.values() for _, y in pts if math.isfinite(y)]
    lo, hi = (min(ys), max(ys)) if ys else (0.0, 1.0)
    if hi == lo:
        lo, hi = lo - 1.0, hi + 1.0
    nx = max(1, len(x_labels) - 1)

    def px(x):
        return left + pw * x / nx

    def py(y):
        return top + ph * (1 - (y - lo) / (hi - lo))

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" '
           f'viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">',
           f'<rect width="{w}" height="{h}" fill="white"/>',
           f'<text x="{w / 2}" y="20" text-anchor="middle" font-size="14">{_esc(title)}</text>',
           f'<line x1="{left}" y1="{top + ph}" x2="{left + pw}" y2="{top + ph}" stroke="black"/>',
           f'<line x1="{left}" y1="{top}" x2="{left}" y2="{top + ph}" stroke="black"/>']
    for i, lab in enumerate(x_labels):
        x = _n(px(i))
        out.append(f'<line x1="{x}" y1="{top + ph}" x2="{x}" y2="{top + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{x}" y="{top + ph + 18}" text-anchor="middle">{_esc(lab)}</text>')
    for k in range(5):
        v = lo + (hi - lo) * k / 4
        y = _n(py(v))
        out.append(f'<line x1="{left - 5}" y1="{y}" x2="{left}" y2="{y}" stroke="black"/>')
        out.append(f'<text x="{left - 8}" y="{y}" text-anchor="end" '
                   f'dominant-baseline="middle">{v:.3g}</text>')
    out.append(f'<text x="{left + pw / 2}" y="{h - 15}" text-anchor="middle">{_esc(x_label)}</text>')
    out.append(f'<text x="18" y="{top + ph / 2}" text-anchor="middle" '
               f'transform="rotate(-90 18 {top + ph / 2})">{_esc(y_label)}</text>')
    for idx, (name, pts) in enumerate(series.items()):
        colour = _PALETTE[idx % len(_PALETTE)]
        good = [(x, y) for x, y in pts if math.isfinite(y)]
        if good:
            path = " ".join(f"{_n(px(x))},{_n(py(y))}" for x, y in good)
            out.append(f'<polyline fill="none" stroke="{colour}" stroke-width="2" points="{path}"/>')
            for x, y in good:
                out.append(f'<circle cx="{_n(px(x))}" cy="{_n(py(y))}" r="3" fill="{colour}"/>')
        ly = top + 16 * idx
        out.append(f'<rect x="{left + pw + 15}" y="{ly}" width="12" height="12" fill="{colour}"/>')
        out.append(f'<text x="{left + pw + 32}" y="{ly + 10}">{_esc(name)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def svg_heatmap(values: dict[tuple[int, int], float | None], rows: Sequence[int],
                cols: Sequence[int], title: str = "", row_label: str = "",
                col_label: str = "") -> str:
    """Heatmap with one cell per (row, col); missing cells are drawn grey."""
    cell, left, top = 56, 90, 50
    w, h = left + cell * len(cols) + 20, top + cell * len(rows) + 50
    vs = [v for v in values.values() if v is not None]
    lo, hi = (min(vs), max(vs)) if vs else (0.0, 1.0)
    span = (hi - lo) or 1.0
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" '
           f'viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="11">',
           f'<rect width="{w}" height="{h}" fill="white"/>',
           f'<text x="{w / 2}" y="20" text-anchor="middle" font-size="14">{_esc(title)}</text>']
    for j, c in enumerate(cols):
        out.append(f'<text x="{left + cell * j + cell / 2}" y="{top - 6}" '
                   f'text-anchor="middle">{c}</text>')
    for i, r in enumerate(rows):
        y = top + cell * i
        out.append(f'<text x="{left - 8}" y="{y + cell / 2}" text-anchor="end" '
                   f'dominant-baseline="middle">{r}</text>')
        for j, c in enumerate(cols):
            v = values.get((r, c))
            x = left + cell * j
            if v is None:
                fill, label = "#dddddd", "-"
            else:
                t = (v - lo) / span  # 0 = best (lowest)
                g = int(round(80 + 150 * t))
                fill, label = f"rgb({g},{g},255)", f"{v:.4g}"
            out.append(f'<rect x="{x}" y="{y}" width="{cell}" height="{cell}" fill="{fill}" '
                       f'stroke="white"/>')
            out.append(f'<text x="{x + cell / 2}" y="{y + cell / 2}" text-anchor="middle" '
                       f'dominant-baseline="middle">{label}</text>')
    out.append(f'<text x="{left + cell * len(cols) / 2}" y="{h - 15}" '
               f'text-anchor="middle">{_esc(col_label)}</text>')
    out.append(f'<text x="14" y="{top + cell * len(rows) / 2}" text-anchor="middle" '
               f'transform="rotate(-90 14 {top + cell * len(rows) / 2})">{_esc(row_label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_svg_chart(svg: str, sink: str | IO[str]) -> None:
    if isinstance(sink, str):
        with open(sink, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(svg)
    else:
        sink.write(svg)


def sweep_chart(rows: Sequence[dict], title: str = "Speedup vs temperature") -> str:
    temps = sorted({r["temperature"] for r in rows})
    labels = [_fmt(float(t)) if not math.isinf(t) else "uniform" for t in temps]
    series: dict[str, list[tuple[float, float]]] = {}
    for r in rows:
        series.setdefault(f"target {_fmt(r['target'])}", []).append(
            (temps.index(r["temperature"]), r["speedup"]))
    for pts in series.values():
        pts.sort()
    return svg_line_chart(series, labels, title, "temperature", "speedup")


def grid_chart(rows: Sequence[dict], stat: str = "median") -> str:
    lengths = sorted({r["chain_length"] for r in rows})
    chains = sorted({r["chains"] for r in rows})
    vals = {(r["chain_length"], r["chains"]): r[stat] for r in rows}
    return svg_heatmap(vals, lengths, chains, f"{stat} best", "chain length", "parallel chains")
