"""Derived statistics and on-disk persistence of run metrics.

A run directory holds three files:

* ``rounds.csv``       one row per global round, fixed column order, 9 significant digits
* ``allocations.csv``  one row per (round, member) frequency decision
* ``summary.json``     summary statistics, config, and the full formation trace

``parse_metrics(write_metrics(m, d))`` reproduces ``m`` exactly.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Optional, Sequence

import numpy as np

from .coalition import GameTrace, SwitchProposal
from .config import ExperimentConfig, apply_overrides, field_names, get_field
from .errors import ConfigError, Undefined
from .experiment import run
from .metrics import AllocationRow, RoundRow, RunMetrics

ROUND_COLUMNS = ("t", "clock", "chosen", "phi", "xi", "latency", "loss", "accuracy")
ALLOC_COLUMNS = ("t", "coalition", "member", "freq", "clamped")
FORMATION_COLUMNS = ("switch", "client", "from", "to", "avg_js")


def cov(values: Iterable[float]) -> float:
    """Population standard deviation over mean."""
    x = np.asarray(list(values), dtype=float)
    if x.size == 0:
        raise Undefined("COV of an empty sample")
    mean = x.mean()
    if mean == 0:
        raise Undefined("COV with zero mean")
    return float(x.std() / mean)


def _fmt(x: float) -> str:
    return f"{x:.9g}"


def _opt(x: float) -> Optional[float]:
    return None if x is None or (isinstance(x, float) and math.isnan(x)) else x


def _unopt(x: Optional[float]) -> float:
    return float("nan") if x is None else float(x)


def summarize(m: RunMetrics) -> dict[str, Any]:
    lat = m.latencies()
    try:
        c = cov(lat)
    except Undefined:
        c = None
    lam = m.lam_history()
    last = m.rows[-1] if m.rows else None
    return {
        "tau_g": m.tau_g,
        "n_coalitions": m.n_coalitions,
        "cov": c,
        "mean_latency": float(lat.mean()) if lat.size else None,
        "participation": [float(p) for p in m.participation()],
        "delta": [float(d) for d in m.delta],
        "mean_rate": [float(v) / m.tau_g for v in lam[-1]] if m.tau_g > 0 else None,
        "max_queue": float(lam.max()) if lam.size else None,
        "I": _opt(m.I),
        "final_avg_js": m.formation.final_js if m.formation is not None else None,
        "final_loss": _opt(last.loss) if last else None,
        "final_accuracy": _opt(last.accuracy) if last else None,
    }


def _trace_to_dict(tr: GameTrace) -> dict[str, Any]:
    return {
        "initial_js": tr.initial_js,
        "iterations": tr.iterations,
        "converged": tr.converged,
        "js_history": list(tr.js_history),
        "switches": [[s.client, s.from_, s.to, s.delta_avg_js] for s in tr.switches],
    }


def _trace_from_dict(d: dict[str, Any]) -> GameTrace:
    return GameTrace(
        initial_js=d["initial_js"],
        iterations=d["iterations"],
        js_history=list(d["js_history"]),
        switches=[SwitchProposal(*s) for s in d["switches"]],
        converged=d["converged"],
    )


def write_formation(trace: GameTrace, out: Path) -> Path:
    path = Path(out) / "formation.csv"
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(FORMATION_COLUMNS)
        w.writerow([0, -1, -1, -1, _fmt(trace.initial_js)])
        for r in trace.rows():
            w.writerow([r["switch"], r["client"], r["from"], r["to"], _fmt(r["avg_js"])])
    return path


def write_metrics(m: RunMetrics, out: str | Path) -> Path:
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    M = m.n_coalitions
    header = list(ROUND_COLUMNS) + [f"lam_{i}" for i in range(M)] + [f"that_{i}" for i in range(M)] \
        + [f"avail_{i}" for i in range(M)]
    with (out / "rounds.csv").open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in m.rows:
            avail = [1 if i in r.available else 0 for i in range(M)]
            w.writerow(
                [r.t, _fmt(r.clock), r.chosen, _fmt(r.phi), _fmt(r.xi), _fmt(r.latency), _fmt(r.loss),
                 _fmt(r.accuracy)]
                + [_fmt(v) for v in r.lam] + [_fmt(v) for v in r.t_hat] + avail
            )
    with (out / "allocations.csv").open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(ALLOC_COLUMNS)
        for a in m.allocations:
            w.writerow([a.t, a.coalition, a.member, _fmt(a.freq), int(a.clamped)])
    if m.formation is not None:
        write_formation(m.formation, out)
    doc = {
        "summary": summarize(m),
        "delta": list(m.delta),
        "I": _opt(m.I),
        "assignment": list(m.assignment),
        "config": m.config,
        "formation": _trace_to_dict(m.formation) if m.formation is not None else None,
    }
    (out / "summary.json").write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return out


def parse_metrics(path: str | Path) -> RunMetrics:
    path = Path(path)
    doc = json.loads((path / "summary.json").read_text(encoding="utf-8"))
    M = doc["summary"]["n_coalitions"]
    rows = []
    with (path / "rounds.csv").open(newline="", encoding="utf-8") as fh:
        for rec in csv.DictReader(fh):
            rows.append(RoundRow(
                t=int(rec["t"]), clock=float(rec["clock"]), chosen=int(rec["chosen"]),
                phi=float(rec["phi"]), xi=float(rec["xi"]), latency=float(rec["latency"]),
                lam=tuple(float(rec[f"lam_{i}"]) for i in range(M)),
                t_hat=tuple(float(rec[f"that_{i}"]) for i in range(M)),
                available=tuple(i for i in range(M) if rec[f"avail_{i}"] == "1"),
                loss=float(rec["loss"]), accuracy=float(rec["accuracy"]),
            ))
    allocations = []
    with (path / "allocations.csv").open(newline="", encoding="utf-8") as fh:
        for rec in csv.DictReader(fh):
            allocations.append(AllocationRow(
                int(rec["t"]), int(rec["coalition"]), int(rec["member"]), float(rec["freq"]), rec["clamped"] == "1"
            ))
    return RunMetrics(
        n_coalitions=M,
        rows=rows,
        allocations=allocations,
        formation=_trace_from_dict(doc["formation"]) if doc["formation"] is not None else None,
        delta=tuple(doc["delta"]),
        I=_unopt(doc["I"]),
        assignment=tuple(doc["assignment"]),
        config=doc["config"],
    )


@dataclass
class SweepResult:
    param: str
    values: list[Any]
    runs: list[RunMetrics]

    def table(self) -> list[dict[str, Any]]:
        out = []
        for v, m in zip(self.values, self.runs):
            s = summarize(m)
            out.append({
                self.param: v,
                "cov": s["cov"],
                "max_queue": s["max_queue"],
                "min_part_minus_delta": min(p - d for p, d in zip(s["participation"], s["delta"])),
                "max_mean_rate": max(s["mean_rate"]) if s["mean_rate"] else None,
            })
        return out


def sweep(cfg: ExperimentConfig, param: str, values: Sequence[Any], skip_formation: bool = False) -> SweepResult:
    """One independent run per value, all other fields (seed included) held fixed."""
    if param not in field_names(cfg):
        raise ConfigError(f"unknown sweep parameter {param!r}")
    current = get_field(cfg, param)
    if isinstance(current, bool) or not isinstance(current, (int, float)):
        raise ConfigError(f"sweep parameter {param!r} is not numeric")
    runs = []
    for v in values:
        runs.append(run(apply_overrides(cfg, {param: v}).validate(), skip_formation=skip_formation))
    return SweepResult(param, list(values), runs)


def format_summary(s: dict[str, Any]) -> str:
    def num(x):
        return "-" if x is None else f"{x:.6g}"

    lines = [
        f"rounds          {s['tau_g']}",
        f"coalitions      {s['n_coalitions']}",
        f"final avg-JS    {num(s['final_avg_js'])}",
        f"COV latency     {num(s['cov'])}",
        f"mean latency    {num(s['mean_latency'])}",
        f"max queue       {num(s['max_queue'])}",
        f"I               {num(s['I'])}",
        f"final loss      {num(s['final_loss'])}",
        f"final accuracy  {num(s['final_accuracy'])}",
        "",
        "coalition  participation  delta    mean_rate",
    ]
    rates = s["mean_rate"] or [None] * len(s["participation"])
    for m, (p, d, r) in enumerate(zip(s["participation"], s["delta"], rates)):
        lines.append(f"{m:>9}  {p:>13.4f}  {d:<7.4f}  {num(r)}")
    return "\n".join(lines)


def format_table(rows: list[dict[str, Any]]) -> str:
    if not rows:
        return "(no runs)"
    cols = list(rows[0])
    cells = [[c for c in cols]] + [["-" if r[c] is None else f"{r[c]:.6g}" if isinstance(r[c], float) else str(r[c])
                                    for c in cols] for r in rows]
    widths = [max(len(row[i]) for row in cells) for i in range(len(cols))]
    return "\n".join("  ".join(v.rjust(w) for v, w in zip(row, widths)) for row in cells)
