"""Command-line entry point: ``fedcure {run,sweep,form,validate}``."""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import Any, Optional, Sequence

import yaml

from . import report
from .config import SCHEDULERS, ExperimentConfig, load_config
from .errors import ConfigError
from .experiment import form, prepare, run

OUT_ENV = "FEDCURE_OUT"


def _default_out() -> str:
    return os.environ.get(OUT_ENV, "runs")


def _parse_set(items: Sequence[str]) -> dict[str, Any]:
    out: dict[str, Any] = {}
    for item in items:
        name, sep, raw = item.partition("=")
        if not sep or not name:
            raise ConfigError(f"--set expects NAME=VALUE, got {item!r}")
        out[name.strip()] = yaml.safe_load(raw) if raw.strip() else raw
    return out


def _common(p: argparse.ArgumentParser, out: bool = True) -> None:
    p.add_argument("--config", metavar="PATH", help="YAML experiment config")
    p.add_argument("--seed", type=int)
    p.add_argument("--scheduler", choices=SCHEDULERS)
    p.add_argument("--beta", type=float)
    p.add_argument("--kappa", type=float)
    p.add_argument("--rounds", type=int, help="number of global rounds (tau_g)")
    p.add_argument("--set", action="append", default=[], metavar="NAME=VALUE",
                   help="override any config field, dotted names for nested sections (repeatable)")
    if out:
        p.add_argument("--out", metavar="DIR", help=f"output directory (default ${OUT_ENV} or ./runs)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fedcure", description="Semi-asynchronous hierarchical FL simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="formation followed by simulation")
    _common(p)
    p.add_argument("--skip-formation", action="store_true", help="simulate on the initial partition")

    p = sub.add_parser("sweep", help="one run per value of a numeric parameter")
    _common(p)
    p.add_argument("--param", required=True, help="config field to vary, e.g. beta or population.noise_sigma")
    p.add_argument("--values", nargs="*", default=[], help="values to try")
    p.add_argument("--skip-formation", action="store_true")

    p = sub.add_parser("form", help="coalition formation only")
    _common(p)

    p = sub.add_parser("validate", help="check a config and print the resolved values")
    _common(p, out=False)
    return parser


def _config(args: argparse.Namespace) -> ExperimentConfig:
    overrides = _parse_set(args.set)
    for flag, name in (("seed", "seed"), ("scheduler", "scheduler_kind"), ("beta", "beta"),
                       ("kappa", "kappa"), ("rounds", "tau_g")):
        value = getattr(args, flag)
        if value is not None:
            overrides[name] = value
    return load_config(args.config, overrides)


def _cmd_run(args, cfg) -> int:
    metrics = run(cfg, skip_formation=args.skip_formation)
    out = report.write_metrics(metrics, args.out or _default_out())
    print(report.format_summary(report.summarize(metrics)))
    print(f"\nwrote {out}")
    return 0


def _cmd_sweep(args, cfg) -> int:
    values = [yaml.safe_load(v) for v in args.values]
    result = report.sweep(cfg, args.param, values, skip_formation=args.skip_formation)
    base = Path(args.out or _default_out())
    for v, m in zip(result.values, result.runs):
        report.write_metrics(m, base / f"{args.param}={v}")
    print(report.format_table(result.table()))
    return 0


def _cmd_form(args, cfg) -> int:
    setup = prepare(cfg)
    partition, trace = form(setup)
    out = Path(args.out or _default_out())
    out.mkdir(parents=True, exist_ok=True)
    report.write_formation(trace, out)
    doc = {"assignment": list(partition.assignment), "sizes": [int(s) for s in partition.sizes()],
           "initial_js": trace.initial_js, "final_js": trace.final_js, "iterations": trace.iterations,
           "switches": len(trace.switches), "converged": trace.converged}
    (out / "formation.json").write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    print(f"initial avg-JS  {trace.initial_js:.6g}")
    print(f"final avg-JS    {trace.final_js:.6g}")
    print(f"iterations      {trace.iterations}")
    print(f"switches        {len(trace.switches)}")
    print(f"converged       {trace.converged}")
    print(f"sizes           {doc['sizes']}")
    return 0


def _cmd_validate(args, cfg) -> int:
    print(yaml.safe_dump(cfg.to_dict(), sort_keys=False).rstrip())
    print("config OK")
    return 0


COMMANDS = {"run": _cmd_run, "sweep": _cmd_sweep, "form": _cmd_form, "validate": _cmd_validate}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _config(args)
        return COMMANDS[args.command](args, cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(exc, file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
