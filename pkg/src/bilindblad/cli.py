"""Command-line front end.

Exit codes: 0 when every check passes, 1 when a check fails, 2 on a
configuration or usage error.
"""

from __future__ import annotations

import argparse
import os
import re
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import models
from .config import DEFAULT_TOLERANCES, SUITES, ConfigError, ModelData, dumps, parse_config
from .suites import SuiteReport, run_suite

SEED_ENV = "BILINDBLAD_SEED"


@dataclass
class RunConfig:
    source: str
    data: ModelData
    suites: list[str] = field(default_factory=list)
    tolerances: dict[str, float] = field(default_factory=dict)
    outdir: Path | None = None
    seed: int = 0
    mode: str | None = None
    samples: int | None = None


def _floats(text: str) -> list[float]:
    try:
        vals = [float(eval_fraction(t)) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def eval_fraction(t: str) -> float:
    t = t.strip()
    if "/" in t:
        a, b = t.split("/", 1)
        return float(a) / float(b)
    return float(t)


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bilindblad", description="Verify bi-Hamiltonian and bi-Lindblad structures.")
    sub = p.add_subparsers(dest="command", required=True)

    def source(sp):
        g = sp.add_mutually_exclusive_group(required=True)
        g.add_argument("--model", help="built-in model name (see list-models)")
        g.add_argument("--config", type=Path, help="JSON model configuration file")
        sp.add_argument("--out", type=Path, help="output directory")
        sp.add_argument("--seed", type=int, help=f"random seed (overrides ${SEED_ENV} and the config)")

    v = sub.add_parser("verify", help="run verification suites")
    source(v)
    v.add_argument("--suite", action="append", choices=SUITES, help="suite to run (repeatable)")
    v.add_argument("--mode", choices=("convex", "difference"), help="pencil parametrization")
    v.add_argument("--samples", type=int, help="randomized-check sample count (default 100)")
    for k, val in DEFAULT_TOLERANCES.items():
        v.add_argument(f"--tol-{k}", type=float, dest=f"tol_{k}", metavar="X", help=f"tolerance (default {val:g})")

    s = sub.add_parser("simulate", help="evolve the initial state and tabulate sector coherences")
    source(s)
    s.add_argument("--times", type=_floats, help="comma-separated times")

    w = sub.add_parser("sweep", help="hbar sweep of the Egorov residual")
    source(w)
    w.add_argument("--hbars", type=_floats, help="comma-separated hbar values (fractions allowed)")

    e = sub.add_parser("export-model", help="print a built-in model as a config file")
    e.add_argument("--model", required=True)
    e.add_argument("--out", type=Path, help="write to this file instead of stdout")

    sub.add_parser("list-models", help="list built-in models")
    return p


def load_model(args) -> tuple[str, ModelData]:
    if getattr(args, "model", None):
        try:
            return args.model, models.get(args.model).data
        except KeyError as exc:
            raise ConfigError(str(exc.args[0])) from None
    try:
        text = args.config.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {args.config}: {exc.strerror}") from None
    return str(args.config), parse_config(text)


def resolve_seed(cli_seed: int | None, data: ModelData) -> int:
    if cli_seed is not None:
        return cli_seed
    env = os.environ.get(SEED_ENV)
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise ConfigError(f"{SEED_ENV} must be an integer, got {env!r}") from None
    return data.settings.seed


def build_run_config(args) -> RunConfig:
    src, data = load_model(args)
    tols = {k: getattr(args, f"tol_{k}") for k in DEFAULT_TOLERANCES if getattr(args, f"tol_{k}", None) is not None}
    return RunConfig(src, data, list(getattr(args, "suite", None) or []), tols, getattr(args, "out", None),
                     resolve_seed(getattr(args, "seed", None), data), getattr(args, "mode", None),
                     getattr(args, "samples", None))


def _safe(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.-]+", "_", name)


def emit_outputs(report: SuiteReport, outdir: Path | None) -> list[Path]:
    """Write report.txt and whichever CSV tables the run produced."""
    if outdir is None:
        return []
    outdir.mkdir(parents=True, exist_ok=True)
    written = [outdir / "report.txt"]
    written[0].write_text(report.to_text(), encoding="utf-8")
    for i, (name, csv) in enumerate(sorted(report.coherences.items())):
        path = outdir / ("coherences.csv" if i == 0 else f"coherences.{_safe(name)}.csv")
        path.write_text(csv, encoding="utf-8")
        written.append(path)
    for i, (name, sweep) in enumerate(report.sweeps.items()):
        path = outdir / ("egorov_sweep.csv" if i == 0 else f"egorov_sweep.{_safe(name)}.csv")
        path.write_text(sweep.to_csv(), encoding="utf-8")
        written.append(path)
    return written


def _run(rc: RunConfig, suites: list[str]) -> SuiteReport:
    report = run_suite(rc.data, suites or None, rc.seed, rc.tolerances, rc.mode, rc.samples)
    emit_outputs(report, rc.outdir)
    sys.stdout.write(report.to_text())
    return report


def main(argv: list[str] | None = None) -> int:
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    try:
        if args.command == "list-models":
            for name in sorted(models.REGISTRY):
                print(f"{name:<16} {models.get(name).anchor}")
            return 0
        if args.command == "export-model":
            try:
                text = models.get(args.model).export()
            except KeyError as exc:
                raise ConfigError(str(exc.args[0])) from None
            if args.out:
                args.out.write_text(text, encoding="utf-8")
            else:
                sys.stdout.write(text)
            return 0
        rc = build_run_config(args)
        if args.command == "verify":
            return _run(rc, rc.suites).exit_code
        if args.command == "simulate":
            q = rc.data.quantum
            if args.times is not None and q is not None:
                if any(t < 0 for t in args.times):
                    raise ConfigError("--times: times must be nonnegative")
                q.times = list(args.times)
            return _run(rc, ["dephasing"]).exit_code
        if args.command == "sweep":
            q = rc.data.quantum
            if args.hbars is not None and q is not None:
                if any(h <= 0 for h in args.hbars):
                    raise ConfigError("--hbars: values must be positive")
                for case in q.egorov:
                    case.hbars = list(args.hbars)
            return _run(rc, ["egorov"]).exit_code
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    return 2


if __name__ == "__main__":
    sys.exit(main())
