"""Command-line entry point ``qslbound``.

Exit codes: 0 success, 1 an invariant failed in the produced data, 2 bad
configuration or arguments.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path
from typing import List, Optional

from . import BACKEND
from .bounds import GConvention
from .config import ScenarioConfig, load_config
from .errors import ConfigError
from .figures import FIGURES
from .output import metadata, write_table
from .scan import (
    BOUND_HEADER,
    ENTROPY_HEADER,
    QSL_HEADER,
    bound_rows,
    bound_violations,
    entropy_rows,
    make_jobs,
    qsl_rows,
    qsl_violations,
    run_jobs,
)
from .verify import REPORT_HEADER, run_verification, summary_lines

EXIT_OK, EXIT_INVARIANT, EXIT_CONFIG = 0, 1, 2
NEEDS_SCENARIO = ("entropies", "bounds", "qsl")
FIGURE_STEPS = 512


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qslbound", description="Relative-entropy bounds and quantum speed limits.")
    p.add_argument("command", choices=("entropies", "bounds", "qsl", "figures", "verify"))
    p.add_argument("--config", type=Path, help="JSON scenario file (required for entropies/bounds/qsl)")
    p.add_argument("--out", type=Path, required=True, help="output directory")
    p.add_argument("--steps", type=int, help="time steps per trajectory (even)")
    p.add_argument("--convention", choices=[c.value for c in GConvention])
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int, help="worker processes (output is identical for any value)")
    p.add_argument("--instances", type=int, help="random instances for verify")
    return p


def _resolve(args) -> ScenarioConfig:
    if args.config is None:
        if args.command in NEEDS_SCENARIO:
            raise ConfigError(f"'{args.command}' needs --config")
        cfg = ScenarioConfig()
    else:
        cfg = load_config(args.config)
    over = {}
    if args.steps is not None:
        if args.steps < 2 or args.steps % 2:
            raise ConfigError(f"--steps must be an even integer >= 2, got {args.steps}")
        over["steps"] = args.steps
    if args.convention is not None:
        over["convention"] = GConvention.parse(args.convention)
    if args.seed is not None:
        if args.seed < 0:
            raise ConfigError("--seed must be >= 0")
        over["seed"] = args.seed
    if args.workers is not None:
        if args.workers < 1:
            raise ConfigError("--workers must be >= 1")
        over["workers"] = args.workers
    vs = cfg.verify
    if args.instances is not None:
        if args.instances < 1:
            raise ConfigError("--instances must be >= 1")
        vs = dataclasses.replace(vs, instances=args.instances)
    if args.steps is not None:
        vs = dataclasses.replace(vs, steps=args.steps)
    over["verify"] = vs
    return dataclasses.replace(cfg, **over)


def _scan(cfg: ScenarioConfig, out: Path, name: str) -> int:
    fn, header = {"entropies": (entropy_rows, ENTROPY_HEADER), "bounds": (bound_rows, BOUND_HEADER),
                  "qsl": (qsl_rows, QSL_HEADER)}[name]
    rows = run_jobs(fn, make_jobs(cfg), cfg.workers)
    meta = metadata(name, convention=cfg.convention, steps=cfg.steps,
                    extra={"scenario": cfg.source, "backend": BACKEND})
    write_table(out / f"{name}.csv", header, rows, meta)
    bad = bound_violations(rows) if name == "bounds" else qsl_violations(rows) if name == "qsl" else []
    print(f"{name}: {len(rows)} rows -> {out / f'{name}.csv'}")
    if bad:
        print(f"{name}: {len(bad)} rows violate their inequality", file=sys.stderr)
        return EXIT_INVARIANT
    return EXIT_OK


def _figures(args, cfg: ScenarioConfig, out: Path) -> int:
    steps = args.steps or FIGURE_STEPS
    conv = GConvention.parse(args.convention) if args.convention else GConvention.MAINTEXT
    failures = 0
    for name in cfg.figures:
        for panel in FIGURES[name](steps, conv):
            uses_conv = name in ("fig1", "fig2", "fig3", "fig4")
            meta = metadata("figures", convention=conv if uses_conv else None, steps=steps,
                            extra={"figure": name, "panel": panel.name, "quantity": panel.quantity,
                                   "x": panel.x_name, "y": panel.y_name, "parameters": panel.params,
                                   "flags": list(panel.flags)})
            write_table(out / f"{panel.name}.csv", ("x", "y", "value"), panel.rows(), meta)
            bad = panel.violations()
            failures += bad
            print(f"{panel.name}: {panel.values.size} points{'' if not bad else f', {bad} invariant violations'}")
    return EXIT_INVARIANT if failures else EXIT_OK


def _verify(cfg: ScenarioConfig, out: Path) -> int:
    report = run_verification(cfg.verify, cfg.seed, cfg.workers)
    meta = metadata("verify", convention="both", steps=cfg.verify.steps,
                    extra={"seed": cfg.seed, "settings": dataclasses.asdict(cfg.verify)})
    write_table(out / "verify.csv", REPORT_HEADER, report.rows(), meta)
    for line in summary_lines(report):
        print(line)
    print("verify: " + ("all invariant families passed" if report.passed else "some invariant families FAILED"))
    return EXIT_OK if report.passed else EXIT_INVARIANT


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _resolve(args)
        if args.command in NEEDS_SCENARIO:
            cfg.require_scenario()
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out: Path = args.out
    out.mkdir(parents=True, exist_ok=True)
    if args.command in NEEDS_SCENARIO:
        return _scan(cfg, out, args.command)
    if args.command == "figures":
        return _figures(args, cfg, out)
    return _verify(cfg, out)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
