"""Command-line frontend.

Exit codes: 0 success, 1 usage/validation problem, 2 model error (stall,
lost contact, failed fit). Model errors also print one machine-readable
line on stderr: ``error: code=<ExceptionName> msg="..."``.

A run config file (``--config``) holds ``key = value`` lines (preset,
out_dir, seed); explicit flags override file values. Every sweep writes a
CSV plus a ``.meta.txt`` sidecar sufficient to reproduce it.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import experiments
from .errors import (CalibrationMissing, CollisionError, ConnectionTooWeak,
                     DemagnetizationFailed, FitDiverged, InsufficientVoltage,
                     NoMotorContact, ScenarioError, SepsimError, StallError)
from .magnetics import PRESETS, kernel_name, load_material
from .power import DeadTimeConfig, build_multiplex, load_schedule, validate_schedule
from .world import CONTACT_GAP, load_scenario

MODEL_ERRORS = (StallError, NoMotorContact, CollisionError, ConnectionTooWeak,
                InsufficientVoltage, DemagnetizationFailed, FitDiverged,
                CalibrationMissing)


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, default=None,
                        help="run config file (key = value lines)")
    common.add_argument("--preset", default=None,
                        help="material preset name or config file path")
    common.add_argument("--out-dir", dest="out_dir", type=Path, default=None,
                        help="output directory (default ./out)")
    common.add_argument("--seed", type=int, default=None,
                        help="seed recorded in output metadata")
    parser = argparse.ArgumentParser(
        prog="sepsim", parents=[common],
        description="Switchable-magnet actuator and modular-robot simulator")
    sub = parser.add_subparsers(dest="command")

    for name, help_text in (
            ("hysteresis", "trace one major loop to CSV"),
            ("sweep-pulse", "remanent flux vs pulse peak"),
            ("sweep-turns", "flux vs coil turn count"),
            ("coverage", "segment profiles for three wrap configs"),
            ("speed-test", "mode x surface speed table"),
            ("holding-force", "holding force vs voltage and pulses"),
            ("calibrate", "fit all calibration anchors and report")):
        sub.add_parser(name, parents=[common], help=help_text)
    run_p = sub.add_parser("run-scenario", parents=[common],
                           help="execute a scenario file")
    run_p.add_argument("scenario", type=Path)
    lint_p = sub.add_parser("lint-schedule", parents=[common],
                            help="validate a gate schedule file")
    lint_p.add_argument("schedule", type=Path)
    lint_p.add_argument("--dead-time", type=float, default=40e-3,
                        help="dead time in seconds (default 0.040)")
    return parser


def _load_config(path: Path) -> dict:
    values: dict[str, str] = {}
    if not path.exists():
        raise ScenarioError(f"config file not found: {path}")
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.replace("=", " ", 1).split(None, 1)
        if len(parts) != 2:
            raise ScenarioError(f"{path}:{lineno}: expected 'key = value'")
        values[parts[0]] = parts[1].strip()
    return values


def _resolve(args) -> dict:
    cfg = {"preset": "table1", "out_dir": Path("out"), "seed": experiments.DEFAULT_SEED}
    if args.config is not None:
        file_cfg = _load_config(args.config)
        if "preset" in file_cfg:
            cfg["preset"] = file_cfg["preset"]
        if "out_dir" in file_cfg:
            cfg["out_dir"] = Path(file_cfg["out_dir"])
        if "seed" in file_cfg:
            cfg["seed"] = int(file_cfg["seed"])
    if args.preset is not None:
        cfg["preset"] = args.preset
    if args.out_dir is not None:
        cfg["out_dir"] = args.out_dir
    if args.seed is not None:
        cfg["seed"] = args.seed
    if cfg["preset"] not in PRESETS:
        load_material(cfg["preset"])  # validates the file; keeps the name
    return cfg


def _meta(cfg: dict, material: bool = False, **extra) -> dict:
    meta = {"preset": cfg["preset"], "seed": cfg["seed"],
            "kernel": kernel_name()}
    if material:
        mat = load_material(cfg["preset"])
        for field in ("ms", "a", "k", "c", "alpha", "hc", "br"):
            meta[f"material_{field}"] = f"{getattr(mat, field):.17g}"
    meta.update(extra)
    return meta


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 1
    try:
        cfg = _resolve(args)
        return _dispatch(args, cfg)
    except MODEL_ERRORS as exc:
        print(f'error: code={type(exc).__name__} msg="{exc}"', file=sys.stderr)
        return 2
    except (ScenarioError, ValueError) as exc:
        print(f'error: code={type(exc).__name__} msg="{exc}"', file=sys.stderr)
        return 1


def _speed_constants() -> dict:
    cal = experiments.DEFAULT_SPEED_CALIBRATION
    out = {f"settle_{name}_s": f"{val:.17g}"
           for name, val in sorted(cal.settle_times.items())}
    out["settle_enhanced_s"] = f"{cal.settle_enhanced:.17g}"
    return out


def _dispatch(args, cfg: dict) -> int:
    out = cfg["out_dir"]
    preset = cfg["preset"]
    if args.command == "hysteresis":
        header, rows = experiments.hysteresis_trace(preset=preset)
        path = experiments.write_sweep(out, "hysteresis", header, rows,
                                       _meta(cfg, material=True, h_max="6*hc"))
        print(path)
    elif args.command == "sweep-pulse":
        spec = experiments.SweepSpec("peak_current", 0.0, 30.0, 31, preset=preset)
        header, rows = experiments.sweep_pulse_peak(spec)
        path = experiments.write_sweep(out, "sweep_pulse", header, rows,
                                       _meta(cfg, material=True, sweep="peak 0..30 A"))
        print(path)
    elif args.command == "sweep-turns":
        spec = experiments.SweepSpec("turns", 0.0, 500.0, 26, preset=preset)
        header, rows = experiments.sweep_turns(spec)
        path = experiments.write_sweep(out, "sweep_turns", header, rows,
                                       _meta(cfg, material=True, sweep="turns 0..500 at 20 A"))
        print(path)
    elif args.command == "coverage":
        header, rows = experiments.coverage_study(preset=preset)
        path = experiments.write_sweep(out, "coverage", header, rows,
                                       _meta(cfg, material=True, configs="half exact extra"))
        print(path)
    elif args.command == "speed-test":
        header, rows = experiments.speed_table()
        path = experiments.write_sweep(out, "speed_test", header, rows,
                                       _meta(cfg, table="mode x surface mm/s",
                                             **_speed_constants()))
        print(path)
    elif args.command == "holding-force":
        header, rows = experiments.holding_force_grid()
        path = experiments.write_sweep(out, "holding_force", header, rows,
                                       _meta(cfg, grid="voltage x pulses",
                                             contact_gap_m=f"{CONTACT_GAP:.17g}"))
        print(path)
    elif args.command == "run-scenario":
        world, trace = load_scenario(args.scenario)
        out.mkdir(parents=True, exist_ok=True)
        path = out / f"{args.scenario.stem}_trace.csv"
        path.write_text(trace.to_csv())
        meta = _meta(cfg, scenario=str(args.scenario),
                     total_energy_j=f"{trace.total_energy:.9g}",
                     duration_s=f"{trace.t:.9g}")
        lines = [f"{k} = {meta[k]}" for k in sorted(meta)]
        (out / f"{args.scenario.stem}_trace.meta.txt").write_text(
            "\n".join(lines) + "\n")
        print(path)
    elif args.command == "lint-schedule":
        sched = load_schedule(args.schedule)
        report = validate_schedule(sched, build_multiplex(),
                                   DeadTimeConfig(dead_time=args.dead_time))
        if report.ok:
            print(f"{args.schedule}: ok ({len(sched.events)} events)")
            return 0
        for v in report.violations:
            print(f"{args.schedule}: {v.kind} at t={v.time:.6g}: {v.detail}")
        return 1
    elif args.command == "calibrate":
        report = experiments.calibrate(seed=cfg["seed"])
        out.mkdir(parents=True, exist_ok=True)
        path = out / "calibration.txt"
        path.write_text(experiments.report_to_text(report))
        print(path)
        print(experiments.report_to_text(report), end="")
    else:  # pragma: no cover - argparse rejects unknown commands
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
