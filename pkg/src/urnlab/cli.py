"""Command-line entry point: ``urnlab <subcommand> [flags]``.

Exit codes: 0 success, 1 acceptance failure, 2 configuration error,
3 runtime limit (oracle budget, counter range).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
import time
from pathlib import Path
from typing import Any, Optional

from . import __version__
from . import asymptotics as asy
from .diagnostics import decompose, renlund_conditions
from .distributions import DiscreteDist
from .errors import StateBudgetExceeded
from .harness import ExperimentConfig, run_experiment
from .oracle import DEFAULT_BUDGET, exact_distribution, exact_moments
from .urn import ModelKind, UrnState, run

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2, 3


class ConfigError(Exception):
    pass


# -- config ------------------------------------------------------------------

def _field(cfg: dict, name: str, kind=int, default: Any = ...):
    if name not in cfg or cfg[name] is None:
        if default is ...:
            raise ConfigError(f"{name}: required field missing")
        return default
    val = cfg[name]
    if kind is int and (isinstance(val, bool) or not isinstance(val, int)):
        raise ConfigError(f"{name}: expected an integer, got {val!r}")
    return val


def load_config(path: Optional[str]) -> dict:
    if path is None:
        raise ConfigError("--config: a JSON config file is required")
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"--config: cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"--config: invalid JSON ({exc})") from None
    if not isinstance(raw, dict):
        raise ConfigError("--config: top level must be a JSON object")
    return raw


def parse_common(raw: dict, seed_override: Optional[int] = None) -> dict:
    try:
        model = ModelKind.parse(raw.get("model"))
    except ValueError as exc:
        raise ConfigError(f"model: {exc}") from None
    out = {"model": model}
    out["m"] = _field(raw, "m")
    out["W0"] = _field(raw, "W0")
    out["B0"] = _field(raw, "B0")
    for key in ("m", "W0", "B0"):
        if out[key] < (1 if key == "m" else 0):
            raise ConfigError(f"{key}: out of range ({out[key]})")
    if out["W0"] + out["B0"] < out["m"]:
        raise ConfigError(f"W0, B0: initial urn holds fewer than m={out['m']} balls")
    for key in ("dX", "dY"):
        if raw.get(key) is None:
            out[key] = None
            continue
        try:
            out[key] = DiscreteDist.from_json(raw[key])
        except ValueError as exc:
            raise ConfigError(f"{key}: {exc}") from None
    if out["dX"] is None:
        raise ConfigError("dX: required field missing")
    if model.uses_y and out["dY"] is None:
        raise ConfigError(f"dY: required for model {model.value}")
    if not model.uses_y and out["dY"] is not None:
        raise ConfigError(f"dY: model {model.value} uses X only")
    out["horizon"] = _field(raw, "horizon", default=0)
    if out["horizon"] < 0:
        raise ConfigError("horizon: must be >= 0")
    cps = raw.get("checkpoints") or []
    if not isinstance(cps, list) or not all(isinstance(c, int) for c in cps):
        raise ConfigError("checkpoints: expected a list of integers")
    out["checkpoints"] = cps
    out["replicas"] = _field(raw, "replicas", default=2)
    out["seed"] = seed_override if seed_override is not None else _field(raw, "seed", default=0)
    out["budget"] = _field(raw, "budget", default=DEFAULT_BUDGET)
    out["workers"] = _field(raw, "workers", default=None)
    return out


# -- output helpers ----------------------------------------------------------

def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    with os.fdopen(fd, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _write_manifest(args, seed, started: float) -> None:
    if args.out is None:
        return
    manifest = {
        "subcommand": args.command,
        "config": args.config,
        "out": str(args.out),
        "seed": seed,
        "version": __version__,
        "duration_s": round(time.time() - started, 3),
    }
    _atomic_write(Path(args.out) / "manifest.json",
                  json.dumps(manifest, sort_keys=True, indent=2) + "\n")


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, default=str) + "\n"


# -- subcommands -------------------------------------------------------------

def cmd_theory(args, c) -> int:
    mm = asy.ModelMoments.from_dists(c["m"], c["dX"], c["dY"])
    text = _dump(asy.profile(c["model"], mm).to_json())
    sys.stdout.write(text)
    if args.out:
        _atomic_write(Path(args.out) / "theory.json", text)
    return EXIT_OK


def cmd_simulate(args, c) -> int:
    traj = run(UrnState(c["W0"], c["B0"]), c["model"], c["dX"], c["dY"], c["m"],
               c["horizon"], c["seed"], record=args.full, checkpoints=c["checkpoints"])
    _atomic_write(Path(args.out) / "trajectory.csv", traj.to_csv(full=args.full))
    return EXIT_OK


def cmd_oracle(args, c) -> int:
    budget = c["budget"]
    env = os.environ.get("URNLAB_BUDGET")
    if env:
        try:
            budget = int(env)
        except ValueError:
            raise ConfigError(f"URNLAB_BUDGET: expected an integer, got {env!r}") from None
    sd = exact_distribution(c["W0"], c["B0"], c["m"], c["model"], c["dX"], c["dY"],
                            c["horizon"], budget=budget)
    ew, vw, ez, vz = exact_moments(sd)
    out = Path(args.out)
    _atomic_write(out / "oracle.csv", sd.to_csv())
    mom = {name: {"num": v.numerator, "den": v.denominator, "value": float(v)}
           for name, v in (("EW", ew), ("VarW", vw), ("EZ", ez), ("VarZ", vz))}
    mom["horizon"] = sd.horizon
    mom["states"] = len(sd.mass)
    _atomic_write(out / "oracle_moments.json", _dump(mom))
    return EXIT_OK


def cmd_diagnose(args, c) -> int:
    traj = run(UrnState(c["W0"], c["B0"]), c["model"], c["dX"], c["dY"], c["m"],
               c["horizon"], c["seed"], record=True)
    if not traj.records:
        raise ConfigError("horizon: diagnose needs at least one step")
    mm = asy.ModelMoments.from_dists(c["m"], c["dX"], c["dY"])
    variant = "paper" if args.paper_variant else "exact"
    out = Path(args.out)
    _atomic_write(out / "sa.csv", decompose(traj, mm, variant).to_csv())
    _atomic_write(out / "renlund.json",
                  renlund_conditions(traj, mm, c["dX"], c["dY"]).to_json() + "\n")
    return EXIT_OK


def cmd_experiment(args, c) -> int:
    try:
        cfg = ExperimentConfig(c["model"], c["dX"], c["dY"], c["W0"], c["B0"], c["m"],
                               c["horizon"], c["checkpoints"], c["replicas"], c["seed"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    workers = args.workers or c["workers"] or os.cpu_count() or 1
    rep = run_experiment(cfg, workers=workers)
    out = Path(args.out)
    _atomic_write(out / "report.json", rep.to_json() + "\n")
    _atomic_write(out / "report.csv", rep.to_csv())
    return EXIT_OK


def cmd_verify(args) -> int:
    from .verify import run_suite, selected

    try:
        selected(args.only)
    except ValueError as exc:
        raise ConfigError(f"--only: {exc}") from None
    variant = "paper" if args.paper_variant else "exact"
    verdicts = run_suite(args.only, workers=args.workers or 1, variant=variant,
                         echo=lambda s: print(s, flush=True))
    passed = sum(v.passed for v in verdicts)
    print(f"{passed}/{len(verdicts)} criteria passed")
    if args.out:
        _atomic_write(Path(args.out) / "verify.json",
                      _dump([vars(v) for v in verdicts]))
    return EXIT_OK if passed == len(verdicts) else EXIT_FAIL


COMMANDS = {
    "theory": cmd_theory,
    "simulate": cmd_simulate,
    "oracle": cmd_oracle,
    "diagnose": cmd_diagnose,
    "experiment": cmd_experiment,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="urnlab",
                                description="Multi-drawing urn with random additions.")
    p.add_argument("--version", action="version", version=f"urnlab {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for name in ("theory", "simulate", "oracle", "diagnose", "experiment", "verify"):
        s = sub.add_parser(name)
        s.add_argument("--config", help="JSON config file")
        s.add_argument("--out", help="output directory")
        s.add_argument("--seed", type=int, help="override the config seed")
        s.add_argument("--workers", type=int, help="worker processes (default: all cores)")
        s.add_argument("--paper-variant", action="store_true", help=argparse.SUPPRESS)
        if name == "simulate":
            s.add_argument("--full", action="store_true",
                           help="write every step with its draws")
        if name == "verify":
            s.add_argument("--only", help="criterion group or comma-separated numbers")
    return p


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    started = time.time()
    try:
        if args.command == "verify":
            code = cmd_verify(args)
            _write_manifest(args, None, started)
            return code
        if args.command != "theory" and args.out is None:
            args.out = "."
        c = parse_common(load_config(args.config), args.seed)
        code = COMMANDS[args.command](args, c)
        _write_manifest(args, c["seed"], started)
        return code
    except ConfigError as exc:
        print(f"urnlab: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (StateBudgetExceeded, OverflowError) as exc:
        print(f"urnlab: runtime limit: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
