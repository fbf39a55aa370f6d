"""Command-line orchestrator.

Runs single response computations or the canned experiment suites and writes
CSV results plus a JSON provenance sidecar. Configuration comes from an
optional plain-text key=value file overridden by command-line flags.

Exit codes: 0 success, 1 usage error, 2 numerical abort.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__, kernels
from .errors import NumericsError
from .experiments import (SUITE_NAMES, run_single, run_suite, write_records,
                          write_sidecar)
from .orbit import RunConfig, dump_states, generate_orbit
from .systems import get_system, system_names


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; the CSV contract reserves 2 for
    numerical aborts, so remap usage errors to 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="chaosgrad",
                     description="Linear response of chaotic maps on a single orbit")
    parser.add_argument("--config", type=Path, help="key = value file with defaults")
    parser.add_argument("--system", choices=system_names())
    parser.add_argument("--gamma", action="append", type=float,
                        help="parameter value; repeat for several parameters")
    parser.add_argument("--segments", type=int, help="number of segments A")
    parser.add_argument("--steps-per-segment", type=int, help="steps per segment N")
    parser.add_argument("--window", type=int, help="half-width W of the psi window")
    parser.add_argument("--spin-up", type=int)
    parser.add_argument("--buffer-segments", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--repeats", type=int)
    parser.add_argument("--solver", choices=("projection", "lsq"))
    parser.add_argument("--moment-stride", type=int)
    parser.add_argument("--suite", choices=SUITE_NAMES)
    parser.add_argument("--frequency", action="append", type=float,
                        help="forcing frequency for the interval maps; repeatable")
    parser.add_argument("--noise-amp", type=float)
    parser.add_argument("--output", type=Path, help="CSV output path")
    parser.add_argument("--fd-check", action="store_true", default=None,
                        help="attach finite-difference oracle columns")
    parser.add_argument("--fd-segments", type=int)
    parser.add_argument("--fixed-noise", action="store_true", default=None,
                        help="reuse one noise realization across FD evaluations")
    parser.add_argument("--dump-states", type=Path,
                        help="also dump the orbit states of a single run to CSV")
    parser.add_argument("--version", action="version", version=__version__)
    return parser


_BOOL_KEYS = {"fd_check", "fixed_noise"}
_INT_KEYS = {"segments", "steps_per_segment", "window", "spin_up",
             "buffer_segments", "seed", "repeats", "moment_stride", "fd_segments"}
_FLOAT_KEYS = {"noise_amp"}
_LIST_KEYS = {"gamma", "frequency"}


def read_config_file(path: Path) -> dict:
    """Plain key = value lines; '#' starts a comment; lists are comma-separated."""
    out = {}
    for raw in path.read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"malformed config line: {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.replace("-", "_")
        if key in _BOOL_KEYS:
            out[key] = value.lower() in ("1", "true", "yes", "on")
        elif key in _INT_KEYS:
            out[key] = int(value)
        elif key in _FLOAT_KEYS:
            out[key] = float(value)
        elif key in _LIST_KEYS:
            out[key] = [float(v) for v in value.split(",") if v.strip()]
        else:
            out[key] = value
    return out


_DEFAULTS = {
    "system": "solenoid21",
    "gamma": None,
    "segments": 200,
    "steps_per_segment": 20,
    "window": 10,
    "spin_up": 1000,
    "buffer_segments": 2,
    "seed": 0,
    "repeats": 1,
    "solver": "projection",
    "moment_stride": 1,
    "suite": None,
    "frequency": None,
    "noise_amp": None,
    "output": Path("results.csv"),
    "fd_check": False,
    "fd_segments": 10_000,
    "fixed_noise": False,
    "dump_states": None,
}


def merge_settings(args: argparse.Namespace) -> dict:
    settings = dict(_DEFAULTS)
    if args.config is not None:
        settings.update(read_config_file(args.config))
    for key in _DEFAULTS:
        value = getattr(args, key, None)
        if value is not None:
            settings[key] = value
    settings["output"] = Path(settings["output"])
    return settings


def _make_config(settings: dict, seed: int) -> RunConfig:
    system_kwargs = {}
    if settings["frequency"]:
        system_kwargs["frequency"] = float(settings["frequency"][0])
    return RunConfig(
        system=settings["system"], gamma=settings["gamma"],
        steps_per_segment=settings["steps_per_segment"],
        segments=settings["segments"], window=settings["window"],
        spin_up=settings["spin_up"], buffer_segments=settings["buffer_segments"],
        seed=seed, solver=settings["solver"],
        moment_stride=settings["moment_stride"], noise_amp=settings["noise_amp"],
        fixed_noise=settings["fixed_noise"], system_kwargs=system_kwargs)


def _suite_overrides(settings: dict) -> dict:
    overrides = {
        "seed": settings["seed"],
        "solver": settings["solver"],
        "fd": settings["fd_check"],
    }
    if settings["repeats"] != _DEFAULTS["repeats"]:
        overrides["repeats"] = settings["repeats"]
    if settings["segments"] != _DEFAULTS["segments"]:
        overrides["segments"] = settings["segments"]
    if settings["gamma"]:
        overrides["gammas"] = settings["gamma"]
    if settings["frequency"]:
        overrides["frequencies"] = [float(f) for f in settings["frequency"]]
    if settings["fd_segments"] != _DEFAULTS["fd_segments"]:
        overrides["fd_segments"] = settings["fd_segments"]
    return overrides


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        settings = merge_settings(args)
    except (OSError, ValueError) as exc:
        parser.print_usage(sys.stderr)
        print(f"chaosgrad: error: {exc}", file=sys.stderr)
        return 1

    output = settings["output"]
    sidecar = output.with_suffix(".json")
    try:
        if settings["suite"] is None:
            records = []
            for rep in range(settings["repeats"]):
                config = _make_config(settings, settings["seed"] + rep)
                records.extend(run_single(
                    config, fd_check=settings["fd_check"],
                    fd_segments=settings["fd_segments"]))
            if settings["dump_states"] is not None:
                config = _make_config(settings, settings["seed"])
                system = get_system(config.system, **config.system_kwargs)
                orbit = generate_orbit(system, config, np.random.default_rng(config.seed))
                dump_states(orbit, settings["dump_states"])
            extras = {}
        else:
            name = settings["suite"]
            overrides = _suite_overrides(settings)
            if name == "sweep-gamma":
                overrides["system"] = settings["system"]
            if name in ("noise", "lorenz"):
                overrides["dump_prefix"] = str(output.with_suffix(""))
            # converge suites sweep their own grids; a single gamma applies
            if name in ("converge-A", "converge-W") and settings["gamma"]:
                overrides.pop("gammas", None)
                overrides["gamma"] = settings["gamma"][0]
            records, extras = run_suite(name, **overrides)
    except NumericsError as exc:
        print(f"chaosgrad: numerical abort: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"chaosgrad: error: {exc}", file=sys.stderr)
        return 1

    write_records(output, records)
    config_echo = {k: str(v) for k, v in settings.items()}
    config_echo["kernel_backend"] = kernels.backend_name()
    config_echo["version"] = __version__
    extra = {"diagnostics": extras["diagnostics"]} if "diagnostics" in extras else None
    write_sidecar(sidecar, config_echo, extra=extra)
    print(f"wrote {len(records)} records to {output}")
    if "diagnostics" in extras:
        flag = extras["diagnostics"]["non_convergent"]
        print(f"non-convergent: {flag}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
