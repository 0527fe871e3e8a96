"""Command-line entry point for scenario runs.

Exit codes: 0 success, 2 invalid configuration, 3 scenario failure,
4 missing outputs (plotdata on an incomplete run), 1 unexpected error.

Environment overrides: TWOSOL_OUTPUT_DIR replaces the output directory,
TWOSOL_WORKERS sets the sweep worker count.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .errors import ConfigInvalid, MissingOutputs, NumericsError, ScenarioFailed
from .runner import RunConfig, emit_plotdata, run

EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_CONFIG = 2
EXIT_SCENARIO = 3
EXIT_MISSING = 4

_SUBCOMMAND_SCENARIOS = {
    "constants": "constants",
    "interactions": "interactions",
    "simulate": "simulate",
    "same-sign": "same_sign",
    "reduced": "reduced",
    "log-law": "log_law",
    "shoot": "shoot",
    "lipschitz": "lipschitz",
}


def _add_common(sub):
    sub.add_argument("--config", help="JSON config file; flags override it")
    sub.add_argument("--out", help="output directory")
    sub.add_argument("--seed", type=int, help="deterministic seed")
    sub.add_argument("--N", type=int, help="spatial dimension")
    sub.add_argument("--p", type=float, help="nonlinearity exponent")
    sub.add_argument("--alpha", type=float, help="damping coefficient")
    sub.add_argument(
        "--set", action="append", default=[], metavar="KEY=VALUE",
        help="numerics override, value parsed as JSON when possible",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="twosol",
        description="Two-soliton dynamics laboratory for the damped "
        "scalar-field equation",
    )
    subs = parser.add_subparsers(dest="command", required=True)
    for name in _SUBCOMMAND_SCENARIOS:
        sub = subs.add_parser(name, help=f"run the {name} scenario")
        _add_common(sub)
        if name == "interactions":
            sub.add_argument("--r", type=float, nargs="+", dest="r_values",
                             help="separations to evaluate")
        if name in ("simulate", "same-sign", "shoot", "lipschitz"):
            sub.add_argument("--L", type=float, help="initial separation")
        if name in ("simulate", "same-sign", "reduced", "log-law"):
            sub.add_argument("--t-end", type=float, help="time horizon")
        if name in ("reduced", "log-law"):
            sub.add_argument("--r0", type=float, help="initial separation")
        if name == "reduced":
            sub.add_argument("--sigma", type=int, choices=(-1, 1),
                             help="sign product of the pair")
        if name in ("shoot", "lipschitz"):
            sub.add_argument("--delta", type=float, help="smallness scale")
            sub.add_argument("--T-accept", type=float, dest="T_accept",
                             help="persistence horizon")
            sub.add_argument("--box-tol", type=float, dest="box_tol",
                             help="bisection box tolerance")
        if name == "lipschitz":
            sub.add_argument("--directions", type=int,
                             help="number of probe directions")

    sweep = subs.add_parser("sweep", help="run a batch of configs")
    sweep.add_argument("--config", required=True,
                       help="JSON file with 'base' and 'sweep' entries")
    sweep.add_argument("--workers", type=int, default=None,
                       help="parallel workers (default 1)")

    plot = subs.add_parser("plotdata", help="emit tidy plot series")
    plot.add_argument("run_dir", help="directory of a completed run")
    return parser


def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def _config_from_args(args) -> RunConfig:
    if args.config:
        data = _load_json(args.config)
    else:
        data = {}
    data.setdefault("params", {})
    data.setdefault("numerics", {})
    data["scenario"] = _SUBCOMMAND_SCENARIOS[args.command]
    for key in ("N", "p", "alpha"):
        val = getattr(args, key, None)
        if val is not None:
            data["params"][key] = val
    if args.out is not None:
        data["output_dir"] = args.out
    if args.seed is not None:
        data["seed"] = args.seed
    for key in ("r_values", "L", "t_end", "r0", "sigma", "delta",
                "T_accept", "box_tol", "directions"):
        val = getattr(args, key, None)
        if val is not None:
            data["numerics"][key] = val
    for item in args.set:
        if "=" not in item:
            raise ConfigInvalid(f"--set needs KEY=VALUE, got {item!r}")
        key, _, raw = item.partition("=")
        data["numerics"][key] = _parse_value(raw)
    env_out = os.environ.get("TWOSOL_OUTPUT_DIR")
    if env_out:
        data["output_dir"] = env_out
    return RunConfig.from_dict(data)


def _load_json(path) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigInvalid(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigInvalid(f"config is not valid JSON: {exc}") from exc


def _run_one(data: dict):
    config = RunConfig.from_dict(data)
    manifest = run(config)
    return config.output_dir, manifest


def _run_sweep(args) -> int:
    spec = _load_json(args.config)
    if "base" not in spec or "sweep" not in spec:
        raise ConfigInvalid("sweep config needs 'base' and 'sweep' entries")
    base = spec["base"]
    entries = spec["sweep"]
    if not isinstance(entries, list) or not entries:
        raise ConfigInvalid("'sweep' must be a non-empty list")
    out_root = Path(os.environ.get("TWOSOL_OUTPUT_DIR")
                    or base.get("output_dir", "."))
    configs = []
    for i, entry in enumerate(entries):
        if not isinstance(entry, dict):
            raise ConfigInvalid("sweep entries must be objects")
        data = json.loads(json.dumps(base))
        data.setdefault("params", {}).update(entry.get("params", {}))
        data.setdefault("numerics", {}).update(entry.get("numerics", {}))
        data["output_dir"] = str(out_root / f"run_{i:03d}")
        configs.append(data)
        RunConfig.from_dict(data)  # validate before launching anything
    workers = args.workers or int(os.environ.get("TWOSOL_WORKERS", "1"))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_one, configs))
    else:
        results = [_run_one(data) for data in configs]
    for out_dir, manifest in results:
        print(f"{out_dir}: {len(manifest.files)} artifacts, "
              f"{manifest.wall_time_s:.2f}s")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "plotdata":
            files = emit_plotdata(args.run_dir)
            for path in files:
                print(path)
            return EXIT_OK
        if args.command == "sweep":
            return _run_sweep(args)
        config = _config_from_args(args)
        manifest = run(config)
        print(f"wrote {len(manifest.files)} artifacts to "
              f"{config.output_dir} in {manifest.wall_time_s:.2f}s")
        for name in sorted(manifest.files):
            print(f"  {name}  {manifest.files[name][:12]}")
        return EXIT_OK
    except ConfigInvalid as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ScenarioFailed as exc:
        print(f"scenario error: {exc}", file=sys.stderr)
        return EXIT_SCENARIO
    except MissingOutputs as exc:
        print(f"missing outputs: {exc}", file=sys.stderr)
        return EXIT_MISSING
    except NumericsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNEXPECTED


def console_main():
    sys.exit(main())


if __name__ == "__main__":
    console_main()
