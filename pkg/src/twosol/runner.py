"""Config-driven scenario runs with deterministic, hash-manifested output.

A run is described by a JSON-serializable RunConfig; each scenario writes
CSV/JSON artifacts plus rendered figures into the output directory.  All
artifacts are written under a .partial suffix and renamed only when the
whole scenario succeeded; the manifest (with content hashes) is written
last, so a directory containing manifest.json is a complete run.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .errors import (
    ConfigInvalid,
    MissingOutputs,
    NumericsError,
    ScenarioFailed,
)
from .field1d import (
    ManifoldPair,
    PlainPair,
    SeededPair,
    Stepper,
    build_initial_data,
    energy,
    kinetic_norm_sq,
)
from .groundstate import solve_ground_state
from .interactions import interaction_g
from .modulation import decompose, diagnostics
from .params import Grid1D, ModelParams, RadialGridSpec
from .reduced import (
    ReducedConstants,
    ReducedState,
    asymptotic_distance,
    integrate,
)
from .shooter import Omega, ShootConfig, find_H, lipschitz_probe
from .spectrum import solve_linearized_spectrum

MANIFEST_NAME = "manifest.json"

_GRID_KEYS = {"x_min", "x_max", "points_per_unit"}
_ALLOWED_NUMERICS = {
    "constants": {"r_max", "h"},
    "interactions": {"r_values", "r_max", "h"},
    "simulate": _GRID_KEYS | {
        "kind", "L", "h1", "h2", "z1", "z2", "ell1", "ell2", "a1", "a2",
        "sigma1", "sigma2", "t_end", "cadence", "dt",
    },
    "same_sign": _GRID_KEYS | {"L", "t_end", "cadence", "dt"},
    "reduced": {"sigma", "r0", "t_end", "g_mode", "rtol", "n_samples"},
    "log_law": {"r0", "t_end", "rtol", "n_samples"},
    "shoot": _GRID_KEYS | {
        "L", "delta", "T_accept", "box_tol", "search_radius", "b_exit",
        "cadence", "dt",
    },
    "lipschitz": _GRID_KEYS | {
        "L", "delta", "directions", "T_accept", "box_tol", "cadence", "dt",
    },
}
SCENARIOS = tuple(sorted(_ALLOWED_NUMERICS))


@dataclass(frozen=True)
class RunConfig:
    """One scenario run: physics, numerics, destination and seed."""

    scenario: str
    params: ModelParams
    numerics: dict
    output_dir: Path
    seed: int = 0

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        if not isinstance(data, dict):
            raise ConfigInvalid("config must be a JSON object")
        unknown = set(data) - {
            "scenario", "params", "numerics", "output_dir", "seed"
        }
        if unknown:
            raise ConfigInvalid(f"unknown config keys: {sorted(unknown)}")
        scenario = data.get("scenario")
        if scenario not in _ALLOWED_NUMERICS:
            raise ConfigInvalid(
                f"scenario must be one of {SCENARIOS}, got {scenario!r}"
            )
        pdata = data.get("params", {})
        if not isinstance(pdata, dict):
            raise ConfigInvalid("params must be an object")
        try:
            params = ModelParams(
                N=int(pdata.get("N", 1)),
                p=float(pdata.get("p", 3.0)),
                alpha=float(pdata.get("alpha", 1.0)),
            )
        except (ValueError, TypeError) as exc:
            raise ConfigInvalid(f"invalid params: {exc}") from exc
        numerics = data.get("numerics", {})
        if not isinstance(numerics, dict):
            raise ConfigInvalid("numerics must be an object")
        bad = set(numerics) - _ALLOWED_NUMERICS[scenario]
        if bad:
            raise ConfigInvalid(
                f"numerics keys {sorted(bad)} not valid for {scenario}; "
                f"allowed: {sorted(_ALLOWED_NUMERICS[scenario])}"
            )
        out = data.get("output_dir", ".")
        seed = data.get("seed", 0)
        if not isinstance(seed, int):
            raise ConfigInvalid("seed must be an integer")
        return cls(
            scenario=scenario, params=params, numerics=dict(numerics),
            output_dir=Path(out), seed=seed,
        )

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        try:
            with open(path) as fh:
                data = json.load(fh)
        except OSError as exc:
            raise ConfigInvalid(f"cannot read config: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigInvalid(f"config is not valid JSON: {exc}") from exc
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "params": dataclasses.asdict(self.params),
            "numerics": self.numerics,
            "output_dir": str(self.output_dir),
            "seed": self.seed,
        }


@dataclass
class RunManifest:
    """Config echo, code version, timing and artifact hashes."""

    config: dict
    version: str
    wall_time_s: float
    files: dict

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


class _Workspace:
    """Collects .partial artifacts and renames them atomically at commit."""

    def __init__(self, outdir: Path):
        outdir.mkdir(parents=True, exist_ok=True)
        self.outdir = outdir
        self._names: list = []

    def partial(self, name: str) -> Path:
        self._names.append(name)
        return self.outdir / (name + ".partial")

    def commit(self) -> dict:
        files = {}
        for name in self._names:
            src = self.outdir / (name + ".partial")
            dst = self.outdir / name
            src.replace(dst)
            files[name] = _sha256(dst)
        return files


def _write_csv(path: Path, header, columns):
    arr = np.column_stack([np.asarray(c, dtype=float) for c in columns])
    np.savetxt(
        path, arr, delimiter=",", header=",".join(header), comments="",
        fmt="%.17g",
    )


def _write_json(path: Path, data: dict):
    with open(path, "w") as fh:
        json.dump(data, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _read_csv(path: Path) -> dict:
    with open(path) as fh:
        header = fh.readline().strip().split(",")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return {name: data[:, i] for i, name in enumerate(header)}


def _radial_grid(num: dict) -> Optional[RadialGridSpec]:
    if "r_max" in num or "h" in num:
        return RadialGridSpec(
            r_max=float(num.get("r_max", 30.0)), h=float(num.get("h", 1e-3))
        )
    return None


def _grid_1d(num: dict, ppu_default: int = 128) -> Grid1D:
    x_min = float(num.get("x_min", -40.0))
    x_max = float(num.get("x_max", 40.0))
    ppu = int(num.get("points_per_unit", ppu_default))
    return Grid1D(x_min, x_max, round((x_max - x_min) * ppu) + 1)


def _solutions(config: RunConfig):
    grid = _radial_grid(config.numerics)
    profile = solve_ground_state(config.params, grid=grid)
    spectral = solve_linearized_spectrum(profile)
    return profile, spectral


def _tracked_series(state, profile, spectral, t_end, cadence, dt=None):
    """Field evolution with modulation tracking and energy bookkeeping.

    Returns (series dict of arrays, status); tracking failures truncate
    the series with status 'tracking_lost'.
    """
    params = profile.params
    if dt is None:
        dt = 0.5 * state.grid.h
    stride = max(1, int(cadence / dt))
    stepper = Stepper(state, params, dt)
    cols = (
        "t", "z1", "z2", "ell1", "ell2", "a1p", "a2p", "a1m", "a2m",
        "eps_norm", "b", "N_norm", "E_func", "M_func", "r", "energy",
        "normvsq",
    )
    series = {k: [] for k in cols}
    guess = None
    status = "completed"
    while True:
        snap = stepper.state()
        try:
            dec = decompose(snap, profile, spectral, guess=guess)
            rec = diagnostics(dec, profile, spectral)
        except NumericsError:
            status = "tracking_lost"
            break
        guess = (dec.z1, dec.z2)
        vals = (
            snap.t, dec.z1, dec.z2, dec.ell1, dec.ell2,
            dec.a_plus[0], dec.a_plus[1], dec.a_minus[0], dec.a_minus[1],
            dec.eps_norm, rec.b, rec.N_norm, rec.E_func, rec.M_func, rec.r,
            energy(snap, params), kinetic_norm_sq(snap),
        )
        for key, val in zip(cols, vals):
            series[key].append(val)
        if snap.t >= t_end - 1e-12:
            break
        remaining = int(round((t_end - snap.t) / dt))
        stepper.advance(min(stride, max(1, remaining)))
        if stepper.status == "blowup":
            status = "blowup"
            break
    return {k: np.array(v) for k, v in series.items()}, status


# -- scenario pipelines ------------------------------------------------------

def _run_constants(config: RunConfig, ws: _Workspace):
    from .plots import profile_figure

    profile, spectral = _solutions(config)
    data = {
        "N": profile.params.N, "p": profile.params.p,
        "alpha": profile.params.alpha,
        "q0": profile.q0, "kappa": profile.kappa,
        "kappa_spread": profile.kappa_spread,
        "c1": profile.c1, "g0": profile.g0, "E_Q": profile.E_Q,
        "tail_match_error": profile.tail_match_error,
        "nu0": spectral.nu0, "nu0_sq": spectral.nu0 ** 2,
        "nu_plus": spectral.nu_plus, "nu_minus": spectral.nu_minus,
        "zeta_plus": spectral.zeta_plus, "zeta_minus": spectral.zeta_minus,
        "beta": spectral.beta,
    }
    _write_json(ws.partial("constants.json"), data)
    profile_figure(profile, ws.partial("profile.png"))


def _run_interactions(config: RunConfig, ws: _Workspace):
    from .plots import interaction_figure

    profile, _ = _solutions(config)
    r_values = np.asarray(
        config.numerics.get("r_values", [8.0, 10.0, 12.0, 14.0, 16.0]),
        dtype=float,
    )
    g = np.array([interaction_g(profile, r) for r in r_values])
    asym = np.array([
        profile.g0 * float(profile.q_at(np.array([r]))[0]) for r in r_values
    ])
    _write_csv(
        ws.partial("interactions.csv"),
        ["r", "g", "g0_q", "ratio"],
        [r_values, g, asym, g / asym],
    )
    interaction_figure(r_values, g, asym, ws.partial("interactions.png"))


def _initial_data_from(num: dict, profile, spectral, grid):
    kind = num.get("kind", "seeded")
    if kind == "seeded":
        spec = SeededPair(
            L=float(num.get("L", 12.0)),
            h1=float(num.get("h1", 0.0)), h2=float(num.get("h2", 0.0)),
        )
    elif kind == "plain":
        spec = PlainPair(
            int(num.get("sigma1", 1)), int(num.get("sigma2", -1)),
            float(num.get("z1", 6.0)), float(num.get("z2", -6.0)),
            float(num.get("ell1", 0.0)), float(num.get("ell2", 0.0)),
        )
    elif kind == "manifold":
        spec = ManifoldPair(
            int(num.get("sigma1", 1)), int(num.get("sigma2", -1)),
            float(num.get("z1", 6.0)), float(num.get("z2", -6.0)),
            float(num.get("ell1", 0.0)), float(num.get("ell2", 0.0)),
            a_plus=(float(num.get("a1", 0.0)), float(num.get("a2", 0.0))),
        )
    else:
        raise ConfigInvalid(f"unknown initial data kind {kind!r}")
    return build_initial_data(spec, profile, spectral, grid)


def _run_simulate(config: RunConfig, ws: _Workspace):
    from .plots import series_figure

    profile, spectral = _solutions(config)
    num = config.numerics
    grid = _grid_1d(num)
    state = _initial_data_from(num, profile, spectral, grid)
    series, status = _tracked_series(
        state, profile, spectral,
        t_end=float(num.get("t_end", 10.0)),
        cadence=float(num.get("cadence", 0.05)),
        dt=num.get("dt"),
    )
    cols = list(series)
    _write_csv(ws.partial("series.csv"), cols, [series[c] for c in cols])
    _write_json(
        ws.partial("summary.json"),
        {
            "status": status,
            "t_final": float(series["t"][-1]),
            "final_b": float(series["b"][-1]),
            "final_separation": float(series["z1"][-1] - series["z2"][-1]),
        },
    )
    series_figure(series, ws.partial("series.png"))


def _run_same_sign(config: RunConfig, ws: _Workspace):
    from .plots import series_figure

    profile, spectral = _solutions(config)
    num = config.numerics
    grid = _grid_1d(num)
    L = float(num.get("L", 10.0))
    state = build_initial_data(
        PlainPair(1, 1, L / 2.0, -L / 2.0), profile, spectral, grid
    )
    series, status = _tracked_series(
        state, profile, spectral,
        t_end=float(num.get("t_end", 20.0)),
        cadence=float(num.get("cadence", 0.05)),
        dt=num.get("dt"),
    )
    sep = series["z1"] - series["z2"]
    cols = list(series)
    _write_csv(ws.partial("series.csv"), cols, [series[c] for c in cols])
    _write_json(
        ws.partial("summary.json"),
        {
            "status": status,
            "t_final": float(series["t"][-1]),
            "initial_separation": float(sep[0]),
            "final_separation": float(sep[-1]),
            "separation_decreased": bool(sep[-1] < sep[0]),
            "twice_soliton_energy": 2.0 * profile.E_Q,
            "max_energy": float(series["energy"].max()),
        },
    )
    series_figure(series, ws.partial("series.png"))


def _reduced_run(config: RunConfig, r0: float, sigma: int):
    profile, spectral = _solutions(config)
    constants = ReducedConstants.from_solutions(profile, spectral)
    num = config.numerics
    state = ReducedState(z1=[r0 / 2.0], z2=[-r0 / 2.0], sigma=sigma)
    traj = integrate(
        state, constants, float(num.get("t_end", 1e6)),
        rtol=float(num.get("rtol", 1e-10)),
        g_mode=num.get("g_mode", "asymptotic"),
        profile=profile,
        n_samples=int(num.get("n_samples", 400)),
    )
    return constants, traj


def _run_reduced(config: RunConfig, ws: _Workspace):
    from .plots import reduced_figure

    num = config.numerics
    sigma = int(num.get("sigma", -1))
    r0 = float(num.get("r0", 10.0))
    constants, traj = _reduced_run(config, r0, sigma)
    sep = traj.separation()
    _write_csv(
        ws.partial("reduced.csv"),
        ["t", "z1", "z2", "ell1", "ell2", "separation"],
        [traj.t, traj.z1()[0], traj.z2()[0], traj.ell1()[0],
         traj.ell2()[0], sep],
    )
    _write_json(
        ws.partial("summary.json"),
        {
            "status": traj.status,
            "t_final": traj.t_final,
            "final_separation": float(sep[-1]),
            "sigma": sigma,
        },
    )
    reduced_figure(traj.t, sep, ws.partial("reduced.png"))


def _run_log_law(config: RunConfig, ws: _Workspace):
    from .plots import reduced_figure

    num = config.numerics
    r0 = float(num.get("r0", 10.0))
    constants, traj = _reduced_run(config, r0, sigma=-1)
    sep = traj.separation()
    t_safe = np.maximum(traj.t, 10.0)
    asym = asymptotic_distance(t_safe, constants)
    defect = sep - asym
    _write_csv(
        ws.partial("log_law.csv"),
        ["t", "r", "r_asym", "defect"],
        [traj.t, sep, asym, defect],
    )
    _write_json(
        ws.partial("summary.json"),
        {
            "status": traj.status,
            "t_final": traj.t_final,
            "final_defect": float(defect[-1]),
        },
    )
    reduced_figure(traj.t, sep, ws.partial("log_law.png"), asym=asym)


def _shoot_config(config: RunConfig) -> ShootConfig:
    num = config.numerics
    grid = _grid_1d(num, ppu_default=64)
    kw = {}
    for key in ("delta", "T_accept", "box_tol", "search_radius", "b_exit",
                "cadence", "dt"):
        if key in num:
            kw[key] = float(num[key])
    return ShootConfig(grid=grid, **kw)


def _run_shoot(config: RunConfig, ws: _Workspace):
    from .plots import shoot_figure

    profile, spectral = _solutions(config)
    num = config.numerics
    L = float(num.get("L", 12.0))
    cfg = _shoot_config(config)
    result = find_H(L, None, cfg, profile, spectral)
    a1 = [a[0] for a, _ in result.trace]
    a2 = [a[1] for a, _ in result.trace]
    kinds = [c.kind for _, c in result.trace]
    _write_csv(
        ws.partial("trace.csv"),
        ["a1", "a2", "t_exit", "b_exit_value", "mode", "sign", "b_rate"],
        [
            a1, a2,
            [c.t for _, c in result.trace],
            [c.b for _, c in result.trace],
            [c.mode if c.mode is not None else 0 for _, c in result.trace],
            [c.sign if c.sign is not None else 0 for _, c in result.trace],
            [c.b_rate if c.b_rate is not None else math.nan
             for _, c in result.trace],
        ],
    )
    rates = [
        c.b_rate for _, c in result.trace
        if c.kind == "unstable_exit" and c.b_rate is not None
    ]
    _write_json(
        ws.partial("shoot_result.json"),
        {
            "L": L,
            "h": list(result.h),
            "a_plus": list(result.a_plus),
            "iterations": result.iterations,
            "residual_b_at_T": result.residual_b_at_T,
            "T_accept": cfg.T_accept,
            "b_exit": cfg.exit_level,
            "exit_rates": rates,
            "two_nu_plus": 2.0 * spectral.nu_plus,
        },
    )
    shoot_figure(a1, a2, kinds, ws.partial("shoot.png"))


def _lipschitz_directions(num: dict, grid: Grid1D, L, delta, spectral, seed):
    """Deterministic probe batch: L shifts, translated bumps, rescalings."""
    rng = np.random.default_rng(seed)
    n = int(num.get("directions", 5))
    x = grid.x
    variants = []
    for i in range(n):
        kind = i % 3
        if kind == 0:
            shift = delta * (0.3 + 0.6 * rng.random())
            variants.append(Omega(L=L + shift))
        elif kind == 1:
            x0 = L / 2.0 + 4.0 * (rng.random() - 0.5)
            bump = 0.3 * delta * np.exp(-((x - x0) ** 2))
            variants.append(Omega(L=L, phi_u=bump))
        else:
            c = 0.3 * delta * (2.0 * rng.random() - 1.0)
            Y1 = spectral.Y_at(np.abs(x - L / 2.0))
            variants.append(
                Omega(L=L, phi_u=c * Y1, phi_v=c * spectral.nu_plus * Y1)
            )
    return variants


def _run_lipschitz(config: RunConfig, ws: _Workspace):
    from .plots import lipschitz_figure

    profile, spectral = _solutions(config)
    num = config.numerics
    L = float(num.get("L", 12.0))
    cfg = _shoot_config(config)
    grid = cfg.grid
    variants = _lipschitz_directions(
        num, grid, L, cfg.delta, spectral, config.seed
    )
    report = lipschitz_probe(cfg, Omega(L=L), variants, profile, spectral)
    _write_csv(
        ws.partial("lipschitz.csv"),
        ["distance", "ratio"],
        [report["distances"], report["ratios"]],
    )
    summary = {k: report[k] for k in
               ("max_ratio", "delta", "scale", "fitted_constant")}
    summary["h_base"] = list(report["h_base"])
    summary["n_directions"] = len(variants)
    _write_json(ws.partial("lipschitz.json"), summary)
    bound = report["fitted_constant"] * report["scale"]
    lipschitz_figure(
        report["distances"], report["ratios"], bound,
        ws.partial("lipschitz.png"),
    )


_PIPELINES = {
    "constants": _run_constants,
    "interactions": _run_interactions,
    "simulate": _run_simulate,
    "same_sign": _run_same_sign,
    "reduced": _run_reduced,
    "log_law": _run_log_law,
    "shoot": _run_shoot,
    "lipschitz": _run_lipschitz,
}


def run(config: RunConfig) -> RunManifest:
    """Execute one scenario and commit its manifest."""
    start = time.perf_counter()
    ws = _Workspace(config.output_dir)
    try:
        _PIPELINES[config.scenario](config, ws)
    except ConfigInvalid:
        raise
    except NumericsError as exc:
        raise ScenarioFailed(
            f"scenario {config.scenario!r} failed: {exc}"
        ) from exc
    files = ws.commit()
    manifest = RunManifest(
        config=config.to_dict(),
        version=__version__,
        wall_time_s=time.perf_counter() - start,
        files=files,
    )
    _write_json(config.output_dir / MANIFEST_NAME, manifest.to_dict())
    return manifest


def load_manifest(run_dir) -> RunManifest:
    path = Path(run_dir) / MANIFEST_NAME
    if not path.exists():
        raise MissingOutputs(f"no {MANIFEST_NAME} in {run_dir}")
    with open(path) as fh:
        data = json.load(fh)
    return RunManifest(**data)


_SERIES_SOURCES = {
    "log_law": ("log_law.csv", ["r", "r_asym", "defect"]),
    "simulate": ("series.csv", ["energy", "normvsq", "b", "N_norm", "r"]),
    "same_sign": ("series.csv", ["energy", "normvsq", "b", "N_norm", "r"]),
    "reduced": ("reduced.csv", ["separation"]),
}


def emit_plotdata(run_dir) -> list:
    """Tidy long-format (series, t, value) CSVs for a completed run."""
    run_dir = Path(run_dir)
    manifest = load_manifest(run_dir)
    scenario = manifest.config["scenario"]
    if scenario not in _SERIES_SOURCES:
        return []
    src_name, series_names = _SERIES_SOURCES[scenario]
    src = run_dir / src_name
    if not src.exists():
        raise MissingOutputs(f"expected artifact {src_name} is missing")
    table = _read_csv(src)
    out = run_dir / f"plotdata_{scenario}.csv"
    t = table["t"]
    rows_t, rows_v, labels = [], [], []
    for name in series_names:
        rows_t.append(t)
        rows_v.append(table[name])
        labels.extend([name] * len(t))
    t_all = np.concatenate(rows_t)
    v_all = np.concatenate(rows_v)
    with open(out, "w") as fh:
        fh.write("series,t,value\n")
        for label, tv, vv in zip(labels, t_all, v_all):
            fh.write(f"{label},{tv:.17g},{vv:.17g}\n")
    return [out]
