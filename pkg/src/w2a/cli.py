"""Command-line driver: scenario runs, parameter sweeps, and data exports.

Subcommands
    w2a run <config>      one operating point: mean gain over surface draws
    w2a sweep <config>    sweep the parameter named in the [sweep] section
    w2a surface <config>  export a sea-surface heightfield sample
    w2a wind <config>     export a turbulent wind / tilt-angle time series

All outputs are CSV files with unit-annotated headers plus a metadata JSON
recording every resolved parameter and design flag.  Results are
deterministic for a given scenario and seed; `W2A_THREADS` only changes the
execution schedule, never the numbers.

Exit codes: 0 success, 2 configuration error, 3 numeric/convergence failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__, link, seastate, tracer, uav
from .bubbles import e_folding_length
from .config import ConfigError, LinkScenario, load_scenario

GAIN_SWEEPS = {
    # name -> (CSV column header, scenario transform)
    "theta_half": ("theta_half_deg", lambda s, v: replace(
        s, geometry=replace(s.geometry, theta_half=np.deg2rad(v)))),
    "d_water": ("d_water_m", lambda s, v: replace(
        s, geometry=replace(s.geometry, tx=(0.0, 0.0, -v)))),
    "d_air": ("d_air_m", lambda s, v: replace(
        s, geometry=replace(s.geometry, rx=(0.0, 0.0, v)))),
    "r_rx": ("r_rx_m", lambda s, v: replace(
        s, geometry=replace(s.geometry, r_rx=v))),
    "delta_m": ("delta_m_m", lambda s, v: replace(
        s, geometry=replace(s.geometry, delta_m=v))),
    "u10": ("u10_mps", lambda s, v: replace(s, u10=v)),
}


def _surfaces(scenario: LinkScenario, tag: int):
    """Deterministic surface draws for one operating point."""
    if scenario.u10 == 0.0:
        return [seastate.flat_surface()]
    wave = scenario.jonswap
    return [
        seastate.synthesize_surface(wave, seed=(scenario.seed, tag, r))
        for r in range(scenario.realizations)
    ]


def _point_gain(scenario: LinkScenario, tag: int):
    """Mean gain, ensemble stderr, and worst Snell residual at one point."""
    gains, residual = [], 0.0
    for r, surf in enumerate(_surfaces(scenario, tag)):
        run_seed = (scenario.seed * 1_000_003 + 7919 * tag + r) % 2**63
        est = tracer.run_channel(scenario, surf, seed=run_seed)
        gains.append(est.h_mc)
        residual = max(residual, est.snell_residual_max)
    gains = np.array(gains)
    se = float(gains.std(ddof=1) / np.sqrt(len(gains))) if len(gains) > 1 else float("nan")
    return float(gains.mean()), se, len(gains), residual


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _fmt(v) -> str:
    if isinstance(v, float):
        return format(v, ".9e")
    return str(v)


def _metadata(scenario: LinkScenario, command: str, wall_time: float, extra=None) -> dict:
    dryden = scenario.dryden
    meta = {
        "command": command,
        "version": __version__,
        "seed": scenario.seed,
        "scenario": dataclasses.asdict(scenario),
        "fresnel_mode": scenario.fresnel_mode,
        "bubble_phase_depth_m": (
            0.25 * e_folding_length(scenario.u10) if scenario.u10 > 0.0 else None
        ),
        "turbulence_mapping": "W20 = U10 (direct surface-wind mapping)",
        "w20_mps": dryden.w20 if dryden is not None else 0.0,
        "snr_calibration": link.DEFAULT_SNR_CALIBRATION,
        "nep_pinned_w_per_sqrthz": scenario.nep_pinned,
        "wall_time_s": wall_time,
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S"),
    }
    if extra:
        meta.update(extra)
    return meta


def _write_metadata(out: Path, meta: dict) -> None:
    with open(out / "metadata.json", "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, default=str)
        fh.write("\n")


def cmd_run(scenario: LinkScenario, out: Path) -> int:
    t0 = time.perf_counter()
    mean, se, n, residual = _point_gain(scenario, tag=0)
    _write_csv(
        out / "run.csv",
        ["mean_gain", "stderr", "n_realizations", "n_photons_per_run",
         "u10_mps", "d_water_m", "d_air_m", "theta_half_deg"],
        [[mean, se, n, scenario.n_photons, scenario.u10, scenario.d_water,
          scenario.d_air, float(np.rad2deg(scenario.geometry.theta_half))]],
    )
    meta = _metadata(scenario, "run", time.perf_counter() - t0,
                     {"snell_residual_max": residual})
    _write_metadata(out, meta)
    if not np.isfinite(mean):
        return 3
    return 0


def cmd_sweep(scenario: LinkScenario, out: Path) -> int:
    if scenario.sweep_parameter is None:
        raise ConfigError("sweep requires a [sweep] section with a parameter name")
    name = scenario.sweep_parameter.lower()
    t0 = time.perf_counter()
    extra: dict = {}
    if name in GAIN_SWEEPS:
        column, transform = GAIN_SWEEPS[name]
        if not scenario.sweep_values:
            raise ConfigError("sweep requires a non-empty values list")
        rows = []
        for i, value in enumerate(scenario.sweep_values):
            point = transform(scenario, float(value))
            mean, se, n, _ = _point_gain(point, tag=i + 1)
            rows.append([float(value), mean, se, n, scenario.n_photons])
        _write_csv(out / f"sweep_{name}.csv",
                   [column, "mean_gain", "stderr", "n_realizations", "n_photons"],
                   rows)
    elif name == "time":
        rows = _time_series(scenario)
        _write_csv(out / "sweep_time.csv",
                   ["t_s", "gain", "stderr_mc"], rows)
    elif name in ("ber", "ber_depth"):
        if not scenario.sweep_values:
            raise ConfigError("BER sweep requires depth values")
        model = link.fit_gain_model(
            scenario,
            n_photons=scenario.n_photons,
            realizations=scenario.realizations if scenario.u10 > 0 else 1,
            seed=scenario.seed,
        )
        result = link.evaluate_ber(
            scenario, scenario.rb, scenario.ber_realizations, model,
            depths=[float(v) for v in scenario.sweep_values],
            seed=scenario.seed,
        )
        rows = [[scenario.u10, p.rb, p.d_water, p.mean_ber, p.mean_snr_db,
                 p.n_realizations, p.stderr] for p in result.points]
        _write_csv(out / "sweep_ber.csv",
                   ["u10_mps", "rb_bps", "d_water_m", "mean_ber",
                    "mean_snr_db", "n_realizations", "stderr"],
                   rows)
        extra["gain_model"] = {
            "slope_per_m": model.slope, "intercept_ln_gain": model.intercept,
            "fit_depths_m": list(model.depths),
            "fit_mean_gains": list(model.mean_gains),
            "rel_stderr": model.rel_stderr,
        }
        if not all(p.converged for p in result.points):
            extra["convergence_warning"] = (
                "relative standard error of the gain fit exceeds 10%"
            )
    else:
        raise ConfigError(
            f"unknown sweep parameter {name!r}; choose from "
            f"{sorted([*GAIN_SWEEPS, 'time', 'ber_depth'])}"
        )
    _write_metadata(out, _metadata(scenario, f"sweep:{name}",
                                   time.perf_counter() - t0, extra))
    return 0


def _time_series(scenario: LinkScenario):
    """Gain trace under frozen wave phases advanced in time."""
    if scenario.u10 == 0.0:
        raise ConfigError("time-series sweep requires U10 > 0")
    base = seastate.synthesize_surface(scenario.jonswap, seed=(scenario.seed, 0))
    times = np.arange(0.0, scenario.duration + scenario.time_step / 2,
                      scenario.time_step)
    rows = []
    for i, t in enumerate(times):
        run_seed = (scenario.seed * 1_000_003 + i) % 2**63
        est = tracer.run_channel(scenario, base.at_time(float(t)), seed=run_seed)
        rows.append([float(t), est.h_mc, est.std_error])
    return rows


def cmd_surface(scenario: LinkScenario, out: Path) -> int:
    t0 = time.perf_counter()
    if scenario.u10 == 0.0:
        surf = seastate.flat_surface()
    else:
        surf = seastate.synthesize_surface(scenario.jonswap, seed=(scenario.seed, 0))
    xx, yy, zz = seastate.heightfield(surf, extent=50.0, step=0.5)
    rows = [
        [float(xx[i, j]), float(yy[i, j]), float(zz[i, j])]
        for i in range(xx.shape[0]) for j in range(xx.shape[1])
    ]
    _write_csv(out / "surface.csv", ["x_m", "y_m", "z_m"], rows)
    _write_metadata(out, _metadata(scenario, "surface", time.perf_counter() - t0))
    return 0


def cmd_wind(scenario: LinkScenario, out: Path) -> int:
    t0 = time.perf_counter()
    dryden = scenario.dryden
    if dryden is None:
        raise ConfigError("wind export requires U10 > 0")
    filters = uav.dryden_design(dryden)
    t, v = uav.simulate_wind(filters, dryden.u, scenario.duration,
                             seed=(scenario.seed, 1))
    alpha = uav.deflection_angle(np.sum(v * v, axis=1), scenario.body)
    rows = [
        [float(t[i]), float(v[i, 0]), float(v[i, 1]), float(v[i, 2]),
         float(np.rad2deg(alpha[i]))]
        for i in range(t.shape[0])
    ]
    _write_csv(out / "wind.csv",
               ["t_s", "vx_mps", "vy_mps", "vz_mps", "alpha_deg"], rows)
    _write_metadata(out, _metadata(scenario, "wind", time.perf_counter() - t0))
    return 0


COMMANDS = {
    "run": cmd_run,
    "sweep": cmd_sweep,
    "surface": cmd_surface,
    "wind": cmd_wind,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="w2a",
        description="Monte Carlo simulator for direct water-to-air optical links",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in COMMANDS.items():
        p = sub.add_parser(name, help=fn.__doc__)
        p.add_argument("config", help="scenario file (key = value with [section] headers)")
        p.add_argument("--photons", type=int, default=None,
                       help="override the photon count")
        p.add_argument("--seed", type=int, default=None,
                       help="override the master seed")
        p.add_argument("--out", default=None, help="override the output directory")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        scenario = load_scenario(args.config)
        if args.photons is not None:
            scenario = replace(scenario, n_photons=args.photons)
        if args.seed is not None:
            scenario = replace(scenario, seed=args.seed)
        if args.out is not None:
            scenario = replace(scenario, out_dir=args.out)
        out = Path(scenario.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        return COMMANDS[args.command](scenario, out)
    except (ConfigError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (RuntimeError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
