"""Command-line front end.

Usage::

    noisepump <subcommand> [--config FILE] [--out DIR] [--seed N]
              [--format csv|json|both] [--section.key VALUE ...]

Each run writes ``<subcommand>.csv`` and/or ``<subcommand>.json`` plus a
``<subcommand>.manifest.json`` into the output directory.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .config import FORMATS, ExperimentConfig, apply_overrides, load, parse_override_value
from .dynamics import energy_difference, evolve
from .errors import ConfigError, NoisePumpError
from .measures import achl_density, achl_measure, converged_measure
from .noise import eta_asymptote, eta_curve, eta_min
from .oracle import monte_carlo, reference_trajectory, validate
from .sweep import scan_detuning_product, transition_curve
from .thermal import markovianity_temperature, rate_table, threshold_amplitude

SUBCOMMANDS = ("rates", "evolve", "measure", "threshold", "scan", "mc-validate")


def _num(x):
    """JSON-safe number: exact float repr, non-finite values as strings."""
    if isinstance(x, (bool, int)) or x is None:
        return x
    x = float(x)
    return x if math.isfinite(x) else repr(x)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (float, np.floating, np.integer)):
        return _num(obj.item() if hasattr(obj, "item") else obj)
    return obj


def _cell(x):
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    return format(float(x), ".9g")


def write_csv(path, columns: dict):
    names = list(columns)
    data = [np.atleast_1d(np.asarray(columns[k], dtype=float)) for k in names]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(names)
    for row in zip(*data):
        writer.writerow([_cell(v) for v in row])
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(buf.getvalue())


def write_json(path, obj):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        json.dump(_jsonable(obj), fh, indent=1, allow_nan=False)
        fh.write("\n")


def _manifest(cfg: ExperimentConfig, subcommand, residuals):
    return {
        "subcommand": subcommand,
        "version": __version__,
        "seed": cfg.run.seed,
        "config": cfg.to_toml(),
        "residuals": residuals,
    }


def cmd_rates(cfg):
    params, kernel = cfg.system_params(), cfg.kernel()
    curve = eta_curve(kernel, params.detuning, cfg.grid.t_max, cfg.h)
    rates = rate_table(params, curve)
    cols = {"t": curve.t, "eta": curve.eta, "shift": curve.shift,
            "gamma1": rates.gamma1, "gamma2": rates.gamma2}
    return cols, {"h": curve.h}, {}


def cmd_evolve(cfg):
    params, kernel = cfg.system_params(), cfg.kernel()
    n0, frame, t_max = cfg.run.initial_state, cfg.run.frame, cfg.grid.t_max
    pumped = rate_table(params, eta_curve(kernel, params.detuning, t_max, cfg.h))
    bare = rate_table(params, eta_curve(kernel.with_amplitude(0.0), params.detuning, t_max, cfg.h))
    h = pumped.eta.h
    if frame == "lab":
        h = min(h, 2.0 * math.pi / params.omega0 / 50.0)
    mode = cfg.run.on_unphysical
    a = evolve(pumped, n0, h=h, frame=frame, on_unphysical=mode)
    b = evolve(bare, n0, h=h, frame=frame, on_unphysical=mode)
    eta_inf = eta_asymptote(kernel, params.detuning).value
    cols = {"t": a.t, "nx": a.nx, "ny": a.ny, "nz": a.nz, "energy": a.energy,
            "energy_no_pump": b.energy, "delta_energy": a.energy - b.energy}
    results = {"eta_inf": eta_inf, "delta_energy_asymptotic": energy_difference(params, eta_inf),
               "frame": frame, "h": a.h}
    residuals = {"max_local_error": max(a.max_local_error, b.max_local_error),
                 "max_radius": a.extra["max_radius"], "t_max_radius": a.extra["t_max_radius"]}
    return cols, results, residuals


def cmd_measure(cfg):
    params, kernel = cfg.system_params(), cfg.kernel()
    tol = cfg.run.convergence_tol
    if cfg.run.until_converged:
        report, rates = converged_measure(params, kernel, cfg.grid.t_max, cfg.h, tol=tol)
    else:
        rates = rate_table(params, eta_curve(kernel, params.detuning, cfg.grid.t_max, cfg.h))
        report = achl_measure(rates, until_converged=False, tol=tol)
    cols = {"t": rates.t, "f": achl_density(rates), "gamma1": rates.gamma1, "gamma2": rates.gamma2}
    return cols, report.to_dict(), {"achl_residual_bound": report.residual, "t_end": report.t_end}


def cmd_threshold(cfg):
    params, kernel = cfg.system_params(), cfg.kernel()
    t_star, e_min = eta_min(kernel, params.detuning)
    T_star = markovianity_temperature(params.omega0, params.gamma, e_min)
    omega_star = threshold_amplitude(kernel, params.detuning, params.gamma, params.temperature,
                                     params.omega0, params.statistics)
    curve = transition_curve(kernel, params.detuning, params.gamma,
                             [T * params.omega0 for T in cfg.run.temperatures],
                             params.omega0, params.statistics)
    results = {"t_star": t_star, "eta_min": e_min, "T_star": T_star,
               "T_star_over_omega0": None if T_star is None else T_star / params.omega0,
               "omega_star": omega_star, "transition_curve": curve.to_dict()}
    cols = {"temperature": curve.abscissa, "omega_star": curve.values}
    return cols, results, {}


def cmd_scan(cfg):
    n, r = cfg.noise, cfg.run
    res = scan_detuning_product(n.shape, n.omega, (r.x_min, r.x_max), r.n_points,
                                cfg.system.detuning, n.alpha, workers=r.workers)
    cols = {"x": res.abscissa, "eta_min_per_omega": res.values}
    return cols, res.to_dict(), {"refinement_tolerance": res.tolerance}


def cmd_mc_validate(cfg):
    params, kernel, r = cfg.system_params(), cfg.kernel(), cfg.run
    mc = monte_carlo(params, kernel, r.trajectories, r.seed, with_bath=r.with_bath,
                     n0=r.initial_state, t_max=r.mc_t_max, dt=cfg.mc_dt, workers=r.workers)
    ode = reference_trajectory(params, kernel, mc, r.initial_state)
    report = validate(mc, ode, r.z_threshold)
    cols = {"t": mc.t}
    for k, c in enumerate("xyz"):
        cols[f"mc_n{c}"] = mc.mean[:, k]
    for k, c in enumerate("xyz"):
        cols[f"se_n{c}"] = mc.stderr[:, k]
    for k, c in enumerate("xyz"):
        cols[f"ode_n{c}"] = ode.n[:, k]
    results = dict(report.to_dict(), trajectories=mc.trajectories, dt=mc.dt, with_bath=mc.with_bath)
    return cols, results, {"max_z": report.max_z}


COMMANDS = {
    "rates": cmd_rates,
    "evolve": cmd_evolve,
    "measure": cmd_measure,
    "threshold": cmd_threshold,
    "scan": cmd_scan,
    "mc-validate": cmd_mc_validate,
}


def _split_overrides(extra):
    out, problems = {}, []
    i = 0
    while i < len(extra):
        tok = extra[i]
        if not tok.startswith("--") or "." not in tok:
            problems.append(f"unrecognised argument {tok!r}")
            i += 1
            continue
        key = tok[2:]
        if "=" in key:
            key, val = key.split("=", 1)
        elif i + 1 < len(extra):
            val = extra[i + 1]
            i += 1
        else:
            problems.append(f"override {tok!r} is missing a value")
            break
        out[key] = parse_override_value(val)
        i += 1
    if problems:
        raise ConfigError(problems)
    return out


def build_parser():
    parser = argparse.ArgumentParser(prog="noisepump", description=__doc__.splitlines()[0])
    parser.add_argument("subcommand", choices=SUBCOMMANDS)
    parser.add_argument("--config", help="TOML configuration file")
    parser.add_argument("--out", help="output directory (overrides output.directory)")
    parser.add_argument("--seed", type=int, help="random seed (overrides run.seed)")
    parser.add_argument("--format", choices=FORMATS, help="output format (overrides output.format)")
    return parser


def run(subcommand, config_path=None, overrides=None, out=None, seed=None, fmt=None):
    """Run one subcommand; returns ``(config, results)`` and writes artifacts."""
    cfg = load(config_path) if config_path else ExperimentConfig()
    overrides = dict(overrides or {})
    if out is not None:
        overrides["output.directory"] = out
    if seed is not None:
        overrides["run.seed"] = seed
    if fmt is not None:
        overrides["output.format"] = fmt
    if overrides:
        cfg = apply_overrides(cfg, overrides)

    directory = cfg.output.directory
    try:
        os.makedirs(directory, exist_ok=True)
    except OSError as exc:
        raise ConfigError([f"output directory {directory!r} is not writable: {exc}"]) from exc

    cols, results, residuals = COMMANDS[subcommand](cfg)
    manifest = _manifest(cfg, subcommand, residuals)
    stem = os.path.join(directory, subcommand)
    if cfg.output.format in ("csv", "both"):
        write_csv(stem + ".csv", cols)
    if cfg.output.format in ("json", "both"):
        payload = dict(results, series={k: np.asarray(v) for k, v in cols.items()})
        write_json(stem + ".json", {"manifest": manifest, "results": payload})
    write_json(stem + ".manifest.json", manifest)
    return cfg, results


def main(argv=None) -> int:
    parser = build_parser()
    args, extra = parser.parse_known_args(argv)
    try:
        overrides = _split_overrides(extra)
        run(args.subcommand, args.config, overrides, args.out, args.seed, args.format)
    except NoisePumpError as exc:
        code = getattr(exc, "exit_code", 4)
        record = {"error": type(exc).__name__, "exit_code": code, "message": str(exc)}
        if isinstance(exc, ConfigError):
            record["problems"] = exc.problems
        print(json.dumps(record), file=sys.stderr)
        return code
    except Exception as exc:  # noqa: BLE001 - report, never crash silently
        record = {"error": type(exc).__name__, "exit_code": 4, "message": str(exc)}
        print(json.dumps(record), file=sys.stderr)
        return 4
    return 0


if __name__ == "__main__":
    sys.exit(main())
