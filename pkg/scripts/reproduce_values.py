"""Print the headline scalars: thresholds, ACHL values, argmins, energy shift.

    python scripts/reproduce_values.py [--json out.json]
"""

import argparse
import json
from dataclasses import asdict, dataclass, field

from noisepump.dynamics import energy_difference
from noisepump.measures import achl_measure, converged_measure
from noisepump.noise import NoiseKernel, eta_asymptote, eta_curve, eta_min
from noisepump.sweep import scan_detuning_product
from noisepump.thermal import SystemParams, markovianity_temperature, rate_table, threshold_amplitude


@dataclass
class Setup:
    detuning: float = 2.0
    gamma: float = 1.0
    temperatures: tuple = (0.1, 0.3)
    threshold_temperature: float = 0.325
    short_window: float = 10.0
    kernels: dict = field(default_factory=lambda: {
        "OU": ("OU", 0.91, 4.25, 3.0),
        "SE": ("SE", 0.47, 4.25, 3.0),
        "PL": ("PL", 1.35, 10.0, 3.0),
    })


def run(setup: Setup) -> dict:
    out = {"setup": asdict(setup), "kernels": {}, "shared": {}, "argmin": {}}
    for name, args in setup.kernels.items():
        k = NoiseKernel(*args)
        t_star, e = eta_min(k, setup.detuning)
        row = {
            "t_star": t_star,
            "eta_min": e,
            "T_star": markovianity_temperature(1.0, setup.gamma, e),
            "omega_star": threshold_amplitude(k, setup.detuning, setup.gamma, setup.threshold_temperature),
            "eta_inf": eta_asymptote(k, setup.detuning).value,
        }
        for T in setup.temperatures:
            p = SystemParams(detuning=setup.detuning, gamma=setup.gamma, temperature=T)
            report, _ = converged_measure(p, k)
            row[f"achl_T{T}"] = report.achl
            row[f"blp_T{T}"] = report.blp
            row[f"windows_T{T}"] = len(report.windows)
            row[f"delta_energy_T{T}"] = energy_difference(p, row["eta_inf"])
        out["kernels"][name] = row
    for shape in ("OU", "SE", "PL"):
        k = NoiseKernel(shape, 1.35, 10.0, 3.0)
        p = SystemParams(detuning=setup.detuning, gamma=setup.gamma, temperature=0.1)
        rates = rate_table(p, eta_curve(k, setup.detuning, 40.0))
        out["shared"][shape] = {
            "achl_converged": converged_measure(p, k)[0].achl,
            f"achl_t<={setup.short_window:g}": achl_measure(rates, False, t_end=setup.short_window).achl,
        }
    for shape in ("OU", "SE", "PL"):
        res = scan_detuning_product(shape, detuning=setup.detuning)
        out["argmin"][shape] = {"x": res.argmin, "eta_min_per_omega": res.minimum}
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--json", help="also write the results here")
    args = ap.parse_args()
    res = run(Setup())
    for name, row in res["kernels"].items():
        print(name, " ".join(f"{k}={v:.6g}" if isinstance(v, float) else f"{k}={v}" for k, v in row.items()))
    for name, row in res["shared"].items():
        print("shared", name, " ".join(f"{k}={v:.6g}" for k, v in row.items()))
    for name, row in res["argmin"].items():
        print("argmin", name, f"x={row['x']:.4f}", f"min={row['eta_min_per_omega']:.6g}")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(res, fh, indent=1)


if __name__ == "__main__":
    main()
