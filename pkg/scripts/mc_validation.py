"""Monte Carlo check of the pump and combined equations at several amplitudes.

    python scripts/mc_validation.py --trajectories 10000 --omegas 0.05 0.1 0.2
"""

import argparse
from dataclasses import dataclass


from noisepump.dynamics import steady_state_nz
from noisepump.noise import NoiseKernel
from noisepump.oracle import monte_carlo, reference_trajectory, validate
from noisepump.thermal import SystemParams


@dataclass
class McSetup:
    trajectories: int = 10_000
    seed: int = 2024
    t_max: float = 30.0
    tau_c: float = 4.25
    temperature: float = 0.1
    workers: int = 1


def dressed_nz(p: SystemParams, k: NoiseKernel) -> float:
    """Steady n_z with the OU pump correlation damped by the coherence decay."""
    gam = p.gamma * (2 * p.occupation + 1)
    a = 1 / k.tau_c + gam / 2
    eta = k.omega / k.tau_c * a / (a * a + p.detuning**2)
    return steady_state_nz(p.occupation, eta, p.gamma)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--omegas", type=float, nargs="+", default=[0.1, 0.2])
    ap.add_argument("--trajectories", type=int, default=McSetup.trajectories)
    ap.add_argument("--seed", type=int, default=McSetup.seed)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()
    setup = McSetup(trajectories=args.trajectories, seed=args.seed, workers=args.workers)
    p = SystemParams(temperature=setup.temperature)
    for bath in (False, True):
        prev = None
        for om in args.omegas:
            k = NoiseKernel("OU", om, setup.tau_c)
            mc = monte_carlo(p, k, setup.trajectories, setup.seed, with_bath=bath, t_max=setup.t_max,
                             workers=setup.workers)
            rep = validate(mc, reference_trajectory(p, k, mc, (1, 0, 0)))
            dev = max(rep.max_deviation)
            line = (f"bath={bath!s:5} omega={om:<5g} max_dev={dev:.3e} "
                    f"max_z=({', '.join(f'{z:.2f}' for z in rep.max_z)})")
            if prev is not None:
                line += f" growth={dev / prev:.2f}"
            if bath:
                z = abs(mc.mean[-1, 2] - dressed_nz(p, k)) / mc.stderr[-1, 2]
                line += f" dressed_z={z:.2f}"
            print(line)
            prev = dev


if __name__ == "__main__":
    main()
