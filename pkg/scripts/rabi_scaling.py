"""Rabi splitting versus molecule count at fixed single-molecule coupling.

The analytic splittings are always computed; ``--md`` adds splittings
measured from collective-dipole spectra (one trajectory per N).

    python scripts/rabi_scaling.py --lam 0.002 --n 5 10 20 40 --md --steps 200000
"""

import argparse

from harmonic_vsc.co2 import CO2Preset
from harmonic_vsc.dynamics import ThermostatParams
from harmonic_vsc.experiments import analytic_splitting_scan, md_splitting_scan, splitting_exponent


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--lam", type=float, default=0.002)
    ap.add_argument("--n", type=int, nargs="+", default=[5, 10, 20, 40])
    ap.add_argument("--md", action="store_true")
    ap.add_argument("--steps", type=int, default=200_000)
    ap.add_argument("--seed", type=int, default=2024)
    args = ap.parse_args()

    preset = CO2Preset()
    rows = analytic_splitting_scan(preset, args.n, args.lam)
    print("N,analytic_cm1")
    for n, s in rows:
        print(f"{n},{s:.4f}")
    print(f"# analytic exponent {splitting_exponent(rows):.4f}")
    if args.md:
        thermostat = ThermostatParams(temperature=1e-3, friction=0.5e-5, dt=20.0, rng_seed=args.seed)
        md = md_splitting_scan(preset, args.n, args.lam, thermostat, args.steps)
        print("N,md_cm1,analytic_cm1")
        for n, s, a in md:
            print(f"{n},{s:.4f},{a:.4f}")
        print(f"# MD exponent {splitting_exponent([(n, s) for n, s, _ in md]):.4f}")


if __name__ == "__main__":
    main()
