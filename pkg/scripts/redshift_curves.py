"""Cavity frequency ratio versus coupling at the sc, D and be levels.

    python scripts/redshift_curves.py --n 20 --lam-max 0.2 --steps 81
"""

import argparse
import csv
import sys

import numpy as np

from harmonic_vsc.cavity import redshift_scan
from harmonic_vsc.co2 import CO2Preset


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=20)
    ap.add_argument("--lam-max", type=float, default=0.2)
    ap.add_argument("--steps", type=int, default=41)
    ap.add_argument("--out", type=str, default="-", help="CSV path or - for stdout")
    args = ap.parse_args()

    cfg = CO2Preset().ensemble(args.n, 0.0)
    rows = redshift_scan(cfg, np.linspace(0.0, args.lam_max, args.steps))
    fh = sys.stdout if args.out == "-" else open(args.out, "w", newline="")
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["lambda", "sc_ratio", "D_ratio", "be_ratio"])
    for row in rows:
        w.writerow([repr(float(v)) for v in row])
    if fh is not sys.stdout:
        fh.close()
    crit = np.sqrt(1.0 / (args.n * cfg.single_polarizability))
    print(f"# D level unstable for lambda >= {crit:.5f}", file=sys.stderr)


if __name__ == "__main__":
    main()
