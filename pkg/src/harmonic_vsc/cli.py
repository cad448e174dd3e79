"""Command-line entry point: ``harmonic-vsc <subcommand> [options]``."""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

import numpy as np

from .cavity import redshift_scan
from .config import ConfigError, RunConfig, config_from_dict, lambda_grid, load_config, save_config
from .dynamics import read_trajectory_csv, run_trajectories, write_trajectory_csv
from .experiments import approximation_compare, neutral_atom_decoupling
from .polarizability import polarizability_table
from .spectra import (
    autocorrelation_spectrum,
    find_peaks,
    trajectory_spectra,
    write_peaks_jsonl,
    write_spectrum_csv,
)
from .verification import property_sweep

SUBCOMMANDS = ("simulate", "spectrum", "polarizability-table", "redshift-scan", "approximation-compare",
               "oracle-verify")


def _csv_value(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(path: Path, columns: list, rows, header: dict) -> None:
    lines = [f"# {key}: {value}" for key, value in header.items()]
    lines.append(",".join(columns))
    lines += [",".join(_csv_value(v) for v in row) for row in rows]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="harmonic-vsc", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", type=Path, help="YAML run configuration (defaults: CO2 preset)")
        p.add_argument("--seed", type=int, help="override run.seed")
        p.add_argument("--out", type=Path, help="output directory (overrides run.output_dir)")
        p.add_argument("--level", choices=["sc", "be", "D"], help="override system.level")
        return p

    def grids(p, n_list=True):
        p.add_argument("--lambda-min", type=float)
        p.add_argument("--lambda-max", type=float)
        p.add_argument("--lambda-steps", type=int)
        if n_list:
            p.add_argument("--n-list", type=str, help="comma-separated molecule counts")
        return p

    p = common(sub.add_parser("simulate", help="run Langevin trajectories and write CSV streams"))
    p.add_argument("--n-steps", type=int)
    p = common(sub.add_parser("spectrum", help="spectra and peak tables from trajectories"))
    p.add_argument("--n-steps", type=int)
    p.add_argument("--trajectory", type=Path, action="append",
                   help="trajectory CSV from 'simulate' (repeatable); without it a run is made")
    grids(common(sub.add_parser("polarizability-table", help="static polarizabilities on an (N, lambda) grid")))
    grids(common(sub.add_parser("redshift-scan", help="renormalized cavity frequency vs lambda")), n_list=False)
    p = common(sub.add_parser("approximation-compare", help="compare sc, be and D on the same seeds"))
    p.add_argument("--n-steps", type=int)
    p = common(sub.add_parser("oracle-verify", help="randomized closed-form vs oracle sweep"))
    p.add_argument("--draws", type=int, default=200)
    p.add_argument("--tolerance", type=float, default=1e-8)
    return parser


def resolve_config(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    if getattr(args, "seed", None) is not None:
        cfg.run.seed = args.seed
    if getattr(args, "out", None) is not None:
        cfg.run.output_dir = str(args.out)
    if getattr(args, "level", None) is not None:
        cfg.system.level = args.level
    if getattr(args, "n_steps", None) is not None:
        cfg.run.n_steps = args.n_steps
    for name in ("lambda_min", "lambda_max", "lambda_steps"):
        if getattr(args, name, None) is not None:
            setattr(cfg.scan, name, getattr(args, name))
    if getattr(args, "n_list", None):
        try:
            cfg.scan.n_values = [int(v) for v in args.n_list.split(",") if v.strip()]
        except ValueError:
            raise ConfigError(f"expected comma-separated integers, got {args.n_list!r}", "--n-list") from None
    # re-validate after overrides
    return config_from_dict(cfg.to_dict(), "command line")


def _outdir(cfg: RunConfig) -> Path:
    out = Path(cfg.run.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_simulate(cfg: RunConfig) -> int:
    out = _outdir(cfg)
    ens = cfg.ensemble()
    trajs = run_trajectories(ens, cfg.thermostat_params(), cfg.run.n_steps, cfg.run.sample_stride,
                             cfg.run.n_seeds, blowup_bound=cfg.run.blowup_bound)
    save_config(cfg, out / "config.yaml")
    for k, traj in enumerate(trajs):
        path = out / f"trajectory_seed{k}.csv"
        write_trajectory_csv(path, traj, {**cfg.header(), "seed_index": k, "level": ens.level.value})
        print(f"wrote {path} ({len(traj)} samples)")
    return 0


def _spectra_from_files(cfg: RunConfig, paths) -> dict:
    loaded = [read_trajectory_csv(p) for p in paths]
    dts = {float(h["dt"]) * int(h["stride"]) for h, _ in loaded}
    if len(dts) != 1:
        raise ValueError("trajectory files use different sampling intervals")
    dt = dts.pop()
    sp = cfg.spectrum
    mapping = {"collective_dipole": "collective_dipole", "local_dipole": "local_dipole_1",
               "bond": "bond_length_1", "photon": "q_beta"}
    return {name: autocorrelation_spectrum([cols[col] for _, cols in loaded], dt, sp.window, sp.max_lag,
                                           sp.zero_pad, name)
            for name, col in mapping.items()}


def cmd_spectrum(cfg: RunConfig, trajectory_files) -> int:
    out = _outdir(cfg)
    sp = cfg.spectrum
    if trajectory_files:
        spectra = _spectra_from_files(cfg, trajectory_files)
    else:
        trajs = run_trajectories(cfg.ensemble(), cfg.thermostat_params(), cfg.run.n_steps,
                                 cfg.run.sample_stride, cfg.run.n_seeds, blowup_bound=cfg.run.blowup_bound)
        spectra = trajectory_spectra(trajs, window=sp.window, max_lag=sp.max_lag, zero_pad=sp.zero_pad)
    peaks = {name: find_peaks(s, sp.rel_threshold) for name, s in spectra.items()}
    header = cfg.header()
    write_spectrum_csv(out / "spectrum.csv", list(spectra.values()), header)
    write_peaks_jsonl(out / "peaks.jsonl", peaks, header)
    for name, plist in peaks.items():
        listed = ", ".join(f"{p.frequency_cm1:.2f}" for p in plist) or "none"
        print(f"{name:18s} peaks [cm-1]: {listed}")
    print(f"wrote {out / 'spectrum.csv'} and {out / 'peaks.jsonl'}")
    return 0


def cmd_polarizability(cfg: RunConfig) -> int:
    out = _outdir(cfg)
    rows = polarizability_table(cfg.ensemble(), cfg.scan.n_values, lambda_grid(cfg))
    path = out / "polarizability.csv"
    write_csv(path, ["kind", "method", "N", "lambda", "value", "tc_limit"], rows, cfg.header())
    print(f"wrote {path} ({len(rows)} rows)")
    return 0


def cmd_redshift(cfg: RunConfig) -> int:
    out = _outdir(cfg)
    rows = redshift_scan(cfg.ensemble(), lambda_grid(cfg))
    path = out / "redshift.csv"
    write_csv(path, ["lambda", "sc_ratio", "D_ratio", "be_ratio"], rows, cfg.header())
    print(f"wrote {path} ({len(rows)} rows)")
    return 0


def cmd_compare(cfg: RunConfig) -> int:
    out = _outdir(cfg)
    sp = cfg.spectrum
    rows = approximation_compare(cfg.ensemble(), cfg.thermostat_params(), cfg.run.n_steps,
                                 cfg.run.sample_stride, cfg.run.n_seeds, sp.window, sp.max_lag,
                                 sp.rel_threshold)
    columns = [f.name for f in dataclasses.fields(rows[0])]
    write_csv(out / "approximation_compare.csv", columns, [dataclasses.astuple(r) for r in rows], cfg.header())
    decoupling = neutral_atom_decoupling(seed=cfg.run.seed)
    dcols = [f.name for f in dataclasses.fields(decoupling[0])]
    write_csv(out / "neutral_atom_decoupling.csv", dcols, [dataclasses.astuple(r) for r in decoupling],
              cfg.header())
    print(f"{'level':6s} {'analytic':>12s} {'md_peak':>12s} {'shift_cm1':>10s} {'max_cav_force':>14s}")
    for r in rows:
        print(f"{r.level:6s} {r.analytic_photon:12.6g} {r.md_photon_peak:12.6g} {r.peak_shift_cm1:10.3f} "
              f"{r.max_cavity_force:14.3e} {r.status}")
    print("neutral atoms (N_n = 1, Z_n = Z_e): cavity force on nuclei")
    for r in decoupling:
        verdict = "decoupled" if r.decoupled else "NOT decoupled"
        print(f"{r.level:6s} max |F_cav| = {r.max_cavity_force:.3e}  {verdict}")
    return 0


def cmd_oracle(draws: int, tolerance: float, seed: int) -> int:
    result = property_sweep(draws, seed, tolerance)
    print(f"{'quantity':32s} {'checks':>7s} {'max rel err':>12s}  result")
    for name, count, err, ok in result.table():
        print(f"{name:32s} {count:7d} {err:12.3e}  {'PASS' if ok else 'FAIL'}")
    print(f"{draws} draws in {result.seconds:.2f} s: {'PASS' if result.passed else 'FAIL'}")
    return 0 if result.passed else 1


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        if args.command == "simulate":
            return cmd_simulate(cfg)
        if args.command == "spectrum":
            return cmd_spectrum(cfg, args.trajectory)
        if args.command == "polarizability-table":
            return cmd_polarizability(cfg)
        if args.command == "redshift-scan":
            return cmd_redshift(cfg)
        if args.command == "approximation-compare":
            return cmd_compare(cfg)
        return cmd_oracle(args.draws, args.tolerance, cfg.run.seed)
    except (ValueError, RuntimeError, OSError) as exc:
        print(f"harmonic-vsc {args.command}: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
