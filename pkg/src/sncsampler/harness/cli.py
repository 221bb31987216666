"""Command-line interface.

    sncsampler generate     --out ens           (ensemble container)
    sncsampler acquire      --ensemble ens --out meas
    sncsampler reconstruct  --measurements meas --out rec [--ensemble ens]
    sncsampler experiment   min-rate|phase|noise|csr-scaling|array-rank --out-dir DIR
    sncsampler verify operators

Parameters come from ``--config FILE`` (TOML, see :mod:`.config`) and are
overridden by flags.  With ``--strict`` any flagged failure gives exit code 1.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
import time
from pathlib import Path

import numpy as np

from ..acquisition import MeasurementSet, acquire, inject_noise
from ..arraysim import ArrayConfig, eigen_decay, raa_matrix, write_decay_csv
from ..ensemble import synth_matrix_ensemble, synth_signal_ensemble, to_sl_matrix
from ..metrics import relative_error
from ..operators import GridConfig, build_operator_set, lpf_diag
from ..recovery import L1SolverParams, full_pipeline
from . import io
from .config import ExperimentConfig, load_config_file
from .runner import (GridSpec, csr_scaling_experiment, fit_slope, min_rate_search,
                     noise_sweep, phase_transition)
from .verify import DEFAULT_CONFIGS, operator_identity_suite

log = logging.getLogger("sncsampler")

GRID_KEYS = ("M", "W", "R", "S", "Omega", "Delta", "M2")


def _ints(text):
    return [int(v) for v in text.split(",") if v.strip()]


def _floats(text):
    return [float(v) for v in text.split(",") if v.strip()]


def _add_common(p):
    p.add_argument("--config", type=Path, help="TOML config file")
    for key in GRID_KEYS:
        p.add_argument(f"--{key}", type=int, default=None)
    p.add_argument("--mode", choices=("matrix", "signal"), default=None)
    p.add_argument("--snr-db", type=float, default=None)
    p.add_argument("--threshold", type=float, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--max-iter", type=int, default=None)
    p.add_argument("--lambda-min-factor", type=float, default=None)
    p.add_argument("--bisection-steps", type=int, default=None)
    p.add_argument("--joint", action="store_true", help="joint l1,2 variant of the l1 stage")
    p.add_argument("--strict", action="store_true")


def _gather(args, defaults=None):
    """Merge defaults, config file and flags into (config dict, run dict)."""
    cfg = dict(defaults or {})
    run = {}
    if args.config:
        loaded = load_config_file(args.config)
        solver = dict(cfg.get("solver", {}))
        solver.update(loaded["config"].pop("solver", {}))
        cfg.update(loaded["config"])
        if solver:
            cfg["solver"] = solver
        run.update(loaded["run"])
    for key in GRID_KEYS:
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    for key, attr in (("mode", "mode"), ("snr_db", "snr_db"), ("threshold", "threshold")):
        val = getattr(args, attr, None)
        if val is not None:
            cfg[key] = val
    solver = dict(cfg.get("solver", {}))
    for key in ("max_iter", "lambda_min_factor", "bisection_steps"):
        val = getattr(args, key, None)
        if val is not None:
            solver[key] = val
    if getattr(args, "joint", False):
        solver["joint"] = True
    if solver:
        cfg["solver"] = solver
    if getattr(args, "seed", None) is not None:
        run["seed"] = args.seed
    if getattr(args, "workers", None) is not None:
        run["workers"] = args.workers
    run.setdefault("seed", 0)
    return cfg, run


def _experiment_config(cfg: dict) -> ExperimentConfig:
    missing = [k for k in ("M", "W", "R", "S", "Omega", "Delta") if k not in cfg]
    if missing:
        raise SystemExit(f"missing parameters: {', '.join(missing)}")
    return ExperimentConfig.from_dict(cfg)


# -- generate / acquire / reconstruct -----------------------------------------

def cmd_generate(args):
    cfg, run = _gather(args)
    for k in ("M", "W", "R", "S"):
        if k not in cfg:
            raise SystemExit(f"missing parameter {k}")
    mode = cfg.get("mode", "matrix")
    seed = int(run["seed"])
    if mode == "matrix":
        ens = synth_matrix_ensemble(cfg["M"], cfg["W"], cfg["R"], cfg["S"], seed)
    else:
        ens = synth_signal_ensemble(cfg["M"], cfg["W"], cfg["R"], cfg["S"], seed)
    H = to_sl_matrix(ens, lpf_diag(ens.W)).H
    io.save_container(args.out, {"C": ens.C, "H": H, "support": ens.support,
                                 "mixing": ens.mixing, "latent": ens.latent},
                      {"kind": "ensemble", "M": ens.M, "W": ens.W, "R": ens.R, "S": ens.S,
                       "mode": mode, "seed": seed, "dof": ens.dof})
    print(f"ensemble M={ens.M} W={ens.W} R={ens.R} S={ens.S} mode={mode} -> {args.out}")
    return 0


def _grid_from(cfg, M, W, seed):
    R = cfg.get("R", 1)
    e = ExperimentConfig(M=M, W=W, R=R, S=cfg.get("S", R), Omega=cfg["Omega"],
                         Delta=cfg["Delta"], M2=cfg.get("M2"))
    return e.grid(seed=seed)


def cmd_acquire(args):
    arrays, meta = io.load_container(args.ensemble)
    cfg, run = _gather(args)
    cfg.setdefault("R", meta["R"])
    cfg.setdefault("S", meta["S"])
    for k in ("Omega", "Delta"):
        if k not in cfg:
            raise SystemExit(f"missing parameter {k}")
    seed = int(run["seed"])
    grid = _grid_from(cfg, meta["M"], meta["W"], seed)
    ops = build_operator_set(grid)
    meas = acquire(arrays["H"], ops)
    snr = cfg.get("snr_db")
    if snr is not None and not math.isinf(snr):
        meas = inject_noise(meas, snr, np.random.default_rng([seed, 1]))
    grid_meta = {k: getattr(grid, k) for k in ("M", "W", "M1", "M2", "Omega", "Delta", "seed")}
    io.save_container(args.out, {"Y1": meas.Y1, "Y2": meas.Y2},
                      {"kind": "measurements", "grid": grid_meta, "R": cfg["R"], "S": cfg["S"],
                       "delta1": meas.delta1, "delta2": meas.delta2, "snr_db": snr,
                       "ensemble": str(args.ensemble)})
    if args.save_operators:
        io.save_container(args.save_operators,
                          {k: getattr(ops, k) for k in ("F", "T", "D", "A", "Q1", "Q2")},
                          {"kind": "operators", "grid": grid_meta})
    print(f"Y1 {meas.Y1.shape}  Y2 {meas.Y2.shape}  delta1={meas.delta1:.3e} "
          f"delta2={meas.delta2:.3e} -> {args.out}")
    return 0


def cmd_reconstruct(args):
    arrays, meta = io.load_container(args.measurements)
    cfg, _ = _gather(args)
    grid = GridConfig(**meta["grid"])
    ops = build_operator_set(grid)
    meas = MeasurementSet(Y1=arrays["Y1"], Y2=arrays["Y2"], delta1=meta["delta1"],
                          delta2=meta["delta2"])
    R = cfg.get("R", meta["R"])
    solver = L1SolverParams(**cfg.get("solver", {}))
    res = full_pipeline(meas, ops, R, solver)
    out_meta = {"kind": "recovery", "grid": meta["grid"], "R": R,
                "diagnostics": res.diagnostics}
    flagged = res.flagged
    if args.ensemble:
        ens_arrays, _ = io.load_container(args.ensemble)
        err = relative_error(res.H_hat, ens_arrays["H"])
        out_meta["rel_err"] = err
        flagged = flagged or err >= cfg.get("threshold", 1e-3)
        print(f"relative error {err:.3e}")
    io.save_container(args.out, {"Yc": res.Yc, "Yr": res.Yr, "L_R": res.L_R, "S": res.S_mat,
                                 "H_hat": res.H_hat, "X_hat": res.X_hat}, out_meta)
    print(f"flags: {res.diagnostics['flags'] or 'none'} -> {args.out}")
    return 1 if (args.strict and flagged) else 0


# -- experiments --------------------------------------------------------------

def cmd_min_rate(args):
    cfg, run = _gather(args)
    base = _experiment_config(cfg)
    sweep_name, sweep = ("S", _ints(args.S_list)) if args.S_list else \
        ("R", _ints(args.R_list)) if args.R_list else ("S", [base.S])
    values = _ints(args.values)
    rows, results, t0 = [], [], time.time()
    for v in sweep:
        res = min_rate_search(base.with_(**{sweep_name: v}), args.axis, values, args.target,
                              args.trials, int(run["seed"]), run.get("workers"))
        results.append(res)
        row = dict(S=base.S, R=base.R, axis=args.axis, value=res.value if res.found else "",
                   successes=res.table[-1][1] if res.table else "",
                   trials=res.table[-1][2] if res.table else "", found=int(res.found))
        row[sweep_name] = v
        rows.append(row)
        print(f"{sweep_name}={v}: {args.axis}_min = {res.value if res.found else 'not found'}")
    out = Path(args.out_dir)
    io.write_csv(out / "min_rate.csv", io.MIN_RATE_HEADER, rows)
    io.write_manifest(out, "experiment min-rate", base.to_dict(), run["seed"],
                      time.time() - t0, {"axis": args.axis, "values": values,
                                         "sweep": {sweep_name: sweep}, "trials": args.trials,
                                         "target": args.target})
    return 1 if (args.strict and not all(r.found for r in results)) else 0


def _axis(text):
    name, _, vals = text.partition("=")
    if not vals:
        raise argparse.ArgumentTypeError("axis must look like NAME=v1,v2,...")
    return name.strip(), _ints(vals)


def cmd_phase(args):
    cfg, run = _gather(args)
    base = _experiment_config(cfg)
    grid = GridSpec(axis1=args.axis1, axis2=args.axis2, trials=args.trials,
                    threshold=base.threshold, paired_axis=args.paired_axis,
                    root_seed=int(run["seed"]))
    t0 = time.time()
    cells = phase_transition(base, grid, run.get("workers"))
    rows = [dict(axis1=grid.axis1[0], value1=c.value1, axis2=grid.axis2[0], value2=c.value2,
                 eta=repr(c.eta), gamma=repr(c.gamma), csr=c.csr, trials=c.trials,
                 failures=c.failures, p_fail=repr(c.p_fail) if c.trials else "",
                 status=c.status) for c in cells]
    out = Path(args.out_dir)
    io.write_csv(out / "phase.csv", io.PHASE_HEADER, rows)
    io.write_manifest(out, "experiment phase", base.to_dict(), run["seed"], time.time() - t0,
                      {"axis1": list(grid.axis1), "axis2": list(grid.axis2),
                       "trials": grid.trials, "paired_axis": grid.paired_axis or grid.axis2[0]})
    for c in cells:
        print(f"{grid.axis1[0]}={c.value1:<6} {grid.axis2[0]}={c.value2:<6} "
              f"eta={c.eta:7.4f} gamma={c.gamma:7.4f} p_fail={c.p_fail:.3f}")
    return 0


def cmd_noise(args):
    cfg, run = _gather(args)
    base = _experiment_config(cfg)
    snrs = _floats(args.snr)
    t0 = time.time()
    pts = noise_sweep(base, snrs, args.trials, int(run["seed"]), run.get("workers"))
    rows = [dict(snr_db=p.snr_db, median_rel_err=repr(p.median_rel_err),
                 median_rel_err_db=repr(p.median_rel_err_db), trials=p.trials,
                 successes=p.successes) for p in pts]
    out = Path(args.out_dir)
    io.write_csv(out / "noise.csv", io.NOISE_HEADER, rows)
    finite = [p for p in pts if math.isfinite(p.snr_db) and 20 <= p.snr_db <= 60]
    slope = fit_slope([p.snr_db for p in finite], [p.median_rel_err_db for p in finite]) \
        if len(finite) >= 2 else None
    extra = {"snr_db": snrs, "trials": args.trials, "slope_20_60": slope}
    if base.W % 2 == 0:
        extra["grid_note"] = (f"W={base.W} is used in place of the odd length {base.W + 1} "
                              "so that Omega and Delta divide W")
    io.write_manifest(out, "experiment noise", base.to_dict(), run["seed"], time.time() - t0,
                      extra)
    for p in pts:
        print(f"SNR {p.snr_db:6.1f} dB  median rel err {p.median_rel_err_db:8.2f} dB")
    if slope is not None:
        print(f"slope over 20-60 dB: {slope:.3f}")
    return 0


def cmd_csr(args):
    _, run = _gather(args)
    t0 = time.time()
    pts = csr_scaling_experiment(_ints(args.alphas), args.trials, W0=args.W0, M0=args.M0,
                                 R=args.rank, S=args.sparsity, Omega=args.omega,
                                 root_seed=int(run["seed"]), workers=run.get("workers"))
    rows = [dict(alpha=p.alpha, M=p.M, W=p.W, csr_nyquist=p.csr_nyquist,
                 csr_lowrank_only=p.csr_lowrank_only,
                 csr_ours="" if p.csr_ours is None else p.csr_ours,
                 delta_min="" if p.delta_min is None else p.delta_min) for p in pts]
    out = Path(args.out_dir)
    io.write_csv(out / "csr_scaling.csv", io.CSR_HEADER, rows)
    io.write_manifest(out, "experiment csr-scaling", {"W0": args.W0, "M0": args.M0,
                                                      "R": args.rank, "S": args.sparsity,
                                                      "Omega": args.omega},
                      run["seed"], time.time() - t0, {"alphas": _ints(args.alphas)})
    for r in rows:
        print(r)
    return 1 if (args.strict and any(p.csr_ours is None for p in pts)) else 0


def cmd_array(args):
    cfg = ArrayConfig(M=args.elements, omega_c=args.omega_c, W_band=args.band,
                      theta=args.theta, spacing=args.spacing, n_quad=args.n_quad)
    t0 = time.time()
    lam, count = eigen_decay(raa_matrix(cfg), threshold=args.eig_threshold)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_decay_csv(out / "array_rank.csv", lam)
    io.write_manifest(out, "experiment array-rank", cfg.__dict__, None, time.time() - t0,
                      {"count_above_threshold": count, "threshold": args.eig_threshold,
                       "predicted_dimension": cfg.predicted_dimension})
    print(f"eigenvalues >= {args.eig_threshold:g}: {count}; "
          f"M W / omega_c + 1 = {cfg.predicted_dimension:.2f}")
    return 0


def cmd_verify(args):
    failed = 0
    for cfg in DEFAULT_CONFIGS:
        for check in operator_identity_suite(cfg):
            print(check.line())
            failed += not check.passed
    print(f"{failed} check(s) failed")
    return 1 if failed else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sncsampler", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="synthesize a ground-truth ensemble")
    _add_common(p)
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("acquire", help="simulate the sampling architecture")
    _add_common(p)
    p.add_argument("--ensemble", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--save-operators", type=Path)
    p.set_defaults(func=cmd_acquire)

    p = sub.add_parser("reconstruct", help="run the two-step recovery")
    _add_common(p)
    p.add_argument("--measurements", type=Path, required=True)
    p.add_argument("--ensemble", type=Path)
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_reconstruct)

    exp = sub.add_parser("experiment", help="Monte-Carlo experiments").add_subparsers(
        dest="experiment", required=True)

    p = exp.add_parser("min-rate")
    _add_common(p)
    p.add_argument("--axis", choices=("Delta", "Omega"), default="Delta")
    p.add_argument("--values", required=True, help="ascending comma-separated rates")
    p.add_argument("--S-list", dest="S_list")
    p.add_argument("--R-list", dest="R_list")
    p.add_argument("--target", type=float, default=0.99)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--out-dir", type=Path, default=Path("results/min_rate"))
    p.set_defaults(func=cmd_min_rate)

    p = exp.add_parser("phase")
    _add_common(p)
    p.add_argument("--axis1", type=_axis, required=True, help="NAME=v1,v2,...")
    p.add_argument("--axis2", type=_axis, required=True, help="NAME=v1,v2,...")
    p.add_argument("--paired-axis")
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--out-dir", type=Path, default=Path("results/phase"))
    p.set_defaults(func=cmd_phase)

    p = exp.add_parser("noise")
    _add_common(p)
    p.add_argument("--snr", default="0,10,20,30,40,50,60")
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--out-dir", type=Path, default=Path("results/noise"))
    p.set_defaults(func=cmd_noise)

    p = exp.add_parser("csr-scaling")
    _add_common(p)
    p.add_argument("--alphas", default="1,2,4")
    p.add_argument("--W0", type=int, default=120)
    p.add_argument("--M0", type=int, default=16)
    p.add_argument("--rank", type=int, default=2)
    p.add_argument("--sparsity", type=int, default=8)
    p.add_argument("--omega", type=int, default=2)
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--out-dir", type=Path, default=Path("results/csr_scaling"))
    p.set_defaults(func=cmd_csr)

    p = exp.add_parser("array-rank")
    p.add_argument("--elements", type=int, default=101)
    p.add_argument("--omega-c", type=float, default=5e9)
    p.add_argument("--band", type=float, default=100e6)
    p.add_argument("--theta", type=float, default=math.pi / 4)
    p.add_argument("--spacing", type=float, default=1.0)
    p.add_argument("--n-quad", type=int, default=512)
    p.add_argument("--eig-threshold", type=float, default=1e-4)
    p.add_argument("--out-dir", type=Path, default=Path("results/array_rank"))
    p.set_defaults(func=cmd_array)

    ver = sub.add_parser("verify", help="self checks").add_subparsers(dest="what", required=True)
    p = ver.add_parser("operators")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
