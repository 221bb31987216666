"""Seeded Monte-Carlo trials and the experiments built from them.

Every trial is a pure function of ``(config, seed)``.  A trial seed is a
:class:`numpy.random.SeedSequence` keyed by ``(root_seed, *key)``; its three
children drive the ensemble, the operators and the noise, in that order.
Because the AVMM matrix depends only on ``M`` and the chipping sequence
only on ``W``, trials that share a key see the same ``H``, ``A`` and ``D``
when a rate is swept, so neighbouring grid cells are paired comparisons.
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Optional, Sequence

import numpy as np

from ..acquisition import acquire, inject_noise
from ..ensemble import synth_matrix_ensemble, synth_signal_ensemble, to_sl_matrix
from ..metrics import metrics_report
from ..operators import build_operator_set
from ..recovery import full_pipeline
from ..rng import seed_to_int, trial_seed
from .config import ExperimentConfig

WORKERS_ENV = "SNCSAMPLER_WORKERS"


def default_workers() -> int:
    env = os.environ.get(WORKERS_ENV)
    if env:
        return max(int(env), 1)
    return os.cpu_count() or 1


@dataclass
class TrialRecord:
    config: dict
    seed: int
    seed_key: tuple
    rel_err: float
    success: bool
    eta: float
    gamma: float
    csr: int
    mu0_sq: float
    wall_time_ms: float
    solver_diag: dict = field(default_factory=dict)
    reason: str = ""

    def row(self) -> dict:
        return {
            "seed": self.seed, "seed_key": "/".join(map(str, self.seed_key)),
            "rel_err": repr(self.rel_err), "success": int(self.success),
            "eta": repr(self.eta), "gamma": repr(self.gamma), "csr": self.csr,
            "mu0_sq": repr(self.mu0_sq), "wall_time_ms": f"{self.wall_time_ms:.3f}",
            "reason": self.reason,
        }


def _seed_sequence(seed, key=()) -> np.random.SeedSequence:
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return trial_seed(int(seed), *key)


def simulate(config: ExperimentConfig, seed, key=()):
    """Build the ensemble, operators and (possibly noisy) measurements."""
    ss = _seed_sequence(seed, key)
    ens_ss, ops_ss, noise_ss = ss.spawn(3)
    grid = config.grid(seed=seed_to_int(ss))
    ops = build_operator_set(grid, ops_ss)
    rng = np.random.default_rng(ens_ss)
    if config.mode == "matrix":
        ens = synth_matrix_ensemble(config.M, config.W, config.R, config.S, rng)
    else:
        ens = synth_signal_ensemble(config.M, config.W, config.R, config.S, rng)
    H = to_sl_matrix(ens, ops.T)
    meas = acquire(H, ops)
    if not math.isinf(config.snr_db):
        meas = inject_noise(meas, config.snr_db, np.random.default_rng(noise_ss))
    return ens, H, ops, meas


def run_trial(config: ExperimentConfig, seed, key=()) -> TrialRecord:
    """Generate, acquire, recover and score one instance.

    Solver failures never raise: they produce ``success=False`` with the
    reason recorded.
    """
    t0 = time.perf_counter()
    ss = _seed_sequence(seed, key)
    ens, H, ops, meas = simulate(config, ss)
    grid = ops.cfg
    eta = float(Fraction(config.R * (config.M + config.S - config.R), grid.csr))
    gamma = float(Fraction(grid.csr, grid.M * grid.W))
    reason = ""
    diag = {}
    try:
        res = full_pipeline(meas, ops, config.R, config.solver)
    except (ArithmeticError, ValueError) as exc:
        rel_err, success, mu0 = math.inf, False, float("nan")
        reason = f"{type(exc).__name__}: {exc}"
    else:
        rep = metrics_report(res.H_hat, H, config.R, config.S, grid, ops.F,
                             threshold=config.threshold)
        rel_err, success, mu0 = rep.rel_err, rep.success, rep.mu0_sq
        flags = res.diagnostics["flags"]
        diag = {
            "l1_iter_mean": float(np.mean(res.diagnostics.get("l1_iterations", [0]))),
            "l1_converged": bool(res.diagnostics.get("l1_converged", True)),
            "flags": list(flags),
        }
        if not success:
            reason = ",".join(flags) or "error_above_threshold"
    return TrialRecord(
        config=config.to_dict(), seed=seed_to_int(ss), seed_key=tuple(ss.spawn_key),
        rel_err=float(rel_err), success=bool(success), eta=eta, gamma=gamma,
        csr=grid.csr, mu0_sq=float(mu0), wall_time_ms=1e3 * (time.perf_counter() - t0),
        solver_diag=diag, reason=reason,
    )


def _run_trial_args(args):
    return run_trial(*args)


def run_many(jobs: Sequence[tuple], workers: Optional[int] = None) -> list[TrialRecord]:
    """Run ``(config, root_seed, key)`` jobs; results come back in job order."""
    workers = default_workers() if workers is None else workers
    if workers <= 1 or len(jobs) <= 1:
        return [run_trial(*job) for job in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_trial_args, jobs, chunksize=max(len(jobs) // (4 * workers), 1)))


# -- minimum rate search ------------------------------------------------------

@dataclass
class MinRateResult:
    axis: str
    value: Optional[int]
    target: float
    table: list            # (value, successes, trials run)

    @property
    def found(self) -> bool:
        return self.value is not None


def min_rate_search(base: ExperimentConfig, axis: str, values: Sequence[int],
                    target: float = 0.99, trials: int = 50, root_seed: int = 0,
                    workers: Optional[int] = None) -> MinRateResult:
    """Smallest value of ``axis`` whose empirical success rate reaches ``target``.

    Values are scanned in ascending order.  Trial ``k`` uses key ``(k,)`` for
    every value, and a value is abandoned as soon as the target is out of
    reach.
    """
    if axis not in ("Delta", "Omega"):
        raise ValueError(f"axis must be 'Delta' or 'Omega', got {axis!r}")
    values = list(values)
    if values != sorted(values):
        raise ValueError("axis values must be ascending")
    configs = [base.with_(**{axis: v}) for v in values]
    if target <= 0:
        return MinRateResult(axis, values[0], target, [])
    needed = math.ceil(target * trials - 1e-12)
    allowed_failures = trials - needed
    workers = default_workers() if workers is None else workers
    table = []
    for v, cfg in zip(values, configs):
        if workers > 1:
            recs = run_many([(cfg, root_seed, (k,)) for k in range(trials)], workers)
            ok = sum(r.success for r in recs)
            ran = trials
        else:
            ok = fails = ran = 0
            for k in range(trials):
                rec = run_trial(cfg, root_seed, (k,))
                ran += 1
                ok += rec.success
                fails += not rec.success
                if fails > allowed_failures:
                    break
        table.append((v, ok, ran))
        if ok >= needed:
            return MinRateResult(axis, v, target, table)
    return MinRateResult(axis, None, target, table)


# -- phase transitions --------------------------------------------------------

@dataclass(frozen=True)
class GridSpec:
    """Two-parameter sweep.

    ``paired_axis`` names the axis along which cells reuse trial seeds; the
    seed key is ``(index on the other axis, trial)``.
    """

    axis1: tuple          # (name, values)
    axis2: tuple
    trials: int = 50
    threshold: float = 1e-3
    target: float = 0.99
    paired_axis: Optional[str] = None
    root_seed: int = 0

    def __post_init__(self):
        for name, vals in (self.axis1, self.axis2):
            if not vals:
                raise ValueError(f"axis {name!r} has no values")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")


@dataclass
class PhaseCell:
    i: int
    j: int
    value1: int
    value2: int
    eta: float
    gamma: float
    csr: int
    trials: int
    failures: int
    status: str = "ok"

    @property
    def p_fail(self) -> float:
        return self.failures / self.trials if self.trials else float("nan")


def phase_transition(base: ExperimentConfig, grid: GridSpec,
                     workers: Optional[int] = None) -> list[PhaseCell]:
    """Empirical failure probability on every cell of a two-axis grid."""
    (n1, v1), (n2, v2) = grid.axis1, grid.axis2
    paired = grid.paired_axis or n2
    cells, jobs, owners = [], [], []
    for (i, a), (j, b) in product(enumerate(v1), enumerate(v2)):
        try:
            cfg = base.with_(**{n1: a, n2: b}, threshold=grid.threshold)
            g = cfg.grid()
        except ValueError as exc:
            cells.append(PhaseCell(i, j, a, b, float("nan"), float("nan"), 0, 0, 0,
                                   status=f"invalid: {exc}"))
            continue
        eta = float(Fraction(cfg.R * (cfg.M + cfg.S - cfg.R), g.csr))
        gamma = float(Fraction(g.csr, g.M * g.W))
        cell = PhaseCell(i, j, a, b, eta, gamma, g.csr, grid.trials, 0)
        cells.append(cell)
        row = i if paired == n2 else j
        if paired not in (n1, n2):
            row = i * len(v2) + j
        for k in range(grid.trials):
            jobs.append((cfg, grid.root_seed, (row, k)))
            owners.append(cell)
    for cell, rec in zip(owners, run_many(jobs, workers)):
        cell.failures += not rec.success
    return cells


# -- noise sweep ----------------------------------------------------------------

@dataclass
class NoisePoint:
    snr_db: float
    median_rel_err: float
    trials: int
    successes: int

    @property
    def median_rel_err_db(self) -> float:
        return 20.0 * math.log10(self.median_rel_err) if self.median_rel_err > 0 else -math.inf


def noise_sweep(config: ExperimentConfig, snr_list_db: Sequence[float], trials: int = 20,
                root_seed: int = 0, workers: Optional[int] = None) -> list[NoisePoint]:
    """Median relative error per SNR; trial ``k`` reuses key ``(k,)`` at every SNR."""
    jobs = [(config.with_(snr_db=float(s)), root_seed, (k,))
            for s in snr_list_db for k in range(trials)]
    recs = run_many(jobs, workers)
    out = []
    for n, s in enumerate(snr_list_db):
        chunk = recs[n * trials:(n + 1) * trials]
        errs = [r.rel_err for r in chunk]
        out.append(NoisePoint(float(s), float(np.median(errs)), trials,
                              sum(r.success for r in chunk)))
    return out


def fit_slope(x, y) -> float:
    """Least-squares slope of ``y`` against ``x``."""
    return float(np.polyfit(np.asarray(x, float), np.asarray(y, float), 1)[0])


# -- CSR scaling ------------------------------------------------------------------

@dataclass
class CsrPoint:
    alpha: int
    M: int
    W: int
    csr_nyquist: int
    csr_lowrank_only: int
    csr_ours: Optional[int]
    delta_min: Optional[int]


def csr_scaling_experiment(alpha_list: Sequence[int], trials: int = 20, *, W0: int = 120,
                           M0: int = 16, R: int = 2, S: int = 8, Omega: int = 2,
                           target: float = 0.99, root_seed: int = 0,
                           workers: Optional[int] = None) -> list[CsrPoint]:
    """Minimal cumulative rate as ``W = W0 alpha`` and ``M = M0 alpha`` grow.

    For each ``alpha`` the slow-branch rate is searched over multiples of
    ``Omega`` dividing ``W``; ``csr_lowrank_only`` is the ``R W`` reference
    curve of a scheme that exploits correlation only.  ``W0 = 120`` has many
    divisors, so the rate grid stays fine instead of doubling at each step.
    """
    if list(alpha_list) != sorted(alpha_list):
        raise ValueError("alpha_list must be ascending")
    out = []
    for alpha in alpha_list:
        W, M = W0 * alpha, M0 * alpha
        base = ExperimentConfig(M=M, W=W, R=R, S=S, Omega=Omega, Delta=W)
        axis = [d for d in range(Omega, W + 1, Omega) if W % d == 0]
        res = min_rate_search(base, "Delta", axis, target, trials, root_seed, workers)
        csr = base.with_(Delta=res.value).csr if res.found else None
        out.append(CsrPoint(alpha, M, W, M * W, R * W, csr, res.value))
    return out
