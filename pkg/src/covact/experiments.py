"""Batch experiment drivers with deterministic seeding and CSV outputs.

Every random quantity is drawn from a stream derived as
``default_rng(SeedSequence(seed, spawn_key=key))`` where ``key`` encodes
the experiment coordinate (sweep cell, trial index, purpose tag).  Trials
are therefore independent of execution order and thread count, and any
run with the same config and seed is byte-identical.

CSV floats are written with 17 significant digits so values round-trip
exactly through the text form.
"""

import csv
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .consistency import common_nullspace, cone_feasibility
from .errors import NumericalError, ParameterError
from .error_analysis import fisher_info, predict_roc, roc_trial
from .geometry import (
    PathLossModel,
    build_hex_layout,
    compute_gains,
    lemma3_ring_contributions,
    lemma3_sum,
    place_devices,
)
from .signatures import build_lift, sample_sphere_sequences
from .simulation import model_covariance, sample_activity, sample_covariance, simulate_received
from .solver import SolverOptions, solve, threshold

_FLOAT_FMT = "%.17g"

PHASE_DIAGRAM_COLUMNS = (
    "B", "N", "L", "K", "trials", "holds_count", "fails_count",
    "ambiguous_count", "l2_over_n", "k_over_n",
)
TRANSITION_COLUMNS = (
    "B", "N", "L", "k_star", "k_all_hold", "k_none_hold", "censored",
)
ROC_COLUMNS = ("source", "M", "threshold", "pm", "pf", "trials", "nonconverged")
LEMMA3_COLUMNS = ("B", "cell", "ring", "contribution", "cumulative_sum")
DETECT_COLUMNS = ("cell", "device", "flat_index", "truth", "soft_score", "detected")
DETECT_TRACE_COLUMNS = ("sweep", "objective", "max_step")

DEFAULT_THRESHOLDS = tuple(
    np.round(np.concatenate([
        np.geomspace(0.002, 0.02, 8, endpoint=False),
        np.arange(0.02, 1.0, 0.02),
    ]), 10)
)


def substream(seed, *key):
    """Deterministic child generator for one experiment coordinate."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=key))


def _format_cell(value):
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return _FLOAT_FMT % value
    return str(value)


def write_csv(path, columns, rows):
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_format_cell(v) for v in row])
    return path


def _path_loss_model(config):
    return PathLossModel(
        pl_db_at_1km=config.pl_db_at_1km,
        slope_db_per_decade=config.slope_db_per_decade,
        tx_power_dbm=config.tx_power_dbm,
        noise_psd_dbm_hz=config.noise_psd_dbm_hz,
        bandwidth_hz=config.bandwidth_hz,
        d_min_m=config.min_distance_m,
    )


def _solver_options(config):
    return SolverOptions(
        max_sweeps=config.max_sweeps,
        tol=config.tol,
        refresh_period=config.refresh_period,
        permutation=config.permutation,
    )


def _instance_gains(config, num_cells, rng):
    layout = build_hex_layout(num_cells, config.radius_m)
    placement = place_devices(
        layout, config.devices_per_cell, rng, d_min_m=config.min_distance_m
    )
    return layout, compute_gains(layout, placement, _path_loss_model(config))


def _thresholds(config):
    values = config.thresholds if config.thresholds else DEFAULT_THRESHOLDS
    return np.asarray(sorted(values), dtype=float)


def _k_values(config):
    return list(range(config.active_min, config.active_max + 1,
                      config.active_step))


def _pool_map(fn, jobs, threads):
    if threads <= 1 or len(jobs) <= 1:
        return [fn(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, jobs))


@dataclass(frozen=True)
class _PhaseTrialJob:
    config: "ExperimentConfig"
    cell_index: int
    length_index: int
    trial: int


def _phase_trial(job):
    """Counts per K for one (B, L, trial) cell of the phase diagram.

    The null space does not depend on the activity pattern, so one SVD per
    trial serves every K in the scan.
    """
    config = job.config
    B = config.num_cells[job.cell_index]
    L = config.sequence_lengths[job.length_index]
    N = config.devices_per_cell
    key = (job.cell_index, job.length_index)
    geom_rng = (
        substream(config.seed, *key, job.trial, 0)
        if config.resample_geometry
        else substream(config.seed, *key, 0)
    )
    _, gains = _instance_gains(config, B, geom_rng)
    trial_rng = substream(config.seed, *key, job.trial, 1)
    sigs = sample_sphere_sequences(L, B * N, trial_rng)
    basis = common_nullspace(build_lift(sigs), gains)
    outcome = {}
    for K in _k_values(config):
        truth = sample_activity(B, N, K, trial_rng)
        verdict = cone_feasibility(basis, ~truth.active_mask)
        if verdict.holds is True:
            outcome[K] = "holds"
        elif verdict.holds is False:
            outcome[K] = "fails"
        else:
            outcome[K] = "ambiguous"
    return outcome


def estimate_transition(k_values, holds_fraction):
    """First 50% crossing of the holds probability, scanned upward.

    Returns (k_star, k_all_hold, k_none_hold, censored).  The identifiable
    region reappears near K = N (the sign-balance identity), so the
    transition is the first crossing, not the last K above 50%.  A scan
    that never crosses is right-censored at its largest K.
    """
    k_star = None
    for k, frac in zip(k_values, holds_fraction):
        if frac < 0.5:
            break
        k_star = k
    censored = k_star == k_values[-1]
    if k_star is None:
        k_star = 0
    k_all = None
    for k, frac in zip(k_values, holds_fraction):
        if frac < 1.0:
            break
        k_all = k
    k_none = next(
        (k for k, frac in zip(k_values, holds_fraction) if frac == 0.0),
        None,
    )
    return k_star, k_all, k_none, censored


def run_phase_diagram(config, progress=None):
    """Sweep (B, L, K), tally identifiability verdicts, emit CSVs.

    Writes phase_diagram.csv (one row per sweep cell) and transitions.csv
    (the 50% crossing per (B, L) with its all-hold/none-hold error-bar
    range).  Returns the row lists.
    """
    config.validate()
    k_values = _k_values(config)
    rows = []
    transition_rows = []
    ambiguous_total = 0
    verdict_total = 0
    N = config.devices_per_cell
    for ci, B in enumerate(config.num_cells):
        for li, L in enumerate(config.sequence_lengths):
            jobs = [
                _PhaseTrialJob(config, ci, li, t) for t in range(config.trials)
            ]
            outcomes = _pool_map(_phase_trial, jobs, config.threads)
            fractions = []
            for K in k_values:
                holds = sum(o[K] == "holds" for o in outcomes)
                fails = sum(o[K] == "fails" for o in outcomes)
                ambiguous = sum(o[K] == "ambiguous" for o in outcomes)
                ambiguous_total += ambiguous
                verdict_total += config.trials
                rows.append((
                    B, N, L, K, config.trials, holds, fails, ambiguous,
                    L * L / N, K / N,
                ))
                fractions.append(holds / config.trials)
            k_star, k_all, k_none, censored = estimate_transition(
                k_values, fractions
            )
            transition_rows.append((
                B, N, L, k_star,
                -1 if k_all is None else k_all,
                -1 if k_none is None else k_none,
                censored,
            ))
            if progress:
                progress(f"phase-diagram B={B} L={L} done")
    write_csv(
        os.path.join(config.out_dir, "phase_diagram.csv"),
        PHASE_DIAGRAM_COLUMNS, rows,
    )
    write_csv(
        os.path.join(config.out_dir, "transitions.csv"),
        TRANSITION_COLUMNS, transition_rows,
    )
    if verdict_total and ambiguous_total / verdict_total > config.ambiguous_limit:
        raise NumericalError(
            f"ambiguous verdict fraction {ambiguous_total / verdict_total:.3f} "
            f"exceeds limit {config.ambiguous_limit}"
        )
    return rows, transition_rows


@dataclass(frozen=True)
class _RocTrialJob:
    config: "ExperimentConfig"
    antenna_index: int
    trial: int


_ROC_INSTANCE_CACHE = {}


def _roc_instance(config):
    """Shared instance (geometry, sequences, truth) for one roc config."""
    cache_key = (config.seed, config.num_cells[0], config.devices_per_cell,
                 config.sequence_length, config.active_count,
                 config.radius_m, config.min_distance_m,
                 config.pl_db_at_1km, config.slope_db_per_decade,
                 config.tx_power_dbm, config.noise_psd_dbm_hz,
                 config.bandwidth_hz)
    if cache_key not in _ROC_INSTANCE_CACHE:
        rng = substream(config.seed, 0)
        B = config.num_cells[0]
        N = config.devices_per_cell
        _, gains = _instance_gains(config, B, rng)
        sigs = sample_sphere_sequences(config.sequence_length, B * N, rng)
        truth = sample_activity(B, N, config.active_count, rng)
        _ROC_INSTANCE_CACHE[cache_key] = (sigs, gains, truth)
    return _ROC_INSTANCE_CACHE[cache_key]


def _roc_one_trial(job):
    config = job.config
    sigs, gains, truth = _roc_instance(config)
    M = config.antennas[job.antenna_index]
    rng = substream(config.seed, 1, job.antenna_index, job.trial)
    estimate, converged = roc_trial(
        truth, sigs, gains, gains.noise_var, M, _solver_options(config), rng
    )
    return estimate, converged


def run_roc(config, progress=None):
    """Empirical and predicted detection-error tradeoffs on one instance."""
    config.validate()
    thresholds = _thresholds(config)
    sigs, gains, truth = _roc_instance(config)
    active = truth.active_mask
    n_active = max(int(active.sum()), 1)
    n_inactive = max(int((~active).sum()), 1)
    rows = []
    for mi, M in enumerate(config.antennas):
        jobs = [_RocTrialJob(config, mi, t) for t in range(config.trials)]
        results = _pool_map(_roc_one_trial, jobs, config.threads)
        missed = np.zeros(thresholds.size, dtype=np.int64)
        false = np.zeros(thresholds.size, dtype=np.int64)
        nonconverged = 0
        for estimate, converged in results:
            act = np.sort(estimate[active])
            ina = np.sort(estimate[~active])
            missed += np.searchsorted(act, thresholds, side="left")
            false += ina.size - np.searchsorted(ina, thresholds, side="left")
            nonconverged += not converged
        pm = missed / (config.trials * n_active)
        pf = false / (config.trials * n_inactive)
        for k, theta in enumerate(thresholds):
            rows.append(("empirical", M, theta, pm[k], pf[k], config.trials,
                         nonconverged))
        if progress:
            progress(f"roc empirical M={M} done")
        model = fisher_info(truth, sigs, gains, gains.noise_var, M)
        theory = predict_roc(
            truth, model, thresholds, config.theory_samples,
            substream(config.seed, 2, mi),
        )
        for k, theta in enumerate(thresholds):
            rows.append(("theory", M, theta, theory.pm[k], theory.pf[k],
                         theory.count, theory.nonconverged))
        if progress:
            progress(f"roc theory M={M} done")
    write_csv(os.path.join(config.out_dir, "roc.csv"), ROC_COLUMNS, rows)
    return rows


def run_lemma3(config, progress=None):
    """Interference saturation sweep over growing hexagonal layouts.

    Every layout in the sweep reuses the same placement stream, so a larger
    layout keeps the smaller one's device positions and only adds cells;
    the interference sums are then nested and their increments comparable.
    """
    config.validate()
    rows = []
    for B in config.num_cells:
        rng = substream(config.seed, 0)
        layout, gains = _instance_gains(config, B, rng)
        rings, contributions = lemma3_ring_contributions(gains, layout, 0)
        cumulative = 0.0
        for ring, contribution in zip(rings, contributions):
            cumulative += contribution
            rows.append((B, 0, int(ring), contribution, cumulative))
        if progress:
            progress(f"lemma3 B={B} total={cumulative:.3e}")
    write_csv(os.path.join(config.out_dir, "lemma3.csv"), LEMMA3_COLUMNS, rows)
    return rows


def run_detect(config, progress=None):
    """One end-to-end detection run; returns (rows, summary text)."""
    config.validate()
    B = config.num_cells[0]
    N = config.devices_per_cell
    rng = substream(config.seed, 0)
    _, gains = _instance_gains(config, B, rng)
    sigs = sample_sphere_sequences(config.sequence_length, B * N, rng)
    truth = sample_activity(B, N, config.active_count, rng)
    M = config.antennas[0]
    if config.detect_mode == "asymptotic":
        covs = model_covariance(sigs, gains, truth, gains.noise_var)
    else:
        signals = simulate_received(
            sigs, gains, truth, M, substream(config.seed, 1)
        )
        covs = sample_covariance(signals)
    result = solve(
        covs, sigs, gains, gains.noise_var, _solver_options(config),
        substream(config.seed, 2),
    )
    detected = threshold(result.pattern, config.detect_threshold)
    active = truth.active_mask
    det = detected.active_mask
    pm = float(np.mean(~det[active])) if active.any() else 0.0
    pf = float(np.mean(det[~active])) if (~active).any() else 0.0
    rows = []
    for i in range(B * N):
        rows.append((
            i // N, i % N, i, int(truth.values[i]),
            result.pattern.values[i], bool(det[i]),
        ))
    write_csv(
        os.path.join(config.out_dir, "detect_summary.csv"),
        DETECT_COLUMNS, rows,
    )
    trace_rows = [
        (k, obj, result.max_step_trace[k - 1] if k else np.nan)
        for k, obj in enumerate(result.objective_trace)
    ]
    write_csv(
        os.path.join(config.out_dir, "detect_trace.csv"),
        DETECT_TRACE_COLUMNS, trace_rows,
    )
    lines = [
        f"detect: B={B} N={N} L={config.sequence_length} "
        f"K={config.active_count} M={M} mode={config.detect_mode}",
        f"solver: sweeps={result.sweeps} converged={result.converged} "
        f"objective={result.objective_trace[-1]:.6f}",
    ]
    for b in range(B):
        actual = [int(i) for i in np.flatnonzero(active[b * N:(b + 1) * N])]
        found = [int(i) for i in np.flatnonzero(det[b * N:(b + 1) * N])]
        lines.append(f"cell {b}: active {actual} detected {found}")
    lines.append(
        f"PM={pm:.4f} PF={pf:.4f} at threshold {config.detect_threshold}"
    )
    summary = "\n".join(lines)
    return rows, summary
