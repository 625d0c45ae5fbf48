"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Criteria 1 and 2 share one phase-diagram sweep; criterion 7 owns the heavy
detection-error comparison.  Every tolerance is stated inline.
"""

import os

import numpy as np
import pytest

from covact import (
    ActivityPattern,
    PathLossModel,
    SolverOptions,
    build_hex_layout,
    build_lift,
    common_nullspace,
    compute_gains,
    cone_feasibility,
    coordinate_update,
    fisher_info,
    gradient,
    init_state,
    model_covariance,
    objective,
    pinv_sample,
    place_devices,
    sample_activity,
    sample_covariance,
    sample_sphere_sequences,
    sign_constrained_qp,
    simulate_received,
    solve,
)
from covact.config import ExperimentConfig, desk_config
from covact.consistency import balanced_stack, certificate_checks
from covact.experiments import (
    run_detect,
    run_lemma3,
    run_phase_diagram,
    run_roc,
    substream,
)
from covact.geometry import GainTensor

from oracles import cone_min_residual, qp_enumeration


def report(num, name, ok, detail):
    print(f"\ncriterion {num} [{'PASS' if ok else 'FAIL'}] {name}: {detail}")


@pytest.fixture(scope="module")
def phase_transitions(tmp_path_factory):
    out = tmp_path_factory.mktemp("phase")
    config = desk_config("phase-diagram")
    config.out_dir = str(out)
    config.threads = 2
    rows, transitions = run_phase_diagram(config)
    return config, rows, transitions


@pytest.fixture(scope="module")
def roc_rows(tmp_path_factory):
    out = tmp_path_factory.mktemp("roc")
    config = desk_config("roc")
    config.out_dir = str(out)
    config.threads = 2
    rows = run_roc(config)
    return config, rows


def test_criterion_1_phase_diagram_overlap(phase_transitions):
    config, _, transitions = phase_transitions
    k_star = {(row[0], row[2]): row[3] for row in transitions}
    spreads = {}
    for L in config.sequence_lengths:
        values = [k_star[(B, L)] for B in config.num_cells]
        spreads[L] = max(values) - min(values)
    ok = all(s <= 2 for s in spreads.values())
    report(1, "phase-diagram overlap", ok,
           f"K* spread across B per L: {spreads} (allowed 2)")
    assert ok


def test_criterion_2_quadratic_scaling_shape(phase_transitions):
    config, _, transitions = phase_transitions
    k_star = {(row[0], row[2]): row[3] for row in transitions}
    slopes = {}
    for B in config.num_cells:
        logL = np.log([float(L) for L in config.sequence_lengths])
        logK = np.log([max(float(k_star[(B, L)]), 1e-12)
                       for L in config.sequence_lengths])
        slopes[B] = float(np.polyfit(logL, logK, 1)[0])
    ok = all(1.6 <= s <= 2.4 for s in slopes.values())
    report(2, "quadratic scaling shape", ok,
           f"log K* vs log L slopes: "
           f"{ {b: round(s, 3) for b, s in slopes.items()} } "
           f"(required within [1.6, 2.4])")
    assert ok


def test_criterion_3_asymptotic_exactness():
    B, N, K, L = 3, 50, 5, 12
    model = PathLossModel()
    holds_count = 0
    exact = 0
    for seed in range(100):
        rng = substream(90_000, seed)
        layout = build_hex_layout(B, 500.0)
        placement = place_devices(layout, N, rng)
        gains = compute_gains(layout, placement, model)
        sigs = sample_sphere_sequences(L, B * N, rng)
        truth = sample_activity(B, N, K, rng)
        basis = common_nullspace(build_lift(sigs), gains)
        verdict = cone_feasibility(basis, ~truth.active_mask)
        if verdict.holds is not True:
            continue
        holds_count += 1
        covs = model_covariance(sigs, gains, truth, gains.noise_var)
        result = solve(covs, sigs, gains, gains.noise_var, rng=rng)
        if np.abs(result.pattern.values - truth.values).max() < 1e-3:
            exact += 1
    ok = holds_count > 0 and exact >= 0.95 * holds_count
    report(3, "asymptotic exactness", ok,
           f"{exact}/{holds_count} consistent seeds recovered to 1e-3")
    assert ok


def test_criterion_4_certificate_soundness():
    families = (
        [(1, 40, 4, K) for K in range(4, 15)],
        [(1, 50, 4, K) for K in range(4, 15)],
        [(3, 50, 4, K) for K in range(4, 11)],
    )
    instances = []
    for fam in families:
        instances.extend(fam)
    # cycle the families until 200 instances, varying the seed
    cases = [(instances[i % len(instances)], i) for i in range(200)]
    rng = np.random.default_rng(777)
    ambiguous = 0
    certified = 0
    bad_certificates = 0
    compared = 0
    agree = 0
    for (B, N, L, K), seed in cases:
        inst_rng = substream(91_000, seed)
        sigs = sample_sphere_sequences(L, B * N, inst_rng)
        if B == 1:
            gains = GainTensor(
                inst_rng.uniform(0.2, 5.0, size=(1, N)), 1e-12
            )
        else:
            layout = build_hex_layout(B, 500.0)
            placement = place_devices(layout, N, inst_rng)
            gains = compute_gains(layout, placement, PathLossModel())
        truth = sample_activity(B, N, K, inst_rng)
        lift = build_lift(sigs)
        basis = common_nullspace(lift, gains)
        verdict = cone_feasibility(basis, ~truth.active_mask)
        if verdict.holds is None:
            ambiguous += 1
            continue
        if verdict.holds is False:
            certified += 1
            checks = certificate_checks(
                verdict.certificate, lift, gains, ~truth.active_mask
            )
            if not (checks["residual_ok"] and checks["signs_ok"]
                    and checks["l1_ok"]):
                bad_certificates += 1
        stack = balanced_stack(lift, gains)
        sign = np.where(truth.active_mask, -1.0, 1.0)
        resid = cone_min_residual(stack, sign, restarts=100, iters=2000,
                                  rng=rng)
        oracle_feasible = resid <= 1e-6 * np.linalg.norm(stack, 2)
        compared += 1
        agree += oracle_feasible == (verdict.holds is False)
    ok = (
        bad_certificates == 0
        and compared > 0
        and agree >= 0.95 * compared
        and ambiguous <= 0.05 * 200
    )
    report(4, "certificate soundness", ok,
           f"bad certificates {bad_certificates}/{certified}, oracle "
           f"agreement {agree}/{compared}, ambiguous {ambiguous}/200")
    assert ok


def test_criterion_5_solver_numerics():
    rng = np.random.default_rng(5)
    layout = build_hex_layout(2, 500.0)
    placement = place_devices(layout, 6, rng)
    gains = compute_gains(layout, placement, PathLossModel())
    sigs = sample_sphere_sequences(5, 12, rng)
    truth = sample_activity(2, 6, 2, rng)
    signals = simulate_received(sigs, gains, truth, 32, rng)
    covs = sample_covariance(signals)
    nv = gains.noise_var

    # gradient versus central differences, 20 random interior points
    h = 1e-5
    grad_ok = True
    worst = 0.0
    for _ in range(20):
        a = rng.uniform(0.05, 0.95, size=12)
        g = gradient(a, covs, sigs, gains, nv)
        fd = np.empty(12)
        for i in range(12):
            ap, am = a.copy(), a.copy()
            ap[i] += h
            am[i] -= h
            fd[i] = (objective(ap, covs, sigs, gains, nv)
                     - objective(am, covs, sigs, gains, nv)) / (2 * h)
        rel = np.linalg.norm(g - fd) / np.linalg.norm(fd)
        worst = max(worst, rel)
        grad_ok &= rel < 1e-5

    # Sherman-Morrison drift over 50 sweeps without refresh
    from covact._kernels import mle_sweep
    from covact.solver import covariance_matrices

    state = init_state(covs, sigs, gains, nv)
    S = np.ascontiguousarray(sigs.matrix)
    G = np.ascontiguousarray(gains.gains)
    SC = np.ascontiguousarray(covs.matrices)
    for _ in range(50):
        mle_sweep(S, G, SC, state.a, state.inv_covs,
                  rng.permutation(12).astype(np.int64), nv)
    direct = np.linalg.inv(covariance_matrices(sigs, gains, state.a, nv))
    sm_err = np.linalg.norm(state.inv_covs - direct) / np.linalg.norm(direct)
    sm_ok = sm_err < 1e-8

    # monotone objective descent, 1e-10 slack
    state = init_state(covs, sigs, gains, nv)
    prev = state.objective
    mono_ok = True
    for _ in range(3):
        for i in rng.permutation(12):
            coordinate_update(int(i), state, covs, sigs, gains)
            cur = objective(state.a, covs, sigs, gains, nv)
            mono_ok &= cur <= prev + 1e-10
            prev = cur

    # tiny instance against an exhaustive 1001^2 grid
    rng2 = np.random.default_rng(13)
    sigs2 = sample_sphere_sequences(2, 2, rng2)
    gains2 = GainTensor(rng2.uniform(0.3, 2.0, size=(1, 2)), 0.5)
    truth2 = ActivityPattern(np.array([1.0, 0.0]), 1)
    y2 = simulate_received(sigs2, gains2, truth2, 4, rng2)
    covs2 = sample_covariance(y2)
    res2 = solve(covs2, sigs2, gains2, 0.5, rng=rng2)
    t = np.linspace(0.0, 1.0, 1001)
    a1, a2 = np.meshgrid(t, t, indexing="ij")
    S2 = sigs2.matrix
    c1 = gains2.gains[0, 0] * np.outer(S2[:, 0], S2[:, 0].conj())
    c2 = gains2.gains[0, 1] * np.outer(S2[:, 1], S2[:, 1].conj())
    s00 = a1 * c1[0, 0].real + a2 * c2[0, 0].real + 0.5
    s11 = a1 * c1[1, 1].real + a2 * c2[1, 1].real + 0.5
    s01 = a1 * c1[0, 1] + a2 * c2[0, 1]
    det = s00 * s11 - np.abs(s01) ** 2
    sc = covs2.matrices[0]
    grid_vals = np.log(det) + (
        s11 * sc[0, 0].real
        - 2 * (np.conj(s01) * sc[0, 1]).real
        + s00 * sc[1, 1].real
    ) / det
    solver_obj = objective(res2.pattern.values, covs2, sigs2, gains2, 0.5)
    grid_ok = solver_obj <= grid_vals.min() + 1e-4

    ok = grad_ok and sm_ok and mono_ok and grid_ok
    report(5, "solver numerics", ok,
           f"fd worst rel {worst:.2e} (<1e-5), SM drift {sm_err:.2e} "
           f"(<1e-8), monotone {mono_ok}, grid gap "
           f"{solver_obj - grid_vals.min():.2e} (<1e-4)")
    assert ok


def test_criterion_6_error_machinery():
    rng = np.random.default_rng(6)
    from covact.error_analysis import FisherModel

    # QP against exhaustive 2^8 active-set enumeration
    enum_ok = True
    kkt_ok = True
    worst_gap = 0.0
    for seed in range(5):
        r = np.random.default_rng(600 + seed)
        A = r.standard_normal((8, 5))
        J = A @ A.T
        vals, vecs = np.linalg.eigh(J)
        model = FisherModel(J, vals, vecs, 1e-10 * vals[-1], 16)
        inactive = r.uniform(size=8) < 0.6
        x = 2.0 * r.standard_normal(8)
        out = sign_constrained_qp(x, model, inactive)
        kkt_ok &= out.converged and out.kkt_residual <= 1e-6
        sign = np.where(inactive, 1.0, -1.0)
        _, best = qp_enumeration(J, x, sign)
        mine = (x - out.mu_hat) @ J @ (x - out.mu_hat)
        worst_gap = max(worst_gap, mine - best)
        enum_ok &= mine <= best + 1e-8

    # KKT residuals on a realistic Fisher instance
    layout = build_hex_layout(2, 500.0)
    placement = place_devices(layout, 10, rng)
    gains = compute_gains(layout, placement, PathLossModel())
    sigs = sample_sphere_sequences(8, 20, rng)
    truth = sample_activity(2, 10, 2, rng)
    fmodel = fisher_info(truth, sigs, gains, gains.noise_var, 128)
    for _ in range(50):
        x = pinv_sample(fmodel, rng)
        out = sign_constrained_qp(x, fmodel, ~truth.active_mask)
        kkt_ok &= (not out.converged) or out.kkt_residual <= 1e-6

    # sampler covariance at 1e5 draws on a 20-dim instance
    r = np.random.default_rng(61)
    A = r.standard_normal((20, 12))
    J = A @ A.T
    vals, vecs = np.linalg.eigh(J)
    model = FisherModel(J, vals, vecs, 1e-10 * vals[-1], 64)
    draws = pinv_sample(model, r, size=100_000)
    emp = draws.T @ draws / draws.shape[0]
    target = model.error_covariance()
    cov_err = np.linalg.norm(emp - target, 2) / np.linalg.norm(target, 2)
    cov_ok = cov_err < 0.05

    ok = enum_ok and kkt_ok and cov_ok
    report(6, "error-distribution machinery", ok,
           f"enumeration gap {worst_gap:.2e} (<1e-8), KKT ok {kkt_ok}, "
           f"sampler covariance error {cov_err:.3f} (<0.05)")
    assert ok


def _staircase_pm_at_pf(pf, pm, target):
    """PM of the measured point whose PF is nearest the target."""
    idx = int(np.argmin(np.abs(np.asarray(pf) - target)))
    return pm[idx], pf[idx]


def test_criterion_7_roc_agreement(roc_rows):
    config, rows = roc_rows
    series = {}
    for source, M, theta, pm, pf, trials, nonconv in rows:
        series.setdefault((source, M), []).append((theta, pm, pf))
    curves = {}
    for key, vals in series.items():
        vals.sort()
        curves[key] = (
            np.array([v[1] for v in vals]), np.array([v[2] for v in vals])
        )

    pm_emp, pf_emp = curves[("empirical", 128)]
    pm_th, pf_th = curves[("theory", 128)]
    pm_e, pf_star = _staircase_pm_at_pf(pf_emp, pm_emp, 1e-2)
    # theory PM at the measured PF: nearest theory point in PF
    idx = int(np.argmin(np.abs(pf_th - pf_star)))
    pm_t = pm_th[idx]
    lo = min(pm_e, pm_t)
    hi = max(pm_e, pm_t)
    factor = np.inf if lo == 0 else hi / lo
    factor_ok = (hi == 0) or factor <= 3.0

    # the desk instance is easy enough that PM vanishes over the plotted
    # range, so additionally require theory/empirical agreement on the
    # false-alarm rate wherever it is measurably nonzero
    pf_factor_worst = 1.0
    for M in config.antennas:
        pm_e_all, pf_e_all = curves[("empirical", M)]
        pm_t_all, pf_t_all = curves[("theory", M)]
        for k in range(pf_e_all.size):
            if pf_e_all[k] >= 1e-3 and pf_t_all[k] >= 0:
                both = (max(pf_e_all[k], pf_t_all[k]),
                        min(pf_e_all[k], pf_t_all[k]))
                if both[1] == 0:
                    pf_factor_worst = np.inf
                else:
                    pf_factor_worst = max(pf_factor_worst, both[0] / both[1])
    pf_factor_ok = pf_factor_worst <= 3.0

    # larger-M dominance at matched PF over the common range
    pm64, pf64 = curves[("empirical", 64)]
    pm128, pf128 = curves[("empirical", 128)]
    lo_pf = max(pf64.min(), pf128.min())
    hi_pf = min(pf64.max(), pf128.max())
    grid = np.geomspace(max(lo_pf, 1e-6), hi_pf, 40)

    def pm_at(pf, pm, target):
        # pf is non-increasing in threshold; step-interpolate in pf order
        order = np.argsort(pf)
        return float(np.interp(target, pf[order], pm[order]))

    dom_ok = all(
        pm_at(pf128, pm128, t) <= pm_at(pf64, pm64, t) + 1e-12 for t in grid
    )
    # same dominance on the false-alarm side at matched thresholds, which
    # is the binding comparison when PM is identically zero
    measurable = (pf64 >= 1e-3) | (pf128 >= 1e-3)
    pf_dom_ok = bool(np.all(pf128[measurable] <= pf64[measurable] + 1e-12))
    ok = factor_ok and pf_factor_ok and dom_ok and pf_dom_ok
    report(7, "detection-error agreement", ok,
           f"PF*={pf_star:.4f}: empirical PM {pm_e:.4f} vs theory PM "
           f"{pm_t:.4f} (factor {factor:.2f} <= 3), PF theory/empirical "
           f"worst factor {pf_factor_worst:.2f} (<= 3), PM dominance "
           f"{dom_ok}, PF dominance {pf_dom_ok}")
    assert ok


def test_criterion_8_interference_saturation(tmp_path):
    config = desk_config("lemma3")
    config.out_dir = str(tmp_path)
    rows = run_lemma3(config)
    totals = {}
    rings = {}
    for B, cell, ring, contribution, cumulative in rows:
        totals[B] = cumulative
        rings.setdefault(B, []).append((ring, contribution))
    inc_ok = totals[37] - totals[19] < totals[19] - totals[7]
    decay_ok = True
    for B, entries in rings.items():
        contribs = [c for r, c in sorted(entries) if r >= 1]
        decay_ok &= all(a > b for a, b in zip(contribs, contribs[1:]))
    ok = inc_ok and decay_ok
    report(8, "interference saturation", ok,
           f"S(7)={totals[7]:.3e} S(19)={totals[19]:.3e} "
           f"S(37)={totals[37]:.3e}, ring decay {decay_ok}")
    assert ok


def test_criterion_9_determinism(tmp_path):
    def read_all(out):
        blobs = {}
        for name in sorted(os.listdir(out)):
            with open(os.path.join(out, name), "rb") as fh:
                blobs[name] = fh.read()
        return blobs

    phase = ExperimentConfig(
        kind="phase-diagram", seed=12, trials=4, num_cells=(1, 3),
        devices_per_cell=16, sequence_lengths=(3, 4), active_min=1,
        active_max=8,
    )
    roc = ExperimentConfig(
        kind="roc", seed=12, trials=4, num_cells=(1,), devices_per_cell=10,
        sequence_length=6, active_count=2, antennas=(16,),
        thresholds=(0.2, 0.5, 0.8), theory_samples=40,
    )
    lemma3 = ExperimentConfig(kind="lemma3", seed=12, num_cells=(7, 19),
                              devices_per_cell=50)
    detect = ExperimentConfig(
        kind="detect", seed=12, num_cells=(1,), devices_per_cell=10,
        sequence_length=6, active_count=2, antennas=(32,),
    )
    runners = {
        "phase-diagram": (run_phase_diagram, phase),
        "roc": (run_roc, roc),
        "lemma3": (run_lemma3, lemma3),
        "detect": (run_detect, detect),
    }
    ok = True
    details = []
    for name, (runner, config) in runners.items():
        blobs = []
        for threads, tag in ((1, "a"), (1, "b"), (2, "c")):
            out = tmp_path / f"{name}-{tag}"
            cfg = ExperimentConfig(**{**config.__dict__,
                                      "out_dir": str(out),
                                      "threads": threads}).validate()
            runner(cfg)
            blobs.append(read_all(out))
        same = blobs[0] == blobs[1] == blobs[2]
        ok &= same
        details.append(f"{name}:{'ok' if same else 'MISMATCH'}")
    report(9, "byte-identical determinism", ok, ", ".join(details))
    assert ok
