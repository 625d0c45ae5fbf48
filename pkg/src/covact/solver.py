"""Coordinate-descent solver for the multi-cell covariance likelihood.

Minimizes

    f(a) = sum_b [ log det Sigma_b(a) + tr(inv(Sigma_b(a)) SampleCov_b) ]

over a in [0, 1]^(B*N), where Sigma_b(a) = S diag(g_b * a) S^H + nv * I.
Adding d to one coordinate changes each Sigma_b by a rank-one term, so the
exact one-dimensional objective change is available in closed form from
two quadratic forms per base station.  The per-coordinate subproblem has
no closed-form minimizer for B > 1 (a sum of B rational terms), so the
minimizer brackets the derivative's sign changes on a uniform grid and
refines them by bisection.  Inverses are maintained by Sherman-Morrison
updates with a periodic direct refresh to bound drift.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from . import _kernels
from .errors import ParameterError, SingularCovarianceError
from .simulation import ActivityPattern

_SWEEP_KERNEL = _kernels.mle_sweep
_MIN_STEP = _kernels.min_step


@dataclass
class SolverOptions:
    """Tuning knobs for :func:`solve`."""

    max_sweeps: int = 200
    tol: float = 1e-6
    refresh_period: int = 10
    permutation: str = "random"  # "random" | "cyclic"

    def __post_init__(self):
        if self.max_sweeps < 1 or self.tol <= 0 or self.refresh_period < 1:
            raise ParameterError("solver options must be positive")
        if self.permutation not in ("random", "cyclic"):
            raise ParameterError("permutation must be 'random' or 'cyclic'")


@dataclass
class SolverState:
    """Mutable iterate: activity vector, maintained inverses, bookkeeping."""

    a: np.ndarray
    inv_covs: np.ndarray  # (B, L, L), inv(Sigma_b(a))
    objective: float
    noise_var: float
    sweep_count: int = 0


@dataclass
class SolveResult:
    pattern: ActivityPattern
    objective_trace: np.ndarray
    sweeps: int
    converged: bool
    max_step_trace: np.ndarray


def _activity_values(a):
    if isinstance(a, ActivityPattern):
        return a.values
    return np.asarray(a, dtype=float)


def _gain_matrix(gains):
    """Accept a GainTensor or a bare (B, B*N) array of gains."""
    g = getattr(gains, "gains", gains)
    return np.asarray(g, dtype=float)


def covariance_matrices(sigs, gains, a, noise_var):
    """Assemble Sigma_b(a) = S diag(g_b * a) S^H + noise_var * I for all b."""
    S = sigs.matrix
    L = sigs.length
    values = _activity_values(a)
    g = _gain_matrix(gains)
    B = g.shape[0]
    out = np.empty((B, L, L), dtype=complex)
    eye = np.eye(L)
    for b in range(B):
        weighted = S * (g[b] * values)
        m = weighted @ S.conj().T + noise_var * eye
        out[b] = 0.5 * (m + m.conj().T)
    return out


def _cholesky(matrix):
    try:
        return np.linalg.cholesky(matrix)
    except np.linalg.LinAlgError as exc:
        raise SingularCovarianceError(
            "covariance matrix is not positive definite"
        ) from exc


def objective(a, covs, sigs, gains, noise_var):
    """Negative log-likelihood value (up to constants), via Cholesky."""
    sigma = covariance_matrices(sigs, gains, a, noise_var)
    total = 0.0
    for b in range(sigma.shape[0]):
        chol = _cholesky(sigma[b])
        logdet = 2.0 * np.sum(np.log(np.diag(chol).real))
        half = solve_triangular(chol, covs.matrices[b], lower=True)
        inner = solve_triangular(chol, half.conj().T, lower=True)
        total += logdet + np.trace(inner).real
    return float(total)


def gradient(a, covs, sigs, gains, noise_var):
    """Exact gradient of :func:`objective` with respect to the activities."""
    S = sigs.matrix
    g = _gain_matrix(gains)
    sigma = covariance_matrices(sigs, gains, a, noise_var)
    grad = np.zeros(S.shape[1])
    for b in range(sigma.shape[0]):
        chol = _cholesky(sigma[b])
        half = solve_triangular(chol, S, lower=True)  # L^-1 S
        q = np.sum(np.abs(half) ** 2, axis=0)
        isv = solve_triangular(
            chol.conj().T, half, lower=False
        )  # inv(Sigma) S
        p = np.sum(isv.conj() * (covs.matrices[b] @ isv), axis=0).real
        grad += g[b] * (q - p)
    return grad


def init_state(covs, sigs, gains, noise_var, a=None):
    """Build a consistent SolverState at the given activity vector."""
    n = sigs.count
    values = np.zeros(n) if a is None else _activity_values(a).copy()
    sigma = covariance_matrices(sigs, gains, values, noise_var)
    try:
        inv_covs = np.linalg.inv(sigma)
    except np.linalg.LinAlgError as exc:
        raise SingularCovarianceError(
            "covariance matrix is not positive definite"
        ) from exc
    obj = objective(values, covs, sigs, gains, noise_var)
    return SolverState(values, np.ascontiguousarray(inv_covs), obj,
                       float(noise_var), 0)


def coordinate_quadratic_forms(i, state, covs, sigs, gains):
    """Per-BS (alpha, beta) for coordinate i from the maintained inverses.

    alpha[b] = g_bi q_bi and beta[b] = g_bi p_bi with
    q = s^H inv(Sigma_b) s and p = s^H inv(Sigma_b) SampleCov_b inv(Sigma_b) s.
    """
    s = sigs.matrix[:, i]
    g = _gain_matrix(gains)[:, i]
    B = g.shape[0]
    alpha = np.empty(B)
    beta = np.empty(B)
    for b in range(B):
        v = state.inv_covs[b] @ s
        alpha[b] = g[b] * np.vdot(s, v).real
        beta[b] = g[b] * np.vdot(v, covs.matrices[b] @ v).real
    return alpha, beta


def coordinate_update(i, state, covs, sigs, gains):
    """Optimal clipped step for coordinate i; applies it to the state.

    Returns the accepted step d*.  The state's inverses are updated by the
    Sherman-Morrison formula when the step is nonzero.
    """
    alpha, beta = coordinate_quadratic_forms(i, state, covs, sigs, gains)
    a_i = state.a[i]
    d = float(_MIN_STEP(alpha, beta, -a_i, 1.0 - a_i))
    if d == 0.0:
        return 0.0
    s = sigs.matrix[:, i]
    gmat = _gain_matrix(gains)
    g = gmat[:, i]
    new_a = min(1.0, max(0.0, a_i + d))
    rebuild = []
    for b in range(g.shape[0]):
        denom = 1.0 + d * alpha[b]
        if denom < 1e-6:  # cancellation zone: redo this inverse directly
            rebuild.append(b)
            continue
        v = state.inv_covs[b] @ s
        coef = d * g[b] / denom
        state.inv_covs[b] -= coef * np.outer(v, v.conj())
    state.a[i] = new_a
    for b in rebuild:
        weighted = sigs.matrix * (gmat[b] * state.a)
        sigma = weighted @ sigs.matrix.conj().T
        sigma += state.noise_var * np.eye(sigs.length)
        state.inv_covs[b] = np.linalg.inv(sigma)
    return d


def solve(covs, sigs, gains, noise_var, opts=None, rng=None):
    """Run cyclic coordinate descent from a = 0 until steps stall.

    One sweep visits every coordinate in a (seeded) random or cyclic order.
    Terminates when the largest absolute step in a sweep drops below
    ``opts.tol``; otherwise returns the final iterate flagged unconverged.
    """
    if opts is None:
        opts = SolverOptions()
    if rng is None:
        rng = np.random.default_rng(0)
    S = np.ascontiguousarray(sigs.matrix, dtype=complex)
    g = np.ascontiguousarray(_gain_matrix(gains), dtype=float)
    scov = np.ascontiguousarray(covs.matrices, dtype=complex)
    n = sigs.count
    B = g.shape[0]
    state = init_state(covs, sigs, gains, noise_var)
    obj_trace = [state.objective]
    step_trace = []
    converged = False
    for sweep in range(1, opts.max_sweeps + 1):
        if opts.permutation == "random":
            order = rng.permutation(n).astype(np.int64)
        else:
            order = np.arange(n, dtype=np.int64)
        max_step = float(
            _SWEEP_KERNEL(S, g, scov, state.a, state.inv_covs, order,
                          float(noise_var))
        )
        state.sweep_count = sweep
        if sweep % opts.refresh_period == 0:
            sigma = covariance_matrices(sigs, gains, state.a, noise_var)
            state.inv_covs = np.ascontiguousarray(np.linalg.inv(sigma))
        state.objective = objective(state.a, covs, sigs, gains, noise_var)
        obj_trace.append(state.objective)
        step_trace.append(max_step)
        if max_step < opts.tol:
            converged = True
            break
    pattern = ActivityPattern(np.clip(state.a, 0.0, 1.0), B)
    return SolveResult(
        pattern,
        np.array(obj_trace),
        state.sweep_count,
        converged,
        np.array(step_trace),
    )


def threshold(estimate, theta):
    """Binary pattern declaring device i active when estimate_i >= theta."""
    values = (estimate.values >= theta).astype(float)
    return ActivityPattern(values, estimate.num_cells)
