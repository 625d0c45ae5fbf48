"""Numba inner loops for the coordinate-descent solvers.

Pure-Python twins of these kernels are available through ``.py_func`` on
each dispatcher and are exercised in the test suite to guard against
compilation-level divergence.
"""

import numba
import numpy as np

_LOG_FLOOR = 1e-300


@numba.njit(cache=True)
def step_objective(t, alpha, beta):
    """Objective change of moving one activity coordinate by t.

    alpha[b] = g_b * s^H inv(Sigma_b) s,  beta[b] = g_b * s^H inv(Sigma_b)
    SampleCov_b inv(Sigma_b) s.  Value at t = 0 is exactly 0.  The floor
    keeps roundoff excursions past the log-barrier finite; such points
    evaluate huge and are never selected.
    """
    val = 0.0
    for b in range(alpha.shape[0]):
        w = 1.0 + t * alpha[b]
        if w < 1e-140:
            w = 1e-140
        val += np.log(w) - t * beta[b] / w
    return val


@numba.njit(cache=True)
def step_derivative(t, alpha, beta):
    val = 0.0
    for b in range(alpha.shape[0]):
        w = 1.0 + t * alpha[b]
        if w < 1e-140:
            w = 1e-140  # keeps w*w above the underflow threshold
        val += (alpha[b] * w - beta[b]) / (w * w)
    return val


@numba.njit(cache=True)
def min_step(alpha, beta, lo, hi):
    """Minimize the per-coordinate objective change over [lo, hi].

    Evaluates the derivative on 2B+1 uniform subintervals, refines each
    sign change by bisection to 1e-10, and returns the best of
    {0, lo, hi, refined roots}; ties prefer a zero step.
    """
    B = alpha.shape[0]
    npts = 2 * B + 2
    cand = np.empty(2 * npts + 4)
    cand[0] = 0.0
    cand[1] = lo
    cand[2] = hi
    ncand = 3
    prev_t = lo
    prev_d = step_derivative(lo, alpha, beta)
    for k in range(1, npts):
        t = lo + (hi - lo) * k / (npts - 1)
        d = step_derivative(t, alpha, beta)
        if prev_d == 0.0:
            cand[ncand] = prev_t
            ncand += 1
        elif prev_d * d < 0.0:
            left = prev_t
            right = t
            fleft = prev_d
            while right - left > 1e-10:
                mid = 0.5 * (left + right)
                fmid = step_derivative(mid, alpha, beta)
                if fmid == 0.0:
                    left = mid
                    right = mid
                elif fleft * fmid < 0.0:
                    right = mid
                else:
                    left = mid
                    fleft = fmid
            cand[ncand] = 0.5 * (left + right)
            ncand += 1
        prev_t = t
        prev_d = d
    best = 0.0
    best_val = 0.0  # objective change of a zero step
    for k in range(ncand):
        t = cand[k]
        if t < lo:
            t = lo
        if t > hi:
            t = hi
        v = step_objective(t, alpha, beta)
        if v < best_val:
            best_val = v
            best = t
    return best


@numba.njit(cache=True)
def _rebuild_inverse(S, gains, a, noise_var, inv_covs, b):
    """Direct inverse of Sigma_b(a), bypassing the maintained update."""
    L, n = S.shape
    sigma = np.zeros((L, L), dtype=np.complex128)
    for j in range(n):
        w = a[j] * gains[b, j]
        if w > 0.0:
            for l in range(L):
                sl = w * S[l, j]
                for m in range(L):
                    sigma[l, m] += sl * np.conj(S[m, j])
    for l in range(L):
        sigma[l, l] += noise_var
    inv_covs[b] = np.linalg.inv(sigma)


@numba.njit(cache=True)
def mle_sweep(S, gains, scov, a, inv_covs, order, noise_var):
    """One coordinate-descent sweep over ``order``; updates a and inv_covs.

    inv_covs holds inv(Sigma_b(a)) and is maintained by Sherman-Morrison
    rank-one updates after every accepted step.  A step that nearly zeroes
    the update denominator (deactivating a device whose rank-one term
    dominates the covariance) would amplify cancellation error through the
    maintained inverse, so those inverses are rebuilt directly instead.
    Returns the largest absolute step taken.
    """
    L, _ = S.shape
    B = gains.shape[0]
    alpha = np.empty(B)
    beta = np.empty(B)
    v = np.empty((B, L), dtype=np.complex128)
    tmp = np.empty(L, dtype=np.complex128)
    max_step = 0.0
    for idx in range(order.shape[0]):
        i = order[idx]
        gmax = 0.0
        for b in range(B):
            if gains[b, i] > gmax:
                gmax = gains[b, i]
        if gmax <= 0.0:
            continue
        for b in range(B):
            g = gains[b, i]
            for l in range(L):
                acc = 0.0 + 0.0j
                for m in range(L):
                    acc += inv_covs[b, l, m] * S[m, i]
                v[b, l] = acc
            q = 0.0
            for l in range(L):
                q += (np.conj(S[l, i]) * v[b, l]).real
            for l in range(L):
                acc = 0.0 + 0.0j
                for m in range(L):
                    acc += scov[b, l, m] * v[b, m]
                tmp[l] = acc
            p = 0.0
            for l in range(L):
                p += (np.conj(v[b, l]) * tmp[l]).real
            alpha[b] = g * q
            beta[b] = g * p
        d = min_step(alpha, beta, -a[i], 1.0 - a[i])
        if d == 0.0:
            continue
        newa = a[i] + d
        if newa < 0.0:
            newa = 0.0
        elif newa > 1.0:
            newa = 1.0
        for b in range(B):
            denom = 1.0 + d * alpha[b]
            if denom < 1e-6:
                a[i] = newa
                _rebuild_inverse(S, gains, a, noise_var, inv_covs, b)
                continue
            coef = d * gains[b, i] / denom
            for l in range(L):
                vl = coef * v[b, l]
                for m in range(L):
                    inv_covs[b, l, m] -= vl * np.conj(v[b, m])
        a[i] = newa
        if abs(d) > max_step:
            max_step = abs(d)
    return max_step


@numba.njit(cache=True)
def qp_sweeps(Jn, x, sign, mu, r, max_sweeps, tol, diag_eps):
    """Cyclic coordinate descent for min (x-mu)^T Jn (x-mu) under sign constraints.

    sign[i] = +1 forces mu_i >= 0, -1 forces mu_i <= 0.  ``r`` must enter as
    Jn @ (mu - x) and is maintained incrementally.  Coordinates with a
    negligible diagonal do not affect the objective and are pinned to the
    sign-feasible value nearest x_i.  Returns (sweeps_used, converged).
    """
    n = x.shape[0]
    sweeps = 0
    for _ in range(max_sweeps):
        max_change = 0.0
        for i in range(n):
            jii = Jn[i, i]
            if jii <= diag_eps:
                target = x[i]
            else:
                target = mu[i] - r[i] / jii
            if sign[i] > 0:
                if target < 0.0:
                    target = 0.0
            else:
                if target > 0.0:
                    target = 0.0
            delta = target - mu[i]
            if delta != 0.0:
                for k in range(n):
                    r[k] += Jn[k, i] * delta
                mu[i] = target
                if abs(delta) > max_change:
                    max_change = abs(delta)
        sweeps += 1
        if max_change < tol:
            return sweeps, True
    return sweeps, False
