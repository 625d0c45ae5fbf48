"""Identifiability test: common null space meets the activity sign cone.

The infinite-antenna estimator recovers the true activity vector exactly
if and only if no nonzero direction x simultaneously (a) is annihilated by
every gain-scaled lifted sequence matrix and (b) carries the sign pattern
that keeps the truth feasible (nonnegative on inactive devices, nonpositive
on active ones).  The test runs in two phases:

1.  Extract an orthonormal basis V of the common null space from one SVD
    of the stacked gain-scaled embeddings.  Column i of the b-th block is
    g_bi * w_i, so the stack reuses one shared embedding W with per-block
    column scalings.  Blocks are rescaled by their largest gain before
    stacking; path-loss gains span many orders of magnitude and an
    unbalanced stack would drown far-cell constraints in roundoff.
2.  Decide feasibility of {x = Vz : sign constraints, ||x||_1 = 1} with a
    linear program.  On the sign cone the l1 norm is a linear functional,
    which is what makes "nonzero" expressible in an LP.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import ParameterError
from .signatures import build_lift
from .simplex import solve_standard_form

DEFAULT_SVD_TOL = 1e-9
_CERT_RESIDUAL_TOL = 1e-7
_CERT_CLAMP = 1e-10


@dataclass(frozen=True)
class NullspaceBasis:
    """Orthonormal basis of the common null space of all gain-scaled lifts."""

    basis: np.ndarray  # (B*N, d), orthonormal columns
    dim: int
    svd_tol: float  # absolute singular-value cutoff used


@dataclass(frozen=True)
class ConsistencyVerdict:
    """Outcome of the identifiability test.

    ``holds`` is True when the intersection is numerically {0}, False when a
    certificate direction was found, and None when the LP was inconclusive.
    A False verdict always carries a unit-l1 certificate.
    """

    holds: bool | None
    certificate: np.ndarray | None
    null_dim: int
    lp_status: str  # "feasible" | "infeasible" | "numerically_ambiguous"


def balanced_stack(lift, gains):
    """Stack the per-BS matrices W * diag(g_b), each scaled by 1/max(g_b)."""
    g = gains.gains
    if np.all(g <= 0):
        raise ParameterError("gains are degenerate (all zero)")
    blocks = [lift.w * (g[b] / g[b].max()) for b in range(g.shape[0])]
    return np.vstack(blocks)


def common_nullspace(lift, gains, svd_tol=DEFAULT_SVD_TOL):
    """Numerical common null space of the stacked gain-scaled embeddings.

    Singular vectors with singular value at most ``svd_tol`` times the
    largest are taken as null directions.
    """
    stack = balanced_stack(lift, gains)
    # a full V is only needed when the stack is wide (rows < columns)
    wide = stack.shape[0] < stack.shape[1]
    _, svals, vt = np.linalg.svd(stack, full_matrices=wide)
    if svals.size == 0 or svals[0] == 0.0:
        raise ParameterError("stacked constraint matrix is identically zero")
    cutoff = svd_tol * svals[0]
    rank = int(np.sum(svals > cutoff))
    dim = vt.shape[0] - rank
    basis = vt[rank:].T.copy() if dim else np.zeros((vt.shape[0], 0))
    return NullspaceBasis(basis, dim, float(cutoff))


def _clean_certificate(x, sign):
    """Zero out roundoff-level sign violations and normalize to unit l1.

    Returns None when a violation is too large to be roundoff, which the
    caller reports as numerically ambiguous rather than a firm verdict.
    """
    scale = np.abs(x).max()
    if scale == 0.0:
        return None
    wrong = sign * x < 0
    if np.any(np.abs(x[wrong]) > _CERT_CLAMP * scale):
        return None
    x = x.copy()
    x[wrong] = 0.0
    norm = np.abs(x).sum()
    if norm == 0.0:
        return None
    return x / norm


def cone_feasibility(nullspace, inactive_mask, max_iter=None):
    """LP feasibility of a nonzero sign-constrained null-space direction.

    Substituting y_i = sign_i * x_i turns the cone into y >= 0 and the
    normalization into sum(y) = 1; membership of x in the null space is
    imposed through its orthogonal complement.  This keeps the tableau at
    (n - d + 1) rows over n nonnegative variables with no slack or split
    columns, which matters because the sign rows are totally degenerate
    and a slack formulation makes Bland's rule crawl through them.
    """
    inactive_mask = np.asarray(inactive_mask, dtype=bool)
    n = inactive_mask.shape[0]
    d = nullspace.dim
    if nullspace.basis.shape[0] != n:
        raise ParameterError("inactive mask length does not match basis")
    if d == 0:
        return ConsistencyVerdict(True, None, 0, "infeasible")
    sign = np.where(inactive_mask, 1.0, -1.0)
    if d == n:
        complement = np.zeros((n, 0))
    else:
        complement = scipy.linalg.null_space(nullspace.basis.T)
    m = complement.shape[1]
    A = np.zeros((m + 1, n))
    A[:m] = (complement * sign[:, None]).T
    A[m] = 1.0
    b = np.zeros(m + 1)
    b[m] = 1.0
    result = solve_standard_form(np.zeros(n), A, b, max_iter=max_iter)
    if result.status == "infeasible":
        return ConsistencyVerdict(True, None, d, "infeasible")
    if result.status != "optimal":
        return ConsistencyVerdict(None, None, d, "numerically_ambiguous")
    certificate = _clean_certificate(sign * result.x, sign)
    if certificate is None:
        return ConsistencyVerdict(None, None, d, "numerically_ambiguous")
    return ConsistencyVerdict(False, certificate, d, "feasible")


def certificate_checks(certificate, lift, gains, inactive_mask):
    """Residual, sign, and normalization checks for a failure certificate."""
    sign = np.where(np.asarray(inactive_mask, dtype=bool), 1.0, -1.0)
    residual = np.abs(balanced_stack(lift, gains) @ certificate).max()
    return {
        "residual": float(residual),
        "residual_ok": bool(residual <= _CERT_RESIDUAL_TOL),
        "signs_ok": bool(np.all(sign * certificate >= 0.0)),
        "l1_ok": bool(abs(np.abs(certificate).sum() - 1.0) <= 1e-9),
    }


def check_consistency(sigs, gains, truth, svd_tol=DEFAULT_SVD_TOL,
                      max_iter=None):
    """Full identifiability test for one instance.

    Composes the null-space extraction and the cone LP; a feasible LP whose
    certificate fails the residual check is downgraded to ambiguous instead
    of being reported as a firm failure.
    """
    lift = build_lift(sigs)
    nullspace = common_nullspace(lift, gains, svd_tol=svd_tol)
    inactive_mask = ~truth.active_mask
    verdict = cone_feasibility(nullspace, inactive_mask, max_iter=max_iter)
    if verdict.holds is False:
        checks = certificate_checks(
            verdict.certificate, lift, gains, inactive_mask
        )
        if not (checks["residual_ok"] and checks["signs_ok"] and checks["l1_ok"]):
            return ConsistencyVerdict(
                None, None, verdict.null_dim, "numerically_ambiguous"
            )
    return verdict
