"""Dense two-phase primal simplex with Bland's rule as the anti-cycling guard.

Solves  min c^T x  s.t.  A x = b,  x >= 0  on a dense tableau.  Pivots
follow Dantzig's most-negative-reduced-cost rule while the objective makes
progress; once a run of degenerate pivots exceeds a stall threshold the
method switches permanently to Bland's rule (lowest-index entering column,
lowest-index ratio-test tie-break), which makes cycling impossible and
guarantees finite termination at an exact vertex.  The cone-membership
feasibility problems this package solves carry long blocks of zero
right-hand sides, where pure Bland pivoting was observed to spend hundreds
of thousands of degenerate pivots; the hybrid needs a few hundred while
retaining the same guarantee and the same answers.  Problem sizes here are
a few hundred rows, where a dense tableau is perfectly adequate.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError

_PIVOT_TOL = 1e-10
_FEAS_TOL = 1e-9


@dataclass(frozen=True)
class LpResult:
    status: str  # "optimal" | "infeasible" | "unbounded" | "iteration_limit"
    x: np.ndarray | None
    objective: float | None
    iterations: int


def _pivot(T, basis, row, col):
    T[row] /= T[row, col]
    factors = T[:, col].copy()
    factors[row] = 0.0
    T -= np.outer(factors, T[row])
    T[:, col] = 0.0
    T[row, col] = 1.0
    basis[row] = col


def _pivot_step(T, basis, num_cols, bland):
    """One simplex pivot; Dantzig entering rule unless ``bland`` is set.

    The last tableau row is the reduced-cost row.  Returns "optimal",
    "unbounded", or "pivoted".
    """
    cost = T[-1, :num_cols]
    if bland:
        negative = np.flatnonzero(cost < -_PIVOT_TOL)
        if negative.size == 0:
            return "optimal"
        enter = int(negative[0])
    else:
        enter = int(np.argmin(cost))
        if cost[enter] >= -_PIVOT_TOL:
            return "optimal"
    col = T[:-1, enter]
    rows = np.flatnonzero(col > _PIVOT_TOL)
    if rows.size == 0:
        return "unbounded"
    ratios = T[:-1, -1][rows] / col[rows]
    best = ratios.min()
    ties = rows[ratios <= best + 1e-12 * (1.0 + abs(best))]
    leave = int(ties[np.argmin(basis[ties])])
    _pivot(T, basis, leave, enter)
    return "pivoted"


def _run_simplex(T, basis, num_cols, max_iter):
    iterations = 0
    bland = False
    stall = 0
    stall_limit = 50 + 2 * (T.shape[0] + num_cols)
    objective = T[-1, -1]
    while iterations < max_iter:
        outcome = _pivot_step(T, basis, num_cols, bland)
        if outcome != "pivoted":
            return outcome, iterations
        iterations += 1
        if not bland:
            # the corner entry holds the negated objective, so progress
            # in the minimization shows up as an increase
            if T[-1, -1] > objective + _PIVOT_TOL:
                objective = T[-1, -1]
                stall = 0
            else:
                stall += 1
                if stall > stall_limit:
                    bland = True  # degeneracy: anti-cycling rule from here on
    return "iteration_limit", iterations


def _crash_basis(A, b):
    """Assign singleton columns as initial basis columns where possible.

    Rows with b == 0 may be negated freely, which lets negative singleton
    columns serve too.  Returns an array with the basis column per row and
    -1 for rows that still need an artificial variable.  A is modified in
    place (row sign flips only).
    """
    m, n = A.shape
    assigned = np.full(m, -1, dtype=int)
    counts = np.count_nonzero(A, axis=0)
    for j in range(n):
        if counts[j] != 1:
            continue
        r = int(np.flatnonzero(A[:, j])[0])
        if assigned[r] >= 0:
            continue
        if A[r, j] > 0:
            assigned[r] = j
        elif b[r] == 0.0:
            A[r] = -A[r]
            assigned[r] = j
    return assigned


def solve_standard_form(c, A, b, max_iter=None):
    """Two-phase primal simplex for  min c^T x  s.t.  A x = b, x >= 0."""
    A = np.array(A, dtype=float)
    b = np.array(b, dtype=float)
    c = np.array(c, dtype=float)
    if A.ndim != 2 or b.shape != (A.shape[0],) or c.shape != (A.shape[1],):
        raise ParameterError("inconsistent LP dimensions")
    m, n = A.shape
    if max_iter is None:
        # Bland's rule can spend many degenerate pivots on zero right-hand
        # sides before making progress; the cap only guards true pathology
        max_iter = 5000 + 500 * (m + n)

    flip = b < 0
    A[flip] = -A[flip]
    b[flip] = -b[flip]

    assigned = _crash_basis(A, b)
    art_rows = np.flatnonzero(assigned < 0)
    n_art = art_rows.size
    total = n + n_art

    T = np.zeros((m + 1, total + 1))
    T[:m, :n] = A
    T[:m, -1] = b
    basis = assigned.copy()
    for k, r in enumerate(art_rows):
        T[r, n + k] = 1.0
        basis[r] = n + k
    for r in range(m):
        j = basis[r]
        if j < n and T[r, j] != 1.0:
            T[r] /= T[r, j]

    iterations = 0
    if n_art:
        # phase-1 reduced costs: minimize the sum of artificials
        T[-1, :] = 0.0
        T[-1, n:total] = 1.0
        for r in art_rows:
            T[-1] -= T[r]
        outcome, it1 = _run_simplex(T, basis, total, max_iter)
        iterations += it1
        if outcome == "iteration_limit":
            return LpResult("iteration_limit", None, None, iterations)
        phase1_obj = -T[-1, -1]
        if phase1_obj > _FEAS_TOL * (1.0 + np.abs(b).sum()):
            return LpResult("infeasible", None, None, iterations)
        # drive surviving artificials out of the basis, dropping redundant rows
        keep_rows = np.ones(m, dtype=bool)
        for r in range(m):
            if basis[r] < n:
                continue
            pivots = np.flatnonzero(np.abs(T[r, :n]) > _PIVOT_TOL)
            if pivots.size:
                _pivot(T, basis, r, int(pivots[0]))
            else:
                keep_rows[r] = False
        T = np.vstack([T[:m][keep_rows], T[-1]])
        basis = basis[keep_rows]
        m = basis.size

    # phase-2 tableau: original columns only
    T = np.hstack([T[:, :n], T[:, -1:]])
    T[-1, :] = 0.0
    T[-1, :n] = c
    for r in range(m):
        cb = c[basis[r]]
        if cb != 0.0:
            T[-1] -= cb * T[r]
    outcome, it2 = _run_simplex(T, basis, n, max_iter)
    iterations += it2
    if outcome == "iteration_limit":
        return LpResult("iteration_limit", None, None, iterations)
    if outcome == "unbounded":
        return LpResult("unbounded", None, None, iterations)

    x = np.zeros(n)
    x[basis] = T[:m, -1]
    return LpResult("optimal", x, float(c @ x), iterations)
