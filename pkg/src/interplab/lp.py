"""Dense two-phase tableau simplex for equality-form linear programs.

Solves min c.x subject to A x = b, x >= 0, returning a basic feasible
(vertex) solution - no more nonzeros than constraint rows.  Vertex output
is the point: interior-point solutions of degenerate programs need not be
sparse, and the l1 interpolation results downstream rely on sparsity.

Pivot rules (both deterministic):
  * "bland"   - lowest eligible entering column; among minimum-ratio rows,
                the one whose basic variable has the lowest index.  Never
                cycles.
  * "dantzig" - most negative reduced cost (lowest index on ties) with the
                same ratio tie-break; after `_STALL_LIMIT` consecutive
                degenerate pivots it permanently switches to Bland's rule,
                which restores the termination guarantee.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["LpSolution", "solve_standard_form"]

_STALL_LIMIT = 100


@dataclass
class LpSolution:
    status: str  # "optimal" | "infeasible" | "iteration_limit" | "unbounded"
    x: np.ndarray
    basis: np.ndarray
    objective: float
    iterations: int
    message: str = ""


def _entering(red_costs: np.ndarray, rule: str, tol: float) -> int:
    if rule == "bland":
        eligible = np.nonzero(red_costs < -tol)[0]
        return int(eligible[0]) if eligible.size else -1
    j = int(np.argmin(red_costs))
    return j if red_costs[j] < -tol else -1


def _leaving(T: np.ndarray, basis: np.ndarray, col: int, nrows: int, tol: float) -> int:
    colvals = T[:nrows, col]
    mask = colvals > tol
    if not mask.any():
        return -1
    ratios = np.full(nrows, np.inf)
    ratios[mask] = T[:nrows, -1][mask] / colvals[mask]
    qmin = ratios.min()
    ties = np.nonzero(ratios <= qmin + 1e-12 * (1.0 + abs(qmin)))[0]
    return int(ties[np.argmin(basis[ties])])


def _pivot(T: np.ndarray, basis: np.ndarray, row: int, col: int, scratch: np.ndarray):
    basis[row] = col
    T[row] /= T[row, col]
    colvals = T[:, col].copy()
    colvals[row] = 0.0
    np.multiply.outer(colvals, T[row], out=scratch)
    np.subtract(T, scratch, out=T)
    T[:, col] = 0.0
    T[row, col] = 1.0


def _iterate(
    T: np.ndarray,
    basis: np.ndarray,
    nrows: int,
    ncols: int,
    rule: str,
    tol: float,
    budget: int,
) -> tuple[str, int]:
    """Run simplex pivots on T until the bottom row prices out.

    T's last row is the active objective (reduced costs; last entry holds the
    negated objective value).  Returns (status, iterations_used).
    """
    scratch = np.empty_like(T)
    stall = 0
    used = 0
    while True:
        col = _entering(T[-1, :ncols], rule, tol)
        if col < 0:
            return "optimal", used
        if used >= budget:
            return "iteration_limit", used
        row = _leaving(T, basis, col, nrows, tol)
        if row < 0:
            return "unbounded", used
        before = T[-1, -1]
        _pivot(T, basis, row, col, scratch)
        used += 1
        if rule == "dantzig":
            if abs(T[-1, -1] - before) <= 1e-13 * (1.0 + abs(before)):
                stall += 1
                if stall >= _STALL_LIMIT:
                    rule = "bland"
            else:
                stall = 0


def solve_standard_form(
    A,
    b,
    c,
    pivot_rule: str = "bland",
    feas_tol: float = 1e-9,
    max_iterations: int = 50_000,
) -> LpSolution:
    """Two-phase simplex for min c.x s.t. A x = b, x >= 0.

    Phase 1 introduces one artificial variable per row and minimizes their
    sum from the identity basis; rows whose artificial cannot be driven out
    are redundant and get dropped.  Phase 2 minimizes c.x from the feasible
    basis.  Basic values are refreshed against the original (A, b) system at
    the end, so the reported vertex satisfies the constraints to solver
    working precision rather than accumulated-tableau precision.
    """
    A = np.asarray(A, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    c = np.asarray(c, dtype=np.float64)
    if pivot_rule not in ("bland", "dantzig"):
        raise ValueError(f"unknown pivot rule {pivot_rule!r}")
    n, nv = A.shape

    flip = b < 0.0
    A1 = np.where(flip[:, None], -A, A)
    b1 = np.where(flip, -b, b)

    # Rows 0..n-1 constraints, row n the phase-2 costs, row n+1 the phase-1
    # reduced costs for the all-artificial basis.
    T = np.zeros((n + 2, nv + n + 1))
    T[:n, :nv] = A1
    T[:n, nv : nv + n] = np.eye(n)
    T[:n, -1] = b1
    T[n, :nv] = c
    T[n + 1, :nv] = -A1.sum(axis=0)
    T[n + 1, -1] = -b1.sum()
    basis = nv + np.arange(n)

    status, used = _iterate(T, basis, n, nv + n, pivot_rule, feas_tol, max_iterations)
    total_iters = used
    if status == "iteration_limit":
        return LpSolution("iteration_limit", np.zeros(nv), basis, np.nan, total_iters,
                          "phase-1 iteration budget exhausted")
    if status == "unbounded":
        return LpSolution("unbounded", np.zeros(nv), basis, np.nan, total_iters,
                          "phase-1 reported an unbounded direction")
    phase1_obj = -T[n + 1, -1]
    if phase1_obj > feas_tol * max(1.0, float(np.abs(b1).sum())):
        return LpSolution("infeasible", np.zeros(nv), basis, np.nan, total_iters,
                          f"phase-1 optimum {phase1_obj:.3e} above feasibility tolerance")

    # Drive remaining artificial variables out of the basis (degenerate rows);
    # a row with no structural pivot left is redundant.
    scratch = np.empty_like(T)
    redundant = []
    for r in range(n):
        if basis[r] >= nv:
            j = int(np.argmax(np.abs(T[r, :nv])))
            if abs(T[r, j]) > feas_tol:
                _pivot(T, basis, r, j, scratch)
                total_iters += 1
            else:
                redundant.append(r)

    keep = [r for r in range(n) if r not in redundant]
    rows = keep + [n]
    T2 = np.ascontiguousarray(np.hstack([T[rows][:, :nv], T[rows][:, -1:]]))
    basis2 = basis[keep]
    n2 = len(keep)

    status, used = _iterate(
        T2, basis2, n2, nv, pivot_rule, feas_tol, max_iterations - total_iters
    )
    total_iters += used
    if status != "optimal":
        msg = {
            "iteration_limit": "phase-2 iteration budget exhausted",
            "unbounded": "phase-2 reported an unbounded direction",
        }[status]
        return LpSolution(status, np.zeros(nv), basis2, np.nan, total_iters, msg)

    # Refresh basic values against the original system.
    x = np.zeros(nv)
    cols = A[:, basis2]
    if cols.shape[0] == cols.shape[1]:
        try:
            z = np.linalg.solve(cols, b)
        except np.linalg.LinAlgError:
            z = np.linalg.lstsq(cols, b, rcond=None)[0]
    else:
        z = np.linalg.lstsq(cols, b, rcond=None)[0]
    x[basis2] = np.maximum(z, 0.0)
    return LpSolution("optimal", x, basis2, float(c @ x), total_iters)
