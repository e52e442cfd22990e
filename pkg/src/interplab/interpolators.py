"""Minimum-l2 and minimum-l1 interpolation, plus constructive support
reduction of an arbitrary interpolant down to the sample count."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import lp
from .numerics import RankDeficient, as_matrix, as_vector, freeze, gram_solve

__all__ = [
    "NotInterpolable",
    "IterationLimit",
    "NumericalBreakdown",
    "MIN_L2",
    "MIN_L1",
    "SPARSIFIED",
    "EXTERNAL",
    "Interpolant",
    "LpOptions",
    "support",
    "min_l2",
    "min_l1",
    "sparsify",
]

MIN_L2 = "min_l2"
MIN_L1 = "min_l1"
SPARSIFIED = "sparsified"
EXTERNAL = "external"

# Interpolants must reproduce y to this relative tolerance or an error is
# raised instead of returning a value.
RESIDUAL_RTOL = 1e-8

# Columns count as linearly dependent when the smallest singular direction
# maps below this fraction of the largest column norm.
_DEPENDENCE_RTOL = 1e-10


class NotInterpolable(Exception):
    """No parameter vector reproduces y (y lies outside the column space)."""


class IterationLimit(Exception):
    """The l1 linear program exceeded its iteration budget or broke down."""


class NumericalBreakdown(Exception):
    """Support reduction could not certify a null-space direction."""


@dataclass(frozen=True)
class LpOptions:
    """Tolerances and pivoting controls for the l1 linear program.

    zero_tol scales the support threshold (relative to max(1, ||theta||_inf)),
    feas_tol is the simplex feasibility/pricing tolerance, pivot_rule is one
    of "bland" or "dantzig" (see lp module), and max_iterations caps total
    simplex pivots across both phases.
    """

    zero_tol: float = 1e-9
    feas_tol: float = 1e-9
    pivot_rule: str = "dantzig"
    max_iterations: int = 50_000

    def __post_init__(self):
        if self.zero_tol <= 0 or self.feas_tol <= 0:
            raise ValueError("tolerances must be strictly positive")
        if self.max_iterations <= 0:
            raise ValueError("max_iterations must be positive")


@dataclass(frozen=True)
class Interpolant:
    """A fitted parameter vector with its support and solver diagnostics."""

    theta_hat: np.ndarray
    method: str
    support: np.ndarray
    l1_norm: float
    l2_norm: float
    residual: float
    iterations: int
    objective: float

    @property
    def support_size(self) -> int:
        return int(self.support.shape[0])


def support(theta, zero_tol: float = 1e-9) -> np.ndarray:
    """Indices i with |theta_i| strictly above zero_tol * max(1, ||theta||_inf)."""
    theta = as_vector(theta, "theta")
    if zero_tol <= 0:
        raise ValueError("zero_tol must be strictly positive")
    scale = max(1.0, float(np.max(np.abs(theta))) if theta.size else 0.0)
    return np.nonzero(np.abs(theta) > zero_tol * scale)[0]


def _make_interpolant(X, y, theta, method, iterations, objective, zero_tol) -> Interpolant:
    residual = float(np.linalg.norm(X @ theta - y))
    return Interpolant(
        theta_hat=freeze(theta),
        method=method,
        support=support(theta, zero_tol),
        l1_norm=float(np.sum(np.abs(theta))),
        l2_norm=float(np.linalg.norm(theta)),
        residual=residual,
        iterations=iterations,
        objective=objective,
    )


def min_l2(X, y, zero_tol: float = 1e-9) -> Interpolant:
    """Minimum-l2-norm interpolant X^T (X X^T)^{-1} y.

    Falls back to the minimum-norm least-squares solution when the Gram
    system is singular; raises NotInterpolable if even that leaves a residual
    above tolerance (y outside the column space of X).
    """
    X = as_matrix(X, "X")
    y = as_vector(y, "y")
    if y.shape[0] != X.shape[0]:
        raise ValueError("y length must equal the number of rows of X")
    try:
        theta = X.T @ gram_solve(X, y)
    except RankDeficient:
        theta = np.linalg.lstsq(X, y, rcond=None)[0]
        residual = np.linalg.norm(X @ theta - y)
        if residual > RESIDUAL_RTOL * max(1.0, float(np.linalg.norm(y))):
            raise NotInterpolable(
                "y is outside the column space of X "
                f"(least-squares residual {residual:.3e})"
            ) from None
    out = _make_interpolant(X, y, theta, MIN_L2, iterations=0,
                            objective=float(np.linalg.norm(theta)), zero_tol=zero_tol)
    _check_residual(out, y)
    return out


def min_l1(X, y, opts: LpOptions | None = None) -> Interpolant:
    """Minimum-l1-norm interpolant via the split-variable linear program.

    Solves min sum(u + v) subject to X (u - v) = y, u >= 0, v >= 0 with a
    two-phase simplex, so the returned theta = u - v is a vertex: at most n
    nonzero components.  The instance is solved with y rescaled to unit
    inf-norm (tolerances are then instance-relative) and the output rescaled.
    """
    opts = opts or LpOptions()
    X = as_matrix(X, "X")
    y = as_vector(y, "y")
    if y.shape[0] != X.shape[0]:
        raise ValueError("y length must equal the number of rows of X")
    n, p = X.shape

    scale = float(np.max(np.abs(y))) if y.size else 0.0
    if scale == 0.0:
        return _make_interpolant(X, y, np.zeros(p), MIN_L1, 0, 0.0, opts.zero_tol)

    A = np.hstack([X, -X])
    sol = lp.solve_standard_form(
        A,
        y / scale,
        np.ones(2 * p),
        pivot_rule=opts.pivot_rule,
        feas_tol=opts.feas_tol,
        max_iterations=opts.max_iterations,
    )
    if sol.status == "infeasible":
        raise NotInterpolable(sol.message)
    if sol.status != "optimal":
        raise IterationLimit(sol.message)

    theta = (sol.x[:p] - sol.x[p:]) * scale
    out = _make_interpolant(X, y, theta, MIN_L1, sol.iterations,
                            objective=float(np.sum(np.abs(theta))), zero_tol=opts.zero_tol)
    _check_residual(out, y)
    return out


def _check_residual(interp: Interpolant, y: np.ndarray):
    if interp.residual > RESIDUAL_RTOL * max(1.0, float(np.linalg.norm(y))):
        raise NotInterpolable(
            f"solver left relative residual {interp.residual:.3e} above tolerance"
        )


def _null_direction(cols: np.ndarray) -> np.ndarray:
    """A null-space vector of an n x m column block with m > n.

    First tries pinning the last coefficient to 1 and solving for the rest,
    which keeps small hand-checkable cases exact; falls back to the smallest
    right singular direction when the leading columns are themselves
    dependent.  The result is oriented so its first nonzero entry is
    positive (a deterministic canonical form).
    """
    mu = np.linalg.lstsq(cols[:, :-1], -cols[:, -1], rcond=None)[0]
    lam = np.append(mu, 1.0)
    if not _is_null(cols, lam):
        lam = np.linalg.svd(cols, full_matrices=True)[2][-1]
        if not _is_null(cols, lam):
            raise NumericalBreakdown(
                "null-space certificate residual exceeds tolerance; "
                "columns too close to independent"
            )
    lead = lam[np.nonzero(lam)[0][0]]
    return lam if lead > 0 else -lam


def _is_null(cols: np.ndarray, lam: np.ndarray) -> bool:
    col_scale = float(np.max(np.linalg.norm(cols, axis=0)))
    drift = float(np.linalg.norm(cols @ lam))
    return drift <= _DEPENDENCE_RTOL * max(col_scale, 1.0) * float(np.linalg.norm(lam))


def sparsify(X, theta, opts: LpOptions | None = None) -> Interpolant:
    """Reduce an interpolant's support to at most n without raising its l1 norm.

    While more than n components are nonzero, picks the n+1 lowest-indexed
    active columns (necessarily dependent), finds a null-space direction
    lambda among them, orients it so sigma = sum_i lambda_i sign(theta_i) >= 0,
    and steps theta -> theta - eta * lambda to the first zero crossing
    eta = min{theta_i / lambda_i > 0}.  With sigma > 0 the l1 norm strictly
    decreases up to the crossing; with sigma = 0 it is unchanged (the
    direction is orthogonal to every l1 subgradient while signs hold).  Each
    pass zeroes at least one component, so at most p - n passes run.  X theta
    is preserved throughout because lambda is a null vector.
    """
    opts = opts or LpOptions()
    X = as_matrix(X, "X")
    theta = as_vector(theta, "theta").copy()
    if theta.shape[0] != X.shape[1]:
        raise ValueError("theta length must equal the number of columns of X")
    n = X.shape[0]
    y = X @ theta

    total_passes = 0
    active = np.nonzero(theta)[0]
    while active.size > n:
        sub = active[: n + 1]
        lam = _null_direction(X[:, sub])

        sigma = float(lam @ np.sign(theta[sub]))
        sigma_tol = 1e-12 * float(np.sum(np.abs(lam)))
        if sigma < -sigma_tol:
            lam = -lam
            sigma = -sigma

        valid = np.abs(lam) > 1e-14 * float(np.max(np.abs(lam)))
        ratios = np.full(sub.shape[0], np.nan)
        ratios[valid] = theta[sub[valid]] / lam[valid]
        positive = valid & (ratios > 0.0)
        if not positive.any():
            if abs(sigma) <= sigma_tol and np.any(valid & (ratios < 0.0)):
                # Mirror direction: with sigma = 0 either orientation keeps
                # the l1 norm, and the mirrored one must cross zero.
                lam = -lam
                ratios = -ratios
                positive = valid & (ratios > 0.0)
            else:
                raise NumericalBreakdown(
                    "no zero crossing along the null direction; "
                    "l1 norm would decrease without bound"
                )
        eta = float(ratios[positive].min())

        theta[sub] -= eta * lam
        # Zero the crossed components exactly; the crossing coordinates keep
        # only roundoff dust of size ~eps * (|theta_i| + eta |lambda_i|).
        step = np.abs(eta * lam)
        crossed = np.abs(theta[sub]) <= 1e-12 * (np.abs(theta[sub]) + step)
        crossed |= positive & np.isclose(ratios, eta, rtol=1e-12, atol=0.0)
        theta[sub[crossed]] = 0.0

        total_passes += 1
        active = np.nonzero(theta)[0]

    out = _make_interpolant(X, y, theta, SPARSIFIED, total_passes,
                            objective=float(np.sum(np.abs(theta))), zero_tol=opts.zero_tol)
    _check_residual(out, y)
    return out
