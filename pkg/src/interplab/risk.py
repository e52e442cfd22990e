"""Exact excess-risk evaluation (head/tail decomposition), the residual
identity, theoretical rate curves, and theorem-precondition checks."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .interpolators import EXTERNAL
from .numerics import as_matrix, as_vector
from .scenario import ScenarioParams

__all__ = [
    "DomainError",
    "RiskReport",
    "BoundInputs",
    "PreconditionCheck",
    "PreconditionChecklist",
    "excess_risk",
    "residual_identity_gap",
    "ols_theory_curve",
    "sparse_lower_curve",
    "theorem_preconditions",
]


class DomainError(ValueError):
    """Curve evaluated outside its domain (e.g. sparsity above the dimension)."""


@dataclass(frozen=True)
class RiskReport:
    """Exact excess risk split into its head and tail contributions."""

    head_term: float
    tail_term: float
    total: float
    method: str


def excess_risk(params: ScenarioParams, theta_hat, method: str = EXTERNAL) -> RiskReport:
    """Ground-truth excess risk of theta_hat under the scenario distribution.

    Equals ||theta_star_H - theta_hat_H||^2 + eps * ||theta_hat_T||^2 exactly
    (no sampling): the covariance is diagonal with unit head and eps tail,
    and theta_star vanishes on the tail.
    """
    theta_hat = as_vector(theta_hat, "theta_hat")
    if theta_hat.shape[0] != params.p:
        raise ValueError("theta_hat must have length p")
    k = params.k
    head = float(np.sum((params.theta_star[:k] - theta_hat[:k]) ** 2))
    tail = float(params.eps * np.sum(theta_hat[k:] ** 2))
    return RiskReport(head_term=head, tail_term=tail, total=head + tail, method=method)


def residual_identity_gap(X, y, theta, k: int) -> float:
    """| ||X_T theta_T|| - ||y - X_H theta_H|| | - zero for any interpolant."""
    X = as_matrix(X, "X")
    y = as_vector(y, "y")
    theta = as_vector(theta, "theta")
    if not 1 <= k <= theta.shape[0]:
        raise ValueError("need 1 <= k <= p")
    lhs = float(np.linalg.norm(X[:, k:] @ theta[k:]))
    rhs = float(np.linalg.norm(y - X[:, :k] @ theta[:k]))
    return abs(lhs - rhs)


def ols_theory_curve(k: int, n: int, p: int, eps: float) -> float:
    """Shape of the minimum-l2 excess-risk rate: k/n + eps*p/n + n/p.

    A shape curve (proportionality constant 1), not a certified bound.
    """
    if n < 1 or p < 1:
        raise DomainError("n and p must be at least 1")
    if k < 0 or eps < 0:
        raise DomainError("k and eps must be nonnegative")
    return k / n + eps * p / n + n / p


def sparse_lower_curve(sigma: float, n: int, s: int, p: int, c_free: float = 1.0) -> float:
    """Lower-bound curve for s-sparse interpolators: c * sigma^2 n / (s ln^2(3p/s)).

    Logarithms are natural; the unspecified absolute constant is exposed as
    c_free (default 1).  With s = n this is the basis-pursuit curve
    c * sigma^2 / ln^2(3p/n).
    """
    if s < 1 or s > p:
        raise DomainError(f"need 1 <= s <= p, got s={s}, p={p}")
    return c_free * sigma**2 * n / (s * math.log(3 * p / s) ** 2)


@dataclass(frozen=True)
class BoundInputs:
    """Free parameters of the lower-bound theorems.

    s is the sparsity level, delta the failure probability, c1 the
    noise-to-signal constant in (0, 1], and c_free stands in for the
    theorems' unspecified absolute constant.
    """

    s: int
    delta: float
    c1: float = 1.0
    c_free: float = 1.0

    def __post_init__(self):
        if self.s < 1:
            raise ValueError("s must be at least 1")
        if not 0.0 < self.delta < 1.0:
            raise ValueError("delta must lie in (0, 1)")
        if not 0.0 < self.c1 <= 1.0:
            raise ValueError("c1 must lie in (0, 1]")
        if self.c_free <= 0.0:
            raise ValueError("c_free must be positive")


@dataclass(frozen=True)
class PreconditionCheck:
    name: str
    passed: bool
    observed: float
    required: float
    description: str


@dataclass(frozen=True)
class PreconditionChecklist:
    checks: tuple[PreconditionCheck, ...] = field(default_factory=tuple)

    @property
    def all_pass(self) -> bool:
        return all(c.passed for c in self.checks)

    def flags(self) -> str:
        """Compact `name=0/1` serialization for result rows."""
        return ";".join(f"{c.name}={int(c.passed)}" for c in self.checks)


def theorem_preconditions(params: ScenarioParams, inputs: BoundInputs) -> PreconditionChecklist:
    """Evaluate the lower-bound theorems' preconditions for one scenario.

    Checks sigma >= c1 ||theta_star||, p >= n + k, the sample-size condition
    n >= ln^2(1/delta) + k^(1+c1), and the sparsity range n <= s <= p - k.
    Each entry reports the evaluated quantities so sweep points can be
    annotated as inside or outside the theorems' regime.
    """
    norm = params.theta_norm
    sample_floor = math.log(1.0 / inputs.delta) ** 2 + params.k ** (1.0 + inputs.c1)
    checks = (
        PreconditionCheck(
            "noise_vs_signal",
            params.sigma >= inputs.c1 * norm,
            observed=params.sigma,
            required=inputs.c1 * norm,
            description="sigma >= c1 * ||theta_star||",
        ),
        PreconditionCheck(
            "overparameterized",
            params.p >= params.n + params.k,
            observed=float(params.p),
            required=float(params.n + params.k),
            description="p >= n + k",
        ),
        PreconditionCheck(
            "sample_size",
            params.n >= sample_floor,
            observed=float(params.n),
            required=sample_floor,
            description="n >= ln^2(1/delta) + k^(1+c1)",
        ),
        PreconditionCheck(
            "sparsity_range",
            params.n <= inputs.s <= params.p - params.k,
            observed=float(inputs.s),
            required=float(params.n),
            description="n <= s <= p - k",
        ),
    )
    return PreconditionChecklist(checks=checks)
