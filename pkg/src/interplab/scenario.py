"""The (k, p, n, eps, sigma) sampling scenario: parameter container, dataset
draws, and fresh-sample Monte Carlo excess-risk estimation."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .numerics import SeedSpec, as_vector, derive_stream, freeze

__all__ = [
    "ScenarioParams",
    "Dataset",
    "HeadTailSplit",
    "head_tail_split",
    "uniform_head_theta",
    "generate",
    "mc_excess_risk",
    "mc_excess_risk_estimate",
    "McRiskEstimate",
]

# Fixed Monte Carlo chunk size; part of the documented stream-consumption
# pattern, so changing it changes the variates a given seed produces.
_MC_CHUNK = 16_384


@dataclass(frozen=True)
class HeadTailSplit:
    """Index split of the p coordinates into head {0..k-1} and tail {k..p-1}."""

    head: np.ndarray
    tail: np.ndarray


def head_tail_split(k: int, p: int) -> HeadTailSplit:
    return HeadTailSplit(head=np.arange(k), tail=np.arange(k, p))


@dataclass(frozen=True)
class ScenarioParams:
    """Parameters of the data distribution.

    Covariate rows are centered Gaussians with diagonal covariance
    diag(1, ..., 1, eps, ..., eps): k leading unit-variance coordinates (the
    head, where the true parameter lives) and p - k variance-eps coordinates
    (the tail).  Responses are y = X theta_star + xi with xi ~ N(0, sigma^2).
    theta_star must vanish on the tail.  eps = 0 is rejected: it would make
    the tail columns identically zero and can leave the l1 program degenerate.
    """

    k: int
    p: int
    n: int
    eps: float
    sigma: float
    theta_star: np.ndarray = field(repr=False)

    def __post_init__(self):
        if not 1 <= self.k <= self.p:
            raise ValueError(f"need 1 <= k <= p, got k={self.k}, p={self.p}")
        if self.n < 1:
            raise ValueError("n must be at least 1")
        if not self.eps > 0.0:
            raise ValueError("eps must be strictly positive")
        if self.sigma < 0.0:
            raise ValueError("sigma must be nonnegative")
        theta = freeze(as_vector(self.theta_star, "theta_star"))
        if theta.shape[0] != self.p:
            raise ValueError("theta_star must have length p")
        if self.k < self.p and np.any(theta[self.k :] != 0.0):
            raise ValueError("theta_star must be exactly zero on tail coordinates")
        object.__setattr__(self, "theta_star", theta)

    @property
    def split(self) -> HeadTailSplit:
        return head_tail_split(self.k, self.p)

    @property
    def theta_norm(self) -> float:
        return float(np.linalg.norm(self.theta_star))

    def column_scales(self) -> np.ndarray:
        """Per-column standard deviations (1 on the head, sqrt(eps) on the tail)."""
        scales = np.ones(self.p)
        scales[self.k :] = np.sqrt(self.eps)
        return scales


def uniform_head_theta(k: int, p: int, norm: float = 1.0) -> np.ndarray:
    """Symmetric head-supported true parameter: (norm/sqrt(k), ..., 0, ..., 0)."""
    if not 1 <= k <= p:
        raise ValueError(f"need 1 <= k <= p, got k={k}, p={p}")
    theta = np.zeros(p)
    theta[:k] = norm / np.sqrt(k)
    return theta


@dataclass(frozen=True)
class Dataset:
    """One draw from the scenario: design matrix X, noise xi, responses y."""

    params: ScenarioParams
    X: np.ndarray = field(repr=False)
    xi: np.ndarray = field(repr=False)
    y: np.ndarray = field(repr=False)

    def __post_init__(self):
        X = freeze(self.X)
        xi = freeze(as_vector(self.xi, "xi"))
        y = freeze(as_vector(self.y, "y"))
        if X.shape != (self.params.n, self.params.p):
            raise ValueError(f"X must be {self.params.n} x {self.params.p}")
        if xi.shape[0] != self.params.n or y.shape[0] != self.params.n:
            raise ValueError("xi and y must have length n")
        gap = np.max(np.abs(y - X @ self.params.theta_star - xi))
        if gap > 1e-12 * max(1.0, float(np.max(np.abs(y)))):
            raise ValueError("y = X theta_star + xi violated beyond 1e-12 relative")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "xi", xi)
        object.__setattr__(self, "y", y)


def generate(params: ScenarioParams, seed: SeedSpec) -> Dataset:
    """Draw one dataset, fully determined by ``seed``.

    Stream consumption order: n*p standard normals for X (row-major), then n
    for the noise.  Head columns keep unit scale, tail columns are scaled by
    sqrt(eps); the noise draw happens even when sigma = 0 so the consumption
    pattern does not depend on sigma.
    """
    stream = derive_stream(seed)
    X = stream.normals((params.n, params.p))
    if params.k < params.p:
        X[:, params.k :] *= np.sqrt(params.eps)
    xi = params.sigma * stream.normals(params.n)
    y = X @ params.theta_star + xi
    return Dataset(params=params, X=X, xi=xi, y=y)


@dataclass(frozen=True)
class McRiskEstimate:
    """Fresh-sample Monte Carlo excess-risk estimate with its standard error."""

    estimate: float
    std_error: float
    samples: int


def mc_excess_risk_estimate(
    params: ScenarioParams, theta_hat, m: int, seed: SeedSpec
) -> McRiskEstimate:
    """Estimate the excess risk of ``theta_hat`` from m fresh (x, y) pairs.

    Returns mean((theta_hat . x - y)^2) - sigma^2 together with the standard
    error of the mean of the squared prediction errors.  Draws are chunked
    (chunk, then its noise) purely for memory; the chunk size is fixed so the
    stream consumption pattern is reproducible.
    """
    theta_hat = as_vector(theta_hat, "theta_hat")
    if theta_hat.shape[0] != params.p:
        raise ValueError("theta_hat must have length p")
    if m < 1:
        raise ValueError("m must be at least 1")
    # (theta_hat - theta_star) . x for x = scales * g equals (w * scales) . g
    # with g standard normal, so only the combined coefficient vector is needed.
    w = (theta_hat - params.theta_star) * params.column_scales()
    stream = derive_stream(seed)
    total = 0.0
    total_sq = 0.0
    done = 0
    while done < m:
        chunk = min(_MC_CHUNK, m - done)
        g = stream.normals((chunk, params.p))
        noise = params.sigma * stream.normals(chunk)
        errs = g @ w - noise
        sq = errs * errs
        total += float(np.sum(sq))
        total_sq += float(np.sum(sq * sq))
        done += chunk
    mean_sq = total / m
    if m > 1:
        var = max(total_sq - m * mean_sq * mean_sq, 0.0) / (m - 1)
        std_error = float(np.sqrt(var / m))
    else:
        std_error = float("inf")
    return McRiskEstimate(estimate=mean_sq - params.sigma**2, std_error=std_error, samples=m)


def mc_excess_risk(params: ScenarioParams, theta_hat, m: int, seed: SeedSpec) -> float:
    """Fresh-sample Monte Carlo excess risk (point estimate only)."""
    return mc_excess_risk_estimate(params, theta_hat, m, seed).estimate
