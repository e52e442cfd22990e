"""Deterministic random streams and the small dense linear-algebra kernels
(Gram solves, operator norms) that the rest of the package builds on."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import cho_factor, cho_solve
from scipy.special import ndtri

__all__ = [
    "RankDeficient",
    "NoConvergence",
    "SeedSpec",
    "Stream",
    "derive_stream",
    "as_matrix",
    "as_vector",
    "gram_solve",
    "op_norm",
]


class RankDeficient(Exception):
    """The Gram matrix X X^T is numerically singular."""


class NoConvergence(Exception):
    """Power iteration hit its iteration cap before reaching tolerance."""


def as_matrix(values, name: str = "matrix") -> np.ndarray:
    """Validate a nonempty 2-D array of finite values, returned as float64."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {arr.shape}")
    if arr.size == 0:
        raise ValueError(f"{name} must be nonempty")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains NaN or Inf entries")
    return arr


def as_vector(values, name: str = "vector") -> np.ndarray:
    """Validate a 1-D array of finite values, returned as float64."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be 1-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains NaN or Inf entries")
    return arr


def freeze(arr: np.ndarray) -> np.ndarray:
    """Return a read-only copy; frozen arrays are safe to share across threads."""
    out = np.array(arr, dtype=np.float64, copy=True)
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class SeedSpec:
    """Address of one independent random stream.

    Stream derivation is a pure function of (master_seed, stream_label,
    index), so equal specs reproduce identical variate sequences and
    distinct (label, index) pairs give statistically independent streams.
    """

    master_seed: int
    stream_label: str
    index: int = 0

    def __post_init__(self):
        if not 0 <= int(self.master_seed) < 2**64:
            raise ValueError("master_seed must be an unsigned 64-bit integer")
        if int(self.index) < 0:
            raise ValueError("index must be nonnegative")

    def child(self, sub_label: str, index: int = 0) -> "SeedSpec":
        """Derive a nested stream address (e.g. one per trial)."""
        return SeedSpec(self.master_seed, f"{self.stream_label}/{sub_label}", index)


_U64_SHIFT = np.uint64(11)
_INV_2_53 = 2.0**-53


class Stream:
    """Deterministic stream of uniform and standard-normal variates.

    Backed by the counter-based Philox-4x64 generator, keyed through a
    SeedSequence over (master_seed, sha256(stream_label)[:16], index).
    Uniforms are built from raw 64-bit words as ((w >> 11) + 0.5) * 2^-53,
    which lies strictly inside (0, 1); normals apply the inverse normal CDF
    (scipy.special.ndtri) to those uniforms.  Exactly one 64-bit word is
    consumed per variate - no rejection step - so the stream position after
    drawing N variates is identical everywhere and output is
    bit-reproducible for a fixed numpy/scipy build.
    """

    def __init__(self, spec: SeedSpec):
        digest = hashlib.sha256(spec.stream_label.encode("utf-8")).digest()
        label_key = [int.from_bytes(digest[i : i + 8], "little") for i in (0, 8)]
        entropy = [int(spec.master_seed), *label_key, int(spec.index)]
        self.spec = spec
        self._bits = np.random.Philox(np.random.SeedSequence(entropy))

    def uniforms(self, shape=None) -> np.ndarray | float:
        """Uniform variates in the open interval (0, 1)."""
        if shape is None:
            return float(self.uniforms(1)[0])
        count = int(np.prod(shape))
        words = self._bits.random_raw(count)
        u = ((words >> _U64_SHIFT).astype(np.float64) + 0.5) * _INV_2_53
        return u.reshape(shape)

    def normals(self, shape=None) -> np.ndarray | float:
        """Standard normal variates via the inverse-CDF transform."""
        if shape is None:
            return float(self.normals(1)[0])
        return ndtri(self.uniforms(shape))


def derive_stream(spec: SeedSpec) -> Stream:
    """Materialize the random stream addressed by ``spec``."""
    return Stream(spec)


def gram_solve(X, y, rel_tol: float = 1e-10) -> np.ndarray:
    """Solve (X X^T) a = y through a Cholesky factorization of the Gram matrix.

    Args:
      X: n x p design matrix (p >= n for a nonsingular Gram in general).
      y: right-hand side of length n.
      rel_tol: a factorization pivot below rel_tol times the largest pivot
        is treated as numerically singular.

    Returns:
      The coefficient vector a with relative residual
      ||X X^T a - y|| / ||y|| at most 1e-8.

    Raises:
      RankDeficient: the factorization failed, a pivot fell below tolerance,
        or the residual check failed; all signal a singular Gram matrix.
    """
    X = as_matrix(X, "X")
    y = as_vector(y, "y")
    if y.shape[0] != X.shape[0]:
        raise ValueError("y length must equal the number of rows of X")
    gram = X @ X.T
    try:
        factor = cho_factor(gram, lower=True, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise RankDeficient(f"Cholesky factorization failed: {exc}") from None
    pivots = np.diagonal(factor[0]) ** 2
    if pivots.min() < rel_tol * pivots.max():
        raise RankDeficient(
            f"pivot ratio {pivots.min() / pivots.max():.3e} below rel_tol {rel_tol:.1e}"
        )
    a = cho_solve(factor, y, check_finite=False)
    y_norm = np.linalg.norm(y)
    if y_norm > 0.0:
        residual = np.linalg.norm(gram @ a - y)
        if residual > 1e-8 * y_norm:
            raise RankDeficient(
                f"relative residual {residual / y_norm:.3e} exceeds 1e-8; "
                "Gram system too ill-conditioned"
            )
    return a


# Fixed pseudorandom restart vector seed; guards against start vectors that
# are orthogonal to the top singular direction.
_RESTART_SEED = SeedSpec(0x9E3779B97F4A7C15, "op-norm/restart", 0)


@lru_cache(maxsize=128)
def _restart_vector(dim: int) -> np.ndarray:
    return freeze(derive_stream(_RESTART_SEED).normals(dim))


# Fallback acceptance threshold at the iteration cap.  When the top two
# eigenvalues of the Gram matrix are separated by less than ~1e-5 relative,
# the eigenvector residual cannot reach rel_tol in any practical iteration
# count, but the Rayleigh value error is then bounded by that (tiny) gap, so
# the estimate is still accurate to ~1e-5 relative.
_LOOSE_REL_TOL = 1e-5


def op_norm(M, rel_tol: float = 1e-10, max_iterations: int = 10_000) -> float:
    """Largest singular value of M via power iteration on the smaller Gram.

    Runs two deterministic starts - the normalized all-ones vector and a
    fixed pseudorandom vector - and keeps the larger converged Rayleigh
    estimate.  A run stops when the residual ||B v - rho v|| falls below
    rel_tol * rho (B the Gram matrix, rho the Rayleigh quotient), which pins
    rho to an eigenvalue of B within relative tolerance; at the iteration
    cap the run is still accepted if the residual is below 1e-5 * rho
    (nearly degenerate top pair, value error bounded by the gap).  The
    returned value is floored at the largest column norm of M, an exact
    lower bound on the operator norm.

    Raises:
      NoConvergence: neither start reached even the degraded tolerance
        within max_iterations; signals a pathological spectrum or a cap that
        is too small.
    """
    M = as_matrix(M, "M")
    if M.shape[0] <= M.shape[1]:
        gram = M @ M.T
    else:
        gram = M.T @ M
    dim = gram.shape[0]
    col_floor = float(np.sqrt(np.max(np.sum(M * M, axis=0))))

    starts = [np.ones(dim)]
    if dim > 1:
        starts.append(_restart_vector(dim))

    best = None
    tiny = np.finfo(float).tiny
    for start in starts:
        v = start / np.linalg.norm(start)
        rho = 0.0
        residual_sq = np.inf
        converged = False
        for _ in range(max_iterations):
            w = gram @ v
            rho = float(v @ w)
            # For unit v: ||w - rho v||^2 = w.w - rho^2.
            ww = float(w @ w)
            residual_sq = max(ww - rho * rho, 0.0)
            if residual_sq <= (rel_tol * max(rho, tiny)) ** 2:
                converged = True
                break
            v = w / np.sqrt(ww)
        if not converged:
            converged = residual_sq <= (_LOOSE_REL_TOL * max(rho, tiny)) ** 2
        if converged and (best is None or rho > best):
            best = rho
    if best is None:
        raise NoConvergence(
            f"power iteration did not converge in {max_iterations} iterations"
        )
    return max(float(np.sqrt(max(best, 0.0))), col_floor)
