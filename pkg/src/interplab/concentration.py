"""Monte Carlo validators for the concentration lemmas behind the risk lower
bounds, and exact/heuristic evaluation of the sparse-submatrix operator-norm
maximum."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations

import numpy as np

from . import scenario as sc
from .numerics import SeedSpec, as_matrix, derive_stream, op_norm

__all__ = [
    "BudgetExceeded",
    "TailCheckReport",
    "BlowupCheckReport",
    "SparseOpNormReport",
    "chi2_tail_check",
    "y_norm_lower_check",
    "head_opnorm_check",
    "sparse_opnorm_max",
    "sparse_blowup_check",
]

# Largest number of column subsets enumerated exhaustively.
DEFAULT_SUBSET_CAP = 2_000_000

_EIG_BATCH = 65_536


class BudgetExceeded(Exception):
    """Exhaustive subset enumeration was requested above the configured cap."""


@dataclass(frozen=True)
class TailCheckReport:
    """Outcome of one Monte Carlo tail check.

    empirical_rate is the fraction of trials on which the lemma's event held;
    claimed_rate is the lemma's guaranteed probability; mc_half_width is the
    3-sigma binomial band 3 * sqrt(r (1 - r) / trials) evaluated at
    r = claimed_rate.  A one-sided guarantee passes when
    empirical_rate >= claimed_rate - mc_half_width.
    """

    trials: int
    threshold: float
    empirical_rate: float
    claimed_rate: float
    mc_half_width: float


@dataclass(frozen=True)
class BlowupCheckReport(TailCheckReport):
    """Tail check for the sparse blow-up lemma with the fitted constant."""

    fitted_c: float = float("nan")


def _report(trials, threshold, empirical_rate, claimed_rate, cls=TailCheckReport, **extra):
    r = min(max(claimed_rate, 0.0), 1.0)
    half_width = 3.0 * math.sqrt(r * (1.0 - r) / trials)
    return cls(
        trials=trials,
        threshold=float(threshold),
        empirical_rate=float(empirical_rate),
        claimed_rate=float(claimed_rate),
        mc_half_width=half_width,
        **extra,
    )


def chi2_tail_check(n: int, t: float, trials: int, seed: SeedSpec) -> TailCheckReport:
    """Chi-squared lower-tail bound: Pr(q >= n - 2 sqrt(t n)) >= 1 - e^{-t}.

    q is drawn as the sum of n squared standard normals.  The bound is loose,
    so the empirical rate typically sits well above the claimed one.
    """
    if t < 0:
        raise ValueError("t must be nonnegative")
    if trials < 1:
        raise ValueError("trials must be at least 1")
    stream = derive_stream(seed)
    threshold = n - 2.0 * math.sqrt(t * n)
    hits = 0
    done = 0
    # Chunked so trials * n never materializes more than ~1e7 doubles.
    chunk_rows = max(1, int(1e7) // max(n, 1))
    while done < trials:
        rows = min(chunk_rows, trials - done)
        g = stream.normals((rows, n))
        q = np.sum(g * g, axis=1)
        hits += int(np.count_nonzero(q >= threshold))
        done += rows
    return _report(trials, threshold, hits / trials, 1.0 - math.exp(-t))


def y_norm_lower_check(
    params: sc.ScenarioParams, delta: float, trials: int, seed: SeedSpec
) -> TailCheckReport:
    """Response-norm lower bound:
    ||y||^2 >= (sigma^2 + ||theta_star||^2) n (1 - 2 sqrt(ln(1/delta)/n))
    with probability at least 1 - delta.

    Generates full datasets end to end rather than sampling y directly, so
    the check also exercises the generator.
    """
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    n = params.n
    threshold = (
        (params.sigma**2 + params.theta_norm**2)
        * n
        * (1.0 - 2.0 * math.sqrt(math.log(1.0 / delta) / n))
    )
    hits = 0
    for i in range(trials):
        ds = sc.generate(params, seed.child("trial", i))
        if float(ds.y @ ds.y) >= threshold:
            hits += 1
    return _report(trials, threshold, hits / trials, 1.0 - delta)


def head_opnorm_check(
    n: int, k: int, delta: float, trials: int, seed: SeedSpec
) -> TailCheckReport:
    """Gaussian-matrix operator-norm bound:
    ||G||_op <= sqrt(n) + sqrt(k) + sqrt(2 ln(2/delta)) for an n x k standard
    normal matrix, with probability at least 1 - delta.
    """
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    stream = derive_stream(seed)
    threshold = math.sqrt(n) + math.sqrt(k) + math.sqrt(2.0 * math.log(2.0 / delta))
    hits = 0
    for _ in range(trials):
        g = stream.normals((n, k))
        if op_norm(g, rel_tol=1e-8) <= threshold:
            hits += 1
    return _report(trials, threshold, hits / trials, 1.0 - delta)


@dataclass(frozen=True)
class SparseOpNormReport:
    """Maximum operator norm over s-column submatrices of the tail block."""

    s: int
    value: float
    attaining_set: np.ndarray
    exhaustive: bool
    bound_value: float | None = None
    fitted_c: float | None = None


@lru_cache(maxsize=32)
def _subset_indices(m: int, s: int) -> np.ndarray:
    return np.array(list(combinations(range(m), s)), dtype=np.intp)


def _batched_top_sv(gram: np.ndarray, subsets: np.ndarray) -> np.ndarray:
    """Largest singular value of each column subset via its small Gram block."""
    out = np.empty(subsets.shape[0])
    for lo in range(0, subsets.shape[0], _EIG_BATCH):
        idx = subsets[lo : lo + _EIG_BATCH]
        blocks = gram[idx[:, :, None], idx[:, None, :]]
        eigs = np.linalg.eigvalsh(blocks)[:, -1]
        out[lo : lo + idx.shape[0]] = np.sqrt(np.maximum(eigs, 0.0))
    return out


_HEURISTIC_SEED = SeedSpec(0xC0FFEE, "sparse-opnorm/restarts", 0)


def sparse_opnorm_max(
    X,
    tail_start: int,
    s: int,
    mode: str = "exhaustive",
    *,
    subset_cap: int = DEFAULT_SUBSET_CAP,
    restarts: int = 8,
    seed: SeedSpec | None = None,
    eps: float | None = None,
    t: float | None = None,
) -> SparseOpNormReport:
    """Maximum of ||X_S||_op over subsets S of the tail columns with |S| <= s.

    The maximum over |S| <= s is attained at |S| = s because appending a
    column never decreases the operator norm, so only size-s subsets are
    scanned.  "exhaustive" enumerates all C(|T|, s) of them (error above
    subset_cap) and is exact; "heuristic" runs greedy column addition from
    the best single column plus `restarts` seeded random starts and returns
    a lower bound flagged exhaustive=False.

    When the scenario context (eps, t) is supplied, the report also carries
    fitted_c = value / (sqrt(eps) (sqrt(s) ln(3|T|/s) + sqrt(n) + t)) and the
    matching right-hand side.
    """
    X = as_matrix(X, "X")
    n, p = X.shape
    if not 0 <= tail_start < p:
        raise ValueError("tail_start must be a valid column index")
    m = p - tail_start
    if not 1 <= s <= m:
        raise ValueError(f"need 1 <= s <= {m}, got s={s}")
    tail = X[:, tail_start:]
    gram = tail.T @ tail

    if mode == "exhaustive":
        n_subsets = math.comb(m, s)
        if n_subsets > subset_cap:
            raise BudgetExceeded(
                f"C({m}, {s}) = {n_subsets} subsets exceeds cap {subset_cap}"
            )
        subsets = _subset_indices(m, s)
        values = _batched_top_sv(gram, subsets)
        best = int(np.argmax(values))
        value = float(values[best])
        attaining = subsets[best] + tail_start
        exhaustive = True
    elif mode == "heuristic":
        stream = derive_stream(seed or _HEURISTIC_SEED)
        starts = [int(np.argmax(np.diagonal(gram)))]
        for _ in range(restarts):
            starts.append(int(stream.uniforms() * m) % m)
        value, attaining = -np.inf, None
        for start in dict.fromkeys(starts):
            chosen = [start]
            while len(chosen) < s:
                rest = np.setdiff1d(np.arange(m), chosen)
                cand = np.concatenate(
                    [np.broadcast_to(chosen, (rest.size, len(chosen))), rest[:, None]],
                    axis=1,
                )
                vals = _batched_top_sv(gram, cand)
                chosen.append(int(rest[np.argmax(vals)]))
            top = float(
                op_norm(tail[:, np.sort(chosen)], rel_tol=1e-10)
            )
            if top > value:
                value, attaining = top, np.sort(chosen) + tail_start
        exhaustive = False
    else:
        raise ValueError(f"unknown mode {mode!r}")

    fitted_c = bound = None
    if eps is not None and t is not None:
        denom = math.sqrt(eps) * (math.sqrt(s) * math.log(3 * m / s) + math.sqrt(n) + t)
        fitted_c = value / denom
        bound = fitted_c * denom
    return SparseOpNormReport(
        s=s,
        value=value,
        attaining_set=np.asarray(attaining, dtype=np.intp),
        exhaustive=exhaustive,
        bound_value=bound,
        fitted_c=fitted_c,
    )


def sparse_blowup_check(
    params: sc.ScenarioParams,
    s: int,
    t: float,
    trials: int,
    seed: SeedSpec,
    subset_cap: int = DEFAULT_SUBSET_CAP,
) -> BlowupCheckReport:
    """Sparse blow-up lemma check with an empirically fitted constant.

    The lemma bounds max_{S in tail, |S| <= s} ||X_S||_op by
    c sqrt(eps) (sqrt(s) ln(3(p-k)/s) + sqrt(n) + t) except with probability
    e^{-t}, for an unspecified absolute c.  fitted_c is the (1 - e^{-t})
    upper order statistic of max / denominator across trials, i.e. the
    smallest constant making the event hold at the claimed rate on this
    sample; the report evaluates the event at that constant.
    """
    if t < 1.0:
        raise ValueError("the lemma requires t >= 1")
    m = params.p - params.k
    if not 1 <= s <= m:
        raise ValueError(f"need 1 <= s <= p - k = {m}")
    if math.comb(m, s) > subset_cap:
        raise BudgetExceeded(
            f"C({m}, {s}) = {math.comb(m, s)} subsets exceeds cap {subset_cap}"
        )
    denom = math.sqrt(params.eps) * (
        math.sqrt(s) * math.log(3 * m / s) + math.sqrt(params.n) + t
    )
    maxima = np.empty(trials)
    for i in range(trials):
        ds = sc.generate(params, seed.child("trial", i))
        maxima[i] = sparse_opnorm_max(
            ds.X, params.k, s, "exhaustive", subset_cap=subset_cap
        ).value
    claimed = 1.0 - math.exp(-t)
    fitted_c = float(np.quantile(maxima / denom, claimed, method="higher"))
    threshold = fitted_c * denom
    empirical = float(np.mean(maxima <= threshold))
    return _report(
        trials, threshold, empirical, claimed, cls=BlowupCheckReport, fitted_c=fitted_c
    )
