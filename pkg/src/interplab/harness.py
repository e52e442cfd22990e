"""Declarative experiment sweeps over scenario sizes, aggregation with theory
overlays, the concentration-check bundle, and their file formats."""

from __future__ import annotations

import dataclasses
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields

import numpy as np

from . import concentration as conc
from . import io as iomod
from . import risk as riskmod
from .interpolators import (
    MIN_L1,
    MIN_L2,
    IterationLimit,
    LpOptions,
    NotInterpolable,
    NumericalBreakdown,
    min_l1,
    min_l2,
)
from .numerics import RankDeficient, SeedSpec
from .scenario import ScenarioParams, generate, mc_excess_risk_estimate, uniform_head_theta

__all__ = [
    "ExperimentConfig",
    "ResultRow",
    "AggregateRow",
    "run_sweep",
    "aggregate",
    "write_result_rows",
    "write_aggregate_rows",
    "plot_aggregates",
    "ConcentrationConfig",
    "CheckOutcome",
    "ConcentrationSuiteReport",
    "concentration_suite",
    "load_experiment_config",
    "load_concentration_config",
]

logger = logging.getLogger("interplab.harness")

REGIMES = ("explicit", "square_law")
KNOWN_METHODS = (MIN_L2, MIN_L1)

# Annotation defaults for the per-point theorem-precondition flags.
SWEEP_DELTA = 0.05
SWEEP_C1 = 1.0


@dataclass(frozen=True)
class ExperimentConfig:
    """Declarative sweep specification.

    In the "square_law" regime every point uses p = n^2 and eps = 1/n^2
    (the canonical fast-OLS / slow-basis-pursuit comparison); "explicit"
    takes numeric eps_rule and p_rule applied to every point.
    """

    regime: str
    n_values: tuple[int, ...]
    k: int
    eps_rule: float | str
    p_rule: int | str
    sigma: float
    theta_star_norm: float
    methods: tuple[str, ...] = (MIN_L2, MIN_L1)
    trials: int = 1
    master_seed: int = 0
    zero_tol: float = 1e-9
    output_path: str = "results.csv"
    mc_check_samples: int = 0

    def __post_init__(self):
        if self.regime not in REGIMES:
            raise iomod.ConfigError(f"regime must be one of {REGIMES}")
        n_values = tuple(int(n) for n in self.n_values)
        if not n_values:
            raise iomod.ConfigError("n_values must be nonempty")
        if any(b <= a for a, b in zip(n_values, n_values[1:])):
            raise iomod.ConfigError("n_values must be strictly increasing")
        object.__setattr__(self, "n_values", n_values)
        methods = tuple(self.methods)
        if not methods or any(m not in KNOWN_METHODS for m in methods):
            raise iomod.ConfigError(f"methods must be a nonempty subset of {KNOWN_METHODS}")
        object.__setattr__(self, "methods", methods)
        if self.regime == "square_law":
            if self.p_rule not in ("n^2",) or self.eps_rule not in ("1/n^2",):
                raise iomod.ConfigError(
                    'square_law regime requires p_rule "n^2" and eps_rule "1/n^2"'
                )
        else:
            if isinstance(self.p_rule, str) or isinstance(self.eps_rule, str):
                raise iomod.ConfigError("explicit regime requires numeric eps_rule and p_rule")
        if self.k < 1 or self.trials < 1:
            raise iomod.ConfigError("k and trials must be at least 1")
        if self.zero_tol <= 0:
            raise iomod.ConfigError("zero_tol must be positive")
        if self.mc_check_samples < 0:
            raise iomod.ConfigError("mc_check_samples must be nonnegative")

    def points(self) -> list[tuple[int, int, float]]:
        """Resolved (n, p, eps) sweep points."""
        out = []
        for n in self.n_values:
            p = n * n if self.p_rule == "n^2" else int(self.p_rule)
            eps = 1.0 / (n * n) if self.eps_rule == "1/n^2" else float(self.eps_rule)
            out.append((n, p, eps))
        return out


_CONFIG_KEYS = {f.name for f in fields(ExperimentConfig)}


def load_experiment_config(path) -> ExperimentConfig:
    doc = iomod.load_yaml_mapping(path)
    return experiment_config_from_mapping(doc, context=str(path))


def experiment_config_from_mapping(doc: dict, context: str = "config") -> ExperimentConfig:
    iomod.check_keys(doc, _CONFIG_KEYS, context)
    doc = dict(doc)
    if doc.get("regime") == "square_law":
        doc.setdefault("p_rule", "n^2")
        doc.setdefault("eps_rule", "1/n^2")
    missing = {"regime", "n_values", "k", "eps_rule", "p_rule", "sigma", "theta_star_norm"} - set(doc)
    if missing:
        raise iomod.ConfigError(f"{context}: missing keys {sorted(missing)}")
    if "methods" in doc:
        doc["methods"] = tuple(doc["methods"])
    doc["n_values"] = tuple(doc["n_values"])
    return ExperimentConfig(**doc)


@dataclass(frozen=True)
class ResultRow:
    """One (point, trial, method) outcome, flattened for the results table."""

    n: int
    p: int
    k: int
    eps: float
    sigma: float
    method: str
    trial_index: int
    seed: int
    excess_risk_total: float
    head_term: float
    tail_term: float
    support_size: int
    l1_norm: float
    l2_norm: float
    residual: float
    solve_seconds: float
    precondition_flags: str
    status: str = "ok"
    mc_risk: float | None = None
    mc_se: float | None = None


def _global_index(n: int, trial: int) -> int:
    # Pure function of the point's n and the trial, so adding sweep points
    # never changes the randomness of existing ones.
    return (n << 32) | trial


def _run_cell(config: ExperimentConfig, n: int, p: int, eps: float, trial: int) -> list[ResultRow]:
    params = ScenarioParams(
        k=config.k,
        p=p,
        n=n,
        eps=eps,
        sigma=config.sigma,
        theta_star=uniform_head_theta(config.k, p, config.theta_star_norm),
    )
    gidx = _global_index(n, trial)
    dataset = generate(params, SeedSpec(config.master_seed, "trial", gidx))
    flags = riskmod.theorem_preconditions(
        params, riskmod.BoundInputs(s=n, delta=SWEEP_DELTA, c1=SWEEP_C1)
    ).flags()

    rows = []
    common = dict(
        n=n, p=p, k=config.k, eps=eps, sigma=config.sigma,
        trial_index=trial, seed=gidx, precondition_flags=flags,
    )
    for method in config.methods:
        start = time.perf_counter()
        try:
            if method == MIN_L2:
                interp = min_l2(dataset.X, dataset.y, zero_tol=config.zero_tol)
            else:
                interp = min_l1(dataset.X, dataset.y, LpOptions(zero_tol=config.zero_tol))
            seconds = time.perf_counter() - start
            report = riskmod.excess_risk(params, interp.theta_hat, method)
            mc_risk = mc_se = None
            if config.mc_check_samples > 0:
                est = mc_excess_risk_estimate(
                    params,
                    interp.theta_hat,
                    config.mc_check_samples,
                    SeedSpec(config.master_seed, f"mc/{method}", gidx),
                )
                mc_risk, mc_se = est.estimate, est.std_error
            rows.append(
                ResultRow(
                    method=method,
                    excess_risk_total=report.total,
                    head_term=report.head_term,
                    tail_term=report.tail_term,
                    support_size=interp.support_size,
                    l1_norm=interp.l1_norm,
                    l2_norm=interp.l2_norm,
                    residual=interp.residual,
                    solve_seconds=seconds,
                    mc_risk=mc_risk,
                    mc_se=mc_se,
                    **common,
                )
            )
        except (NotInterpolable, IterationLimit, NumericalBreakdown, RankDeficient) as exc:
            logger.warning("solver failure at n=%d trial=%d method=%s: %s", n, trial, method, exc)
            nan = float("nan")
            rows.append(
                ResultRow(
                    method=method,
                    excess_risk_total=nan, head_term=nan, tail_term=nan,
                    support_size=-1, l1_norm=nan, l2_norm=nan, residual=nan,
                    solve_seconds=time.perf_counter() - start,
                    status=type(exc).__name__,
                    **common,
                )
            )
    return rows


def _run_cell_star(args) -> list[ResultRow]:
    return _run_cell(*args)


def run_sweep(config: ExperimentConfig, threads: int = 1) -> list[ResultRow]:
    """Run every (point, trial, method) cell of the sweep.

    Each cell derives its own random stream, so results are identical at any
    thread count; the returned rows are in canonical (n, method, trial)
    order.  Points with p < n are skipped with a warning.  Per-row solver
    failures are recorded in the row's status, never raised.
    """
    points = []
    for n, p, eps in config.points():
        if p < n:
            logger.warning("skipping sweep point n=%d: p=%d < n", n, p)
            continue
        points.append((n, p, eps))
    cells = [(config, n, p, eps, trial) for n, p, eps in points for trial in range(config.trials)]
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            nested = list(pool.map(_run_cell_star, cells, chunksize=1))
    else:
        nested = [_run_cell(*cell) for cell in cells]
    rows = [row for group in nested for row in group]
    rows.sort(key=lambda r: (r.n, r.method, r.trial_index))
    return rows


@dataclass(frozen=True)
class AggregateRow:
    """Per-(n, method) summary with theory-curve overlays.

    fitted_log_slope is the least-squares slope of log(median risk) against
    log n across the method's sweep points (None with fewer than two usable
    points); empirical_constant_estimate is the median over trials of
    risk * s * ln^2(3p/s) / (sigma^2 n) at the observed support size s, an
    estimate of an admissible constant for the sparse lower bound.
    """

    n: int
    method: str
    trials: int
    mean_risk: float
    median_risk: float
    q10_risk: float
    q90_risk: float
    mean_support: float
    ols_curve_value: float
    bp_lower_curve_value: float
    empirical_constant_estimate: float | None
    fitted_log_slope: float | None


def aggregate(rows: list[ResultRow]) -> list[AggregateRow]:
    """Group result rows by (n, method) and attach curves and slopes."""
    if not rows:
        raise ValueError("rows must be nonempty")
    ok = [r for r in rows if r.status == "ok"]
    if not ok:
        raise ValueError("no successful rows to aggregate")

    groups: dict[tuple[str, int], list[ResultRow]] = {}
    for r in ok:
        groups.setdefault((r.method, r.n), []).append(r)

    # Cross-point slope per method, from log(median risk) vs log n.
    slopes: dict[str, float | None] = {}
    for method in sorted({m for m, _ in groups}):
        pts = sorted((n, np.median([r.excess_risk_total for r in grp]))
                     for (m, n), grp in groups.items() if m == method)
        usable = [(n, med) for n, med in pts if med > 0.0]
        if len(usable) >= 2:
            slope = np.polyfit(np.log([n for n, _ in usable]),
                               np.log([m for _, m in usable]), 1)[0]
            slopes[method] = float(slope)
        else:
            slopes[method] = None

    out = []
    for (method, n), grp in sorted(groups.items(), key=lambda kv: (kv[0][1], kv[0][0])):
        risks = np.array([r.excess_risk_total for r in grp])
        supports = np.array([r.support_size for r in grp], dtype=float)
        p, k, eps, sigma = grp[0].p, grp[0].k, grp[0].eps, grp[0].sigma
        constants = [
            r.excess_risk_total * s * math.log(3 * p / s) ** 2 / (sigma**2 * n)
            for r in grp
            if (s := r.support_size) >= 1 and sigma > 0
        ]
        out.append(
            AggregateRow(
                n=n,
                method=method,
                trials=len(grp),
                mean_risk=float(risks.mean()),
                median_risk=float(np.median(risks)),
                q10_risk=float(np.quantile(risks, 0.10)),
                q90_risk=float(np.quantile(risks, 0.90)),
                mean_support=float(supports.mean()),
                ols_curve_value=riskmod.ols_theory_curve(k, n, p, eps),
                bp_lower_curve_value=riskmod.sparse_lower_curve(sigma, n, n, p),
                empirical_constant_estimate=float(np.median(constants)) if constants else None,
                fitted_log_slope=slopes[method],
            )
        )
    return out


_ROW_FIELDS = [f.name for f in fields(ResultRow)]
_AGG_FIELDS = [f.name for f in fields(AggregateRow)]


def write_result_rows(path, rows: list[ResultRow], include_timing: bool = False) -> None:
    """Results CSV; one row per (point, trial, method), 17-digit floats.

    solve_seconds is wall-clock and would break byte-identical reruns, so it
    is written only on request.
    """
    names = [f for f in _ROW_FIELDS if include_timing or f != "solve_seconds"]
    table = [[getattr(r, name) for name in names] for r in rows]
    iomod.write_csv(path, names, table)


def write_aggregate_rows(path, aggs: list[AggregateRow]) -> None:
    table = [[getattr(a, name) for name in _AGG_FIELDS] for a in aggs]
    iomod.write_csv(path, _AGG_FIELDS, table)


def rows_to_dicts(rows) -> list[dict]:
    return [dataclasses.asdict(r) for r in rows]


def plot_aggregates(aggs: list[AggregateRow], path) -> None:
    """Log-log risk-vs-n plot, one series per method, theory curves overlaid."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    methods = sorted({a.method for a in aggs})
    for method in methods:
        pts = sorted((a.n, a.median_risk, a.q10_risk, a.q90_risk)
                     for a in aggs if a.method == method)
        ns = [q[0] for q in pts]
        med = [q[1] for q in pts]
        ax.plot(ns, med, "o-", label=f"{method} (median)")
        ax.fill_between(ns, [q[2] for q in pts], [q[3] for q in pts], alpha=0.15)
    pts = sorted({(a.n, a.ols_curve_value) for a in aggs})
    ax.plot([q[0] for q in pts], [q[1] for q in pts], "k--", lw=1,
            label="k/n + eps p/n + n/p (shape)")
    pts = sorted({(a.n, a.bp_lower_curve_value) for a in aggs})
    ax.plot([q[0] for q in pts], [q[1] for q in pts], "k:", lw=1,
            label="sigma^2 / ln^2(3p/n) (c=1)")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("n")
    ax.set_ylabel("excess risk")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


@dataclass(frozen=True)
class Chi2Config:
    n: int = 100
    t: float = 1.0


@dataclass(frozen=True)
class YNormConfig:
    n: int = 100
    k: int = 5
    p: int = 200
    eps: float = 0.01
    sigma: float = 1.0
    theta_star_norm: float = 1.0
    delta: float = 0.05


@dataclass(frozen=True)
class HeadOpNormConfig:
    n: int = 100
    k: int = 5
    delta: float = 0.05


@dataclass(frozen=True)
class SparseBlowupConfig:
    n: int = 8
    k: int = 5
    p: int = 17
    eps: float = 0.25
    sigma: float = 1.0
    theta_star_norm: float = 1.0
    s: int = 3
    t: float = 1.0
    subset_cap: int = conc.DEFAULT_SUBSET_CAP


@dataclass(frozen=True)
class ConcentrationConfig:
    trials: int = 10_000
    master_seed: int = 0
    chi2: Chi2Config = field(default_factory=Chi2Config)
    y_norm: YNormConfig = field(default_factory=YNormConfig)
    head_opnorm: HeadOpNormConfig = field(default_factory=HeadOpNormConfig)
    sparse_blowup: SparseBlowupConfig = field(default_factory=SparseBlowupConfig)


_SECTION_TYPES = {
    "chi2": Chi2Config,
    "y_norm": YNormConfig,
    "head_opnorm": HeadOpNormConfig,
    "sparse_blowup": SparseBlowupConfig,
}


def load_concentration_config(path) -> ConcentrationConfig:
    return concentration_config_from_mapping(iomod.load_yaml_mapping(path), str(path))


def concentration_config_from_mapping(doc: dict, context: str = "config") -> ConcentrationConfig:
    allowed = {"trials", "master_seed", *_SECTION_TYPES}
    iomod.check_keys(doc, allowed, context)
    kwargs: dict = {}
    for key, value in doc.items():
        if key in _SECTION_TYPES:
            section_type = _SECTION_TYPES[key]
            if not isinstance(value, dict):
                raise iomod.ConfigError(f"{context}: section {key} must be a mapping")
            iomod.check_keys(value, {f.name for f in fields(section_type)}, f"{context}.{key}")
            kwargs[key] = section_type(**value)
        else:
            kwargs[key] = value
    return ConcentrationConfig(**kwargs)


@dataclass(frozen=True)
class CheckOutcome:
    name: str
    report: conc.TailCheckReport | None
    error: str | None = None

    @property
    def passed(self) -> bool:
        if self.report is None:
            return False
        r = self.report
        return r.empirical_rate >= r.claimed_rate - r.mc_half_width


@dataclass(frozen=True)
class ConcentrationSuiteReport:
    outcomes: tuple[CheckOutcome, ...]

    @property
    def all_passed(self) -> bool:
        return all(o.passed for o in self.outcomes if o.error is None) and any(
            o.error is None for o in self.outcomes
        )


def concentration_suite(config: ConcentrationConfig) -> ConcentrationSuiteReport:
    """Run all four lemma validators; per-check errors are isolated."""
    seed = SeedSpec(config.master_seed, "concentration", 0)
    outcomes = []

    def attempt(name, fn):
        try:
            outcomes.append(CheckOutcome(name, fn()))
        except conc.BudgetExceeded as exc:
            outcomes.append(CheckOutcome(name, None, error=f"BudgetExceeded: {exc}"))

    c = config.chi2
    attempt("chi2_tail", lambda: conc.chi2_tail_check(
        c.n, c.t, config.trials, seed.child("chi2")))

    yv = config.y_norm
    y_params = ScenarioParams(
        k=yv.k, p=yv.p, n=yv.n, eps=yv.eps, sigma=yv.sigma,
        theta_star=uniform_head_theta(yv.k, yv.p, yv.theta_star_norm),
    )
    attempt("y_norm_lower", lambda: conc.y_norm_lower_check(
        y_params, yv.delta, config.trials, seed.child("y_norm")))

    h = config.head_opnorm
    attempt("head_opnorm", lambda: conc.head_opnorm_check(
        h.n, h.k, h.delta, config.trials, seed.child("head_opnorm")))

    s = config.sparse_blowup
    s_params = ScenarioParams(
        k=s.k, p=s.p, n=s.n, eps=s.eps, sigma=s.sigma,
        theta_star=uniform_head_theta(s.k, s.p, s.theta_star_norm),
    )
    attempt("sparse_blowup", lambda: conc.sparse_blowup_check(
        s_params, s.s, s.t, config.trials, seed.child("sparse_blowup"), s.subset_cap))

    return ConcentrationSuiteReport(outcomes=tuple(outcomes))
