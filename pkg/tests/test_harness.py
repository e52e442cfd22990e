import dataclasses
import math

import pytest

from interplab import harness
from interplab.harness import (
    ConcentrationConfig,
    ExperimentConfig,
    ResultRow,
    aggregate,
    concentration_suite,
    experiment_config_from_mapping,
    run_sweep,
)
from interplab.interpolators import NotInterpolable
from interplab.io import ConfigError


def small_config(**overrides):
    base = dict(
        regime="explicit", n_values=(6, 8), k=2, eps_rule=0.05, p_rule=24,
        sigma=1.0, theta_star_norm=1.0, methods=("min_l2", "min_l1"),
        trials=3, master_seed=77,
    )
    base.update(overrides)
    return ExperimentConfig(**base)


# ------------------------------------------------------------- config


def test_config_validation_errors():
    with pytest.raises(ConfigError):
        small_config(regime="bogus")
    with pytest.raises(ConfigError):
        small_config(n_values=())
    with pytest.raises(ConfigError):
        small_config(n_values=(8, 8))
    with pytest.raises(ConfigError):
        small_config(n_values=(8, 6))
    with pytest.raises(ConfigError):
        small_config(methods=("ridge",))
    with pytest.raises(ConfigError):
        small_config(regime="square_law")  # numeric rules contradict square law


def test_square_law_point_resolution():
    cfg = small_config(regime="square_law", eps_rule="1/n^2", p_rule="n^2",
                       n_values=(4, 6))
    assert cfg.points() == [(4, 16, 1 / 16), (6, 36, 1 / 36)]


def test_config_from_mapping_unknown_key():
    doc = dict(regime="explicit", n_values=[4], k=1, eps_rule=0.1, p_rule=8,
               sigma=1.0, theta_star_norm=1.0, frobnicate=True)
    with pytest.raises(ConfigError):
        experiment_config_from_mapping(doc)


def test_config_from_mapping_square_law_defaults():
    doc = dict(regime="square_law", n_values=[4, 8], k=1, sigma=1.0,
               theta_star_norm=1.0)
    cfg = experiment_config_from_mapping(doc)
    assert cfg.p_rule == "n^2" and cfg.eps_rule == "1/n^2"


# ------------------------------------------------------------- sweep


def test_sweep_deterministic():
    cfg = small_config()
    rows1 = run_sweep(cfg)
    rows2 = run_sweep(cfg)
    # everything except wall time must match exactly
    assert len(rows1) == len(rows2)
    for a, b in zip(rows1, rows2):
        da, db = dataclasses.asdict(a), dataclasses.asdict(b)
        da.pop("solve_seconds"), db.pop("solve_seconds")
        assert da == db


def test_sweep_row_consistency():
    rows = run_sweep(small_config())
    assert len(rows) == 2 * 2 * 3  # points x methods x trials
    for r in rows:
        assert r.status == "ok"
        assert r.excess_risk_total == r.head_term + r.tail_term
        assert r.excess_risk_total >= 0.0
        if r.method == "min_l1":
            assert r.support_size <= r.n
        assert r.residual <= 1e-8


def test_sweep_zero_problem():
    cfg = small_config(sigma=0.0, theta_star_norm=0.0, trials=2)
    rows = run_sweep(cfg)
    for r in rows:
        assert r.excess_risk_total == 0.0
        assert r.l2_norm == 0.0 and r.l1_norm == 0.0


def test_sweep_skips_underdetermined_points(caplog):
    cfg = small_config(n_values=(6, 30), p_rule=24, trials=1)
    with caplog.at_level("WARNING", logger="interplab.harness"):
        rows = run_sweep(cfg)
    assert {r.n for r in rows} == {6}
    assert any("skipping" in rec.message for rec in caplog.records)


def test_sweep_adding_points_preserves_existing_rows():
    cfg1 = small_config(n_values=(6,), trials=2)
    cfg2 = small_config(n_values=(6, 8), trials=2)
    rows1 = [r for r in run_sweep(cfg1)]
    rows2 = [r for r in run_sweep(cfg2) if r.n == 6]
    for a, b in zip(rows1, rows2):
        assert a.excess_risk_total == b.excess_risk_total
        assert a.seed == b.seed


def test_sweep_mc_cross_check_columns():
    cfg = small_config(n_values=(6,), trials=2, mc_check_samples=20_000)
    rows = run_sweep(cfg)
    for r in rows:
        assert r.mc_risk is not None and r.mc_se is not None
        assert abs(r.mc_risk - r.excess_risk_total) <= 5.0 * r.mc_se


def test_sweep_solver_failure_is_data(monkeypatch):
    def boom(*args, **kwargs):
        raise NotInterpolable("forced failure")

    monkeypatch.setattr(harness, "min_l1", boom)
    rows = run_sweep(small_config(n_values=(6,), trials=1))
    by_method = {r.method: r for r in rows}
    assert by_method["min_l1"].status == "NotInterpolable"
    assert math.isnan(by_method["min_l1"].excess_risk_total)
    assert by_method["min_l1"].support_size == -1
    assert by_method["min_l2"].status == "ok"


# ------------------------------------------------------------- aggregate


def synthetic_row(n, method, risk, support=4, p=None):
    p = p or 4 * n
    return ResultRow(
        n=n, p=p, k=2, eps=0.05, sigma=1.0, method=method, trial_index=0,
        seed=0, excess_risk_total=risk, head_term=risk, tail_term=0.0,
        support_size=support, l1_norm=1.0, l2_norm=1.0, residual=0.0,
        solve_seconds=0.0, precondition_flags="", status="ok",
    )


def test_aggregate_single_row():
    row = synthetic_row(8, "min_l2", 0.5)
    (agg,) = aggregate([row])
    assert agg.median_risk == 0.5 and agg.mean_risk == 0.5
    assert agg.q10_risk == agg.q90_risk == 0.5
    assert agg.fitted_log_slope is None


def test_aggregate_two_point_slope_exact():
    rows = [synthetic_row(8, "min_l2", 0.5), synthetic_row(16, "min_l2", 0.25)]
    aggs = aggregate(rows)
    for a in aggs:
        assert a.fitted_log_slope == pytest.approx(-1.0)


def test_aggregate_quantile_order_and_curves():
    rows = [synthetic_row(8, "min_l1", r) for r in (0.1, 0.4, 0.2, 0.9, 0.3)]
    (agg,) = aggregate(rows)
    assert agg.q10_risk <= agg.median_risk <= agg.q90_risk
    assert agg.ols_curve_value == pytest.approx(2 / 8 + 0.05 * 32 / 8 + 8 / 32)
    assert agg.bp_lower_curve_value == pytest.approx(
        1.0 / math.log(3 * 32 / 8) ** 2
    )
    const = 0.3 * 4 * math.log(3 * 32 / 4) ** 2 / 8
    assert agg.empirical_constant_estimate == pytest.approx(const)


def test_aggregate_ignores_failed_rows():
    good = synthetic_row(8, "min_l2", 0.5)
    bad = dataclasses.replace(synthetic_row(8, "min_l2", float("nan")), status="IterationLimit")
    (agg,) = aggregate([good, bad])
    assert agg.trials == 1 and agg.median_risk == 0.5


def test_aggregate_empty_rejected():
    with pytest.raises(ValueError):
        aggregate([])


# ------------------------------------------------------------- suite


def test_concentration_suite_small():
    cfg = ConcentrationConfig(trials=300, master_seed=5)
    report = concentration_suite(cfg)
    names = [o.name for o in report.outcomes]
    assert names == ["chi2_tail", "y_norm_lower", "head_opnorm", "sparse_blowup"]
    assert report.all_passed


def test_concentration_suite_budget_isolation():
    cfg = ConcentrationConfig(
        trials=50, master_seed=5,
        sparse_blowup=harness.SparseBlowupConfig(n=4, k=2, p=40, s=12, subset_cap=100),
    )
    report = concentration_suite(cfg)
    by_name = {o.name: o for o in report.outcomes}
    assert by_name["sparse_blowup"].error is not None
    assert by_name["chi2_tail"].error is None and by_name["chi2_tail"].passed
