"""Walkthrough: the headline experiment.  In the p = n^2, eps = 1/n^2 regime
with a fixed sparse target and unit noise, the minimum-l2 interpolant's risk
falls roughly like 1/n while the minimum-l1 interpolant's risk decays far
slower - sparse interpolation is penalized even though the target itself is
sparse.

Writes risk_separation.svg next to this script when matplotlib is available.
"""

from pathlib import Path

from interplab.harness import ExperimentConfig, aggregate, plot_aggregates, run_sweep

config = ExperimentConfig(
    regime="square_law",
    n_values=(16, 32, 64),
    k=5,
    eps_rule="1/n^2",
    p_rule="n^2",
    sigma=1.0,
    theta_star_norm=1.0,
    methods=("min_l2", "min_l1"),
    trials=20,  # 50 in the acceptance suite; 20 keeps this demo under a minute
    master_seed=20260811,
)

print("sweeping n in", config.n_values, "with p = n^2, eps = 1/n^2, 20 trials/point...")
rows = run_sweep(config)
aggs = aggregate(rows)

print(f"\n{'n':>4} {'method':<8} {'median':>8} {'q10':>8} {'q90':>8} "
      f"{'support':>8} {'l2 curve':>9} {'l1 lower':>9}")
for a in aggs:
    print(f"{a.n:>4} {a.method:<8} {a.median_risk:>8.4f} {a.q10_risk:>8.4f} "
          f"{a.q90_risk:>8.4f} {a.mean_support:>8.1f} {a.ols_curve_value:>9.4f} "
          f"{a.bp_lower_curve_value:>9.4f}")

med = {(a.method, a.n): a.median_risk for a in aggs}
slopes = {a.method: a.fitted_log_slope for a in aggs}
print("\nfitted log-log slopes: "
      + ", ".join(f"{m} = {s:.3f}" for m, s in sorted(slopes.items())))
print("risk ratio l1/l2 by n : "
      + ", ".join(f"n={n}: {med['min_l1', n] / med['min_l2', n]:.2f}" for n in config.n_values))
print("\nThe ratio widens with n: spreading the fitted noise over all p = n^2")
print("coordinates (l2) beats hiding it in n coordinates (l1) at an")
print("increasing rate, exactly the crowd effect the risk decomposition predicts.")

out = Path(__file__).with_name("risk_separation.svg")
plot_aggregates(aggs, out)
print(f"\nwrote {out}")
