"""Walkthrough: Monte Carlo validation of the concentration inequalities the
risk analysis leans on.

Each check simulates its random quantity many times and compares the
fraction of trials on which the claimed event holds against the guaranteed
probability minus a 3-sigma binomial band.  These are one-sided guarantees:
the empirical rate may (and usually does) sit far above the claim.
"""

from interplab.harness import (
    Chi2Config,
    ConcentrationConfig,
    HeadOpNormConfig,
    SparseBlowupConfig,
    YNormConfig,
    concentration_suite,
)

config = ConcentrationConfig(
    trials=3000,
    master_seed=17,
    chi2=Chi2Config(n=100, t=1.0),
    y_norm=YNormConfig(n=100, k=5, p=200, eps=0.01, sigma=1.0,
                       theta_star_norm=1.0, delta=0.05),
    head_opnorm=HeadOpNormConfig(n=100, k=5, delta=0.05),
    sparse_blowup=SparseBlowupConfig(n=8, k=5, p=17, eps=0.25, s=3, t=1.0),
)

print(f"running 4 validators at {config.trials} trials each...\n")
report = concentration_suite(config)

print(f"{'check':<16} {'empirical':>10} {'claimed':>9} {'band':>7}  verdict")
for outcome in report.outcomes:
    r = outcome.report
    verdict = "pass" if outcome.passed else "FAIL"
    print(f"{outcome.name:<16} {r.empirical_rate:>10.4f} {r.claimed_rate:>9.4f} "
          f"{r.mc_half_width:>7.4f}  {verdict}")
    if hasattr(r, "fitted_c"):
        print(f"{'':<16} fitted constant for the sparse blow-up bound: c = {r.fitted_c:.3f}")

print("\nchi2_tail      : chi-squared(n) stays above n - 2 sqrt(tn) except w.p. e^-t")
print("y_norm_lower   : ||y||^2 >= (sigma^2 + ||theta*||^2) n (1 - 2 sqrt(ln(1/d)/n))")
print("head_opnorm    : ||n x k Gaussian||_op <= sqrt(n) + sqrt(k) + sqrt(2 ln(2/d))")
print("sparse_blowup  : max over s-column tail submatrices of ||X_S||_op, with the")
print("                 smallest constant making the bound hold at rate 1 - e^-t")
