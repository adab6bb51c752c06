"""Small posterior contraction-rate study.

We sweep n over a grid, estimate the posterior-average prediction error by
Monte Carlo, and compare against the Proposition-1 bound derived from the
rate formula eps_n.  The fitted log-log slope should be close to -1,
matching the 1/n decay of eps_n at fixed rank.
"""

import numpy as np

from frrr import FamilySpec, RateStudyConfig, hellinger_consistency_check, \
    run_rate_study

cfg = RateStudyConfig(
    family=FamilySpec("gaussian"), p=4, q=3, r=1,
    n_grid=(100, 200, 400), r_grid=(2,), n_ref=200,
    replications=4, n_steps=1500, burn_in=500, thin=5, seed=11)

res = run_rate_study(cfg)
print(f"{'n':>5} {'r':>2} {'mean err':>10} {'prop1 bound':>12} {'freq':>6}")
for c in res.cells:
    print(f"{c.n:5d} {c.r:2d} {np.mean(c.pred_err):10.5f} "
          f"{c.prop1_bound:12.5f} {c.thm3_frequency:6.2f}")
print(f"\nlog-log slope of mean error vs n: {res.slope:.3f}  (theory: -1)")

for row in hellinger_consistency_check(res):
    print(f"n={row['n']:4d} r={row['r']} avg H^2 to truth = "
          f"{row['hellinger_sq']:.5f}")
