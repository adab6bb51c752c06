"""Closed-form divergences, brute-force cross-checks, and the lemma bounds.

Within one exponential family the KL and Renyi divergences between laws at
natural parameters theta and zeta have closed forms in the cumulant b.  We
verify them against direct summation for a discrete family, and check the
quadratic bounds that power the contraction-rate proofs.
"""

import numpy as np

from frrr import (FamilySpec, divergence_report, family_bounds, kl_bruteforce,
                  kl_per_entry, lemma_bounds, rate_formulas, renyi_bruteforce,
                  renyi_per_entry)

spec = FamilySpec("poisson_log", theta_lo=-1.0, theta_hi=1.0)
theta, zeta = np.array([0.4]), np.array([-0.3])

kl = float(kl_per_entry(spec, theta, zeta)[0])
print(f"KL closed form  : {kl:.10f}")
print(f"KL brute force  : {kl_bruteforce(spec, theta, zeta):.10f}")
for al in (0.25, 0.5, 0.75):
    d = float(renyi_per_entry(spec, theta, zeta, al)[0])
    bf = renyi_bruteforce(spec, theta, zeta, al)
    print(f"D_{al:.2f} closed {d:.10f}  brute {bf:.10f}")

# Quadratic sandwich: C_L/(2a) d^2 <= KL <= C_U/(2a) d^2, and the
# alpha-weighted lower bound for the Renyi divergence.
rng = np.random.default_rng(3)
Theta = rng.uniform(-1, 1, size=(50,))
Zeta = rng.uniform(-1, 1, size=(50,))
fb = family_bounds(spec)
lb1 = lemma_bounds(fb, spec.a, Theta, Zeta)             # alpha=1: KL bounds
lb_half = lemma_bounds(fb, spec.a, Theta, Zeta, alpha=0.5)
kl_avg = float(np.mean(kl_per_entry(spec, Theta, Zeta)))
d_avg = float(np.mean(renyi_per_entry(spec, Theta, Zeta, 0.5)))
print(f"\nKL in [{lb1.renyi_lower:.5f}, {lb1.kl_upper:.5f}]  actual {kl_avg:.5f}")
print(f"D_0.5 >= {lb_half.renyi_lower:.5f}  actual {d_avg:.5f}")

# Full report over a matrix of parameters.
rep = divergence_report(spec, Theta.reshape(10, 5), Zeta.reshape(10, 5))
print(f"\nreport: KL avg {rep.kl_avg:.5f}  H^2 {rep.hellinger_sq:.5f}  "
      f"TV in [{rep.tv_lower:.5f}, {rep.tv_upper:.5f}]")

# Rate formulas from the same bounds object.
rf = rate_formulas(n=100, p=4, q=2, r=1, a=1.0, bounds=fb,
                   x_frob=10.0, b_frob=1.0)
print(f"eps_n(thm1) = {rf.epsilon_n_thm1:.6f}   r_n = {rf.r_n:.6f}")
