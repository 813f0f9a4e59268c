"""The graded neighborhood basis and its compact-regularity certificates.

Around a finite anchor set K we grade ball neighborhoods U_n with radii
rho_0 * r^n, r strictly below 1/(2e).  Restriction between levels never
grows norms, every bounded family obeys the absolute-convergence estimate
with constant R/(R - 2 e r), and the explicit delta = (1 - 2er) r^{k0} eps/2
witnesses the ball-inclusion criterion that makes the limit space of germs
compactly regular (hence Hausdorff and complete).
"""

import numpy as np

from germlie.germspace import (
    GermSpace, bond, compact_regularity_check, factorize,
    family_convergence_check, unit_majorant_family,
)

space = GermSpace(anchors=(0.0, 0.4 + 0.1j), base_radius=1.0, ratio=0.1, levels=6)
rng = np.random.default_rng(1)

print("radii per level:", [round(space.radius(n), 6) for n in range(space.levels)])

# --- bonding is a contraction ------------------------------------------------
fam = unit_majorant_family(space, 1, rng, size=16)
el = fam[13]
print("norm at level 1:", round(el.norm_upper, 6),
      " after restriction to level 3:", round(bond(el, 3).norm_upper, 6))

# --- the family convergence estimate ------------------------------------------
rep = family_convergence_check(unit_majorant_family(space, 0, rng, 24), R=1.0, r=0.1)
print("\nsum_k s_k r^k =", round(rep.extras["lhs"], 6),
      "<=", round(rep.extras["rhs"], 6), "= R/(R-2er) * sup :", rep.passed)

# beyond r = 1/(2e) the constant goes negative and the estimate is void
bad = family_convergence_check(unit_majorant_family(space, 0, rng, 8),
                               R=1.0, r=0.25, enforce_ratio=False)
print("forced past the ratio budget, factor =", round(bad.extras["factor"], 4),
      "-> holds?", bad.passed)

# --- the ball inclusion with the explicit delta --------------------------------
for eps in (0.5, 0.1):
    rep = compact_regularity_check(space, 1, 3, eps, trials=300,
                                   rng=np.random.default_rng(2))
    print(f"\neps={eps}: k0={rep.extras['k0']}, delta={rep.extras['delta']:.6g}, "
          f"{rep.trials} trials, counterexamples={len(rep.failures)}, "
          f"worst margin={rep.worst_margin:.4g}")

# --- factorization through the Banach step -------------------------------------
el = factorize(space, lambda z: np.exp(z) / (3.0 - z), 0)
pts = space.sample_points(0, 50, interior=0.3)
true_vals = np.exp(pts) / (3.0 - pts)
print("\nfactorized evaluator reproduces f to",
      np.max(np.abs(el.eval(pts) - true_vals)),
      "with certified tail", max(s.tail_bound for s in el.reps))
