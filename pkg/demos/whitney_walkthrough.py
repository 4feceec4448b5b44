"""
The Whitney umbrella, step by step
==================================

x^2 = y^2 z is the image of (u, t) -> (u^2 - t, u(u^2 - t), t).  The
z-axis is its double line.  Walk once around that line and the two
preimages trade places.
"""

import numpy as np

from paramweight import corpus
from paramweight.germ import fiber_over, preimage_origin, validate_input
from paramweight.monodromy import LoopSpec, branch_monodromy, epsilon_halving
from paramweight.weightcalc import BranchData, SurfaceSummary, vanishing_cycle_report, weight_report

germ, branches = corpus.whitney_umbrella()
(axis,) = branches

# two source points sit over (0, 0, 0.04): u = +-0.2
fib = fiber_over(germ, (0, 0, 0.04))
for u, t in fib.points:
    print(f"u = {u.real:+.3f}   t = {t.real:.3f}")

# only one point of the source lands on the origin
origin = preimage_origin(germ)
print("b0 =", len(origin))

report = validate_input(germ, branches)
print("branches on the double locus:", report.dx_branches, report.fiber_counts)

# the loop s = 0.1 e^{i theta} around the z-axis
m = branch_monodromy(germ, LoopSpec(axis, 0.1), origin)
print(m.describe())
print("closure residual: %.1e" % m.closure)

theta = np.linspace(0, 2 * np.pi, 9)
print("sample of the loop:", np.round(0.1 * np.exp(1j * theta[:3]), 4))

# a smaller loop gives a conjugate permutation
check = epsilon_halving(germ, LoopSpec(axis, 0.1))
print("halving consistent:", check.consistent, "relabel", check.relabel)

summary = SurfaceSummary(len(origin), (BranchData(axis.label, m.n, m.sigma),))
w = weight_report(summary)
print("dim Gr_0 =", w.gr0_dim)
print("Gr_1 ranks:", dict(w.gr1_branch_ranks), " stalk at 0:", w.gr1_stalk0)

v = vanishing_cycle_report(summary)
print("vanishing cycles: w2 =", v.w2_dim, " w3 =", dict(v.w3_branch_ranks), " w4 =", v.w4_dim)
