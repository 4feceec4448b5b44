"""
Three planes through a point
============================

xyz = 0 is normalized by three copies of C^2.  Each coordinate axis is
where two of the planes meet, so every axis carries two sheets and the
loop around it does nothing.
"""

from paramweight import corpus
from paramweight.germ import preimage_origin
from paramweight.monodromy import LoopSpec, branch_monodromy, incidence_injective
from paramweight.weightcalc import BranchData, SurfaceSummary, weight_report

germ, branches = corpus.triple_point()
origin = preimage_origin(germ)
print("origin preimages:", [o.chart_name for o in origin])

monodromies = [branch_monodromy(germ, LoopSpec(b), origin) for b in branches]
for m in monodromies:
    print(m.describe())
    # which plane each sheet comes from as s -> 0
    print("   sheets end at", m.radial_incidence)

# the three axes tie the three planes together
print("incidence map injective:", incidence_injective(len(origin), monodromies))

summary = SurfaceSummary(len(origin), tuple(BranchData(m.label, m.n, m.sigma) for m in monodromies))
w = weight_report(summary)

# sum of k_C is 3 and b0 - 1 is 2, so one class survives in weight zero
print("sum k_C =", w.gr1_stalk0, "  b0 - 1 =", len(origin) - 1, "  dim Gr_0 =", w.gr0_dim)
