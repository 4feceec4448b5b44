"""
Finding branches without being told
===================================

Given only equations for the double locus, slice it by a generic linear
form l = w, follow the slice points once around |w| = eps and read off
the branches as cycles.
"""

import time

from paramweight import corpus
from paramweight.germ import preimage_origin
from paramweight.monodromy import LoopSpec, SliceSolver, branch_monodromy, discover_branches
from paramweight.polycore import parse_poly

XYZ = ("x", "y", "z")

# the three coordinate axes as xy = z(x + y) = 0
ideal = [parse_poly(g, XYZ) for g in ("x*y", "z*(x + y)")]
solver = SliceSolver(ideal, parse_poly("x + y + z", XYZ))

print("slice points at w = 0.1:")
for p in solver.solve(0.1):
    print("  ", [complex(round(c.real, 6), round(c.imag, 6)) for c in p])

start = time.perf_counter()
found = discover_branches(solver, 0.1)
print(f"{len(found)} branches in {time.perf_counter() - start:.2f}s")

germ, _ = corpus.triple_point()
origin = preimage_origin(germ)
for b in found:
    m = branch_monodromy(germ, LoopSpec(b), origin)
    print(b.label, "covering degree", b.m, "|", m.describe())

# a plane cusp wraps twice around its own slice
cusp = SliceSolver([parse_poly("y^2 - x^3", XYZ), parse_poly("z", XYZ)], parse_poly("x", XYZ))
print("cusp covering degrees:", [b.m for b in discover_branches(cusp, 0.1)])
