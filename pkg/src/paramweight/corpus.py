"""The worked examples as ready-made germs and branch lists.

Each constructor returns ``(germ, branches)``.  ``xz2_y3_combinatorial``
returns combinatorial data instead, since that surface's normalization (the
affine cone over the twisted cubic) is singular and has no smooth chart.
"""

from __future__ import annotations

from .germ import BranchSpec, Chart, MapGerm
from .permutation import Permutation
from .weightcalc import BranchData, SurfaceSummary

AXIS_Z = BranchSpec.from_strings("C", "0", "0", "s")


def whitney_umbrella():
    """``y^2 = x^3 + z x^2``, normalized by ``(u^2 - t, u(u^2 - t), t)``."""
    chart = Chart.from_strings("W", "u^2 - t", "u*(u^2 - t)", "t", 3)
    return MapGerm((chart,)), [AXIS_Z]


def y2_x3_z2x2():
    """``y^2 = x^3 + z^2 x^2``, normalized by ``(u^2 - t^2, u(u^2 - t^2), t)``."""
    chart = Chart.from_strings("N", "u^2 - t^2", "u*(u^2 - t^2)", "t", 3)
    return MapGerm((chart,)), [AXIS_Z]


def cusp_t3():
    """``(u^2 - t^3, u(u^2 - t^3), t)``: sheets ``u = +-s^(3/2)`` swap around the branch."""
    chart = Chart.from_strings("K", "u^2 - t^3", "u*(u^2 - t^3)", "t", 3)
    return MapGerm((chart,)), [AXIS_Z]


def triple_point():
    """``xyz = 0``: three coordinate planes, three axis branches."""
    charts = (
        Chart.from_strings("Vx", "0", "u", "t", 3),
        Chart.from_strings("Vy", "u", "0", "t", 3),
        Chart.from_strings("Vz", "u", "t", "0", 2),
    )
    branches = [
        BranchSpec.from_strings("Cx", "s", "0", "0"),
        BranchSpec.from_strings("Cy", "0", "s", "0"),
        BranchSpec.from_strings("Cz", "0", "0", "s"),
    ]
    return MapGerm(charts), branches


def cusp_times_line():
    """``y^2 = x^3`` in C^3: topologically a manifold, empty double-point curve."""
    chart = Chart.from_strings("L", "u^2", "u^3", "t", 3)
    return MapGerm((chart,)), [AXIS_Z]


def xz2_y3_combinatorial() -> SurfaceSummary:
    """``x z^2 = y^3``: one branch ``V(y, z)`` with two sheets and trivial monodromy."""
    return SurfaceSummary(
        b0=1,
        branches=(BranchData("C", 2, Permutation.identity(2)),),
        mode="combinatorial",
        qhm_asserted=True,
    )


GEOMETRIC = {
    "whitney_umbrella": whitney_umbrella,
    "y2_x3_z2x2": y2_x3_z2x2,
    "cusp_t3": cusp_t3,
    "triple_point": triple_point,
    "cusp_times_line": cusp_times_line,
}
