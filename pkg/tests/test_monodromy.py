import pytest

from paramweight import corpus
from paramweight.errors import InputError
from paramweight.germ import preimage_origin
from paramweight.monodromy import (
    LoopSpec,
    SliceSolver,
    branch_fiber_count,
    branch_monodromy,
    discover_branches,
    epsilon_halving,
    incidence_injective,
    radial_limit,
)
from paramweight.permutation import Permutation
from paramweight.polycore import parse_poly

XYZ = ("x", "y", "z")


def solver(ideal, ell):
    return SliceSolver([parse_poly(g, XYZ) for g in ideal], parse_poly(ell, XYZ))


def monodromy_of(name, label=None):
    germ, branches = corpus.GEOMETRIC[name]()
    branch = branches[0] if label is None else next(b for b in branches if b.label == label)
    return germ, branch_monodromy(germ, LoopSpec(branch), preimage_origin(germ))


def test_loop_spec_needs_positive_radius():
    with pytest.raises(InputError):
        LoopSpec(corpus.AXIS_Z, 0.0)


@pytest.mark.parametrize("name, n", [("whitney_umbrella", 2), ("triple_point", 2), ("cusp_times_line", 1)])
def test_fiber_counts(name, n):
    germ, branches = corpus.GEOMETRIC[name]()
    z_axis = next(b for b in branches if b.label in ("C", "Cz"))
    assert branch_fiber_count(germ, LoopSpec(z_axis)) == n


def test_fiber_count_rejects_radius_beyond_germ():
    germ, branches = corpus.whitney_umbrella()
    with pytest.raises(InputError):
        branch_fiber_count(germ, LoopSpec(branches[0], 1.5))


@pytest.mark.parametrize(
    "name, sigma",
    [
        ("whitney_umbrella", Permutation((1, 0))),
        ("y2_x3_z2x2", Permutation.identity(2)),
        ("cusp_t3", Permutation((1, 0))),
    ],
)
def test_branch_permutations(name, sigma):
    _, m = monodromy_of(name)
    assert m.n == 2
    assert m.sigma == sigma


@pytest.mark.parametrize("label", ["Cx", "Cy", "Cz"])
def test_triple_point_axes_are_trivial(label):
    _, m = monodromy_of("triple_point", label)
    assert m.sigma.is_identity() and m.n == 2


def test_monodromy_needs_two_sheets():
    germ, branches = corpus.cusp_times_line()
    with pytest.raises(InputError):
        branch_monodromy(germ, LoopSpec(branches[0]))


def test_radial_limits_whitney():
    germ, m = monodromy_of("whitney_umbrella")
    assert m.radial_incidence == {1: 1, 2: 1}


def test_radial_limits_triple_point_follow_charts():
    germ, branches = corpus.triple_point()
    origin = preimage_origin(germ)
    by_chart = {o.chart_name: o.label for o in origin}
    cz = next(b for b in branches if b.label == "Cz")
    m = branch_monodromy(germ, LoopSpec(cz))
    inc = radial_limit(germ, LoopSpec(cz), origin, m.basepoint)
    for label, g in zip(m.basepoint.labels, m.basepoint.groups):
        assert inc[label] == by_chart[germ.charts[g].name]


@pytest.mark.parametrize("name", ["whitney_umbrella", "y2_x3_z2x2", "cusp_t3", "triple_point"])
def test_incidence_is_constant_on_orbits(name):
    germ, branches = corpus.GEOMETRIC[name]()
    origin = preimage_origin(germ)
    for b in branches:
        m = branch_monodromy(germ, LoopSpec(b), origin)
        for cyc in m.sigma.cycles():
            assert len({m.radial_incidence[m.basepoint.labels[i]] for i in cyc}) == 1


@pytest.mark.parametrize("name", ["whitney_umbrella", "y2_x3_z2x2", "cusp_t3", "triple_point"])
def test_incidence_map_is_injective(name):
    germ, branches = corpus.GEOMETRIC[name]()
    origin = preimage_origin(germ)
    ms = [branch_monodromy(germ, LoopSpec(b), origin) for b in branches]
    assert incidence_injective(len(origin), ms)


def test_incidence_map_detects_missing_branches():
    germ, branches = corpus.triple_point()
    origin = preimage_origin(germ)
    ms = [branch_monodromy(germ, LoopSpec(branches[0]), origin)]
    assert not incidence_injective(len(origin), ms)


@pytest.mark.parametrize("name", ["whitney_umbrella", "y2_x3_z2x2", "cusp_t3", "triple_point"])
def test_halving_epsilon_conjugates_permutation(name):
    germ, branches = corpus.GEOMETRIC[name]()
    for b in branches:
        check = epsilon_halving(germ, LoopSpec(b, 0.2))
        assert check.consistent
        assert check.sigma_half.cycle_type == check.sigma.cycle_type


# discovery


def test_discover_line():
    found = discover_branches(solver(["x", "y"], "z"), 0.1)
    assert [(b.label, b.m) for b in found] == [("D1", 1)]


def test_discover_coordinate_axes():
    found = discover_branches(solver(["x*y", "z*(x + y)"], "x + y + z"), 0.1)
    assert sorted(b.m for b in found) == [1, 1, 1]
    points = sorted(tuple(round(abs(c), 12) for c in b.basepoint) for b in found)
    assert points == [(0, 0, 0.1), (0, 0.1, 0), (0.1, 0, 0)]


def test_discover_plane_cusp_has_covering_degree_two():
    found = discover_branches(solver(["y^2 - x^3", "z"], "x"), 0.1)
    assert [b.m for b in found] == [2]


def test_discover_skips_components_missing_the_origin():
    # x + y = w meets the cusp twice near the origin and once far away
    found = discover_branches(solver(["y^2 - x^3", "z"], "x + y"), 0.1)
    assert [b.m for b in found] == [2]


def test_discover_rejects_degenerate_slice():
    with pytest.raises(InputError):
        solver(["x", "y"], "x")


@pytest.mark.parametrize(
    "name, ideal, ell",
    [
        ("whitney_umbrella", ["x", "y"], "z"),
        ("y2_x3_z2x2", ["x", "y"], "z"),
        ("triple_point", ["x*y", "z*(x + y)"], "x + y + z"),
    ],
)
def test_discovered_branches_agree_with_parametric_ones(name, ideal, ell):
    germ, branches = corpus.GEOMETRIC[name]()
    origin = preimage_origin(germ)
    given = sorted(branch_monodromy(germ, LoopSpec(b), origin).cycle_type for b in branches)
    found = discover_branches(solver(ideal, ell), 0.1)
    computed = sorted(branch_monodromy(germ, LoopSpec(b), origin).cycle_type for b in found)
    assert computed == given


def test_discovered_branch_at_smaller_radius():
    germ, _ = corpus.whitney_umbrella()
    (branch,) = discover_branches(solver(["x", "y"], "z"), 0.2)
    check = epsilon_halving(germ, LoopSpec(branch, 0.2))
    assert check.consistent and check.sigma == Permutation((1, 0))
