from fractions import Fraction

import numpy as np
import pytest

from paramweight import corpus
from paramweight.errors import InputError, InvalidGermError
from paramweight.germ import (
    BranchSpec,
    Chart,
    MapGerm,
    double_point_source_curve,
    fiber_over,
    generic_injectivity,
    preimage_origin,
    validate_input,
)
from paramweight.polycore import eval_complex, parse_poly


def test_chart_must_be_adapted():
    with pytest.raises(InvalidGermError):
        Chart.from_strings("bad", "u^2 - t", "u*(u^2 - t)", "t + u", 3)


def test_chart_must_be_a_germ():
    with pytest.raises(InvalidGermError):
        Chart.from_strings("bad", "u^2 + 1", "u", "t", 3)


def test_branch_must_pass_through_origin():
    with pytest.raises(InputError):
        BranchSpec.from_strings("C", "1 + s", "0", "s")
    with pytest.raises(InputError):
        BranchSpec.from_strings("C", "0", "0", "0")


def test_origin_preimages():
    assert len(preimage_origin(corpus.whitney_umbrella()[0])) == 1
    assert len(preimage_origin(corpus.triple_point()[0])) == 3
    assert len(preimage_origin(corpus.cusp_times_line()[0])) == 1
    origin = preimage_origin(corpus.whitney_umbrella()[0])
    assert abs(origin[0].u) == 0


def test_origin_preimage_rejects_collapsed_line():
    germ = MapGerm((Chart.from_strings("flat", "t*u", "t*u^2", "t", 3),))
    with pytest.raises(InvalidGermError):
        preimage_origin(germ)


def test_fiber_whitney():
    germ, _ = corpus.whitney_umbrella()
    fib = fiber_over(germ, (0, 0, 0.04))
    assert len(fib) == 2
    us = sorted(p[0].real for p in fib.points)
    assert us == pytest.approx([-0.2, 0.2], abs=1e-14)
    assert all(abs(p[1] - 0.04) < 1e-15 for p in fib.points)


def test_fiber_triple_point_axis():
    germ, _ = corpus.triple_point()
    fib = fiber_over(germ, (0, 0, 0.1))
    assert len(fib) == 2
    assert [germ.charts[g].name for g in fib.groups] == ["Vx", "Vy"]


def test_fiber_cusp_times_line_collapses_to_set_point():
    germ, _ = corpus.cusp_times_line()
    fib = fiber_over(germ, (0, 0, 0.1))
    assert len(fib) == 1
    assert abs(fib.points[0][0]) < 1e-12
    assert abs(fib.points[0][1] - 0.1) < 1e-15


def test_fiber_off_image_is_empty():
    germ, _ = corpus.whitney_umbrella()
    assert len(fiber_over(germ, (0.01, 0.3, 0.02))) == 0


def test_fiber_outside_radius():
    germ, _ = corpus.whitney_umbrella()
    with pytest.raises(InputError):
        fiber_over(germ, (0, 0, 2.0))


@pytest.mark.parametrize("name", sorted(corpus.GEOMETRIC))
def test_fiber_points_map_to_target(name):
    germ, _ = corpus.GEOMETRIC[name]()
    rng = np.random.default_rng(11)
    for _ in range(10):
        ci = int(rng.integers(len(germ.charts)))
        u, t = 0.1 * (rng.normal(size=2) + 1j * rng.normal(size=2))
        q = germ.charts[ci].image(complex(u), complex(t))
        fib = fiber_over(germ, q)
        assert len(fib) >= 1
        for p, g in zip(fib.points, fib.groups):
            image = [eval_complex(poly, p)[0] for poly in germ.charts[g].polys]
            assert max(abs(a - b) for a, b in zip(image, q)) < 1e-10


@pytest.mark.parametrize("name", sorted(corpus.GEOMETRIC))
def test_generic_fibers_are_single_points(name):
    germ, _ = corpus.GEOMETRIC[name]()
    counts = generic_injectivity(germ, samples=10, seed=5)
    assert counts and all(c == 1 for c in counts)


def test_validate_whitney():
    germ, branches = corpus.whitney_umbrella()
    report = validate_input(germ, branches)
    assert report.dx_branches == ["C"]
    assert report.fiber_counts == {"C": 2}


def test_validate_cusp_times_line_drops_branch():
    germ, branches = corpus.cusp_times_line()
    report = validate_input(germ, branches)
    assert report.dropped == ["C"] and report.dx_empty
    assert any("IC_X" in n for n in report.notices)


def test_validate_triple_point():
    germ, branches = corpus.triple_point()
    report = validate_input(germ, branches)
    assert sorted(report.dx_branches) == ["Cx", "Cy", "Cz"]
    assert all(n == 2 for n in report.fiber_counts.values())


def test_validate_rejects_branch_off_image():
    germ, _ = corpus.whitney_umbrella()
    with pytest.raises(InputError):
        validate_input(germ, [BranchSpec.from_strings("D", "s", "s", "0")])


def test_validate_rejects_non_injective_map():
    germ = MapGerm((Chart.from_strings("fold", "u^2", "u^4", "t", 3),))
    with pytest.raises(InvalidGermError):
        validate_input(germ, [])


def test_validate_epsilon_range():
    germ, branches = corpus.whitney_umbrella()
    with pytest.raises(InputError):
        validate_input(germ, branches, epsilon=1.5)


@pytest.mark.parametrize("name", sorted(corpus.GEOMETRIC))
def test_origin_preimages_survive_reparameterization(name):
    germ, _ = corpus.GEOMETRIC[name]()
    b0 = len(preimage_origin(germ))
    rng = np.random.default_rng(2)
    for _ in range(5):
        c = Fraction(int(rng.integers(-9, 10)), int(rng.integers(1, 10)))
        for ci in range(len(germ.charts)):
            assert len(preimage_origin(germ.reparameterize(c, ci))) == b0


def test_source_double_point_curves():
    assert double_point_source_curve(corpus.whitney_umbrella()[0].charts[0]) == parse_poly("u^2 - t", ("u", "t"))
    assert double_point_source_curve(corpus.y2_x3_z2x2()[0].charts[0]) == parse_poly("u^2 - t^2", ("u", "t"))
    # no genuine double points, only the ramification line u = 0
    assert double_point_source_curve(corpus.cusp_times_line()[0].charts[0]) == parse_poly("u", ("u", "t"))


def test_chart_must_be_finite():
    with pytest.raises(InvalidGermError):
        MapGerm((Chart.from_strings("P", "0", "0", "t", 3),))
