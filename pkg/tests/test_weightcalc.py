import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from paramweight import corpus
from paramweight.errors import InputError, NotRealizableError
from paramweight.permutation import Permutation, format_cycle_type
from paramweight.weightcalc import (
    COMBINATORIAL,
    BranchData,
    SurfaceSummary,
    comparison_stalk,
    fixed_space_dim,
    ker_reduced_monodromy,
    parameterized_check,
    rational_rank,
    vanishing_cycle_report,
    weight_report,
    weight_zero_dim,
)

SWAP = Permutation((1, 0))
ID2 = Permutation.identity(2)


def summary(b0, *branches, mode="geometric", qhm=False):
    return SurfaceSummary(b0, tuple(BranchData(label, len(s), s) for label, s in branches), mode, qhm)


WHITNEY = summary(1, ("C", SWAP))
NOT_WHITNEY = summary(1, ("C", ID2))
TRIPLE = summary(3, ("C1", ID2), ("C2", ID2), ("C3", ID2))
EMPTY = summary(1)


# permutations


def test_cycle_notation():
    p = Permutation.from_cycles("(1 2)(3)", 3)
    assert p.cycles() == [(0, 1), (2,)]
    assert str(p) == "(1 2)"
    assert str(Permutation.identity(3)) == "()"
    assert Permutation.from_cycles(str(p), 3) == p
    assert format_cycle_type(p.cycle_type) == "(2,1)"


@pytest.mark.parametrize("text", ["(1 4)", "(1 2)(2 3)", "(1 2", "(a b)"])
def test_bad_cycle_notation(text):
    with pytest.raises(InputError):
        Permutation.from_cycles(text, 3)


@given(st.permutations(range(6)), st.permutations(range(6)))
def test_conjugation_keeps_cycle_type(images, relabel):
    p, r = Permutation(tuple(images)), Permutation(tuple(relabel))
    assert p.conjugate(r).cycle_type == p.cycle_type
    assert p.compose(p.inverse()).is_identity()


# kernel dimensions


@pytest.mark.parametrize(
    "sigma, k",
    [
        (SWAP, 0),
        (ID2, 1),
        (Permutation.from_cycles("(1 2 3)", 3), 0),
        (Permutation.from_cycles("(1 2)(3)", 3), 1),
    ],
)
def test_ker_reduced_monodromy(sigma, k):
    assert ker_reduced_monodromy(sigma) == k


def test_ker_needs_two_letters():
    with pytest.raises(InputError):
        ker_reduced_monodromy(Permutation.identity(1))


def test_nullity_matches_cycle_count_on_random_permutations():
    rng = random.Random(20)
    for _ in range(200):
        n = rng.randint(2, 8)
        images = list(range(n))
        rng.shuffle(images)
        p = Permutation(tuple(images))
        assert fixed_space_dim(p) == p.n_cycles
        assert ker_reduced_monodromy(p) == p.n_cycles - 1


def test_rational_rank():
    assert rational_rank([[1, 2], [2, 4]]) == 1
    assert rational_rank([[1, 0], [0, 1], [1, 1]]) == 2
    assert rational_rank([]) == 0


# stalks and weights


def test_comparison_stalks():
    assert comparison_stalk(WHITNEY) == 0
    assert comparison_stalk(TRIPLE) == 2
    assert comparison_stalk(TRIPLE, "C2") == 1
    with pytest.raises(InputError):
        comparison_stalk(TRIPLE, "Z")


@pytest.mark.parametrize(
    "s, dim",
    [(WHITNEY, 0), (NOT_WHITNEY, 1), (TRIPLE, 1), (corpus.xz2_y3_combinatorial(), 1), (EMPTY, 0)],
)
def test_weight_zero_dim(s, dim):
    assert weight_zero_dim(s) == dim


def test_unrealizable_combinatorial_input():
    bad = summary(3, ("C", SWAP), mode=COMBINATORIAL, qhm=True)
    with pytest.raises(NotRealizableError, match="not realizable as a parameterized surface"):
        weight_zero_dim(bad)
    assert parameterized_check(bad).verdict == "FAIL"


def test_weight_reports():
    w = weight_report(WHITNEY)
    assert (w.gr0_dim, w.gr1_branch_ranks, w.gr1_stalk0, w.gr2_stalk0) == (0, (("C", 1),), 0, 1)
    w = weight_report(TRIPLE)
    assert (w.gr0_dim, w.gr1_stalk0, w.gr2_stalk0) == (1, 3, 3)
    assert [r for _, r in w.gr1_branch_ranks] == [1, 1, 1]
    assert w.graded(5) == {"dim": 0} and w.graded(-1) == {"dim": 0}
    w = weight_report(EMPTY)
    assert w.gr0_dim == 0 and not w.gr1_branch_ranks
    assert any("IC_X" in n for n in w.notices)


def test_vanishing_cycle_reports():
    v = vanishing_cycle_report(WHITNEY)
    assert (v.w2_dim, v.w4_dim, v.w3_branch_ranks) == (0, 0, (("C", 1),))
    v = vanishing_cycle_report(TRIPLE)
    assert (v.w2_dim, v.w4_dim) == (1, 1)
    assert v.concentration == (2, 4)
    assert dict(v.annotations)["w4"].endswith("(-1)")
    v = vanishing_cycle_report(EMPTY)
    assert (v.w2_dim, v.w4_dim, v.w3_branch_ranks) == (0, 0, ())


def test_parameterized_check():
    germ, _ = corpus.whitney_umbrella()
    assert parameterized_check(germ).verdict == "PASS"
    assert parameterized_check(corpus.xz2_y3_combinatorial()).verdict == "PASS"
    unasserted = summary(1, ("C", ID2), mode=COMBINATORIAL)
    assert parameterized_check(unasserted).verdict == "FAIL"


summaries = st.integers(1, 4).flatmap(
    lambda b0: st.lists(st.integers(2, 5).flatmap(lambda n: st.permutations(range(n))), max_size=4).map(
        lambda perms: summary(b0, *[(f"C{i}", Permutation(tuple(p))) for i, p in enumerate(perms)], mode=COMBINATORIAL, qhm=True)
    )
)


@given(summaries)
def test_exactness_and_symmetry(s):
    if not s.is_realizable():
        with pytest.raises(NotRealizableError):
            weight_report(s)
        return
    assert parameterized_check(s).passed
    w = weight_report(s)
    assert w.gr0_dim >= 0
    assert w.gr0_dim + (s.b0 - 1) == w.gr1_stalk0
    v = vanishing_cycle_report(s)
    assert v.w2_dim == v.w4_dim == w.gr0_dim


@given(summaries, st.randoms())
def test_reports_depend_only_on_cycle_types(s, rnd):
    if not s.is_realizable():
        return
    relabeled = []
    for b in s.branches:
        images = list(range(b.n))
        rnd.shuffle(images)
        relabeled.append((b.label, b.sigma.conjugate(Permutation(tuple(images)))))
    t = summary(s.b0, *relabeled, mode=COMBINATORIAL, qhm=True)
    assert weight_report(t) == weight_report(s)
    assert vanishing_cycle_report(t) == vanishing_cycle_report(s)
