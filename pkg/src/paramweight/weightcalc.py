"""Dimension calculus for the weight filtration of a parameterized surface.

Everything here is exact integer arithmetic on a :class:`SurfaceSummary`:
the number ``b0`` of points over the origin in the normalization, and for
each branch of the double-point curve its sheet count and sheet
permutation.  The internal monodromy of the comparison complex along a
branch is the permutation acting on functions on the sheets modulo
constants, so its invariants have dimension ``#cycles - 1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .errors import InputError, NotRealizableError, NumericFailure
from .permutation import Permutation, format_cycle_type

GEOMETRIC = "geometric"
COMBINATORIAL = "combinatorial"
DX_EMPTY = "D_X empty; Q_X[2] \u2245 IC_X (the comparison complex vanishes)"


def rational_rank(matrix: Sequence[Sequence]) -> int:
    """Rank over Q by Gaussian elimination on Fractions."""
    rows = [[Fraction(x) for x in row] for row in matrix]
    if not rows:
        return 0
    ncols = len(rows[0])
    rank = 0
    for col in range(ncols):
        pivot = next((r for r in range(rank, len(rows)) if rows[r][col] != 0), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        p = rows[rank][col]
        for r in range(len(rows)):
            if r != rank and rows[r][col] != 0:
                f = rows[r][col] / p
                rows[r] = [a - f * b for a, b in zip(rows[r], rows[rank])]
        rank += 1
        if rank == len(rows):
            break
    return rank


def fixed_space_dim(sigma: Permutation) -> int:
    """``dim ker(Id - P_sigma)`` computed from the matrix, not from cycles."""
    n = len(sigma)
    P = sigma.matrix()
    M = [[(1 if i == j else 0) - P[i][j] for j in range(n)] for i in range(n)]
    return n - rational_rank(M)


def ker_reduced_monodromy(sigma: Permutation) -> int:
    """Invariants of the sheet permutation on functions modulo constants."""
    if not isinstance(sigma, Permutation):
        raise InputError("expected a Permutation")
    if len(sigma) < 2:
        raise InputError("the reduced representation needs at least two sheets")
    c = sigma.n_cycles
    nullity = fixed_space_dim(sigma)
    if nullity != c:
        raise AssertionError(f"cycle count {c} disagrees with nullity {nullity}")
    return c - 1


@dataclass(frozen=True)
class BranchData:
    label: str
    n: int
    sigma: Permutation

    def __post_init__(self):
        if self.n < 2:
            raise InputError(f"branch {self.label}: sheet count must be at least 2")
        if len(self.sigma) != self.n:
            raise InputError(f"branch {self.label}: permutation acts on {len(self.sigma)} letters, not {self.n}")

    @property
    def r(self) -> int:
        """Generic rank of the comparison complex along the branch."""
        return self.n - 1

    @property
    def c(self) -> int:
        return self.sigma.n_cycles

    @property
    def k(self) -> int:
        return ker_reduced_monodromy(self.sigma)

    def as_dict(self) -> dict:
        return {
            "label": self.label,
            "n_C": self.n,
            "sigma": str(self.sigma),
            "cycle_type": format_cycle_type(self.sigma.cycle_type),
            "r_C": self.r,
            "cycles": self.c,
            "k_C": self.k,
        }


@dataclass(frozen=True)
class SurfaceSummary:
    b0: int
    branches: tuple[BranchData, ...] = ()
    mode: str = GEOMETRIC
    qhm_asserted: bool = False

    def __post_init__(self):
        object.__setattr__(self, "branches", tuple(sorted(self.branches, key=lambda b: b.label)))
        if self.mode not in (GEOMETRIC, COMBINATORIAL):
            raise InputError(f"unknown mode {self.mode!r}")
        if not isinstance(self.b0, int) or self.b0 < 1:
            raise InputError("b0 must be a positive integer")
        labels = [b.label for b in self.branches]
        if len(set(labels)) != len(labels):
            raise InputError("branch labels must be distinct")

    @property
    def kernel_total(self) -> int:
        return sum(b.k for b in self.branches)

    def is_realizable(self) -> bool:
        return self.b0 - 1 <= self.kernel_total

    def as_combinatorial(self) -> SurfaceSummary:
        return SurfaceSummary(self.b0, self.branches, COMBINATORIAL, qhm_asserted=True)


def comparison_stalk(summary: SurfaceSummary, location: str = "origin") -> int:
    """Dimension of the only nonzero stalk cohomology (degree -1) of the comparison complex."""
    if location == "origin":
        return summary.b0 - 1
    for b in summary.branches:
        if b.label == location:
            return b.r
    raise InputError(f"unknown branch label {location!r}")


def weight_zero_dim(summary: SurfaceSummary) -> int:
    """``1 - b0 + sum_C dim ker(Id - h_C)``."""
    dim = 1 - summary.b0 + summary.kernel_total
    if dim < 0:
        if summary.mode == COMBINATORIAL:
            raise NotRealizableError(
                f"not realizable as a parameterized surface: b0 - 1 = {summary.b0 - 1} "
                f"exceeds the total invariant dimension {summary.kernel_total}"
            )
        raise NumericFailure("computed monodromy violates the realizability inequality")
    return dim


@dataclass(frozen=True)
class WeightReport:
    gr0_dim: int
    gr1_branch_ranks: tuple[tuple[str, int], ...]
    gr1_stalk0: int
    gr2_generic: int
    gr2_stalk0: int
    concentration: tuple[int, int] = (0, 2)
    notices: tuple[str, ...] = ()

    def graded(self, k: int) -> dict:
        """Dimension data of ``Gr_k``; zero outside the concentration range."""
        if k == 0:
            return {"support": "origin", "dim": self.gr0_dim}
        if k == 1:
            return {"generic_ranks": dict(self.gr1_branch_ranks), "stalk0": self.gr1_stalk0}
        if k == 2:
            return {"generic_rank": self.gr2_generic, "stalk0": self.gr2_stalk0}
        return {"dim": 0}

    def as_dict(self) -> dict:
        return {
            "gr0_dim": self.gr0_dim,
            "gr1_branch_ranks": [[label, r] for label, r in self.gr1_branch_ranks],
            "gr1_stalk0": self.gr1_stalk0,
            "gr2_generic": self.gr2_generic,
            "gr2_stalk0": self.gr2_stalk0,
            "concentration": list(self.concentration),
            "notices": list(self.notices),
        }


def weight_report(summary: SurfaceSummary) -> WeightReport:
    gr0 = weight_zero_dim(summary)
    stalk1 = summary.kernel_total
    if gr0 != 1 - summary.b0 + stalk1:
        raise AssertionError("weight report is internally inconsistent")
    notices = []
    if not summary.branches:
        notices.append(DX_EMPTY)
    notices.append("Gr_0 is supported at the origin; it also equals the kernel-of-variation dimension")
    notices.append("Gr_1 is the intermediate extension of the comparison local system on the double-point curve")
    notices.append("Gr_2 = IC_X, with generic rank 1 and origin stalk b0 in degree -2")
    return WeightReport(
        gr0_dim=gr0,
        gr1_branch_ranks=tuple((b.label, b.r) for b in summary.branches),
        gr1_stalk0=stalk1,
        gr2_generic=1,
        gr2_stalk0=summary.b0,
        notices=tuple(notices),
    )


@dataclass(frozen=True)
class VanishingCycleReport:
    w2_dim: int
    w3_branch_ranks: tuple[tuple[str, int], ...]
    w4_dim: int
    concentration: tuple[int, int] = (2, 4)
    annotations: tuple[tuple[str, str], ...] = ()
    notes: tuple[str, ...] = ()

    def as_dict(self) -> dict:
        return {
            "w2_dim": self.w2_dim,
            "w3_branch_ranks": [[label, r] for label, r in self.w3_branch_ranks],
            "w4_dim": self.w4_dim,
            "concentration": list(self.concentration),
            "annotations": {k: v for k, v in self.annotations},
            "notes": list(self.notes),
        }


def vanishing_cycle_report(summary: SurfaceSummary) -> VanishingCycleReport:
    """Monodromy weight filtration on the unipotent vanishing cycles of ``V(f)``.

    ``Gr_2`` and ``Gr_4`` are both the origin-supported space of ``Gr_0``
    twisted by ``(-1)``; ``Gr_3`` is ``Gr_1`` twisted by ``(-1)``.
    """
    v = weight_zero_dim(summary)
    report = VanishingCycleReport(
        w2_dim=v,
        w3_branch_ranks=tuple((b.label, b.r) for b in summary.branches),
        w4_dim=v,
        annotations=(("w2", "V(-1)"), ("w3", "IC(N(-1)) on Sigma f"), ("w4", "V(-1)")),
        notes=(
            "T_u is the unipotent part of the Milnor monodromy; N = log(T_u)/(2 pi i)",
            "comparison complex = ker N (1): weight k of N corresponds to weight k+2 of ker N",
            "N maps Gr_4 isomorphically onto Gr_2 and kills Gr_3",
            "assumed: the image is a hypersurface V(f) in C^3",
        ),
    )
    if report.w2_dim != report.w4_dim:
        raise AssertionError("Hard Lefschetz symmetry violated")
    return report


@dataclass(frozen=True)
class Diagnostic:
    passed: bool
    reasons: tuple[str, ...]
    notes: tuple[str, ...] = field(default=())

    @property
    def verdict(self) -> str:
        return "PASS" if self.passed else "FAIL"

    def as_dict(self) -> dict:
        return {"verdict": self.verdict, "reasons": list(self.reasons), "notes": list(self.notes)}


def parameterized_check(subject) -> Diagnostic:
    """Is the input a parameterized surface?  Accepts a summary or a germ."""
    from .germ import MapGerm

    purity = "D_X is pure: every branch is a curve through the origin"
    if isinstance(subject, MapGerm) or (isinstance(subject, SurfaceSummary) and subject.mode == GEOMETRIC):
        notes = [purity]
        if isinstance(subject, SurfaceSummary):
            notes.append(f"b0 = {subject.b0} is finite")
        return Diagnostic(
            True,
            ("smooth charts => Q-homology-manifold normalization; stalk concentration automatic",),
            tuple(notes),
        )
    reasons = []
    ok = True
    if subject.is_realizable():
        reasons.append(f"realizability holds: b0 - 1 = {subject.b0 - 1} <= {subject.kernel_total}")
    else:
        ok = False
        reasons.append(f"realizability fails: b0 - 1 = {subject.b0 - 1} > {subject.kernel_total}")
    if subject.qhm_asserted:
        reasons.append("normalization asserted to be a Q-homology manifold")
    else:
        ok = False
        reasons.append("Q-homology-manifold normalization not asserted")
    return Diagnostic(ok, tuple(reasons), (purity, f"b0 = {subject.b0} is finite"))
