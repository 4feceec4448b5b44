"""Parameterizations by adapted polynomial charts, origin preimages and fibers.

A chart sends ``(u, t)`` to ``(p1, p2, p3)`` with one target coordinate
identically equal to ``t``.  Fixing that coordinate makes every fiber
computation a univariate root problem in ``u`` plus residual checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ConvergenceError, InputError, InvalidGermError, NumericFailure, SingularJacobianError
from .numkernel import PolySystem, TrackedFiber, newton_correct, roots_univ
from .polycore import (
    MultiPoly,
    divided_difference,
    eval_complex,
    gcd,
    parse_poly,
    resultant,
    squarefree_part,
)
from .weightcalc import DX_EMPTY

SOURCE_VARS = ("u", "t")
PARAM_VARS = ("_q1", "_q2", "_q3")
BRANCH_VAR = "s"


@dataclass(frozen=True)
class Chart:
    name: str
    p1: MultiPoly
    p2: MultiPoly
    p3: MultiPoly
    adapted_index: int

    def __post_init__(self):
        if self.adapted_index not in (1, 2, 3):
            raise InvalidGermError(f"chart {self.name}: adapted index must be 1, 2 or 3")
        polys = tuple(p.with_vars(SOURCE_VARS) for p in (self.p1, self.p2, self.p3))
        for attr, p in zip(("p1", "p2", "p3"), polys):
            object.__setattr__(self, attr, p)
        t = MultiPoly.variable("t", SOURCE_VARS)
        if polys[self.adapted_index - 1] != t:
            raise InvalidGermError(
                f"chart {self.name} is not adapted: coordinate {self.adapted_index} is not t"
            )
        if any(p.constant_value() != 0 for p in polys):
            raise InvalidGermError(f"chart {self.name} does not send (0,0) to the origin")

    @classmethod
    def from_strings(cls, name: str, p1: str, p2: str, p3: str, adapted: int) -> Chart:
        return cls(name, *(parse_poly(p, SOURCE_VARS) for p in (p1, p2, p3)), adapted)

    @property
    def polys(self) -> tuple[MultiPoly, MultiPoly, MultiPoly]:
        return (self.p1, self.p2, self.p3)

    @property
    def free_indices(self) -> tuple[int, int]:
        """0-based indices of the two non-adapted coordinates."""
        return tuple(i for i in range(3) if i != self.adapted_index - 1)

    def image(self, u: complex, t: complex) -> tuple[complex, complex, complex]:
        return tuple(eval_complex(p, (u, t))[0] for p in self.polys)

    def system(self, coordinate: int) -> PolySystem:
        """Square system ``t = q_k, p_a(u, t) = q_a`` (``a`` 0-based); the third coordinate is a side equation."""
        k = self.adapted_index - 1
        vars = SOURCE_VARS + PARAM_VARS
        q = [MultiPoly.variable(v, vars) for v in PARAM_VARS]
        t = MultiPoly.variable("t", vars)
        other = next(i for i in self.free_indices if i != coordinate)
        return PolySystem(
            [t - q[k], self.polys[coordinate].with_vars(vars) - q[coordinate]],
            SOURCE_VARS,
            {v: 0j for v in PARAM_VARS},
            side=[self.polys[other].with_vars(vars) - q[other]],
        )

    def reparameterize(self, c) -> Chart:
        """Substitute ``u -> u + c t^2``, a unipotent change of source coordinates."""
        shift = MultiPoly.variable("u", SOURCE_VARS) + MultiPoly(SOURCE_VARS, {(0, 2): c})
        t = MultiPoly.variable("t", SOURCE_VARS)
        polys = [p.substitute({"u": shift, "t": t}).with_vars(SOURCE_VARS) for p in self.polys]
        return Chart(self.name, *polys, self.adapted_index)


@dataclass(frozen=True)
class MapGerm:
    charts: tuple[Chart, ...]
    variables: tuple[str, str, str] = ("x", "y", "z")
    radius: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "charts", tuple(self.charts))
        object.__setattr__(self, "variables", tuple(self.variables))
        if not self.charts:
            raise InvalidGermError("a map germ needs at least one chart")
        if len(self.variables) != 3:
            raise InvalidGermError("target must have three coordinates")
        names = [c.name for c in self.charts]
        if len(set(names)) != len(names):
            raise InvalidGermError("chart names must be distinct")
        for c in self.charts:
            if all(c.polys[i].degree("u") < 1 for i in c.free_indices):
                raise InvalidGermError(f"chart {c.name} is not finite: no coordinate depends on u")

    def reparameterize(self, c, chart: int | None = None) -> MapGerm:
        charts = tuple(
            ch.reparameterize(c) if chart is None or i == chart else ch for i, ch in enumerate(self.charts)
        )
        return MapGerm(charts, self.variables, self.radius)


@dataclass(frozen=True)
class BranchSpec:
    """A curve ``s -> (gamma1(s), gamma2(s), gamma3(s))`` through the origin."""

    label: str
    gamma: tuple[MultiPoly, MultiPoly, MultiPoly]

    def __post_init__(self):
        g = tuple(p.with_vars((BRANCH_VAR,)) for p in self.gamma)
        object.__setattr__(self, "gamma", g)
        if len(g) != 3:
            raise InputError(f"branch {self.label}: need three coordinate polynomials")
        if any(p.constant_value() != 0 for p in g):
            raise InputError(f"branch {self.label}: gamma(0) must be the origin")
        if all(p.is_zero() for p in g):
            raise InputError(f"branch {self.label}: gamma is identically zero")

    @classmethod
    def from_strings(cls, label: str, g1: str, g2: str, g3: str) -> BranchSpec:
        return cls(label, tuple(parse_poly(g, (BRANCH_VAR,)) for g in (g1, g2, g3)))

    def point(self, s: complex) -> tuple[complex, complex, complex]:
        return tuple(eval_complex(p, (s,))[0] for p in self.gamma)


# origin preimages


@dataclass(frozen=True)
class OriginPoint:
    label: int
    chart: int
    chart_name: str
    u: complex

    @property
    def point(self) -> tuple[complex, complex]:
        return (self.u, 0j)


def preimage_origin(germ: MapGerm) -> list[OriginPoint]:
    """Points of the source charts over the origin, within the working radius.

    At ``t = 0`` the common zeros of the non-adapted coordinates are the
    roots of their exact gcd, made square-free so multiplicities collapse.
    """
    out = []
    for ci, chart in enumerate(germ.charts):
        polys = [chart.polys[i].substitute({"t": 0}).with_vars(("u",)) for i in chart.free_indices]
        nonzero = [p for p in polys if not p.is_zero()]
        if not nonzero:
            raise InvalidGermError(f"chart {chart.name}: the whole line t=0 maps to the origin")
        g = nonzero[0]
        for p in nonzero[1:]:
            g = gcd(g, p)
        if g.degree("u") < 1:
            continue
        g = squarefree_part(g, "u")
        coeffs = g.coefficients_in("u")
        deg = max(coeffs)
        vec = [complex(float(coeffs[d].constant_value())) if d in coeffs else 0j for d in range(deg, -1, -1)]
        for r in roots_univ(vec):
            if abs(r.value) <= germ.radius:
                out.append((ci, chart.name, r.value))
    return [OriginPoint(i + 1, ci, name, u) for i, (ci, name, u) in enumerate(out)]


# fibers


def _numeric_coeffs(p: MultiPoly, t: complex, shift: complex) -> list[complex]:
    """Coefficients in ``u`` (highest first) of ``p(u, t) - shift``."""
    coeffs = p.coefficients_in("u")
    deg = max(coeffs) if coeffs else 0
    vec = [0j] * (deg + 1)
    for d, c in coeffs.items():
        vec[deg - d] = eval_complex(c, (0j, t))[0]
    vec[-1] -= shift
    scale = max((abs(v) for v in vec), default=0.0)
    while len(vec) > 1 and abs(vec[0]) <= 1e-13 * scale:
        vec.pop(0)
    return vec


def _best_coordinate(chart: Chart, t: complex, q: Sequence[complex]) -> tuple[int, list[complex]] | None:
    best = None
    for a in chart.free_indices:
        vec = _numeric_coeffs(chart.polys[a], t, q[a])
        if len(vec) > 1 and (best is None or len(vec) < len(best[1])):
            best = (a, vec)
    return best


def fiber_over(
    germ: MapGerm,
    q: Sequence[complex],
    tol: float = 1e-10,
    certify: bool = True,
    cluster_tol: float = 1e-6,
) -> TrackedFiber:
    """The set ``pi^{-1}(q)`` near the source origins, points tagged by chart index.

    Points are ``(u, t)`` pairs ordered by chart, then by ``u``.  An empty
    fiber is a valid answer.
    """
    q = tuple(complex(x) for x in q)
    if max(abs(x) for x in q) > germ.radius:
        raise InputError(f"target point {q} is outside the working radius {germ.radius}")
    points, residuals, groups = [], [], []
    for ci, chart in enumerate(germ.charts):
        k = chart.adapted_index - 1
        t = q[k]
        choice = _best_coordinate(chart, t, q)
        if choice is None:
            ok = all(
                abs(eval_complex(chart.polys[i], (0j, t))[0] - q[i]) < tol for i in chart.free_indices
            )
            if ok:
                raise NumericFailure(f"chart {chart.name}: a whole line lies over {q}")
            continue
        a, vec = choice
        try:
            roots = roots_univ(vec, cluster_tol=cluster_tol)
        except ConvergenceError as exc:
            raise NumericFailure(f"chart {chart.name}: conditioning failure over {q}: {exc}") from exc
        system = chart.system(a).with_params(dict(zip(PARAM_VARS, q))) if certify else None
        for r in roots:
            u = r.value
            if math.hypot(abs(u), abs(t)) > germ.radius:
                continue
            res = 0.0
            for i in chart.free_indices:
                val, bound = eval_complex(chart.polys[i], (u, t))
                res = max(res, abs(val - q[i]) - bound)
            if not res < tol:
                continue
            if certify and not r.is_multiple:
                try:
                    u, t_ = newton_correct(system, (u, t), tol)
                except (SingularJacobianError, ConvergenceError) as exc:
                    raise NumericFailure(f"chart {chart.name}: could not certify fiber point {u}") from exc
            points.append((complex(u), complex(t)))
            residuals.append(max(res, 0.0))
            groups.append(ci)
    order = sorted(
        range(len(points)),
        key=lambda i: (groups[i], round(points[i][0].real, 10), round(points[i][0].imag, 10)),
    )
    return TrackedFiber(
        tuple(range(1, len(points) + 1)),
        tuple(points[i] for i in order),
        tuple(residuals[i] for i in order),
        tuple(groups[i] for i in order),
    )


def tracking_coordinates(germ: MapGerm, fiber: TrackedFiber, q: Sequence[complex]) -> dict[int, int]:
    """For each chart in ``fiber``, the non-adapted coordinate whose square system is best conditioned."""
    choice = {}
    for ci in sorted(set(fiber.groups)):
        chart = germ.charts[ci]
        pts = [p for p, g in zip(fiber.points, fiber.groups) if g == ci]
        best = None
        for a in chart.free_indices:
            if chart.polys[a].degree("u") < 1:
                continue
            system = chart.system(a).with_params(dict(zip(PARAM_VARS, q)))
            conds = [np.linalg.cond(system.jac(p)) for p in pts]
            worst = max(conds)
            if best is None or worst < best[1]:
                best = (a, worst)
        if best is None or not np.isfinite(best[1]) or best[1] > 1e10:
            raise NumericFailure(f"chart {chart.name}: fiber points are singular for every coordinate")
        choice[ci] = best[0]
    return choice


# validation


@dataclass
class ValidationReport:
    dx_branches: list[str] = field(default_factory=list)
    dropped: list[str] = field(default_factory=list)
    fiber_counts: dict[str, int] = field(default_factory=dict)
    notices: list[str] = field(default_factory=list)

    @property
    def dx_empty(self) -> bool:
        return not self.dx_branches


def generic_injectivity(germ: MapGerm, samples: int = 10, seed: int = 0, scale: float = 0.2) -> list[int]:
    """Fiber cardinalities over images of random source points (1 each for a generically injective map)."""
    rng = np.random.default_rng(seed)
    counts = []
    for _ in range(samples):
        ci = int(rng.integers(len(germ.charts)))
        u, t = scale * (rng.standard_normal(2) + 1j * rng.standard_normal(2)) / 2
        q = germ.charts[ci].image(complex(u), complex(t))
        if max(abs(x) for x in q) > germ.radius:
            continue
        counts.append(len(fiber_over(germ, q, certify=False)))
    return counts


def validate_input(
    germ: MapGerm,
    branches: Sequence[BranchSpec],
    epsilon: float = 0.1,
    check_injectivity: bool = True,
) -> ValidationReport:
    """Check the input and split branches into double-point components and unibranched ones."""
    report = ValidationReport()
    for chart in germ.charts:
        # Chart construction already enforces this; re-check for charts built by hand.
        k = chart.adapted_index - 1
        if chart.polys[k] != MultiPoly.variable("t", SOURCE_VARS):
            raise InvalidGermError(f"chart {chart.name} is not adapted")
    if not 0 < epsilon < germ.radius:
        raise InputError(f"epsilon {epsilon} must lie in (0, {germ.radius})")
    labels = [b.label for b in branches]
    if len(set(labels)) != len(labels):
        raise InputError("branch labels must be distinct")
    if check_injectivity:
        counts = generic_injectivity(germ)
        if any(c != 1 for c in counts):
            raise InvalidGermError(
                f"parameterization is not generically one-to-one (generic fiber counts {counts})"
            )
    for b in branches:
        if any(p.constant_value() != 0 for p in b.gamma):
            raise InputError(f"branch {b.label}: gamma(0) must be the origin")
        n = len(fiber_over(germ, b.point(epsilon)))
        if n == 0:
            raise InputError(
                f"branch {b.label} has an empty fiber at s = {epsilon}: it is not in the image "
                "(or epsilon is too large for the working radius)"
            )
        report.fiber_counts[b.label] = n
        if n >= 2:
            report.dx_branches.append(b.label)
        else:
            report.dropped.append(b.label)
            report.notices.append(
                f"branch {b.label} has generic fiber count 1: not part of the double-point curve, dropped"
            )
    if report.dx_empty:
        report.notices.append(DX_EMPTY)
    report.notices.append(
        "smooth charts: the normalization is a Q-homology manifold (parameterized-space hypothesis holds)"
    )
    report.notices.append("assumed, not verified: real links of X are connected (Q_X[2] perverse)")
    return report


def double_point_source_curve(chart: Chart) -> MultiPoly:
    """Square-free equation in ``(u, t)`` of the source double-point curve of a chart.

    Points ``(u, t)`` sharing an image with some ``(u', t)`` are cut out by the
    divided differences of the non-adapted coordinates; eliminating ``u'`` by
    a resultant leaves a curve in the source plane (ramification included).
    """
    diffs = [divided_difference(chart.polys[i], "u", "u_") for i in chart.free_indices]
    for d in diffs:
        if d.is_constant() and not d.is_zero():
            return MultiPoly.constant(1, SOURCE_VARS)
    live = [d for d in diffs if not d.is_zero()]
    if len(live) < len(diffs):
        raise InvalidGermError(f"chart {chart.name}: a coordinate does not depend on u")
    a, b = live
    if a.degree("u_") >= 1 and b.degree("u_") >= 1:
        r = resultant(a, b, "u_")
    else:
        r = a if a.degree("u_") < 1 else b
        r = r.with_vars(SOURCE_VARS)
    if r.is_zero():
        raise InvalidGermError(f"chart {chart.name} is not generically one-to-one")
    return squarefree_part(r.with_vars(SOURCE_VARS), "u")
