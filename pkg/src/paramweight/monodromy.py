"""Sheet counts, sheet permutations and radial incidence along double-point branches.

For a branch ``C`` the loop ``s = eps * exp(i theta)`` (or, for discovered
branches, a composite loop of the slice ``l = eps * exp(i theta)``) lifts to
paths of the fiber points; the resulting permutation of sheets models the
internal monodromy of the comparison complex on ``C \\ 0``.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import AmbiguityError, InputError, NumericFailure
from .germ import PARAM_VARS, BranchSpec, MapGerm, OriginPoint, fiber_over, tracking_coordinates
from .numkernel import (
    _distance_matrix,
    PathResult,
    Tolerances,
    TrackedFiber,
    closing_permutation,
    match_points,
    roots_univ,
    track_loop,
    track_path,
    track_point_sets,
)
from .permutation import Permutation, format_cycle_type
from .polycore import MultiPoly, eval_complex, primitive_part, resultant, squarefree_part
from .weightcalc import BranchData, rational_rank

TWO_PI = 2 * math.pi
RADIAL_DECAY = 1e-6
LIMIT_TOL = 1e-2

Target = tuple[complex, complex, complex]


@dataclass(frozen=True)
class LoopSpec:
    branch: object
    epsilon: float = 0.1
    tolerances: Tolerances = Tolerances()

    def __post_init__(self):
        if not self.epsilon > 0:
            raise InputError("loop radius epsilon must be positive")

    def halved(self) -> LoopSpec:
        return LoopSpec(self.branch, self.epsilon / 2, self.tolerances)

    def with_tolerances(self, **changes) -> LoopSpec:
        t = self.tolerances
        fields_ = {k: getattr(t, k) for k in ("newton_tol", "match_margin", "max_refine", "initial_steps")}
        fields_.update(changes)
        return LoopSpec(self.branch, self.epsilon, Tolerances(**fields_))


@dataclass
class BranchMonodromy:
    label: str
    n: int
    sigma: Permutation
    basepoint: TrackedFiber
    radial_incidence: dict[int, int] | None = None
    depth: int = 0
    closure: float = 0.0
    epsilon: float = 0.0

    @property
    def cycle_type(self) -> tuple[int, ...]:
        return self.sigma.cycle_type

    def branch_data(self) -> BranchData:
        return BranchData(self.label, self.n, self.sigma)

    def describe(self) -> str:
        return f"branch {self.label}: n_C = {self.n}, sigma = {self.sigma}, cycle type: {format_cycle_type(self.cycle_type)}"


# paths in the target


def loop_path(branch, eps: float) -> tuple[Callable[[float], Target], float]:
    if isinstance(branch, BranchSpec):
        return (lambda theta: branch.point(eps * complex(math.cos(theta), math.sin(theta)))), TWO_PI
    return branch.loop_path(eps)


def radial_path(branch, eps: float) -> Callable[[float], Target]:
    """``rho -> point`` for ``rho`` in ``(0, 1]``; ``rho = 1`` is the loop basepoint."""
    if isinstance(branch, BranchSpec):
        return lambda rho: branch.point(eps * rho)
    return branch.radial_path(eps)


def basepoint(branch, eps: float) -> Target:
    if isinstance(branch, BranchSpec):
        return branch.point(eps)
    return branch.basepoint_at(eps)


def _family(germ: MapGerm, fiber: TrackedFiber, q0: Target, path: Callable[[float], Target]):
    coords = tracking_coordinates(germ, fiber, q0)
    templates = {ci: germ.charts[ci].system(a) for ci, a in coords.items()}

    def family(tau):
        params = dict(zip(PARAM_VARS, path(tau)))
        return [templates[g].with_params(params) for g in fiber.groups]

    return family


def _recount(germ: MapGerm, path: Callable[[float], Target]):
    return lambda tau: len(fiber_over(germ, path(tau), certify=False))


def branch_fiber_count(germ: MapGerm, spec: LoopSpec) -> int:
    """Sheet count over the basepoint, checked against the count at half the radius."""
    _check_radius(germ, spec)
    n = len(fiber_over(germ, basepoint(spec.branch, spec.epsilon)))
    n_half = len(fiber_over(germ, basepoint(spec.branch, spec.epsilon / 2)))
    if n != n_half:
        raise NumericFailure(
            f"branch {spec.branch.label}: fiber count {n} at eps={spec.epsilon} but {n_half} at eps/2; "
            "epsilon too large",
            branch=spec.branch.label,
        )
    return n


def _check_radius(germ: MapGerm, spec: LoopSpec):
    if not spec.epsilon < germ.radius:
        raise InputError(f"epsilon {spec.epsilon} must be below the working radius {germ.radius}")


def branch_monodromy(germ: MapGerm, spec: LoopSpec, origin: Sequence[OriginPoint] | None = None) -> BranchMonodromy:
    """Track the basepoint fiber once around the branch loop.

    With ``origin`` given, also computes the radial incidence of sheets to
    origin preimages and checks that it is constant on sigma-orbits.
    """
    _check_radius(germ, spec)
    label = spec.branch.label
    tol = spec.tolerances
    path, period = loop_path(spec.branch, spec.epsilon)
    q0 = path(0.0)
    fiber = fiber_over(germ, q0, tol.newton_tol)
    if len(fiber) < 2:
        raise InputError(f"branch {label} has {len(fiber)} sheet(s); monodromy needs at least 2")
    try:
        loop = track_loop(
            _family(germ, fiber, q0, path), fiber, period, tol, recount=_recount(germ, path)
        )
    except NumericFailure as exc:
        exc.branch = label
        raise
    result = BranchMonodromy(
        label, len(fiber), loop.permutation, fiber, None, loop.depth, loop.closure, spec.epsilon
    )
    if origin is not None:
        result.radial_incidence = radial_limit(germ, spec, origin, fiber)
        for cyc in result.sigma.cycles():
            if len({result.radial_incidence[fiber.labels[i]] for i in cyc}) != 1:
                raise NumericFailure(
                    f"branch {label}: radial incidence is not constant on a sigma-orbit", branch=label
                )
    return result


def _track_radially(
    germ: MapGerm, fiber: TrackedFiber, radial: Callable[[float], Target], rho_end: float, tol: Tolerances
) -> PathResult:
    path = lambda tau: radial(math.exp(-tau))
    return track_path(_family(germ, fiber, radial(1.0), path), fiber, 0.0, -math.log(rho_end), tol)


def _assign_limits(fiber: TrackedFiber, origin: Sequence[OriginPoint], margin: float) -> dict[int, int] | None:
    incidence = {}
    for label, pt, g in zip(fiber.labels, fiber.points, fiber.groups):
        dists = sorted((math.hypot(abs(pt[0] - o.u), abs(pt[1])), o.label) for o in origin if o.chart == g)
        if not dists or dists[0][0] > LIMIT_TOL:
            return None
        if len(dists) > 1 and dists[1][0] < margin * dists[0][0]:
            return None
        incidence[label] = dists[0][1]
    return incidence


def radial_limit(
    germ: MapGerm,
    spec: LoopSpec,
    origin: Sequence[OriginPoint],
    fiber: TrackedFiber | None = None,
) -> dict[int, int]:
    """Map each sheet label to the label of the origin preimage its radial path tends to.

    The radius shrinks one decade at a time until every sheet is within
    ``LIMIT_TOL`` of exactly one origin preimage of its chart.
    """
    tol = spec.tolerances
    if fiber is None:
        fiber = fiber_over(germ, basepoint(spec.branch, spec.epsilon), tol.newton_tol)
    radial = radial_path(spec.branch, spec.epsilon)
    label = spec.branch.label
    current, rho = fiber, 1.0
    while True:
        incidence = _assign_limits(current, origin, tol.match_margin)
        if incidence is not None:
            return incidence
        if rho <= RADIAL_DECAY * (1 + 1e-9):
            raise NumericFailure(f"branch {label}: sheets do not tend to distinct origin preimages", branch=label)
        stage = lambda r, rho=rho: radial(rho * r)
        try:
            current = _track_radially(germ, current, stage, 0.1, tol).end
        except NumericFailure as exc:
            raise NumericFailure(f"branch {label}: radial tracking failed: {exc}", branch=label) from exc
        rho *= 0.1


@dataclass
class HalvingCheck:
    sigma: Permutation
    sigma_half: Permutation
    relabel: Permutation

    @property
    def consistent(self) -> bool:
        return self.sigma_half == self.sigma.conjugate(self.relabel)


def epsilon_halving(germ: MapGerm, spec: LoopSpec) -> HalvingCheck:
    """Compare the monodromy at ``eps`` and ``eps/2`` after radially relabeling sheets."""
    full = branch_monodromy(germ, spec)
    half = branch_monodromy(germ, spec.halved())
    radial = radial_path(spec.branch, spec.epsilon)
    res = _track_radially(germ, full.basepoint, radial, 0.5, spec.tolerances)
    perm = match_points(
        half.basepoint.points, res.end.points, spec.tolerances.match_margin, half.basepoint.groups, res.end.groups
    )
    # perm[i] = j: sheet j at eps continues to sheet i at eps/2
    relabel = Permutation(perm).inverse()
    check = HalvingCheck(full.sigma, half.sigma, relabel)
    if not check.consistent:
        raise NumericFailure(
            f"branch {spec.branch.label}: monodromy changes between eps and eps/2", branch=spec.branch.label
        )
    return check


def incidence_rank(b0: int, monodromies: Sequence[BranchMonodromy]) -> int:
    """Rank of the map from functions on the origin preimages (mod constants) to sheet functions (mod constants)."""
    rows = []
    for m in monodromies:
        if m.radial_incidence is None:
            raise InputError(f"branch {m.label} has no radial incidence")
        labels = m.basepoint.labels
        first = m.radial_incidence[labels[0]]
        for lab in labels[1:]:
            row = [0] * b0
            row[m.radial_incidence[lab] - 1] += 1
            row[first - 1] -= 1
            rows.append(row)
    return rational_rank(rows) if rows else 0


def incidence_injective(b0: int, monodromies: Sequence[BranchMonodromy]) -> bool:
    return incidence_rank(b0, monodromies) == b0 - 1


# branch discovery


def _trim(vec: list[complex]) -> list[complex]:
    scale = max((abs(v) for v in vec), default=0.0)
    while len(vec) > 1 and abs(vec[0]) <= 1e-13 * scale:
        vec.pop(0)
    return vec


def _coeff_vector(p: MultiPoly, var: str, point: Sequence[complex]) -> list[complex]:
    coeffs = p.coefficients_in(var)
    if not coeffs:
        return [0j]
    deg = max(coeffs)
    vec = [0j] * (deg + 1)
    for d, c in coeffs.items():
        vec[deg - d] = eval_complex(c, point)[0]
    return _trim(vec)


class SliceSolver:
    """Points of a curve ``V(g1, g2)`` on the hyperplane ``l = w``.

    One target variable is eliminated through ``l``; an exact resultant of
    the remaining pair gives a univariate equation whose square-free part
    is solved numerically, then the last coordinate is back-solved.
    """

    def __init__(self, ideal: Sequence[MultiPoly], slice_form: MultiPoly, variables: Sequence[str] = ("x", "y", "z")):
        self.variables = tuple(variables)
        if len(ideal) != 2:
            raise InputError("the curve must be given by two generators")
        self.ideal = tuple(p.with_vars(self.variables) for p in ideal)
        ell = slice_form.with_vars(self.variables)
        if ell.total_degree() != 1 or ell.constant_value() != 0:
            raise InputError("slice form must be linear and homogeneous")
        self.slice_form = ell
        self.lin = [ell.terms.get(tuple(int(i == j) for j in range(3)), 0) for i in range(3)]
        self.elim = max(range(3), key=lambda i: (abs(self.lin[i]) > 0, -i))
        rest = [i for i in range(3) if i != self.elim]
        vars4 = self.variables + ("w",)
        w = MultiPoly.variable("w", vars4)
        v_expr = w
        for i in rest:
            v_expr = v_expr - MultiPoly.variable(self.variables[i], vars4) * self.lin[i]
        v_expr = v_expr * (1 / self.lin[self.elim])
        self.v_expr = v_expr
        subs = {self.variables[self.elim]: v_expr}
        self.h = [p.with_vars(vars4).substitute(subs) for p in self.ideal]
        self.rest = rest
        self._choose_elimination()

    def _choose_elimination(self):
        names = [self.variables[i] for i in self.rest]
        for a, b in (names, names[::-1]):
            h1, h2 = self.h
            if h1.degree(b) >= 1 and h2.degree(b) >= 1:
                r = resultant(h1, h2, b)
            elif h1.degree(b) < 1 and not h1.is_zero():
                r = h1
            elif h2.degree(b) < 1 and not h2.is_zero():
                r = h2
            else:
                continue
            if not r.is_zero() and r.degree(a) >= 1:
                r = primitive_part(r, a)
                self.a, self.b = a, b
                self.univariate = squarefree_part(r, a)
                return
        raise InputError("slice form is degenerate on the curve (elimination polynomial vanishes)")

    def solve(self, w: complex, tol: float = 1e-8) -> list[Target]:
        uni = self.univariate
        pt = {v: 0j for v in uni.vars}
        pt["w"] = w
        vec = _coeff_vector(uni, self.a, [pt[v] for v in uni.vars])
        if len(vec) < 2:
            return []
        points = []
        for ra in roots_univ(vec):
            vals = {self.a: ra.value, "w": w}
            polys = []
            for h in self.h:
                base = [vals.get(v, 0j) for v in h.vars]
                polys.append(_coeff_vector(h, self.b, base))
            live = [v for v in polys if len(v) > 1]
            if not live:
                if all(abs(v[0]) < tol for v in polys):
                    raise InputError("slice form is degenerate: a whole line of the curve lies in the slice")
                continue
            vec_b = min(live, key=len)
            for rb in roots_univ(vec_b):
                full = self._point(ra.value, rb.value, w)
                if max(abs(eval_complex(p, full)[0]) for p in self.ideal) < tol * max(1.0, abs(w)):
                    points.append(full)
        uniq: list[Target] = []
        for p in points:
            if all(max(abs(np.subtract(p, u))) > 1e-9 * max(max(map(abs, p)), max(map(abs, u))) for u in uniq):
                uniq.append(p)
        uniq.sort(key=lambda p: tuple((round(c.real, 10), round(c.imag, 10)) for c in p))
        return uniq

    def _point(self, a_val: complex, b_val: complex, w: complex) -> Target:
        vals = {self.a: a_val, self.b: b_val, "w": w}
        elim_val = eval_complex(self.v_expr, [vals.get(v, 0j) for v in self.v_expr.vars])[0]
        out = [0j, 0j, 0j]
        out[self.elim] = elim_val
        for i in self.rest:
            out[i] = vals[self.variables[i]]
        return tuple(out)


class _SampledPath:
    """A continuous choice of curve point, backed by tracked samples and re-solved on demand."""

    def __init__(
        self,
        taus: Sequence[float],
        points: Sequence[Target],
        resolve: Callable[[float], list[Target]],
        margin: float,
        relative: bool = False,
    ):
        self.relative = relative
        self.taus = list(taus)
        self.points = [np.array(p, dtype=complex) for p in points]
        self.resolve = resolve
        self.margin = margin

    def __call__(self, tau: float) -> Target:
        i = bisect.bisect_right(self.taus, tau)
        i = min(max(i, 1), len(self.taus) - 1)
        t0, t1 = self.taus[i - 1], self.taus[i]
        lam = 0.0 if t1 == t0 else min(max((tau - t0) / (t1 - t0), 0.0), 1.0)
        guess = (1 - lam) * self.points[i - 1] + lam * self.points[i]
        cands = self.resolve(tau)
        if not cands:
            raise NumericFailure("curve has no slice point here")
        row = _distance_matrix([tuple(guess)], cands, None, None, self.relative)[0]
        d = sorted((float(x), k) for k, x in enumerate(row))
        if len(d) > 1 and d[1][0] < self.margin * d[0][0]:
            raise AmbiguityError("curve point selection is ambiguous")
        return cands[d[0][1]]


@dataclass
class DiscoveredBranch:
    """A branch found by slicing; ``m`` is the covering degree of the slice form on it."""

    label: str
    solver: SliceSolver
    epsilon: float
    m: int
    basepoint: Target
    loop_taus: list[float] = field(repr=False, default_factory=list)
    loop_points: list[Target] = field(repr=False, default_factory=list)
    segment: int = 0
    tolerances: Tolerances = field(repr=False, default_factory=Tolerances)
    _radial: _SampledPath | None = field(repr=False, default=None)

    def _circle(self, eps: float):
        return lambda theta: self.solver.solve(eps * complex(math.cos(theta), math.sin(theta)))

    def loop_path(self, eps: float):
        if not math.isclose(eps, self.epsilon, rel_tol=1e-12):
            return self.at_epsilon(eps).loop_path(eps)
        path = _SampledPath(self.loop_taus, self.loop_points, self._circle(eps), self.tolerances.match_margin)
        return path, TWO_PI * self.m

    def _radial_sampled(self) -> _SampledPath:
        if self._radial is None:
            start = self.solver.solve(self.epsilon)
            idx = _nearest_index(start, self.basepoint)
            T = -math.log(RADIAL_DECAY)
            solve = lambda tau: self.solver.solve(self.epsilon * math.exp(-tau))
            res = track_point_sets(solve, start, 0.0, T, self.tolerances, relative=True)
            pts = [sample[idx] for sample in res.samples]
            self._radial = _SampledPath(res.taus, pts, solve, self.tolerances.match_margin, relative=True)
        return self._radial

    def radial_path(self, eps: float):
        if not math.isclose(eps, self.epsilon, rel_tol=1e-12):
            return self.at_epsilon(eps).radial_path(eps)
        sampled = self._radial_sampled()
        return lambda rho: sampled(-math.log(rho))

    def basepoint_at(self, eps: float) -> Target:
        if math.isclose(eps, self.epsilon, rel_tol=1e-12):
            return self.basepoint
        if eps > self.epsilon:
            raise InputError("cannot move a discovered branch to a larger radius")
        return self._radial_sampled()(-math.log(eps / self.epsilon))

    def at_epsilon(self, eps: float) -> DiscoveredBranch:
        """The same branch re-discovered at radius ``eps`` (smaller than the discovery radius)."""
        target = self.basepoint_at(eps)
        for b in discover_branches(self.solver, eps, self.tolerances):
            idx = _nearest_index(b.cycle_points(), target)
            if np.linalg.norm(np.subtract(b.cycle_points()[idx], target)) < 1e-6 * max(1.0, eps):
                return b.rotated(idx, self.label)
        raise NumericFailure(f"branch {self.label} not found again at radius {eps}")

    def cycle_points(self) -> list[Target]:
        """Slice points of this branch over ``l = eps``, in loop order."""
        return [self.loop_points[k * self.segment] for k in range(self.m)]

    def rotated(self, k: int, label: str) -> DiscoveredBranch:
        cut = k * self.segment
        pts = self.loop_points[cut:] + self.loop_points[1 : cut + 1]
        return DiscoveredBranch(
            label, self.solver, self.epsilon, self.m, pts[0], list(self.loop_taus), pts, self.segment, self.tolerances
        )


def _nearest_index(points: Sequence[Target], target: Target) -> int:
    d = [float(np.linalg.norm(np.subtract(p, target))) for p in points]
    return int(np.argmin(d))


def discover_branches(
    solver: SliceSolver, epsilon: float, tolerances: Tolerances = Tolerances()
) -> list[DiscoveredBranch]:
    """Group the slice points over ``l = eps`` into branches by their loop permutation.

    Each cycle of the permutation is one branch; its length is the covering
    degree of ``l`` on that branch and its loop is traversed ``m`` times.
    """
    start = solver.solve(epsilon)
    if not start:
        raise NumericFailure(f"no slice points on the curve at l = {epsilon}")
    circle = lambda theta: solver.solve(epsilon * complex(math.cos(theta), math.sin(theta)))
    res = track_point_sets(circle, start, 0.0, TWO_PI, tolerances)
    fib = TrackedFiber(tuple(range(1, len(start) + 1)), tuple(start), (0.0,) * len(start))
    sigma, _ = closing_permutation(fib, res.end, tolerances)
    # slice points of curve components that miss the origin do not contract as l -> 0
    T = -math.log(RADIAL_DECAY)
    shrink = lambda tau: solver.solve(epsilon * math.exp(-tau))
    radial = track_point_sets(shrink, start, 0.0, T, tolerances, relative=True)
    contracts = [
        np.linalg.norm(e) <= 0.5 * np.linalg.norm(s0) for s0, e in zip(start, radial.end.points)
    ]
    branches = []
    for cyc in sigma.cycles():
        near = {contracts[i] for i in cyc}
        if near != {True}:
            if len(near) > 1:
                raise NumericFailure("slice points of one loop cycle disagree about reaching the origin")
            continue
        taus: list[float] = []
        pts: list[Target] = []
        for j, sheet in enumerate(cyc):
            seg_t = [t + TWO_PI * j for t in res.taus]
            seg_p = [sample[sheet] for sample in res.samples]
            if j:
                seg_t, seg_p = seg_t[1:], seg_p[1:]
            taus.extend(seg_t)
            pts.extend(seg_p)
        branch = DiscoveredBranch(
            f"D{len(branches) + 1}", solver, epsilon, len(cyc), start[cyc[0]], taus, pts, len(res.taus) - 1, tolerances
        )
        branch._radial = _SampledPath(
            radial.taus, [sample[cyc[0]] for sample in radial.samples], shrink, tolerances.match_margin, relative=True
        )
        branches.append(branch)
    return branches
