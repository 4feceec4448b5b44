"""Complex-numeric kernel: roots, Newton correction, point matching, path tracking.

The tracker is deliberately simple: the predictor is the previous point, the
corrector is Newton's method, and every step is certified by a margin-based
nearest-neighbour matching.  A failed step is halved, up to
``Tolerances.max_refine`` times, and the step size recovers after success.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import (
    AmbiguityError,
    ConvergenceError,
    FiberCountChange,
    InputError,
    NumericFailure,
    RefinementExhausted,
    SingularJacobianError,
)
from .permutation import Permutation
from .polycore import MultiPoly, derivative, evaluate

Point = tuple[complex, ...]


@dataclass(frozen=True)
class Tolerances:
    newton_tol: float = 1e-10
    match_margin: float = 3.0
    max_refine: int = 14
    initial_steps: int = 64

    def __post_init__(self):
        if not self.newton_tol > 0:
            raise InputError("newton_tol must be positive")
        if not self.match_margin >= 2:
            raise InputError("match_margin must be at least 2")
        if self.max_refine < 1:
            raise InputError("max_refine must be at least 1")
        if self.initial_steps < 8:
            raise InputError("initial_steps must be at least 8")


@dataclass(frozen=True)
class TrackedFiber:
    """An ordered point set; ``groups`` keeps points of different charts apart."""

    labels: tuple[int, ...]
    points: tuple[Point, ...]
    residuals: tuple[float, ...]
    groups: tuple[int, ...] = ()

    def __post_init__(self):
        if not self.groups:
            object.__setattr__(self, "groups", (0,) * len(self.points))
        if not (len(self.labels) == len(self.points) == len(self.residuals) == len(self.groups)):
            raise InputError("fiber fields have inconsistent lengths")

    def __len__(self):
        return len(self.points)


# univariate roots


@dataclass(frozen=True)
class Root:
    value: complex
    multiplicity: int = 1

    @property
    def is_multiple(self) -> bool:
        return self.multiplicity > 1


def _horner(coeffs: Sequence[complex], z: complex) -> tuple[complex, complex, float]:
    p, dp, scale = 0j, 0j, 0.0
    az = abs(z)
    for c in coeffs:
        dp = dp * z + p
        p = p * z + c
        scale = scale * az + abs(c)
    return p, dp, scale


def roots_univ(
    coeffs: Sequence[complex],
    newton_tol: float = 1e-10,
    cluster_tol: float = 1e-6,
    max_iter: int = 60,
) -> list[Root]:
    """All roots of a polynomial given highest-degree coefficient first.

    Companion-matrix eigenvalues are polished by Newton's method; roots
    closer than ``cluster_tol`` (relative) are merged into one set point with
    a multiplicity.  Each returned root satisfies the backward-error
    certificate ``|p(r)| < newton_tol * sum |a_i| |r|^i``.
    """
    c = np.asarray(coeffs, dtype=complex)
    if c.size == 0 or c[0] == 0:
        raise InputError("leading coefficient must be nonzero")
    if c.size == 1:
        raise InputError("degree-0 polynomial has no roots")
    if not np.all(np.isfinite(c)):
        raise NumericFailure("non-finite polynomial coefficients")
    vals = [complex(r) for r in np.roots(c)]
    clist = [complex(x) for x in c]

    # cluster first, so Newton is not run on (ill-conditioned) multiple roots
    order = sorted(range(len(vals)), key=lambda i: (vals[i].real, vals[i].imag))
    parent = list(range(len(vals)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for a in range(len(vals)):
        for b in range(a + 1, len(vals)):
            ra, rb = vals[a], vals[b]
            if abs(ra - rb) < cluster_tol * max(1.0, abs(ra), abs(rb)):
                parent[find(a)] = find(b)
    clusters: dict[int, list[int]] = {}
    for i in order:
        clusters.setdefault(find(i), []).append(i)

    def polish(z):
        for _ in range(max_iter):
            p, dp, _ = _horner(clist, z)
            if dp == 0:
                break
            step = p / dp
            z -= step
            if abs(step) <= 4 * np.finfo(float).eps * max(1.0, abs(z)):
                break
        return z

    def certified(z):
        p, _, scale = _horner(clist, z)
        return abs(p) < newton_tol * max(scale, np.finfo(float).tiny), abs(p)

    out = []
    for members in clusters.values():
        if len(members) > 1:
            z = sum(vals[i] for i in members) / len(members)
            if certified(z)[0]:
                out.append(Root(complex(z), len(members)))
                continue
            # tight but genuinely distinct roots (small scale): keep them apart
        for i in members:
            z = polish(vals[i])
            ok, res = certified(z)
            if not ok:
                raise ConvergenceError(f"root {z} failed its residual certificate (|p|={res:.3g})")
            out.append(Root(complex(z), 1))
    out.sort(key=lambda r: (round(r.value.real, 12), round(r.value.imag, 12)))
    return out


# square systems and Newton


class PolySystem:
    """Square polynomial system in ``unknowns``; other variables are fixed parameters.

    ``side`` equations are not used by Newton's method, only by residual
    checks (an overdetermined system solved through a square subsystem).
    """

    def __init__(
        self,
        equations: Sequence[MultiPoly],
        unknowns: Sequence[str],
        params: Mapping[str, complex] | None = None,
        side: Sequence[MultiPoly] = (),
    ):
        self.unknowns = tuple(unknowns)
        self.params = dict(params or {})
        if len(equations) != len(self.unknowns):
            raise InputError("system is not square")
        allvars: list[str] = []
        for e in list(equations) + list(side):
            allvars.extend(v for v in e.vars if v not in allvars)
        self.vars = tuple(allvars)
        for v in self.vars:
            if v not in self.unknowns and v not in self.params:
                raise InputError(f"variable {v!r} is neither unknown nor parameter")
        self.equations = tuple(e.with_vars(self.vars) for e in equations)
        self.side = tuple(e.with_vars(self.vars) for e in side)
        self.jacobian = tuple(
            tuple(_cached_derivative(e, u) for u in self.unknowns) for e in self.equations
        )
        self._slots = [self.unknowns.index(v) if v in self.unknowns else None for v in self.vars]

    def with_params(self, params: Mapping[str, complex]) -> PolySystem:
        new = object.__new__(PolySystem)
        new.__dict__.update(self.__dict__)
        new.params = dict(params)
        return new

    def full_point(self, x: Sequence[complex]) -> list[complex]:
        return [x[s] if s is not None else self.params[v] for v, s in zip(self.vars, self._slots)]

    def values(self, x: Sequence[complex]) -> np.ndarray:
        pt = self.full_point(x)
        return np.array([evaluate(e, pt) for e in self.equations])

    def jac(self, x: Sequence[complex]) -> np.ndarray:
        pt = self.full_point(x)
        return np.array([[evaluate(d, pt) for d in row] for row in self.jacobian])

    def residual(self, x: Sequence[complex], include_side: bool = True) -> float:
        pt = self.full_point(x)
        eqs = self.equations + (self.side if include_side else ())
        return max((abs(evaluate(e, pt)) for e in eqs), default=0.0)


_DERIVATIVES: dict[tuple[MultiPoly, str], MultiPoly] = {}


def _cached_derivative(p: MultiPoly, var: str) -> MultiPoly:
    key = (p, var)
    d = _DERIVATIVES.get(key)
    if d is None:
        d = _DERIVATIVES[key] = derivative(p, var)
    return d


def newton_correct(
    system: PolySystem,
    guess: Sequence[complex],
    tol: float = 1e-10,
    max_iter: int = 60,
    cond_max: float = 1e10,
) -> Point:
    """Newton's method from ``guess``.

    Converged means residual below ``tol`` *and* a Newton step that has
    collapsed to rounding level, which only happens at a regular solution;
    at a singular solution the iteration only contracts linearly and the
    Jacobian condition number eventually exceeds ``cond_max``.
    """
    x = np.array(guess, dtype=complex)
    prev_step = math.inf
    for _ in range(max_iter):
        f = system.values(x)
        J = system.jac(x)
        cond = np.linalg.cond(J)
        if not np.isfinite(cond) or cond > cond_max:
            raise SingularJacobianError(f"Jacobian condition {cond:.3g} at {tuple(x)}")
        step = np.linalg.solve(J, f)
        x = x - step
        snorm = float(np.max(np.abs(step)))
        xnorm = max(1.0, float(np.max(np.abs(x))))
        if snorm <= 1e-13 * xnorm:
            res = float(np.max(np.abs(system.values(x))))
            if res < tol:
                return tuple(complex(v) for v in x)
        if not np.all(np.isfinite(x)) or (snorm > 1e8 * xnorm):
            raise ConvergenceError("Newton iteration diverged")
        prev_step = snorm
    raise ConvergenceError(f"Newton did not converge in {max_iter} iterations (last step {prev_step:.3g})")


# matching


def _distance_matrix(a: Sequence[Point], b: Sequence[Point], ga, gb, relative: bool = False) -> np.ndarray:
    A = np.array(a, dtype=complex).reshape(len(a), -1)
    B = np.array(b, dtype=complex).reshape(len(b), -1)
    diff = np.abs(A[:, None, :] - B[None, :, :])
    if relative:
        # each coordinate measured against its own size: scale-free near a point where all coordinates vanish
        floor = 1e-12 * max(float(np.max(np.abs(A), initial=0.0)), float(np.max(np.abs(B), initial=0.0)), 1e-300)
        size = np.maximum(np.maximum(np.abs(A)[:, None, :], np.abs(B)[None, :, :]), floor)
        diff = diff / size
    D = np.sqrt(np.sum(diff**2, axis=2))
    if ga is not None:
        mask = np.array(ga)[:, None] != np.array(gb)[None, :]
        D[mask] = np.inf
    return D


def match_points(
    old: Sequence[Point],
    new: Sequence[Point],
    margin: float = 3.0,
    old_groups: Sequence[int] | None = None,
    new_groups: Sequence[int] | None = None,
    relative: bool = False,
) -> tuple[int, ...]:
    """Certified bijection ``old[i] -> new[result[i]]``.

    Each new point goes to its nearest old point.  The assignment is
    accepted only if it is a bijection, every new point is ``margin`` times
    closer to its partner than to any other old point, and the smallest gap
    between old points is at least ``margin`` times the largest displacement.
    With ``relative`` each coordinate difference is divided by the size of
    that coordinate, which suits paths shrinking to a common point.
    """
    if len(old) != len(new):
        raise AmbiguityError("point sets have different cardinalities")
    n = len(old)
    if n == 0:
        return ()
    old = [tuple(np.atleast_1d(p)) for p in old]
    new = [tuple(np.atleast_1d(p)) for p in new]
    if (old_groups is None) != (new_groups is None):
        raise InputError("groups must be given for both point sets or neither")
    D = _distance_matrix(new, old, new_groups, old_groups, relative)
    nearest = np.argmin(D, axis=1)
    if len(set(nearest.tolist())) != n:
        raise AmbiguityError("nearest-point assignment is not a bijection")
    disp = D[np.arange(n), nearest]
    if not np.all(np.isfinite(disp)):
        raise AmbiguityError("point has no partner in its group")
    for j in range(n):
        others = np.delete(D[j], nearest[j])
        second = float(np.min(others)) if others.size else math.inf
        if not second >= margin * disp[j]:
            raise AmbiguityError(f"point {j} is not separated from its runner-up (margin {margin})")
    G = _distance_matrix(old, old, old_groups, old_groups, relative)
    np.fill_diagonal(G, np.inf)
    gap = float(np.min(G)) if n > 1 else math.inf
    if not gap >= margin * float(np.max(disp)):
        raise AmbiguityError("displacement too large relative to the point gap")
    result = [0] * n
    for j, i in enumerate(nearest.tolist()):
        result[i] = j
    return tuple(result)


# path tracking

Family = Callable[[float], Sequence[PolySystem]]


@dataclass
class PathResult:
    end: TrackedFiber
    depth: int = 0
    steps: int = 0
    taus: list[float] = field(default_factory=list)
    samples: list[list[Point]] = field(default_factory=list)


def track_path(
    family: Family,
    start: TrackedFiber,
    tau0: float,
    tau1: float,
    tol: Tolerances = Tolerances(),
    recount: Callable[[float], int] | None = None,
    steps: int | None = None,
) -> PathResult:
    """Continue every point of ``start`` along ``family(tau)`` from ``tau0`` to ``tau1``.

    ``family(tau)[i]`` is the square system satisfied by point ``i``.  The
    returned fiber keeps the order and labels of ``start``.
    """
    if any(r >= tol.newton_tol for r in start.residuals):
        raise NumericFailure("start fiber residuals exceed newton_tol")
    n0 = len(start)
    h0 = (tau1 - tau0) / (steps or tol.initial_steps)
    if h0 == 0 or n0 == 0:
        return PathResult(start)
    tau = tau0
    pts = list(start.points)
    h = h0
    depth = max_depth = 0
    nsteps = 0
    taus = [tau0]
    groups = list(start.groups)
    sign = 1.0 if tau1 > tau0 else -1.0
    while sign * (tau1 - tau) > 0:
        tn = tau + h
        if sign * (tn - tau1) > -1e-12 * abs(h0):
            tn = tau1
        try:
            systems = family(tn)
            corrected = [newton_correct(s, p, tol.newton_tol) for s, p in zip(systems, pts)]
            for s, p in zip(systems, corrected):
                if not s.residual(p) < tol.newton_tol:
                    raise AmbiguityError("corrected point left the fiber (side residual)")
            perm = match_points(pts, corrected, tol.match_margin, groups, groups)
            if any(i != j for i, j in enumerate(perm)):
                raise AmbiguityError("path jumping detected")
        except (AmbiguityError, SingularJacobianError, ConvergenceError) as exc:
            depth += 1
            max_depth = max(max_depth, depth)
            if depth > tol.max_refine:
                raise RefinementExhausted(
                    f"step refinement exhausted at tau={tau:.6g}: {exc}", depth=depth
                ) from exc
            h /= 2
            continue
        if recount is not None:
            m = recount(tn)
            if m != n0:
                raise FiberCountChange(
                    f"fiber cardinality changed from {n0} to {m} at tau={tn:.6g}", depth=depth
                )
        tau, pts = tn, corrected
        taus.append(tau)
        nsteps += 1
        if depth > 0:
            depth -= 1
            h *= 2
    systems = family(tau1)
    end = TrackedFiber(
        start.labels,
        tuple(pts),
        tuple(s.residual(p) for s, p in zip(systems, pts)),
        start.groups,
    )
    return PathResult(end, max_depth, nsteps, taus)


@dataclass
class LoopResult:
    end: TrackedFiber
    permutation: Permutation
    closure: float
    depth: int
    steps: int


def closing_permutation(start: TrackedFiber, end: TrackedFiber, tol: Tolerances) -> tuple[Permutation, float]:
    """Permutation sending sheet ``j`` to the start sheet its continuation lands on."""
    perm = match_points(start.points, end.points, tol.match_margin, start.groups, end.groups)
    sigma = Permutation(perm).inverse()
    closure = max(
        (
            float(np.max(np.abs(np.subtract(end.points[j], start.points[sigma(j)]))))
            for j in range(len(start))
        ),
        default=0.0,
    )
    return sigma, closure


def track_loop(
    family: Family,
    start: TrackedFiber,
    theta_end: float = 2 * math.pi,
    tol: Tolerances = Tolerances(),
    recount: Callable[[float], int] | None = None,
    theta_start: float = 0.0,
    steps: int | None = None,
) -> LoopResult:
    """Track ``start`` around a closed loop and read off the monodromy permutation.

    ``family(theta_start)`` and ``family(theta_end)`` must describe the same
    fiber.  ``sigma(j) = i`` means the sheet starting at point ``j`` ends at
    point ``i``.
    """
    res = track_path(family, start, theta_start, theta_end, tol, recount, steps)
    sigma, closure = closing_permutation(start, res.end, tol)
    if not closure < 10 * tol.newton_tol:
        raise NumericFailure(f"loop closure residual {closure:.3g} too large", depth=res.depth)
    return LoopResult(res.end, sigma, closure, res.depth, res.steps)


def circle(radius: float, theta: float) -> complex:
    return radius * cmath.exp(1j * theta)


def track_point_sets(
    solve: Callable[[float], Sequence[Point]],
    start: Sequence[Point],
    tau0: float,
    tau1: float,
    tol: Tolerances = Tolerances(),
    steps: int | None = None,
    relative: bool = False,
) -> PathResult:
    """Continue a point set by re-solving at each step and matching.

    Used where points may be multiple solutions (no Newton corrector
    available): ``solve(tau)`` returns the full point set at ``tau``.
    """
    n0 = len(start)
    pts = [tuple(p) for p in start]
    h0 = (tau1 - tau0) / (steps or tol.initial_steps)
    tau, h = tau0, h0
    depth = max_depth = nsteps = 0
    taus = [tau0]
    sign = 1.0 if tau1 > tau0 else -1.0
    samples = [list(pts)]
    while sign * (tau1 - tau) > 0:
        tn = tau + h
        if sign * (tn - tau1) > -1e-12 * abs(h0):
            tn = tau1
        new = [tuple(p) for p in solve(tn)]
        if len(new) != n0:
            raise FiberCountChange(f"point count changed from {n0} to {len(new)} at tau={tn:.6g}", depth=depth)
        try:
            perm = match_points(pts, new, tol.match_margin, relative=relative)
        except AmbiguityError as exc:
            depth += 1
            max_depth = max(max_depth, depth)
            if depth > tol.max_refine:
                raise RefinementExhausted(f"step refinement exhausted at tau={tau:.6g}: {exc}", depth=depth) from exc
            h /= 2
            continue
        tau, pts = tn, [new[perm[i]] for i in range(n0)]
        taus.append(tau)
        samples.append(list(pts))
        nsteps += 1
        if depth > 0:
            depth -= 1
            h *= 2
    end = TrackedFiber(tuple(range(1, n0 + 1)), tuple(pts), (0.0,) * n0)
    return PathResult(end, max_depth, nsteps, taus, samples)
