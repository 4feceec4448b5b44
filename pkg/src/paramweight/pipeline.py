"""End-to-end analysis: config in, deterministic report tree out."""

from __future__ import annotations

import json
from typing import Sequence

from .config import Config, config_to_dict
from .errors import InputError, NumericFailure
from .germ import BranchSpec, MapGerm, fiber_over, preimage_origin, validate_input
from .monodromy import (
    BranchMonodromy,
    LoopSpec,
    SliceSolver,
    branch_fiber_count,
    branch_monodromy,
    discover_branches,
    epsilon_halving,
    incidence_injective,
)
from .polycore import parse_poly
from .weightcalc import (
    COMBINATORIAL,
    DX_EMPTY,
    SurfaceSummary,
    parameterized_check,
    vanishing_cycle_report,
    weight_report,
)


def format_complex(z: complex) -> str:
    """``re+im i`` with 17 significant digits; negative zeros print as zero."""
    re = z.real + 0.0
    im = z.imag + 0.0
    sign = "-" if im < 0 else "+"
    return f"{re:.17g}{sign}{abs(im):.17g}i"


def _point(p: Sequence[complex]) -> list[str]:
    return [format_complex(complex(x)) for x in p]


def _numeric_inputs(config: Config) -> dict:
    n = config.numeric
    return {
        "epsilon": n.epsilon,
        "newton_tol": n.newton_tol,
        "match_margin": n.match_margin,
        "max_refine": n.max_refine,
        "initial_steps": n.initial_steps,
    }


def geometric_branches(config: Config, germ: MapGerm) -> tuple[list, list[str]]:
    """Parametric branches followed by discovered ones, with discovery notices."""
    branches: list = list(config.branch_specs())
    notices = []
    if config.discover is not None:
        ideal = [parse_poly(g, config.variables) for g in config.discover.ideal]
        ell = parse_poly(config.discover.slice, config.variables)
        solver = SliceSolver(ideal, ell, config.variables)
        found = discover_branches(solver, config.numeric.epsilon, config.numeric.tolerances())
        taken = {b.label for b in branches}
        for b in found:
            if b.label in taken:
                raise InputError(f"discovered branch label {b.label} collides with a given branch")
            notices.append(f"discovered branch {b.label}: covering degree {b.m} of the slice form")
        branches.extend(found)
    return branches, notices


def _validate(config: Config, germ: MapGerm, branches: list) -> dict:
    eps = config.numeric.epsilon
    tol = config.numeric.tolerances()
    given = [b for b in branches if isinstance(b, BranchSpec)]
    report = validate_input(germ, given, eps)
    counts = dict(report.fiber_counts)
    dx = list(report.dx_branches)
    dropped = list(report.dropped)
    notices = list(report.notices)
    for b in branches:
        spec = LoopSpec(b, eps, tol)
        if isinstance(b, BranchSpec):
            if b.label in dx:
                branch_fiber_count(germ, spec)
            continue
        n = branch_fiber_count(germ, spec)
        if n == 0:
            raise InputError(f"discovered branch {b.label} does not lie in the image of the parameterization")
        counts[b.label] = n
        if n >= 2:
            dx.append(b.label)
        else:
            dropped.append(b.label)
            notices.insert(0, f"branch {b.label} has generic fiber count 1: not part of the double-point curve, dropped")
    if dx and DX_EMPTY in notices:
        notices.remove(DX_EMPTY)
    return {
        "dx_branches": sorted(dx),
        "dropped": sorted(dropped),
        "fiber_counts": {k: counts[k] for k in sorted(counts)},
        "notices": notices,
    }


def _surface_sections(summary: SurfaceSummary) -> dict:
    weights = weight_report(summary)
    vanishing = vanishing_cycle_report(summary)
    return {
        "branches": [b.as_dict() for b in summary.branches],
        "summary": {
            "b0": summary.b0,
            "kernel_total": summary.kernel_total,
            "realizable": summary.is_realizable(),
        },
        "weight_filtration": weights.as_dict(),
        "vanishing_cycles": vanishing.as_dict(),
    }


def analyze_geometric(config: Config) -> tuple[SurfaceSummary, dict]:
    germ = config.germ()
    eps = config.numeric.epsilon
    tol = config.numeric.tolerances()
    branches, discovery_notes = geometric_branches(config, germ)
    validation = _validate(config, germ, branches)
    validation["notices"] = discovery_notes + validation["notices"]
    origin = preimage_origin(germ)
    by_label = {b.label: b for b in branches}
    monodromies: list[BranchMonodromy] = []
    for label in validation["dx_branches"]:
        monodromies.append(branch_monodromy(germ, LoopSpec(by_label[label], eps, tol), origin))
    if not incidence_injective(len(origin), monodromies):
        raise NumericFailure(
            "origin preimages are not separated by the branch sheet incidences (injectivity diagnostic failed)"
        )
    summary = SurfaceSummary(len(origin), tuple(m.branch_data() for m in monodromies))
    details = {
        "validation": validation,
        "origin": {
            "b0": len(origin),
            "points": [{"label": o.label, "chart": o.chart_name, "u": format_complex(o.u)} for o in origin],
        },
        "incidence": {
            m.label: {str(k): v for k, v in sorted(m.radial_incidence.items())} for m in monodromies
        },
        "provenance": {
            **_numeric_inputs(config),
            "max_refine_depth": max((m.depth for m in monodromies), default=0),
            "loops": {m.label: {"depth": m.depth, "closure": m.closure} for m in monodromies},
        },
    }
    return summary, details


def run_analyze(config: Config) -> dict:
    """Validate, compute monodromy per branch and assemble every report section."""
    if config.mode == COMBINATORIAL:
        summary = config.summary()
        notices = [] if summary.branches else [DX_EMPTY]
        notices.append("combinatorial mode: sheet data and the Q-homology-manifold hypothesis are asserted, not computed")
        details = {
            "validation": {"dx_branches": [b.label for b in summary.branches], "notices": notices},
            "provenance": {"computed": False},
        }
        check = parameterized_check(summary)
    else:
        summary, details = analyze_geometric(config)
        check = parameterized_check(summary)
    sections = _surface_sections(summary)
    return {
        "input": config_to_dict(config),
        "validation": details["validation"],
        **({"origin": details["origin"]} if "origin" in details else {}),
        "branches": sections["branches"],
        **({"incidence": details["incidence"]} if "incidence" in details else {}),
        "summary": sections["summary"],
        "weight_filtration": sections["weight_filtration"],
        "vanishing_cycles": sections["vanishing_cycles"],
        "parameterized_check": check.as_dict(),
        "provenance": details["provenance"],
    }


def parse_point(text: str) -> tuple[complex, complex, complex]:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 3:
        raise InputError(f"malformed point {text!r}: expected three comma-separated coordinates")
    try:
        return tuple(complex(p.replace("i", "j")) for p in parts)
    except ValueError as exc:
        raise InputError(f"malformed point {text!r}: {exc}") from exc


def run_fiber(config: Config, point: Sequence[complex]) -> dict:
    if config.mode == COMBINATORIAL:
        raise InputError("fibers need a geometric config")
    germ = config.germ()
    fiber = fiber_over(germ, point, config.numeric.newton_tol)
    return {
        "point": _point(point),
        "count": len(fiber),
        "points": [
            {"label": lab, "chart": germ.charts[g].name, "u": format_complex(p[0]), "t": format_complex(p[1]), "residual": r}
            for lab, p, r, g in zip(fiber.labels, fiber.points, fiber.residuals, fiber.groups)
        ],
    }


def run_monodromy(config: Config, label: str) -> dict:
    if config.mode == COMBINATORIAL:
        for b in config.summary().branches:
            if b.label == label:
                return {"computed": False, **b.as_dict()}
        raise InputError(f"unknown branch label {label!r}")
    germ = config.germ()
    branches, _ = geometric_branches(config, germ)
    match = [b for b in branches if b.label == label]
    if not match:
        raise InputError(f"unknown branch label {label!r}")
    spec = LoopSpec(match[0], config.numeric.epsilon, config.numeric.tolerances())
    n = branch_fiber_count(germ, spec)
    if n < 2:
        return {"label": label, "n_C": n, "dropped": True, "notices": [f"branch {label} has fiber count {n}: not in D_X"]}
    origin = preimage_origin(germ)
    m = branch_monodromy(germ, spec, origin)
    halving = epsilon_halving(germ, spec)
    data = m.branch_data().as_dict()
    return {
        **data,
        "basepoint": [
            {"label": lab, "chart": germ.charts[g].name, "u": format_complex(p[0]), "t": format_complex(p[1])}
            for lab, p, g in zip(m.basepoint.labels, m.basepoint.points, m.basepoint.groups)
        ],
        "radial_incidence": {str(k): v for k, v in sorted(m.radial_incidence.items())},
        "epsilon_halving": {
            "sigma_half": str(halving.sigma_half),
            "relabel": str(halving.relabel),
            "consistent": halving.consistent,
        },
        "provenance": {**_numeric_inputs(config), "depth": m.depth, "closure": m.closure},
    }


def run_check(config: Config) -> dict:
    if config.mode == COMBINATORIAL:
        summary = config.summary()
        diag = parameterized_check(summary)
        notices = [] if summary.branches else [DX_EMPTY]
        return {**diag.as_dict(), "dx_branches": [b.label for b in summary.branches], "notices": notices}
    germ = config.germ()
    branches, notes = geometric_branches(config, germ)
    validation = _validate(config, germ, branches)
    diag = parameterized_check(germ)
    return {
        **diag.as_dict(),
        "dx_branches": validation["dx_branches"],
        "dropped": validation["dropped"],
        "fiber_counts": validation["fiber_counts"],
        "notices": notes + validation["notices"],
    }


def run_subcommand(command: str, config: Config, args=None) -> dict:
    args = args or {}
    if command == "fiber":
        if "point" not in args:
            raise InputError("fiber needs --point a,b,c")
        point = args["point"]
        return run_fiber(config, parse_point(point) if isinstance(point, str) else point)
    if command == "monodromy":
        if "branch" not in args:
            raise InputError("monodromy needs --branch LABEL")
        return run_monodromy(config, args["branch"])
    if command == "check":
        return run_check(config)
    raise InputError(f"unknown command {command!r}")


# rendering


def to_json(report: dict) -> str:
    return json.dumps(report, indent=2, ensure_ascii=False) + "\n"


def _table(rows: list[list[str]], header: list[str]) -> list[str]:
    cells = [header] + rows
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    fmt = lambda r: "  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip()
    return [fmt(header), fmt(["-" * w for w in widths])] + [fmt(r) for r in rows]


def render_analyze(report: dict) -> str:
    out = [f"mode: {report['input']['mode']}"]
    s = report["summary"]
    out.append(f"b0 = {s['b0']}    sum k_C = {s['kernel_total']}")
    for n in report["validation"]["notices"]:
        out.append(f"note: {n}")
    out.append("")
    if report["branches"]:
        rows = [[b["label"], str(b["n_C"]), b["sigma"], b["cycle_type"], str(b["r_C"]), str(b["k_C"])] for b in report["branches"]]
        out += _table(rows, ["branch", "n_C", "sigma", "cycle type", "r_C", "k_C"])
    else:
        out.append("no double-point branches")
    w = report["weight_filtration"]
    out += ["", "weight filtration of Q_X[2] (concentrated in [0,2])"]
    ranks = ", ".join(f"{label}:{r}" for label, r in w["gr1_branch_ranks"]) or "none"
    out += _table(
        [
            ["Gr_0", f"dim V = {w['gr0_dim']} at the origin"],
            ["Gr_1", f"generic ranks {ranks}; origin stalk {w['gr1_stalk0']}"],
            ["Gr_2", f"IC_X: generic rank {w['gr2_generic']}; origin stalk {w['gr2_stalk0']}"],
        ],
        ["piece", "data"],
    )
    v = report["vanishing_cycles"]
    out += ["", "monodromy weight filtration on unipotent vanishing cycles (concentrated in [2,4])"]
    ranks3 = ", ".join(f"{label}:{r}" for label, r in v["w3_branch_ranks"]) or "none"
    ann = v["annotations"]
    out += _table(
        [
            ["Gr_2", str(v["w2_dim"]), ann["w2"]],
            ["Gr_3", ranks3, ann["w3"]],
            ["Gr_4", str(v["w4_dim"]), ann["w4"]],
        ],
        ["piece", "dim / ranks", "twist"],
    )
    out.append(f"Gr_2 = Gr_4 (Hard Lefschetz symmetry): {v['w2_dim'] == v['w4_dim']}")
    c = report["parameterized_check"]
    out += ["", f"parameterized surface check: {c['verdict']}"] + [f"  {r}" for r in c["reasons"]]
    p = report["provenance"]
    if p.get("computed", True):
        out.append(f"epsilon = {p['epsilon']}, max refinement depth = {p['max_refine_depth']}")
    return "\n".join(out) + "\n"


def render_fiber(report: dict) -> str:
    out = [f"fiber over ({', '.join(report['point'])}): {report['count']} point(s)"]
    rows = [[str(p["label"]), p["chart"], p["u"], p["t"]] for p in report["points"]]
    return "\n".join(out + _table(rows, ["label", "chart", "u", "t"])) + "\n"


def render_monodromy(report: dict) -> str:
    if report.get("dropped"):
        return f"branch {report['label']}: n_C = {report['n_C']}, dropped (not in D_X)\n"
    out = [
        f"branch {report['label']}: n_C = {report['n_C']}",
        f"sigma: {report['sigma']}",
        f"cycle type: {report['cycle_type']}",
        f"k_C = {report['k_C']}",
    ]
    if "radial_incidence" in report:
        inc = ", ".join(f"{k}->{v}" for k, v in report["radial_incidence"].items())
        out.append(f"radial incidence (sheet -> origin preimage): {inc}")
        out.append(f"stable under epsilon halving: {report['epsilon_halving']['consistent']}")
    return "\n".join(out) + "\n"


def render_check(report: dict) -> str:
    out = [f"verdict: {report['verdict']}"] + [f"  {r}" for r in report["reasons"]]
    if not report["dx_branches"]:
        out.append("D_X empty; Q_X[2] ≅ IC_X")
    else:
        out.append(f"D_X branches: {', '.join(report['dx_branches'])}")
    if report.get("dropped"):
        out.append(f"dropped unibranched components: {', '.join(report['dropped'])}")
    out += [f"note: {n}" for n in report.get("notes", []) + report.get("notices", [])]
    return "\n".join(out) + "\n"


RENDERERS = {
    "analyze": render_analyze,
    "fiber": render_fiber,
    "monodromy": render_monodromy,
    "check": render_check,
}
