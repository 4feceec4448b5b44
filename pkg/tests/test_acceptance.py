"""The eleven acceptance criteria, one test each.

Every test prints ``criterion N: PASS|FAIL  title`` when it runs and the
lines are repeated in the terminal summary.
"""

import random
import time
from contextlib import contextmanager
from dataclasses import replace
from fractions import Fraction

from paramweight import corpus
from paramweight.config import ChartConfig, combinatorial_config, loads_config
from paramweight.germ import preimage_origin
from paramweight.monodromy import LoopSpec, branch_monodromy, epsilon_halving
from paramweight.numkernel import Tolerances
from paramweight.permutation import Permutation
from paramweight.pipeline import run_analyze
from paramweight.polycore import serialize
from paramweight.weightcalc import BranchData, SurfaceSummary, fixed_space_dim, ker_reduced_monodromy

TIME_LIMIT = 10.0

WHITNEY = """
[[charts]]
name = "W"
p1 = "u^2 - t"
p2 = "u*(u^2 - t)"
p3 = "t"
adapted = 3

[[branches]]
label = "C"
gamma1 = "0"
gamma2 = "0"
gamma3 = "s"
"""

Y2_X3_Z2X2 = """
[[charts]]
name = "N"
p1 = "u^2 - t^2"
p2 = "u*(u^2 - t^2)"
p3 = "t"
adapted = 3

[[branches]]
label = "C"
gamma1 = "0"
gamma2 = "0"
gamma3 = "s"
"""

TRIPLE_POINT = """
[[charts]]
name = "Vx"
p1 = "0"
p2 = "u"
p3 = "t"
adapted = 3

[[charts]]
name = "Vy"
p1 = "u"
p2 = "0"
p3 = "t"
adapted = 3

[[charts]]
name = "Vz"
p1 = "u"
p2 = "t"
p3 = "0"
adapted = 2

[[branches]]
label = "C1"
gamma1 = "s"
gamma2 = "0"
gamma3 = "0"

[[branches]]
label = "C2"
gamma1 = "0"
gamma2 = "s"
gamma3 = "0"

[[branches]]
label = "C3"
gamma1 = "0"
gamma2 = "0"
gamma3 = "s"
"""

XZ2_Y3 = """
mode = "combinatorial"
b0 = 1
qhm_asserted = true

[[branches]]
label = "C"
n = 2
sigma = "()"
"""

CUSP_TIMES_LINE = """
[[charts]]
name = "L"
p1 = "u^2"
p2 = "u^3"
p3 = "t"
adapted = 3

[[branches]]
label = "C"
gamma1 = "0"
gamma2 = "0"
gamma3 = "s"
"""

CUSP_T3 = """
[[charts]]
name = "K"
p1 = "u^2 - t^3"
p2 = "u*(u^2 - t^3)"
p3 = "t"
adapted = 3

[[branches]]
label = "C"
gamma1 = "0"
gamma2 = "0"
gamma3 = "s"
"""

GEOMETRIC = {"whitney": WHITNEY, "y2_x3_z2x2": Y2_X3_Z2X2, "triple_point": TRIPLE_POINT}
ALL = {**GEOMETRIC, "xz2_y3": XZ2_Y3, "cusp_times_line": CUSP_TIMES_LINE, "cusp_t3": CUSP_T3}

INTEGER_SECTIONS = ("branches", "summary", "weight_filtration", "vanishing_cycles")


@contextmanager
def criterion(log, n, title):
    try:
        yield
    except BaseException:
        line = f"criterion {n}: FAIL  {title}"
        print(line)
        log.append(line)
        raise
    line = f"criterion {n}: PASS  {title}"
    print(line)
    log.append(line)


def analyze(text):
    start = time.perf_counter()
    report = run_analyze(loads_config(text))
    elapsed = time.perf_counter() - start
    assert elapsed < TIME_LIMIT, f"pipeline took {elapsed:.1f}s"
    return report


def integer_fields(report):
    out = {k: report[k] for k in INTEGER_SECTIONS}
    if "validation" in report:
        v = report["validation"]
        out["validation"] = {k: v[k] for k in ("dx_branches", "dropped", "fiber_counts") if k in v}
    if "incidence" in report:
        out["incidence"] = report["incidence"]
    if "origin" in report:
        out["b0"] = report["origin"]["b0"]
    return out


def reparameterized(text, c):
    """Apply u -> u + c t^2 in every chart of a config."""
    config = loads_config(text)
    germ = config.germ().reparameterize(c)
    charts = tuple(
        ChartConfig(cc.name, tuple(serialize(p) for p in chart.polys), cc.adapted)
        for cc, chart in zip(config.charts, germ.charts)
    )
    return replace(config, charts=charts)


def test_criterion_01_whitney_umbrella(acceptance_log):
    with criterion(acceptance_log, 1, "Whitney umbrella: b0=1, n_C=2, transposition, k_C=0, gr0=0"):
        r = analyze(WHITNEY)
        (b,) = r["branches"]
        assert r["summary"]["b0"] == 1
        assert b["n_C"] == 2
        assert Permutation.from_cycles(b["sigma"], 2) == Permutation((1, 0))
        assert b["k_C"] == 0
        assert r["weight_filtration"]["gr0_dim"] == 0


def test_criterion_02_y2_x3_z2x2(acceptance_log):
    with criterion(acceptance_log, 2, "y^2 - x^3 - z^2 x^2: identity, k_C=1, gr0=1"):
        r = analyze(Y2_X3_Z2X2)
        (b,) = r["branches"]
        assert Permutation.from_cycles(b["sigma"], b["n_C"]).is_identity()
        assert b["k_C"] == 1
        assert r["weight_filtration"]["gr0_dim"] == 1


def test_criterion_03_triple_point(acceptance_log):
    with criterion(acceptance_log, 3, "xyz: b0=3, each axis identity on 2 sheets, gr0=1"):
        r = analyze(TRIPLE_POINT)
        assert r["summary"]["b0"] == 3
        assert len(r["branches"]) == 3
        for b in r["branches"]:
            assert b["n_C"] == 2
            assert Permutation.from_cycles(b["sigma"], 2).is_identity()
        assert r["weight_filtration"]["gr0_dim"] == 1


def test_criterion_04_xz2_y3_combinatorial(acceptance_log):
    with criterion(acceptance_log, 4, "xz^2 - y^3 combinatorial (b0=1, n=2, id, qhm asserted): gr0=1"):
        r = analyze(XZ2_Y3)
        assert r["parameterized_check"]["verdict"] == "PASS"
        assert r["weight_filtration"]["gr0_dim"] == 1


def test_criterion_05_cusp_times_line(acceptance_log):
    with criterion(acceptance_log, 5, "cusp x line: branch dropped (n_C=1), D_X empty, Q_X[2] = IC_X, gr0=gr1=0"):
        r = analyze(CUSP_TIMES_LINE)
        v = r["validation"]
        assert v["dropped"] == ["C"] and v["fiber_counts"]["C"] == 1
        assert v["dx_branches"] == [] and r["branches"] == []
        assert any("Q_X[2] ≅ IC_X" in n for n in v["notices"])
        assert any("Q_X[2] ≅ IC_X" in n for n in r["weight_filtration"]["notices"])
        w = r["weight_filtration"]
        assert w["gr0_dim"] == 0
        assert w["gr1_branch_ranks"] == [] and w["gr1_stalk0"] == 0


def test_criterion_06_vanishing_cycle_tables(acceptance_log):
    with criterion(acceptance_log, 6, "vanishing cycles for 1-3: w2=w4=gr0, w3=branch ranks, [2,4]"):
        for text in GEOMETRIC.values():
            r = analyze(text)
            v, w = r["vanishing_cycles"], r["weight_filtration"]
            assert v["w2_dim"] == v["w4_dim"] == w["gr0_dim"]
            assert v["w3_branch_ranks"] == [[b["label"], b["r_C"]] for b in r["branches"]]
            assert v["concentration"] == [2, 4]
            assert v["annotations"]["w2"].endswith("(-1)") and v["annotations"]["w4"].endswith("(-1)")
            assert any("isomorphically onto Gr_2" in n for n in v["notes"])


def test_criterion_07_permutation_calculus(acceptance_log):
    with criterion(acceptance_log, 7, "200 random permutations: cycles = nullity(Id - P), k = cycles - 1"):
        rng = random.Random(7)
        for _ in range(200):
            n = rng.randint(2, 8)
            images = list(range(n))
            rng.shuffle(images)
            sigma = Permutation(tuple(images))
            assert fixed_space_dim(sigma) == sigma.n_cycles
            assert ker_reduced_monodromy(sigma) == sigma.n_cycles - 1


def corpus_branches():
    for name in ("whitney_umbrella", "y2_x3_z2x2", "cusp_t3", "triple_point"):
        germ, branches = corpus.GEOMETRIC[name]()
        for b in branches:
            yield name, germ, b


def test_criterion_08_numerics(acceptance_log):
    with criterion(acceptance_log, 8, "eps-halving (10 trials/branch), closure < 10 tol, doubled steps"):
        tol = Tolerances()
        for name, germ, b in corpus_branches():
            origin = preimage_origin(germ)
            base = branch_monodromy(germ, LoopSpec(b, 0.1, tol), origin)
            assert base.closure < 10 * tol.newton_tol
            for k in range(10):
                eps = 0.3 * 0.85**k
                check = epsilon_halving(germ, LoopSpec(b, eps, tol))
                assert check.consistent, (name, b.label, eps)
                assert check.sigma.cycle_type == check.sigma_half.cycle_type == base.cycle_type
            doubled = Tolerances(initial_steps=2 * tol.initial_steps)
            m = branch_monodromy(germ, LoopSpec(b, 0.1, doubled), origin)
            assert m.sigma == base.sigma
            assert m.closure < 10 * doubled.newton_tol


def test_criterion_09_reparameterization_invariance(acceptance_log):
    with criterion(acceptance_log, 9, "u -> u + c t^2 (5 random rational c per example) leaves reports unchanged"):
        rng = random.Random(9)
        for name in ("whitney", "y2_x3_z2x2", "triple_point", "cusp_times_line", "cusp_t3"):
            text = ALL[name]
            base = integer_fields(analyze(text))
            for _ in range(5):
                c = Fraction(rng.randint(-8, 8) or 1, rng.randint(1, 8))
                start = time.perf_counter()
                report = run_analyze(reparameterized(text, c))
                assert time.perf_counter() - start < TIME_LIMIT
                assert integer_fields(report) == base, (name, c)


def test_criterion_10_consistency_identity(acceptance_log):
    with criterion(acceptance_log, 10, "gr0 + (b0 - 1) = sum k_C on every corpus input"):
        for text in ALL.values():
            r = analyze(text)
            w = r["weight_filtration"]
            k_total = sum(b["k_C"] for b in r["branches"])
            assert w["gr0_dim"] + (r["summary"]["b0"] - 1) == k_total == w["gr1_stalk0"]


def test_criterion_11_mode_agreement(acceptance_log):
    with criterion(acceptance_log, 11, "geometric output fed to combinatorial mode reproduces reports for 1-3"):
        for text in GEOMETRIC.values():
            r = analyze(text)
            summary = SurfaceSummary(
                r["summary"]["b0"],
                tuple(BranchData(b["label"], b["n_C"], Permutation.from_cycles(b["sigma"], b["n_C"])) for b in r["branches"]),
            )
            back = run_analyze(combinatorial_config(summary))
            assert back["input"]["mode"] == "combinatorial"
            for key in INTEGER_SECTIONS:
                assert back[key] == r[key], key
