"""TOML configuration: parsing, validation and canonical serialization.

A geometric config lists charts and either parametric branches, a
``[discover]`` section giving the double-point curve by two equations and
a slice form, or both.  A combinatorial config gives ``b0`` and per-branch
sheet counts and permutations directly.

    mode = "geometric"
    variables = ["x", "y", "z"]

    [numeric]
    epsilon = 0.1

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

from __future__ import annotations

import sys
from dataclasses import dataclass, replace
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

import tomli_w

from .errors import InputError, PolyParseError
from .germ import BRANCH_VAR, SOURCE_VARS, BranchSpec, Chart, MapGerm
from .numkernel import Tolerances
from .permutation import Permutation
from .polycore import parse_poly, serialize
from .weightcalc import COMBINATORIAL, GEOMETRIC, BranchData, SurfaceSummary

GAMMA_KEYS = ("gamma1", "gamma2", "gamma3")

NUMERIC_DEFAULTS = {
    "epsilon": 0.1,
    "radius": 1.0,
    "newton_tol": 1e-10,
    "match_margin": 3.0,
    "max_refine": 14,
    "initial_steps": 64,
}


@dataclass(frozen=True)
class ChartConfig:
    name: str
    p: tuple[str, str, str]
    adapted: int


@dataclass(frozen=True)
class BranchConfig:
    label: str
    gamma: tuple[str, str, str]


@dataclass(frozen=True)
class CombinatorialBranch:
    label: str
    n: int
    sigma: str


@dataclass(frozen=True)
class DiscoverConfig:
    ideal: tuple[str, str]
    slice: str


@dataclass(frozen=True)
class NumericConfig:
    epsilon: float = 0.1
    radius: float = 1.0
    newton_tol: float = 1e-10
    match_margin: float = 3.0
    max_refine: int = 14
    initial_steps: int = 64

    def tolerances(self) -> Tolerances:
        return Tolerances(self.newton_tol, self.match_margin, self.max_refine, self.initial_steps)


@dataclass(frozen=True)
class Config:
    mode: str
    variables: tuple[str, str, str] = ("x", "y", "z")
    charts: tuple[ChartConfig, ...] = ()
    branches: tuple = ()
    discover: DiscoverConfig | None = None
    b0: int | None = None
    qhm_asserted: bool = False
    numeric: NumericConfig = NumericConfig()
    f: str | None = None

    def germ(self) -> MapGerm:
        charts = tuple(Chart.from_strings(c.name, *c.p, c.adapted) for c in self.charts)
        return MapGerm(charts, self.variables, self.numeric.radius)

    def branch_specs(self) -> list[BranchSpec]:
        return [BranchSpec.from_strings(b.label, *b.gamma) for b in self.branches]

    def summary(self) -> SurfaceSummary:
        """The combinatorial surface data (combinatorial mode only)."""
        if self.mode != COMBINATORIAL:
            raise InputError("a surface summary is given directly only in combinatorial mode")
        data = tuple(BranchData(b.label, b.n, Permutation.from_cycles(b.sigma, b.n)) for b in self.branches)
        return SurfaceSummary(self.b0, data, COMBINATORIAL, self.qhm_asserted)

    def with_epsilon(self, epsilon: float) -> Config:
        if not epsilon > 0:
            raise InputError("epsilon must be positive")
        return replace(self, numeric=replace(self.numeric, epsilon=float(epsilon)))


def _fail(key: str, msg: str):
    raise InputError(f"config key '{key}': {msg}")


def _get(table: dict, key: str, path: str, kind, required: bool = True, default=None):
    if key not in table:
        if required:
            _fail(f"{path}{key}", "missing")
        return default
    value = table[key]
    kinds = kind if isinstance(kind, tuple) else (kind,)
    if isinstance(value, bool) and bool not in kinds:
        _fail(f"{path}{key}", f"expected {kinds[0].__name__}, got bool")
    if not isinstance(value, kinds):
        _fail(f"{path}{key}", f"expected {kinds[0].__name__}, got {type(value).__name__}")
    return value


def _check_unknown(table: dict, allowed: set, path: str):
    for k in table:
        if k not in allowed:
            _fail(f"{path}{k}", "unknown key")


def _canon(text: str, vars, key: str) -> str:
    try:
        return serialize(parse_poly(text, vars))
    except PolyParseError as exc:
        _fail(key, str(exc))


def _strings(value, count: int, key: str) -> tuple[str, ...]:
    if not isinstance(value, list) or len(value) != count or not all(isinstance(v, str) for v in value):
        _fail(key, f"expected a list of {count} strings")
    return tuple(value)


def parse_config(data: dict) -> Config:
    """Validate a decoded TOML table into a :class:`Config` with canonical expression strings."""
    _check_unknown(
        data, {"mode", "variables", "charts", "branches", "discover", "b0", "qhm_asserted", "numeric", "f"}, ""
    )
    mode = _get(data, "mode", "", str, required=False, default=GEOMETRIC)
    if mode not in (GEOMETRIC, COMBINATORIAL):
        _fail("mode", f"must be '{GEOMETRIC}' or '{COMBINATORIAL}', got {mode!r}")
    variables = _strings(data.get("variables", ["x", "y", "z"]), 3, "variables")
    if len(set(variables)) != 3 or set(variables) & {*SOURCE_VARS, BRANCH_VAR}:
        _fail("variables", "need three distinct names other than u, t, s")

    num_table = _get(data, "numeric", "", dict, required=False, default={})
    _check_unknown(num_table, set(NUMERIC_DEFAULTS), "numeric.")
    values = {}
    for key, default in NUMERIC_DEFAULTS.items():
        kind = int if isinstance(default, int) else (float, int)
        values[key] = _get(num_table, key, "numeric.", kind, required=False, default=default)
        if kind != int:
            values[key] = float(values[key])
    numeric = NumericConfig(**values)
    if not numeric.epsilon > 0:
        _fail("numeric.epsilon", "must be positive")
    if not numeric.epsilon < numeric.radius:
        _fail("numeric.epsilon", f"must be below the working radius {numeric.radius}")
    try:
        numeric.tolerances()
    except InputError as exc:
        _fail("numeric", str(exc))

    f = _get(data, "f", "", str, required=False)
    if f is not None:
        f = _canon(f, variables, "f")

    raw_branches = _get(data, "branches", "", list, required=False, default=[])
    if mode == COMBINATORIAL:
        for k in ("charts", "discover"):
            if k in data:
                _fail(k, "not allowed in combinatorial mode")
        if "b0" not in data:
            raise InputError("b0 required in combinatorial mode")
        b0 = _get(data, "b0", "", int)
        if b0 < 1:
            _fail("b0", "must be a positive integer")
        qhm = _get(data, "qhm_asserted", "", bool, required=False, default=False)
        branches = []
        for i, b in enumerate(raw_branches):
            path = f"branches[{i}]."
            if not isinstance(b, dict):
                _fail(f"branches[{i}]", "expected a table")
            _check_unknown(b, {"label", "n", "sigma"}, path)
            label = _get(b, "label", path, str)
            n = _get(b, "n", path, int)
            if n < 2:
                _fail(path + "n", "sheet count must be at least 2")
            sigma = _get(b, "sigma", path, str)
            try:
                sigma = str(Permutation.from_cycles(sigma, n))
            except InputError as exc:
                _fail(path + "sigma", str(exc))
            branches.append(CombinatorialBranch(label, n, sigma))
        config = Config(mode, variables, (), tuple(branches), None, b0, qhm, numeric, f)
        _unique_labels(config)
        config.summary()
        return config

    for k in ("b0", "qhm_asserted"):
        if k in data:
            _fail(k, "only allowed in combinatorial mode")
    raw_charts = _get(data, "charts", "", list)
    if not raw_charts:
        _fail("charts", "at least one chart is required")
    charts = []
    for i, c in enumerate(raw_charts):
        path = f"charts[{i}]."
        if not isinstance(c, dict):
            _fail(f"charts[{i}]", "expected a table")
        _check_unknown(c, {"name", "p1", "p2", "p3", "adapted"}, path)
        name = _get(c, "name", path, str)
        polys = tuple(_canon(_get(c, f"p{j}", path, str), SOURCE_VARS, f"{path}p{j}") for j in (1, 2, 3))
        adapted = _get(c, "adapted", path, int)
        if adapted not in (1, 2, 3):
            _fail(path + "adapted", "must be 1, 2 or 3")
        charts.append(ChartConfig(name, polys, adapted))
    branches = []
    for i, b in enumerate(raw_branches):
        path = f"branches[{i}]."
        if not isinstance(b, dict):
            _fail(f"branches[{i}]", "expected a table")
        _check_unknown(b, {"label", *GAMMA_KEYS}, path)
        label = _get(b, "label", path, str)
        gamma = tuple(_canon(_get(b, k, path, str), (BRANCH_VAR,), path + k) for k in GAMMA_KEYS)
        branches.append(BranchConfig(label, gamma))
    discover = None
    if "discover" in data:
        d = _get(data, "discover", "", dict)
        _check_unknown(d, {"ideal", "slice"}, "discover.")
        ideal = _strings(_get(d, "ideal", "discover.", list), 2, "discover.ideal")
        ideal = tuple(_canon(g, variables, f"discover.ideal[{j}]") for j, g in enumerate(ideal))
        discover = DiscoverConfig(ideal, _canon(_get(d, "slice", "discover.", str), variables, "discover.slice"))
    config = Config(mode, variables, tuple(charts), tuple(branches), discover, None, False, numeric, f)
    _unique_labels(config)
    try:
        config.germ()
        config.branch_specs()
    except InputError as exc:
        raise InputError(f"config: {exc}") from exc
    return config


def _unique_labels(config: Config):
    labels = [b.label for b in config.branches]
    if len(set(labels)) != len(labels):
        _fail("branches", "labels must be distinct")


def loads_config(text: str) -> Config:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise InputError(f"config syntax error: {exc}") from exc
    return parse_config(data)


def load_config(path) -> Config:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read config {path}: {exc}") from exc
    return loads_config(text)


def config_to_dict(config: Config) -> dict:
    out: dict = {"mode": config.mode, "variables": list(config.variables)}
    if config.f is not None:
        out["f"] = config.f
    if config.mode == COMBINATORIAL:
        out["b0"] = config.b0
        out["qhm_asserted"] = config.qhm_asserted
    out["numeric"] = {k: getattr(config.numeric, k) for k in NUMERIC_DEFAULTS}
    if config.mode == GEOMETRIC:
        out["charts"] = [
            {"name": c.name, "p1": c.p[0], "p2": c.p[1], "p3": c.p[2], "adapted": c.adapted} for c in config.charts
        ]
        if config.discover is not None:
            out["discover"] = {"ideal": list(config.discover.ideal), "slice": config.discover.slice}
        out["branches"] = [{"label": b.label, **dict(zip(GAMMA_KEYS, b.gamma))} for b in config.branches]
    else:
        out["branches"] = [{"label": b.label, "n": b.n, "sigma": b.sigma} for b in config.branches]
    return out


def dumps_config(config: Config) -> str:
    return tomli_w.dumps(config_to_dict(config))


def combinatorial_config(summary: SurfaceSummary, numeric: NumericConfig = NumericConfig()) -> Config:
    """Re-express (geometric) surface data as a combinatorial config."""
    branches = tuple(CombinatorialBranch(b.label, b.n, str(b.sigma)) for b in summary.branches)
    return Config(COMBINATORIAL, branches=branches, b0=summary.b0, qhm_asserted=True, numeric=numeric)
