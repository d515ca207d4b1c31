"""Scenario configuration: strict JSON in, normalized JSON out.

Layout::

    {
      "name": "...",
      "problem": {"x0": 1.0, "a": <function>, "b": <function>, "noise": "none" | "brownian" | <function>},
      "solver": {"h0", "tol", "atol", "y_cap", "t_max", "max_steps"},
      "monte_carlo": {"n_paths", "dt", "horizon", "seed", "sigma", "workers"},
      "analysis": {"convention", "quantile", "r", "L", "n_grid"},
      "output": {"dir"}
    }

``<function>`` is ``{"kind": ..., "params": {...}}`` as in ``FunctionSpec.to_dict``.
Every section but ``problem`` is optional; missing fields take defaults.
Unknown keys anywhere are errors.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields

from .dynamics import SolverControls
from .errors import BlowupError
from .funcat import FunctionSpec
from .stochastic import NormalConvention
from .transforms import ProblemSpec


class ConfigError(ValueError):
    """Malformed scenario; ``where`` is 'line N' and/or a dotted field path."""

    def __init__(self, message, field_path=None, line=None):
        self.field_path = field_path
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field_path:
            where.append(f"field '{field_path}'")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)


@dataclass(frozen=True)
class SolverSection:
    h0: float = 1e-3
    tol: float = 1e-10
    atol: float = 1e-12
    y_cap: float = 1e10
    t_max: float | None = None  # None: 1.1 T, or 10 when T is infinite
    max_steps: int = 5_000_000

    def controls(self, t_max: float) -> SolverControls:
        return SolverControls(self.h0, self.tol, self.atol, self.y_cap, t_max, 0.0, self.max_steps)


@dataclass(frozen=True)
class MonteCarloSection:
    n_paths: int = 1000
    dt: float = 1e-4
    horizon: float | None = None  # None: 1.1 T
    seed: int = 0
    sigma: float = 1.0
    workers: int = 1


@dataclass(frozen=True)
class AnalysisSection:
    convention: str = "centered"
    quantile: float = 0.95
    r: float = 0.5
    L: float | None = None  # None: 2 x0
    n_grid: int = 9


@dataclass(frozen=True)
class OutputSection:
    dir: str | None = None


_SECTIONS = {"solver": SolverSection, "monte_carlo": MonteCarloSection,
             "analysis": AnalysisSection, "output": OutputSection}
_INT_FIELDS = {"max_steps", "n_paths", "seed", "workers", "n_grid"}


@dataclass(frozen=True)
class ScenarioConfig:
    problem: dict
    name: str = "scenario"
    solver: SolverSection = field(default_factory=SolverSection)
    monte_carlo: MonteCarloSection = field(default_factory=MonteCarloSection)
    analysis: AnalysisSection = field(default_factory=AnalysisSection)
    output: OutputSection = field(default_factory=OutputSection)

    # -- views ------------------------------------------------------------

    @property
    def noise(self):
        return self.problem.get("noise", "none")

    @property
    def brownian(self) -> bool:
        return self.noise == "brownian"

    def problem_spec(self, g=None) -> ProblemSpec:
        """ProblemSpec with the configured closed-form noise, or ``g`` for Brownian noise."""
        pr = self.problem
        a = FunctionSpec.from_dict(pr["a"])
        b = FunctionSpec.from_dict(pr["b"])
        if isinstance(self.noise, dict):
            g = FunctionSpec.from_dict(self.noise)
        return ProblemSpec(float(pr["x0"]), a, b, g)

    def with_overrides(self, seed=None, convention=None, quantile=None, out=None) -> "ScenarioConfig":
        mc, an, outp = self.monte_carlo, self.analysis, self.output
        if seed is not None:
            mc = MonteCarloSection(**{**asdict(mc), "seed": int(seed)})
        if convention is not None or quantile is not None:
            an = AnalysisSection(**{**asdict(an),
                                    **({"convention": convention} if convention is not None else {}),
                                    **({"quantile": float(quantile)} if quantile is not None else {})})
        if out is not None:
            outp = OutputSection(str(out))
        cfg = ScenarioConfig(self.problem, self.name, self.solver, mc, an, outp)
        _validate(cfg, None)
        return cfg

    # -- serialization ------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "problem": json.loads(json.dumps(self.problem)),
            **{key: asdict(getattr(self, key)) for key in _SECTIONS},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def _line_of(text, key):
    if text is None:
        return None
    needle = f'"{key}"'
    for i, line in enumerate(text.splitlines(), 1):
        if needle in line:
            return i
    return None


def _number(value, path, text, integer=False, allow_none=False):
    if value is None and allow_none:
        return None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"expected a number, got {value!r}", path, _line_of(text, path.split(".")[-1]))
    if integer:
        if float(value) != int(value):
            raise ConfigError(f"expected an integer, got {value!r}", path, _line_of(text, path.split(".")[-1]))
        return int(value)
    if not math.isfinite(value):
        raise ConfigError(f"expected a finite number, got {value!r}", path, _line_of(text, path.split(".")[-1]))
    return float(value)


def _section(cls, data, name, text):
    if not isinstance(data, dict):
        raise ConfigError("expected an object", name, _line_of(text, name))
    known = {f.name for f in fields(cls)}
    for key in data:
        if key not in known:
            raise ConfigError(f"unknown key (allowed: {sorted(known)})", f"{name}.{key}", _line_of(text, key))
    values = {}
    for f in fields(cls):
        if f.name not in data:
            continue
        v = data[f.name]
        path = f"{name}.{f.name}"
        if f.name in ("convention", "dir"):
            if not (isinstance(v, str) or (f.name == "dir" and v is None)):
                raise ConfigError(f"expected a string, got {v!r}", path, _line_of(text, f.name))
            values[f.name] = v
        else:
            values[f.name] = _number(v, path, text, integer=f.name in _INT_FIELDS,
                                     allow_none=f.default is None)
    return cls(**values)


def _function(data, path, text):
    try:
        spec = FunctionSpec.from_dict(data)
    except (ValueError, TypeError) as exc:
        key = path.split(".")[-1]
        raise ConfigError(str(exc), path, _line_of(text, key)) from None
    return spec.to_dict()


def _validate(cfg: ScenarioConfig, text):
    try:
        NormalConvention(cfg.analysis.convention)
    except ValueError:
        raise ConfigError(f"convention must be 'centered' or 'cdf', got {cfg.analysis.convention!r}",
                          "analysis.convention", _line_of(text, "convention")) from None
    if not 0 < cfg.analysis.quantile < 1:
        raise ConfigError("quantile must lie in (0, 1)", "analysis.quantile", _line_of(text, "quantile"))
    checks = [
        ("monte_carlo.n_paths", cfg.monte_carlo.n_paths >= 1),
        ("monte_carlo.dt", cfg.monte_carlo.dt > 0),
        ("monte_carlo.sigma", cfg.monte_carlo.sigma >= 0),
        ("monte_carlo.workers", cfg.monte_carlo.workers >= 1),
        ("monte_carlo.horizon", cfg.monte_carlo.horizon is None or cfg.monte_carlo.horizon > 0),
        ("analysis.r", cfg.analysis.r >= 0),
        ("analysis.n_grid", cfg.analysis.n_grid >= 1),
        ("solver.h0", cfg.solver.h0 > 0),
        ("solver.tol", cfg.solver.tol > 0),
        ("solver.atol", cfg.solver.atol >= 0),
        ("solver.y_cap", cfg.solver.y_cap > 0),
        ("solver.t_max", cfg.solver.t_max is None or cfg.solver.t_max > 0),
        ("solver.max_steps", cfg.solver.max_steps >= 1),
    ]
    for path, ok in checks:
        if not ok:
            raise ConfigError("value out of range", path, _line_of(text, path.split(".")[-1]))


def parse_config(text: str) -> ScenarioConfig:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc.msg} (column {exc.colno})", None, exc.lineno) from None
    return config_from_dict(data, text)


def config_from_dict(data, text=None) -> ScenarioConfig:
    if not isinstance(data, dict):
        raise ConfigError("top level must be an object", None, 1 if text else None)
    allowed = {"name", "problem", *_SECTIONS}
    for key in data:
        if key not in allowed:
            raise ConfigError(f"unknown key (allowed: {sorted(allowed)})", key, _line_of(text, key))
    if "problem" not in data:
        raise ConfigError("missing required section", "problem")
    pr = data["problem"]
    if not isinstance(pr, dict):
        raise ConfigError("expected an object", "problem", _line_of(text, "problem"))
    for key in pr:
        if key not in ("x0", "a", "b", "noise"):
            raise ConfigError("unknown key (allowed: ['a', 'b', 'noise', 'x0'])", f"problem.{key}",
                              _line_of(text, key))
    for key in ("x0", "a", "b"):
        if key not in pr:
            raise ConfigError("missing required field", f"problem.{key}")
    problem = {"x0": _number(pr["x0"], "problem.x0", text),
               "a": _function(pr["a"], "problem.a", text),
               "b": _function(pr["b"], "problem.b", text)}
    noise = pr.get("noise", "none")
    if isinstance(noise, str):
        if noise not in ("none", "brownian"):
            raise ConfigError("noise must be 'none', 'brownian' or a function spec", "problem.noise",
                              _line_of(text, "noise"))
        problem["noise"] = noise
    else:
        problem["noise"] = _function(noise, "problem.noise", text)
        if problem["noise"]["kind"] == "abs_brownian":
            raise ConfigError("use \"noise\": \"brownian\"; paths come from monte_carlo.seed",
                              "problem.noise", _line_of(text, "noise"))

    name = data.get("name", "scenario")
    if not isinstance(name, str):
        raise ConfigError("expected a string", "name", _line_of(text, "name"))
    sections = {key: _section(cls, data.get(key, {}), key, text) for key, cls in _SECTIONS.items()}
    cfg = ScenarioConfig(problem, name, **sections)
    _validate(cfg, text)
    try:
        cfg.problem_spec()
    except (BlowupError, ValueError) as exc:
        raise ConfigError(str(exc), "problem", _line_of(text, "problem")) from None
    return cfg


def load_config(path) -> ScenarioConfig:
    with open(path) as fh:
        text = fh.read()
    return parse_config(text)
