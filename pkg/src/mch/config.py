"""Flat ``key = value`` run configuration with dotted keys.

Values are Python-style literals (numbers, ``true``/``false``, ``none``,
``[a, b]`` lists) or arithmetic over them and ``pi``; anything else is read as
a bare string.  Lines starting with ``#`` are comments.
"""
from __future__ import annotations

import ast
import math
import operator
from dataclasses import dataclass, fields

from .grid import Grid
from .timestep import StepControl


class ConfigError(ValueError):
    pass


FLOAT, INT, BOOL, STR, FLOATS = "float", "int", "bool", "str", "float list"

# key -> (type, default, optional); optional keys may be ``none``
SCHEMA: dict[str, tuple[str, object, bool]] = {
    "preset": (STR, None, True),
    "grid.L": (FLOAT, 20 * math.pi, False),
    "grid.n": (INT, 1024, False),
    "gamma": (FLOAT, 0.0, False),
    "control.dt_init": (FLOAT, 1e-3, False),
    "control.dt_min": (FLOAT, 1e-10, False),
    "control.dt_max": (FLOAT, 0.05, False),
    "control.error_tol": (FLOAT, 1e-9, False),
    "control.cfl_fraction": (FLOAT, 0.5, False),
    "control.m_max_stop": (FLOAT, None, True),
    "control.t_end": (FLOAT, 1.0, False),
    "control.t_end_fraction": (FLOAT, None, True),
    "control.tail_stop": (FLOAT, None, True),
    "control.exponential_filter": (BOOL, False, False),
    "initial.kind": (STR, None, False),
    "initial.amplitude": (FLOAT, None, True),
    "initial.width": (FLOAT, None, True),
    "initial.center": (FLOAT, 0.0, False),
    "initial.c": (FLOAT, None, True),
    "initial.epsilon_dx": (FLOAT, 0.0, False),
    "initial.c1": (FLOAT, None, True),
    "initial.c2": (FLOAT, None, True),
    "initial.t": (FLOAT, 0.0, False),
    "initial.path": (STR, None, True),
    "diagnostics.conserved": (BOOL, True, False),
    "diagnostics.blowup_monitor": (BOOL, True, False),
    "diagnostics.bounds": (BOOL, True, False),
    "diagnostics.blowup_case": (STR, "auto", False),
    "diagnostics.x0": (FLOAT, None, True),
    "diagnostics.flow": (BOOL, False, False),
    "diagnostics.flow_labels": (INT, 64, False),
    "diagnostics.flow_window": (FLOAT, 4.0, False),
    "diagnostics.persistence.theta": (FLOAT, None, True),
    "diagnostics.persistence.N": (FLOAT, 10.0, False),
    "diagnostics.besov.s": (FLOAT, None, True),
    "diagnostics.besov.p": (FLOAT, 2.0, False),
    "diagnostics.besov.r": (FLOAT, 1.0, False),
    "diagnostics.stability.perturbation": (FLOAT, None, True),
    "diagnostics.zero_curvature.lambda": (FLOAT, None, True),
    "diagnostics.zero_curvature.form": (STR, "consistent", False),
    "diagnostics.traveling_wave.c": (FLOAT, None, True),
    "output.dir": (STR, "mch_out", False),
    "output.snapshots": (FLOATS, [], False),
}

ALIASES = {"initial": "initial.kind"}

REQUIRED_BY_KIND = {
    "gaussian": ("initial.amplitude",),
    "peakon": ("initial.c",),
    "two_peakon": ("initial.c1", "initial.c2"),
    "bump_momentum": ("initial.amplitude", "initial.width"),
    "file": ("initial.path",),
}

_BINOPS = {
    ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
    ast.Div: operator.truediv, ast.Pow: operator.pow,
}
_NAMES = {"pi": math.pi, "inf": math.inf, "true": True, "false": False,
          "none": None, "True": True, "False": False, "None": None}


def _eval(node):
    if isinstance(node, ast.Expression):
        return _eval(node.body)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float, str, bool)):
        return node.value
    if isinstance(node, ast.Name) and node.id in _NAMES:
        return _NAMES[node.id]
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        v = _eval(node.operand)
        return -v if isinstance(node.op, ast.USub) else +v
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        return _BINOPS[type(node.op)](_eval(node.left), _eval(node.right))
    if isinstance(node, (ast.List, ast.Tuple)):
        return [_eval(e) for e in node.elts]
    raise ValueError("unsupported expression")


def parse_value(text: str):
    text = text.strip()
    try:
        return _eval(ast.parse(text, mode="eval"))
    except (SyntaxError, ValueError, TypeError, ZeroDivisionError):
        return text


def _coerce(key: str, value):
    kind, _, optional = SCHEMA[key]
    if value is None:
        if optional:
            return None
        raise ConfigError(f"{key}: a value is required")
    if kind == FLOAT:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{key}: expected a number, got {value!r}")
        return float(value)
    if kind == INT:
        if isinstance(value, bool) or not isinstance(value, (int, float)) or value != int(value):
            raise ConfigError(f"{key}: expected an integer, got {value!r}")
        return int(value)
    if kind == BOOL:
        if not isinstance(value, bool):
            raise ConfigError(f"{key}: expected true or false, got {value!r}")
        return value
    if kind == STR:
        return str(value)
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        value = [value]
    if not isinstance(value, list) or not all(
        isinstance(v, (int, float)) and not isinstance(v, bool) for v in value
    ):
        raise ConfigError(f"{key}: expected a list of numbers, got {value!r}")
    return [float(v) for v in value]


def parse_document(text: str) -> dict:
    """Raw ``key -> value`` pairs, keys canonicalised, unknown keys rejected."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        key = ALIASES.get(key, key)
        if key not in SCHEMA:
            raise ConfigError(f"{key}: unknown key (line {lineno})")
        out[key] = parse_value(value)
    return out


@dataclass(frozen=True)
class RunConfig:
    """Validated configuration; ``values`` holds every key of the schema."""

    values: dict

    def __getitem__(self, key):
        return self.values[key]

    @property
    def L(self) -> float:
        return self.values["grid.L"]

    @property
    def n(self) -> int:
        return self.values["grid.n"]

    @property
    def gamma(self) -> float:
        return self.values["gamma"]

    @property
    def initial_kind(self) -> str:
        return self.values["initial.kind"]

    def step_control(self, t_end: float | None = None) -> StepControl:
        kw = {f.name: self.values[f"control.{f.name}"] for f in fields(StepControl)}
        if t_end is not None:
            kw["t_end"] = t_end
        return StepControl(**kw)

    def section(self, prefix: str) -> dict:
        p = prefix + "."
        return {k[len(p):]: v for k, v in self.values.items() if k.startswith(p)}

    def to_text(self) -> str:
        """Canonical document that parses back to an equal configuration."""
        lines = []
        for k in SCHEMA:
            v = self.values[k]
            if v is None:
                lines.append(f"{k} = none")
            elif isinstance(v, bool):
                lines.append(f"{k} = {'true' if v else 'false'}")
            elif isinstance(v, float):
                lines.append(f"{k} = {v!r}")
            elif isinstance(v, list):
                lines.append(f"{k} = [{', '.join(repr(float(x)) for x in v)}]")
            else:
                lines.append(f"{k} = {v}")
        return "\n".join(lines) + "\n"


def build_config(raw: dict, base: dict | None = None) -> RunConfig:
    merged = {k: spec[1] for k, spec in SCHEMA.items()}
    if base:
        merged.update(base)
    merged.update(raw)
    values = {}
    for key in SCHEMA:
        values[key] = _coerce(key, merged[key])
    kind = values["initial.kind"]
    if kind not in REQUIRED_BY_KIND:
        raise ConfigError(
            f"initial.kind: unknown selector {kind!r} (choose from {', '.join(REQUIRED_BY_KIND)})"
        )
    for key in REQUIRED_BY_KIND[kind]:
        if values[key] is None:
            raise ConfigError(f"{key}: required for initial.kind = {kind}")
    if values["control.t_end_fraction"] is None:
        for t in values["output.snapshots"]:
            if not 0 <= t <= values["control.t_end"]:
                raise ConfigError(f"output.snapshots: time {t:g} lies outside [0, control.t_end]")
    elif not 0 < values["control.t_end_fraction"] <= 1:
        raise ConfigError("control.t_end_fraction: must lie in (0, 1]")
    if values["diagnostics.blowup_case"] not in ("auto", "i", "ii", "iii"):
        raise ConfigError("diagnostics.blowup_case: choose auto, i, ii or iii")
    if values["diagnostics.zero_curvature.form"] not in ("consistent", "printed"):
        raise ConfigError("diagnostics.zero_curvature.form: choose consistent or printed")
    try:
        Grid(values["grid.L"], values["grid.n"])
    except ValueError as exc:
        raise ConfigError(f"grid: {exc}") from None
    try:
        StepControl(**{f.name: values[f"control.{f.name}"] for f in fields(StepControl)})
    except ValueError as exc:
        raise ConfigError(f"control: {exc}") from None
    return RunConfig(values)


def parse_config(text: str, overrides: list[str] | tuple = ()) -> RunConfig:
    """Parse a document (optionally naming a ``preset``) plus ``key=value`` overrides."""
    from .presets import preset_values

    raw = parse_document(text)
    for item in overrides:
        raw.update(parse_document(item))
    base = preset_values(raw["preset"]) if raw.get("preset") else None
    return build_config(raw, base)
