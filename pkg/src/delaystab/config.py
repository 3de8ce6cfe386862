"""Reading problem descriptions from JSON.

The accepted layout is ``schema/problem.schema.json``.  Parse and schema
errors are raised as :class:`SchemaError` carrying a ``line:column``
location in the source text.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Any

import jsonschema

from .errors import SchemaError
from .mackeyglass import MGParams
from .model import (
    AtomKernel,
    Constant,
    ConstantLag,
    DelaySpec,
    DensityKernel,
    DistributedTerm,
    FloorArgument,
    InitialCondition,
    LinearDDE,
    LinearMap,
    MGDecay,
    MGFeedback,
    NonlinearDDE,
    Nonlinearity,
    PiecewisePeriodic,
    ScalarFunctionSpec,
    SectorBounds,
    SinusoidAffine,
    Tabulated,
    TabulatedLag,
    TableMap,
)

DEFAULT_HORIZON = 100.0


@lru_cache(maxsize=1)
def problem_schema() -> dict:
    text = resources.files("delaystab").joinpath("schema/problem.schema.json").read_text()
    return json.loads(text)


# ---------------------------------------------------------------------------
# Locating JSON paths in the source text
# ---------------------------------------------------------------------------

_WS = " \t\n\r"


def _skip(text: str, i: int) -> int:
    while i < len(text) and text[i] in _WS:
        i += 1
    return i


def _locate(text: str, path: list) -> int:
    """Character offset where the value at ``path`` starts (best effort)."""
    dec = json.JSONDecoder()
    i = _skip(text, 0)
    for key in path:
        if i >= len(text):
            break
        ch = text[i]
        if ch == "{":
            i = _skip(text, i + 1)
            found = False
            while i < len(text) and text[i] != "}":
                k, i = dec.raw_decode(text, i)
                i = _skip(text, i)
                i = _skip(text, i + 1)  # ':'
                if k == key:
                    found = True
                    break
                _, i = dec.raw_decode(text, i)
                i = _skip(text, i)
                if i < len(text) and text[i] == ",":
                    i = _skip(text, i + 1)
            if not found:
                break
        elif ch == "[":
            i = _skip(text, i + 1)
            for _ in range(int(key)):
                _, i = dec.raw_decode(text, i)
                i = _skip(text, i)
                i = _skip(text, i + 1)  # ','
        else:
            break
    return i


def _line_col(text: str, offset: int) -> str:
    line = text.count("\n", 0, offset) + 1
    col = offset - (text.rfind("\n", 0, offset) + 1) + 1
    return f"line {line}, column {col}"


def parse_json(text: str, source: str = "<input>") -> dict:
    """Parse and validate a problem description."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(exc.msg, f"{source}: line {exc.lineno}, column {exc.colno}") from None
    validator = jsonschema.Draft202012Validator(problem_schema())
    errors = sorted(validator.iter_errors(data), key=lambda e: (len(e.absolute_path), list(map(str, e.absolute_path))))
    if errors:
        err = jsonschema.exceptions.best_match(errors)
        path = list(err.absolute_path)
        where = "$" + "".join(f"[{p}]" if isinstance(p, int) else f".{p}" for p in path)
        raise SchemaError(f"{where}: {err.message}", f"{source}: {_line_col(text, _locate(text, path))}")
    return data


# ---------------------------------------------------------------------------
# Building model objects
# ---------------------------------------------------------------------------


def function_from_dict(d: dict) -> ScalarFunctionSpec:
    kind = d["kind"]
    if kind == "constant":
        return Constant(float(d["value"]))
    if kind == "piecewise_periodic":
        return PiecewisePeriodic(float(d["period"]), tuple((p["start"], p["end"], p["value"]) for p in d["pieces"]))
    if kind == "sinusoid_affine":
        return SinusoidAffine(float(d["offset"]), float(d["amplitude"]), float(d["frequency"]))
    if kind == "tabulated":
        return Tabulated(tuple(tuple(k) for k in d["knots"]), d.get("interpolation", "linear"))
    raise SchemaError(f"unknown function kind {kind!r}")


def delay_from_dict(d: dict) -> DelaySpec:
    kind = d["kind"]
    if kind == "constant_lag":
        return ConstantLag(float(d["tau"]))
    if kind == "floor":
        return FloorArgument()
    if kind == "tabulated_lag":
        return TabulatedLag(tuple(tuple(k) for k in d["knots"]), d.get("interpolation", "linear"))
    raise SchemaError(f"unknown delay kind {kind!r}")


def kernel_from_dict(d: dict):
    if d["kind"] == "atoms":
        return AtomKernel(tuple((a["position"], a["weight"]) for a in d["atoms"]))
    return DensityKernel(function_from_dict(d["density"]))


def nonlinearity_from_dict(d: dict) -> Nonlinearity:
    kind = d["kind"]
    if kind == "linear":
        return LinearMap(function_from_dict(d["coefficient"]))
    if kind == "mg_f":
        return MGDecay(function_from_dict(d["r"]), float(d["alpha"]), float(d["K"]))
    if kind == "mg_g":
        return MGFeedback(function_from_dict(d["r"]), float(d["beta"]), float(d["K"]), float(d["n"]))
    if kind == "table":
        return TableMap(tuple(tuple(p) for p in d["points"]))
    raise SchemaError(f"unknown nonlinearity kind {kind!r}")


def initial_from_dict(d: dict | None, default: float) -> InitialCondition:
    if d is None:
        return InitialCondition.constant(default)
    return InitialCondition(function_from_dict(d["history"]), d.get("value_at_zero"))


def _distributed(t: dict) -> DistributedTerm:
    coef = function_from_dict(t["b"]) if "b" in t else Constant(1.0)
    return DistributedTerm(coef, delay_from_dict(t["lower_limit"]), kernel_from_dict(t["kernel"]))


@dataclass(frozen=True)
class ProblemFile:
    """A parsed problem plus the settings that travel with it."""

    equation_class: str
    problem: Any
    horizon: float
    raw: dict
    K_override: float | None = None


def build_problem(data: dict) -> ProblemFile:
    cls = data["equation_class"]
    horizon = float(data.get("horizon", DEFAULT_HORIZON))
    if cls == "linear":
        conc = tuple(
            (function_from_dict(t["b"]), delay_from_dict(t["delay"])) for t in data["terms"] if t["type"] == "concentrated"
        )
        dist = tuple(_distributed(t) for t in data["terms"] if t["type"] == "distributed")
        problem = LinearDDE(function_from_dict(data["a"]), conc, dist, initial_from_dict(data.get("initial"), 1.0))
        return ProblemFile(cls, problem, horizon, data)
    if cls == "nonlinear":
        conc = tuple(
            (nonlinearity_from_dict(t["g"]), delay_from_dict(t["delay"])) for t in data["terms"] if t["type"] == "concentrated"
        )
        dist = tuple((nonlinearity_from_dict(t["g"]), _distributed(t)) for t in data["terms"] if t["type"] == "distributed")
        sb = data.get("sector_bounds")
        sector = SectorBounds(sb["a0"], sb["A"], tuple(sb["b"]), tuple(sb["box"])) if sb else None
        box = tuple(data.get("admissible_initial_box", (-math.inf, math.inf)))
        problem = NonlinearDDE(
            nonlinearity_from_dict(data["f"]), conc, dist, initial_from_dict(data.get("initial"), 0.0), sector, box
        )
        return ProblemFile(cls, problem, horizon, data)
    delay = delay_from_dict(data["delay"]) if "delay" in data else ConstantLag(float(data["lag"]))
    params = MGParams(
        float(data["alpha"]),
        float(data["beta"]),
        float(data["n"]),
        function_from_dict(data["r"]),
        float(data["r0"]),
        float(data["R"]),
        delay,
    )
    problem_initial = initial_from_dict(data.get("initial"), params.alpha / params.beta)
    return ProblemFile(cls, (params, problem_initial), horizon, data, data.get("K_override"))


def load_problem(path: str | Path) -> ProblemFile:
    path = Path(path)
    text = path.read_text()
    return build_problem(parse_json(text, str(path)))


def loads_problem(text: str) -> ProblemFile:
    return build_problem(parse_json(text))
