"""Spec files (JSON in) and deterministic report serialization (JSON/CSV out)."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from . import expr as ex
from . import systems
from .errors import JetGeoError, ParseError
from .expr import Expr
from .jetcore import GeometryReport, JetPoint
from .metric import MetricPair
from .systems import SystemSpec

_KIND_KEYS = {
    "generic": {"X"},
    "linear": {"A", "f"},
    "sode": {"order", "f"},
    "nhlsode": {"a", "b"},
}
_COMMON_KEYS = {"kind", "n", "metric", "parameters", "points", "options"}
_OPTION_KEYS = {"tol", "symbolic", "alt_b", "alt_f"}
_POINT_KEYS = {"t", "x", "x1"}
_METRIC_KEYS = {"h", "phi"}


class SpecError(JetGeoError):
    """The spec document is malformed."""


@dataclass(frozen=True)
class Options:
    tol: float | None = None
    symbolic: bool = False
    alt_b: Expr | None = None
    alt_f: tuple[Expr, ...] | None = None


@dataclass(frozen=True, eq=False)
class SpecDocument:
    system: SystemSpec
    metric: MetricPair
    parameters: dict[str, float]
    points: tuple[JetPoint, ...]
    options: Options = field(default_factory=Options)

    @property
    def n(self) -> int:
        return self.system.n


def _expr(value: Any, where: str) -> Expr:
    if isinstance(value, bool) or not isinstance(value, (str, int, float)):
        raise SpecError(f"{where}: expected an expression string or a number, got {value!r}")
    try:
        return ex.as_expr(value)
    except ParseError as err:
        raise SpecError(f"{where}: {err}") from None


def _list(value: Any, where: str) -> list:
    if not isinstance(value, list):
        raise SpecError(f"{where}: expected a list, got {type(value).__name__}")
    return value


def _number(value: Any, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SpecError(f"{where}: expected a number, got {value!r}")
    return float(value)


def _reject_unknown(obj: Mapping, allowed: set[str], where: str) -> None:
    extra = sorted(set(obj) - allowed)
    if extra:
        raise SpecError(f"{where}: unknown key(s) {', '.join(map(repr, extra))}; "
                        f"allowed: {', '.join(sorted(allowed))}")


def _matrix(value: Any, where: str) -> list[list[Expr]]:
    rows = _list(value, where)
    return [[_expr(v, f"{where}[{i}][{j}]") for j, v in enumerate(_list(row, f"{where}[{i}]"))]
            for i, row in enumerate(rows)]


def _build_system(doc: Mapping, kind: str) -> SystemSpec:
    if kind == "generic":
        X = [_expr(v, f"X[{i}]") for i, v in enumerate(_list(doc.get("X"), "X"))]
        return systems.build_generic(X)
    if kind == "linear":
        A = _matrix(doc.get("A"), "A")
        f = doc.get("f")
        f = None if f is None else [_expr(v, f"f[{i}]") for i, v in enumerate(_list(f, "f"))]
        return systems.build_linear(A, f)
    if kind == "sode":
        order = doc.get("order")
        if isinstance(order, bool) or not isinstance(order, int):
            raise SpecError(f"order: expected an integer, got {order!r}")
        if "f" not in doc:
            raise SpecError("f: missing")
        return systems.build_sode(order, _expr(doc["f"], "f"))
    a = [_expr(v, f"a[{i}]") for i, v in enumerate(_list(doc.get("a"), "a"))]
    return systems.build_nhlsode(a, _expr(doc.get("b", 0), "b"))


def _build_metric(value: Any, n: int) -> MetricPair:
    if value is None:
        return MetricPair.euclidean(n)
    if not isinstance(value, dict):
        raise SpecError("metric: expected an object with keys h and phi")
    _reject_unknown(value, _METRIC_KEYS, "metric")
    h = _expr(value.get("h", 1), "metric.h")
    phi = _matrix(value["phi"], "metric.phi") if "phi" in value else MetricPair.euclidean(n).phi
    metric = MetricPair.create(h, phi)
    if metric.n != n:
        raise SpecError(f"metric.phi is {metric.n}x{metric.n} but the system has n = {n}")
    return metric


def _build_points(value: Any, n: int) -> tuple[JetPoint, ...]:
    points = []
    for k, item in enumerate(_list(value if value is not None else [], "points")):
        where = f"points[{k}]"
        if not isinstance(item, dict):
            raise SpecError(f"{where}: expected an object")
        _reject_unknown(item, _POINT_KEYS, where)
        if "t" not in item or "x" not in item:
            raise SpecError(f"{where}: needs keys t and x")
        t = _number(item["t"], f"{where}.t")
        x = [_number(v, f"{where}.x[{i}]") for i, v in enumerate(_list(item["x"], f"{where}.x"))]
        x1 = [_number(v, f"{where}.x1[{i}]")
              for i, v in enumerate(_list(item.get("x1", [0.0] * n), f"{where}.x1"))]
        if len(x) != n or len(x1) != n:
            raise SpecError(f"{where}: x and x1 need {n} components")
        points.append(JetPoint(t, tuple(x), tuple(x1)))
    return tuple(points)


def _build_options(value: Any, n: int) -> Options:
    if value is None:
        return Options()
    if not isinstance(value, dict):
        raise SpecError("options: expected an object")
    _reject_unknown(value, _OPTION_KEYS, "options")
    tol = value.get("tol")
    if tol is not None:
        tol = _number(tol, "options.tol")
        if not tol > 0:
            raise SpecError("options.tol must be positive")
    symbolic = value.get("symbolic", False)
    if not isinstance(symbolic, bool):
        raise SpecError("options.symbolic must be true or false")
    alt_b = value.get("alt_b")
    alt_b = None if alt_b is None else _expr(alt_b, "options.alt_b")
    alt_f = value.get("alt_f")
    if alt_f is not None:
        alt_f = tuple(_expr(v, f"options.alt_f[{i}]") for i, v in enumerate(_list(alt_f, "options.alt_f")))
        if len(alt_f) != n:
            raise SpecError(f"options.alt_f needs {n} components")
    return Options(tol=tol, symbolic=symbolic, alt_b=alt_b, alt_f=alt_f)


def parse_spec(doc: Any) -> SpecDocument:
    """Validate a decoded JSON document and build its system and metric."""
    if not isinstance(doc, dict):
        raise SpecError("top level: expected a JSON object")
    kind = doc.get("kind")
    if kind not in _KIND_KEYS:
        raise SpecError(f"kind: expected one of {', '.join(_KIND_KEYS)}, got {kind!r}")
    _reject_unknown(doc, _COMMON_KEYS | _KIND_KEYS[kind], "top level")

    params = doc.get("parameters", {})
    if not isinstance(params, dict):
        raise SpecError("parameters: expected an object")
    for name, v in params.items():
        if ex.is_variable_name(name):
            raise SpecError(f"parameters: {name!r} is a coordinate name")
        _number(v, f"parameters.{name}")
    params = {k: float(v) for k, v in params.items()}

    system = _build_system(doc, kind)
    if "n" in doc and doc["n"] != system.n:
        raise SpecError(f"n = {doc['n']!r} but the system has dimension {system.n}")
    metric = _build_metric(doc.get("metric"), system.n)
    return SpecDocument(
        system=system,
        metric=metric,
        parameters=params,
        points=_build_points(doc.get("points"), system.n),
        options=_build_options(doc.get("options"), system.n),
    )


def load_spec(path: str | Path) -> SpecDocument:
    try:
        text = Path(path).read_text()
    except OSError as err:
        raise SpecError(f"{path}: {err.strerror}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as err:
        raise SpecError(f"{path}: invalid JSON at line {err.lineno} column {err.colno}: {err.msg}") from None
    return parse_spec(doc)


# ---------------------------------------------------------------------------
# output


def format_number(v: float) -> str:
    """17 significant digits; -0.0 is written as 0; non-finite values become null."""
    v = float(v)
    if not math.isfinite(v):
        return "null"
    if v == 0:
        return "0"
    return format(v, ".17g")


def dumps(obj: Any, indent: int = 2) -> str:
    """Deterministic JSON with every float written by :func:`format_number`."""
    return _dump(obj, 0, indent) + "\n"


def _dump(obj: Any, level: int, indent: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if obj is None or isinstance(obj, bool):
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format_number(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, Mapping):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_dump(v, level + 1, indent)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (list, tuple, Mapping, np.ndarray)) for v in obj):
            return "[" + ", ".join(_dump(v, level + 1, indent) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + _dump(v, level + 1, indent) for v in obj) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def matrix_text(m) -> list[list[str]]:
    return [[str(e) for e in row] for row in m]


def report_dict(r: GeometryReport) -> dict:
    return {
        "t": r.point.t,
        "x": list(r.point.x),
        "x1": list(r.point.x1),
        "M": r.M,
        "N": r.N,
        "cartan": {
            "H": r.cartan.H,
            "mixed": r.cartan.mixed,
            "gamma": r.cartan.gamma,
            "vertical": r.cartan.vertical,
        },
        "R_temporal": r.R_temporal,
        "R_spatial": r.R_spatial,
        "curvature": r.curvature,
        "F": r.F,
        "maxwell_residual_1": r.maxwell_residual_1,
        "maxwell_residual_2": r.maxwell_residual_2,
        "eym": r.eym,
        "warnings": list(r.warnings),
    }


def system_dict(spec: SpecDocument) -> dict:
    s = spec.system
    out: dict = {"kind": s.kind, "n": s.n, "X": [str(e) for e in s.X]}
    if s.kind == "linear":
        out["A"] = matrix_text(s.A)
        out["f"] = [str(e) for e in s.inhomogeneity]
    elif s.kind in ("sode", "nhlsode"):
        out["f"] = str(s.rhs)
    if s.kind == "nhlsode":
        out["a"] = [str(e) for e in s.coefficients]
        out["b"] = str(s.b)
    out["metric"] = {"h": str(spec.metric.h), "phi": matrix_text(spec.metric.phi)}
    out["parameters"] = dict(sorted(spec.parameters.items()))
    return out
