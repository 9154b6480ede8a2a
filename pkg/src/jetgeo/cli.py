"""Command-line front end: ``jetgeo analyze | verify | ym-map``.

Exit codes: 0 ok, 1 verification failure, 2 spec or parse error,
3 numeric or domain error.
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from . import checks, jetcore
from .errors import EvalError, JetGeoError, MetricError, ParseError, SystemSpecError
from .jetcore import JetPoint
from .specdoc import SpecDocument, SpecError, dumps, format_number, load_spec, matrix_text, \
    report_dict, system_dict

EXIT_OK, EXIT_FAIL, EXIT_SPEC, EXIT_NUMERIC = 0, 1, 2, 3

# errors while reading and building the spec
_SPEC_ERRORS = (SpecError, ParseError, SystemSpecError, MetricError, ValueError, TypeError)
# errors while evaluating at points
_NUMERIC_ERRORS = (EvalError, MetricError, SystemSpecError, ValueError, ArithmeticError,
                   np.linalg.LinAlgError)


class GridError(JetGeoError):
    pass


def _load(path: str) -> SpecDocument:
    return load_spec(path)


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _require_points(spec: SpecDocument) -> None:
    if not spec.points:
        raise SpecError("points: at least one evaluation point is required")


def analyze(spec: SpecDocument, symbolic: bool = False) -> dict:
    _require_points(spec)
    doc = system_dict(spec)
    doc["points"] = [report_dict(jetcore.full_report(spec.system, spec.metric, p, spec.parameters))
                     for p in spec.points]
    if symbolic or spec.options.symbolic:
        sym = jetcore.symbolic_objects(spec.system, spec.metric)
        doc["symbolic"] = {k: matrix_text(v) for k, v in sym.items()}
    return doc


def parse_grid(text: str, n: int) -> list[tuple[str, np.ndarray]]:
    """``"t=a:b:k;x1=a:b:k;..."`` with k >= 1 nodes per axis, in t, x1..xn order."""
    axes = {}
    for part in filter(None, (s.strip() for s in text.split(";"))):
        name, sep, rng = part.partition("=")
        name = name.strip()
        if not sep:
            raise GridError(f"grid: {part!r} is not of the form name=a:b:k")
        try:
            a, b, k = rng.split(":")
            a, b, k = float(a), float(b), int(k)
        except ValueError:
            raise GridError(f"grid: {part!r} is not of the form name=a:b:k") from None
        if k < 1:
            raise GridError(f"grid: {name} needs at least one node")
        if name in axes:
            raise GridError(f"grid: axis {name} given twice")
        axes[name] = np.linspace(a, b, k) if k > 1 else np.array([a])
    names = ["t"] + [f"x{i}" for i in range(1, n + 1)]
    if set(axes) != set(names):
        raise GridError(f"grid: axes must be exactly {', '.join(names)}; got {', '.join(axes) or 'none'}")
    return [(name, axes[name]) for name in names]


def ym_map(spec: SpecDocument, grid: list[tuple[str, np.ndarray]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([name for name, _ in grid] + ["eym"])
    for node in itertools.product(*(values for _, values in grid)):
        p = JetPoint(node[0], tuple(node[1:]))
        F = jetcore.em_form(spec.system, spec.metric, p, spec.parameters)
        w.writerow([format_number(v) for v in (*node, jetcore.yang_mills_energy(F))])
    return buf.getvalue()


def _cmd_analyze(args) -> int:
    spec = _load(args.spec)
    _require_points(spec)
    try:
        doc = analyze(spec, args.symbolic)
    except _NUMERIC_ERRORS as err:
        return _numeric(err)
    _emit(dumps(doc), args.out)
    return EXIT_OK


def _cmd_verify(args) -> int:
    spec = _load(args.spec)
    _require_points(spec)
    try:
        results = checks.run_checks(spec, args.tol)
    except _NUMERIC_ERRORS as err:
        return _numeric(err)
    for c in results:
        print(c.line())
    failed = [c.name for c in results if not c.passed]
    if failed:
        print(f"FAILED {len(failed)} of {len(results)} checks: {', '.join(failed)}")
        return EXIT_FAIL
    print(f"all {len(results)} checks passed")
    return EXIT_OK


def _cmd_ym_map(args) -> int:
    spec = _load(args.spec)
    grid = parse_grid(args.grid, spec.n)
    try:
        text = ym_map(spec, grid)
    except _NUMERIC_ERRORS as err:
        return _numeric(err)
    _emit(text, args.out)
    return EXIT_OK


def _numeric(err: Exception) -> int:
    print(f"jetgeo: numeric error: {err}", file=sys.stderr)
    return EXIT_NUMERIC


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="jetgeo", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="evaluate every jet object at the spec points")
    p.add_argument("spec", help="spec JSON file")
    p.add_argument("--symbolic", action="store_true", help="also print N and F as expressions")
    p.add_argument("--out", help="write the JSON report here instead of stdout")
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("verify", help="run the invariant and cross-validation checks")
    p.add_argument("spec", help="spec JSON file")
    p.add_argument("--tol", type=float, help="tolerance for exact comparisons (default 1e-12)")
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("ym-map", help="tabulate the Yang-Mills energy on a grid")
    p.add_argument("spec", help="spec JSON file")
    p.add_argument("--grid", required=True, help='e.g. "t=0:1:11;x1=-2:2:21;x2=-2:2:21"')
    p.add_argument("--out", help="write the CSV here instead of stdout")
    p.set_defaults(func=_cmd_ym_map)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _SPEC_ERRORS + (GridError,) as err:
        print(f"jetgeo: spec error: {err}", file=sys.stderr)
        return EXIT_SPEC


if __name__ == "__main__":
    sys.exit(main())
