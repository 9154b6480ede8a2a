"""Invariant checks run by ``jetgeo verify``.

Each check compares two independent computations (or a computation against
an exact zero) and records the largest discrepancy over all evaluation
points.  Differences between two computed values are measured relative to
``max(1, |reference|)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import expr as ex
from . import jetcore, lagrangian, systems
from .errors import JetGeoError
from .jetcore import JetPoint
from .specdoc import SpecDocument

EXACT_TOL = 1e-12
FD_TOL = 1e-6
CURVED_MAXWELL_TOL = 1e-8
FIRST_MAXWELL_TOL = 1e-10
INDEPENDENCE_TOL = 1e-14
ACTION_TOL = 1e-8
FD_STEP = 1e-5
EL_STEPS = (100, 200, 400)
EL_MIN_RATIO = 3.5
EL_FLOOR = 1e-9  # below this the residual is at rounding level and stops shrinking
_EL_CRITERION = f"each halving of dt shrinks it >= {EL_MIN_RATIO:g}x unless <= {EL_FLOOR:g}"


@dataclass(frozen=True)
class Check:
    name: str
    error: float
    tol: float
    passed: bool
    detail: str = ""
    criterion: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        crit = self.criterion or f"tol={self.tol:g}"
        text = f"{self.name}: {status} ({float(self.error)!r}) {crit}"
        return f"{text}  {self.detail}" if self.detail else text


def _check(name: str, error: float, tol: float, detail: str = "") -> Check:
    error = float(error)
    return Check(name, error, tol, bool(np.isfinite(error) and error <= tol), detail)


def _rel(a, b) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.size == 0:
        return 0.0
    return float(np.max(np.abs(a - b) / np.maximum(1.0, np.abs(b))))


def _absmax(*arrays) -> float:
    return max((float(np.max(np.abs(np.asarray(a, dtype=float)))) if np.size(a) else 0.0)
               for a in arrays)


def _report_fields(r: jetcore.GeometryReport) -> list[np.ndarray]:
    return [r.M, r.N, r.cartan.gamma, np.array([r.cartan.H]), r.R_temporal, r.R_spatial,
            r.curvature, r.F, r.maxwell_residual_1, r.maxwell_residual_2, np.array([r.eym])]


def _max_over(points, fn: Callable[[JetPoint], float]) -> float:
    return max((fn(p) for p in points), default=0.0)


def _shift(p: JetPoint, dt: float = 0.0, k: int | None = None, dx: float = 0.0) -> JetPoint:
    x = list(p.x)
    if k is not None:
        x[k] += dx
    return JetPoint(p.t + dt, tuple(x), p.x1)


def run_checks(spec: SpecDocument, tol: float | None = None) -> list[Check]:
    """All applicable checks for the spec; evaluation errors at the spec points propagate."""
    base = tol if tol is not None else (spec.options.tol or EXACT_TOL)
    system, metric, params = spec.system, spec.metric, spec.parameters
    points = spec.points
    euclid = metric.is_euclidean
    reports = {p: jetcore.full_report(system, metric, p, params) for p in points}

    out = [
        _check("F-skew", _max_over(points, lambda p: _absmax(reports[p].F + reports[p].F.T)), base),
        _check("eym-trace", _max_over(points, lambda p: _rel(
            reports[p].eym, 0.5 * np.trace(reports[p].F @ reports[p].F.T))), base),
        _check("phiS-skew", _max_over(points, lambda p: _phi_s_skew(spec, p)), base),
        _check("maxwell-1", _max_over(points, lambda p: _absmax(reports[p].maxwell_residual_1)),
               max(base, FIRST_MAXWELL_TOL if euclid else CURVED_MAXWELL_TOL)),
        _check("maxwell-2", _max_over(points, lambda p: _absmax(reports[p].maxwell_residual_2)),
               base if euclid else max(base, CURVED_MAXWELL_TOL)),
        _check("curvature-antisymmetry", _max_over(points, lambda p: _absmax(
            reports[p].curvature + reports[p].curvature.swapaxes(2, 3))), base),
    ]
    if euclid:
        out += _euclidean_checks(spec, reports, base)
        out += _kind_checks(spec, reports, base)
    out += _lagrangian_checks(spec, base)
    return out


def _phi_s_skew(spec: SpecDocument, p: JetPoint) -> float:
    S, phi = jetcore.connection_correction(spec.system, spec.metric, p, spec.parameters)
    P = phi @ S
    return _absmax(P + P.T)


def _euclidean_checks(spec: SpecDocument, reports: dict, base: float) -> list[Check]:
    system, metric, params = spec.system, spec.metric, spec.parameters
    fd_tol = max(base, FD_TOL)

    def reduction(p):
        r = reports[p]
        e = jetcore.euclidean_objects(system, p, params)
        return max(_rel(r.N, e.N), _rel(r.R_temporal, e.R_temporal), _rel(r.R_spatial, e.R_spatial),
                   _rel(r.F, e.F), _rel(r.eym, e.eym))

    def N_at(q):
        return jetcore.nonlinear_connection(system, metric, q, params)[1]

    def temporal(p):
        dN = (N_at(_shift(p, dt=FD_STEP)) - N_at(_shift(p, dt=-FD_STEP))) / (2 * FD_STEP)
        return _rel(reports[p].R_temporal, -dN)

    def spatial(p):
        err = 0.0
        for k in range(p.n):
            dN = (N_at(_shift(p, k=k, dx=FD_STEP)) - N_at(_shift(p, k=k, dx=-FD_STEP))) / (2 * FD_STEP)
            err = max(err, _rel(reports[p].R_spatial[k], dN))
        return err

    points = spec.points
    return [
        _check("euclidean-reduction", _max_over(points, reduction), base),
        _check("identity-F=-N", _max_over(points, lambda p: _absmax(reports[p].F + reports[p].N)), base),
        _check("identity-R1=-dN/dt", _max_over(points, temporal), fd_tol),
        _check("identity-Rk=dN/dxk", _max_over(points, spatial), fd_tol),
    ]


def _closed_form_error(reports: dict, p: JetPoint, cf: systems.ClosedForm) -> float:
    r = reports[p]
    return max(_rel(r.N, cf.N), _rel(r.R_temporal, cf.R_temporal), _rel(r.R_spatial, cf.R_spatial),
               _rel(r.F, cf.F), _rel(r.eym, cf.eym))


def _independence(spec: SpecDocument, other: systems.SystemSpec, reports: dict) -> tuple[float, str]:
    """Largest report difference between the system and a variant with another inhomogeneity."""
    xs = [f"x{j}" for j in range(1, spec.n + 1)]
    for a, b in zip(spec.system.X, other.X):
        for v in xs:
            da, db = ex.diff(a, v), ex.diff(b, v)
            if da != db or ex.diff(da, "t") != ex.diff(db, "t"):
                return float("inf"), f"d/d{v} of the field differs symbolically"
    err = 0.0
    for p, r in reports.items():
        q = jetcore.full_report(other, spec.metric, p, spec.parameters)
        for u, w in zip(_report_fields(r), _report_fields(q)):
            err = max(err, _absmax(u - w))
    return err, ""


def _kind_checks(spec: SpecDocument, reports: dict, base: float) -> list[Check]:
    system, params, points = spec.system, spec.parameters, spec.points
    out = []
    if system.kind == "linear":
        out.append(_check("closed-form-linear", _max_over(points, lambda p: _closed_form_error(
            reports, p, systems.closed_form_linear(system.A, p.t, params))), base))
        alt_f = spec.options.alt_f or tuple(
            ex.add(f, ex.mul(i + 1, ex.parse("1 + t^2"))) for i, f in enumerate(system.inhomogeneity))
        err, detail = _independence(spec, systems.build_linear(system.A, alt_f), reports)
        out.append(_check("f-independence", err, INDEPENDENCE_TOL, detail))
        n = system.n
        if all("t" not in a.symbols for row in system.A for a in row):
            out.append(_check("torsion-zero", _max_over(points, lambda p: _absmax(
                reports[p].R_temporal, reports[p].R_spatial)), 0.0))
        if all(system.A[i][j] == system.A[j][i] for i in range(n) for j in range(n)):
            out.append(_check("symmetric-A-zero", _max_over(points, lambda p: _absmax(
                *_report_fields(reports[p]))), 0.0))
    if system.kind in ("sode", "nhlsode"):
        out.append(_check("closed-form-sode", _max_over(points, lambda p: _closed_form_error(
            reports, p, systems.closed_form_sode(system.rhs, system.n, p.t, p.x, params))), base))
    if system.kind == "nhlsode":
        out.append(_check("closed-form-nhlsode", _max_over(points, lambda p: _closed_form_error(
            reports, p, systems.closed_form_nhlsode(system.coefficients, p.t, params))), base))
        alt_b = spec.options.alt_b or ex.add(system.b, ex.parse("1 + t^2"))
        err, detail = _independence(spec, systems.build_nhlsode(system.coefficients, alt_b), reports)
        out.append(_check("b-independence", err, INDEPENDENCE_TOL, detail))
    return out


def _lagrangian_checks(spec: SpecDocument, base: float) -> list[Check]:
    system, metric, params = spec.system, spec.metric, spec.parameters
    out = []

    def on_graph(p):
        X = [ex.evaluate(e, p.bindings(params)) for e in system.X]
        return abs(lagrangian.jls_value(system, metric, JetPoint(p.t, p.x, tuple(X)), params))

    out.append(_check("jls-graph", _max_over(spec.points, on_graph), base))
    if not spec.points:
        return out
    p = spec.points[0]
    t0, t1 = p.t, p.t + 1.0
    try:
        curve = lagrangian.integrate(system, p.x, t0, t1, 1000, params)
        action = lagrangian.energy_action(system, metric, curve, params)
        out.append(_check("energy-action", action, max(base, ACTION_TOL)))
    except (JetGeoError, ArithmeticError, ValueError) as err:
        out.append(Check("energy-action", float("inf"), max(base, ACTION_TOL), False, str(err)))
    try:
        errs = []
        for steps in EL_STEPS:
            curve = lagrangian.integrate(system, p.x, t0, t1, steps, params)
            errs.append(float(np.max(np.abs(lagrangian.el_residuals(system, metric, curve, params).values))))
        ratios = [a / b if b > 0 else float("inf") for a, b in zip(errs, errs[1:])]
        ok = all(np.isfinite(e) for e in errs) and all(
            r >= EL_MIN_RATIO or fine <= EL_FLOOR for r, fine in zip(ratios, errs[1:]))
        detail = "ratios " + ", ".join(f"{r:.3g}" for r in ratios)
        out.append(Check("el-convergence", errs[-1], EL_FLOOR, ok, detail, _EL_CRITERION))
    except (JetGeoError, ArithmeticError, ValueError) as err:
        out.append(Check("el-convergence", float("inf"), EL_FLOOR, False, str(err), _EL_CRITERION))
    return out
