"""Jet least-squares Lagrangian, its energy action and Euler-Lagrange residuals.

The residual of component i along a sampled curve is

    dL/dx^i - d/dt (dL/dxdot^i)

with both partials of L taken symbolically and the outer d/dt replaced by a
central difference along the samples.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Mapping, NamedTuple, Sequence

import numpy as np

from . import expr as ex
from .errors import CurveError
from .expr import Expr
from .jetcore import JetPoint
from .metric import MetricPair
from .systems import SystemSpec

Params = Mapping[str, float] | None

_UNIFORM_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class Curve:
    """Uniformly sampled curve t_0..t_m -> R^n with m >= 4."""

    times: np.ndarray
    states: np.ndarray
    velocities: np.ndarray | None = None

    def __post_init__(self) -> None:
        times = np.asarray(self.times, dtype=float)
        states = np.asarray(self.states, dtype=float)
        if states.ndim == 1:
            states = states[:, None]
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "states", states)
        if times.ndim != 1 or len(times) < 5:
            raise CurveError(f"a curve needs at least 5 samples, got {len(times)}")
        if states.shape[0] != len(times):
            raise CurveError(f"{len(times)} times but {states.shape[0]} states")
        steps = np.diff(times)
        if np.any(steps <= 0):
            raise CurveError("sample times must be strictly increasing")
        if np.max(np.abs(steps - steps[0])) > _UNIFORM_TOL:
            raise CurveError("sample times must be uniformly spaced")
        if self.velocities is not None:
            v = np.asarray(self.velocities, dtype=float).reshape(states.shape)
            object.__setattr__(self, "velocities", v)

    @property
    def dt(self) -> float:
        return float((self.times[-1] - self.times[0]) / (len(self.times) - 1))

    @property
    def n(self) -> int:
        return self.states.shape[1]

    @classmethod
    def sample(cls, fn: Callable[[np.ndarray], np.ndarray], t0: float, t1: float, steps: int,
               velocity: Callable[[np.ndarray], np.ndarray] | None = None) -> Curve:
        """Sample ``fn(t) -> (len(t), n)`` on ``steps`` equal intervals."""
        t = np.linspace(t0, t1, steps + 1)
        return cls(t, fn(t), None if velocity is None else velocity(t))

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t"] + [f"x{i}" for i in range(1, self.n + 1)])
            for t, row in zip(self.times, self.states):
                w.writerow([format(float(v), ".17g") for v in (t, *row)])

    @classmethod
    def from_csv(cls, path: str | Path) -> Curve:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        if not rows:
            raise CurveError(f"{path}: empty file")
        header = [h.strip() for h in rows[0]]
        expected = ["t"] + [f"x{i}" for i in range(1, len(header))]
        if header != expected:
            raise CurveError(f"{path}: header must be {','.join(expected)}, got {','.join(header)}")
        try:
            data = np.array([[float(v) for v in row] for row in rows[1:] if row], dtype=float)
        except ValueError as exc:
            raise CurveError(f"{path}: {exc}") from None
        if data.ndim != 2 or data.shape[1] != len(header):
            raise CurveError(f"{path}: ragged rows")
        return cls(data[:, 0], data[:, 1:])


def jls_expr(system: SystemSpec, metric: MetricPair) -> Expr:
    """h^11 phi_ij (x1_i - X^i)(x1_j - X^j) as an expression in (t, x, x1)."""
    n = system.n
    res = [ex.sub(ex.var(f"x1_{i + 1}"), system.X[i]) for i in range(n)]
    total = ex.ZERO
    for i in range(n):
        for j in range(n):
            total = ex.add(total, ex.mul(metric.phi[i][j], ex.mul(res[i], res[j])))
    return ex.div(total, metric.h)


def jls_value(system: SystemSpec, metric: MetricPair, p: JetPoint, params: Params = None) -> float:
    b = p.bindings(params)
    h = metric.h_value(p.t, params)
    phi = metric.phi_value(p.x, params)
    r = np.asarray(p.x1) - np.array([ex.evaluate(e, b) for e in system.X])
    return float(r @ phi @ r) / h


def _bindings(curve: Curve, velocities: np.ndarray, rows: slice, params: Params) -> dict:
    b: dict = dict(params or {})
    b["t"] = curve.times[rows]
    for i in range(curve.n):
        b[f"x{i + 1}"] = curve.states[rows, i]
        b[f"x1_{i + 1}"] = velocities[:, i]
    return b


def energy_action(system: SystemSpec, metric: MetricPair, curve: Curve, params: Params = None) -> float:
    """Trapezoidal integral of JLS * sqrt(h11) along the curve."""
    v = curve.velocities
    if v is None:
        v = np.gradient(curve.states, curve.dt, axis=0, edge_order=2)
    b = _bindings(curve, v, slice(None), params)
    integrand = ex.evaluate_array(jls_expr(system, metric), b)
    h = ex.evaluate_array(metric.h, {**(params or {}), "t": curve.times})
    return float(np.trapezoid(integrand * np.sqrt(h), curve.times))


class Residual(NamedTuple):
    times: np.ndarray
    values: np.ndarray


def el_residual(system: SystemSpec, metric: MetricPair, curve: Curve, i: int,
                params: Params = None) -> Residual:
    """Euler-Lagrange residual of component ``i`` (0-based) at interior samples.

    With stored velocities the residual covers samples 1..m-1; otherwise the
    velocities are central differences and the residual covers 2..m-2.
    """
    times, values = _el(system, metric, curve, [i], params)
    return Residual(times, values[:, 0])


def el_residuals(system: SystemSpec, metric: MetricPair, curve: Curve, params: Params = None) -> Residual:
    """All components at once; ``values`` has shape (samples, n)."""
    return Residual(*_el(system, metric, curve, range(curve.n), params))


def _el(system, metric, curve, components, params):
    if curve.n != system.n:
        raise CurveError(f"curve has dimension {curve.n}, system has {system.n}")
    dt = curve.dt
    if curve.velocities is not None:
        v, lo = curve.velocities, 0
    else:
        v, lo = (curve.states[2:] - curve.states[:-2]) / (2 * dt), 1
    hi = lo + len(v)  # velocities known on samples lo..hi-1
    if hi - lo < 3:
        raise CurveError("curve too short for an Euler-Lagrange residual")
    b = _bindings(curve, v, slice(lo, hi), params)
    L = jls_expr(system, metric)
    out = []
    for i in components:
        dx = ex.evaluate_array(ex.diff(L, f"x{i + 1}"), b)
        dv = ex.evaluate_array(ex.diff(L, f"x1_{i + 1}"), b)
        out.append(dx[1:-1] - (dv[2:] - dv[:-2]) / (2 * dt))
    return curve.times[lo + 1:hi - 1], np.stack(out, axis=1)


def integrate(system: SystemSpec, x0: Sequence[float], t0: float, t1: float, steps: int,
              params: Params = None) -> Curve:
    """Classical fixed-step RK4 trajectory of x' = X(t, x).

    The returned curve carries no velocities, so downstream residuals see
    only the sampled positions.
    """
    if steps < 4:
        raise ValueError("steps must be at least 4")
    n = system.n
    x = np.array(x0, dtype=float)
    if x.shape != (n,):
        raise ValueError(f"initial state must have {n} components")
    names = [f"x{i}" for i in range(1, n + 1)]
    base = dict(params or {})

    def field(t, y):
        b = dict(base, t=t, **dict(zip(names, map(float, y))))
        return np.array([ex.evaluate(e, b) for e in system.X])

    h = (t1 - t0) / steps
    times = np.linspace(t0, t1, steps + 1)
    states = np.empty((steps + 1, n))
    states[0] = x
    for s in range(steps):
        t = times[s]
        k1 = field(t, x)
        k2 = field(t + h / 2, x + h / 2 * k1)
        k3 = field(t + h / 2, x + h / 2 * k2)
        k4 = field(t + h, x + h * k3)
        x = x + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        states[s + 1] = x
    return Curve(times, states)
