"""Jet Riemann-Lagrange objects of an ODE system and a metric pair.

Everything is evaluated numerically at a :class:`JetPoint` from exact
symbolic partials of the system.  Array layout (0-based)::

    C[i, j]            covariant Jacobian   X^(i)_||j
    N[i, j]            spatial connection   N^(i)_j   (row = upper index)
    R_temporal[i, j]   R^(i)_1j
    R_spatial[k, i, j] R^(i)_jk            (one matrix per coordinate k)
    F[i, j]            F^(1)_(i)j
    curvature[l,i,j,k] r^l_ijk

The temporal and the spatial torsion are unrelated objects that only share a
letter; they are kept in separate fields.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from . import expr as ex
from .metric import (
    ChristoffelData,
    MetricPair,
    christoffel_data,
    curvature_tensor,
    metric_partials,
    symbolic_christoffel,
    symbolic_inverse,
)
from .systems import SystemSpec

Params = Mapping[str, float] | None


@dataclass(frozen=True)
class JetPoint:
    """A point (t, x^i, x1^i) of the 1-jet space."""

    t: float
    x: tuple[float, ...]
    x1: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        x = tuple(float(v) for v in self.x)
        x1 = tuple(float(v) for v in self.x1) if len(self.x1) else (0.0,) * len(x)
        object.__setattr__(self, "t", float(self.t))
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "x1", x1)
        if len(x) < 2:
            raise ValueError("a jet point needs n >= 2 spatial coordinates")
        if len(x1) != len(x):
            raise ValueError(f"x has {len(x)} components but x1 has {len(x1)}")

    @property
    def n(self) -> int:
        return len(self.x)

    def bindings(self, params: Params = None) -> dict[str, float]:
        b = dict(params or {})
        b["t"] = self.t
        for i, (xi, vi) in enumerate(zip(self.x, self.x1), start=1):
            b[f"x{i}"] = xi
            b[f"x1_{i}"] = vi
        return b


class _Partials:
    """Values of X and its first/second partials at one point."""

    def __init__(self, system: SystemSpec, p: JetPoint, params: Params):
        n = system.n
        if p.n != n:
            raise ValueError(f"system has n = {n} but the point has n = {p.n}")
        b = p.bindings(params)
        names = [f"x{j}" for j in range(1, n + 1)]
        X = system.X
        self.X = np.array([ex.evaluate(e, b) for e in X])
        self.dt = np.array([ex.evaluate(ex.diff(e, "t"), b) for e in X])
        self.J = np.array([[ex.evaluate(ex.diff(X[i], v), b) for v in names] for i in range(n)])
        self.dtJ = np.array([[ex.evaluate(ex.diff(ex.diff(X[i], v), "t"), b) for v in names]
                             for i in range(n)])
        # ddJ[i, j, k] = d_k d_j X^i, filled for j <= k and mirrored
        self.ddJ = np.zeros((n, n, n))
        for i in range(n):
            for j in range(n):
                dj = ex.diff(X[i], names[j])
                for k in range(j, n):
                    v = ex.evaluate(ex.diff(dj, names[k]), b)
                    self.ddJ[i, j, k] = self.ddJ[i, k, j] = v


# ---------------------------------------------------------------------------
# covariant derivatives of the field


def _cov_spatial(d: _Partials, gamma: np.ndarray) -> np.ndarray:
    return d.J + np.einsum("m,imj->ij", d.X, gamma)


def _dt_cov_spatial(d: _Partials, gamma: np.ndarray) -> np.ndarray:
    return d.dtJ + np.einsum("m,imj->ij", d.dt, gamma)


def _dx_cov_spatial(d: _Partials, chris: ChristoffelData) -> np.ndarray:
    # [i, j, k] = d_k (X^i_||j)
    return (d.ddJ + np.einsum("mk,imj->ijk", d.J, chris.gamma)
            + np.einsum("m,imjk->ijk", d.X, chris.dgamma))


def cov_spatial(system: SystemSpec, chris: ChristoffelData, p: JetPoint, params: Params = None) -> np.ndarray:
    """C[i, j] = d_j X^i + X^m gamma^i_mj."""
    return _cov_spatial(_Partials(system, p, params), chris.gamma)


def cov_temporal(system: SystemSpec, H: float, chris: ChristoffelData, p: JetPoint,
                 params: Params = None) -> np.ndarray:
    """X^(i)_||j//1 = d_t (X^(i)_||j) - X^(i)_||j H."""
    d = _Partials(system, p, params)
    return _dt_cov_spatial(d, chris.gamma) - _cov_spatial(d, chris.gamma) * H


def _cov_second(d: _Partials, chris: ChristoffelData) -> np.ndarray:
    g = chris.gamma
    C = _cov_spatial(d, g)
    return (_dx_cov_spatial(d, chris) + np.einsum("mj,imk->ijk", C, g)
            - np.einsum("im,mjk->ijk", C, g))


def cov_second(system: SystemSpec, chris: ChristoffelData, p: JetPoint, params: Params = None) -> np.ndarray:
    """D[i, j, k] = X^(i)_||j||k."""
    return _cov_second(_Partials(system, p, params), chris)


# ---------------------------------------------------------------------------
# geometric objects


class _Context:
    """Everything needed at one point, computed once."""

    def __init__(self, system: SystemSpec, metric: MetricPair, p: JetPoint, params: Params):
        if metric.n != system.n:
            raise ValueError(f"metric has n = {metric.n} but the system has n = {system.n}")
        system.check_at(p.t, params)
        self.p = p
        self.params = params
        self.metric = metric
        self.chris = christoffel_data(metric, p.t, p.x, params)
        self.h = metric.h_value(p.t, params)
        self.dh = ex.evaluate(ex.diff(metric.h, "t"), p.bindings(params))
        self.phi = metric.phi_value(p.x, params, check=False)
        self.phi_inv = np.linalg.inv(self.phi)
        self.d = _Partials(system, p, params)
        self.C = _cov_spatial(self.d, self.chris.gamma)
        self.C_t = _dt_cov_spatial(self.d, self.chris.gamma) - self.C * self.chris.H

    def adjoint_part(self, Y: np.ndarray) -> np.ndarray:
        """1/2 [Y - phi^-1 Y^T phi], i.e. 1/2 [Y^i_j - phi^ir Y^s_r phi_sj]."""
        return 0.5 * (Y - self.phi_inv @ Y.T @ self.phi)


def connection_correction(system: SystemSpec, metric: MetricPair, p: JetPoint,
                          params: Params = None) -> tuple[np.ndarray, np.ndarray]:
    """Return (S, phi) where S = 1/2 [C - phi^-1 C^T phi]; phi S is skew."""
    c = _Context(system, metric, p, params)
    return c.adjoint_part(c.C), c.phi


def _nonlinear_connection(c: _Context) -> tuple[np.ndarray, np.ndarray]:
    x1 = np.asarray(c.p.x1)
    M = -c.chris.H * x1
    N = np.einsum("ijk,k->ij", c.chris.gamma, x1) - c.adjoint_part(c.C)
    return M, N


def nonlinear_connection(system: SystemSpec, metric: MetricPair, p: JetPoint,
                         params: Params = None) -> tuple[np.ndarray, np.ndarray]:
    """Temporal (M) and spatial (N) components of the canonical nonlinear connection."""
    return _nonlinear_connection(_Context(system, metric, p, params))


def _torsion(c: _Context) -> tuple[np.ndarray, np.ndarray]:
    R1 = c.adjoint_part(c.C_t)
    D = _cov_second(c.d, c.chris)
    rx = np.einsum("ijkm,m->kij", c.chris.r, np.asarray(c.p.x1))
    Rk = np.stack([rx[k] - c.adjoint_part(D[:, :, k]) for k in range(c.p.n)])
    return R1, Rk


def torsion(system: SystemSpec, metric: MetricPair, p: JetPoint,
            params: Params = None) -> tuple[np.ndarray, np.ndarray]:
    """(R_temporal, R_spatial); R_spatial[k] is the matrix R^(i)_jk for fixed k."""
    return _torsion(_Context(system, metric, p, params))


def curvature_d_tensor(metric: MetricPair, p: JetPoint, params: Params = None) -> np.ndarray:
    """The only effective curvature components, R^l_ijk = r^l_ijk."""
    return curvature_tensor(metric.phi, p.x, params)


def _em_form(c: _Context) -> np.ndarray:
    P = c.phi @ c.C
    return (0.5 / c.h) * (P - P.T)


def em_form(system: SystemSpec, metric: MetricPair, p: JetPoint, params: Params = None) -> np.ndarray:
    """F[i, j] = h^11/2 [phi_im X^(m)_||j - phi_jm X^(m)_||i]."""
    return _em_form(_Context(system, metric, p, params))


def _maxwell(c: _Context, F: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    hinv = 1.0 / c.h
    dhinv = -c.dh / c.h ** 2
    gamma = c.chris.gamma

    # first equation: F//1 against 1/4 Alt{h^11 phi_im [C//1 - phi^-1 C//1^T phi]^m_j}
    P = c.phi @ c.C
    dP = c.phi @ _dt_cov_spatial(c.d, gamma)
    dtF = 0.5 * dhinv * (P - P.T) + 0.5 * hinv * (dP - dP.T)
    lhs = dtF + F * c.chris.H
    Y = hinv * c.phi @ (2.0 * c.adjoint_part(c.C_t))
    rhs = 0.25 * (Y - Y.T)

    # second equation: cyclic sum of F_(i)j||k
    dphi = metric_partials(c.metric.phi, c.p.x, c.params)
    dC = _dx_cov_spatial(c.d, c.chris)
    Q = np.einsum("kim,mj->ijk", dphi, c.C) + np.einsum("im,mjk->ijk", c.phi, dC)
    dF = 0.5 * hinv * (Q - Q.transpose(1, 0, 2))
    Fk = dF - np.einsum("mj,mik->ijk", F, gamma) - np.einsum("im,mjk->ijk", F, gamma)
    cyclic = Fk + Fk.transpose(1, 2, 0) + Fk.transpose(2, 0, 1)
    return lhs - rhs, cyclic


def maxwell_residuals(system: SystemSpec, metric: MetricPair, p: JetPoint,
                      params: Params = None) -> tuple[np.ndarray, np.ndarray]:
    """Entrywise residuals of both generalized Maxwell equations (ideally zero)."""
    c = _Context(system, metric, p, params)
    return _maxwell(c, _em_form(c))


def yang_mills_energy(F: np.ndarray) -> float:
    """Sum of F[i, j]^2 over i < j."""
    F = np.asarray(F, dtype=float)
    n = F.shape[0]
    return float(sum(F[i, j] ** 2 for i in range(n - 1) for j in range(i + 1, n)))


@dataclass(frozen=True, eq=False)
class CartanConnection:
    """Adapted components (H, 0, gamma, 0); the two zero slots are kept explicitly."""

    H: float
    mixed: np.ndarray
    gamma: np.ndarray
    vertical: np.ndarray


@dataclass(frozen=True, eq=False)
class GeometryReport:
    point: JetPoint
    M: np.ndarray
    N: np.ndarray
    cartan: CartanConnection
    R_temporal: np.ndarray
    R_spatial: np.ndarray
    curvature: np.ndarray
    F: np.ndarray
    maxwell_residual_1: np.ndarray
    maxwell_residual_2: np.ndarray
    eym: float
    warnings: tuple[str, ...] = field(default=())


def full_report(system: SystemSpec, metric: MetricPair, p: JetPoint, params: Params = None) -> GeometryReport:
    c = _Context(system, metric, p, params)
    n = p.n
    M, N = _nonlinear_connection(c)
    R1, Rk = _torsion(c)
    F = _em_form(c)
    res1, res2 = _maxwell(c, F)
    warnings = ()
    if np.any(c.chris.r != 0):
        warnings = ("spatial torsion depends on the fiber coordinates x1 through the "
                    "curvature of phi; values are for the given x1",)
    return GeometryReport(
        point=p,
        M=M,
        N=N,
        cartan=CartanConnection(H=c.chris.H, mixed=np.zeros((n, n)), gamma=c.chris.gamma,
                                vertical=np.zeros((n, n, n))),
        R_temporal=R1,
        R_spatial=Rk,
        curvature=c.chris.r,
        F=F,
        maxwell_residual_1=res1,
        maxwell_residual_2=res2,
        eym=yang_mills_energy(F),
        warnings=warnings,
    )


# ---------------------------------------------------------------------------
# Euclidean pair, written out directly from the partials of X


@dataclass(frozen=True, eq=False)
class EuclideanObjects:
    N: np.ndarray
    R_temporal: np.ndarray
    R_spatial: np.ndarray
    F: np.ndarray
    eym: float


def euclidean_objects(system: SystemSpec, p: JetPoint, params: Params = None) -> EuclideanObjects:
    """Objects for h = 1, phi = delta, computed entry by entry without any metric algebra."""
    n = system.n
    b = p.bindings(params)
    X = system.X
    xs = [f"x{j}" for j in range(1, n + 1)]

    def val(e):
        return ex.evaluate(e, b)

    def d(i, j):  # dX^i/dx^j
        return val(ex.diff(X[i], xs[j]))

    def dt(i, j):  # d^2 X^i / dt dx^j
        return val(ex.diff(ex.diff(X[i], xs[j]), "t"))

    def dd(i, j, k):  # d^2 X^i / dx^k dx^j
        return val(ex.diff(ex.diff(X[i], xs[min(j, k)]), xs[max(j, k)]))

    N = np.empty((n, n))
    F = np.empty((n, n))
    R1 = np.empty((n, n))
    Rk = np.empty((n, n, n))
    eym = 0.0
    for i in range(n):
        for j in range(n):
            curl = d(i, j) - d(j, i)
            N[i, j] = -0.5 * curl
            F[i, j] = 0.5 * curl
            R1[i, j] = 0.5 * (dt(i, j) - dt(j, i))
            for k in range(n):
                Rk[k, i, j] = -0.5 * (dd(i, j, k) - dd(j, i, k))
            if i < j:
                eym += 0.25 * curl ** 2
    return EuclideanObjects(N=N, R_temporal=R1, R_spatial=Rk, F=F, eym=eym)


# ---------------------------------------------------------------------------
# symbolic rendering


def symbolic_objects(system: SystemSpec, metric: MetricPair) -> dict[str, tuple[tuple[ex.Expr, ...], ...]]:
    """Expression matrices for N and F (entries in t, x and x1).

    Used for report output; expressions are only constant-folded.
    """
    n = system.n
    xs = [f"x{j}" for j in range(1, n + 1)]
    X = system.X
    phi = metric.phi
    euclid = metric.is_euclidean
    gamma = None if euclid else symbolic_christoffel(phi)
    inv = None if euclid else symbolic_inverse(phi)

    def total(terms):
        acc = ex.ZERO
        for term in terms:
            acc = ex.add(acc, term)
        return acc

    C = []
    for i in range(n):
        row = []
        for j in range(n):
            e = ex.diff(X[i], xs[j])
            if gamma is not None:
                e = ex.add(e, total(ex.mul(X[m], gamma[i][m][j]) for m in range(n)))
            row.append(e)
        C.append(row)

    if euclid:
        N = [[ex.mul(-0.5, ex.sub(C[i][j], C[j][i])) for j in range(n)] for i in range(n)]
        F = [[ex.mul(0.5, ex.sub(C[i][j], C[j][i])) for j in range(n)] for i in range(n)]
    else:
        def adj(i, j):  # phi^ir C^s_r phi_sj
            return total(ex.mul(ex.mul(inv[i][r], C[s][r]), phi[s][j])
                         for r in range(n) for s in range(n))

        def lowered(i, j):  # phi_im C^m_j
            return total(ex.mul(phi[i][m], C[m][j]) for m in range(n))

        N = [[ex.sub(total(ex.mul(gamma[i][j][k], ex.var(f"x1_{k + 1}")) for k in range(n)),
                     ex.mul(0.5, ex.sub(C[i][j], adj(i, j))))
              for j in range(n)] for i in range(n)]
        half_hinv = ex.div(0.5, metric.h)
        F = [[ex.mul(half_hinv, ex.sub(lowered(i, j), lowered(j, i))) for j in range(n)]
             for i in range(n)]
    return {"N": tuple(tuple(r) for r in N), "F": tuple(tuple(r) for r in F)}

