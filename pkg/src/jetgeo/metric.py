"""The Riemannian pair (h11(t), phi_ij(x)), its Levi-Civita symbols and curvature.

Array conventions (0-based indices)::

    gamma[i, j, k]      = gamma^i_{jk}
    dgamma[i, j, k, l]  = d/dx^l gamma^i_{jk}
    r[l, i, j, k]       = r^l_{ijk}
                        = d_j gamma^l_{ik} - d_k gamma^l_{ij}
                          + gamma^m_{ik} gamma^l_{mj} - gamma^m_{ij} gamma^l_{mk}
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from . import expr as ex
from .errors import MetricError
from .expr import Expr

Matrix = tuple[tuple[Expr, ...], ...]


def coordinate_bindings(t: float | None, x: Sequence[float],
                        params: Mapping[str, float] | None = None) -> dict[str, float]:
    b = dict(params or {})
    if t is not None:
        b["t"] = float(t)
    for i, xi in enumerate(x, start=1):
        b[f"x{i}"] = float(xi)
    return b


@dataclass(frozen=True)
class MetricPair:
    """Temporal metric ``h`` (in t) and spatial metric ``phi`` (in x1..xn)."""

    h: Expr
    phi: Matrix

    def __post_init__(self) -> None:
        n = len(self.phi)
        if n < 2:
            raise MetricError("spatial dimension must be at least 2")
        if any(len(row) != n for row in self.phi):
            raise MetricError("phi must be a square matrix")
        bad = {s for s in self.h.symbols if ex.is_variable_name(s) and s != "t"}
        if bad:
            raise MetricError(f"h may depend on t only, found {sorted(bad)}")
        allowed = {f"x{i}" for i in range(1, n + 1)}
        for i in range(n):
            for j in range(n):
                e = self.phi[i][j]
                bad = {s for s in e.symbols if ex.is_variable_name(s) and s not in allowed}
                if bad:
                    raise MetricError(f"phi[{i + 1}][{j + 1}] may depend on x1..x{n} only, "
                                      f"found {sorted(bad)}")
                if e != self.phi[j][i]:
                    raise MetricError(f"phi is not symmetric: phi[{i + 1}][{j + 1}] = {e} "
                                      f"but phi[{j + 1}][{i + 1}] = {self.phi[j][i]}")

    @classmethod
    def create(cls, h, phi) -> MetricPair:
        """Build from expressions, numbers or expression text."""
        return cls(ex.as_expr(h), tuple(tuple(ex.as_expr(v) for v in row) for row in phi))

    @classmethod
    def euclidean(cls, n: int) -> MetricPair:
        return cls(ex.ONE, tuple(tuple(ex.ONE if i == j else ex.ZERO for j in range(n))
                                 for i in range(n)))

    @property
    def n(self) -> int:
        return len(self.phi)

    @property
    def is_euclidean(self) -> bool:
        return self == MetricPair.euclidean(self.n)

    def h_value(self, t: float, params: Mapping[str, float] | None = None) -> float:
        value = ex.evaluate(self.h, coordinate_bindings(t, (), params))
        if not value > 0:
            raise MetricError(f"h11 = {value!r} is not positive at t = {t!r}")
        return value

    def phi_value(self, x: Sequence[float], params: Mapping[str, float] | None = None,
                  check: bool = True) -> np.ndarray:
        return phi_at(self.phi, x, params, check=check)


def phi_at(phi: Matrix, x: Sequence[float], params: Mapping[str, float] | None = None,
           check: bool = True) -> np.ndarray:
    """Numeric spatial metric at ``x``; optionally checks positive-definiteness."""
    b = coordinate_bindings(None, x, params)
    n = len(phi)
    g = np.array([[ex.evaluate(phi[i][j], b) for j in range(n)] for i in range(n)])
    if check:
        check_positive_definite(g, x)
    return g


def check_positive_definite(g: np.ndarray, where=None) -> None:
    """Sylvester's criterion on the leading principal minors."""
    for k in range(1, g.shape[0] + 1):
        minor = np.linalg.det(g[:k, :k])
        if not minor > 0:
            at = "" if where is None else f" at x = {list(map(float, where))}"
            raise MetricError(f"phi is not positive definite{at}: "
                              f"leading minor of order {k} is {minor!r}")


def temporal_christoffel(h: Expr | str, t: float, params: Mapping[str, float] | None = None) -> float:
    """H^1_11 = h'(t) / (2 h(t))."""
    h = ex.as_expr(h)
    b = coordinate_bindings(t, (), params)
    hv = ex.evaluate(h, b)
    if not hv > 0:
        raise MetricError(f"h11 = {hv!r} is not positive at t = {t!r}")
    return ex.evaluate(ex.diff(h, "t"), b) / (2.0 * hv)


def metric_partials(phi: Matrix, x: Sequence[float], params=None, order: int = 1):
    """Symbolic partials of phi evaluated at x.

    Returns ``dphi[a, i, j] = d_a phi_ij`` and, for ``order=2``, also
    ``d2phi[a, b, i, j] = d_a d_b phi_ij``.
    """
    n = len(phi)
    b = coordinate_bindings(None, x, params)
    names = [f"x{a}" for a in range(1, n + 1)]
    dphi = np.zeros((n, n, n))
    d2phi = np.zeros((n, n, n, n)) if order >= 2 else None
    for i in range(n):
        for j in range(n):
            for a, va in enumerate(names):
                da = ex.diff(phi[i][j], va)
                if da.is_number(0):
                    continue
                dphi[a, i, j] = ex.evaluate(da, b)
                if d2phi is not None:
                    for c, vc in enumerate(names):
                        d2phi[a, c, i, j] = ex.evaluate(ex.diff(da, vc), b)
    return (dphi, d2phi) if order >= 2 else dphi


def _first_kind(dphi: np.ndarray) -> np.ndarray:
    # [l, j, k] = 1/2 (d_j phi_lk + d_k phi_lj - d_l phi_jk)
    return 0.5 * (dphi.transpose(1, 0, 2) + np.einsum("klj->ljk", dphi) - dphi)


def _inverse(g: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.inv(g)
    except np.linalg.LinAlgError:
        raise MetricError("phi is singular") from None


def spatial_christoffel(phi: Matrix, x: Sequence[float], params=None) -> np.ndarray:
    """gamma[i, j, k] = 1/2 phi^il (d_j phi_lk + d_k phi_lj - d_l phi_jk)."""
    g = phi_at(phi, x, params, check=False)
    ginv = _inverse(g)
    return np.einsum("il,ljk->ijk", ginv, _first_kind(metric_partials(phi, x, params)))


def christoffel_derivatives(phi: Matrix, x: Sequence[float], params=None) -> np.ndarray:
    """dgamma[i, j, k, l] = d_l gamma^i_jk from exact second partials of phi.

    Uses d(phi^-1) = -phi^-1 (d phi) phi^-1, so no finite differences enter.
    """
    g = phi_at(phi, x, params, check=False)
    ginv = _inverse(g)
    dphi, d2phi = metric_partials(phi, x, params, order=2)
    first = _first_kind(dphi)
    # dfirst[m, l, j, k] = d_m first[l, j, k]
    dfirst = 0.5 * (np.einsum("mjlk->mljk", d2phi) + np.einsum("mklj->mljk", d2phi) - d2phi)
    dginv = -np.einsum("ia,mab,bl->mil", ginv, dphi, ginv)
    return np.einsum("mil,ljk->ijkm", dginv, first) + np.einsum("il,mljk->ijkm", ginv, dfirst)


def curvature_from(gamma: np.ndarray, dgamma: np.ndarray) -> np.ndarray:
    # p[l, i, j, k] = d_j gamma^l_ik + gamma^m_ik gamma^l_mj; r = p - p^(j<->k)
    p = np.einsum("likj->lijk", dgamma) + np.einsum("mik,lmj->lijk", gamma, gamma)
    return p - p.swapaxes(2, 3)


def curvature_tensor(phi: Matrix, x: Sequence[float], params=None) -> np.ndarray:
    """r[l, i, j, k] = r^l_ijk of the Levi-Civita connection of phi."""
    return curvature_from(spatial_christoffel(phi, x, params),
                          christoffel_derivatives(phi, x, params))


@dataclass(frozen=True, eq=False)
class ChristoffelData:
    """Connection data of a metric pair at one point (see module docstring for layout)."""

    H: float
    gamma: np.ndarray
    dgamma: np.ndarray
    r: np.ndarray


def christoffel_data(metric: MetricPair, t: float, x: Sequence[float], params=None) -> ChristoffelData:
    """All connection data of the pair at (t, x), after checking positivity."""
    metric.h_value(t, params)
    metric.phi_value(x, params, check=True)
    gamma = spatial_christoffel(metric.phi, x, params)
    dgamma = christoffel_derivatives(metric.phi, x, params)
    return ChristoffelData(
        H=temporal_christoffel(metric.h, t, params),
        gamma=gamma,
        dgamma=dgamma,
        r=curvature_from(gamma, dgamma),
    )


# ---------------------------------------------------------------------------
# symbolic counterparts, used for report rendering


def symbolic_determinant(m: Matrix) -> Expr:
    n = len(m)
    if n == 1:
        return m[0][0]
    if n == 2:
        return ex.sub(ex.mul(m[0][0], m[1][1]), ex.mul(m[0][1], m[1][0]))
    total = ex.ZERO
    for j in range(n):
        if m[0][j].is_number(0):
            continue
        minor = tuple(tuple(row[c] for c in range(n) if c != j) for row in m[1:])
        term = ex.mul(m[0][j], symbolic_determinant(minor))
        total = ex.add(total, term) if j % 2 == 0 else ex.sub(total, term)
    return total


def symbolic_inverse(m: Matrix) -> Matrix:
    """Adjugate over determinant; intended for the small n of this package."""
    n = len(m)
    det = symbolic_determinant(m)
    if det.is_number(0):
        raise MetricError("phi is symbolically singular")
    rows = []
    for i in range(n):
        row = []
        for j in range(n):
            minor = tuple(tuple(m[r][c] for c in range(n) if c != i) for r in range(n) if r != j)
            cof = symbolic_determinant(minor) if n > 1 else ex.ONE
            if (i + j) % 2:
                cof = ex.neg(cof)
            row.append(ex.div(cof, det))
        rows.append(tuple(row))
    return tuple(rows)


def symbolic_christoffel(phi: Matrix) -> tuple[tuple[tuple[Expr, ...], ...], ...]:
    n = len(phi)
    inv = symbolic_inverse(phi)
    xs = [f"x{a}" for a in range(1, n + 1)]

    def first(l, j, k):
        return ex.mul(0.5, ex.sub(ex.add(ex.diff(phi[l][k], xs[j]), ex.diff(phi[l][j], xs[k])),
                                  ex.diff(phi[j][k], xs[l])))

    out = []
    for i in range(n):
        out.append(tuple(
            tuple(_sum(ex.mul(inv[i][l], first(l, j, k)) for l in range(n)) for k in range(n))
            for j in range(n)))
    return tuple(out)


def _sum(terms) -> Expr:
    total = ex.ZERO
    for term in terms:
        total = ex.add(total, term)
    return total

