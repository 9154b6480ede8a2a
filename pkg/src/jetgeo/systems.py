"""ODE system builders and the closed-form jet objects of the special classes.

Four kinds of system are supported:

* ``generic``  -- x1_i = X^i(t, x)
* ``linear``   -- X^i = sum_k A^i_k(t) x^k + f^i(t)
* ``sode``     -- y^(n) = f(t, y, ..., y^(n-1)), reduced to X = (x2, ..., xn, f)
* ``nhlsode``  -- a0 y^(n) + a1 y^(n-1) + ... + an y = b, a special sode

Every builder materializes the generic field ``X`` so the general engine in
:mod:`jetgeo.jetcore` can run on it.  The ``closed_form_*`` functions are a
second, independent route that builds the connection, torsion and field
matrices directly from the special structure (Euclidean metric pair).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from . import expr as ex
from .errors import SystemSpecError
from .expr import Expr

KINDS = ("generic", "linear", "sode", "nhlsode")

ExprMatrix = tuple[tuple[Expr, ...], ...]


@dataclass(frozen=True)
class SystemSpec:
    kind: str
    X: tuple[Expr, ...]
    A: ExprMatrix | None = None
    inhomogeneity: tuple[Expr, ...] | None = None
    rhs: Expr | None = None
    coefficients: tuple[Expr, ...] | None = None
    b: Expr | None = None

    @property
    def n(self) -> int:
        return len(self.X)

    def check_at(self, t: float, params: Mapping[str, float] | None = None) -> None:
        """Reject evaluation points where the leading coefficient vanishes."""
        if self.kind != "nhlsode":
            return
        a0 = ex.evaluate(self.coefficients[0], _tb(t, params))
        if a0 == 0:
            raise SystemSpecError(f"leading coefficient a0 = {self.coefficients[0]} vanishes at t = {t!r}")


def _tb(t: float, params) -> dict[str, float]:
    b = dict(params or {})
    b["t"] = float(t)
    return b


def _check_vars(e: Expr, allowed: set[str], what: str) -> None:
    for s in sorted(e.symbols):
        if not ex.is_variable_name(s) or s in allowed:
            continue
        if s.startswith("x1_"):
            raise SystemSpecError(f"{what} may not depend on the fiber coordinate {s}")
        raise SystemSpecError(f"{what} may not depend on {s}")


def _base_vars(n: int) -> set[str]:
    return {"t"} | {f"x{i}" for i in range(1, n + 1)}


def _check_dim(n: int) -> None:
    if n < 2:
        raise SystemSpecError(f"dimension n = {n} but at least 2 is required")


def build_generic(X: Sequence[Expr | str], n: int | None = None) -> SystemSpec:
    X = tuple(ex.as_expr(e) for e in X)
    if n is not None and n != len(X):
        raise SystemSpecError(f"n = {n} but {len(X)} components were given")
    _check_dim(len(X))
    allowed = _base_vars(len(X))
    for i, e in enumerate(X, start=1):
        _check_vars(e, allowed, f"X^{i}")
    return SystemSpec("generic", X)


def build_linear(A: Sequence[Sequence[Expr | str]], f: Sequence[Expr | str] | None = None) -> SystemSpec:
    A = tuple(tuple(ex.as_expr(a) for a in row) for row in A)
    n = len(A)
    _check_dim(n)
    if any(len(row) != n for row in A):
        raise SystemSpecError("A must be a square matrix")
    f = tuple(ex.as_expr(v) for v in (f if f is not None else [0] * n))
    if len(f) != n:
        raise SystemSpecError(f"f has {len(f)} components, expected {n}")
    for i in range(n):
        for k in range(n):
            _check_vars(A[i][k], {"t"}, f"A[{i + 1}][{k + 1}]")
        _check_vars(f[i], {"t"}, f"f^{i + 1}")
    X = []
    for i in range(n):
        total = ex.ZERO
        for k in range(n):
            total = ex.add(total, ex.mul(A[i][k], ex.var(f"x{k + 1}")))
        X.append(ex.add(total, f[i]))
    return SystemSpec("linear", tuple(X), A=A, inhomogeneity=f)


def build_sode(n: int, f: Expr | str) -> SystemSpec:
    _check_dim(n)
    f = ex.as_expr(f)
    _check_vars(f, _base_vars(n), "f")
    X = tuple(ex.var(f"x{i}") for i in range(2, n + 1)) + (f,)
    return SystemSpec("sode", X, rhs=f)


def nhlsode_rhs(a: Sequence[Expr], b: Expr) -> Expr:
    """f = b/a0 - (an/a0) x1 - (a(n-1)/a0) x2 - ... - (a1/a0) xn."""
    n = len(a) - 1
    f = ex.div(b, a[0])
    for j in range(1, n + 1):
        f = ex.add(f, ex.mul(ex.div(ex.neg(a[n - j + 1]), a[0]), ex.var(f"x{j}")))
    return f


def build_nhlsode(a: Sequence[Expr | str], b: Expr | str = 0) -> SystemSpec:
    a = tuple(ex.as_expr(v) for v in a)
    b = ex.as_expr(b)
    n = len(a) - 1
    _check_dim(n)
    for k, ak in enumerate(a):
        _check_vars(ak, {"t"}, f"a{k}")
    _check_vars(b, {"t"}, "b")
    if a[0].is_number(0):
        raise SystemSpecError("leading coefficient a0 is identically zero")
    sode = build_sode(n, nhlsode_rhs(a, b))
    return SystemSpec("nhlsode", sode.X, rhs=sode.rhs, coefficients=a, b=b)


# ---------------------------------------------------------------------------
# closed forms


@dataclass(frozen=True, eq=False)
class ClosedForm:
    """Jet objects of a special system under the Euclidean pair.

    ``R_spatial[k]`` is the spatial torsion matrix for the k-th coordinate.
    """

    N: np.ndarray
    R_temporal: np.ndarray
    R_spatial: np.ndarray
    F: np.ndarray
    eym: float


def _evaluate_matrix(m: ExprMatrix, b: Mapping[str, float]) -> np.ndarray:
    return np.array([[ex.evaluate(e, b) for e in row] for row in m], dtype=float)


def closed_form_linear(A: Sequence[Sequence[Expr | str]], t: float,
                       params: Mapping[str, float] | None = None) -> ClosedForm:
    """Objects of a linear system; the inhomogeneity never enters."""
    A = tuple(tuple(ex.as_expr(a) for a in row) for row in A)
    n = len(A)
    b = _tb(t, params)
    a = _evaluate_matrix(A, b)
    adot = _evaluate_matrix(tuple(tuple(ex.diff(e, "t") for e in row) for row in A), b)
    skew = a - a.T
    eym = 0.25 * sum(skew[i, j] ** 2 for i in range(n) for j in range(i + 1, n))
    return ClosedForm(
        N=-0.5 * skew,
        R_temporal=0.5 * (adot - adot.T),
        R_spatial=np.zeros((n, n, n)),
        F=0.5 * skew,
        eym=float(eym),
    )


def sode_connection_bracket(f: Expr, n: int) -> ExprMatrix:
    """The bracketed matrix B with N = -1/2 B for y^(n) = f.

    Super/sub-diagonal +-1 band in the first n-1 rows, the last column
    carries -df/dx^i and the last row +df/dx^j; the (n-1, n) and (n, n-1)
    corners are 1 - df/dx^(n-1) and -1 + df/dx^(n-1).
    """
    fx = [ex.diff(f, f"x{j}") for j in range(1, n + 1)]
    m = [[ex.ZERO] * n for _ in range(n)]
    for i in range(n - 2):
        m[i][i + 1] = ex.ONE
        m[i + 1][i] = ex.const(-1)
        m[i][n - 1] = ex.neg(fx[i])
        m[n - 1][i] = fx[i]
    m[n - 2][n - 1] = ex.sub(1, fx[n - 2])
    m[n - 1][n - 2] = ex.add(-1, fx[n - 2])
    return tuple(tuple(row) for row in m)


def _bordered(border: Sequence[Expr], n: int) -> ExprMatrix:
    # zero matrix with -border in the last column, +border in the last row
    m = [[ex.ZERO] * n for _ in range(n)]
    for i in range(n - 1):
        m[i][n - 1] = ex.neg(border[i])
        m[n - 1][i] = border[i]
    return tuple(tuple(row) for row in m)


def sode_temporal_bracket(f: Expr, n: int) -> ExprMatrix:
    """B_1 with temporal torsion R_1 = 1/2 B_1 (mixed partials d^2 f / dt dx^j)."""
    return _bordered([ex.diff(ex.diff(f, f"x{j}"), "t") for j in range(1, n)], n)


def sode_spatial_bracket(f: Expr, n: int, k: int) -> ExprMatrix:
    """B_k with spatial torsion R_k = -1/2 B_k (partials d^2 f / dx^k dx^j); k is 1-based."""
    return _bordered([ex.diff(ex.diff(f, f"x{j}"), f"x{k}") for j in range(1, n)], n)


def sode_eym_expr(f: Expr, n: int) -> Expr:
    """1/4 [n - 1 - 2 df/dx^(n-1) + sum_{j<n} (df/dx^j)^2]."""
    fx = [ex.diff(f, f"x{j}") for j in range(1, n)]
    inner = ex.sub(ex.const(n - 1), ex.mul(2, fx[n - 2]))
    for d in fx:
        inner = ex.add(inner, ex.power(d, 2))
    return ex.mul(0.25, inner)


def closed_form_sode(f: Expr | str, n: int, t: float, x: Sequence[float],
                     params: Mapping[str, float] | None = None) -> ClosedForm:
    f = ex.as_expr(f)
    _check_dim(n)
    b = _tb(t, params)
    for i, xi in enumerate(x, start=1):
        b[f"x{i}"] = float(xi)
    N = -0.5 * _evaluate_matrix(sode_connection_bracket(f, n), b)
    R1 = 0.5 * _evaluate_matrix(sode_temporal_bracket(f, n), b)
    Rk = np.stack([-0.5 * _evaluate_matrix(sode_spatial_bracket(f, n, k), b)
                   for k in range(1, n + 1)])
    return ClosedForm(N=N, R_temporal=R1, R_spatial=Rk, F=-N,
                      eym=ex.evaluate(sode_eym_expr(f, n), b))


def nhlsode_connection_bracket(a: Sequence[Expr]) -> ExprMatrix:
    """Bracket B with N = -1/2 B, written directly in the coefficients a_k / a0."""
    n = len(a) - 1
    a0 = a[0]
    m = [[ex.ZERO] * n for _ in range(n)]
    for i in range(n - 2):
        ratio = ex.div(a[n - i], a0)  # a_{n-i+1}/a0 for 1-based row i+1
        m[i][i + 1] = ex.ONE
        m[i + 1][i] = ex.const(-1)
        m[i][n - 1] = ratio
        m[n - 1][i] = ex.neg(ratio)
    corner = ex.div(a[2], a0)
    m[n - 2][n - 1] = ex.add(1, corner)
    m[n - 1][n - 2] = ex.sub(-1, corner)
    return tuple(tuple(row) for row in m)


def nhlsode_temporal_torsion_expr(a: Sequence[Expr]) -> ExprMatrix:
    """Only non-zero torsion: R(i, n) = -R(n, i) = (a'_{n-i+1} a0 - a_{n-i+1} a0') / (2 a0^2)."""
    n = len(a) - 1
    a0 = a[0]
    da0 = ex.diff(a0, "t")
    m = [[ex.ZERO] * n for _ in range(n)]
    for i in range(1, n):
        ak = a[n - i + 1]
        num = ex.sub(ex.mul(ex.diff(ak, "t"), a0), ex.mul(ak, da0))
        entry = ex.div(num, ex.mul(2, ex.power(a0, 2)))
        m[i - 1][n - 1] = entry
        m[n - 1][i - 1] = ex.neg(entry)
    return tuple(tuple(row) for row in m)


def nhlsode_eym_expr(a: Sequence[Expr]) -> Expr:
    """1/4 [n - 1 + 2 a2/a0 + sum_{j=2..n} a_j^2 / a0^2]."""
    n = len(a) - 1
    inner = ex.add(ex.const(n - 1), ex.mul(2, ex.div(a[2], a[0])))
    for j in range(2, n + 1):
        inner = ex.add(inner, ex.div(ex.power(a[j], 2), ex.power(a[0], 2)))
    return ex.mul(0.25, inner)


def closed_form_nhlsode(a: Sequence[Expr | str], t: float,
                        params: Mapping[str, float] | None = None) -> ClosedForm:
    """Objects of a0 y^(n) + ... + an y = b; they do not depend on b."""
    a = tuple(ex.as_expr(v) for v in a)
    n = len(a) - 1
    _check_dim(n)
    b = _tb(t, params)
    if ex.evaluate(a[0], b) == 0:
        raise SystemSpecError(f"leading coefficient a0 vanishes at t = {t!r}")
    N = -0.5 * _evaluate_matrix(nhlsode_connection_bracket(a), b)
    return ClosedForm(
        N=N,
        R_temporal=_evaluate_matrix(nhlsode_temporal_torsion_expr(a), b),
        R_spatial=np.zeros((n, n, n)),
        F=-N,
        eym=ex.evaluate(nhlsode_eym_expr(a), b),
    )
