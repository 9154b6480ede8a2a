"""Shared generators and oracles for the test suite."""

from __future__ import annotations

import itertools

import numpy as np

from jetgeo import expr as ex
from jetgeo.jetcore import JetPoint
from jetgeo.metric import MetricPair
from jetgeo.systems import build_generic

CURVED_METRIC_2 = MetricPair.create(
    "exp(0.5*t) + t^2",
    [["1 + x2^2", "0.25*x1*x2"], ["0.25*x1*x2", "2 + sin(x1)"]],
)


def curved_metric(n: int) -> MetricPair:
    """A non-diagonal, position dependent, positive definite metric for points in [-1, 1]^n."""
    phi = [["0"] * n for _ in range(n)]
    for i in range(n):
        nxt = f"x{(i + 1) % n + 1}"
        phi[i][i] = f"{n} + {nxt}^2"
    for i in range(n - 1):
        phi[i][i + 1] = phi[i + 1][i] = f"0.3*sin(x{i + 1})"
    return MetricPair.create("exp(0.5*t) + t^2", phi)


def monomials(names: list[str], degree: int) -> list[tuple[int, ...]]:
    return [e for e in itertools.product(range(degree + 1), repeat=len(names)) if sum(e) <= degree]


def random_polynomial(rng: np.random.Generator, names: list[str], degree: int = 3, terms: int = 4) -> ex.Expr:
    pool = monomials(names, degree)
    total = ex.ZERO
    for idx in rng.choice(len(pool), size=terms, replace=False):
        c = float(np.round(rng.uniform(-2, 2), 3))
        term = ex.const(c)
        for name, power in zip(names, pool[idx]):
            if power:
                term = ex.mul(term, ex.power(ex.symbol(name), power))
        total = ex.add(total, term)
    return total


def random_system(rng: np.random.Generator, n: int, degree: int = 3):
    names = ["t"] + [f"x{i}" for i in range(1, n + 1)]
    return build_generic([random_polynomial(rng, names, degree) for _ in range(n)])


def random_systems(seed: int = 7, count: int = 50):
    """``count`` random polynomial systems with n cycling over 2, 3, 4."""
    rng = np.random.default_rng(seed)
    return [random_system(rng, (2, 3, 4)[k % 3]) for k in range(count)]


def random_point(rng: np.random.Generator, n: int, with_x1: bool = True) -> JetPoint:
    x1 = tuple(rng.uniform(-1, 1, n)) if with_x1 else ()
    return JetPoint(float(rng.uniform(-1, 1)), tuple(rng.uniform(-1, 1, n)), x1)


def central_difference(fn, x: np.ndarray, k: int, h: float = 1e-5):
    xp = np.array(x, dtype=float)
    xm = np.array(x, dtype=float)
    xp[k] += h
    xm[k] -= h
    return (fn(xp) - fn(xm)) / (2 * h)


def rel_err(a, b) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return float(np.max(np.abs(a - b) / np.maximum(1.0, np.abs(b))))
