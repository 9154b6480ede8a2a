import numpy as np
import pytest

from jetgeo import expr as ex
from jetgeo import jetcore
from jetgeo.errors import SystemSpecError
from jetgeo.jetcore import JetPoint
from jetgeo.metric import MetricPair
from jetgeo.systems import (
    build_generic,
    build_linear,
    build_nhlsode,
    build_sode,
    closed_form_linear,
    closed_form_nhlsode,
    closed_form_sode,
    nhlsode_temporal_torsion_expr,
    sode_connection_bracket,
)

from _support import random_polynomial

W2 = {"omega": 2.0}


def _fields(r):
    return [r.M, r.N, r.cartan.gamma, r.R_temporal, r.R_spatial, r.curvature, r.F,
            r.maxwell_residual_1, r.maxwell_residual_2, np.array([r.eym])]


# --- builders ----------------------------------------------------------------


def test_generic_oscillator_is_valid():
    s = build_generic(["x2", "-omega^2*x1"], n=2)
    assert s.kind == "generic" and s.n == 2


@pytest.mark.parametrize("X,match", [
    (["x2", "x1_1"], "fiber"),
    (["x2"], "at least 2"),
    (["x3", "x1"], "x3"),
])
def test_generic_rejects(X, match):
    with pytest.raises(SystemSpecError, match=match):
        build_generic(X)


def test_linear_materialization():
    s = build_linear([["t", "0"], ["1", "sin(t)"]], ["exp(t)", "0"])
    assert s.X[0] == ex.parse("t*x1 + exp(t)")
    assert s.X[1] == ex.parse("x1 + sin(t)*x2")
    with pytest.raises(SystemSpecError, match="may not depend on x1"):
        build_linear([["x1", "0"], ["0", "1"]])


def test_sode_materialization():
    s = build_sode(3, 0)
    assert s.X == (ex.var("x2"), ex.var("x3"), ex.ZERO)


def test_nhlsode_reduces_to_oscillator():
    s = build_nhlsode(["1", "0", "omega^2"], "0")
    assert s.kind == "nhlsode"
    assert s.rhs == ex.parse("-omega^2*x1")


def test_three_oscillator_builders_agree_on_X():
    lin = build_linear([["0", "1"], ["-omega^2", "0"]], ["0", "0"])
    sode = build_sode(2, "-omega^2*x1")
    nh = build_nhlsode(["1", "0", "omega^2"])
    assert lin.X == sode.X == nh.X


def test_nhlsode_rejects_x_in_coefficients_and_zero_a0():
    with pytest.raises(SystemSpecError):
        build_nhlsode(["1", "x1", "2"])
    with pytest.raises(SystemSpecError):
        build_nhlsode(["0", "1", "2"])
    s = build_nhlsode(["t", "1", "2"])
    with pytest.raises(SystemSpecError, match="vanishes"):
        jetcore.full_report(s, MetricPair.euclidean(2), JetPoint(0.0, (1, 1)))


# --- closed forms ------------------------------------------------------------


def test_linear_closed_form_symmetric_is_zero():
    cf = closed_form_linear([["t", "cos(t)"], ["cos(t)", "1"]], 0.3)
    for a in (cf.N, cf.R_temporal, cf.F):
        assert not a.any()
    assert cf.eym == 0


def test_linear_closed_form_constant_has_no_temporal_torsion():
    assert not closed_form_linear([["1", "2"], ["3", "4"]], 1.0).R_temporal.any()


def test_linear_closed_form_oscillator():
    cf = closed_form_linear([[0, 1], [-4, 0]], 0.0)
    assert cf.eym == 6.25


def test_sode_closed_form_oscillator():
    cf = closed_form_sode("-omega^2*x1", 2, 0.0, [1.0, 0.0], W2)
    assert cf.eym == pytest.approx(6.25, abs=1e-15)


def test_sode_constant_f_has_no_torsion():
    cf = closed_form_sode("3.5", 4, 0.2, [1, 2, 3, 4])
    assert not cf.R_temporal.any() and not cf.R_spatial.any()


def test_sode_bracket_golden_n4():
    f = ex.parse("a*x1^2 + b*x2*x3 + c*t*x4 + sin(x3)")
    B = sode_connection_bracket(f, 4)
    fx = [ex.diff(f, f"x{j}") for j in range(1, 5)]
    z, one, m1 = ex.ZERO, ex.ONE, ex.const(-1)
    expected = (
        (z, one, z, ex.neg(fx[0])),
        (m1, z, one, ex.neg(fx[1])),
        (z, m1, z, ex.sub(1, fx[2])),
        (fx[0], fx[1], ex.add(-1, fx[2]), z),
    )
    assert B == expected
    assert str(B[3][2]) == "-1+(b*x2+cos(x3))"
    N = tuple(tuple(ex.mul(-0.5, e) for e in row) for row in B)
    b = {"a": 0.3, "b": -1.1, "c": 2.0, "t": 0.4, "x1": 0.5, "x2": -0.2, "x3": 0.9, "x4": 1.3}
    Nv = np.array([[ex.evaluate(e, b) for e in row] for row in N])
    np.testing.assert_array_equal(Nv, -Nv.T)


def test_sode_closed_form_matches_pipeline():
    rng = np.random.default_rng(21)
    for n in (2, 3, 4):
        names = ["t"] + [f"x{i}" for i in range(1, n + 1)]
        f = random_polynomial(rng, names, 3, 5)
        s = build_sode(n, f)
        p = JetPoint(rng.uniform(-1, 1), tuple(rng.uniform(-1, 1, n)))
        cf = closed_form_sode(f, n, p.t, p.x)
        r = jetcore.full_report(s, MetricPair.euclidean(n), p)
        for a, b in ((cf.N, r.N), (cf.R_temporal, r.R_temporal), (cf.R_spatial, r.R_spatial), (cf.F, r.F)):
            np.testing.assert_allclose(a, b, atol=1e-12)
        assert cf.eym == pytest.approx(r.eym, abs=1e-12)


def test_nhlsode_closed_form_oscillator():
    cf = closed_form_nhlsode(["1", "0", "omega^2"], 0.0, W2)
    assert cf.eym == 6.25
    np.testing.assert_array_equal(cf.N, [[0, -2.5], [2.5, 0]])


def test_nhlsode_constant_coefficients_have_no_torsion():
    cf = closed_form_nhlsode(["2", "1", "3", "-1"], 0.7)
    assert not cf.R_temporal.any()


def test_nhlsode_quotient_rule_hand_oracle():
    # a0 = t^2+1, a2 = t at t = 1: (1*2 - 1*2) / (2*4) = 0
    R = nhlsode_temporal_torsion_expr([ex.parse("t^2+1"), ex.ZERO, ex.parse("t")])
    assert ex.evaluate(R[0][1], {"t": 1.0}) == 0.0
    assert ex.evaluate(R[0][1], {"t": 2.0}) == pytest.approx((1 * 5 - 2 * 4) / (2 * 25))


def test_nhlsode_closed_form_matches_pipeline():
    a = ["t^2 + 1", "sin(t)", "t", "exp(-t)", "2 - t"]
    s = build_nhlsode(a, "cos(t)")
    p = JetPoint(0.6, (0.1, -0.4, 0.8, 1.2))
    cf = closed_form_nhlsode(a, p.t)
    r = jetcore.full_report(s, MetricPair.euclidean(4), p)
    np.testing.assert_allclose(cf.N, r.N, atol=1e-12)
    np.testing.assert_allclose(cf.R_temporal, r.R_temporal, atol=1e-10)
    assert np.max(np.abs(r.R_spatial)) <= 1e-12
    assert cf.eym == pytest.approx(r.eym, abs=1e-12)


def test_oracle_triangle():
    routes = [
        jetcore.full_report(build_generic(["x2", "-omega^2*x1"]), MetricPair.euclidean(2),
                            JetPoint(0.0, (1.0, 0.0)), W2),
        closed_form_linear([["0", "1"], ["-omega^2", "0"]], 0.0, W2),
        closed_form_nhlsode(["1", "0", "omega^2"], 0.0, W2),
    ]
    for other in routes[1:]:
        np.testing.assert_allclose(routes[0].N, other.N, atol=1e-12)
        np.testing.assert_allclose(routes[0].F, other.F, atol=1e-12)
        assert routes[0].eym == pytest.approx(other.eym, abs=1e-12)


# --- independence of the inhomogeneity -----------------------------------------


def test_b_independence():
    a = ["1 + t^2", "t", "3"]
    s1, s2 = build_nhlsode(a, "0"), build_nhlsode(a, "exp(t) - sin(3*t)")
    for i in range(2):
        for v in ("x1", "x2"):
            assert ex.diff(s1.X[i], v) == ex.diff(s2.X[i], v)
    p = JetPoint(0.4, (0.3, -0.7), (1, 2))
    r1 = jetcore.full_report(s1, MetricPair.euclidean(2), p)
    r2 = jetcore.full_report(s2, MetricPair.euclidean(2), p)
    for u, w in zip(_fields(r1), _fields(r2)):
        np.testing.assert_array_equal(u, w)


def test_f_independence():
    A = [["t", "1", "0"], ["-1", "0", "sin(t)"], ["2", "t^2", "1"]]
    s1, s2 = build_linear(A), build_linear(A, ["exp(t)", "t^3", "cos(t)"])
    p = JetPoint(0.9, (1, 2, 3))
    r1 = jetcore.full_report(s1, MetricPair.euclidean(3), p)
    r2 = jetcore.full_report(s2, MetricPair.euclidean(3), p)
    for u, w in zip(_fields(r1), _fields(r2)):
        np.testing.assert_array_equal(u, w)
