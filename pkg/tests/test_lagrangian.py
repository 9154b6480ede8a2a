import math

import numpy as np
import pytest

from jetgeo.errors import CurveError
from jetgeo.jetcore import JetPoint
from jetgeo.lagrangian import Curve, el_residual, el_residuals, energy_action, integrate, jls_value
from jetgeo.metric import MetricPair
from jetgeo.systems import build_generic, build_linear, build_sode

EUCLID2 = MetricPair.euclidean(2)
OSC = build_generic(["x2", "-omega^2*x1"])
W1 = {"omega": 1.0}
ZERO2 = build_generic(["0", "0"])


def _cos_curve(dt=1e-3, t1=2 * math.pi):
    steps = round(t1 / dt)
    return Curve.sample(lambda t: np.stack([np.cos(t), -np.sin(t)], axis=1), 0.0, t1, steps)


# --- JLS ----------------------------------------------------------------------


def test_jls_on_graph_is_zero():
    assert jls_value(OSC, EUCLID2, JetPoint(0.3, (1.0, 2.0), (2.0, -1.0)), W1) == 0.0


def test_jls_euclidean_sum_of_squares():
    # X = (x2, -x1) at x = (1, 2) is (2, -1); x1 - X = (3, 4)
    assert jls_value(OSC, EUCLID2, JetPoint(0.0, (1.0, 2.0), (5.0, 3.0)), W1) == 25.0


def test_jls_curved_metric():
    m = MetricPair.create("1", [["1", "0"], ["0", "x1^2"]])
    assert jls_value(ZERO2, m, JetPoint(0.0, (2.0, 0.0), (1.0, 1.0))) == 5.0


def test_jls_is_nonnegative():
    rng = np.random.default_rng(1)
    m = MetricPair.create("1 + t^2", [["2 + sin(x2)", "0.5"], ["0.5", "1 + x1^2"]])
    for _ in range(50):
        p = JetPoint(rng.normal(), tuple(rng.normal(size=2)), tuple(rng.normal(size=2)))
        assert jls_value(OSC, m, p, W1) >= 0


# --- curves ------------------------------------------------------------------


def test_curve_invariants():
    with pytest.raises(CurveError, match="at least 5"):
        Curve(np.arange(4.0), np.zeros((4, 2)))
    with pytest.raises(CurveError, match="increasing"):
        Curve(np.array([0, 1, 2, 1, 4.0]), np.zeros((5, 2)))
    with pytest.raises(CurveError, match="uniform"):
        Curve(np.array([0, 1, 2, 3, 4.5]), np.zeros((5, 2)))


def test_curve_csv_round_trip(tmp_path):
    c = _cos_curve(dt=0.1, t1=1.0)
    path = tmp_path / "curve.csv"
    c.to_csv(path)
    assert path.read_text().splitlines()[0] == "t,x1,x2"
    back = Curve.from_csv(path)
    np.testing.assert_array_equal(back.times, c.times)
    np.testing.assert_array_equal(back.states, c.states)


def test_curve_csv_bad_header(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("time,a,b\n0,1,2\n")
    with pytest.raises(CurveError, match="header"):
        Curve.from_csv(path)


# --- energy action -----------------------------------------------------------


def test_energy_action_of_exact_solution():
    assert energy_action(OSC, EUCLID2, _cos_curve(), W1) <= 1e-8


def test_energy_action_zero_field_constant_curve():
    c = Curve.sample(lambda t: np.ones((len(t), 2)), 0, 1, 10)
    assert energy_action(ZERO2, EUCLID2, c) == 0.0


def test_energy_action_grows_quadratically_in_perturbation():
    actions = []
    for eps in (1e-2, 1e-3):
        c = Curve.sample(lambda t: np.stack([np.cos(t) + eps * np.sin(3 * t), -np.sin(t)], axis=1),
                         0.0, 2 * math.pi, 6283)
        actions.append(energy_action(OSC, EUCLID2, c, W1))
    order = math.log10(actions[0] / actions[1])
    assert order == pytest.approx(2.0, abs=0.05)


def test_energy_action_weights_by_time_metric():
    c = Curve.sample(lambda t: np.stack([t, t], axis=1), 0.0, 1.0, 1000)
    # residual (1, 1): JLS = 2 / h, integrand 2 / sqrt(h)
    m = MetricPair.create("exp(2*t)", [["1", "0"], ["0", "1"]])
    expected = 2 * (1 - math.exp(-1))
    assert energy_action(ZERO2, m, c) == pytest.approx(expected, rel=1e-6)


# --- Euler-Lagrange residuals ----------------------------------------------------


def test_el_residual_exact_solution():
    r = el_residual(OSC, EUCLID2, _cos_curve(), 0, W1)
    assert np.max(np.abs(r.values)) <= 1e-5
    assert len(r.times) == len(_cos_curve().times) - 4


def test_el_residual_zero_field_constant_curve():
    c = Curve.sample(lambda t: np.full((len(t), 2), 3.0), 0, 1, 20)
    assert not el_residuals(ZERO2, EUCLID2, c).values.any()


def test_el_residual_negative_control():
    c = Curve.sample(lambda t: np.stack([t ** 2, np.zeros_like(t)], axis=1), 0.0, 2 * math.pi, 6283)
    assert np.max(np.abs(el_residuals(OSC, EUCLID2, c, W1).values)) > 0.1


def test_el_residual_with_stored_velocities_covers_more_samples():
    c = Curve.sample(lambda t: np.stack([np.cos(t), -np.sin(t)], axis=1), 0.0, 1.0, 100,
                     velocity=lambda t: np.stack([-np.sin(t), -np.cos(t)], axis=1))
    r = el_residuals(OSC, EUCLID2, c, W1)
    assert len(r.times) == 99
    assert np.max(np.abs(r.values)) <= 1e-3


def test_el_residual_dimension_mismatch():
    c = Curve.sample(lambda t: np.zeros((len(t), 3)), 0, 1, 10)
    with pytest.raises(CurveError):
        el_residuals(OSC, EUCLID2, c, W1)


CONVERGENCE_CASES = [
    (OSC, {"omega": 2.0}, EUCLID2),
    (build_generic(["x2 - 0.1*x1^2", "-x1 + 0.3*sin(t)*x2"]), {}, EUCLID2),
    (build_generic(["x2 - 0.1*x1^2", "-x1 + 0.3*sin(t)*x2"]), {},
     MetricPair.create("1 + t^2", [["1 + x2^2", "0"], ["0", "2 + x1^2"]])),
    (build_sode(3, "-x1 - 0.5*x2*x3 + cos(t)"), {}, MetricPair.euclidean(3)),
    (build_linear([["0", "1"], ["-1", "-0.2*t"]], ["sin(t)", "0"]), {}, EUCLID2),
]


@pytest.mark.parametrize("system,params,metric", CONVERGENCE_CASES)
def test_el_residual_converges_quadratically(system, params, metric):
    x0 = [1.0] + [0.0] * (system.n - 1)
    errs = []
    for steps in (100, 200, 400):
        c = integrate(system, x0, 0.0, 1.0, steps, params)
        errs.append(np.max(np.abs(el_residuals(system, metric, c, params).values)))
    assert errs[0] / errs[1] >= 3.5 and errs[1] / errs[2] >= 3.5


@pytest.mark.parametrize("system,params,metric", CONVERGENCE_CASES)
def test_energy_action_of_integrated_trajectory(system, params, metric):
    x0 = [1.0] + [0.0] * (system.n - 1)
    c = integrate(system, x0, 0.0, 1.0, 1000, params)
    assert energy_action(system, metric, c, params) <= 1e-8


# --- integrator --------------------------------------------------------------


def test_integrate_oscillator_quarter_period():
    c = integrate(OSC, [1.0, 0.0], 0.0, math.pi / 2, round(math.pi / 2 / 1e-3), W1)
    assert abs(c.states[-1, 0]) <= 1e-6
    assert c.velocities is None


def test_integrate_zero_field_is_constant():
    c = integrate(ZERO2, [2.0, -1.0], 0.0, 1.0, 10)
    assert np.all(c.states == [2.0, -1.0])


def test_integrate_linear_matches_exponential_series():
    A = np.array([[0.1, 1.0, 0.0], [-1.0, -0.2, 0.5], [0.3, 0.0, -0.4]])
    x0 = np.array([1.0, -0.5, 2.0])
    system = build_linear(A.tolist())
    c = integrate(system, x0, 0.0, 1.0, 1000)

    def expm_series(M, terms=40):
        out = np.eye(len(M))
        term = np.eye(len(M))
        for k in range(1, terms):
            term = term @ M / k
            out = out + term
        return out

    np.testing.assert_allclose(c.states[-1], expm_series(A) @ x0, atol=1e-6)


def test_integrate_requires_four_steps():
    with pytest.raises(ValueError):
        integrate(OSC, [1.0, 0.0], 0.0, 1.0, 3, W1)
