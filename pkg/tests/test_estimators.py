import math

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError
from sklearn.pipeline import make_pipeline

from hemidefense.estimators import BreachingPointSolver, GameSimulator
from hemidefense.exceptions import GeometryError

NOMINAL_ROW = [0.9, 0.3 * math.pi, 2.0, 1.0, 1.0]


def test_solver_transform_and_predict():
    X = np.array([NOMINAL_ROW, [0.0, 0.3 * math.pi, 2.0, 1.0, 1.0]])
    est = BreachingPointSolver().fit(X)
    out = est.transform(X)
    assert out.shape == (2, 5)
    assert out[0, 0] == pytest.approx(1.2123183651216, abs=1e-12)
    assert out[1, 1] == pytest.approx(math.pi / 2, abs=1e-12)
    np.testing.assert_allclose(out[:, 4], out[:, 2] - out[:, 3])
    np.testing.assert_array_equal(est.predict(X), out[:, 0])
    assert list(est.get_feature_names_out()) == ["theta_rel", "beta_star", "tau_D", "tau_A", "p"]


def test_solver_four_columns_use_nu_param():
    est = BreachingPointSolver(nu=0.6).fit([NOMINAL_ROW[:4]])
    ref = BreachingPointSolver().fit([NOMINAL_ROW[:4] + [0.6]])
    np.testing.assert_array_equal(est.transform([NOMINAL_ROW[:4]]), ref.transform([NOMINAL_ROW[:4] + [0.6]]))


def test_solver_params_and_clone():
    est = BreachingPointSolver(damping=0.3, n_scan=256)
    assert est.get_params()["damping"] == 0.3
    c = clone(est).set_params(tol=1e-13)
    assert c.tol == 1e-13 and c.n_scan == 256


def test_solver_validation():
    with pytest.raises(NotFittedError):
        BreachingPointSolver().transform([NOMINAL_ROW])
    est = BreachingPointSolver().fit([NOMINAL_ROW])
    with pytest.raises(GeometryError):
        est.transform([[0.9, 0.3, 0.5, 1.0, 1.0]])
    with pytest.raises(ValueError):
        est.transform([[0.9, 0.3, 2.0]])
    with pytest.raises(ValueError):
        est.transform([[0.9, 0.3, 2.0, 1.0, np.nan]])


def test_solver_in_pipeline():
    pipe = make_pipeline(BreachingPointSolver())
    assert pipe.fit_transform([NOMINAL_ROW]).shape == (1, 5)


def test_simulator():
    sim = GameSimulator().fit()
    X = [[0.9, 0.3 * math.pi, 20.0]]
    assert list(sim.predict(X)) == ["intruder"]
    t_f, l_d, l_s = sim.transform(X)[0]
    assert l_d / 10.0 == pytest.approx(0.2108328404427786, rel=1e-12)
    assert math.isnan(l_s) and t_f > 0


def test_simulator_defender_setup():
    sim = GameSimulator(dl=1.36, dl_prime=0.36, mode="until_defender_arrives").fit()
    out = sim.transform([[0.9, 0.3 * math.pi, 20.0]])
    assert math.isnan(out[0, 1]) and out[0, 2] > 0


def test_simulator_validation():
    with pytest.raises(NotFittedError):
        GameSimulator().predict([[0.9, 1.0, 20.0]])
    with pytest.raises(ValueError):
        GameSimulator().fit([[0.9, 1.0]])
