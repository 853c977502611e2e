"""scikit-learn style wrappers around the solver and the game engine.

Both are stateless in the learning sense: ``fit`` only validates input and
records its width, so they compose with pipelines and ``get_params`` /
``set_params`` tooling.
"""

from __future__ import annotations

import math

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import START_COLUMNS, STATE_COLUMNS, check_starts, check_states
from .breaching import defender_target_time, intruder_target_time, solve_breaching
from .dynamics import dynamics_from_dict
from .engine import GameConfig, run_game
from .geometry import IntruderPose, RelativeState
from .strategies import StrategyKind


class BreachingPointSolver(TransformerMixin, BaseEstimator):
    """Row-wise optimal breaching point.

    ``transform`` maps ``[psi, phi, r, R, nu]`` rows to
    ``[theta_rel, beta_star, tau_D, tau_A, p]``; ``predict`` returns ``theta_rel``.
    """

    def __init__(self, nu: float = 1.0, damping: float = 0.5, tol: float = 1e-12, max_iter: int = 200,
                 n_scan: int = 1024):
        self.nu = nu
        self.damping = damping
        self.tol = tol
        self.max_iter = max_iter
        self.n_scan = n_scan

    def fit(self, X, y=None):
        X = check_states(X, self.nu)
        self.n_features_in_ = X.shape[1]
        self.feature_names_in_ = np.array(STATE_COLUMNS, dtype=object)
        return self

    def _solve_row(self, row):
        psi, phi, r, R, nu = (float(v) for v in row)
        z = RelativeState(psi, phi, r, R, nu)
        sol = solve_breaching(z, damping=self.damping, tol=self.tol, max_iter=self.max_iter, n_scan=self.n_scan)
        tau_D = defender_target_time(z, sol.theta_rel)
        tau_A = intruder_target_time(IntruderPose(psi, r), sol.theta_abs, R, nu)
        return sol.theta_rel, sol.beta_star, tau_D, tau_A, tau_D - tau_A

    def transform(self, X):
        check_is_fitted(self, "n_features_in_")
        X = check_states(X, self.nu)
        return np.array([self._solve_row(row) for row in X], dtype=float).reshape(-1, 5)

    def predict(self, X):
        return self.transform(X)[:, 0]

    def get_feature_names_out(self, input_features=None):
        return np.array(["theta_rel", "beta_star", "tau_D", "tau_A", "p"], dtype=object)


class GameSimulator(BaseEstimator):
    """Plays one game per ``[psi0, phi0, r0]`` row.

    ``predict`` gives the winner label; ``transform`` gives ``[t_f, l_d, l_s]``
    with NaN for the metric that does not apply.
    """

    def __init__(self, R: float = 10.0, nu: float = 1.0, dl: float = 0.72, dl_prime: float = 0.72, dt: float = 0.07,
                 defender_strategy: str = "optimal_defender", mode: str = "until_intruder_arrives",
                 dynamics: str | dict = "ideal", max_ticks: int | None = None):
        self.R = R
        self.nu = nu
        self.dl = dl
        self.dl_prime = dl_prime
        self.dt = dt
        self.defender_strategy = defender_strategy
        self.mode = mode
        self.dynamics = dynamics
        self.max_ticks = max_ticks

    def _config(self) -> GameConfig:
        dyn = self.dynamics if isinstance(self.dynamics, dict) else {"kind": self.dynamics}
        model = dynamics_from_dict(dyn)
        return GameConfig(R=self.R, nu=self.nu, dl=self.dl, dl_prime=self.dl_prime, dt=self.dt,
                          defender_strategy=StrategyKind(self.defender_strategy), mode=self.mode,
                          dynamics_defender=model, dynamics_intruder=model, max_ticks=self.max_ticks)

    def fit(self, X=None, y=None):
        self.config_ = self._config()
        self.n_features_in_ = len(START_COLUMNS)
        if X is not None:
            check_starts(X)
        return self

    def _play(self, X):
        check_is_fitted(self, "config_")
        X = check_starts(X)
        return [run_game(self.config_.replace(psi0=float(p), phi0=float(f), r0=float(r)), record_trajectory=False)
                for p, f, r in X]

    def predict(self, X):
        return np.array([res.winner for res in self._play(X)], dtype=object)

    def transform(self, X):
        nan = math.nan
        rows = [(res.t_f, nan if res.l_d is None else res.l_d, nan if res.l_s is None else res.l_s)
                for res in self._play(X)]
        return np.array(rows, dtype=float).reshape(-1, 3)
