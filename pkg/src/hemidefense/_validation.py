"""Input checks shared by the estimator wrappers."""

from __future__ import annotations

import math

import numpy as np
from sklearn.utils.validation import check_array

from .exceptions import GeometryError

STATE_COLUMNS = ("psi", "phi", "r", "R", "nu")
START_COLUMNS = ("psi0", "phi0", "r0")


def check_states(X, nu: float = 1.0) -> np.ndarray:
    """Return an ``(n, 5)`` float array of ``[psi, phi, r, R, nu]`` rows.

    Four-column input gets ``nu`` appended. Rows are checked against the game
    domain, so a bad row fails here rather than deep inside the solver.
    """
    X = check_array(X, dtype=np.float64, ensure_2d=True)
    if X.shape[1] == 4:
        X = np.column_stack([X, np.full(X.shape[0], nu)])
    elif X.shape[1] != 5:
        raise ValueError(f"expected 4 or 5 columns {STATE_COLUMNS}, got {X.shape[1]}")
    psi, phi, r, R, nus = X.T
    if np.any(R <= 0):
        raise GeometryError("R must be positive")
    if np.any((phi < 0) | (phi > math.pi / 2 + 1e-12)):
        raise GeometryError("phi must lie in [0, pi/2]")
    if np.any(r < R):
        raise GeometryError("intruder range r must be at least R")
    if np.any((nus <= 0) | (nus > 1)):
        raise ValueError("nu must lie in (0, 1]")
    return X


def check_starts(X) -> np.ndarray:
    X = check_array(X, dtype=np.float64, ensure_2d=True)
    if X.shape[1] != 3:
        raise ValueError(f"expected 3 columns {START_COLUMNS}, got {X.shape[1]}")
    return X
