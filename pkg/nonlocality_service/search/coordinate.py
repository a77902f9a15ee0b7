"""
Coordinate Ascent Local Search
Cyclic one-dimensional bounded Brent searches over periodic coordinates
"""

import numpy as np
from scipy.optimize import minimize_scalar

from .interface import LocalResult, LocalSearch, Objective


class CoordinateSearch(LocalSearch):
    """
    Cycle through coordinates, maximising each over one full period

    One iteration is a full sweep over all coordinates.
    """

    name = "coordinate"

    def __init__(self, period: float = 2 * np.pi):
        self.period = period

    def run(
        self,
        objective: Objective,
        x0: np.ndarray,
        max_iterations: int,
        step_tolerance: float,
        value_tolerance: float,
    ) -> LocalResult:
        x = np.array(x0, dtype=float)
        value = float(objective(x))
        evaluations = 1
        half = self.period / 2

        for sweep in range(1, max_iterations + 1):
            start_value = value
            for k in range(len(x)):

                def along(t: float, k: int = k) -> float:
                    trial = x.copy()
                    trial[k] = t
                    return -objective(trial)

                line = minimize_scalar(
                    along,
                    bounds=(x[k] - half, x[k] + half),
                    method="bounded",
                    options={"xatol": step_tolerance},
                )
                evaluations += int(line.nfev)
                if -line.fun > value:
                    x[k] = line.x
                    value = float(-line.fun)

            if value - start_value <= value_tolerance:
                return LocalResult(x, value, sweep, evaluations, converged=True)

        return LocalResult(x, value, max_iterations, evaluations, converged=False)
