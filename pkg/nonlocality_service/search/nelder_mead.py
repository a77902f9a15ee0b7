"""
Nelder-Mead Local Search
Derivative-free simplex ascent via scipy.optimize.minimize
"""

import numpy as np
from scipy.optimize import minimize

from .interface import LocalResult, LocalSearch, Objective


class NelderMeadSearch(LocalSearch):
    """Adaptive Nelder-Mead on the negated objective"""

    name = "nelder-mead"

    def run(
        self,
        objective: Objective,
        x0: np.ndarray,
        max_iterations: int,
        step_tolerance: float,
        value_tolerance: float,
    ) -> LocalResult:
        result = minimize(
            lambda x: -objective(x),
            np.asarray(x0, dtype=float),
            method="Nelder-Mead",
            options={
                "maxiter": max_iterations,
                "maxfev": 4 * max_iterations,
                "xatol": step_tolerance,
                "fatol": value_tolerance,
                "adaptive": True,
            },
        )
        return LocalResult(
            x=np.asarray(result.x, dtype=float),
            value=float(-result.fun),
            iterations=int(result.nit),
            evaluations=int(result.nfev),
            converged=bool(result.success),
        )
