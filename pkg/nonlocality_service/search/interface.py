"""
Abstract Local Search Interface
Defines the interface for all local maximisers (Nelder-Mead, coordinate ascent)
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
import structlog

from ..config import settings
from ..errors import InvalidConfig

logger = structlog.get_logger()

Objective = Callable[[np.ndarray], float]


@dataclass(frozen=True)
class LocalResult:
    """Best point found by one local run"""

    x: np.ndarray
    value: float
    iterations: int
    evaluations: int
    converged: bool


class LocalSearch(ABC):
    """
    Abstract base class for local maximisers
    All searches must implement run()
    """

    name: str = "abstract"

    @abstractmethod
    def run(
        self,
        objective: Objective,
        x0: np.ndarray,
        max_iterations: int,
        step_tolerance: float,
        value_tolerance: float,
    ) -> LocalResult:
        """
        Maximise objective starting from x0

        Args:
            objective: Smooth scalar function of a 1-D array
            x0: Starting point
            max_iterations: Iteration budget for this run
            step_tolerance: Absolute tolerance on the point
            value_tolerance: Absolute tolerance on the objective

        Returns:
            LocalResult with converged = False when the budget ran out
        """
        pass


SUPPORTED_METHODS = ("nelder-mead", "coordinate")


def get_local_search(method: Optional[str] = None) -> LocalSearch:
    """
    Factory function to get the configured local search

    Returns:
        LocalSearch instance based on settings.ORACLE_METHOD

    Raises:
        InvalidConfig: If the method is not supported
    """
    method = (method or settings.ORACLE_METHOD).lower()

    logger.debug("local_search_factory", method=method, available_methods=list(SUPPORTED_METHODS))

    if method == "nelder-mead":
        from .nelder_mead import NelderMeadSearch
        return NelderMeadSearch()
    elif method == "coordinate":
        from .coordinate import CoordinateSearch
        return CoordinateSearch()
    else:
        raise InvalidConfig(
            f"Unsupported local search: {method}. "
            f"Supported methods: {', '.join(SUPPORTED_METHODS)}"
        )
