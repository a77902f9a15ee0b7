"""
Local Search Module
Provides a unified interface for the local maximisers used by the oracle
(Nelder-Mead simplex, cyclic coordinate ascent)
"""

from .interface import LocalResult, LocalSearch, get_local_search
from .nelder_mead import NelderMeadSearch
from .coordinate import CoordinateSearch

__all__ = [
    "LocalResult",
    "LocalSearch",
    "get_local_search",
    "NelderMeadSearch",
    "CoordinateSearch",
]
