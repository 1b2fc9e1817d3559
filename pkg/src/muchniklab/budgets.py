"""Default size/search budgets, overridable via environment variables.

Recognised variables (all integers):

    MUCHNIKLAB_MAX_POINTS       poset size cap (default 128)
    MUCHNIKLAB_MAX_ELEMENTS     lattice size / downset-count cap (default 2**20)
    MUCHNIKLAB_MAX_TABLE        largest lattice for which dense operation
                                tables are materialised (default 4096)
    MUCHNIKLAB_MAX_VALUATIONS   exhaustive validity budget (default 10**8)
    MUCHNIKLAB_MAX_POSETS       countermodel fallback: posets tried (default 100000)
    MUCHNIKLAB_THREADS          worker threads for validity search
"""

from __future__ import annotations

import os
from dataclasses import dataclass


def _env_int(name: str, default: int) -> int:
    raw = os.environ.get(name)
    if raw is None:
        return default
    try:
        return int(raw)
    except ValueError:
        raise ValueError(f"{name} must be an integer, got {raw!r}") from None


MAX_POINTS = _env_int("MUCHNIKLAB_MAX_POINTS", 128)
MAX_ELEMENTS = _env_int("MUCHNIKLAB_MAX_ELEMENTS", 1 << 20)
MAX_TABLE = _env_int("MUCHNIKLAB_MAX_TABLE", 4096)
MAX_VALUATIONS = _env_int("MUCHNIKLAB_MAX_VALUATIONS", 10**8)
MAX_POSETS = _env_int("MUCHNIKLAB_MAX_POSETS", 100_000)


def default_threads() -> int:
    value = os.environ.get("MUCHNIKLAB_THREADS")
    if value is not None:
        return max(1, int(value))
    return max(1, os.cpu_count() or 1)


@dataclass(frozen=True)
class SearchBudget:
    """Bounds for countermodel search over the algebra family."""

    tower_max_level: int = 4
    max_poset_points: int = 5
    max_posets: int = MAX_POSETS
    max_valuations: int = MAX_VALUATIONS
    max_elements: int = MAX_ELEMENTS


DEFAULT_SEARCH_BUDGET = SearchBudget()
