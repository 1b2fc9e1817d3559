"""The Jaskowski sequence of Heyting algebras and its order duals.

Level 1 is the two-element Boolean algebra; level n+1 stacks a fresh top
onto the n-fold product of level n.  Sizes grow as 2, 3, 10, 1001, ...
(|next| = |current|**n + 1); level 5 would have ~10**12 elements and is
rejected at default budgets.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

from . import budgets
from .errors import SizeBudgetExceeded
from .lattices import DistLattice, chain, dual, power, stack_sum


@dataclass(frozen=True)
class TowerLevel:
    n: int
    algebra: DistLattice       # Heyting reading
    dual_algebra: DistLattice  # Brouwer reading


def tower_size(n: int) -> int:
    """Element count of level n, by the recurrence."""
    if n < 1:
        raise ValueError("tower levels start at 1")
    size = 2
    for k in range(1, n):
        size = size**k + 1
    return size


@functools.lru_cache(maxsize=None)
def jaskowski_algebra(n: int, max_elements: int | None = None) -> TowerLevel:
    """Build level ``n``; deterministic element order, new top at the last index."""
    cap = max_elements if max_elements is not None else budgets.MAX_ELEMENTS
    if n < 1:
        raise ValueError("tower levels start at 1")
    if tower_size(n) > cap:
        raise SizeBudgetExceeded(
            f"tower level {n} has {tower_size(n)} elements (cap {cap})"
        )
    if n == 1:
        alg = chain(2)
    else:
        prev = jaskowski_algebra(n - 1, max_elements).algebra
        alg = stack_sum(power(prev, n - 1, cap), chain(2))
    return TowerLevel(n, alg, dual(alg))


def describe_element(n: int, idx: int) -> str:
    """Readable structural name for an element of level ``n``.

    Level 2 elements are named 0, m, 1; higher levels print product tuples
    with 1 for the stacked top.
    """
    size = tower_size(n)
    if not 0 <= idx < size:
        raise ValueError(f"index {idx} out of range for level {n}")
    if n == 1:
        return "01"[idx]
    if n == 2:
        return ("0", "m", "1")[idx]
    if idx == size - 1:
        return "1"
    prev_size = tower_size(n - 1)
    parts = []
    for _ in range(n - 1):
        parts.append(describe_element(n - 1, idx % prev_size))
        idx //= prev_size
    return "(" + ",".join(parts) + ")"
