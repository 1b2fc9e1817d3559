"""Finite posets over bitmask subsets.

Points are opaque string labels; the order is kept as reflexive-transitive
bitmask rows (``up[i]`` has bit ``j`` set iff ``i <= j``).  Subsets of a
poset are plain Python ints used as bitmasks.
"""

from __future__ import annotations

import functools
import json
from typing import Iterable, Iterator, Optional, Sequence

from . import budgets
from .errors import CycleError, SizeBudgetExceeded, UnknownLabel


def bits(mask: int) -> Iterator[int]:
    """Iterate the set bit positions of a mask, ascending."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def mask_of(indices: Iterable[int]) -> int:
    out = 0
    for i in indices:
        out |= 1 << i
    return out


class Poset:
    """Immutable finite partial order.

    ``up[i]``/``down[i]`` are the reflexive upper/lower cone masks of point
    ``i``; both are derived from the same closed relation.
    """

    __slots__ = ("points", "up", "down", "_index", "_covers_up")

    def __init__(self, points: Sequence[str], up: Sequence[int]):
        self.points = tuple(points)
        self.up = tuple(up)
        n = len(self.points)
        down = [0] * n
        for i in range(n):
            u = self.up[i]
            for j in bits(u):
                down[j] |= 1 << i
        self.down = tuple(down)
        self._index = {p: i for i, p in enumerate(self.points)}
        self._covers_up = None

    # -- basic queries ---------------------------------------------------

    @property
    def n(self) -> int:
        return len(self.points)

    def index(self, label: str) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise UnknownLabel(f"unknown point {label!r}") from None

    def leq(self, i: int, j: int) -> bool:
        return bool(self.up[i] >> j & 1)

    def full_mask(self) -> int:
        return (1 << self.n) - 1

    def check_mask(self, mask: int) -> int:
        if mask < 0 or mask >> self.n:
            raise UnknownLabel(f"mask {mask:#x} has bits outside 0..{self.n - 1}")
        return mask

    def mask_from_labels(self, labels: Iterable[str]) -> int:
        return mask_of(self.index(l) for l in labels)

    def labels_from_mask(self, mask: int) -> list[str]:
        return [self.points[i] for i in bits(self.check_mask(mask))]

    # -- closures and extrema --------------------------------------------

    def up_closure(self, mask: int) -> int:
        """Smallest up-closed superset of ``mask``."""
        out = 0
        for i in bits(self.check_mask(mask)):
            out |= self.up[i]
        return out

    def down_closure(self, mask: int) -> int:
        out = 0
        for i in bits(self.check_mask(mask)):
            out |= self.down[i]
        return out

    def is_up_closed(self, mask: int) -> bool:
        return self.up_closure(mask) == mask

    def is_down_closed(self, mask: int) -> bool:
        return self.down_closure(mask) == mask

    def maximal_elements(self, mask: int) -> int:
        """Members of ``mask`` with no strictly larger member in ``mask``."""
        self.check_mask(mask)
        out = 0
        for i in bits(mask):
            if self.up[i] & mask & ~(1 << i):
                continue
            out |= 1 << i
        return out

    def minimal_elements(self, mask: int) -> int:
        self.check_mask(mask)
        out = 0
        for i in bits(mask):
            if self.down[i] & mask & ~(1 << i):
                continue
            out |= 1 << i
        return out

    def least_element(self) -> Optional[int]:
        m = self.minimal_elements(self.full_mask())
        if m and m == (m & -m):
            return m.bit_length() - 1
        return None

    def greatest_element(self) -> Optional[int]:
        m = self.maximal_elements(self.full_mask())
        if m and m == (m & -m):
            return m.bit_length() - 1
        return None

    # -- covers ------------------------------------------------------------

    def covers_up(self) -> tuple[int, ...]:
        """``covers_up()[i]`` is the mask of upper covers of ``i``."""
        if self._covers_up is None:
            rows = []
            for i in range(self.n):
                strict = self.up[i] & ~(1 << i)
                cov = 0
                for j in bits(strict):
                    between = strict & self.down[j] & ~(1 << j)
                    if not between:
                        cov |= 1 << j
                rows.append(cov)
            self._covers_up = tuple(rows)
        return self._covers_up

    def cover_pairs(self) -> list[tuple[int, int]]:
        out = []
        for i, row in enumerate(self.covers_up()):
            out.extend((i, j) for j in bits(row))
        return out

    # -- derived posets ----------------------------------------------------

    def op(self) -> "Poset":
        """Order-reversed poset on the same points."""
        return Poset(self.points, self.down)

    def subposet(self, mask: int) -> tuple["Poset", list[int]]:
        """Induced subposet on the points of ``mask``; returns (poset, point indices)."""
        idx = list(bits(self.check_mask(mask)))
        pos = {p: k for k, p in enumerate(idx)}
        rows = []
        for i in idx:
            row = 0
            for j in bits(self.up[i] & mask):
                row |= 1 << pos[j]
            rows.append(row)
        return Poset([self.points[i] for i in idx], rows), idx

    def relabel(self, labels: Sequence[str]) -> "Poset":
        if len(labels) != self.n:
            raise UnknownLabel("label count mismatch")
        return Poset(labels, self.up)

    # -- downsets ----------------------------------------------------------

    def downsets(self, cap: Optional[int] = None) -> list[int]:
        """All down-closed subsets, sorted by (size, mask value).

        Raises SizeBudgetExceeded when more than ``cap`` downsets exist.
        """
        if cap is None:
            cap = budgets.MAX_ELEMENTS
        order = self.linear_extension()
        found = [0]
        # scan points in a linear extension; a downset either omits the point
        # or contains it together with its lower cone
        for i in order:
            need = self.down[i]
            extra = [m | need for m in found if m & need == need & ~(1 << i)]
            found.extend(extra)
            if len(found) > cap:
                raise SizeBudgetExceeded(
                    f"more than {cap} downsets (raise MUCHNIKLAB_MAX_ELEMENTS)"
                )
        found.sort(key=lambda m: (bin(m).count("1"), m))
        return found

    def linear_extension(self) -> list[int]:
        order = sorted(range(self.n), key=lambda i: (bin(self.down[i]).count("1"), i))
        return order

    def height_levels(self) -> list[int]:
        """Longest-chain depth of each point, bottom-up."""
        levels = [0] * self.n
        for i in self.linear_extension():
            below = self.down[i] & ~(1 << i)
            levels[i] = 1 + max((levels[j] for j in bits(below)), default=-1)
        return levels

    # -- isomorphism --------------------------------------------------------

    def invariant(self) -> tuple:
        levels = self.height_levels()
        cov = self.covers_up()
        profile = sorted(
            (
                bin(self.down[i]).count("1"),
                bin(self.up[i]).count("1"),
                bin(cov[i]).count("1"),
                levels[i],
            )
            for i in range(self.n)
        )
        return (self.n, tuple(profile))

    def canonical_key(self) -> tuple:
        """Total invariant under relabeling: minimal relation matrix bytes."""
        return (self.n, _canonical_matrix(self))

    def to_json(self) -> dict:
        return {
            "points": list(self.points),
            "leq": [[self.points[i], self.points[j]] for i, j in self.cover_pairs()],
        }

    def to_dot(
        self,
        name: str = "poset",
        highlight: int = 0,
        colors: Optional[dict[int, str]] = None,
    ) -> str:
        """Hasse diagram (cover edges only) in DOT format."""
        lines = [f"digraph {name} {{", "  rankdir=BT;", "  node [shape=ellipse];"]
        for i, p in enumerate(self.points):
            style = ""
            if colors and i in colors:
                style = f' style=filled fillcolor="{colors[i]}"'
            if highlight >> i & 1:
                style = ' style=filled fillcolor="gold"'
            lines.append(f'  n{i} [label="{p}"{style}];')
        for i, j in self.cover_pairs():
            lines.append(f"  n{i} -> n{j};")
        lines.append("}")
        return "\n".join(lines) + "\n"

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Poset)
            and self.points == other.points
            and self.up == other.up
        )

    def __hash__(self) -> int:
        return hash((self.points, self.up))

    def __repr__(self) -> str:
        return f"Poset({list(self.points)!r}, covers={self.cover_pairs()!r})"


def make_poset(
    points: Sequence[str],
    relation_pairs: Iterable[tuple[str, str]] = (),
    max_points: Optional[int] = None,
) -> Poset:
    """Build a poset from labels and arbitrary `a <= b` pairs.

    The reflexive-transitive closure is computed; cycles are rejected.
    Point order is preserved as given.
    """
    points = list(points)
    if max_points is None:
        max_points = budgets.MAX_POINTS
    if len(points) > max_points:
        raise SizeBudgetExceeded(f"{len(points)} points exceeds cap {max_points}")
    if len(set(points)) != len(points):
        raise UnknownLabel("duplicate point labels")
    index = {p: i for i, p in enumerate(points)}
    n = len(points)
    up = [1 << i for i in range(n)]
    for a, b in relation_pairs:
        if a not in index:
            raise UnknownLabel(f"unknown point {a!r}")
        if b not in index:
            raise UnknownLabel(f"unknown point {b!r}")
        up[index[a]] |= 1 << index[b]
    # transitive closure
    changed = True
    while changed:
        changed = False
        for i in range(n):
            acc = up[i]
            for j in bits(acc):
                acc |= up[j]
            if acc != up[i]:
                up[i] = acc
                changed = True
    for i in range(n):
        for j in bits(up[i] & ~(1 << i)):
            if up[j] >> i & 1:
                raise CycleError(
                    f"points {points[i]!r} and {points[j]!r} lie on a cycle"
                )
    return Poset(points, up)


def poset_from_json(obj: dict) -> Poset:
    return make_poset(obj["points"], [tuple(p) for p in obj["leq"]])


def chain_poset(k: int, prefix: str = "c") -> Poset:
    pts = [f"{prefix}{i}" for i in range(k)]
    return make_poset(pts, [(pts[i], pts[i + 1]) for i in range(k - 1)])


def antichain_poset(k: int, prefix: str = "a") -> Poset:
    return make_poset([f"{prefix}{i}" for i in range(k)])


def poset_isomorphic(p: Poset, q: Poset) -> Optional[list[int]]:
    """Order isomorphism p -> q as an index map, or None.

    Backtracks over degree/height invariant classes; deterministic for a
    fixed input order (least mapping in search order).
    """
    if p.n != q.n:
        return None
    if p.invariant() != q.invariant():
        return None
    p_sig = _point_signatures(p)
    q_sig = _point_signatures(q)
    if sorted(p_sig) != sorted(q_sig):
        return None
    q_by_sig: dict = {}
    for j, s in enumerate(q_sig):
        q_by_sig.setdefault(s, []).append(j)
    # assign p-points in order of rarest signature first
    order = sorted(range(p.n), key=lambda i: (len(q_by_sig.get(p_sig[i], ())), i))
    mapping = [-1] * p.n
    used = 0

    def extend(k: int) -> bool:
        nonlocal used
        if k == p.n:
            return True
        i = order[k]
        for j in q_by_sig.get(p_sig[i], ()):
            if used >> j & 1:
                continue
            ok = True
            for k2 in range(k):
                i2 = order[k2]
                j2 = mapping[i2]
                if p.leq(i, i2) != q.leq(j, j2) or p.leq(i2, i) != q.leq(j2, j):
                    ok = False
                    break
            if ok:
                mapping[i] = j
                used |= 1 << j
                if extend(k + 1):
                    return True
                used &= ~(1 << j)
                mapping[i] = -1
        return False

    if extend(0):
        return mapping
    return None


def _point_signatures(p: Poset) -> list[tuple]:
    levels = p.height_levels()
    cov = p.covers_up()
    sig = [
        (
            bin(p.down[i]).count("1"),
            bin(p.up[i]).count("1"),
            bin(cov[i]).count("1"),
            levels[i],
        )
        for i in range(p.n)
    ]
    # one refinement round: incorporate sorted signatures of covers
    refined = []
    for i in range(p.n):
        ups = tuple(sorted(sig[j] for j in bits(cov[i])))
        dns = tuple(sorted(sig[j] for j in range(p.n) if cov[j] >> i & 1))
        refined.append((sig[i], ups, dns))
    return refined


def _canonical_matrix(p: Poset) -> bytes:
    """Lexicographically minimal relation matrix over all relabelings."""
    n = p.n
    sig = _point_signatures(p)
    best: list[Optional[bytes]] = [None]

    def row_bits(perm: list[int], i: int) -> int:
        # relation row of perm[i] restricted to already-placed columns
        out = 0
        for col, pj in enumerate(perm):
            if p.leq(perm[i], pj):
                out |= 1 << col
            if p.leq(pj, perm[i]):
                out |= 1 << (n + col)
        return out

    def search(perm: list[int], used: int, prefix: list[int]) -> None:
        k = len(perm)
        if k == n:
            flat = bytearray()
            for i in range(n):
                for j in range(n):
                    flat.append(1 if p.leq(perm[i], perm[j]) else 0)
            cand = bytes(flat)
            if best[0] is None or cand < best[0]:
                best[0] = cand
            return
        # candidates: minimal signature among remaining, then minimal row bits
        remaining = [i for i in range(n) if not used >> i & 1]
        min_sig = min(sig[i] for i in remaining)
        cands = []
        for i in remaining:
            if sig[i] != min_sig:
                continue
            perm.append(i)
            cands.append((row_bits(perm, k), i))
            perm.pop()
        min_row = min(c[0] for c in cands)
        for row, i in sorted(cands):
            if row != min_row:
                break
            perm.append(i)
            search(perm, used | (1 << i), prefix + [row])
            perm.pop()

    search([], 0, [])
    assert best[0] is not None
    return best[0]


@functools.lru_cache(maxsize=None)
def enumerate_posets(n: int) -> tuple[Poset, ...]:
    """All posets on ``n`` points up to isomorphism, in canonical-key order.

    Generated by repeatedly adding a new maximal point over every downset
    of each smaller poset.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    if n == 0:
        return (make_poset([]),)
    if n == 1:
        return (make_poset(["p0"]),)
    found: dict[tuple, Poset] = {}
    labels = [f"p{i}" for i in range(n)]
    for base in enumerate_posets(n - 1):
        for d in base.downsets():
            up = list(base.up) + [1 << (n - 1)]
            for i in bits(d):
                up[i] |= 1 << (n - 1)
            cand = Poset(labels, up)
            key = cand.canonical_key()
            if key not in found:
                found[key] = cand
    return tuple(found[k] for k in sorted(found))
