"""Finite distributive lattices as Brouwer and Heyting algebras.

Every lattice is kept in Birkhoff form: an element is the bitmask of the
join-irreducibles below it (a downset of the ``jposet``).  Join and meet
are then bitwise or/and, the Brouwer arrow is a down-closure, and the
Heyting arrow an up-closure complement.  Dense numpy operation tables are
materialised lazily for lattices small enough to enumerate valuations on.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from . import budgets
from .errors import (
    EmptyInterval,
    NotALatticeError,
    NotDistributiveError,
    SizeBudgetExceeded,
)
from .posets import Poset, bits, make_poset, poset_isomorphic


class DistLattice:
    """Finite distributive lattice in Birkhoff (downset-of-J) form."""

    __slots__ = (
        "jposet",
        "jmask",
        "labels",
        "provenance",
        "bot",
        "top",
        "carrier",
        "_index",
        "_tables",
        "_lock",
    )

    def __init__(
        self,
        jposet: Poset,
        jmask: Sequence[int],
        labels: Optional[Sequence[str]] = None,
        provenance: str = "explicit",
        carrier: Optional[Sequence[int]] = None,
    ):
        self.jposet = jposet
        self.jmask = tuple(jmask)
        self.labels = tuple(labels) if labels is not None else None
        self.provenance = provenance
        self.carrier = tuple(carrier) if carrier is not None else None
        self._index = {m: i for i, m in enumerate(self.jmask)}
        if len(self._index) != len(self.jmask):
            raise NotALatticeError("duplicate Birkhoff masks")
        full = jposet.full_mask()
        self.bot = self._index[0]
        self.top = self._index[full]
        self._tables = {}
        self._lock = threading.Lock()

    # -- scalar operations -------------------------------------------------

    @property
    def n(self) -> int:
        return len(self.jmask)

    def index_of_mask(self, mask: int) -> int:
        return self._index[mask]

    def leq(self, a: int, b: int) -> bool:
        return self.jmask[a] & ~self.jmask[b] == 0

    def join(self, a: int, b: int) -> int:
        return self._index[self.jmask[a] | self.jmask[b]]

    def meet(self, a: int, b: int) -> int:
        return self._index[self.jmask[a] & self.jmask[b]]

    def join_all(self, elems: Iterable[int]) -> int:
        m = 0
        for e in elems:
            m |= self.jmask[e]
        return self._index[m]

    def meet_all(self, elems: Iterable[int]) -> int:
        m = self.jposet.full_mask()
        for e in elems:
            m &= self.jmask[e]
        return self._index[m]

    def brouwer_arrow(self, a: int, b: int) -> int:
        """Least c with a v c >= b."""
        need = self.jmask[b] & ~self.jmask[a]
        return self._index[self.jposet.down_closure(need)]

    def heyting_arrow(self, a: int, b: int) -> int:
        """Greatest c with a ^ c <= b."""
        forbidden = self.jmask[a] & ~self.jmask[b]
        blocked = self.jposet.up_closure(forbidden)
        return self._index[self.jposet.full_mask() & ~blocked]

    def brouwer_neg(self, a: int) -> int:
        return self.brouwer_arrow(a, self.top)

    def heyting_neg(self, a: int) -> int:
        return self.heyting_arrow(a, self.bot)

    def element_label(self, i: int) -> str:
        if self.labels is not None:
            return self.labels[i]
        return f"e{i}"

    # -- dense tables --------------------------------------------------------

    def _build_tables(self) -> dict:
        n = self.n
        if n > budgets.MAX_TABLE:
            raise SizeBudgetExceeded(
                f"{n} elements exceeds dense-table cap {budgets.MAX_TABLE}"
            )
        nj = self.jposet.n
        if nj <= 62:
            masks = np.array(self.jmask, dtype=np.int64)
            order = np.argsort(masks, kind="stable")
            sorted_masks = masks[order]

            def lookup(arr):
                pos = np.searchsorted(sorted_masks, arr)
                return order[pos].astype(np.int32)

            join = lookup(masks[:, None] | masks[None, :])
            meet = lookup(masks[:, None] & masks[None, :])
            leq = (masks[:, None] & ~masks[None, :]) == 0
            down_rows = np.array(self.jposet.down, dtype=np.int64)
            up_rows = np.array(self.jposet.up, dtype=np.int64)
            need = ~masks[:, None] & masks[None, :]
            closed = np.zeros_like(need)
            for j in range(nj):
                closed |= np.where(need >> j & 1 == 1, down_rows[j], 0)
            barrow = lookup(closed)
            forb = masks[:, None] & ~masks[None, :]
            blocked = np.zeros_like(forb)
            for j in range(nj):
                blocked |= np.where(forb >> j & 1 == 1, up_rows[j], 0)
            full = self.jposet.full_mask()
            harrow = lookup(full & ~blocked)
        else:
            join = np.empty((n, n), dtype=np.int32)
            meet = np.empty((n, n), dtype=np.int32)
            barrow = np.empty((n, n), dtype=np.int32)
            harrow = np.empty((n, n), dtype=np.int32)
            leq = np.empty((n, n), dtype=bool)
            for a in range(n):
                for b in range(n):
                    join[a, b] = self.join(a, b)
                    meet[a, b] = self.meet(a, b)
                    barrow[a, b] = self.brouwer_arrow(a, b)
                    harrow[a, b] = self.heyting_arrow(a, b)
                    leq[a, b] = self.leq(a, b)
        return {
            "join": join,
            "meet": meet,
            "brouwer_arrow": barrow,
            "heyting_arrow": harrow,
            "leq": leq,
        }

    def tables(self) -> dict:
        """Dense numpy operation tables (built once, thread-safe)."""
        if not self._tables:
            with self._lock:
                if not self._tables:
                    self._tables.update(self._build_tables())
        return self._tables

    # -- order structure -----------------------------------------------------

    def order_poset(self) -> Poset:
        """The element order as a poset (for Hasse export)."""
        labels = [self.element_label(i) for i in range(self.n)]
        ups = []
        for a in range(self.n):
            row = 0
            for b in range(self.n):
                if self.leq(a, b):
                    row |= 1 << b
            ups.append(row)
        return Poset(labels, ups)

    def atoms(self) -> list[int]:
        return [i for i in range(self.n) if self._covers(self.bot, i)]

    def _covers(self, a: int, b: int) -> bool:
        if a == b or not self.leq(a, b):
            return False
        for c in range(self.n):
            if c not in (a, b) and self.leq(a, c) and self.leq(c, b):
                return False
        return True

    def validate(self) -> None:
        """Internal consistency check used by the test suite."""
        assert self.jmask[self.bot] == 0
        assert self.jmask[self.top] == self.jposet.full_mask()
        for m in self.jmask:
            assert self.jposet.is_down_closed(m)

    def __repr__(self) -> str:
        return f"DistLattice(n={self.n}, provenance={self.provenance!r})"


# -- constructors -------------------------------------------------------------


def downset_lattice(p: Poset, cap: Optional[int] = None) -> DistLattice:
    """Lattice of downsets of ``p`` ordered by inclusion."""
    masks = p.downsets(cap)
    labels = ["{" + ",".join(p.labels_from_mask(m)) + "}" for m in masks]
    return DistLattice(p, masks, labels, provenance="downsets")


def chain(k: int) -> DistLattice:
    """Chain with ``k`` elements (k >= 1)."""
    if k < 1:
        raise NotALatticeError("a chain needs at least one element")
    jp = make_poset([f"j{i}" for i in range(k - 1)],
                    [(f"j{i}", f"j{i+1}") for i in range(k - 2)])
    masks = [(1 << i) - 1 for i in range(k)]
    return DistLattice(jp, masks, [str(i) for i in range(k)], provenance="chain")


def explicit_lattice(
    labels: Sequence[str],
    leq_pairs: Iterable[tuple[str, str]],
    check_distributive: bool = True,
) -> DistLattice:
    """Validate an explicitly given order as a distributive lattice.

    Distributivity is certified by scanning for a failing triple, which is
    exactly the witness of an M3 or N5 sublattice; lattices above 200
    elements are checked on a deterministic random sample of triples.
    """
    p = make_poset(labels, leq_pairs)
    n = p.n
    if n == 0:
        raise NotALatticeError("empty carrier")
    join_t = [[0] * n for _ in range(n)]
    meet_t = [[0] * n for _ in range(n)]
    for a in range(n):
        for b in range(a, n):
            ub = p.up[a] & p.up[b]
            m = p.minimal_elements(ub)
            if bin(m).count("1") != 1:
                raise NotALatticeError(
                    f"no least upper bound for {labels[a]!r}, {labels[b]!r}"
                )
            join_t[a][b] = join_t[b][a] = m.bit_length() - 1
            lb = p.down[a] & p.down[b]
            m = p.maximal_elements(lb)
            if bin(m).count("1") != 1:
                raise NotALatticeError(
                    f"no greatest lower bound for {labels[a]!r}, {labels[b]!r}"
                )
            meet_t[a][b] = meet_t[b][a] = m.bit_length() - 1
    if check_distributive:
        _check_distributive(labels, join_t, meet_t)
    jelems = [
        x
        for x in range(n)
        if x != p.least_element()
        and sum(1 for y in bits(p.down[x] & ~(1 << x)) if _is_cover(p, y, x)) == 1
    ]
    jpos = {e: i for i, e in enumerate(jelems)}
    jp_rows = []
    for e in jelems:
        row = 0
        for f in jelems:
            if p.leq(e, f):
                row |= 1 << jpos[f]
        jp_rows.append(row)
    jp = Poset([labels[e] for e in jelems], jp_rows)
    jmask = []
    for x in range(n):
        m = 0
        for e in jelems:
            if p.leq(e, x):
                m |= 1 << jpos[e]
        jmask.append(m)
    if len(set(jmask)) != n:
        raise NotDistributiveError("Birkhoff representation is not faithful")
    return DistLattice(jp, jmask, labels, provenance="explicit")


def _is_cover(p: Poset, y: int, x: int) -> bool:
    between = p.up[y] & p.down[x] & ~(1 << y) & ~(1 << x)
    return not between


def _check_distributive(labels, join_t, meet_t) -> None:
    n = len(labels)
    jt = np.array(join_t, dtype=np.int32)
    mt = np.array(meet_t, dtype=np.int32)
    if n <= 200:
        for a in range(n):
            lhs = mt[a][jt]
            rhs = jt[np.ix_(mt[a], mt[a])]
            bad = np.argwhere(lhs != rhs)
            if len(bad):
                b, c = map(int, bad[0])
                raise NotDistributiveError(
                    f"M3/N5 witness: triple ({labels[a]!r}, {labels[b]!r}, {labels[c]!r})"
                )
    else:
        import random

        rng = random.Random(0)
        for _ in range(200_000):
            a, b, c = (rng.randrange(n) for _ in range(3))
            if mt[a, jt[b, c]] != jt[mt[a, b], mt[a, c]]:
                raise NotDistributiveError(
                    f"M3/N5 witness: triple ({labels[a]!r}, {labels[b]!r}, {labels[c]!r})"
                )


def lattice_from_json(obj: dict) -> DistLattice:
    labels = [str(e) for e in obj["elements"]]
    pairs = [(labels[i], labels[j]) for i, j in obj["leq"]]
    return explicit_lattice(labels, pairs)


# -- derived lattices ----------------------------------------------------------


def dual(lat: DistLattice) -> DistLattice:
    """Order-reversed lattice on the same elements (involutive)."""
    full = lat.jposet.full_mask()
    return DistLattice(
        lat.jposet.op(),
        [full ^ m for m in lat.jmask],
        lat.labels,
        provenance=f"dual({lat.provenance})",
    )


def product(a: DistLattice, b: DistLattice, cap: Optional[int] = None) -> DistLattice:
    """Componentwise product; element (i, j) sits at index i + |a| * j."""
    if cap is None:
        cap = budgets.MAX_ELEMENTS
    if a.n * b.n > cap:
        raise SizeBudgetExceeded(f"product would have {a.n * b.n} elements (cap {cap})")
    nja = a.jposet.n
    jp = _disjoint_union(a.jposet, b.jposet)
    masks = []
    labels = None
    if a.labels is not None and b.labels is not None and a.n * b.n <= 4096:
        labels = []
    for j in range(b.n):
        mb = b.jmask[j] << nja
        for i in range(a.n):
            masks.append(a.jmask[i] | mb)
            if labels is not None:
                labels.append(f"({a.labels[i]},{b.labels[j]})")
    return DistLattice(jp, masks, labels, provenance="product")


def power(a: DistLattice, k: int, cap: Optional[int] = None) -> DistLattice:
    """k-fold product a x a x ... x a (left fold); power(a, 1) is a itself."""
    if k < 1:
        raise NotALatticeError("power needs k >= 1")
    out = a
    for _ in range(k - 1):
        out = product(out, a, cap)
    return out


def _disjoint_union(p: Poset, q: Poset, stacked: bool = False) -> Poset:
    labels = [f"0:{x}" for x in p.points] + [f"1:{x}" for x in q.points]
    rows = []
    above = ((1 << q.n) - 1) << p.n if stacked else 0
    for i in range(p.n):
        rows.append(p.up[i] | above)
    for i in range(q.n):
        rows.append(q.up[i] << p.n)
    return Poset(labels, rows)


def stack_sum(a: DistLattice, b: DistLattice) -> DistLattice:
    """Stack ``b`` on top of ``a``, identifying the bottom of b with the top of a."""
    nja = a.jposet.n
    full_a = a.jposet.full_mask()
    jp = _disjoint_union(a.jposet, b.jposet, stacked=True)
    masks = list(a.jmask)
    labels = list(a.labels) if (a.labels is not None and b.labels is not None) else None
    for y in range(b.n):
        if y == b.bot:
            continue
        masks.append(full_a | (b.jmask[y] << nja))
        if labels is not None:
            labels.append(b.labels[y])
    return DistLattice(jp, masks, labels, provenance="sum")


def interval(lat: DistLattice, a: int, b: int) -> DistLattice:
    """The interval [a, b] as a Brouwer/Heyting algebra in its own right.

    The arrow is recomputed inside the interval from its defining property
    (not inherited from the ambient lattice).
    """
    if not lat.leq(a, b):
        raise EmptyInterval(
            f"{lat.element_label(a)} is not below {lat.element_label(b)}"
        )
    span = lat.jmask[b] & ~lat.jmask[a]
    sub_jp, jbits = lat.jposet.subposet(span)
    pos = {jb: k for k, jb in enumerate(jbits)}
    carrier = [x for x in range(lat.n) if lat.leq(a, x) and lat.leq(x, b)]
    masks = []
    for x in carrier:
        m = 0
        for jb in bits(lat.jmask[x] & span):
            m |= 1 << pos[jb]
        masks.append(m)
    labels = [lat.element_label(x) for x in carrier] if lat.labels else None
    return DistLattice(
        sub_jp, masks, labels, provenance="interval", carrier=carrier
    )


@dataclass(frozen=True)
class LatticeMap:
    """Total map between lattice carriers, by element index."""

    source: DistLattice
    target: DistLattice
    table: tuple[int, ...]

    def __post_init__(self):
        if len(self.table) != self.source.n:
            raise NotALatticeError("map table must be total on the source")

    def __call__(self, i: int) -> int:
        return self.table[i]

    def is_surjective(self) -> bool:
        return len(set(self.table)) == self.target.n


def principal_quotient(
    lat: DistLattice, e: int, kind: str
) -> tuple[DistLattice, LatticeMap]:
    """Quotient by the principal filter (kind='filter') or ideal (kind='ideal')
    generated by ``e``, realised as the interval below/above ``e`` with the
    canonical surjection.
    """
    if kind == "filter":
        sub = interval(lat, lat.bot, e)
        pos = {x: i for i, x in enumerate(sub.carrier)}
        table = [pos[lat.meet(x, e)] for x in range(lat.n)]
    elif kind == "ideal":
        sub = interval(lat, e, lat.top)
        pos = {x: i for i, x in enumerate(sub.carrier)}
        table = [pos[lat.join(x, e)] for x in range(lat.n)]
    else:
        raise ValueError(f"kind must be 'filter' or 'ideal', got {kind!r}")
    return sub, LatticeMap(lat, sub, tuple(table))


def meet_slice_map(lat: DistLattice, x: int, y: int, z: int) -> LatticeMap:
    """The map c -> c ^ z from [x, y] onto [x ^ z, y ^ z]."""
    if not lat.leq(x, y):
        raise EmptyInterval("x must be below y")
    source = interval(lat, x, y)
    target = interval(lat, lat.meet(x, z), lat.meet(y, z))
    pos = {c: i for i, c in enumerate(target.carrier)}
    table = [pos[lat.meet(c, z)] for c in source.carrier]
    return LatticeMap(source, target, tuple(table))


def is_brouwer_homomorphism(fmap: LatticeMap) -> tuple[bool, Optional[dict]]:
    """Check preservation of bot, top, join, meet and the Brouwer arrow.

    Returns (ok, first violation in deterministic pair order).
    """
    src, tgt, f = fmap.source, fmap.target, fmap.table
    if f[src.bot] != tgt.bot:
        return False, {"op": "bot", "a": src.bot, "got": f[src.bot]}
    if f[src.top] != tgt.top:
        return False, {"op": "top", "a": src.top, "got": f[src.top]}
    farr = np.array(f, dtype=np.int32)
    st, tt = src.tables(), tgt.tables()
    for op in ("join", "meet", "brouwer_arrow"):
        lhs = farr[st[op]]
        rhs = tt[op][np.ix_(farr, farr)]
        bad = np.argwhere(lhs != rhs)
        if len(bad):
            a, b = map(int, bad[0])
            return False, {
                "op": op,
                "a": a,
                "b": b,
                "got": int(lhs[a, b]),
                "expected": int(rhs[a, b]),
            }
    return True, None


# -- join-irreducibles and isomorphism ------------------------------------------


def join_irreducibles(lat: DistLattice) -> tuple[Poset, list[int]]:
    """Recompute the poset of nonzero join-irreducibles from the order.

    Independent of the stored Birkhoff data: an element is join-irreducible
    iff it has exactly one lower cover.
    """
    n = lat.n
    if n <= 256:
        lt = np.zeros((n, n), dtype=bool)
        for a_i in range(n):
            for b_i in range(n):
                lt[a_i, b_i] = a_i != b_i and lat.leq(a_i, b_i)
    else:
        leq = lat.tables()["leq"]
        lt = leq & ~np.eye(n, dtype=bool)
    between = (lt.astype(np.float32) @ lt.astype(np.float32)) > 0
    cover = lt & ~between
    counts = cover.sum(axis=0)
    elems = [x for x in range(n) if x != lat.bot and counts[x] == 1]
    pos = {e: i for i, e in enumerate(elems)}
    rows = []
    for e in elems:
        row = 0
        for fel in elems:
            if lat.leq(e, fel):
                row |= 1 << pos[fel]
        rows.append(row)
    jp = Poset([lat.element_label(e) for e in elems], rows)
    return jp, elems


def lattice_isomorphic(a: DistLattice, b: DistLattice) -> Optional[list[int]]:
    """Lattice isomorphism a -> b as an element map, or None.

    Delegates to poset isomorphism of the join-irreducible posets, which is
    sound and complete for distributive lattices.
    """
    if a.n != b.n:
        return None
    sigma = poset_isomorphic(a.jposet, b.jposet)
    if sigma is None:
        return None
    out = []
    for m in a.jmask:
        tm = 0
        for j in bits(m):
            tm |= 1 << sigma[j]
        out.append(b.index_of_mask(tm))
    return out
