"""Finite simulation of the Muchnik lattice over a degree poset.

Mass problems are subsets of a finite poset of simulated degrees with a
designated computable degree at the bottom.  Reducibility compares upward
closures, meets are unions, joins are intersections of closures, and the
arrow comes either from the pointwise join formula or as the residual in
the up-set lattice.  ``build_master_poset`` assembles the multi-level
degree poset carrying one interval per requested Brouwer algebra together
with the named subsets used by ``verify_construction``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .errors import (
    AmbientMismatch,
    EmptyInterval,
    NoJoinTable,
    PolicyUnsatisfiable,
)
from .formulas import Formula, evaluate, is_valid, print_formula
from .lattices import DistLattice, downset_lattice, explicit_lattice, lattice_isomorphic
from .posets import Poset, bits, make_poset
from .structure import is_weakly_projective


class DegreePoset:
    """Finite poset of simulated degrees with least element 0.

    A join table is attached when the order is an upper semilattice; the
    pointwise arrow formula needs it, the lattice-mode arrow does not.
    """

    def __init__(self, poset: Poset):
        zero = poset.least_element()
        if zero is None:
            raise PolicyUnsatisfiable("a degree poset needs a least element")
        self.poset = poset
        self.zero = zero
        self.join_table = self._try_join_table()

    def _try_join_table(self) -> Optional[list[list[int]]]:
        p = self.poset
        table: list[list[int]] = []
        for a in range(p.n):
            row = []
            for b in range(p.n):
                mins = p.minimal_elements(p.up[a] & p.up[b])
                if bin(mins).count("1") != 1:
                    return None
                row.append(mins.bit_length() - 1)
            table.append(row)
        return table

    @property
    def n(self) -> int:
        return self.poset.n

    def join(self, a: int, b: int) -> int:
        if self.join_table is None:
            raise NoJoinTable("degree poset is not an upper semilattice")
        return self.join_table[a][b]

    def problem(self, labels: Iterable[str]) -> "MassProblem":
        return MassProblem(self, self.poset.mask_from_labels(labels))

    def __repr__(self) -> str:
        return f"DegreePoset(n={self.n}, zero={self.poset.points[self.zero]!r})"


@dataclass(frozen=True)
class MassProblem:
    """Arbitrary subset of the degree poset (the empty set is hardest)."""

    ambient: DegreePoset
    mask: int

    def labels(self) -> list[str]:
        return self.ambient.poset.labels_from_mask(self.mask)


@dataclass(frozen=True)
class SimDegree:
    """Canonical (upward closed) representative of a problem's degree."""

    ambient: DegreePoset
    mask: int

    def labels(self) -> list[str]:
        return self.ambient.poset.labels_from_mask(self.mask)


def _same_ambient(a, b) -> DegreePoset:
    if a.ambient is not b.ambient:
        raise AmbientMismatch("mass problems live over different degree posets")
    return a.ambient


def degree_of(a: MassProblem | SimDegree) -> SimDegree:
    return SimDegree(a.ambient, a.ambient.poset.up_closure(a.mask))


def muchnik_leq(a, b) -> bool:
    """a is reducible to b: every member of b bounds some member of a."""
    amb = _same_ambient(a, b)
    cla = amb.poset.up_closure(a.mask)
    clb = amb.poset.up_closure(b.mask)
    return clb & ~cla == 0


def degree_meet(a, b) -> SimDegree:
    amb = _same_ambient(a, b)
    return SimDegree(amb, amb.poset.up_closure(a.mask | b.mask))


def degree_join(a, b) -> SimDegree:
    amb = _same_ambient(a, b)
    return SimDegree(amb, degree_of(a).mask & degree_of(b).mask)


def muchnik_arrow(a, b, mode: str = "auto") -> MassProblem:
    """Least problem c (up to degree) with b reducible to the join of a and c.

    ``formula`` mode takes every f such that each member of a joined with f
    bounds some member of b; ``lattice`` mode computes the residual in the
    up-set lattice.  The two agree up to degree whenever joins exist.
    """
    amb = _same_ambient(a, b)
    if mode == "auto":
        mode = "formula" if amb.join_table is not None else "lattice"
    if mode == "formula":
        if amb.join_table is None:
            raise NoJoinTable("formula mode needs a join table")
        out = 0
        for f in range(amb.n):
            ok = True
            for g in bits(a.mask):
                j = amb.join(g, f)
                if not amb.poset.down[j] & b.mask:
                    ok = False
                    break
            if ok:
                out |= 1 << f
        return MassProblem(amb, out)
    if mode == "lattice":
        cla = degree_of(a).mask
        clb = degree_of(b).mask
        out = 0
        for f in range(amb.n):
            if amb.poset.up[f] & cla & ~clb == 0:
                out |= 1 << f
        return MassProblem(amb, out)
    raise ValueError(f"mode must be auto, formula or lattice, got {mode!r}")


def solvability_successor(amb: DegreePoset, f: int) -> MassProblem:
    """The problem of bounding f strictly: its strict upper cone."""
    return MassProblem(amb, amb.poset.up[f] & ~(1 << f))


@dataclass
class DegreeInterval:
    """Interval of the degree order materialised over its region.

    ``lattice`` is the distributive lattice of up-closed sets between the
    two closures, ordered by reducibility (element i of the lattice is the
    up-set ``upsets[i]``); the arrow is recomputed inside the interval.
    """

    ambient: DegreePoset
    lattice: DistLattice
    region: list[int]
    upsets: list[int]
    _index: dict = field(default_factory=dict, repr=False)

    def index_of_upset(self, mask: int) -> int:
        if not self._index:
            self._index.update({m: i for i, m in enumerate(self.upsets)})
        return self._index[mask]


def degree_interval(x, y, cap: Optional[int] = None) -> DegreeInterval:
    """All degrees between x and y as a Brouwer algebra (x must reduce to y)."""
    amb = _same_ambient(x, y)
    clx = degree_of(x).mask
    cly = degree_of(y).mask
    if cly & ~clx:
        raise EmptyInterval("x must be reducible to y")
    region_mask = clx & ~cly
    sub, pts = amb.poset.subposet(region_mask)
    lat = downset_lattice(sub, cap)
    upsets = []
    for m in lat.jmask:
        u = cly
        for k, p in enumerate(pts):
            if not m >> k & 1:
                u |= 1 << p
        upsets.append(u)
    return DegreeInterval(amb, lat, pts, upsets)


# -- the multi-level construction ---------------------------------------------


@dataclass
class ConstructionLevel:
    n: int
    lattice: DistLattice
    jpoints: list[int]          # degree-poset index per jposet point
    generics: list[list[int]]   # fresh points per jposet point
    z_mask: int
    x_mask: int
    y_mask: int
    xhat_mask: int
    yhat_mask: int


@dataclass
class Construction:
    degrees: DegreePoset
    levels: list[ConstructionLevel]
    zhat_mask: int
    yhat_mask: int
    k: int
    policy: str

    def to_json(self) -> dict:
        p = self.degrees.poset
        levels = []
        for lv in self.levels:
            doc = _lattice_order_json(lv.lattice)
            # key the degree points by the serialized label of the
            # join-irreducible element, which survives reconstruction even if
            # the rebuilt join-irreducible poset orders its points differently
            jp = lv.lattice.jposet
            keys = [
                doc["elements"][lv.lattice.index_of_mask(jp.down[j])]
                for j in range(jp.n)
            ]
            levels.append(
                {
                    "n": lv.n,
                    "lattice": doc,
                    "jpoints": {
                        key: p.points[i] for key, i in zip(keys, lv.jpoints)
                    },
                    "generics": {
                        key: [p.points[g] for g in gs]
                        for key, gs in zip(keys, lv.generics)
                    },
                }
            )
        return {
            "policy": self.policy,
            "k": self.k,
            "points": list(p.points),
            "leq": [[p.points[i], p.points[j]] for i, j in p.cover_pairs()],
            "levels": levels,
        }


def _lattice_order_json(lat: DistLattice) -> dict:
    labels = [lat.element_label(i) for i in range(lat.n)]
    if len(set(labels)) != len(labels):
        labels = [f"e{i}" for i in range(lat.n)]
    pairs = []
    for a in range(lat.n):
        for b in range(lat.n):
            if a != b and lat.leq(a, b):
                pairs.append([a, b])
    return {"elements": labels, "leq": pairs}


def _lattice_from_order_json(doc: dict) -> DistLattice:
    labels = [str(x) for x in doc["elements"]]
    pairs = [(labels[i], labels[j]) for i, j in doc["leq"]]
    return explicit_lattice(labels, pairs)


def construction_from_json(obj: dict) -> Construction:
    poset = make_poset(obj["points"], [tuple(p) for p in obj["leq"]])
    level_specs = []
    for lv in obj["levels"]:
        lat = _lattice_from_order_json(lv["lattice"])
        jp = lat.jposet
        jpoints = dict(lv["jpoints"])
        generics = {k: list(v) for k, v in lv["generics"].items()}
        keys = [
            lat.element_label(lat.index_of_mask(jp.down[j])) for j in range(jp.n)
        ]
        level_specs.append(
            (
                int(lv["n"]),
                lat,
                [jpoints[k] for k in keys],
                [generics[k] for k in keys],
            )
        )
    return _assemble(poset, level_specs, int(obj["k"]), str(obj["policy"]))


def build_master_poset(
    level_lattices: Sequence[DistLattice], k: int = 1, policy: str = "top-collapse"
) -> Construction:
    """Assemble the master degree poset for the given Brouwer algebras.

    Each algebra contributes its join-irreducible poset as a component
    above 0, plus ``k`` fresh generic points per component point; all
    cross-component and generic joins collapse to a global top.  The
    structural side conditions are certified after the build, not assumed.
    """
    if policy != "top-collapse":
        raise PolicyUnsatisfiable(f"unknown join policy {policy!r}")
    if k < 1:
        raise PolicyUnsatisfiable("at least one generic per point is required")
    for idx, lat in enumerate(level_lattices):
        wp, witness = is_weakly_projective(lat)
        if not wp:
            raise PolicyUnsatisfiable(
                f"level {idx + 1} is not weakly projective "
                f"(join-reducible meet witness {witness})"
            )
    points = ["0"]
    pairs: list[tuple[str, str]] = []
    level_specs = []
    for li, lat in enumerate(level_lattices, start=1):
        jp = lat.jposet
        jlabels = [f"{li}.{jp.points[j]}" for j in range(jp.n)]
        points.extend(jlabels)
        for a in range(jp.n):
            for b in bits(jp.up[a] & ~(1 << a)):
                pairs.append((jlabels[a], jlabels[b]))
        gen_labels = []
        for a in range(jp.n):
            gl = [f"{li}.{jp.points[a]}.g{i}" for i in range(k)]
            gen_labels.append(gl)
            points.extend(gl)
            for g in gl:
                pairs.append((jlabels[a], g))
        level_specs.append((li, lat, jlabels, gen_labels))
    points.append("T")
    for p in points:
        if p != "0":
            pairs.append(("0", p))
        if p != "T":
            pairs.append((p, "T"))
    poset = make_poset(points, pairs)
    return _assemble(poset, level_specs, k, policy)


def _assemble(poset: Poset, level_specs, k: int, policy: str) -> Construction:
    degrees = DegreePoset(poset)
    if degrees.join_table is None:
        raise PolicyUnsatisfiable("master poset is not an upper semilattice")
    levels = []
    zhat = 0
    for n, lat, jlabels, gen_labels in level_specs:
        jpoints = [poset.index(l) for l in jlabels]
        generics = [[poset.index(g) for g in gl] for gl in gen_labels]
        z_mask = 0
        for gl in generics:
            for g in gl:
                z_mask |= 1 << g
        jmask = 0
        for jpt in jpoints:
            jmask |= 1 << jpt
        x_mask = z_mask | jmask
        y_mask = z_mask | _maximal_cones(poset, lat, jpoints)
        levels.append(
            ConstructionLevel(n, lat, jpoints, generics, z_mask, x_mask, y_mask, 0, 0)
        )
        zhat |= z_mask
    yhat = 0
    for lv in levels:
        lv.xhat_mask = zhat | (lv.x_mask & ~lv.z_mask)
        lv.yhat_mask = zhat | _maximal_cones(poset, lv.lattice, lv.jpoints)
        yhat |= lv.yhat_mask
    construction = Construction(degrees, levels, zhat, yhat, k, policy)
    _certify(construction)
    return construction


def _maximal_cones(poset: Poset, lat: DistLattice, jpoints: list[int]) -> int:
    """Union of the strict upper cones of the maximal component points."""
    jmax = lat.jposet.maximal_elements(lat.jposet.full_mask())
    cones = 0
    for jb in bits(jmax):
        f = jpoints[jb]
        cones |= poset.up[f] & ~(1 << f)
    return cones


def _certify(c: Construction) -> None:
    """Check the generic, separation, and join side conditions; raise on failure."""
    p = c.degrees.poset
    for lv in c.levels:
        jp = lv.lattice.jposet
        for jb in range(jp.n):
            f = lv.jpoints[jb]
            gens = lv.generics[jb]
            if not gens:
                raise PolicyUnsatisfiable(
                    f"level {lv.n}: no generic above {p.points[f]!r}"
                )
            for g in gens:
                if not (p.leq(f, g) and f != g):
                    raise PolicyUnsatisfiable(
                        f"level {lv.n}: generic {p.points[g]!r} not strictly "
                        f"above {p.points[f]!r}"
                    )
                for hb in bits(jp.covers_up()[jb]):
                    h = lv.jpoints[hb]
                    if p.leq(g, h) or p.leq(h, g):
                        raise PolicyUnsatisfiable(
                            f"level {lv.n}: generic {p.points[g]!r} comparable "
                            f"with cover {p.points[h]!r}"
                        )
    for lv in c.levels:
        for other in c.levels:
            if other.n == lv.n:
                continue
            for f in lv.jpoints:
                if p.down[f] & other.z_mask:
                    raise PolicyUnsatisfiable(
                        f"level {other.n} generic below {p.points[f]!r}"
                    )
    for lv_m in c.levels:
        fmax = _jmax_points(lv_m)
        for lv_n in c.levels:
            if lv_n.n == lv_m.n:
                continue
            gmax = _jmax_points(lv_n)
            for f in fmax:
                for h in lv_n.jpoints:
                    j = c.degrees.join(f, h)
                    for g in gmax:
                        if not (p.leq(g, j) and g != j):
                            raise PolicyUnsatisfiable(
                                f"join of {p.points[f]!r} and {p.points[h]!r} "
                                f"is not strictly above {p.points[g]!r}"
                            )


def _jmax_points(lv: ConstructionLevel) -> list[int]:
    jmax = lv.lattice.jposet.maximal_elements(lv.lattice.jposet.full_mask())
    return [lv.jpoints[jb] for jb in bits(jmax)]


_PALETTE = ["lightgreen", "salmon", "khaki", "plum", "lightcyan", "wheat"]


def component_colors(c: Construction) -> dict[int, str]:
    """Point colors for exports: one hue per level, gray generics."""
    colors: dict[int, str] = {}
    for lv in c.levels:
        hue = _PALETTE[(lv.n - 1) % len(_PALETTE)]
        for i in lv.jpoints:
            colors[i] = hue
        for gl in lv.generics:
            for g in gl:
                colors[g] = "lightgray"
    return colors


# -- verification ---------------------------------------------------------------

_theory_cache: dict[int, tuple[DistLattice, dict]] = {}


def level_theory(lat: DistLattice, corpus: Sequence[Formula], threads: int = 1) -> dict:
    """formula -> (valid?, witness) over the algebra, truth-as-bottom; cached."""
    key = id(lat)
    cached = _theory_cache.get(key)
    if cached is not None and cached[0] is lat:
        table = cached[1]
    else:
        table = {}
        _theory_cache[key] = (lat, table)
    missing = [phi for phi in corpus if phi not in table]
    if missing:
        from .formulas import batch_validity

        for phi, res in batch_validity(lat, missing, "brouwer").items():
            table[phi] = (res.status == "valid", res.witness)
    return table


@dataclass
class CheckResult:
    name: str
    level: Optional[int]
    passed: bool
    witness: Optional[dict] = None

    def to_json(self) -> dict:
        return {
            "check": self.name,
            "level": self.level,
            "passed": self.passed,
            "witness": self.witness,
        }


@dataclass
class ConstructionReport:
    checks: list[CheckResult]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_json(self) -> dict:
        return {"passed": self.passed, "checks": [c.to_json() for c in self.checks]}


def verify_construction(
    c: Construction, corpus: Sequence[Formula], threads: int = 1
) -> ConstructionReport:
    """Run the per-level interval checks and the factor-theory check.

    (a) the interval between each level's named problems is isomorphic to
    the level algebra; (b) meeting with the pooled generics carries that
    interval bijectively and order-faithfully onto the hatted interval;
    (c) the global problem joined with each hatted floor reproduces the
    hatted ceiling; (d) every corpus formula refuted by a chosen level
    algebra is refuted by the factor below the global problem.  Refutations
    in (d) are found by lifting the level witness through the interval
    isomorphism and re-checking by direct evaluation, falling back to a
    full scan of the factor if the lift does not refute.
    """
    checks: list[CheckResult] = []
    amb = c.degrees
    try:
        _certify(c)
        checks.append(CheckResult("side-conditions", None, True))
    except PolicyUnsatisfiable as exc:
        checks.append(CheckResult("side-conditions", None, False, {"error": str(exc)}))

    intervals = {}
    level_iso = {}
    for lv in c.levels:
        iv = degree_interval(
            MassProblem(amb, lv.x_mask), MassProblem(amb, lv.y_mask)
        )
        intervals[lv.n] = iv
        iso = lattice_isomorphic(lv.lattice, iv.lattice)
        level_iso[lv.n] = iso
        checks.append(
            CheckResult(
                "interval-isomorphic-to-level",
                lv.n,
                iso is not None,
                None
                if iso is not None
                else {"interval_size": iv.lattice.n, "level_size": lv.lattice.n},
            )
        )

    clz = amb.poset.up_closure(c.zhat_mask)
    for lv in c.levels:
        iv = intervals[lv.n]
        hat = degree_interval(
            MassProblem(amb, lv.xhat_mask), MassProblem(amb, lv.yhat_mask)
        )
        ok = hat.lattice.n == iv.lattice.n
        witness = None
        if not ok:
            witness = {"hat_size": hat.lattice.n, "interval_size": iv.lattice.n}
        else:
            images = []
            seen = set()
            for u in iv.upsets:
                img = u | clz
                try:
                    j = hat.index_of_upset(img)
                except KeyError:
                    ok = False
                    witness = {"unmapped_upset": amb.poset.labels_from_mask(u)}
                    break
                if j in seen:
                    ok = False
                    witness = {"collision": amb.poset.labels_from_mask(u)}
                    break
                seen.add(j)
                images.append(img)
            if ok:
                m = iv.lattice.n
                for i1 in range(m):
                    for i2 in range(m):
                        want = iv.lattice.leq(i1, i2)
                        got = images[i2] & ~images[i1] == 0
                        if want != got:
                            ok = False
                            witness = {"order_mismatch": [i1, i2]}
                            break
                    if not ok:
                        break
        checks.append(CheckResult("hat-interval-isomorphic", lv.n, ok, witness))

    clyhat = amb.poset.up_closure(c.yhat_mask)
    for lv in c.levels:
        lhs = clyhat & amb.poset.up_closure(lv.xhat_mask)
        rhs = amb.poset.up_closure(lv.yhat_mask)
        ok = lhs == rhs
        checks.append(
            CheckResult(
                "join-with-hat-floor",
                lv.n,
                ok,
                None
                if ok
                else {
                    "got": amb.poset.labels_from_mask(lhs),
                    "expected": amb.poset.labels_from_mask(rhs),
                },
            )
        )

    factor = degree_interval(
        MassProblem(amb, 1 << amb.zero), MassProblem(amb, c.yhat_mask)
    )
    fl = factor.lattice
    violations = []
    for lv in c.levels:
        theory = level_theory(lv.lattice, corpus, threads)
        iso = level_iso[lv.n]
        iv = intervals[lv.n]
        for phi in corpus:
            valid, witness = theory[phi]
            if valid:
                continue
            refuted = False
            if iso is not None and witness is not None:
                lifted = {
                    name: factor.index_of_upset(iv.upsets[iso[b]] | clyhat)
                    for name, b in witness.items()
                }
                refuted = evaluate(phi, fl, lifted, "brouwer") != fl.bot
            if not refuted:
                res = is_valid(phi, fl, "brouwer", threads=threads)
                refuted = res.status == "invalid"
            if not refuted:
                violations.append({"formula": print_formula(phi), "level": lv.n})
    checks.append(
        CheckResult(
            "factor-theory-within-levels",
            None,
            not violations,
            None if not violations else {"violations": violations[:5]},
        )
    )
    return ConstructionReport(checks)
