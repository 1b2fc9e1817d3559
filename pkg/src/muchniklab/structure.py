"""Structural predicates on finite distributive lattices.

Covers the double-diamond configuration in the join-irreducible poset,
weak projectivity via the meet criterion, interval embeddability into the
simulated Muchnik order, and the initial-segment criterion.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .lattices import DistLattice, dual, interval
from .posets import bits


@dataclass
class StructureReport:
    dd_like: bool
    dd_witness: Optional[dict]
    weakly_projective: bool
    wp_witness: Optional[dict]
    interval_embeddable: bool
    initial_segment: bool
    extras: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "dd_like": self.dd_like,
            "dd_witness": self.dd_witness,
            "weakly_projective": self.weakly_projective,
            "wp_witness": self.wp_witness,
            "interval_embeddable": self.interval_embeddable,
            "initial_segment": self.initial_segment,
            **self.extras,
        }


def is_dd_like(lat: DistLattice) -> tuple[bool, Optional[dict]]:
    """Search J(L) for two incomparable points with two minimal upper bounds.

    The witness, when found, is least in index order over pairs and then
    over the two minimal upper bounds.
    """
    jp = lat.jposet
    for a in range(jp.n):
        for b in range(a + 1, jp.n):
            if jp.leq(a, b) or jp.leq(b, a):
                continue
            common = jp.up[a] & jp.up[b]
            mins = jp.minimal_elements(common)
            if bin(mins).count("1") >= 2:
                m0, m1, *_ = list(bits(mins))
                return True, {
                    "incomparable": [jp.points[a], jp.points[b]],
                    "minimal_upper_bounds": [jp.points[m0], jp.points[m1]],
                }
    return False, None


def is_weakly_projective(lat: DistLattice) -> tuple[bool, Optional[dict]]:
    """Meet criterion: meets of join-irreducibles stay join-irreducible.

    A meet equal to the bottom element is admitted; that convention is
    forced by the equivalence with the double-diamond test (the free
    Boolean square is weakly projective although its atoms meet to 0).
    """
    jp = lat.jposet
    jmask_set = set()
    jelems = []
    for j in range(jp.n):
        m = jp.down[j]
        jmask_set.add(m)
        jelems.append(lat.index_of_mask(m))
    for ai in range(jp.n):
        for bi in range(ai + 1, jp.n):
            meet_mask = lat.jmask[jelems[ai]] & lat.jmask[jelems[bi]]
            if meet_mask == 0 or meet_mask in jmask_set:
                continue
            return False, {
                "pair": [jp.points[ai], jp.points[bi]],
                "meet": lat.element_label(lat.index_of_mask(meet_mask)),
            }
    return True, None


def is_interval_embeddable(lat: DistLattice, cross_check_limit: int = 64) -> bool:
    """Embeddability as an interval of the simulated Muchnik order.

    Equivalent to not being double-diamond-like; for small lattices this is
    cross-checked against the subinterval formulation.
    """
    dd, _ = is_dd_like(lat)
    if lat.n <= cross_check_limit:
        sub_dd = _has_dd_subinterval(lat)
        if sub_dd != dd:
            raise AssertionError(
                "double-diamond test disagrees with its subinterval formulation"
            )
    return not dd


def _has_dd_subinterval(lat: DistLattice) -> bool:
    for a in range(lat.n):
        for b in range(lat.n):
            if not lat.leq(a, b):
                continue
            sub = interval(lat, a, b)
            if is_dd_like(sub)[0]:
                return True
    return False


def is_initial_segment_embeddable(lat: DistLattice) -> bool:
    """Weakly projective with a meet-irreducible bottom."""
    wp, _ = is_weakly_projective(lat)
    if not wp:
        return False
    return _bot_meet_irreducible(lat)


def _bot_meet_irreducible(lat: DistLattice) -> bool:
    # two distinct atoms meet to the bottom; a unique atom forces any two
    # nonzero elements to meet above it
    atoms = sum(1 for m in lat.jmask if bin(m).count("1") == 1)
    return atoms <= 1


def analyze(lat: DistLattice, cross_check_limit: int = 64) -> StructureReport:
    dd, ddw = is_dd_like(lat)
    wp, wpw = is_weakly_projective(lat)
    report = StructureReport(
        dd_like=dd,
        dd_witness=ddw,
        weakly_projective=wp,
        wp_witness=wpw,
        interval_embeddable=is_interval_embeddable(lat, cross_check_limit),
        initial_segment=is_initial_segment_embeddable(lat),
    )
    report.extras["elements"] = lat.n
    report.extras["join_irreducibles"] = lat.jposet.n
    report.extras["dual_weakly_projective"] = is_weakly_projective(dual(lat))[0]
    return report
