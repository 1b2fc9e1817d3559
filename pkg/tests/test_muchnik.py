import json

import pytest

from muchniklab import (
    AmbientMismatch,
    EmptyInterval,
    NoJoinTable,
    PolicyUnsatisfiable,
    build_master_poset,
    chain,
    construction_from_json,
    degree_interval,
    degree_join,
    degree_meet,
    degree_of,
    downset_lattice,
    dual,
    enumerate_posets,
    jaskowski_algebra,
    lattice_isomorphic,
    make_poset,
    muchnik_arrow,
    muchnik_leq,
    named_formulas,
    solvability_successor,
    verify_construction,
)
from muchniklab.muchnik import DegreePoset, MassProblem
from muchniklab.posets import Poset, bits


@pytest.fixture(scope="module")
def diamond(diamond_poset):
    return DegreePoset(diamond_poset)


def degree_posets(max_points):
    """All degree posets (posets with a least element) up to the bound."""
    out = []
    for n in range(0, max_points):
        for base in enumerate_posets(n):
            rows = [u << 1 for u in base.up]
            bottom = (1 << (n + 1)) - 1
            p = Poset(["0"] + [f"d{i}" for i in range(n)], [bottom] + rows)
            out.append(DegreePoset(p))
    return out


def all_upsets(p):
    return p.op().downsets()


def brute_force_lattice_arrow(dp, a_mask, b_mask):
    """Largest up-set whose meet with a reduces to b, by full enumeration."""
    cla = dp.poset.up_closure(a_mask)
    clb = dp.poset.up_closure(b_mask)
    best = 0
    for u in all_upsets(dp.poset):
        if cla & u & ~clb == 0 and u | best == u:
            best = u
    # the candidates are closed under union, so the largest is the union
    union = 0
    for u in all_upsets(dp.poset):
        if cla & u & ~clb == 0:
            union |= u
    return union


class TestReducibility:
    def test_zero_below_everything(self, diamond):
        with_zero = diamond.problem(["0"])
        for labels in (["a"], ["b"], ["t"], []):
            assert muchnik_leq(with_zero, diamond.problem(labels))

    def test_incomparable_cones(self, diamond):
        a, b = diamond.problem(["a"]), diamond.problem(["b"])
        assert not muchnik_leq(a, b)
        assert not muchnik_leq(b, a)

    def test_empty_is_top(self, diamond):
        empty = diamond.problem([])
        for labels in ([], ["a"], ["0"]):
            assert muchnik_leq(diamond.problem(labels), empty)

    def test_ambient_mismatch(self, diamond):
        other = DegreePoset(make_poset(["0"], []))
        with pytest.raises(AmbientMismatch):
            muchnik_leq(diamond.problem(["a"]), other.problem(["0"]))

    def test_leq_iff_closure_containment(self):
        for dp in degree_posets(4):
            subsets = range(1 << dp.n)
            for am in subsets:
                for bm in subsets:
                    a, b = MassProblem(dp, am), MassProblem(dp, bm)
                    expected = (
                        degree_of(b).mask & ~degree_of(a).mask == 0
                    )
                    assert muchnik_leq(a, b) == expected


class TestDegreeOperations:
    def test_degree_of_examples(self, diamond):
        assert degree_of(diamond.problem(["a", "b"])).labels() == ["a", "b", "t"]
        assert degree_of(diamond.problem(["0"])).labels() == ["0", "a", "b", "t"]
        assert degree_of(diamond.problem([])).labels() == []

    def test_meet_join_examples(self, diamond):
        a, b = diamond.problem(["a"]), diamond.problem(["b"])
        assert degree_join(a, b).labels() == ["t"]
        assert degree_meet(a, diamond.problem([])).mask == degree_of(a).mask
        assert degree_join(a, a).mask == degree_of(a).mask

    def test_meet_join_are_inf_sup(self):
        for dp in degree_posets(4):
            ups = all_upsets(dp.poset)
            for am in ups:
                for bm in ups:
                    a, b = MassProblem(dp, am), MassProblem(dp, bm)
                    meet = degree_meet(a, b)
                    join = degree_join(a, b)
                    assert meet.mask == am | bm
                    assert join.mask == am & bm
                    assert muchnik_leq(meet, a) and muchnik_leq(meet, b)
                    assert muchnik_leq(a, join) and muchnik_leq(b, join)


class TestArrow:
    def test_formula_example(self, diamond):
        a, b = diamond.problem(["a"]), diamond.problem(["b"])
        assert muchnik_arrow(a, b, "formula").labels() == ["b", "t"]

    def test_arrow_to_self_is_bottom_degree(self, diamond):
        a = diamond.problem(["a"])
        result = degree_of(muchnik_arrow(a, a))
        assert result.labels() == ["0", "a", "b", "t"]

    def test_solvable_source_gives_target_degree(self, diamond):
        solvable = diamond.problem(["0", "a"])
        b = diamond.problem(["b"])
        assert degree_of(muchnik_arrow(solvable, b)).mask == degree_of(b).mask

    def test_no_join_table(self):
        # two incomparable maximal points above two incomparable middles
        p = make_poset(
            ["0", "x", "y", "s", "t"],
            [("0", "x"), ("0", "y"), ("x", "s"), ("y", "s"), ("x", "t"), ("y", "t")],
        )
        dp = DegreePoset(p)
        assert dp.join_table is None
        with pytest.raises(NoJoinTable):
            muchnik_arrow(dp.problem(["x"]), dp.problem(["y"]), "formula")
        muchnik_arrow(dp.problem(["x"]), dp.problem(["y"]), "lattice")

    def test_lattice_mode_matches_enumeration(self):
        for dp in degree_posets(4):
            ups = all_upsets(dp.poset)
            for am in ups:
                for bm in ups:
                    got = muchnik_arrow(
                        MassProblem(dp, am), MassProblem(dp, bm), "lattice"
                    )
                    assert got.mask == brute_force_lattice_arrow(dp, am, bm)

    def test_modes_agree_up_to_degree(self):
        for dp in degree_posets(4):
            if dp.join_table is None:
                continue
            ups = all_upsets(dp.poset)
            for am in ups:
                for bm in ups:
                    a, b = MassProblem(dp, am), MassProblem(dp, bm)
                    f = muchnik_arrow(a, b, "formula")
                    l = muchnik_arrow(a, b, "lattice")
                    assert degree_of(f).mask == degree_of(l).mask

    def test_residuation(self):
        for dp in degree_posets(4):
            ups = all_upsets(dp.poset)
            for am in ups:
                for bm in ups:
                    a, b = MassProblem(dp, am), MassProblem(dp, bm)
                    arrow = muchnik_arrow(a, b, "lattice")
                    for cm in ups:
                        c = MassProblem(dp, cm)
                        lhs = muchnik_leq(b, degree_join(a, c))
                        rhs = muchnik_leq(arrow, c)
                        assert lhs == rhs


class TestSuccessor:
    def test_zero_successor(self, diamond):
        assert solvability_successor(diamond, 0).labels() == ["a", "b", "t"]

    def test_maximal_successor(self, diamond):
        assert solvability_successor(diamond, 3).labels() == []

    def test_least_nonzero(self):
        for dp in degree_posets(4):
            succ = degree_of(solvability_successor(dp, dp.zero))
            full = dp.poset.full_mask()
            for u in all_upsets(dp.poset):
                if u == full:
                    continue
                assert muchnik_leq(succ, MassProblem(dp, u))


class TestDegreeInterval:
    def test_degenerate(self, diamond):
        a = diamond.problem(["a"])
        iv = degree_interval(a, a)
        assert iv.lattice.n == 1

    def test_full_interval_over_diamond(self, diamond):
        iv = degree_interval(diamond.problem(["0"]), diamond.problem([]))
        assert iv.lattice.n == 6
        assert sorted(map(len, (diamond.poset.labels_from_mask(u) for u in iv.upsets)))

    def test_precondition(self, diamond):
        with pytest.raises(EmptyInterval):
            degree_interval(diamond.problem([]), diamond.problem(["0"]))

    def test_quotient_is_upset_lattice(self):
        # the interval from the whole-poset degree to the empty problem is
        # the full degree lattice: up-sets under reverse inclusion
        for dp in degree_posets(4):
            iv = degree_interval(
                MassProblem(dp, 1 << dp.zero), MassProblem(dp, 0)
            )
            ups = all_upsets(dp.poset)
            assert iv.lattice.n == len(ups)
            assert set(iv.upsets) == set(ups)
            for i, u in enumerate(iv.upsets):
                for j, v in enumerate(iv.upsets):
                    assert iv.lattice.leq(i, j) == (v & ~u == 0)


class TestConstructionBuild:
    def test_single_level_shape(self):
        b1 = jaskowski_algebra(1).dual_algebra
        c = build_master_poset([b1], k=1)
        assert c.degrees.poset.points == ("0", "1.j0", "1.j0.g0", "T")
        lv = c.levels[0]
        assert lv.z_mask == c.degrees.poset.mask_from_labels(["1.j0.g0"])
        iv = degree_interval(
            MassProblem(c.degrees, lv.x_mask), MassProblem(c.degrees, lv.y_mask)
        )
        assert iv.lattice.n == 2

    def test_dd_level_rejected(self, dd_lattice):
        with pytest.raises(PolicyUnsatisfiable):
            build_master_poset([dd_lattice])

    def test_bad_k(self):
        with pytest.raises(PolicyUnsatisfiable):
            build_master_poset([chain(2)], k=0)

    def test_is_semilattice(self):
        levels = [jaskowski_algebra(1).dual_algebra, dual(jaskowski_algebra(2).algebra)]
        c = build_master_poset(levels, k=2)
        assert c.degrees.join_table is not None

    def test_json_round_trip(self):
        levels = [dual(jaskowski_algebra(2).algebra)]
        c = build_master_poset(levels, k=1)
        doc = json.loads(json.dumps(c.to_json()))
        again = construction_from_json(doc)
        assert again.degrees.poset.points == c.degrees.poset.points
        assert [lv.z_mask for lv in again.levels] == [lv.z_mask for lv in c.levels]
        assert again.yhat_mask == c.yhat_mask

    def test_json_round_trip_with_reordered_irreducibles(self):
        # the rebuilt lattice may enumerate its join-irreducibles in an order
        # different from the original component poset; the degree points must
        # still be re-associated correctly
        top_first = ml_make_poset_reversed()
        level = downset_lattice(top_first)
        c = build_master_poset([level, chain(2)], k=2)
        doc = json.loads(json.dumps(c.to_json()))
        again = construction_from_json(doc)
        assert again.degrees.poset.points == c.degrees.poset.points
        for a, b in zip(again.levels, c.levels):
            assert a.z_mask == b.z_mask
            assert a.x_mask == b.x_mask
            assert a.y_mask == b.y_mask
            assert sorted(map(sorted, a.generics)) == sorted(map(sorted, b.generics))
        assert again.zhat_mask == c.zhat_mask
        assert again.yhat_mask == c.yhat_mask


def ml_make_poset_reversed():
    return make_poset(["t", "m", "b"], [("b", "m"), ("m", "t")])


class TestVerification:
    CORPUS = None

    @classmethod
    def corpus(cls):
        if cls.CORPUS is None:
            from muchniklab import generate_corpus

            cls.CORPUS = generate_corpus(2) + list(named_formulas().values())
        return cls.CORPUS

    def test_single_level_passes(self):
        c = build_master_poset([jaskowski_algebra(1).dual_algebra], k=1)
        report = verify_construction(c, self.corpus())
        assert report.passed, report.to_json()

    def test_pair_with_level_three_dual(self):
        levels = [jaskowski_algebra(1).dual_algebra, dual(jaskowski_algebra(3).algebra)]
        c = build_master_poset(levels, k=2)
        report = verify_construction(c, self.corpus())
        assert report.passed, report.to_json()

    def test_factor_refutes_level_refuted_formulas(self):
        b3 = dual(jaskowski_algebra(3).algebra)
        c = build_master_poset([b3], k=1)
        report = verify_construction(c, self.corpus())
        names = {check.name for check in report.checks}
        assert "factor-theory-within-levels" in names
        assert report.passed

    def test_corrupted_generic_detected(self):
        # dropping a generic of a non-maximal point from the bookkeeping
        # (while leaving the point in the order) breaks the interval shape
        b2 = dual(jaskowski_algebra(2).algebra)
        c = build_master_poset([b2], k=1)
        lv = c.levels[0]
        nonmax = None
        jp = lv.lattice.jposet
        jmax = jp.maximal_elements(jp.full_mask())
        for jb in range(jp.n):
            if not jmax >> jb & 1:
                nonmax = jb
                break
        assert nonmax is not None
        g = lv.generics[nonmax][0]
        lv.generics[nonmax] = []
        for attr in ("z_mask", "x_mask", "y_mask", "xhat_mask", "yhat_mask"):
            setattr(lv, attr, getattr(lv, attr) & ~(1 << g))
        c.zhat_mask &= ~(1 << g)
        c.yhat_mask &= ~(1 << g)
        report = verify_construction(c, self.corpus()[:10])
        by_name = {(ch.name, ch.level): ch for ch in report.checks}
        assert not by_name[("side-conditions", None)].passed
        assert not by_name[("interval-isomorphic-to-level", 1)].passed

    def test_interval_isomorphism_content(self):
        b3 = dual(jaskowski_algebra(3).algebra)
        c = build_master_poset([b3], k=1)
        lv = c.levels[0]
        iv = degree_interval(
            MassProblem(c.degrees, lv.x_mask), MassProblem(c.degrees, lv.y_mask)
        )
        assert lattice_isomorphic(b3, iv.lattice) is not None
        assert iv.lattice.n == b3.n
