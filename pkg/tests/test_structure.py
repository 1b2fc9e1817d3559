import pytest

from muchniklab import (
    analyze,
    chain,
    downset_lattice,
    dual,
    enumerate_posets,
    is_dd_like,
    is_initial_segment_embeddable,
    is_interval_embeddable,
    is_weakly_projective,
    jaskowski_algebra,
    make_poset,
    product,
    stack_sum,
)


def downset_family(max_points):
    for n in range(1, max_points + 1):
        for p in enumerate_posets(n):
            yield downset_lattice(p)


class TestDoubleDiamond:
    def test_dd_lattice(self, dd_lattice):
        dd, witness = is_dd_like(dd_lattice)
        assert dd
        assert set(witness["incomparable"]) == {"a", "b"}
        assert set(witness["minimal_upper_bounds"]) == {"c", "d"}

    def test_boolean_square(self, bool22):
        assert not is_dd_like(bool22)[0]

    def test_chains(self):
        for k in (1, 2, 5):
            assert not is_dd_like(chain(k))[0]

    def test_needs_minimal_bounds(self):
        # two incomparable points whose common upper bounds form a chain
        p = make_poset(
            ["a", "b", "c", "d"],
            [("a", "c"), ("b", "c"), ("c", "d")],
        )
        assert not is_dd_like(downset_lattice(p))[0]


class TestWeakProjectivity:
    def test_boolean_square_admits_zero_meet(self, bool22):
        assert is_weakly_projective(bool22)[0]

    def test_dd_lattice_fails_with_witness(self, dd_lattice):
        wp, witness = is_weakly_projective(dd_lattice)
        assert not wp
        assert set(witness["pair"]) == {"c", "d"}

    def test_level_three(self):
        assert is_weakly_projective(jaskowski_algebra(3).algebra)[0]

    def test_equivalence_with_double_diamond(self):
        for lat in downset_family(5):
            assert is_dd_like(lat)[0] == (not is_weakly_projective(lat)[0])

    def test_duality_invariance(self):
        for lat in downset_family(5):
            assert is_weakly_projective(lat)[0] == is_weakly_projective(dual(lat))[0]

    def test_product_preservation(self):
        lats = [lat for lat in downset_family(4) if not is_dd_like(lat)[0]]
        for a in lats:
            for b in lats:
                assert not is_dd_like(product(a, b))[0]

    def test_dd_component_spoils_product(self, dd_lattice):
        assert is_dd_like(product(dd_lattice, chain(2)))[0]


class TestIntervalEmbeddable:
    def test_level_four(self):
        assert is_interval_embeddable(jaskowski_algebra(4).algebra)

    def test_dd_lattice(self, dd_lattice):
        assert not is_interval_embeddable(dd_lattice)

    def test_forest_downsets(self):
        # downsets of a forest: no two incomparable points share upper bounds
        forest = make_poset(
            ["r1", "x", "y", "r2", "z"],
            [("r1", "x"), ("r1", "y"), ("r2", "z")],
        )
        assert is_interval_embeddable(downset_lattice(forest))

    def test_subinterval_cross_check_runs(self, dd_lattice):
        # the subinterval formulation is exercised for small lattices
        assert is_interval_embeddable(dd_lattice, cross_check_limit=64) is False


class TestInitialSegment:
    def test_two_chain(self):
        assert is_initial_segment_embeddable(chain(2))

    def test_boolean_square_meet_reducible_zero(self, bool22):
        assert not is_initial_segment_embeddable(bool22)

    def test_bottom_stacking_restores_it(self):
        for lat in downset_family(4):
            if not is_weakly_projective(lat)[0]:
                continue
            lifted = stack_sum(chain(2), lat)
            assert is_initial_segment_embeddable(lifted)


class TestReport:
    def test_analyze_fields(self, dd_lattice):
        report = analyze(dd_lattice).to_json()
        assert report["dd_like"] is True
        assert report["weakly_projective"] is False
        assert report["interval_embeddable"] is False
        assert report["initial_segment"] is False
        assert report["elements"] == 7
        assert report["join_irreducibles"] == 4

    def test_analyze_consistency(self):
        for lat in downset_family(4):
            report = analyze(lat)
            assert report.dd_like == (not report.weakly_projective)
            assert report.interval_embeddable == (not report.dd_like)
            assert report.extras["dual_weakly_projective"] == report.weakly_projective
