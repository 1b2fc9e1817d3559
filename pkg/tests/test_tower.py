import pytest

from muchniklab import (
    SizeBudgetExceeded,
    chain,
    describe_element,
    dual,
    is_dd_like,
    is_valid,
    is_weakly_projective,
    jaskowski_algebra,
    lattice_isomorphic,
    parse,
    tower_size,
)


class TestConstruction:
    def test_sizes(self):
        assert [tower_size(n) for n in (1, 2, 3, 4)] == [2, 3, 10, 1001]

    def test_level_one_is_boolean_pair(self):
        assert lattice_isomorphic(jaskowski_algebra(1).algebra, chain(2)) is not None

    def test_level_two_is_three_chain(self):
        assert lattice_isomorphic(jaskowski_algebra(2).algebra, chain(3)) is not None

    def test_level_four_size(self):
        assert jaskowski_algebra(4).algebra.n == 1001

    def test_level_five_rejected(self):
        with pytest.raises(SizeBudgetExceeded):
            jaskowski_algebra(5)

    def test_new_top_is_last_index(self):
        for n in (2, 3, 4):
            lat = jaskowski_algebra(n).algebra
            assert lat.top == lat.n - 1

    def test_dual_attached(self):
        level = jaskowski_algebra(3)
        assert level.dual_algebra.jmask == dual(level.algebra).jmask


class TestStructuralInvariants:
    @pytest.mark.parametrize("n", [1, 2, 3, 4])
    def test_weakly_projective_and_not_dd(self, n):
        level = jaskowski_algebra(n)
        assert is_weakly_projective(level.algebra)[0]
        assert is_weakly_projective(level.dual_algebra)[0]
        assert not is_dd_like(level.algebra)[0]

    def test_theories_nest_downward_on_corpus(self):
        from muchniklab import generate_corpus

        levels = [jaskowski_algebra(n).algebra for n in (1, 2, 3)]
        for phi in generate_corpus(2):
            values = [is_valid(phi, lat, "heyting").ok for lat in levels]
            for higher, lower in zip(values[1:], values):
                if higher:
                    assert lower, f"nesting violated for {phi}"


class TestWitnesses:
    def test_wlem_schedule(self):
        wlem = parse("~p | ~~p")
        assert is_valid(wlem, jaskowski_algebra(1).algebra, "heyting").ok
        assert is_valid(wlem, jaskowski_algebra(2).algebra, "heyting").ok
        res = is_valid(wlem, jaskowski_algebra(3).algebra, "heyting")
        assert res.status == "invalid" and res.witness == {"p": 1}

    def test_lem_refuted_at_level_two(self):
        res = is_valid(parse("p | ~p"), jaskowski_algebra(2).algebra, "heyting")
        assert res.status == "invalid" and res.witness == {"p": 1}

    def test_describe_element(self):
        assert describe_element(1, 0) == "0"
        assert describe_element(2, 1) == "m"
        assert describe_element(3, 1) == "(m,0)"
        assert describe_element(3, 9) == "1"
        assert describe_element(4, 1000) == "1"
        assert describe_element(4, 1) == "((m,0),(0,0),(0,0))"
        with pytest.raises(ValueError):
            describe_element(2, 5)
