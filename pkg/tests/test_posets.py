import json
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from muchniklab import (
    CycleError,
    SizeBudgetExceeded,
    UnknownLabel,
    downset_lattice,
    enumerate_posets,
    join_irreducibles,
    make_poset,
    poset_from_json,
    poset_isomorphic,
)
from muchniklab.posets import Poset, antichain_poset, bits, chain_poset


def random_poset(rng, n):
    pairs = []
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < 0.4:
                pairs.append((f"p{i}", f"p{j}"))
    return make_poset([f"p{i}" for i in range(n)], pairs)


class TestMakePoset:
    def test_singleton(self):
        p = make_poset(["a"])
        assert p.n == 1
        assert p.leq(0, 0)

    def test_double_diamond_base(self, dd_base):
        assert dd_base.leq(0, 2) and dd_base.leq(1, 3)
        assert not dd_base.leq(2, 3) and not dd_base.leq(3, 2)
        assert sorted(dd_base.cover_pairs()) == [(0, 2), (0, 3), (1, 2), (1, 3)]

    def test_cycle_rejected(self):
        with pytest.raises(CycleError):
            make_poset(["a", "b"], [("a", "b"), ("b", "a")])

    def test_transitive_cycle_rejected(self):
        with pytest.raises(CycleError):
            make_poset(["a", "b", "c"], [("a", "b"), ("b", "c"), ("c", "a")])

    def test_unknown_label(self):
        with pytest.raises(UnknownLabel):
            make_poset(["a"], [("a", "z")])

    def test_duplicate_labels(self):
        with pytest.raises(UnknownLabel):
            make_poset(["a", "a"])

    def test_point_order_preserved(self):
        p = make_poset(["z", "a", "m"], [("a", "z")])
        assert p.points == ("z", "a", "m")

    def test_closure_computed(self):
        p = make_poset(["a", "b", "c"], [("a", "b"), ("b", "c")])
        assert p.leq(0, 2)

    def test_size_cap(self):
        with pytest.raises(SizeBudgetExceeded):
            make_poset([f"p{i}" for i in range(20)], max_points=10)


class TestClosures:
    def test_up_closure_bottom(self, diamond_poset):
        assert diamond_poset.up_closure(0b0001) == 0b1111

    def test_up_closure_pair(self, diamond_poset):
        # {a, b} closes to {a, b, t}
        assert diamond_poset.up_closure(0b0110) == 0b1110

    def test_up_closure_empty(self, diamond_poset):
        assert diamond_poset.up_closure(0) == 0

    def test_up_closure_oracle(self):
        rng = random.Random(7)
        for _ in range(25):
            p = random_poset(rng, 6)
            mask = rng.randrange(1 << p.n)
            expected = 0
            for i in range(p.n):
                if any(p.leq(j, i) for j in bits(mask)):
                    expected |= 1 << i
            assert p.up_closure(mask) == expected

    def test_up_closure_properties(self):
        rng = random.Random(3)
        for _ in range(25):
            p = random_poset(rng, 6)
            a = rng.randrange(1 << p.n)
            b = a | rng.randrange(1 << p.n)
            ca, cb = p.up_closure(a), p.up_closure(b)
            assert ca & a == a                      # extensive
            assert p.up_closure(ca) == ca           # idempotent
            assert cb & ca == ca                    # monotone

    def test_mask_validation(self, diamond_poset):
        with pytest.raises(UnknownLabel):
            diamond_poset.up_closure(1 << 4)


class TestExtrema:
    def test_maximal_chain(self):
        p = chain_poset(3)
        assert p.maximal_elements(0b111) == 0b100

    def test_maximal_antichain(self):
        p = antichain_poset(2)
        assert p.maximal_elements(0b11) == 0b11

    def test_maximal_dd_subset(self, dd_base):
        # {a, b, c}: a < c and b < c, so only c is maximal
        mask = dd_base.mask_from_labels(["a", "b", "c"])
        assert dd_base.maximal_elements(mask) == dd_base.mask_from_labels(["c"])

    def test_empty(self, dd_base):
        assert dd_base.maximal_elements(0) == 0

    def test_least_and_greatest(self, diamond_poset):
        assert diamond_poset.least_element() == 0
        assert diamond_poset.greatest_element() == 3
        assert antichain_poset(2).least_element() is None


class TestDownsets:
    def test_singleton(self):
        assert len(make_poset(["a"]).downsets()) == 2

    def test_antichain(self):
        assert len(antichain_poset(2).downsets()) == 4

    def test_dd_base(self, dd_base):
        assert len(dd_base.downsets()) == 7

    def test_oracle_small(self):
        rng = random.Random(11)
        for _ in range(20):
            p = random_poset(rng, 6)
            expected = sorted(
                m for m in range(1 << p.n) if p.is_down_closed(m)
            )
            assert sorted(p.downsets()) == expected

    def test_cap(self):
        with pytest.raises(SizeBudgetExceeded):
            antichain_poset(8).downsets(cap=100)


class TestIsomorphism:
    def test_identity(self, dd_base):
        assert poset_isomorphic(dd_base, dd_base) == [0, 1, 2, 3]

    def test_chain_vs_antichain(self):
        assert poset_isomorphic(chain_poset(2), antichain_poset(2)) is None

    def test_relabelled(self):
        rng = random.Random(5)
        for _ in range(20):
            p = random_poset(rng, 6)
            perm = list(range(p.n))
            rng.shuffle(perm)
            q_up = [0] * p.n
            for i in range(p.n):
                for j in bits(p.up[i]):
                    q_up[perm[i]] |= 1 << perm[j]
            q = Poset([f"q{i}" for i in range(p.n)], q_up)
            mapping = poset_isomorphic(p, q)
            assert mapping is not None
            for i in range(p.n):
                for j in range(p.n):
                    assert p.leq(i, j) == q.leq(mapping[i], mapping[j])

    def test_nonisomorphic_same_size(self):
        p = make_poset(["a", "b", "c"], [("a", "b")])
        q = make_poset(["a", "b", "c"], [("a", "b"), ("a", "c")])
        assert poset_isomorphic(p, q) is None

    def test_round_trip_with_duality(self):
        # J of the downset lattice recovers the poset, for every small poset
        rng = random.Random(13)
        for _ in range(15):
            p = random_poset(rng, 6)
            jp, _ = join_irreducibles(downset_lattice(p))
            assert poset_isomorphic(jp, p) is not None


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**15 - 1), st.randoms(use_true_random=False))
def test_canonical_key_invariant(bits_seed, rng):
    n = 6
    pairs = []
    k = 0
    for i in range(n):
        for j in range(i + 1, n):
            if bits_seed >> k & 1:
                pairs.append((f"p{i}", f"p{j}"))
            k += 1
    p = make_poset([f"p{i}" for i in range(n)], pairs)
    perm = list(range(n))
    rng.shuffle(perm)
    q_up = [0] * n
    for i in range(n):
        for j in bits(p.up[i]):
            q_up[perm[i]] |= 1 << perm[j]
    q = Poset([f"p{i}" for i in range(n)], q_up)
    assert p.canonical_key() == q.canonical_key()


class TestEnumeration:
    def test_counts(self):
        # known census of posets up to isomorphism
        assert [len(enumerate_posets(n)) for n in range(1, 6)] == [1, 2, 5, 16, 63]

    def test_pairwise_nonisomorphic(self):
        ps = enumerate_posets(4)
        for i, p in enumerate(ps):
            for q in ps[i + 1 :]:
                assert poset_isomorphic(p, q) is None

    def test_deterministic(self):
        enumerate_posets.cache_clear()
        first = [p.canonical_key() for p in enumerate_posets(5)]
        enumerate_posets.cache_clear()
        second = [p.canonical_key() for p in enumerate_posets(5)]
        assert first == second


class TestSerialization:
    def test_json_round_trip(self, dd_base):
        doc = dd_base.to_json()
        again = poset_from_json(json.loads(json.dumps(doc)))
        assert poset_isomorphic(dd_base, again) is not None
        assert again.points == dd_base.points

    def test_dot_has_cover_edges_only(self, diamond_poset):
        dot = diamond_poset.to_dot()
        assert "n0 -> n1" in dot and "n0 -> n2" in dot
        assert "n0 -> n3" not in dot  # transitive edge omitted
        assert dot.startswith("digraph")
