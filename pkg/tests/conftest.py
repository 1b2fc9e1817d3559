import pytest

from muchniklab import downset_lattice, make_poset


@pytest.fixture(scope="session")
def dd_base():
    """Four points a, b below two incomparable upper bounds c, d."""
    return make_poset(
        ["a", "b", "c", "d"], [("a", "c"), ("a", "d"), ("b", "c"), ("b", "d")]
    )


@pytest.fixture(scope="session")
def diamond_poset():
    return make_poset(
        ["0", "a", "b", "t"], [("0", "a"), ("0", "b"), ("a", "t"), ("b", "t")]
    )


@pytest.fixture(scope="session")
def dd_lattice(dd_base):
    return downset_lattice(dd_base)


@pytest.fixture(scope="session")
def bool22():
    return downset_lattice(make_poset(["a", "b"]))


def brute_force_brouwer_arrow(lat, a, b):
    """Minimum of {c : a v c >= b} found by scanning, no Birkhoff masks."""
    candidates = [c for c in range(lat.n) if lat.leq(b, lat.join(a, c))]
    least = [c for c in candidates if all(lat.leq(c, d) for d in candidates)]
    assert len(least) == 1, "candidate set must have a minimum"
    return least[0]


def brute_force_heyting_arrow(lat, a, b):
    candidates = [c for c in range(lat.n) if lat.leq(lat.meet(a, c), b)]
    greatest = [c for c in candidates if all(lat.leq(d, c) for d in candidates)]
    assert len(greatest) == 1
    return greatest[0]
