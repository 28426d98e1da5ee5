import time

import pytest

from losrcert.inflation import (TooLargeError, enumerate_c1_pairs, enumerate_c2_pairs, enumerate_inflations,
                                lp_inflations, raw_wiring_count)
from losrcert.network import Inflation, canonical_scenario, validate_inflation

from test_network import TRIANGLE, hexagon


def labels(pairs):
    return {(g1.label(), g2.label()) for g1, g2, _ in pairs}


@pytest.mark.parametrize("n,k,count", [(3, 1, 1), (3, 2, 2), (4, 2, 6)])
def test_class_counts(n, k, count):
    assert len(enumerate_inflations(canonical_scenario(n), k)) == count


def test_tetrahedron_multiplicities():
    classes = enumerate_inflations(canonical_scenario(4), 2)
    assert sorted(c.multiplicity for c in classes) == [1, 1, 3, 3, 12, 12]
    assert sum(c.multiplicity for c in classes) == len(lp_inflations(canonical_scenario(4), 2)) == 32


@pytest.mark.parametrize("n,k", [(3, 2), (4, 2), (3, 3)])
def test_raw_counts_partition(n, k):
    sc = canonical_scenario(n)
    for symmetric in (True, False):
        classes = enumerate_inflations(sc, k, symmetric=symmetric)
        assert sum(c.raw_count for c in classes) == raw_wiring_count(sc, k)
        assert all(validate_inflation(m) for c in classes for m in c.members)


def test_brute_force_raw_count_triangle():
    # every column of every source independently permuted, source copies fixed by the first column
    assert raw_wiring_count(canonical_scenario(3), 2) == 2 ** 3
    assert raw_wiring_count(canonical_scenario(4), 2) == 4 ** 4


def test_first_class_is_identity():
    sc = canonical_scenario(3)
    assert enumerate_inflations(sc, 2)[0].representative == Inflation.identity(sc, 2)


def test_cap():
    with pytest.raises(TooLargeError):
        enumerate_inflations(canonical_scenario(4), 3, max_raw_wirings=1000)


def test_enumeration_is_fast():
    t = time.perf_counter()
    enumerate_inflations(canonical_scenario(4), 2)
    assert time.perf_counter() - t < 10


def test_c1_double_triangle_full_behavior():
    pairs = labels(enumerate_c1_pairs(Inflation.identity(TRIANGLE, 2), TRIANGLE))
    assert pairs == {("(A^1,B^1,C^1)", "(A,B,C)"), ("(A^2,B^2,C^2)", "(A,B,C)")}


def test_c1_hexagon_pairs_only():
    pairs = enumerate_c1_pairs(hexagon(), TRIANGLE)
    got = labels(pairs)
    assert ("(A^1,B^1)", "(A,B)") in got
    assert all(len(g1.parties) == 2 for g1, _, _ in pairs)
    assert len(pairs) == 6
    for g1, g2, iso in pairs:
        for p, q in iso.party_bijection:
            assert TRIANGLE.parties[p[0]] == TRIANGLE.parties[q[0]]


def test_c2_copy_swap():
    for inf in (Inflation.identity(TRIANGLE, 2), hexagon()):
        bij = {tuple(iso.party_bijection) for _, _, iso in enumerate_c2_pairs(inf, inf)}
        swap = tuple(((j, k), (j, 1 - k)) for j in range(3) for k in range(2))
        ident = tuple(((j, k), (j, k)) for j in range(3) for k in range(2))
        assert swap in bij and ident in bij


def test_c2_hexagon_double_triangle_restriction():
    dt = Inflation.identity(TRIANGLE, 2)
    pairs = enumerate_c2_pairs(hexagon(), dt)
    target = {((0, 0), (0, 0)), ((1, 0), (1, 0))}
    assert any(target <= set(iso.party_bijection) for _, _, iso in pairs)
