import pytest
from hypothesis import given, strategies as st

from losrcert.network import (Inflation, InvalidScenarioError, PartySpec, Scenario, SubNetwork,
                              canonical_scenario, subnetwork_isomorphism, validate_inflation)

TRIANGLE = canonical_scenario(3, [PartySpec("A", 2), PartySpec("B", 3), PartySpec("C", 2)])


def hexagon(sc=TRIANGLE):
    # S_A feeds (B, C), S_B feeds (A, C), S_C feeds (A, B); ring A1-B1-C1-A2-B2-C2-A1
    return Inflation(sc, 2, (((0, 0), (1, 1)), ((0, 1), (1, 0)), ((0, 0), (1, 1))))


def test_canonical_triangle_attachment():
    assert TRIANGLE.sources == ("S_A", "S_B", "S_C")
    assert TRIANGLE.attachment == ((1, 2), (0, 2), (0, 1))
    assert TRIANGLE.party_sources == ((1, 2), (0, 2), (0, 1))


def test_tetrahedron_has_three_party_sources():
    sc = canonical_scenario(4)
    assert all(len(a) == 3 for a in sc.attachment)
    assert len(sc.automorphisms) == 24


def test_n2_is_degenerate(caplog):
    sc = canonical_scenario(2)
    assert sc.degenerate
    assert sc.attachment == ((1,), (0,))
    assert "N=2" in caplog.text


@pytest.mark.parametrize("n", [0, 1])
def test_too_small(n):
    with pytest.raises(InvalidScenarioError):
        canonical_scenario(n)


def test_duplicate_names_rejected():
    with pytest.raises(InvalidScenarioError):
        Scenario((PartySpec("A"), PartySpec("A")), ("S",), ((0, 1),))
    with pytest.raises(InvalidScenarioError):
        PartySpec("A", 0)


def test_validate_inflation_examples():
    assert validate_inflation(Inflation.trivial(TRIANGLE))
    assert validate_inflation(Inflation.identity(TRIANGLE, 2))
    assert validate_inflation(hexagon())
    broken = Inflation(TRIANGLE, 2, (((0, 0), (1, 1)), ((0, 0), (1, 1)), ((0, 0), (0, 1))))
    assert not validate_inflation(broken)


perm2 = st.permutations([0, 1])


@given(st.integers(0, 2), perm2, st.integers(0, 2), perm2)
def test_validate_invariant_under_relabelling(party, pperm, source, sperm):
    inf = hexagon()
    wiring = [list(map(list, rows)) for rows in inf.wiring]
    for i, att in enumerate(TRIANGLE.attachment):
        if party in att:
            col = att.index(party)
            for row in wiring[i]:
                row[col] = pperm[row[col]]
    wiring[source] = [wiring[source][sperm[k]] for k in range(2)]
    relabelled = Inflation(TRIANGLE, 2, tuple(tuple(map(tuple, r)) for r in wiring))
    assert validate_inflation(relabelled)


def test_each_copy_sees_its_base_sources():
    for inf in (Inflation.identity(TRIANGLE, 2), hexagon()):
        for (j, k), links in inf.links.items():
            assert tuple(s for s, _ in links) == TRIANGLE.party_sources[j]


def test_subnetwork_sources_are_derived():
    g = SubNetwork(hexagon(), ((0, 0), (1, 0)))
    assert len(g.sources) == 3
    with pytest.raises(ValueError):
        SubNetwork(hexagon(), ((0, 0), (0, 0)))


def test_hexagon_pair_isomorphic_to_base_pair():
    g1 = SubNetwork(hexagon(), ((0, 0), (1, 0)))
    g2 = SubNetwork(TRIANGLE, ((0, 0), (1, 0)))
    iso = subnetwork_isomorphism(g1, g2)
    assert iso is not None
    assert iso.party_bijection == (((0, 0), (0, 0)), ((1, 0), (1, 0)))
    assert len(iso.source_bijection) == 3


def test_hexagon_triple_not_isomorphic_to_triangle():
    g1 = SubNetwork(hexagon(), ((0, 0), (1, 0), (2, 0)))
    g2 = SubNetwork(TRIANGLE, ((0, 0), (1, 0), (2, 0)))
    assert len(g1.sources) == 4 and len(g2.sources) == 3
    assert subnetwork_isomorphism(g1, g2) is None


def test_order_matters():
    g1 = SubNetwork(TRIANGLE, ((0, 0), (1, 0)))
    g2 = SubNetwork(TRIANGLE, ((1, 0), (0, 0)))
    assert subnetwork_isomorphism(g1, g2) is None


@given(st.lists(st.sampled_from([(j, k) for j in range(3) for k in range(2)]), min_size=1, max_size=4, unique=True),
       st.lists(st.sampled_from([(j, k) for j in range(3) for k in range(2)]), min_size=1, max_size=4, unique=True))
def test_isomorphism_reflexive_and_symmetric(p1, p2):
    g1, g2 = SubNetwork(hexagon(), p1), SubNetwork(Inflation.identity(TRIANGLE, 2), p2)
    assert subnetwork_isomorphism(g1, g1) is not None
    assert (subnetwork_isomorphism(g1, g2) is None) == (subnetwork_isomorphism(g2, g1) is None)
