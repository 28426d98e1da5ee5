from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from losrcert.behaviors import (Behavior, BehaviorError, ConditioningError, Event, SignallingError,
                                check_nonsignalling, condition_expectation, marginalize, probability, product)
from losrcert.exact import SQRT2
from losrcert.network import PartySpec
from losrcert.quantum import ghz_behavior

A, B, C = PartySpec("A", 2), PartySpec("B", 3), PartySpec("C", 2)


def random_local(rng, parties, k=3, exact=True):
    pts = [Behavior.deterministic(parties, [rng.integers(0, p.n_outputs, size=p.n_inputs).tolist()
                                            for p in parties], exact) for _ in range(k)]
    w = rng.integers(1, 6, size=k)
    weights = [Fraction(int(x), int(w.sum())) for x in w] if exact else list(w / w.sum())
    return Behavior.mixture(weights, pts)


def test_validation():
    with pytest.raises(BehaviorError):
        Behavior([A], np.array([[0.5, 0.6], [0.5, 0.5]]))
    with pytest.raises(BehaviorError):
        Behavior([A], np.array([[1.5, -0.5], [0.5, 0.5]]))
    with pytest.raises(BehaviorError):
        Behavior([A, PartySpec("A")], np.full((2, 2, 2, 2), 0.25))
    b = Behavior.uniform([A, B])
    with pytest.raises(ValueError):
        b.table[0, 0, 0, 0] = 1


def test_flat_index_order():
    b = Behavior.deterministic([A, B], [[0, 1], [1, 0, 1]])
    # inputs outer (x, y), outputs inner (a, b), C order
    flat = b.flat()
    k = ((1 * 3 + 2) * 2 + 1) * 2 + 1
    assert flat[k] == 1


def test_uniform_product_is_nonsignalling():
    assert check_nonsignalling(product(Behavior.uniform([A]), Behavior.uniform([B])))
    assert product(Behavior.uniform([A]), Behavior.uniform([B])) == Behavior.uniform([A, B])


def test_signalling_table_detected():
    # A outputs Bob's input parity
    def fn(x, a):
        return Fraction(1, 2) if a[0] == x[1] % 2 else Fraction(0)
    b = Behavior.from_function([A, B], fn)
    assert not check_nonsignalling(b)
    with pytest.raises(SignallingError):
        marginalize(b, ["A"])


def test_ghz_marginal_is_chsh_like():
    ab = marginalize(ghz_behavior(3, 1), ["A", "B"])
    for x in range(2):
        for y in range(3):
            for a in range(2):
                assert sum(ab.table[x, y, a, :]) == Fraction(1, 2)
    assert ab.table[0, 0, 0, 0] == (2 + SQRT2) / 8


def test_marginalize_nothing_and_reorder():
    b = ghz_behavior(3, Fraction(1, 3))
    assert marginalize(b, ["A", "B", "C"]) == b
    swapped = marginalize(b, ["C", "A", "B"])
    assert swapped.names == ("C", "A", "B")
    assert swapped.table[1, 0, 2, 0, 1, 1] == b.table[0, 2, 1, 1, 1, 0]
    with pytest.raises(BehaviorError):
        marginalize(b, ["A", "A"])
    with pytest.raises(BehaviorError):
        marginalize(b, ["D"])


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6))
def test_marginalize_product_recovers_factors(seed):
    rng = np.random.default_rng(seed)
    b1, b2 = random_local(rng, [A, B]), random_local(rng, [C])
    p = product(b1, b2)
    assert marginalize(p, ["A", "B"]) == b1
    assert marginalize(p, ["C"]) == b2


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6))
def test_marginalization_commutes(seed):
    rng = np.random.default_rng(seed)
    b = random_local(rng, [A, B, C])
    assert marginalize(marginalize(b, ["C", "A"]), ["A"]) == marginalize(b, ["A"])


def test_product_overlap_rejected():
    with pytest.raises(BehaviorError):
        product(Behavior.uniform([A]), Behavior.uniform([A]))


def test_product_of_two_tsirelson_boxes():
    from losrcert.quantum import Axis, strategy_behavior, ghz_state
    import math
    phi = np.zeros((4, 4))
    phi[0, 0] = phi[0, 3] = phi[3, 0] = phi[3, 3] = 0.5
    from losrcert.quantum import NoisyState
    st_ = NoisyState(2, phi.astype(complex), 1.0)
    box1 = strategy_behavior([PartySpec("A1"), PartySpec("B1")],
                             [[Axis.quarter(0), Axis.quarter(2)], [Axis.quarter(1), Axis.quarter(-1)]], state=st_)
    box2 = strategy_behavior([PartySpec("A2"), PartySpec("B2")],
                             [[Axis.quarter(0), Axis.quarter(2)], [Axis.quarter(1), Axis.quarter(-1)]], state=st_)
    p = product(box1, box2)
    assert p.input_shape == (2, 2, 2, 2)
    chsh = sum(s * condition_expectation(p, {"A1": x, "B1": y})
               for x, y, s in [(0, 0, 1), (0, 1, 1), (1, 0, 1), (1, 1, -1)])
    assert abs(chsh - 2 * math.sqrt(2)) < 1e-12
    assert check_nonsignalling(p)


def test_conditioned_expectations_ghz():
    b = ghz_behavior(3, 1)
    given = Event({"C": 1}, outputs={"C": 0})
    assert condition_expectation(b, {"A": 0, "B": 0}, given) == SQRT2 / 2
    assert condition_expectation(b, {"C": 1}) == 0


def test_deterministic_all_plus():
    b = Behavior.deterministic([A, B, C], [[0, 0], [0, 0, 0], [0, 0]])
    given = Event({"C": 1}, outputs={"C": 0})
    for x in range(2):
        for y in range(3):
            assert condition_expectation(b, {"A": x, "B": y}, given) == 1


def test_zero_probability_conditioning():
    b = Behavior.deterministic([A, B, C], [[0, 0], [0, 0, 0], [0, 0]])
    with pytest.raises(ConditioningError):
        condition_expectation(b, {"A": 0, "B": 0}, Event({"C": 1}, outputs={"C": 1}))
    bf = b.to_float()
    with pytest.raises(ConditioningError):
        condition_expectation(bf, {"A": 0}, Event({"C": 1}, outputs={"C": 1}))


def test_probability_and_parity_events():
    b = ghz_behavior(3, 1)
    assert probability(b, Event({"A": 0, "B": 2}, parity=1)) == 1
    assert probability(b, Event({"A": 0, "B": 2, "C": 0}, parity=1)) == Fraction(1, 2)
    assert probability(b, Event({"C": 0}, outputs={"C": 0})) == Fraction(1, 2)
    with pytest.raises(BehaviorError):
        Event({"C": 0})


def test_rational_round_trip():
    b = ghz_behavior(3, 0.7, exact=False)
    r = b.to_rational()
    assert r.exact and r.allclose(b, atol=1e-9)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6))
def test_transitivity_bound(seed):
    # <A0 C0> >= <A0 B2> + <B2 C0> - 1 for any behavior whose marginals are well defined
    rng = np.random.default_rng(seed)
    b = random_local(rng, [A, B, C], k=4)
    ac = condition_expectation(b, {"A": 0, "C": 0})
    ab = condition_expectation(b, {"A": 0, "B": 2})
    bc = condition_expectation(b, {"B": 2, "C": 0})
    assert ac >= ab + bc - 1
