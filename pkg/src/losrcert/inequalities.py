"""Closed-form scores of the GHZ-type witness and of the BKP chained games.

GHZ-family behaviors list Alice (inputs 0/1), Bob (inputs 0/1/2) and then
the Charlies (inputs 0/1), all dichotomic.  The collective Charlie event
``C~_1 = 1`` is "every Charlie uses input 1 and the product of their +-1
values is +1".
"""
from __future__ import annotations

from fractions import Fraction
from typing import Dict, Optional, Sequence, Tuple

from .behaviors import Behavior, BehaviorError, ConditioningError, Event, condition_expectation
from .exact import exact_sign

_RANGE_TOL = 1e-9


class SingularityError(ZeroDivisionError):
    pass


def _check_ghz_structure(b: Behavior, n: int):
    want = [2, 3] + [2] * (n - 2)
    if n < 3 or b.n != n or list(b.input_shape) != want or any(o != 2 for o in b.output_shape):
        raise BehaviorError(
            f"expected the GHZ_{n} input structure {want} with binary outputs, got "
            f"{list(b.input_shape)} / {list(b.output_shape)}")


def _in_range(v, lo, hi, what):
    f = float(v)
    if not lo - _RANGE_TOL <= f <= hi + _RANGE_TOL:
        raise ArithmeticError(f"{what} = {f} outside [{lo}, {hi}]")
    return v


def collective_charlie(b: Behavior) -> Event:
    charlies = b.names[2:]
    return Event({c: 1 for c in charlies}, parity=1)


def charlie_product(b: Behavior):
    """Unconditioned ``<C~_1>``: expectation of the product of all Charlies at input 1."""
    return condition_expectation(b, {c: 1 for c in b.names[2:]})


def i_bell_conditioned(b: Behavior, given: Optional[Event] = None):
    """CHSH combination of Alice and Bob conditioned on ``given`` (default ``C~_1 = 1``)."""
    if given is None:
        given = collective_charlie(b)
    A, B = b.names[0], b.names[1]
    terms = [condition_expectation(b, {A: x, B: y}, given) for x in (0, 1) for y in (0, 1)]
    v = terms[0] + terms[1] + terms[2] - terms[3]
    return _in_range(v, -4, 4, "I_Bell")


def i_same(b: Behavior, n: int):
    """Chain of rectilinear correlators ``A_0 B_2``, ``B_2 C_0[1]``, ``C_0[i] C_0[i+1]``."""
    _check_ghz_structure(b, n)
    names = b.names
    pairs = [((names[0], 0), (names[1], 2)), ((names[1], 2), (names[2], 0))]
    pairs += [((names[k], 0), (names[k + 1], 0)) for k in range(2, n - 1)]
    v = sum((condition_expectation(b, dict(pr)) for pr in pairs), Fraction(0) if b.exact else 0.0)
    return _in_range(v, -(n - 1), n - 1, "I_same")


def ghz_inequality_terms(b: Behavior, n: int) -> Dict[str, object]:
    """Left side, right side, slack and the component scores of the witness."""
    _check_ghz_structure(b, n)
    c1 = charlie_product(b)
    denom = 1 + c1
    if (b.exact and exact_sign(denom) == 0) or (not b.exact and abs(float(denom)) <= _RANGE_TOL):
        raise SingularityError("<C~_1> = -1 makes the witness singular")
    bell = i_bell_conditioned(b)
    same = i_same(b, n)
    lhs = bell + 4 * same / denom
    rhs = 6 + (4 * (n - 2) - 4 * c1) / denom
    return {"i_bell": bell, "i_same": same, "c1": c1, "lhs": lhs, "rhs": rhs, "slack": lhs - rhs}


def ghz_inequality_slack(b: Behavior, n: int):
    """``LHS - RHS`` of the N-party witness; positive means violated."""
    return ghz_inequality_terms(b, n)["slack"]


def analytic_threshold(n: int = 3) -> float:
    """Noise level where the witness flips for the GHZ family (``<C~_1> = 0``)."""
    # slack(p) = p (2 sqrt2 + 4(n-1)) - (4n - 2)
    import math
    return (4 * n - 2) / (2 * math.sqrt(2) + 4 * (n - 1))


def bkp_terms(m: int) -> Sequence[Tuple[int, int, bool]]:
    """``(x, y, same)`` per term: ``same`` asks ``P(A=B)``, otherwise ``P(A!=B)``."""
    if m < 2:
        raise ValueError(f"BKP parameter must be >= 2, got {m}")
    out = [(1, m, True), (m, m, False)]
    for i in range(1, m):
        for j in (0, 1):
            out.append((i + j, i, False))
    return out


def bkp_score(b: Behavior, m: int, given: Optional[Event] = None,
              pair: Tuple[str, str] = None):
    """Chained BKP score over inputs ``1..m`` of ``pair`` (default first two parties).

    With ``given`` every probability is conditioned on that event.
    """
    if pair is None:
        pair = (b.names[0], b.names[1])
    A, B = pair
    for name in pair:
        j = b.index(name)
        if b.parties[j].n_inputs < m + 1 or b.parties[j].n_outputs != 2:
            raise BehaviorError(f"party {name} needs inputs 0..{m} and binary outputs")
    total = Fraction(0) if b.exact else 0.0
    half = Fraction(1, 2) if b.exact else 0.5
    for x, y, same in bkp_terms(m):
        corr = condition_expectation(b, {A: x, B: y}, given)
        total = total + half * (1 + corr if same else 1 - corr)
    return _in_range(total, 0, 2 * m, "I_BKP")
