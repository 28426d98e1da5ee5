import dataclasses
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from losrcert.behaviors import Behavior
from losrcert.certify import (CertificateError, NonBracketingError, bisect_threshold, certify,
                              solve_feasibility, verify_certificate)
from losrcert.constraints import compile_system, shared_bit_system
from losrcert.exact import SQRT2
from losrcert.inequalities import analytic_threshold, ghz_inequality_slack
from losrcert.io import certificate_from_json, certificate_to_json
from losrcert.quantum import ghz_behavior, ghz_parties
from losrcert.simplex import phase_one


def _farkas_ok(A, b, y):
    A = np.asarray(A, dtype=object)
    aty = [sum(A[i, j] * y[i] for i in range(len(b))) for j in range(A.shape[1])]
    return all(v <= 0 for v in aty) and sum(bi * yi for bi, yi in zip(b, y)) > 0


def test_phase_one_small_cases():
    r = phase_one([[1, 1, 0], [0, 1, 1]], [Fraction(1), Fraction(1, 2)])
    assert r.feasible
    assert r.x[0] + r.x[1] == 1 and r.x[1] + r.x[2] == Fraction(1, 2)
    A, b = [[1, 1], [1, 1]], [Fraction(1), Fraction(2)]
    r = phase_one(A, b)
    assert not r.feasible and _farkas_ok(A, b, r.y)
    A, b = [[1, -1]], [Fraction(-3)]
    assert phase_one(A, b).feasible
    A, b = [[1, 1]], [Fraction(-1)]
    r = phase_one(A, b)
    assert not r.feasible and _farkas_ok(A, b, r.y)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_phase_one_exact_and_float_agree(seed):
    rng = np.random.default_rng(seed)
    m, n = rng.integers(1, 5), rng.integers(1, 6)
    A = rng.integers(-2, 3, size=(m, n))
    b = [Fraction(int(v)) for v in rng.integers(-3, 4, size=m)]
    ex, fl = phase_one(A, b), phase_one(A, b, exact=False)
    assert ex.feasible == fl.feasible
    if ex.feasible:
        assert all(x >= 0 for x in ex.x)
        assert all(sum(A[i, j] * ex.x[j] for j in range(n)) == b[i] for i in range(m))
    else:
        assert _farkas_ok(A, b, ex.y)


def test_ideal_ghz_certified(ghz3_ideal_solution):
    system, r = ghz3_ideal_solution
    assert not r.feasible and r.exact and r.backend == "highs"
    cert = r.certificate
    assert verify_certificate(cert, system)
    assert 0 < float(2 * SQRT2 - 2) - float(cert.value) < 1e-6
    assert cert.evaluate(system.p) == cert.value


def test_tampered_certificate_rejected(ghz3_ideal_solution):
    system, r = ghz3_ideal_solution
    cert = r.certificate
    bad = dataclasses.replace(cert, constant=cert.constant + 1)
    assert not verify_certificate(bad, system)
    flipped = tuple(-v for v in cert.y)
    assert not verify_certificate(dataclasses.replace(cert, y=flipped), system)
    y = list(cert.y)
    k = next(i for i, t in enumerate(system.tags) if t == "normalization")
    y[k] += 1
    assert not verify_certificate(dataclasses.replace(cert, y=tuple(y)), system)


def test_certificate_does_not_transfer_to_half_noise(ghz3_ideal_solution, ghz3_half_solution):
    _, r = ghz3_ideal_solution
    half_system, half = ghz3_half_solution
    assert half.feasible and half.residual <= 1e-9
    assert not verify_certificate(r.certificate, half_system)
    assert r.certificate.evaluate(half_system.p) < 0


def test_dimension_mismatch_raises(ghz3_ideal_solution):
    _, r = ghz3_ideal_solution
    with pytest.raises(CertificateError):
        verify_certificate(r.certificate, shared_bit_system(3))


def test_certificate_json_round_trip(ghz3_ideal_solution):
    system, r = ghz3_ideal_solution
    back = certificate_from_json(certificate_to_json(r.certificate))
    assert back.y == r.certificate.y and back.value == r.certificate.value
    assert verify_certificate(back, system)


def test_uniform_feasible(ghz3_scenario, ghz3_k2):
    infs, s = ghz3_k2
    r = certify(ghz3_scenario, Behavior.uniform(ghz_parties(3)), infs, structure=s)
    assert r.feasible and r.certificate is None


def test_shared_bit_float_mode_escalates():
    system = shared_bit_system(4)
    system = dataclasses.replace(system, p=system.p.to_float(), mode="float")
    r = solve_feasibility(system, exact=False)
    assert not r.feasible and verify_certificate(r.certificate, system)


def test_non_bracketing():
    with pytest.raises(NonBracketingError) as e:
        bisect_threshold(lambda p: (False, None), 0.01)
    assert (e.value.lo_verdict, e.value.hi_verdict) == ("feasible", "feasible")


def test_bisection_on_analytic_witness():
    def decide(p):
        return ghz_inequality_slack(ghz_behavior(3, p), 3) > 0, p
    res = bisect_threshold(decide, 1e-4)
    assert res.lo < analytic_threshold(3) <= res.hi
    assert res.width <= Fraction(1, 10**4)
    assert res.certificate == res.hi
    assert all(p.denominator & (p.denominator - 1) == 0 for p, _ in res.history)
