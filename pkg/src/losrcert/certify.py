"""Feasibility decisions, Farkas certificates and noise sweeps.

Sign convention: a certificate is a vector ``y`` over the rows of
``A q = b(P)`` with ``A^T y <= 0`` componentwise and ``b(P)^T y > 0``.  If
``q >= 0`` solved the system then ``0 >= (A^T y)^T q = b^T y > 0``, which is
absurd.  Since ``b`` is affine in ``P`` the same ``y`` defines a witness
``w(P') = c_0 + sum_k c_k P'_k`` with ``w(P') <= 0`` for every ``P'`` whose
system is feasible.

Two solver routes exist.  Small systems go through the exact tableau
simplex of :mod:`losrcert.simplex`.  Large ones are solved with HiGHS in
floating point; its dual vector is rounded to rationals and repaired
(positive reduced costs are absorbed into the normalization multipliers)
before an exact check, so no infeasible verdict rests on floating point.
"""
from __future__ import annotations

import hashlib
import logging
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog

from .behaviors import Behavior
from .constraints import ConstraintSystem, SystemStructure, build_structure, compile_system
from .exact import QSqrt2, exact_sign
from .network import Inflation, Scenario
from .simplex import phase_one

log = logging.getLogger(__name__)

NEAR_BOUNDARY = 1e-7
SMALL_SYSTEM = 250_000           # rows * columns handled by the dense exact simplex
DUAL_GRID = 2 ** 36
QUICK_SECONDS = 2.0              # presolve settles easy points; harder ones go to the slack LP
FEASIBLE_TOL = 1e-9


class CertificateError(ValueError):
    pass


class NumericalFailure(RuntimeError):
    pass


class NonBracketingError(ValueError):
    def __init__(self, msg, lo_verdict, hi_verdict):
        super().__init__(msg)
        self.lo_verdict = lo_verdict
        self.hi_verdict = hi_verdict


def structure_digest(s: SystemStructure) -> str:
    m = s.matrix.tocsr()
    h = hashlib.sha256()
    h.update(f"{m.shape[0]}x{m.shape[1]}".encode())
    for arr in (m.indptr, m.indices, m.data):
        h.update(np.ascontiguousarray(arr, dtype=np.int64).tobytes())
    h.update("\n".join(s.tags).encode())
    h.update("\n".join(str(c) for c in s.const).encode())
    h.update(repr(s.p_map).encode())
    return h.hexdigest()


@dataclass
class Certificate:
    """Farkas vector plus the witness it induces on the observed behavior."""

    y: Tuple[Fraction, ...]
    witness: Dict[int, Fraction]
    constant: Fraction
    value: object                       # exact w(P), Fraction or QSqrt2
    parties: Tuple[Tuple[str, int, int], ...]
    order: int
    inflations: Tuple[tuple, ...]       # wiring of each block
    cuts: Tuple[tuple, ...]             # party copies of each block
    n_rows: int
    n_vars: int
    digest: str

    def evaluate(self, p: Behavior):
        """Witness value on another behavior over the same parties."""
        flat = p.flat()
        total = self.constant
        for k, c in self.witness.items():
            total = total + c * flat[k]
        return total


def witness_from_dual(s: SystemStructure, y: Sequence[Fraction]) -> Tuple[Dict[int, Fraction], Fraction]:
    coeffs: Dict[int, Fraction] = {}
    const = Fraction(0)
    for yr, c, m in zip(y, s.const, s.p_map):
        if yr == 0:
            continue
        const += yr * c
        if m:
            for k in m:
                coeffs[k] = coeffs.get(k, Fraction(0)) + yr
    return {k: v for k, v in sorted(coeffs.items()) if v != 0}, const


def _exact_aty(s: SystemStructure, y: Sequence[Fraction]) -> List[Fraction]:
    """``A^T y`` in exact arithmetic using a common denominator."""
    den = 1
    for v in y:
        den = den * v.denominator // _gcd(den, v.denominator)
    num = [int(v * den) for v in y]
    csc = s.matrix.tocsc()
    out = []
    ip, ix, data = csc.indptr, csc.indices, csc.data
    for j in range(csc.shape[1]):
        acc = 0
        for t in range(ip[j], ip[j + 1]):
            acc += int(data[t]) * num[ix[t]]
        out.append(Fraction(acc, den))
    return out


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return a


def make_certificate(system: ConstraintSystem, y: Sequence[Fraction]) -> Certificate:
    s = system.structure
    y = tuple(Fraction(v) for v in y)
    coeffs, const = witness_from_dual(s, y)
    value = sum((yr * br for yr, br in zip(y, system.rhs_exact()) if yr != 0), Fraction(0))
    return Certificate(
        y=y, witness=coeffs, constant=const, value=value,
        parties=tuple((p.name, p.n_inputs, p.n_outputs) for p in s.scenario.parties),
        order=s.order,
        inflations=tuple(b.inflation.wiring for b in s.blocks),
        cuts=tuple(b.parties for b in s.blocks),
        n_rows=s.n_rows, n_vars=s.n_vars, digest=structure_digest(s))


def verify_certificate(cert: Certificate, system: ConstraintSystem) -> bool:
    """Exact check of ``A^T y <= 0`` and ``b(P)^T y > 0`` against ``system``.

    Every quantity is recomputed from the system and the dual vector; the
    stored witness and value are only cross-checked.
    """
    s = system.structure
    if len(cert.y) != s.n_rows:
        raise CertificateError(f"certificate has {len(cert.y)} multipliers, system has {s.n_rows} rows")
    if cert.n_vars != s.n_vars:
        raise CertificateError(f"certificate built for {cert.n_vars} variables, system has {s.n_vars}")
    y = [Fraction(v) for v in cert.y]
    if any(v > 0 for v in _exact_aty(s, y)):
        return False
    b = system.rhs_exact()
    value = sum((yr * br for yr, br in zip(y, b) if yr != 0), Fraction(0))
    if exact_sign(value) <= 0:
        return False
    coeffs, const = witness_from_dual(s, y)
    if coeffs != cert.witness or const != cert.constant:
        return False
    return True


def repair_dual(s: SystemStructure, y_float: np.ndarray, grid: int = DUAL_GRID) -> List[Fraction]:
    """Round a numerical dual to rationals and restore ``A^T y <= 0`` exactly.

    Each variable sits in exactly one normalization row with coefficient 1,
    so lowering that row's multiplier by the largest positive reduced cost
    in the row cancels every violation at the price of ``b`` shrinking by
    the same amount.
    """
    y = [Fraction(int(round(v * grid)), grid) for v in y_float]
    aty = _exact_aty(s, y)
    norm_rows = [r for r, t in enumerate(s.tags) if t == "normalization"]
    csr = s.matrix.tocsr()
    covered = np.zeros(s.n_vars, dtype=bool)
    for r in norm_rows:
        cols = csr.indices[csr.indptr[r]:csr.indptr[r + 1]]
        covered[cols] = True
        worst = max(aty[c] for c in cols)
        if worst > 0:
            y[r] -= worst
    if not covered.all():
        raise CertificateError("some variables lie in no normalization row")
    return y


# ---------------------------------------------------------------------------


@dataclass
class FeasibilityResult:
    feasible: bool
    backend: str
    objective: float                    # L1 violation of the pinned rows (0 when feasible)
    certificate: Optional[Certificate] = None
    point: Optional[np.ndarray] = None  # witness point (float) when feasible
    exact_point: Optional[list] = None
    residual: float = 0.0               # primal residual when feasible, max A^T y when not
    near_boundary: bool = False
    exact: bool = False
    seconds: float = 0.0
    notes: List[str] = field(default_factory=list)

    @property
    def verdict(self) -> str:
        return "feasible" if self.feasible else "infeasible"


def _slack_rows(s: SystemStructure) -> np.ndarray:
    return np.array([t in ("C1", "independence") for t in s.tags])


def _highs(system: ConstraintSystem):
    s = system.structure
    mask = _slack_rows(s)
    k = int(mask.sum())
    E = sp.csr_matrix((np.ones(k), (np.where(mask)[0], np.arange(k))), shape=(s.n_rows, k))
    A = sp.hstack([s.matrix.astype(float), E, -E]).tocsr()
    cost = np.r_[np.zeros(s.n_vars), np.ones(2 * k)]
    b = system.rhs_float()
    res = linprog(cost, A_eq=A, b_eq=b, bounds=(0, None), method="highs-ipm")
    if res.status != 0:
        raise NumericalFailure(f"HiGHS failed: {res.message}")
    return res, b


def solve_feasibility(system: ConstraintSystem, *, exact: Optional[bool] = None,
                      backend: str = "auto", near_tol: float = NEAR_BOUNDARY) -> FeasibilityResult:
    """Decide whether the inflation system admits a nonnegative solution.

    ``exact`` defaults to the behavior's mode.  With the simplex backend the
    exact answer is exact on both sides.  With HiGHS an infeasible verdict
    always carries an exactly verified certificate, while a feasible verdict
    carries the numerical point and its residual.
    """
    s = system.structure
    if exact is None:
        exact = system.p.exact
    if backend == "auto":
        backend = "simplex" if s.n_rows * s.n_vars <= SMALL_SYSTEM else "highs"
    t0 = time.perf_counter()
    if backend == "simplex":
        out = _solve_simplex(system, exact)
    elif backend == "highs":
        out = _solve_highs(system, exact, near_tol)
    else:
        raise ValueError(f"unknown backend {backend!r}")
    out.seconds = time.perf_counter() - t0
    if not out.feasible and out.certificate is not None and not verify_certificate(out.certificate, system):
        raise CertificateError("emitted certificate failed exact verification")
    return out


def _solve_simplex(system: ConstraintSystem, exact: bool) -> FeasibilityResult:
    s = system.structure
    b = system.rhs_exact() if exact else list(system.rhs_float())
    res = phase_one(s.matrix, b, exact=exact)
    if res.feasible:
        x = np.array([float(v) for v in res.x])
        resid = float(np.abs(s.matrix @ x - system.rhs_float()).max()) if s.n_rows else 0.0
        return FeasibilityResult(True, "simplex", 0.0, point=x,
                                 exact_point=list(res.x) if exact else None,
                                 residual=resid, exact=exact)
    if exact:
        cert = make_certificate(system, res.y)
        return FeasibilityResult(False, "simplex", float(res.objective), certificate=cert,
                                 residual=0.0, exact=True)
    y = np.array([float(v) for v in res.y])
    ry = repair_dual(s, y)
    cert = make_certificate(system, ry)
    if exact_sign(cert.value) <= 0:
        # too close to call in floating point: redo exactly
        out = _solve_simplex(system, True)
        out.near_boundary = True
        return out
    return FeasibilityResult(False, "simplex", float(res.objective), certificate=cert,
                             residual=float((s.matrix.T @ y).max()), exact=False)


def _quick_feasible(system: ConstraintSystem) -> Optional[Tuple[np.ndarray, float]]:
    """Zero-objective solve; returns the point when it checks out to 1e-9, else ``None``."""
    s = system.structure
    b = system.rhs_float()
    res = linprog(np.zeros(s.n_vars), A_eq=s.matrix.astype(float), b_eq=b, bounds=(0, None),
                  method="highs-ds", options={"time_limit": QUICK_SECONDS})
    if res.status != 0:
        return None
    q = res.x
    resid = float(np.abs(s.matrix @ q - b).max())
    if resid > FEASIBLE_TOL or q.min() < -FEASIBLE_TOL:
        return None
    return q, resid


def _solve_highs(system: ConstraintSystem, exact: bool, near_tol: float) -> FeasibilityResult:
    s = system.structure
    quick = _quick_feasible(system)
    if quick is not None:
        notes = ["feasible side not certified exactly for HiGHS-sized systems"] if exact else []
        return FeasibilityResult(True, "highs", 0.0, point=quick[0], residual=quick[1],
                                 exact=False, notes=notes)
    res, b = _highs(system)
    obj = float(res.fun)
    near = FEASIBLE_TOL < obj <= near_tol
    if obj > FEASIBLE_TOL:
        y = np.asarray(res.eqlin.marginals, dtype=float)
        ry = repair_dual(s, y)
        cert = make_certificate(system, ry)
        if exact_sign(cert.value) > 0:
            return FeasibilityResult(False, "highs", obj, certificate=cert,
                                     residual=float((s.matrix.T @ y).max()),
                                     near_boundary=near, exact=True)
        if not near:
            raise NumericalFailure(
                f"violation {obj:.3e} reported but the repaired dual has w(P) = {float(cert.value):.3e}")
    q = res.x[:s.n_vars]
    resid = float(np.abs(s.matrix @ q - b).max())
    notes = []
    if near:
        notes.append("within the near-boundary band; verdict rests on floating point")
    if exact:
        notes.append("feasible side not certified exactly for HiGHS-sized systems")
    return FeasibilityResult(True, "highs", obj, point=q, residual=resid,
                             near_boundary=near, exact=False, notes=notes)


def certify(scenario: Scenario, p: Behavior, inflations: Sequence[Inflation], **kwargs) -> FeasibilityResult:
    structure = kwargs.pop("structure", None)
    system = compile_system(scenario, p, inflations, structure=structure)
    return solve_feasibility(system, **kwargs)


# ---------------------------------------------------------------------------


@dataclass
class SweepResult:
    lo: Fraction                       # feasible endpoint
    hi: Fraction                       # certified infeasible endpoint
    certificate: Optional[Certificate]
    history: List[Tuple[Fraction, str]]

    @property
    def width(self):
        return self.hi - self.lo


def bisect_threshold(is_infeasible: Callable[[Fraction], Tuple[bool, object]],
                     tolerance: float, lo=Fraction(0), hi=Fraction(1)) -> SweepResult:
    """Dyadic bisection on a monotone verdict.

    ``is_infeasible(p)`` returns ``(verdict, payload)``; the payload of the
    final infeasible endpoint is kept as the certificate.
    """
    lo, hi = Fraction(lo), Fraction(hi)
    history = []
    lo_bad, _ = is_infeasible(lo)
    hi_bad, payload = is_infeasible(hi)
    history += [(lo, "infeasible" if lo_bad else "feasible"),
                (hi, "infeasible" if hi_bad else "feasible")]
    if lo_bad or not hi_bad:
        raise NonBracketingError(
            f"endpoints do not bracket: p={lo} is {history[0][1]}, p={hi} is {history[1][1]}",
            history[0][1], history[1][1])
    while hi - lo > Fraction(tolerance):
        mid = (lo + hi) / 2
        bad, pl = is_infeasible(mid)
        history.append((mid, "infeasible" if bad else "feasible"))
        log.info("p=%s %s", mid, history[-1][1])
        if bad:
            hi, payload = mid, pl
        else:
            lo = mid
    return SweepResult(lo, hi, payload, history)


def sweep_noise(family: Callable[[Fraction], Behavior], scenario: Scenario,
                inflations: Sequence[Inflation], tolerance: float,
                lo=Fraction(0), hi=Fraction(1), **solve_kwargs) -> SweepResult:
    """Critical noise of a family, certified infeasible at the upper end."""
    structure = build_structure(scenario, [(inf, inf.party_copies) for inf in inflations])

    def decide(p):
        r = certify(scenario, family(p), inflations, structure=structure, **solve_kwargs)
        return (not r.feasible), r.certificate

    return bisect_threshold(decide, tolerance, lo, hi)
