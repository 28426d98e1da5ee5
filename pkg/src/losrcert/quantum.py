"""Dense quantum simulation of the GHZ and W strategies.

All measurements are dichotomic projective measurements along a Bloch axis
in the X-Z plane: the observable at angle ``theta`` is
``cos(theta) Z + sin(theta) X`` and output 0 is its +1 eigenvector.  The
projectors ``(I +/- n.sigma)/2`` only involve ``cos`` and ``sin`` of the
angle, so for angles in ``{0, +-pi/4, pi/2}`` every probability is an
element of Q(sqrt 2) and exact mode never leaves that field.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product as iproduct
from typing import Dict, List, Sequence, Tuple

import numpy as np

from .behaviors import Behavior
from .exact import QSqrt2, SQRT2
from .network import PartySpec

_HALF = Fraction(1, 2)


class OracleError(ValueError):
    pass


# --- exact trigonometry on multiples of pi/4 -------------------------------

def _trig_exact(eighths: int) -> Tuple[QSqrt2, QSqrt2]:
    """``(cos, sin)`` of ``eighths * pi/4`` in Q(sqrt 2)."""
    h = SQRT2 / 2
    table = [(QSqrt2(1), QSqrt2(0)), (h, h), (QSqrt2(0), QSqrt2(1)), (-h, h),
             (QSqrt2(-1), QSqrt2(0)), (-h, -h), (QSqrt2(0), QSqrt2(-1)), (h, -h)]
    return table[eighths % 8]


@dataclass(frozen=True)
class Axis:
    """Measurement direction ``k * pi/4`` (exact) or a float angle."""

    angle: float
    quarter_turns: int = None  # multiple of pi/4 when exact arithmetic is possible

    @staticmethod
    def quarter(k: int) -> "Axis":
        return Axis(k * math.pi / 4, k)

    def projector(self, outcome: int, exact: bool) -> np.ndarray:
        sgn = 1 - 2 * outcome
        if exact:
            if self.quarter_turns is None:
                raise OracleError("exact mode needs an angle that is a multiple of pi/4")
            c, s = _trig_exact(self.quarter_turns)
            m = np.empty((2, 2), dtype=object)
            m[0, 0] = (1 + sgn * c) * _HALF
            m[1, 1] = (1 - sgn * c) * _HALF
            m[0, 1] = m[1, 0] = sgn * s * _HALF
            return m
        c, s = math.cos(self.angle), math.sin(self.angle)
        return 0.5 * np.array([[1 + sgn * c, sgn * s], [sgn * s, 1 - sgn * c]])


RECTILINEAR = Axis.quarter(0)
HADAMARD = Axis.quarter(2)


@dataclass(frozen=True)
class NoisyState:
    """Dense density operator on ``n_qubits`` qubits with its noise parameter."""

    n_qubits: int
    rho: np.ndarray
    p: float

    def check(self, tol: float = 1e-10):
        if abs(np.trace(self.rho) - 1) > tol:
            raise OracleError("density operator trace differs from 1")
        if not np.allclose(self.rho, self.rho.conj().T, atol=tol):
            raise OracleError("density operator is not Hermitian")
        if np.linalg.eigvalsh(self.rho).min() < -tol:
            raise OracleError("density operator is not positive semidefinite")
        return self


def ghz_state(n: int, p: float) -> NoisyState:
    """``p |GHZ_n><GHZ_n| + (1-p) I / 2**n``."""
    _check_unit(p, "noise")
    d = 2 ** n
    psi = np.zeros(d)
    psi[0] = psi[-1] = 1 / math.sqrt(2)
    rho = p * np.outer(psi, psi) + (1 - p) * np.eye(d) / d
    return NoisyState(n, rho.astype(complex), float(p)).check()


def w_state() -> NoisyState:
    psi = np.zeros(8)
    psi[[1, 2, 4]] = 1 / math.sqrt(3)
    return NoisyState(3, np.outer(psi, psi).astype(complex), 1.0).check()


def _ghz_entries(n: int, p) -> Dict[Tuple[int, int], object]:
    """Nonzero entries of the noisy GHZ density operator (exact scalars)."""
    d = 2 ** n
    noise = (1 - p) * Fraction(1, d)
    out = {(i, i): noise for i in range(d)}
    out[(0, 0)] = out[(0, 0)] + p * _HALF
    out[(d - 1, d - 1)] = out[(d - 1, d - 1)] + p * _HALF
    out[(0, d - 1)] = p * _HALF
    out[(d - 1, 0)] = p * _HALF
    return out


def _bits(i: int, n: int) -> Tuple[int, ...]:
    return tuple((i >> (n - 1 - k)) & 1 for k in range(n))


def _born_sparse(entries: Dict[Tuple[int, int], object], n: int, projs: Sequence[np.ndarray]):
    """``Tr(rho * (P_1 x ... x P_n))`` from the nonzero entries of ``rho``."""
    total = Fraction(0)
    for (i, j), v in entries.items():
        bi, bj = _bits(i, n), _bits(j, n)
        term = v
        for k in range(n):
            term = term * projs[k][bj[k], bi[k]]
            if term == 0:
                break
        total = total + term
    return total


def _born_dense(rho: np.ndarray, projs: Sequence[np.ndarray]) -> float:
    op = projs[0]
    for pr in projs[1:]:
        op = np.kron(op, pr)
    return float(np.real(np.sum(rho.T * op)))


def strategy_behavior(parties: Sequence[PartySpec], axes: Sequence[Sequence[Axis]], *,
                      state: NoisyState = None, entries=None, exact: bool = False) -> Behavior:
    """Behavior from per-party, per-input measurement axes on a state.

    Exact mode needs ``entries`` (nonzero density-operator entries); float
    mode needs the dense ``state``.
    """
    n = len(parties)
    ins = tuple(p.n_inputs for p in parties)
    table = np.empty(ins + (2,) * n, dtype=object if exact else float)
    proj = [[[ax.projector(o, exact) for o in (0, 1)] for ax in axes[j]] for j in range(n)]
    for x in iproduct(*map(range, ins)):
        for a in iproduct((0, 1), repeat=n):
            ps = [proj[j][x[j]][a[j]] for j in range(n)]
            if exact:
                v = _born_sparse(entries, n, ps)
                if isinstance(v, QSqrt2) and v.b == 0:
                    v = v.a
                table[x + a] = v
            else:
                table[x + a] = _born_dense(state.rho, ps)
    return Behavior(parties, table, "rational" if exact else "float")


def _check_unit(v, what: str):
    if not 0 <= float(v) <= 1:
        raise OracleError(f"{what} must lie in [0, 1], got {v}")


def ghz_parties(n: int) -> List[PartySpec]:
    """Alice (2 inputs), Bob (3 inputs) and ``n-2`` Charlies (2 inputs each)."""
    if n < 3:
        raise OracleError(f"GHZ family needs n >= 3, got {n}")
    charlies = ["C"] if n == 3 else [f"C{k}" for k in range(1, n - 1)]
    return [PartySpec("A", 2), PartySpec("B", 3)] + [PartySpec(c, 2) for c in charlies]


def ghz_axes(n: int) -> List[List[Axis]]:
    alice = [Axis.quarter(0), Axis.quarter(2)]
    bob = [Axis.quarter(1), Axis.quarter(-1), RECTILINEAR]
    charlie = [RECTILINEAR, HADAMARD]
    return [alice, bob] + [charlie] * (n - 2)


def ghz_behavior(n: int, p=1, exact: bool = True) -> Behavior:
    """Noisy GHZ_n statistics under the fixed Bell/Same strategy.

    Exact mode accepts ``p`` as int, ``Fraction`` or ``QSqrt2``; a float
    ``p`` forces float mode.
    """
    _check_unit(p, "noise")
    parties = ghz_parties(n)
    if isinstance(p, float):
        exact = False
    if exact:
        return strategy_behavior(parties, ghz_axes(n), entries=_ghz_entries(n, p), exact=True)
    return strategy_behavior(parties, ghz_axes(n), state=ghz_state(n, float(p)))


def fidelity_of(p, n: int = 3):
    """``<GHZ_n| rho_p |GHZ_n> = p + (1 - p) / 2**n``."""
    _check_unit(p, "noise")
    if isinstance(p, float):
        return p + (1 - p) / 2 ** n
    return p + (1 - p) * Fraction(1, 2 ** n)


def noise_of(f, n: int = 3):
    """Inverse of :func:`fidelity_of`; needs ``f >= 1/2**n``."""
    floor = Fraction(1, 2 ** n)
    if not float(floor) - 1e-15 <= float(f) <= 1:
        raise OracleError(f"fidelity must lie in [1/2**{n}, 1], got {f}")
    if isinstance(f, float):
        return (f - 1 / 2 ** n) / (1 - 1 / 2 ** n)
    return (f - floor) / (1 - floor)


# --- W state ---------------------------------------------------------------

def w_axes(m: int) -> List[List[Axis]]:
    """Input 0 of Alice/Charlie and input 0 of Bob are rectilinear (game (iii) uses X=1, Y=0, Z=1).

    Alice/Charlie input ``k >= 1`` measure at ``(k-1) pi / M``; Bob input
    ``k >= 1`` at ``pi - (2k-1) pi / (2M)``.  These are the chained-Bell
    optimal angles for the singlet-like state ``(|01>+|10>)/sqrt 2``.
    """
    ac = [RECTILINEAR] + [Axis((k - 1) * math.pi / m) for k in range(1, m + 1)]
    bob = [RECTILINEAR] + [Axis(math.pi - (2 * k - 1) * math.pi / (2 * m)) for k in range(1, m + 1)]
    return [ac, bob, ac]


def w_behavior(m: int) -> Behavior:
    """W-state statistics (float mode) for the three-game construction."""
    if m < 2:
        raise OracleError(f"BKP parameter must be >= 2, got {m}")
    parties = [PartySpec("A", m + 1), PartySpec("B", m + 1), PartySpec("C", m + 1)]
    return strategy_behavior(parties, w_axes(m), state=w_state())


# --- hidden-signalling test vectors ----------------------------------------

def svetlichny_lhvm_behavior() -> Behavior:
    """Observed statistics of the fine-tuned model ``c = b = lambda``, ``a = b (-1)**(x y)``.

    Alice's response uses Bob's input, so the averaged table is signalling
    (e.g. ``<A_1 C_z>`` flips sign between ``y=0`` and ``y=1``).
    """
    parties = ghz_parties(3)

    def fn(x, a):
        total = Fraction(0)
        for lam in (0, 1):
            want = ((lam + x[0] * x[1]) % 2, lam, lam)
            if a == want:
                total += _HALF
        return total

    return Behavior.from_function(parties, fn)


def svetlichny_ns_behavior() -> Behavior:
    """Nonsignalling box with the same scores as the fine-tuned model.

    On ``z=1`` Charlie outputs a uniform bit ``mu``; Alice and Bob then share
    a PR box (``mu=0``) or an anti-PR box (``mu=1``) on ``y<2`` and equal bits
    on ``y=2``.  On ``z=0`` Charlie copies Alice on ``y<2`` and all agree on
    ``y=2``.
    """
    parties = ghz_parties(3)
    q = Fraction(1, 4)

    def fn(x, out):
        xa, y, z = x
        a, b, c = out
        if z == 1:
            if y == 2:
                return q if a == b else Fraction(0)
            return q if (a ^ b) == ((xa * y) ^ c) else Fraction(0)
        if y == 2:
            return _HALF if a == b == c else Fraction(0)
        return q if c == a else Fraction(0)

    return Behavior.from_function(parties, fn)
