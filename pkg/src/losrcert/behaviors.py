"""Conditional probability tables P(outputs | inputs) over ordered parties.

Tables are dense numpy arrays of shape ``(x_1, ..., x_n, a_1, ..., a_n)``:
inputs outer, outputs inner, parties in listed order.  Flattening in C order
gives the documented flat index used by the JSON format and by certificates.

Dichotomic observables take the value ``(-1)**output``: output 0 is +1 and
output 1 is -1.  This is the only place that convention is applied.

Two modes exist.  ``float`` tables hold float64.  ``rational`` tables hold
exact scalars (``Fraction`` or :class:`~losrcert.exact.QSqrt2`) in an object
array and every check is exact.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product as iproduct
from typing import Callable, Dict, Iterable, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from .exact import QSqrt2, to_exact
from .network import PartySpec

DEFAULT_TOL = 1e-9

PartyKey = Union[str, int]


class BehaviorError(ValueError):
    pass


class SignallingError(BehaviorError):
    pass


class ConditioningError(BehaviorError):
    """Raised when conditioning on an event of probability zero."""


def _is_zero(x, exact: bool, tol: float) -> bool:
    return x == 0 if exact else abs(x) <= tol


class Behavior:
    """Immutable probability table with validated nonnegativity and normalization."""

    def __init__(self, parties: Sequence[PartySpec], table, mode: Optional[str] = None,
                 tol: float = DEFAULT_TOL):
        self.parties: Tuple[PartySpec, ...] = tuple(parties)
        names = [p.name for p in self.parties]
        if len(set(names)) != len(names):
            raise BehaviorError(f"duplicate party names {names}")
        arr = np.asarray(table)
        if mode is None:
            mode = "rational" if arr.dtype == object else "float"
        if mode not in ("float", "rational"):
            raise BehaviorError(f"unknown mode {mode!r}")
        shape = self.input_shape + self.output_shape
        if arr.size != int(np.prod(shape, dtype=np.int64)):
            raise BehaviorError(f"table has {arr.size} entries, expected shape {shape}")
        arr = arr.reshape(shape)
        if mode == "float":
            arr = np.array(arr, dtype=float)
        else:
            arr = np.array([to_exact(v) for v in arr.ravel()], dtype=object).reshape(shape)
        arr.setflags(write=False)
        self.table = arr
        self.mode = mode
        self._validate(tol)

    # shape helpers --------------------------------------------------------
    @property
    def n(self) -> int:
        return len(self.parties)

    @property
    def names(self) -> Tuple[str, ...]:
        return tuple(p.name for p in self.parties)

    @property
    def input_shape(self) -> Tuple[int, ...]:
        return tuple(p.n_inputs for p in self.parties)

    @property
    def output_shape(self) -> Tuple[int, ...]:
        return tuple(p.n_outputs for p in self.parties)

    @property
    def exact(self) -> bool:
        return self.mode == "rational"

    def flat(self) -> np.ndarray:
        return self.table.reshape(-1)

    def index(self, key: PartyKey) -> int:
        if isinstance(key, (int, np.integer)):
            if not 0 <= key < self.n:
                raise BehaviorError(f"party index {key} out of range")
            return int(key)
        try:
            return self.names.index(key)
        except ValueError:
            raise BehaviorError(f"unknown party {key!r}; have {self.names}") from None

    def _validate(self, tol: float):
        t = self.table
        if self.exact:
            if any(v < 0 for v in t.ravel()):
                raise BehaviorError("negative probability")
        elif np.any(t < -tol) or not np.all(np.isfinite(t)):
            raise BehaviorError("negative or non-finite probability")
        n = self.n
        sums = t.sum(axis=tuple(range(n, 2 * n))) if n else t
        for v in np.ravel(sums):
            if not _is_zero(v - 1, self.exact, tol):
                raise BehaviorError(f"unnormalized table: output sum {v} for some input")

    # conversions ----------------------------------------------------------
    def to_float(self) -> "Behavior":
        if not self.exact:
            return self
        return Behavior(self.parties, np.vectorize(float, otypes=[float])(self.table), "float")

    def to_rational(self, max_denominator: int = 10**9) -> "Behavior":
        """Exact copy; float entries are rounded to denominators <= ``max_denominator``.

        Rounding can break normalization by ~1e-9, so each input's output
        distribution is renormalized exactly on its largest entry.
        """
        if self.exact:
            return self
        n = self.n
        t = np.array([to_exact(v, max_denominator) for v in self.table.ravel()],
                     dtype=object).reshape(self.table.shape)
        n_out = int(np.prod(self.output_shape))
        flat = t.reshape(-1, n_out)
        for row in flat:
            s = sum(row, Fraction(0))
            if s != 1:
                k = max(range(n_out), key=lambda c: row[c])
                row[k] = row[k] + (1 - s)
        return Behavior(self.parties, flat.reshape(t.shape), "rational")

    def __eq__(self, other):
        if not isinstance(other, Behavior):
            return NotImplemented
        return (self.parties == other.parties and self.mode == other.mode
                and bool(np.all(self.table == other.table)))

    __hash__ = None

    def allclose(self, other: "Behavior", atol: float = 1e-12) -> bool:
        a = self.to_float().table
        b = other.to_float().table
        return self.parties == other.parties and np.allclose(a, b, rtol=0, atol=atol)

    def __repr__(self):
        return f"Behavior({list(self.names)}, mode={self.mode})"

    # constructors ---------------------------------------------------------
    @staticmethod
    def from_function(parties: Sequence[PartySpec], fn: Callable, exact: bool = True) -> "Behavior":
        """Build from ``fn(inputs_tuple, outputs_tuple) -> probability``."""
        parties = tuple(parties)
        ins = tuple(p.n_inputs for p in parties)
        outs = tuple(p.n_outputs for p in parties)
        vals = [fn(x, a) for x in iproduct(*map(range, ins)) for a in iproduct(*map(range, outs))]
        arr = np.array(vals, dtype=object if exact else float)
        return Behavior(parties, arr.reshape(ins + outs), "rational" if exact else "float")

    @staticmethod
    def uniform(parties: Sequence[PartySpec], exact: bool = True) -> "Behavior":
        parties = tuple(parties)
        total = int(np.prod([p.n_outputs for p in parties]))
        w = Fraction(1, total) if exact else 1.0 / total
        return Behavior.from_function(parties, lambda x, a: w, exact)

    @staticmethod
    def deterministic(parties: Sequence[PartySpec], responses: Sequence[Sequence[int]],
                      exact: bool = True) -> "Behavior":
        """Local deterministic point: party ``j`` answers ``responses[j][x_j]``."""
        one, zero = (Fraction(1), Fraction(0)) if exact else (1.0, 0.0)

        def fn(x, a):
            return one if all(responses[j][x[j]] == a[j] for j in range(len(a))) else zero

        return Behavior.from_function(parties, fn, exact)

    @staticmethod
    def mixture(weights: Sequence, behaviors: Sequence["Behavior"]) -> "Behavior":
        if not behaviors:
            raise BehaviorError("empty mixture")
        parties = behaviors[0].parties
        if any(b.parties != parties for b in behaviors):
            raise BehaviorError("mixture of behaviors over different parties")
        exact = all(b.exact for b in behaviors) and all(
            not isinstance(w, float) for w in weights)
        if exact:
            tab = sum((w * b.table for w, b in zip(weights, behaviors)),
                      np.zeros(behaviors[0].table.shape, dtype=object) + Fraction(0))
        else:
            tab = sum(float(w) * b.to_float().table for w, b in zip(weights, behaviors))
        return Behavior(parties, tab, "rational" if exact else "float")


def _signal_free_axes(b: Behavior, dropped: Sequence[int], tol: float) -> bool:
    """True iff the marginal on the complement of ``dropped`` ignores their inputs."""
    n = b.n
    if not dropped:
        return True
    summed = b.table.sum(axis=tuple(n + j for j in dropped))
    ref = summed[tuple(0 if j in dropped else slice(None) for j in range(n))]
    for xs in iproduct(*(range(b.parties[j].n_inputs) for j in dropped)):
        if not any(xs):
            continue
        sel = [slice(None)] * n
        for j, x in zip(dropped, xs):
            sel[j] = x
        diff = summed[tuple(sel)] - ref
        if b.exact:
            if any(v != 0 for v in np.ravel(diff)):
                return False
        elif np.max(np.abs(diff.astype(float)), initial=0.0) > tol:
            return False
    return True


def check_nonsignalling(b: Behavior, tolerance: float = DEFAULT_TOL) -> bool:
    """Every party-subset marginal is independent of the other parties' inputs.

    It suffices to test, for each single party, that summing out its output
    removes all dependence on its input.  ``tolerance`` is ignored for exact
    tables.
    """
    return all(_signal_free_axes(b, [j], tolerance) for j in range(b.n))


def marginalize(b: Behavior, keep: Sequence[PartyKey], tolerance: float = DEFAULT_TOL) -> Behavior:
    """Marginal behavior on ``keep`` (in that order).

    Dropped parties' inputs are fixed to 0 after checking that the kept
    marginal does not depend on them.
    """
    idx = [b.index(k) for k in keep]
    if len(set(idx)) != len(idx):
        raise BehaviorError("repeated party in keep list")
    dropped = [j for j in range(b.n) if j not in idx]
    if not _signal_free_axes(b, dropped, tolerance):
        raise SignallingError(
            f"marginal on {[b.names[j] for j in idx]} depends on inputs of dropped parties")
    n = b.n
    t = b.table.sum(axis=tuple(n + j for j in dropped)) if dropped else b.table
    t = t[tuple(0 if j in dropped else slice(None) for j in range(n))]
    kept_sorted = [j for j in range(n) if j in idx]
    m = len(kept_sorted)
    order = [kept_sorted.index(j) for j in idx]
    t = np.transpose(t, order + [m + o for o in order])
    return Behavior([b.parties[j] for j in idx], t, b.mode)


def product(b1: Behavior, b2: Behavior) -> Behavior:
    """Independent composition; parties of ``b1`` then ``b2``."""
    if set(b1.names) & set(b2.names):
        raise BehaviorError(f"overlapping parties {set(b1.names) & set(b2.names)}")
    exact = b1.exact and b2.exact
    t1 = b1.table if exact else b1.to_float().table
    t2 = b2.table if exact else b2.to_float().table
    outer = np.multiply.outer(t1, t2)
    n1, n2 = b1.n, b2.n
    # axes of outer: x1, a1, x2, a2 -> x1, x2, a1, a2
    perm = (list(range(n1)) + list(range(2 * n1, 2 * n1 + n2))
            + list(range(n1, 2 * n1)) + list(range(2 * n1 + n2, 2 * (n1 + n2))))
    return Behavior(b1.parties + b2.parties, np.transpose(outer, perm),
                    "rational" if exact else "float")


@dataclass(frozen=True)
class Event:
    """An output event at fixed inputs.

    ``settings`` fixes each involved party's input.  Either ``outputs`` pins
    every involved party's output, or ``parity`` (+1/-1) asks for the product
    of their dichotomic values.
    """

    settings: Mapping[PartyKey, int]
    outputs: Optional[Mapping[PartyKey, int]] = None
    parity: Optional[int] = None

    def __post_init__(self):
        if (self.outputs is None) == (self.parity is None):
            raise BehaviorError("event needs exactly one of outputs or parity")


def _sign(o: int) -> int:
    return 1 - 2 * o


def _joint(b: Behavior, settings: Dict[int, int], tolerance: float):
    """Joint output distribution of the parties in ``settings`` at those inputs."""
    parties = sorted(settings)
    dropped = [j for j in range(b.n) if j not in settings]
    if not _signal_free_axes(b, dropped, tolerance):
        raise SignallingError("expectation depends on inputs of uninvolved parties")
    n = b.n
    t = b.table.sum(axis=tuple(n + j for j in dropped)) if dropped else b.table
    t = t[tuple(settings.get(j, 0) for j in range(n))]
    return parties, t


def probability(b: Behavior, event: Event, tolerance: float = DEFAULT_TOL):
    settings = {b.index(k): v for k, v in event.settings.items()}
    parties, t = _joint(b, settings, tolerance)
    total = 0 if b.exact else 0.0
    outs = None if event.outputs is None else {b.index(k): v for k, v in event.outputs.items()}
    for a in iproduct(*(range(b.parties[j].n_outputs) for j in parties)):
        if _event_holds(parties, a, outs, event.parity):
            total = total + t[a]
    return total


def _event_holds(parties, a, outs, parity) -> bool:
    if outs is not None:
        return all(a[parties.index(j)] == o for j, o in outs.items())
    val = 1
    for o in a:
        val *= _sign(o)
    return val == parity


def condition_expectation(b: Behavior, observable: Mapping[PartyKey, int],
                          given: Optional[Event] = None, sign: int = 1,
                          tolerance: float = DEFAULT_TOL):
    """``sign * <prod_j (-1)**a_j>`` at the given inputs, conditioned on ``given``.

    Raises :class:`ConditioningError` when ``given`` has probability zero.
    """
    obs = {b.index(k): v for k, v in observable.items()}
    for j in obs:
        if b.parties[j].n_outputs != 2:
            raise BehaviorError(f"party {b.names[j]} is not dichotomic")
    settings = dict(obs)
    gset: Dict[int, int] = {}
    gout = None
    if given is not None:
        gset = {b.index(k): v for k, v in given.settings.items()}
        for j, v in gset.items():
            if j in settings and settings[j] != v:
                raise BehaviorError(f"conflicting inputs for party {b.names[j]}")
            settings[j] = v
        if given.outputs is not None:
            gout = {b.index(k): v for k, v in given.outputs.items()}
    parties, t = _joint(b, settings, tolerance)
    zero = Fraction(0) if b.exact else 0.0
    num, den = zero, zero
    gparties = sorted(gset)
    for a in iproduct(*(range(b.parties[j].n_outputs) for j in parties)):
        if given is not None:
            ga = tuple(a[parties.index(j)] for j in gparties)
            if not _event_holds(gparties, ga, gout, given.parity):
                continue
        p = t[a]
        val = 1
        for j in obs:
            val *= _sign(a[parties.index(j)])
        num = num + val * p
        den = den + p
    if given is None:
        return sign * num
    if (b.exact and den == 0) or (not b.exact and abs(den) <= tolerance):
        raise ConditioningError("conditioning event has zero probability")
    return sign * (num / den)
