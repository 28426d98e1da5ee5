"""Phase-1 tableau simplex with Bland's rule, exact or floating point.

Only feasibility of ``A x = b, x >= 0`` is decided.  Rows are sign-flipped
so that ``b >= 0`` and one artificial variable per row forms the starting
basis.  At the phase-1 optimum the simplex multipliers ``u`` satisfy
``A'^T u <= 0`` and ``b'^T u = `` optimum, so when the optimum is positive
``y = D u`` (``D`` the row flips) is a Farkas vector for the original
system: ``A^T y <= 0`` and ``b^T y > 0``.

Entries may be ``int``, ``Fraction`` or ``QSqrt2``; Bland's rule makes
termination unconditional in exact mode.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence

import numpy as np
import scipy.sparse as sp


class SimplexError(RuntimeError):
    """Iteration guard exceeded (possible cycling in float mode)."""


@dataclass
class SimplexResult:
    feasible: bool
    objective: object            # phase-1 optimum (sum of artificials)
    x: Optional[List]            # primal point when feasible
    y: List                      # phase-1 multipliers mapped back to the original rows
    iterations: int


def _dense(A) -> np.ndarray:
    if sp.issparse(A):
        A = A.toarray()
    return np.asarray(A)


def phase_one(A, b: Sequence, exact: bool = True, eps: float = 1e-11,
              max_iter: Optional[int] = None) -> SimplexResult:
    """Decide feasibility of ``A x = b, x >= 0`` and return a certificate either way."""
    A = _dense(A)
    m, n = A.shape
    if len(b) != m:
        raise ValueError("row count of A and b differ")
    zero = Fraction(0) if exact else 0.0
    one = Fraction(1) if exact else 1.0

    flips = []
    T = np.empty((m, n + m + 1), dtype=object if exact else float)
    for i in range(m):
        bi = b[i] if exact else float(b[i])
        s = -1 if bi < 0 else 1
        flips.append(s)
        for j in range(n):
            T[i, j] = Fraction(int(A[i, j])) * s if exact else float(A[i, j]) * s
        T[i, n:n + m] = zero
        T[i, n + i] = one
        T[i, -1] = bi * s
    z = np.empty(n + m + 1, dtype=T.dtype)
    for j in range(n + m + 1):
        z[j] = zero
    for i in range(m):
        z[:n] = z[:n] - T[i, :n]
        z[-1] = z[-1] - T[i, -1]
    basis = list(range(n, n + m))

    def negative(v):
        return v < 0 if exact else v < -eps

    def positive(v):
        return v > 0 if exact else v > eps

    if max_iter is None:
        max_iter = 50 * (n + m) + 1000
    it = 0
    while True:
        enter = next((j for j in range(n + m) if negative(z[j])), None)
        if enter is None:
            break
        it += 1
        if it > max_iter:
            raise SimplexError(f"simplex exceeded {max_iter} iterations")
        best = None
        for i in range(m):
            a = T[i, enter]
            if positive(a):
                ratio = T[i, -1] / a
                if best is None or ratio < best[0] or (ratio == best[0] and basis[i] < basis[best[1]]):
                    best = (ratio, i)
        if best is None:
            raise SimplexError("phase-1 problem reported unbounded")
        r = best[1]
        piv = T[r, enter]
        T[r] = T[r] / piv
        for i in range(m):
            if i != r:
                f = T[i, enter]
                if f != 0:
                    T[i] = T[i] - f * T[r]
        f = z[enter]
        z = z - f * T[r]
        basis[r] = enter

    objective = -z[-1]
    u = [one - z[n + i] for i in range(m)]
    y = [u[i] * flips[i] for i in range(m)]
    feasible = (objective == 0) if exact else (abs(objective) <= max(eps, 1e-9))
    x = None
    if feasible:
        x = [zero] * n
        for i, j in enumerate(basis):
            if j < n:
                x[j] = T[i, -1]
    return SimplexResult(feasible, objective, x, y, it)
