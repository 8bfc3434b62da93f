"""Constructive rounding: feasible point -> binary feasible point, f never up.

The diagonal of the quadratic matrix satisfies Q_ii + Q_jj >= 2 Q_ij and
Q_ii >= 0, which makes the second-order term of every move below nonpositive.
Two phases:

  1. While the budget sum is fractional, move one fractional coordinate
     (sign chosen against the first-derivative term) until it hits a box
     face or the budget reaches an integer.
  2. With an integer budget there are always zero or at least two fractional
     coordinates; move a pair along e_i - e_j (budget preserved, sign against
     the first-derivative difference) until one hits a face.

Each move fixes at least one coordinate or makes the budget integral, binary
coordinates are never touched, and the objective is asserted nonincreasing
per move.
"""

from __future__ import annotations

import numpy as np

from .qp import feasible_set

__all__ = ["round_to_binary", "partition_from_binary"]

SNAP_TOL = 1e-9


def _snap(x, tol):
    near0 = np.abs(x) <= tol
    near1 = np.abs(x - 1.0) <= tol
    x[near0] = 0.0
    x[near1] = 1.0
    return x


def round_to_binary(problem, x, tol: float = SNAP_TOL) -> np.ndarray:
    """Binary feasible y with f(y) <= f(x); binary entries of x are kept."""
    fset = feasible_set(problem)
    x = np.asarray(x, dtype=float).copy()
    if not fset.contains(x, tol=1e-7):
        raise ValueError("input point is infeasible")
    x = _snap(np.clip(x, 0.0, 1.0), tol)
    fval = problem.value(x)
    guard = 4 * problem.n + 8

    for _ in range(guard):
        frac = np.flatnonzero((x > 0.0) & (x < 1.0))
        budget = float(x.sum())
        budget_int = abs(budget - round(budget)) <= 1e-7
        if frac.size == 0:
            break
        if not budget_int:
            i = int(frac[0])
            gi = float(problem.grad(x)[i])
            if gi < 0.0:
                alpha = min(1.0 - x[i], np.ceil(budget) - budget)
            else:
                alpha = -min(x[i], budget - np.floor(budget))
            x[i] += alpha
        else:
            if frac.size == 1:
                # an integer budget with one fractional coordinate is float
                # residue; snap it to the nearer face
                i = int(frac[0])
                x[i] = round(x[i])
                continue
            i, j = int(frac[0]), int(frac[1])
            g = problem.grad(x)
            if g[i] - g[j] < 0.0:
                alpha = min(1.0 - x[i], x[j])
            else:
                alpha = -min(x[i], 1.0 - x[j])
            x[i] += alpha
            x[j] -= alpha
        x = _snap(x, tol)
        fnew = problem.value(x)
        if fnew > fval + 1e-9 * (1.0 + abs(fval)):
            raise RuntimeError("rounding move increased the objective")
        fval = fnew
    else:  # pragma: no cover - each move fixes a coordinate or the budget
        raise RuntimeError("rounding did not terminate")

    x = np.round(x)
    if not fset.contains(x, tol=1e-7):  # pragma: no cover
        raise RuntimeError("rounded point left the feasible set")
    return x


def partition_from_binary(y):
    """Vertex index lists (V0, V1) from a binary side vector."""
    y = np.asarray(y, dtype=float)
    r = np.round(y)
    if np.any(np.abs(y - r) > SNAP_TOL) or not np.all((r == 0.0) | (r == 1.0)):
        raise ValueError("input vector must be binary")
    v0 = np.flatnonzero(r == 0.0)
    v1 = np.flatnonzero(r == 1.0)
    return v0.tolist(), v1.tolist()
