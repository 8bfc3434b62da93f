"""Projection onto box-plus-budget sets and gradient projection solvers.

The same iteration drives both the convex relaxation solve and the nonconvex
descent: x_{k+1} = x_k + t* (P(x_k - alpha_k g_k) - x_k), where alpha_k is a
safeguarded Barzilai-Borwein steplength and t* minimizes the quadratic
exactly on the segment (best endpoint when the segment quadratic is
concave).  The stopping rule is the unit-step projected-gradient residual
||P(x - g) - x|| <= tol.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bounds import ConvexRelaxation, certified_lower_bound
from .qp import FeasibleSet, feasible_set

__all__ = ["SolveReport", "project", "solve_convex", "descend_nonconvex"]

ALPHA_MIN = 1e-8
ALPHA_MAX = 1e8


@dataclass
class SolveReport:
    x: np.ndarray
    value: float
    residual: float
    iterations: int
    converged: bool


def project(x, fset: FeasibleSet) -> np.ndarray:
    """Euclidean projection onto {p <= y <= q, lo <= sum(y) <= hi}.

    Clip to the box; if the clipped sum violates a budget bound, shift by the
    scalar theta solving sum(clip(x - theta)) = bound.  That piecewise-linear
    monotone equation is solved exactly by breakpoint search, so the result
    is feasible, idempotent, and the true projection.
    """
    if fset.is_empty:
        raise ValueError("empty feasible set")
    x = np.asarray(x, dtype=float)
    y = np.clip(x, fset.p, fset.q)
    s = y.sum()
    if s > fset.hi:
        y = _clip_to_budget(x, fset.p, fset.q, fset.hi)
    elif s < fset.lo:
        y = _clip_to_budget(x, fset.p, fset.q, fset.lo)
    return y


def _clip_to_budget(x, p, q, target: float) -> np.ndarray:
    y = np.clip(x - _budget_shift(x, p, q, target), p, q)
    # For |x| >> 1 a single ulp of theta already moves the sum by more than
    # the budget tolerance, so no representable theta is exact; distribute
    # the residual over the free coordinates in y-space instead, where full
    # precision is available.
    for _ in range(4):
        err = float(y.sum() - target)
        if abs(err) <= 1e-12 * max(1.0, abs(target)):
            break
        free = (y > p) & (y < q)
        nfree = int(free.sum())
        if nfree == 0:
            break
        y[free] -= err / nfree
        y = np.clip(y, p, q)
    return y


def _budget_shift(x, p, q, target: float) -> float:
    """Root of the nonincreasing map theta -> sum(clip(x - theta, p, q)) = target."""
    bps = np.unique(np.concatenate([x - q, x - p]))
    vals = np.clip(x[None, :] - bps[:, None], p, q).sum(axis=1)  # nonincreasing
    k = int(np.searchsorted(-vals, -target, side="left"))
    if k >= bps.size:
        theta = float(bps[-1])  # target == sum(p), reached at the last breakpoint
    elif vals[k] == target or k == 0:
        theta = float(bps[k])
    else:
        # interpolate on the linear segment [bps[k-1], bps[k]]
        run = bps[k] - bps[k - 1]
        drop = vals[k - 1] - vals[k]
        theta = float(bps[k - 1] + (vals[k - 1] - target) * run / drop)
    # Newton polish: when |x| is huge the interpolation above carries an
    # absolute error of |x| * eps, which would leak into the budget; the
    # slope of the clip-sum map is minus the number of strictly free
    # coordinates, so a few exact steps restore the root to full precision.
    for _ in range(5):
        y = np.clip(x - theta, p, q)
        err = float(y.sum() - target)
        if abs(err) <= 1e-12 * max(1.0, abs(target)):
            break
        free = int(np.count_nonzero((y > p) & (y < q)))
        if free == 0:
            break
        theta += err / free
    return theta


def _gp_loop(value, grad, curvature, fset, x0, tol, max_iter):
    x = np.asarray(x0, dtype=float).copy()
    if not fset.contains(x, tol=1e-9):
        raise ValueError("starting point is infeasible")
    g = grad(x)
    gmax = float(np.abs(g).max()) if g.size else 0.0
    alpha = 1.0 if gmax == 0.0 else 1.0 / gmax
    alpha = min(max(alpha, ALPHA_MIN), ALPHA_MAX)

    iterations = 0
    converged = False
    for iterations in range(max_iter + 1):
        residual = float(np.linalg.norm(project(x - g, fset) - x))
        if residual <= tol:
            converged = True
            break
        if iterations == max_iter:
            break
        xbar = project(x - alpha * g, fset)
        d = xbar - x
        if not np.any(d):
            break  # fixed point for this steplength: stationary
        a = float(g @ d)  # < 0 by the projection inequality
        b = curvature(d)
        if b > 0.0:
            t = min(1.0, -a / b)
        else:
            # concave (or flat) segment quadratic: best endpoint
            t = 1.0 if a + 0.5 * b <= 0.0 else 0.0
        if t <= 0.0:
            break
        x_new = x + t * d
        g_new = grad(x_new)
        s = x_new - x
        yv = g_new - g
        sy = float(s @ yv)
        alpha = float(s @ s) / sy if sy > 1e-30 else ALPHA_MAX
        alpha = min(max(alpha, ALPHA_MIN), ALPHA_MAX)
        x, g = x_new, g_new

    return SolveReport(
        x=x, value=value(x), residual=residual, iterations=iterations, converged=converged
    )


def solve_convex(rel: ConvexRelaxation, x0=None, tol: float = 1e-4, max_iter: int = 10000):
    """Minimize the convex relaxation; returns (report, certified lower bound).

    The objective is monotone nonincreasing across accepted steps, and the
    returned bound is certified at the final iterate, so it stays sound even
    when the iteration cap is hit.
    """
    fset = feasible_set(rel.reduced)
    if x0 is None:
        x0 = project(np.full(rel.reduced.n, 0.5), fset)
    report = _gp_loop(rel.value, rel.grad, rel.curvature, fset, x0, tol, max_iter)
    return report, certified_lower_bound(rel, report.x)


def descend_nonconvex(problem, x0, tol: float = 1e-4, max_iter: int = 2000) -> SolveReport:
    """Run the same iteration on the nonconvex objective itself.

    The segment quadratic can be concave here; the exact linesearch then
    picks the better endpoint, so the objective never increases.  Terminates
    at the stationarity residual or the iteration cap.
    """
    fset = feasible_set(problem)

    def curvature(d):
        return float(-2.0 * (d @ (problem.quad @ d)))

    return _gp_loop(problem.value, problem.grad, curvature, fset, x0, tol, max_iter)
