"""Shared test utilities: instance corpus, independent oracles, samplers."""

from __future__ import annotations

import numpy as np

import qpcut as qc
from qpcut.qp import feasible_set

X_TOL = 1e-7


def path_graph(n=3):
    w = np.zeros((n, n))
    for i in range(n - 1):
        w[i, i + 1] = w[i + 1, i] = 1.0
    return qc.WeightedGraph(w)


def complete_graph(n, weight=1.0):
    w = np.full((n, n), float(weight))
    np.fill_diagonal(w, 0.0)
    return qc.WeightedGraph(w)


def random_graph(n, density, seed, low=-3, high=10):
    """Random graph with possibly negative integer weights (oracle fodder)."""
    rng = np.random.default_rng(seed)
    w = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < density:
                val = 0.0
                while val == 0.0:
                    val = float(rng.integers(low, high + 1))
                w[i, j] = w[j, i] = val
    return qc.WeightedGraph(w)


def corpus(sizes="small"):
    """Deterministic instance list: (name, graph, spec) over all five families.

    'small' keeps n in {6..16} for oracle comparisons, with both bisection
    and an asymmetric window per graph (>= 200 runs in total).
    """
    graphs = []
    grid_shapes = [(2, 3), (2, 4), (3, 3), (2, 5), (2, 6), (3, 4), (2, 7), (3, 5), (2, 8), (4, 4)]
    for h, k in grid_shapes:
        for seed in (1, 2):
            graphs.append((f"toroidal-{h}x{k}-s{seed}", qc.gen_toroidal(h, k, seed)))
            graphs.append((f"planar-{h}x{k}-s{seed}", qc.gen_planar(h, k, seed)))
    for h, k in [(2, 3), (2, 4), (3, 3), (2, 5), (3, 4), (2, 7), (3, 5), (2, 8)]:
        graphs.append((f"mixed-{h}x{k}", qc.gen_mixed(h, k, 3)))
    for n in (6, 8, 10, 12, 14, 16):
        for dens in (0.1, 0.3, 0.5, 0.8, 1.0):
            for seed in (1, 2):
                graphs.append((f"random-{n}-{dens}-s{seed}", qc.gen_random(n, dens, seed)))
    graphs.append(("debruijn-3", qc.gen_debruijn(3)))
    graphs.append(("debruijn-4", qc.gen_debruijn(4)))

    instances = []
    for name, g in graphs:
        n = g.n
        instances.append((f"{name}/bisect", g, qc.PartitionSpec(n // 2, (n + 1) // 2)))
        lo = max(1, n // 3)
        hi = min(n - 1, n // 2 + 2)
        instances.append((f"{name}/window", g, qc.PartitionSpec(lo, max(lo, hi))))
    return instances


def fd_gradient(fun, x, h=1e-6):
    g = np.zeros_like(x, dtype=float)
    for i in range(x.size):
        e = np.zeros_like(x, dtype=float)
        e[i] = h
        g[i] = (fun(x + e) - fun(x - e)) / (2.0 * h)
    return g


def random_feasible(problem, rng):
    """Uniform box sample projected onto the budget window."""
    x = rng.random(problem.n)
    return qc.project(x, feasible_set(problem))


def projection_oracle(x, fset):
    """Brute-force active-set projection for small dimensions.

    Enumerates every assignment of coordinates to {lower, upper, free} and
    every budget state {inactive, at lo, at hi}; returns the feasible
    candidate closest to x.
    """
    import itertools

    n = fset.dim
    best = None
    best_d = np.inf
    for states in itertools.product((0, 1, 2), repeat=n):
        fixed = np.zeros(n)
        free = []
        for i, st in enumerate(states):
            if st == 0:
                fixed[i] = fset.p[i]
            elif st == 1:
                fixed[i] = fset.q[i]
            else:
                free.append(i)
        free = np.array(free, dtype=int)
        for budget in (None, fset.lo, fset.hi):
            y = fixed.copy()
            if free.size:
                if budget is None:
                    y[free] = x[free]
                else:
                    theta = (x[free].sum() - (budget - fixed.sum())) / free.size
                    y[free] = x[free] - theta
            elif budget is not None and abs(fixed.sum() - budget) > 1e-9:
                continue
            if not fset.contains(y, tol=1e-9):
                continue
            d = float(np.sum((y - x) ** 2))
            if d < best_d - 1e-15:
                best_d = d
                best = y
    return best


def subtree_minima(g, spec, order):
    """Exact minimum completion value for every branching-tree label.

    levels[d][key] is the minimum feasible cut over all binary vectors whose
    first d coordinates in branching order spell out the label with
    key = sum(label[j] << j); infeasible subtrees hold +inf.  Computed by one
    full enumeration and a fold from the leaves up.
    """
    n = g.n
    idx = np.arange(1 << n, dtype=np.int64)
    bits = ((idx[:, None] >> np.arange(n)) & 1).astype(float)
    count = bits.sum(axis=1)
    a = g.weights
    vals = bits @ a.sum(axis=1) - np.einsum("ki,ij,kj->k", bits, a, bits, optimize=True)
    vals = np.where((count >= spec.l) & (count <= spec.u), vals, np.inf)

    key = np.zeros(1 << n, dtype=np.int64)
    for j, v in enumerate(order):
        key |= ((idx >> int(v)) & 1) << j
    perm = np.empty(1 << n)
    perm[key] = vals
    levels = [None] * (n + 1)
    levels[n] = perm
    for d in range(n - 1, -1, -1):
        half = 1 << d
        levels[d] = np.minimum(levels[d + 1][:half], levels[d + 1][half:])
    return levels


def label_key(label):
    return sum(int(b) << j for j, b in enumerate(label))


def improving_move_exists(problem, x, tol=None):
    """Local-descent oracle over the move classes +/-e_i and +/-(e_i - e_j).

    A move improves locally when its first-derivative term is negative, or
    vanishes while its curvature term is negative.  This is checked for
    every move that keeps x + alpha d feasible for small alpha > 0.
    """
    if tol is None:
        q = problem.quad
        tol = 1e-6 * max(1.0, float(np.abs(q).sum(axis=1).max()))
    x = np.asarray(x, dtype=float)
    g = problem.grad(x)
    q = problem.quad
    d = np.diag(q)
    n = problem.n
    s = float(x.sum())

    def descends(a, c):
        return a < -tol or (abs(a) <= tol and c < -tol)

    can_up = lambda i: x[i] < 1.0 - X_TOL
    can_dn = lambda i: x[i] > X_TOL
    room_up = s < problem.hi - X_TOL
    room_dn = s > problem.lo + X_TOL

    for i in range(n):
        if can_up(i) and room_up and descends(g[i], -d[i]):
            return True
        if can_dn(i) and room_dn and descends(-g[i], -d[i]):
            return True
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            if can_up(i) and can_dn(j):
                curv = 2.0 * q[i, j] - d[i] - d[j]
                if descends(g[i] - g[j], curv):
                    return True
    return False
