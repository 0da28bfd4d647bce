"""Independent brute-force oracles the tests check the real implementations
against.  These deliberately share no code with the package internals.
"""

from itertools import combinations, permutations

import numpy as np


def closed_itemsets_by_enumeration(transactions, min_support):
    """All closed frequent itemsets of a list of item-id sets, as a set of
    (frozenset, support).  Enumerates every candidate subset of the universe
    and keeps those with no equal-support proper superset."""
    universe = sorted({i for t in transactions for i in t})
    frequent = {}
    for size in range(1, len(universe) + 1):
        for combo in combinations(universe, size):
            s = set(combo)
            support = sum(1 for t in transactions if s <= t)
            if support >= min_support:
                frequent[frozenset(combo)] = support
    closed = set()
    for items, support in frequent.items():
        has_equal_superset = any(
            items < other and osupport == support for other, osupport in frequent.items()
        )
        if not has_equal_superset:
            closed.add((items, support))
    return closed


def subgraph_isomorphic_by_enumeration(pattern, target):
    """Try every injective vertex mapping; edge labels and vertex labels must
    match, pattern edges must exist in the target.  Only for tiny graphs."""
    p_vids = [vid for vid, _ in pattern.vertices]
    p_labs = dict(pattern.vertices)
    t_vids = [vid for vid, _ in target.vertices]
    t_labs = dict(target.vertices)
    t_edges = {}
    for u, v, lab in target.edges:
        t_edges[frozenset((u, v))] = lab
    if len(p_vids) > len(t_vids):
        return False
    for image in permutations(t_vids, len(p_vids)):
        mapping = dict(zip(p_vids, image))
        if any(p_labs[v] != t_labs[mapping[v]] for v in p_vids):
            continue
        if all(
            t_edges.get(frozenset((mapping[u], mapping[v]))) == lab
            for u, v, lab in pattern.edges
        ):
            return True
    return False


def egl_by_literal_formula(theta, x):
    """Expected gradient length, written out exactly as the per-hypothesis
    single-candidate gradient: for each hypothesized label j, build the full
    class-by-feature matrix entrywise and take its Frobenius norm."""
    c, d_plus_1 = theta.shape
    d = d_plus_1 - 1
    xhat = np.append(np.asarray(x, dtype=float), 1.0)
    scores = [sum(theta[j][k] * xhat[k] for k in range(d_plus_1)) for j in range(c)]
    mx = max(scores)
    exps = [np.exp(s - mx) for s in scores]
    z = sum(exps)
    p = [e / z for e in exps]
    total = 0.0
    for j in range(c):
        sq = 0.0
        for jp in range(c):
            indicator = 1.0 if jp == j else 0.0
            for k in range(d):  # intercept column excluded
                entry = -x[k] * (indicator - p[jp])
                sq += entry * entry
        total += p[j] * np.sqrt(sq)
    return total


def kcenter_optimal_radius(points, k, distance):
    """Exact k-center radius by trying every subset of centers."""
    n = len(points)
    best = np.inf
    for centers in combinations(range(n), k):
        radius = max(min(distance(points[i], points[c]) for c in centers) for i in range(n))
        best = min(best, radius)
    return best


def kcenter_radius(points, centers, distance):
    return max(min(distance(p, points[c]) for c in centers) for p in points)


def finite_difference_gradient(f, x0, h=1e-6):
    """Central-difference gradient of a scalar function of a flat vector."""
    x0 = np.asarray(x0, dtype=float)
    grad = np.zeros_like(x0)
    for i in range(x0.size):
        up = x0.copy()
        dn = x0.copy()
        up[i] += h
        dn[i] -= h
        grad[i] = (f(up) - f(dn)) / (2 * h)
    return grad
