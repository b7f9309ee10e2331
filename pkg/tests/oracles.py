"""Independent reference implementations used only by the tests.

Everything here is deliberately naive: numpy's LAPACK eigensolver, a 2^n
subset filter for upper sets, Hall's condition for coupling feasibility, and
exhaustive basic-solution enumeration for transportation optima.  None of it
shares code with the package's own algorithms.
"""
from __future__ import annotations

import itertools
import math

import numpy as np

from stochcone import FinMeasure, PosDefMatrix, from_atoms, posdef


def rand_sym(rng: np.random.Generator, d: int, radius: float) -> np.ndarray:
    g = rng.standard_normal((d, d))
    s = (g + g.T) / 2.0
    n = math.sqrt((s * s).sum())
    if n == 0.0:
        return np.zeros((d, d))
    return s * (radius / n)


def rand_pd_array(rng: np.random.Generator, d: int, radius: float = 0.6) -> np.ndarray:
    """exp of a bounded symmetric matrix, via numpy's own eigensolver."""
    s = rand_sym(rng, d, radius * rng.uniform(0.3, 1.0))
    w, q = np.linalg.eigh(s)
    return (q * np.exp(w)) @ q.T


def rand_pd(rng: np.random.Generator, d: int, radius: float = 0.6) -> PosDefMatrix:
    return posdef(rand_pd_array(rng, d, radius))


def rand_psd_array(rng: np.random.Generator, d: int, scale: float = 0.5) -> np.ndarray:
    g = rng.standard_normal((d, d)) * scale
    return g @ g.T / d


def rand_measure(rng: np.random.Generator, d: int, max_atoms: int,
                 radius: float = 0.6) -> FinMeasure:
    k = int(rng.integers(1, max_atoms + 1))
    w = rng.random(k) + 0.1
    return from_atoms([(rand_pd(rng, d, radius), float(x)) for x in w])


def rand_measure_dyadic(rng: np.random.Generator, d: int, n_atoms: int,
                        radius: float = 0.6, denom: int = 64) -> FinMeasure:
    """Measure whose weights are exact multiples of 1/denom (denom a power of
    two dividing 2^9), so they sit exactly on the solver's 1e-9 mass grid."""
    cuts = sorted(rng.choice(np.arange(1, denom), size=n_atoms - 1, replace=False)) \
        if n_atoms > 1 else []
    bounds = [0] + [int(c) for c in cuts] + [denom]
    weights = [(bounds[i + 1] - bounds[i]) / denom for i in range(n_atoms)]
    return from_atoms([(rand_pd(rng, d, radius), w) for w in weights])


def numpy_eigvals(a: np.ndarray) -> np.ndarray:
    return np.linalg.eigvalsh(a)


def numpy_thompson(ax: np.ndarray, ay: np.ndarray) -> float:
    """Thompson distance via numpy generalized eigenvalues."""
    wy, qy = np.linalg.eigh(ay)
    s = (qy * (1.0 / np.sqrt(wy))) @ qy.T
    w = np.linalg.eigvalsh(s @ ax @ s)
    return float(max(0.0, np.log(w[-1]), -np.log(w[0])))


def brute_upper_sets(leq: list[list[bool]]) -> set[frozenset[int]]:
    """All upward-closed subsets by filtering every one of the 2^n subsets."""
    n = len(leq)
    out = set()
    for mask in range(1 << n):
        s = frozenset(i for i in range(n) if (mask >> i) & 1)
        if all(j in s for i in s for j in range(n) if leq[i][j]):
            out.add(s)
    return out


def hall_feasible(a: list[float], b: list[float], edges: list[list[bool]],
                  tol: float = 1e-12) -> bool:
    """Coupling existence along permitted edges, by Hall's condition over all
    2^r source subsets."""
    r, c = len(a), len(b)
    for mask in range(1 << r):
        s = [i for i in range(r) if (mask >> i) & 1]
        neigh = set()
        for i in s:
            for j in range(c):
                if edges[i][j]:
                    neigh.add(j)
        if sum(a[i] for i in s) > sum(b[j] for j in neigh) + tol:
            return False
    return True


def merged_support(mu: FinMeasure, nu: FinMeasure):
    """Merged atom list (mu's atoms first, then nu's unmatched ones) with the
    per-measure masses, mirroring the package's documented support layout."""
    pts = list(mu.points) + list(nu.points)
    mu_mass = list(mu.weights) + [0.0] * nu.size
    nu_mass = [0.0] * mu.size + list(nu.weights)
    keep: list[int] = []
    for k, p in enumerate(pts):
        for k2 in keep:
            if math.sqrt(((p.a - pts[k2].a) ** 2).sum()) <= 1e-10:
                mu_mass[k2] += mu_mass[k]
                nu_mass[k2] += nu_mass[k]
                break
        else:
            keep.append(k)
    return ([pts[k] for k in keep], [mu_mass[k] for k in keep],
            [nu_mass[k] for k in keep])


def brute_stochastic_dominance(mu: FinMeasure, nu: FinMeasure, leq_fn,
                               tol: float = 0.0) -> bool:
    """Max upper-set violation on the merged support, by the 2^n filter."""
    pts, mu_mass, nu_mass = merged_support(mu, nu)
    n = len(pts)
    leq = [[leq_fn(pts[i], pts[j]) for j in range(n)] for i in range(n)]
    for s in brute_upper_sets(leq):
        if sum(mu_mass[i] for i in s) > sum(nu_mass[i] for i in s) + tol:
            return False
    return True


def _tree_flows(tree, a, b):
    """Unique flows on a spanning tree of the transportation graph, by leaf
    elimination; entries may come out negative (infeasible basic solution)."""
    r, c = len(a), len(b)
    need = list(a) + list(b)
    deg = [0] * (r + c)
    inc: dict[int, list[int]] = {k: [] for k in range(r + c)}
    for e, (i, j) in enumerate(tree):
        deg[i] += 1
        deg[r + j] += 1
        inc[i].append(e)
        inc[r + j].append(e)
    flows = [None] * len(tree)
    alive = set(range(r + c))
    for _ in range(len(tree)):
        leaf = min(k for k in alive if deg[k] == 1)
        e = next(ei for ei in inc[leaf] if flows[ei] is None)
        i, j = tree[e]
        other = r + j if leaf == i else i
        f = need[leaf]
        flows[e] = f
        need[leaf] = 0.0
        need[other] -= f
        deg[leaf] -= 1
        deg[other] -= 1
        alive.discard(leaf)
    return flows


def brute_min_transport(a: list[float], b: list[float], cost: np.ndarray) -> float:
    """Exact transportation optimum by enumerating every basic feasible
    solution (spanning tree of the complete bipartite support graph)."""
    r, c = len(a), len(b)
    edges = [(i, j) for i in range(r) for j in range(c)]
    best = math.inf
    for tree in itertools.combinations(edges, r + c - 1):
        parent = list(range(r + c))

        def find(x: int) -> int:
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        acyclic = True
        for i, j in tree:
            ri, rj = find(i), find(r + j)
            if ri == rj:
                acyclic = False
                break
            parent[ri] = rj
        if not acyclic:
            continue
        flows = _tree_flows(tree, a, b)
        if min(flows) < -1e-12:
            continue
        val = sum(cost[i, j] * f for (i, j), f in zip(tree, flows))
        best = min(best, val)
    return best


def brute_wasserstein_inf(a: list[float], b: list[float], cost: np.ndarray) -> float:
    """Smallest threshold whose admissible-edge graph passes Hall's test."""
    values = sorted(set(float(x) for x in cost.reshape(-1)))
    for thr in values:
        edges = [[cost[i, j] <= thr for j in range(len(b))] for i in range(len(a))]
        if hall_feasible(a, b, edges):
            return thr
    raise AssertionError("no feasible threshold; marginals broken")
