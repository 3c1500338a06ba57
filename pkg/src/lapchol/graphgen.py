"""Random test/benchmark graphs.

These feed inputs to the factorizer and benchmarks; they use numpy's own
generator (seeded per call) and are independent of the factorization's
sampling streams.
"""

import numpy as np

from .multigraph import MultiGraph

__all__ = ["path_graph", "star_graph", "erdos_renyi",
           "random_regular_multigraph", "random_connected_graph"]


def path_graph(n, weight=1.0):
    return MultiGraph.from_edge_list(n, [(i, i + 1, weight)
                                         for i in range(n - 1)])


def star_graph(leaves, weights=None):
    """K_{1,leaves} with center 0."""
    if weights is None:
        weights = [1.0] * leaves
    return MultiGraph.from_edge_list(
        leaves + 1, [(0, i + 1, w) for i, w in enumerate(weights)])


def erdos_renyi(n, p, seed, weight=1.0, ensure_connected=True):
    """G(n, p); by default redraws (seed offset by 10^6) until connected."""
    attempt = 0
    while True:
        rng = np.random.default_rng(seed + attempt * 1_000_000)
        mask = rng.random((n, n)) < p
        iu, ju = np.triu_indices(n, k=1)
        sel = mask[iu, ju]
        edges = [(int(u), int(v), weight) for u, v in zip(iu[sel], ju[sel])]
        if edges:
            g = MultiGraph.from_edge_list(n, edges)
            if not ensure_connected or g.is_connected():
                return g
        attempt += 1
        if attempt > 1000:
            raise RuntimeError("could not draw a connected graph")


def random_regular_multigraph(n, d, seed):
    """d-regular multigraph by the pairing model: n*d stubs shuffled and
    paired; self-pairs are broken up by swaps, parallel pairs stay as
    multi-edges.  Redraws until connected."""
    if (n * d) % 2:
        raise ValueError("n*d must be even")
    attempt = 0
    while True:
        rng = np.random.default_rng(seed + attempt * 1_000_000)
        stubs = np.repeat(np.arange(n), d)
        rng.shuffle(stubs)
        for _ in range(100):
            u = stubs[0::2]
            v = stubs[1::2]
            bad = np.flatnonzero(u == v)
            if bad.size == 0:
                break
            for b in bad:
                j = int(rng.integers(n * d))
                pos = 2 * b
                stubs[pos], stubs[j] = stubs[j], stubs[pos]
        u = stubs[0::2]
        v = stubs[1::2]
        if np.any(u == v):
            attempt += 1
            continue
        g = MultiGraph.from_arrays(n, u.astype(np.int64), v.astype(np.int64),
                                   np.ones(u.shape[0]))
        if g.is_connected():
            return g
        attempt += 1
        if attempt > 1000:
            raise RuntimeError("could not draw a connected regular graph")


def random_connected_graph(n, seed, extra_edges=None, w_low=1e-3, w_high=1e3,
                           parallel_fraction=0.2):
    """Random spanning tree plus extra edges, log-uniform weights in
    [w_low, w_high]; a fraction of edges is duplicated so multi-edges are
    exercised."""
    rng = np.random.default_rng(seed)
    if extra_edges is None:
        extra_edges = int(rng.integers(0, 2 * n))
    edges = []
    for v in range(1, n):
        u = int(rng.integers(v))
        edges.append((u, v))
    for _ in range(extra_edges):
        u, v = rng.choice(n, size=2, replace=False)
        edges.append((int(min(u, v)), int(max(u, v))))
    out = []
    for (u, v) in edges:
        w = float(np.exp(rng.uniform(np.log(w_low), np.log(w_high))))
        out.append((u, v, w))
        if rng.random() < parallel_fraction:
            w2 = float(np.exp(rng.uniform(np.log(w_low), np.log(w_high))))
            out.append((u, v, w2))
    return MultiGraph.from_edge_list(n, out)
