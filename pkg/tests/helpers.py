"""Shared test utilities, including a reference factorization driver
composed purely from the object-level operations (aggregated_column,
remove_star, clique_sample, insert_edges).  It must reproduce the fused
kernel driver bit for bit; the equivalence test in test_backends pins
that."""

import numpy as np

from lapchol import (Config, DedupScratch, MultiEdge, SplitMix64, Variant,
                     choose_vertex_low_degree, clique_sample,
                     random_permutation)
from lapchol.factorizer import Factorization


def reference_sparse_cholesky(g, cfg):
    """Composed driver: same contract as factorizer.sparse_cholesky for
    track_leverage=False configurations."""
    cfg.validate()
    n = g.n
    assert n >= 2 and g.is_connected()
    rho = cfg.rho(n)
    sg = g.split_edges(rho, track_leverage=cfg.track_leverage)
    diag_scale = 2.0 * sg.total_weight() / n

    if cfg.perm_override is not None:
        perm = np.asarray(cfg.perm_override, dtype=np.int64)
        fixed = True
    elif cfg.variant is Variant.RANDOM_PERM:
        perm = random_permutation(n, SplitMix64.for_stream(cfg.seed, 0))
        fixed = True
    elif cfg.variant is Variant.EXACT_CLIQUE:
        perm = np.arange(n, dtype=np.int64)
        fixed = True
    else:
        perm = np.empty(n, dtype=np.int64)
        fixed = False

    vertex_rng = SplitMix64.for_stream(cfg.seed, 0)
    # the remaining-vertex pool is kept in swap-remove order, matching the
    # fused driver's discipline (the low-degree draws index into it)
    remaining = np.arange(n, dtype=np.int64)
    position = np.arange(n, dtype=np.int64)
    n_rem = n
    scratch = DedupScratch(n)
    cols_idx, cols_val = [], []
    col_ptr = np.zeros(n + 1, dtype=np.int64)
    diag = np.zeros(n)

    for k in range(n - 1):
        if fixed:
            v = int(perm[k])
        else:
            v = choose_vertex_low_degree(sg, remaining[:n_rem], vertex_rng)
            perm[k] = v
        j = position[v]
        last = remaining[n_rem - 1]
        remaining[j] = last
        position[last] = j
        n_rem -= 1

        column, alpha = sg.aggregated_column(v, scratch)
        star = sg.remove_star(v)
        if star:
            if cfg.variant is Variant.EXACT_CLIQUE:
                nbrs = list(column.items())
                inserts = []
                for i in range(len(nbrs)):
                    for j in range(i + 1, len(nbrs)):
                        ui, wi = nbrs[i]
                        uj, wj = nbrs[j]
                        inserts.append(MultiEdge(ui, uj, wi * wj / alpha))
                sg.insert_edges(inserts)
            else:
                rng_k = SplitMix64.for_stream(cfg.seed, k + 1)
                out = clique_sample(star, v, alpha, rng_k)
                sg.insert_edges(out.samples)
        sg.mark_eliminated(v)

        diag[k] = alpha if star else 0.0
        if star:
            idx = np.array([v] + list(column.keys()), dtype=np.int64)
            val = np.array([1.0] + [-w / alpha for w in column.values()])
        else:
            idx = np.empty(0, dtype=np.int64)
            val = np.empty(0)
        cols_idx.append(idx)
        cols_val.append(val)
        col_ptr[k + 1] = col_ptr[k] + idx.shape[0]

    v_last = int(remaining[0]) if not fixed else int(perm[n - 1])
    perm[n - 1] = v_last
    alpha_n = float(sg.weighted_deg[v_last])
    if abs(alpha_n) < 1e-12 * diag_scale:
        alpha_n = 0.0
    diag[n - 1] = alpha_n
    cols_idx.append(np.array([v_last], dtype=np.int64))
    cols_val.append(np.array([1.0]))
    col_ptr[n] = col_ptr[n - 1] + 1
    sg.mark_eliminated(v_last)

    return Factorization(n=n, perm=perm, col_ptr=col_ptr,
                         col_idx=np.concatenate(cols_idx),
                         col_val=np.concatenate(cols_val),
                         diag=diag, graph=sg)


def factorizations_equal(a, b):
    return (a.n == b.n
            and np.array_equal(a.perm, b.perm)
            and np.array_equal(a.diag, b.diag)
            and np.array_equal(a.col_ptr, b.col_ptr)
            and np.array_equal(a.col_idx, b.col_idx)
            and np.array_equal(a.col_val, b.col_val))


def frobenius_rel_error(A, B):
    denom = np.linalg.norm(B)
    return np.linalg.norm(A - B) / (denom if denom > 0 else 1.0)


class CountingRng:
    """Wraps SplitMix64 and counts uniform draws."""

    def __init__(self, rng):
        self.rng = rng
        self.draws = 0

    def uniform(self):
        self.draws += 1
        return self.rng.uniform()

    def uniform_index(self, bound):
        while True:
            idx = int(self.uniform() * bound)
            if idx < bound:
                return idx
