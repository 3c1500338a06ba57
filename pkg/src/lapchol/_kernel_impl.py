"""Numeric kernels shared by the compiled and pure backends.

Every function here is written so that the exact same source can either run
as plain Python over numpy arrays or be compiled with ``numba.njit``, with
bit-identical results.  The backend loader (``lapchol._kernels``) imports
this module twice: the regular import stays pure, a second module instance
gets its globals rebound to jitted versions so that kernel-to-kernel calls
resolve to compiled code.

RNG: a splitmix64 stream.  State travels as uint64 under numba (native
wraparound) and as a Python int masked to 64 bits in pure mode;
``_state_of`` is the only point where the two modes differ and is patched
by the loader for the pure instance.

Stream discipline (documented here, implemented in ``lapchol.rng``): one
root seed per factorization; substream 0 drives vertex choices (the
upfront shuffle, or the low-degree rejection draws), substream k >= 1
drives the clique sampling of elimination step k.  Per attempt the draw
order is: alias cell, alias coin, partner index (redrawn on the boundary).
"""

import math

import numpy as np

MASK64 = 0xFFFFFFFFFFFFFFFF
GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
INV53 = 1.0 / 9007199254740992.0  # 2**-53


def _state_of(state):
    # Patched to int(state[0]) in the pure backend.
    return state[0]


def sm64_next(s):
    s = (s + GOLDEN) & MASK64
    z = s
    z = ((z ^ (z >> 30)) * _MIX1) & MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & MASK64
    return s, z ^ (z >> 31)


def sm64_uniform(s):
    s, z = sm64_next(s)
    return s, (z >> 11) * INV53


def uniform_index(s, bound):
    # floor(u * bound); the boundary value `bound` itself is reachable only
    # through floating-point rounding and is rejected and redrawn.
    while True:
        s, u = sm64_uniform(s)
        idx = int(u * bound)
        if idx < bound:
            return s, idx


def fisher_yates(n, state):
    perm = np.empty(n, dtype=np.int64)
    for i in range(n):
        perm[i] = i
    s = _state_of(state)
    for i in range(n - 1, 0, -1):
        s, j = uniform_index(s, i + 1)
        tmp = perm[i]
        perm[i] = perm[j]
        perm[j] = tmp
    state[0] = s
    return perm


def alias_build(w, d, prob, alias, small, large):
    """Walker/Vose two-worklist construction over w[0:d].

    Cells with scaled weight <= 1 go to the small list, > 1 to the large
    list; whatever remains when one list empties keeps probability one.
    Returns the weight total.
    """
    total = 0.0
    for i in range(d):
        total += w[i]
    scale = d / total
    n_small = 0
    n_large = 0
    for i in range(d):
        p = w[i] * scale
        prob[i] = p
        alias[i] = i
        if p <= 1.0:
            small[n_small] = i
            n_small += 1
        else:
            large[n_large] = i
            n_large += 1
    while n_small > 0 and n_large > 0:
        n_small -= 1
        lo = small[n_small]
        n_large -= 1
        hi = large[n_large]
        alias[lo] = hi
        rem = (prob[hi] + prob[lo]) - 1.0
        prob[hi] = rem
        if rem <= 1.0:
            small[n_small] = hi
            n_small += 1
        else:
            large[n_large] = hi
            n_large += 1
    for i in range(n_small):
        prob[small[i]] = 1.0
    for i in range(n_large):
        prob[large[i]] = 1.0
    return total


def alias_pick(prob, alias, d, s):
    # One draw, exactly two uniforms: cell via floor(u*d) (clamped at d-1
    # against the rounding boundary), then a biased coin.
    s, u = sm64_uniform(s)
    cell = int(u * d)
    if cell >= d:
        cell = d - 1
    s, u2 = sm64_uniform(s)
    if u2 < prob[cell]:
        return s, cell
    return s, int(alias[cell])


def alias_sample_many(prob, alias, d, state, out):
    s = _state_of(state)
    for i in range(out.shape[0]):
        s, idx = alias_pick(prob, alias, d, s)
        out[i] = idx
    state[0] = s


def build_adjacency(eu, ev, m, head, nxt):
    # head/nxt store linked lists of arc ids; arc 2e lives in eu[e]'s list,
    # arc 2e+1 in ev[e]'s.  Lists are built by prepending.
    for v in range(head.shape[0]):
        head[v] = -1
    for e in range(m):
        u = eu[e]
        v = ev[e]
        a = 2 * e
        nxt[a] = head[u]
        head[u] = a
        b = a + 1
        nxt[b] = head[v]
        head[v] = b


def append_edge(eu, ev, ew, et, alive, head, nxt, n_edges, u, v, w, t, track):
    e = n_edges
    eu[e] = u
    ev[e] = v
    ew[e] = w
    if track:
        et[e] = t
    alive[e] = True
    a = 2 * e
    nxt[a] = head[u]
    head[u] = a
    b = a + 1
    nxt[b] = head[v]
    head[v] = b
    return e + 1


def collect_star(v, eu, ev, ew, et, alive, head, nxt, live_mult, wdeg,
                 star_nbr, star_w, star_t, track):
    """Remove every live edge incident on v, writing them to the star_*
    scratch in adjacency order.  Dead entries left behind by earlier
    eliminations are discarded in passing.  Returns (count, weight sum).
    """
    cnt = 0
    wsum = 0.0
    a = head[v]
    while a != -1:
        e = a >> 1
        if alive[e]:
            u = eu[e]
            if u == v:
                u = ev[e]
            w = ew[e]
            star_nbr[cnt] = u
            star_w[cnt] = w
            if track:
                star_t[cnt] = et[e]
            cnt += 1
            wsum += w
            alive[e] = False
            live_mult[u] -= 1
            wdeg[u] -= w
        a = nxt[a]
    head[v] = -1
    live_mult[v] = 0
    wdeg[v] = 0.0
    return cnt, wsum


def dedup_column(cnt, star_nbr, star_w, star_t, wdedup, tdedup,
                 col_idx, col_w, col_t, track):
    # Two passes over the star: accumulate per-neighbor sums into the
    # scratch, then emit in first-seen order, zeroing the scratch as
    # entries are emitted so it is clean again on return.
    for i in range(cnt):
        u = star_nbr[i]
        wdedup[u] += star_w[i]
        if track:
            tdedup[u] += star_t[i]
    ncol = 0
    for i in range(cnt):
        u = star_nbr[i]
        if wdedup[u] != 0.0:
            col_idx[ncol] = u
            col_w[ncol] = wdedup[u]
            if track:
                col_t[ncol] = tdedup[u]
                tdedup[u] = 0.0
            wdedup[u] = 0.0
            ncol += 1
    return ncol


def sample_clique(cnt, star_nbr, star_w, star_t, track, state,
                  prob, alias, small, large,
                  eu, ev, ew, et, alive, head, nxt, live_mult, wdeg,
                  n_edges):
    """One clique-sampling round: cnt attempts, each drawing e1
    weight-proportionally (alias table) and e2 uniformly from the star;
    distinct far endpoints insert one multi-edge of weight w1*w2/(w1+w2).
    Returns (new pool length, number of edges inserted).
    """
    alias_build(star_w, cnt, prob, alias, small, large)
    s = _state_of(state)
    emitted = 0
    for i in range(cnt):
        s, i1 = alias_pick(prob, alias, cnt, s)
        s, i2 = uniform_index(s, cnt)
        u1 = star_nbr[i1]
        u2 = star_nbr[i2]
        if u1 != u2:
            w1 = star_w[i1]
            w2 = star_w[i2]
            wn = w1 * w2 / (w1 + w2)
            tn = 0.0
            if track:
                tn = (w2 * star_t[i1] + w1 * star_t[i2]) / (w1 + w2)
            n_edges = append_edge(eu, ev, ew, et, alive, head, nxt,
                                  n_edges, u1, u2, wn, tn, track)
            live_mult[u1] += 1
            live_mult[u2] += 1
            wdeg[u1] += wn
            wdeg[u2] += wn
            emitted += 1
    state[0] = s
    return n_edges, emitted


def eliminate_step(v, eu, ev, ew, et, alive, head, nxt, live_mult, wdeg,
                   n_edges, state,
                   star_nbr, star_w, star_t,
                   prob, alias, small, large,
                   wdedup, tdedup, col_idx, col_w, col_t, track):
    """Fused elimination of vertex v: remove its star, aggregate the
    column, and insert the sampled clique.  Returns
    (alpha, column length, edges inserted, new pool length, attempts).
    """
    cnt, alpha = collect_star(v, eu, ev, ew, et, alive, head, nxt,
                              live_mult, wdeg, star_nbr, star_w, star_t,
                              track)
    if cnt == 0:
        return 0.0, 0, 0, n_edges, 0
    ncol = dedup_column(cnt, star_nbr, star_w, star_t, wdedup, tdedup,
                        col_idx, col_w, col_t, track)
    n_edges, emitted = sample_clique(cnt, star_nbr, star_w, star_t, track,
                                     state, prob, alias, small, large,
                                     eu, ev, ew, et, alive, head, nxt,
                                     live_mult, wdeg, n_edges)
    return alpha, ncol, emitted, n_edges, cnt


def eliminate_step_exact(v, eu, ev, ew, et, alive, head, nxt, live_mult,
                         wdeg, n_edges,
                         star_nbr, star_w, star_t,
                         wdedup, tdedup, col_idx, col_w, col_t, track):
    # Verification-mode elimination: insert the full clique on the distinct
    # neighbors, pair (u, z) with weight w_u * w_z / alpha.  Quadratic fill.
    cnt, alpha = collect_star(v, eu, ev, ew, et, alive, head, nxt,
                              live_mult, wdeg, star_nbr, star_w, star_t,
                              track)
    if cnt == 0:
        return 0.0, 0, 0, n_edges, 0
    ncol = dedup_column(cnt, star_nbr, star_w, star_t, wdedup, tdedup,
                        col_idx, col_w, col_t, track)
    inserted = 0
    for i in range(ncol):
        for j in range(i + 1, ncol):
            wi = col_w[i]
            wj = col_w[j]
            wn = wi * wj / alpha
            tn = 0.0
            if track:
                tn = (wj * col_t[i] + wi * col_t[j]) / alpha
            ui = col_idx[i]
            uj = col_idx[j]
            n_edges = append_edge(eu, ev, ew, et, alive, head, nxt,
                                  n_edges, ui, uj, wn, tn, track)
            live_mult[ui] += 1
            live_mult[uj] += 1
            wdeg[ui] += wn
            wdeg[uj] += wn
            inserted += 1
    return alpha, ncol, inserted, n_edges, cnt


def precond_solve(perm, col_ptr, col_idx, col_val, dinv, r, y, x):
    """Apply the factorization inverse: forward substitution through the
    unit-diagonal elimination columns, the diagonal pseudo-inverse, then
    back substitution.  r (a copy of the right-hand side) is consumed,
    y is an n-scratch, x receives the result in vertex order.
    """
    n = perm.shape[0]
    for k in range(n):
        v = perm[k]
        yk = r[v]
        y[k] = yk
        if yk != 0.0:
            for p in range(col_ptr[k], col_ptr[k + 1]):
                u = col_idx[p]
                if u != v:
                    r[u] -= col_val[p] * yk
    for k in range(n):
        y[k] = y[k] * dinv[k]
    for k in range(n - 1, -1, -1):
        v = perm[k]
        acc = y[k]
        for p in range(col_ptr[k], col_ptr[k + 1]):
            u = col_idx[p]
            if u != v:
                acc -= col_val[p] * x[u]
        x[v] = acc


def lap_matvec(eu, ev, ew, m, x, out):
    for i in range(out.shape[0]):
        out[i] = 0.0
    for e in range(m):
        u = eu[e]
        v = ev[e]
        d = ew[e] * (x[u] - x[v])
        out[u] += d
        out[v] -= d


def jacobi_eigh(A, V, max_sweeps, rel_tol):
    """Cyclic Jacobi diagonalization of the symmetric matrix A (overwritten;
    eigenvalues end up on the diagonal).  V accumulates the rotations.
    Returns the number of sweeps used, or -1 if max_sweeps was hit before
    the off-diagonal mass dropped below rel_tol^2 times the squared
    Frobenius norm.
    """
    n = A.shape[0]
    for i in range(n):
        for j in range(n):
            V[i, j] = 1.0 if i == j else 0.0
    fro2 = 0.0
    for i in range(n):
        for j in range(n):
            fro2 += A[i, j] * A[i, j]
    if fro2 == 0.0:
        return 0
    tol2 = rel_tol * rel_tol * fro2
    for sweep in range(max_sweeps):
        off2 = 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                off2 += A[p, q] * A[p, q]
        if off2 <= tol2:
            return sweep
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                if theta >= 0.0:
                    t = 1.0 / (theta + math.sqrt(1.0 + theta * theta))
                else:
                    t = -1.0 / (-theta + math.sqrt(1.0 + theta * theta))
                c = 1.0 / math.sqrt(1.0 + t * t)
                sr = t * c
                app = A[p, p]
                aqq = A[q, q]
                A[p, p] = app - t * apq
                A[q, q] = aqq + t * apq
                A[p, q] = 0.0
                A[q, p] = 0.0
                for i in range(n):
                    if i != p and i != q:
                        aip = A[i, p]
                        aiq = A[i, q]
                        A[i, p] = c * aip - sr * aiq
                        A[p, i] = A[i, p]
                        A[i, q] = sr * aip + c * aiq
                        A[q, i] = A[i, q]
                for i in range(n):
                    vip = V[i, p]
                    viq = V[i, q]
                    V[i, p] = c * vip - sr * viq
                    V[i, q] = sr * vip + c * viq
    return -1


# Compiled in dependency order by the backend loader.
JIT_KERNELS = [
    "_state_of",
    "sm64_next",
    "sm64_uniform",
    "uniform_index",
    "fisher_yates",
    "alias_build",
    "alias_pick",
    "alias_sample_many",
    "build_adjacency",
    "append_edge",
    "collect_star",
    "dedup_column",
    "sample_clique",
    "eliminate_step",
    "eliminate_step_exact",
    "precond_solve",
    "lap_matvec",
    "jacobi_eigh",
]
