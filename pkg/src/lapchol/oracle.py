"""Dense brute-force reference implementations.

Everything here recomputes, at O(n^3) desk scale, the quantities the
randomized code only guarantees statistically: exact Schur complements and
elimination cliques, pseudoinverses, effective resistances, and the extreme
generalized eigenvalues of one Laplacian against another.  The eigensolver
is a self-contained cyclic Jacobi so the whole chain stays auditable.
"""

from dataclasses import dataclass

import numpy as np

from ._kernels import active as _K

__all__ = [
    "DenseLap", "dense_from_multigraph", "dense_from_factorization",
    "jacobi_eigendecomposition", "pseudoinverse", "effective_resistance",
    "effective_resistance_matrix", "exact_schur_step", "exact_clique",
    "clique_from_star", "spectral_bounds", "reff_triangle_check", "l_norm",
]

SIZE_CAP = 256
KERNEL_CUTOFF = 1e-9       # eigenvalues below cutoff*lambda_max count as zero
JACOBI_TOL = 1e-12         # relative off-diagonal Frobenius target
_LAP_SYM_TOL = 1e-12
_LAP_ROWSUM_TOL = 1e-10
_LAP_OFFDIAG_TOL = 1e-12


def _mat(x):
    return x.a if isinstance(x, DenseLap) else np.asarray(x, dtype=np.float64)


@dataclass
class DenseLap:
    """A dense matrix validated to be a Laplacian: symmetric, zero row
    sums, nonpositive off-diagonals."""

    a: np.ndarray

    def __init__(self, a):
        a = np.asarray(a, dtype=np.float64)
        n = a.shape[0]
        if a.shape != (n, n):
            raise ValueError("square matrix required")
        if n > SIZE_CAP:
            raise ValueError(f"dense oracle capped at n={SIZE_CAP}")
        scale = max(float(np.abs(a).max()), 1.0)
        if np.abs(a - a.T).max() > _LAP_SYM_TOL * scale:
            raise ValueError("matrix is not symmetric")
        if np.abs(a.sum(axis=1)).max() > _LAP_ROWSUM_TOL * scale:
            raise ValueError("row sums are not zero")
        off = a - np.diag(np.diag(a))
        if off.max() > _LAP_OFFDIAG_TOL * scale:
            raise ValueError("positive off-diagonal entry")
        self.a = a

    @property
    def n(self):
        return self.a.shape[0]


def dense_from_multigraph(g):
    """Entrywise sum of the live multi-edge Laplacians."""
    return DenseLap(g.reconstruct_dense())


def dense_from_factorization(f):
    """The represented matrix: sum over steps of alpha_k c_k c_k^T."""
    n = f.n
    Z = np.zeros((n, n))
    for k in range(n):
        idx, val = f.column(k)
        if f.diag[k] != 0.0 and idx.size:
            c = np.zeros(n)
            c[idx] = val
            Z += f.diag[k] * np.outer(c, c)
    return Z


def jacobi_eigendecomposition(A):
    """Eigenvalues (ascending) and orthonormal eigenvectors of a symmetric
    matrix, by cyclic Jacobi rotations."""
    A = _mat(A)
    n = A.shape[0]
    if n > SIZE_CAP:
        raise ValueError(f"dense oracle capped at n={SIZE_CAP}")
    work = np.ascontiguousarray((A + A.T) / 2.0)
    V = np.empty((n, n))
    sweeps = _K.jacobi_eigh(work, V, 100, JACOBI_TOL)
    if sweeps < 0:
        raise RuntimeError("Jacobi sweep limit exceeded")
    vals = np.diag(work).copy()
    order = np.argsort(vals, kind="stable")
    return vals[order], np.ascontiguousarray(V[:, order])


def pseudoinverse(L, cutoff=KERNEL_CUTOFF):
    """Moore-Penrose pseudoinverse of a symmetric PSD matrix; eigenvalues
    below cutoff*lambda_max are treated as exact zeros."""
    vals, V = jacobi_eigendecomposition(L)
    lmax = float(vals.max(initial=0.0))
    keep = vals > cutoff * lmax
    inv = np.zeros_like(vals)
    inv[keep] = 1.0 / vals[keep]
    return (V * inv) @ V.T


def effective_resistance(L, u, z):
    """b_{u,z}^T L^+ b_{u,z}; requires a connected Laplacian."""
    R = effective_resistance_matrix(L)
    return float(R[u, z])


def effective_resistance_matrix(L):
    """All-pairs effective resistances via one pseudoinverse."""
    A = _mat(L)
    vals, _ = jacobi_eigendecomposition(A)
    lmax = float(vals.max(initial=0.0))
    if lmax <= 0.0 or int((vals <= KERNEL_CUTOFF * lmax).sum()) != 1:
        raise ValueError("effective resistance requires a connected Laplacian")
    P = pseudoinverse(A)
    d = np.diag(P)
    return d[:, None] + d[None, :] - P - P.T


def exact_schur_step(S, v):
    """One exact elimination: returns (alpha, c, S_next) with
    S_next = S - alpha c c^T, row and column v zeroed."""
    A = _mat(S)
    alpha = float(A[v, v])
    n = A.shape[0]
    if alpha == 0.0:
        return 0.0, np.zeros(n), A.copy()
    c = A[:, v] / alpha
    S_next = A - alpha * np.outer(c, c)
    # the eliminated row/col is exactly zero in real arithmetic
    S_next[v, :] = 0.0
    S_next[:, v] = 0.0
    return alpha, c, S_next


def exact_clique(S, v):
    """The elimination clique on v's neighbors, computed two ways (rank-one
    matrix form and the pairwise-weight sum) and cross-checked to 1e-12."""
    A = _mat(S)
    n = A.shape[0]
    d = float(A[v, v])
    if d == 0.0:
        return np.zeros((n, n))
    col = A[:, v].copy()
    star = np.zeros((n, n))
    for u in range(n):
        if u != v and col[u] != 0.0:
            w = -col[u]
            star[u, u] += w
            star[v, v] += w
            star[u, v] -= w
            star[v, u] -= w
    matrix_form = star - np.outer(col, col) / d
    pair_form = np.zeros((n, n))
    nbrs = [u for u in range(n) if u != v and col[u] != 0.0]
    for i, u in enumerate(nbrs):
        for z in nbrs[i + 1:]:
            w = (-col[u]) * (-col[z]) / d
            pair_form[u, u] += w
            pair_form[z, z] += w
            pair_form[u, z] -= w
            pair_form[z, u] -= w
    scale = max(np.abs(matrix_form).max(), 1.0)
    if np.abs(matrix_form - pair_form).max() > 1e-12 * scale:
        raise AssertionError("clique computation routes disagree")
    return pair_form


def clique_from_star(star, v, n):
    """The exact clique from an explicit star list, by the pairwise-weight
    formula over aggregated neighbor weights."""
    agg = {}
    total = 0.0
    for e in star:
        u = e.other(v)
        agg[u] = agg.get(u, 0.0) + e.w
        total += e.w
    C = np.zeros((n, n))
    nbrs = list(agg)
    for i, u in enumerate(nbrs):
        for z in nbrs[i + 1:]:
            w = agg[u] * agg[z] / total
            C[u, u] += w
            C[z, z] += w
            C[u, z] -= w
            C[z, u] -= w
    return C


def expected_clique_sample_mean(star, v, n):
    """Exact per-attempt expectation of the clique sampler on this star.

    Enumerates every (e1, e2) pair with e1's probability reconstructed from
    the alias table cells and e2 uniform, accumulating the sampled-edge
    Laplacians.  Independent of any random draws; compare against
    clique_from_star(...) / len(star).
    """
    from .sampling import alias_build  # deferred: oracle stays import-light

    d = len(star)
    w = np.array([e.w for e in star])
    nbr = [e.other(v) for e in star]
    pmf = alias_build(w).pmf()
    mean = np.zeros((n, n))
    for i in range(d):
        for j in range(d):
            u1, u2 = nbr[i], nbr[j]
            if u1 == u2:
                continue
            wn = w[i] * w[j] / (w[i] + w[j])
            pw = pmf[i] * (1.0 / d) * wn
            mean[u1, u1] += pw
            mean[u2, u2] += pw
            mean[u1, u2] -= pw
            mean[u2, u1] -= pw
    return mean


def _range_basis(n):
    # Orthonormal basis of the mean-zero subspace: the trailing columns of
    # the Householder reflection sending e_1 to the normalized all-ones.
    e = np.zeros(n)
    e[0] = 1.0
    ones = np.full(n, 1.0 / np.sqrt(n))
    u = e - ones
    H = np.eye(n) - 2.0 * np.outer(u, u) / (u @ u)
    return H[:, 1:]


def spectral_bounds(L, Z, kernel_tol=1e-9):
    """Extreme generalized eigenvalues of Z against L on range(L).

    Both arguments are Laplacians of connected graphs over the same
    vertices; Z must annihilate the all-ones vector (checked), so the
    trivial direction is excluded exactly.
    """
    A = _mat(L)
    B = _mat(Z)
    n = A.shape[0]
    ones = np.ones(n)
    scale = max(float(np.abs(B).max()), 1.0)
    if np.linalg.norm(B @ ones) > kernel_tol * scale * np.sqrt(n):
        raise ValueError("kernel mismatch: Z does not annihilate constants")
    vals, V = jacobi_eigendecomposition(A)
    lmax = float(vals.max(initial=0.0))
    keep = vals > KERNEL_CUTOFF * lmax
    inv_sqrt = np.zeros_like(vals)
    inv_sqrt[keep] = vals[keep] ** -0.5
    Lhalf_inv = (V * inv_sqrt) @ V.T
    M = Lhalf_inv @ B @ Lhalf_inv
    Q = _range_basis(n)
    gen_vals, _ = jacobi_eigendecomposition(Q.T @ M @ Q)
    return float(gen_vals[0]), float(gen_vals[-1])


def reff_triangle_check(L, u, v, z, tol=1e-9):
    """R(u,z) <= R(u,v) + R(v,z) up to tol."""
    R = effective_resistance_matrix(L)
    return bool(R[u, z] <= R[u, v] + R[v, z] + tol)


def l_norm(L, y):
    """sqrt(y^T L y), clamping rounding negatives."""
    q = float(y @ (_mat(L) @ y))
    return np.sqrt(max(q, 0.0))
