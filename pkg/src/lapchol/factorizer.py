"""Elimination drivers producing sparse approximate Cholesky factorizations.

``sparse_cholesky`` eliminates vertices one at a time: read the diagonal
alpha_k and the aggregated column, remove the star, and insert either
clique samples (the sparse variants) or the exact clique (verification
mode).  Vertex order is an upfront uniformly random shuffle, a
degree-capped adaptive choice, or a fixed override.

The per-step work runs in the fused elimination kernel of the selected
backend; the object-level equivalents in ``multigraph``/``sampling``
compose to the same bits and serve as the readable cross-check.
"""

import enum
import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import oracle
from ._kernels import get_backend
from .rng import SplitMix64, derive_stream

__all__ = [
    "Variant", "Config", "Factorization", "RunStats", "DiagnosticsRow",
    "sparse_cholesky", "choose_vertex_random", "choose_vertex_low_degree",
    "random_permutation", "effective_rho", "record_step_diagnostics",
]

DIAGNOSTICS_CAP = 128
_RESIDUAL_CLAMP = 1e-12


class Variant(enum.Enum):
    RANDOM_PERM = "random-perm"
    LOW_DEGREE = "low-degree"
    EXACT_CLIQUE = "exact"


def effective_rho(n, eps, delta):
    """The sampling multiplicity: ceil(12 (1+delta)^2 eps^-2 ln^2 n)."""
    return int(math.ceil(12.0 * (1.0 + delta) ** 2 * eps ** -2
                         * math.log(n) ** 2))


@dataclass
class Config:
    """Factorization parameters.

    The effective multiplicity rho is `rho_override` when set, otherwise
    the standard formula of `effective_rho` (doubled for the low-degree
    variant, which randomizes over fewer vertices per step).
    """

    eps: float = 0.5
    delta: float = 1.0
    rho_override: int | None = None
    variant: Variant = Variant.RANDOM_PERM
    seed: int = 0
    track_leverage: bool = False
    record_diagnostics: bool = False
    perm_override: list | None = None

    def validate(self):
        if not (0.0 < self.eps <= 0.5):
            raise ValueError("eps must lie in (0, 1/2]")
        if self.delta < 1.0:
            raise ValueError("delta must be at least 1")
        if self.rho_override is not None and self.rho_override < 1:
            raise ValueError("rho override must be a positive integer")

    def rho(self, n):
        if self.rho_override is not None:
            return int(self.rho_override)
        base = effective_rho(n, self.eps, self.delta)
        if self.variant is Variant.LOW_DEGREE:
            return 2 * base
        return base


@dataclass
class DiagnosticsRow:
    step: int
    lambda_min: float
    lambda_max: float
    within_eps: bool
    truncation_ok: bool
    live_edges: int


@dataclass
class RunStats:
    """Work and trajectory counters for one factorization run."""

    n: int
    m_input: int
    rho: int
    variant: str
    seed: int
    live_edges: np.ndarray      # post-split, then after each step; length n
    star_mult: np.ndarray       # multi-edge degree at each elimination
    emitted: np.ndarray         # clique samples inserted at each step
    attempts_total: int = 0
    fill: int = 0
    wall_times: dict = field(default_factory=dict)
    diagnostics: list | None = None
    diagnostics_skipped: bool = False
    vertex_draws: int = 0       # rejection draws spent picking vertices


@dataclass
class Factorization:
    """Output P L D L^T P^T in sum form: diag holds alpha_k, the k-th
    stored column is c_k (unit diagonal entry first, in vertex ids)."""

    n: int
    perm: np.ndarray
    col_ptr: np.ndarray
    col_idx: np.ndarray
    col_val: np.ndarray
    diag: np.ndarray
    stats: RunStats | None = None
    graph: object = None

    def column(self, k):
        lo, hi = self.col_ptr[k], self.col_ptr[k + 1]
        return self.col_idx[lo:hi], self.col_val[lo:hi]

    @property
    def nnz(self):
        return int(self.col_ptr[-1])


def random_permutation(n, rng):
    """Uniform permutation by Fisher-Yates on the given stream."""
    backend = get_backend("auto")
    state = rng.state_array()
    perm = backend.fisher_yates(n, state)
    rng.set_from_array(state)
    return perm


def choose_vertex_random(remaining, rng):
    """Uniform choice among the remaining vertices."""
    return int(remaining[rng.uniform_index(len(remaining))])


def choose_vertex_low_degree(g, remaining, rng, draws=None):
    """Uniform choice among remaining vertices of multi-edge degree at most
    twice the average (rejection sampling; at least half qualify, so the
    expected number of draws is at most 2)."""
    n_rem = len(remaining)
    # degree cap: mult <= 2 * (total live endpoints / n_rem), in exact ints
    live4 = 4 * g.live_edge_total
    while True:
        j = rng.uniform_index(n_rem)
        if draws is not None:
            draws[0] += 1
        v = int(remaining[j])
        if int(g.live_mult[v]) * n_rem <= live4:
            return v


class _Workspace:
    """Reusable per-step scratch sized to the largest star seen."""

    def __init__(self, n):
        self.n = n
        self.wdedup = np.zeros(n, dtype=np.float64)
        self.tdedup = np.zeros(n, dtype=np.float64)
        self.col_idx = np.empty(n, dtype=np.int64)
        self.col_w = np.empty(n, dtype=np.float64)
        self.col_t = np.empty(n, dtype=np.float64)
        self.star_cap = 0
        self.star_nbr = self.star_w = self.star_t = None
        self.prob = self.alias = self.small = self.large = None
        self._grow_star(64)

    def _grow_star(self, need):
        cap = max(need, self.star_cap * 2, 64)
        self.star_nbr = np.empty(cap, dtype=np.int32)
        self.star_w = np.empty(cap, dtype=np.float64)
        self.star_t = np.empty(cap, dtype=np.float64)
        self.prob = np.empty(cap, dtype=np.float64)
        self.alias = np.empty(cap, dtype=np.int64)
        self.small = np.empty(cap, dtype=np.int64)
        self.large = np.empty(cap, dtype=np.int64)
        self.star_cap = cap

    def ensure_star(self, need):
        if need > self.star_cap:
            self._grow_star(need)


def record_step_diagnostics(L_dense, Lk_dense, eps, step, live_edges,
                            truncation_ok_so_far, S_dense=None):
    """One diagnostic row: the extreme generalized eigenvalues of the
    running approximation against the input, and whether every prefix so
    far stayed within the eps band.  When the current elimination state is
    supplied it is also validated to still be a Laplacian."""
    if S_dense is not None:
        oracle.DenseLap(S_dense)
    lmin, lmax = oracle.spectral_bounds(L_dense, Lk_dense)
    within = (lmin >= 1.0 - eps - 1e-9) and (lmax <= 1.0 + eps + 1e-9)
    return DiagnosticsRow(step=step, lambda_min=lmin, lambda_max=lmax,
                          within_eps=within,
                          truncation_ok=truncation_ok_so_far and within,
                          live_edges=live_edges)


def sparse_cholesky(g, cfg, backend=None, keep_graph=False):
    """Factor the Laplacian of the connected multigraph g.

    Parameters
    ----------
    g : MultiGraph
        The input (pre-split) graph; it is not modified.
    cfg : Config
        Variant, accuracy/seed parameters, and diagnostics switches.
    backend : str, optional
        "auto" (default), "numba", or "numpy".
    keep_graph : bool
        Attach the fully eliminated split graph (its append-only pool holds
        every multi-edge that was ever alive) to the result for inspection.

    Returns
    -------
    Factorization
    """
    cfg.validate()
    n = g.n
    if n < 2:
        raise ValueError("factorization needs at least two vertices")
    if not g.is_connected():
        raise ValueError("input graph is disconnected")
    kern = get_backend(backend)

    t_start = time.perf_counter()
    rho = cfg.rho(n)
    sg = g.split_edges(rho, track_leverage=cfg.track_leverage)
    t_split = time.perf_counter()

    m_input = g.live_edge_total
    diag_scale = 2.0 * sg.total_weight() / n

    if cfg.perm_override is not None:
        perm = np.asarray(cfg.perm_override, dtype=np.int64)
        if sorted(perm.tolist()) != list(range(n)):
            raise ValueError("perm_override is not a permutation")
        fixed_perm = True
    elif cfg.variant is Variant.RANDOM_PERM:
        perm = random_permutation(n, SplitMix64.for_stream(cfg.seed, 0))
        fixed_perm = True
    elif cfg.variant is Variant.EXACT_CLIQUE:
        perm = np.arange(n, dtype=np.int64)
        fixed_perm = True
    else:
        perm = np.empty(n, dtype=np.int64)
        fixed_perm = False

    vertex_rng = SplitMix64.for_stream(cfg.seed, 0)
    remaining = np.arange(n, dtype=np.int64)
    position = np.arange(n, dtype=np.int64)
    n_rem = n
    draws = [0]

    ws = _Workspace(n)
    state = np.zeros(1, dtype=np.uint64)
    track = cfg.track_leverage
    exact = cfg.variant is Variant.EXACT_CLIQUE

    live_edges = np.zeros(n, dtype=np.int64)
    star_mult = np.zeros(n, dtype=np.int64)
    emitted_arr = np.zeros(n, dtype=np.int64)
    live_edges[0] = sg.live_edge_total

    do_diag = cfg.record_diagnostics and n <= DIAGNOSTICS_CAP
    diag_skipped = cfg.record_diagnostics and not do_diag
    diagnostics = [] if do_diag else None
    if do_diag:
        L_dense = g.reconstruct_dense()
        partial = np.zeros((n, n))
        trunc_ok = True
        diagnostics.append(record_step_diagnostics(
            L_dense, sg.reconstruct_dense(), cfg.eps, 0,
            sg.live_edge_total, True))
        trunc_ok = diagnostics[-1].truncation_ok

    cols_idx = []
    cols_val = []
    col_ptr = np.zeros(n + 1, dtype=np.int64)
    diag = np.zeros(n, dtype=np.float64)
    attempts_total = 0

    for k in range(n - 1):
        if fixed_perm:
            v = int(perm[k])
        else:
            v = choose_vertex_low_degree(sg, remaining[:n_rem], vertex_rng,
                                         draws)
            perm[k] = v
        # swap-remove v from the remaining pool
        j = position[v]
        last = remaining[n_rem - 1]
        remaining[j] = last
        position[last] = j
        n_rem -= 1

        mult = int(sg.live_mult[v])
        star_mult[k] = mult
        if exact:
            pairs = min(mult, n) * (min(mult, n) - 1) // 2 + 1
            sg._ensure_capacity(pairs)
        else:
            sg._ensure_capacity(mult)
        ws.ensure_star(mult)
        state[0] = derive_stream(cfg.seed, k + 1)

        if exact:
            alpha, ncol, emitted, n_edges, attempts = kern.eliminate_step_exact(
                v, sg._eu, sg._ev, sg._ew, sg._et, sg._alive, sg._head,
                sg._nxt, sg.live_mult, sg.weighted_deg, sg.n_edges,
                ws.star_nbr, ws.star_w, ws.star_t,
                ws.wdedup, ws.tdedup, ws.col_idx, ws.col_w, ws.col_t, track)
        else:
            alpha, ncol, emitted, n_edges, attempts = kern.eliminate_step(
                v, sg._eu, sg._ev, sg._ew, sg._et, sg._alive, sg._head,
                sg._nxt, sg.live_mult, sg.weighted_deg, sg.n_edges, state,
                ws.star_nbr, ws.star_w, ws.star_t,
                ws.prob, ws.alias, ws.small, ws.large,
                ws.wdedup, ws.tdedup, ws.col_idx, ws.col_w, ws.col_t, track)
        sg.n_edges = int(n_edges)
        sg.live_edge_total += int(emitted) - int(attempts)
        sg.mark_eliminated(v)
        attempts_total += int(attempts)
        emitted_arr[k] = emitted
        live_edges[k + 1] = sg.live_edge_total

        diag[k] = alpha
        if alpha != 0.0:
            idx = np.empty(ncol + 1, dtype=np.int64)
            val = np.empty(ncol + 1, dtype=np.float64)
            idx[0] = v
            val[0] = 1.0
            idx[1:] = ws.col_idx[:ncol]
            val[1:] = -ws.col_w[:ncol] / alpha
        else:
            idx = np.empty(0, dtype=np.int64)
            val = np.empty(0, dtype=np.float64)
        cols_idx.append(idx)
        cols_val.append(val)
        col_ptr[k + 1] = col_ptr[k] + idx.shape[0]

        if do_diag:
            if alpha != 0.0:
                c = np.zeros(n)
                c[idx] = val
                partial += alpha * np.outer(c, c)
            S_dense = sg.reconstruct_dense()
            row = record_step_diagnostics(
                L_dense, S_dense + partial, cfg.eps, k + 1,
                sg.live_edge_total, trunc_ok, S_dense=S_dense)
            trunc_ok = row.truncation_ok
            diagnostics.append(row)

    # final vertex: alpha_n is the residual diagonal (zero for connected
    # inputs up to counter drift, clamped), c_n the unit vector
    v_last = int(remaining[0]) if not fixed_perm else int(perm[n - 1])
    if not fixed_perm:
        perm[n - 1] = v_last
    alpha_n = float(sg.weighted_deg[v_last])
    if abs(alpha_n) < _RESIDUAL_CLAMP * diag_scale:
        alpha_n = 0.0
    diag[n - 1] = alpha_n
    sg.mark_eliminated(v_last)
    cols_idx.append(np.array([v_last], dtype=np.int64))
    cols_val.append(np.array([1.0]))
    col_ptr[n] = col_ptr[n - 1] + 1

    t_elim = time.perf_counter()

    stats = RunStats(
        n=n, m_input=m_input, rho=rho, variant=cfg.variant.value,
        seed=cfg.seed, live_edges=live_edges, star_mult=star_mult,
        emitted=emitted_arr, attempts_total=attempts_total,
        fill=int(col_ptr[n]),
        wall_times={"split_s": t_split - t_start,
                    "eliminate_s": t_elim - t_split,
                    "total_s": t_elim - t_start},
        diagnostics=diagnostics, diagnostics_skipped=diag_skipped,
        vertex_draws=draws[0],
    )
    return Factorization(
        n=n, perm=perm, col_ptr=col_ptr,
        col_idx=np.concatenate(cols_idx) if cols_idx else np.empty(0, np.int64),
        col_val=np.concatenate(cols_val) if cols_val else np.empty(0),
        diag=diag, stats=stats, graph=sg if keep_graph else None)
