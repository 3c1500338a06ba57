"""Laplacians kept explicitly as sums of multi-edges.

A MultiGraph is the evolving elimination state: an append-only pool of
weighted edges with alive flags, per-vertex adjacency as linked lists of
arcs (lazy deletion: entries killed from the far side are discarded the
next time a list is walked), and incrementally maintained degree counters.

The array layout (edge endpoint/weight/leverage arrays plus head/nxt arc
lists) is shared with the compiled kernels; the methods here are the
object-level face of the same state and perform the identical per-edge
operations in the identical order, so a driver composed from these methods
reproduces the fused kernels bit for bit.
"""

from collections import deque
from dataclasses import dataclass

import numpy as np

from ._kernels import active as _K

__all__ = ["MultiEdge", "MultiGraph", "DedupScratch"]

# Arc ids are int32; one edge owns two arcs.
_MAX_EDGES = (1 << 30) - 2


@dataclass
class MultiEdge:
    """One weighted unordered pair.  `t` is an optional leverage upper
    bound carried for diagnostics; `alive` reflects pool state."""

    u: int
    v: int
    w: float
    t: float | None = None
    alive: bool = True

    def other(self, x):
        return self.v if x == self.u else self.u


class DedupScratch:
    """Zeroed per-vertex accumulators used to aggregate a star into a
    column; every use must leave them zero again."""

    def __init__(self, n):
        self.weight = np.zeros(n, dtype=np.float64)
        self.leverage = np.zeros(n, dtype=np.float64)

    def is_clean(self):
        return not self.weight.any() and not self.leverage.any()


class MultiGraph:
    """Multi-edge Laplacian state over vertices 0..n-1."""

    def __init__(self, n, capacity=16, track_leverage=False):
        if n <= 0:
            raise ValueError("vertex count must be positive")
        self.n = int(n)
        self.track_leverage = bool(track_leverage)
        capacity = max(int(capacity), 4)
        self._eu = np.empty(capacity, dtype=np.int32)
        self._ev = np.empty(capacity, dtype=np.int32)
        self._ew = np.empty(capacity, dtype=np.float64)
        self._et = np.empty(capacity if track_leverage else 1, dtype=np.float64)
        self._alive = np.zeros(capacity, dtype=np.bool_)
        self._head = np.full(n, -1, dtype=np.int32)
        self._nxt = np.empty(2 * capacity, dtype=np.int32)
        self.n_edges = 0
        self.live_mult = np.zeros(n, dtype=np.int64)
        self.weighted_deg = np.zeros(n, dtype=np.float64)
        self.live_edge_total = 0
        self.eliminated = np.zeros(n, dtype=np.bool_)

    # -- construction ----------------------------------------------------

    @classmethod
    def from_edge_list(cls, n, edges, track_leverage=False):
        """Build from (u, v, w) triples; parallel entries stay distinct
        multi-edges.  Initial leverage bounds, when tracked, are 1."""
        eu = np.empty(len(edges), dtype=np.int64)
        ev = np.empty(len(edges), dtype=np.int64)
        ew = np.empty(len(edges), dtype=np.float64)
        for i, (u, v, w) in enumerate(edges):
            eu[i], ev[i], ew[i] = u, v, w
        return cls.from_arrays(n, eu, ev, ew,
                               et=np.ones(len(edges)) if track_leverage else None,
                               track_leverage=track_leverage)

    @classmethod
    def from_arrays(cls, n, eu, ev, ew, et=None, track_leverage=False):
        eu = np.asarray(eu, dtype=np.int64)
        ev = np.asarray(ev, dtype=np.int64)
        ew = np.asarray(ew, dtype=np.float64)
        m = eu.shape[0]
        if m > _MAX_EDGES:
            raise ValueError("edge pool limit exceeded")
        if m and (eu.min() < 0 or ev.min() < 0
                  or eu.max() >= n or ev.max() >= n):
            raise ValueError("vertex id out of range")
        if np.any(eu == ev):
            raise ValueError("self-loops are not allowed")
        if np.any(ew <= 0):
            raise ValueError("edge weights must be positive")
        g = cls(n, capacity=max(m, 4), track_leverage=track_leverage)
        g._eu[:m] = eu
        g._ev[:m] = ev
        g._ew[:m] = ew
        if track_leverage:
            g._et[:m] = 1.0 if et is None else np.asarray(et, dtype=np.float64)
        g._alive[:m] = True
        g.n_edges = m
        _K.build_adjacency(g._eu, g._ev, m, g._head, g._nxt)
        np.add.at(g.live_mult, eu, 1)
        np.add.at(g.live_mult, ev, 1)
        np.add.at(g.weighted_deg, eu, ew)
        np.add.at(g.weighted_deg, ev, ew)
        g.live_edge_total = m
        return g

    def split_edges(self, rho, track_leverage=None):
        """A new graph with every multi-edge replaced by rho copies of
        weight w/rho; the represented matrix is unchanged.  Tracked
        leverage bounds become 1/rho (whole edges are 1-bounded)."""
        rho = int(rho)
        if rho < 1:
            raise ValueError("rho must be a positive integer")
        track = self.track_leverage if track_leverage is None else bool(track_leverage)
        m = self.n_edges
        keep = self._alive[:m]
        eu = np.repeat(self._eu[:m][keep].astype(np.int64), rho)
        ev = np.repeat(self._ev[:m][keep].astype(np.int64), rho)
        ew = np.repeat(self._ew[:m][keep] / rho, rho)
        et = None
        if track:
            base = self._et[:m][keep] if self.track_leverage else np.ones(int(keep.sum()))
            et = np.repeat(base / rho, rho)
        return MultiGraph.from_arrays(self.n, eu, ev, ew, et=et,
                                      track_leverage=track)

    # -- capacity --------------------------------------------------------

    def _ensure_capacity(self, extra):
        need = self.n_edges + int(extra)
        cap = self._eu.shape[0]
        if need <= cap:
            return
        if need > _MAX_EDGES:
            raise ValueError("edge pool limit exceeded")
        new_cap = cap
        while new_cap < need:
            new_cap = min(max(new_cap * 2, 64), _MAX_EDGES)
        self._eu = np.resize(self._eu, new_cap)
        self._ev = np.resize(self._ev, new_cap)
        self._ew = np.resize(self._ew, new_cap)
        if self.track_leverage:
            self._et = np.resize(self._et, new_cap)
        alive = np.zeros(new_cap, dtype=np.bool_)
        alive[:self.n_edges] = self._alive[:self.n_edges]
        self._alive = alive
        self._nxt = np.resize(self._nxt, 2 * new_cap)

    # -- elimination-time mutations ---------------------------------------

    def remove_star(self, v):
        """Kill every live edge incident on v and return them (in adjacency
        order).  Counters are updated; v's adjacency list is dropped."""
        star = []
        a = int(self._head[v])
        while a != -1:
            e = a >> 1
            if self._alive[e]:
                u = int(self._eu[e])
                if u == v:
                    u = int(self._ev[e])
                w = float(self._ew[e])
                t = float(self._et[e]) if self.track_leverage else None
                star.append(MultiEdge(v, u, w, t, alive=False))
                self._alive[e] = False
                self.live_mult[u] -= 1
                self.weighted_deg[u] -= w
            a = int(self._nxt[a])
        self._head[v] = -1
        self.live_mult[v] = 0
        self.weighted_deg[v] = 0.0
        self.live_edge_total -= len(star)
        return star

    def insert_edges(self, edges):
        """Append the given edges alive.  Endpoints must not have been
        eliminated; hitting one is a driver bug."""
        for e in edges:
            if self.eliminated[e.u] or self.eliminated[e.v]:
                raise ValueError(
                    f"insert touches eliminated vertex in edge ({e.u}, {e.v})")
        self._ensure_capacity(len(edges))
        for e in edges:
            t = 0.0
            if self.track_leverage:
                t = 1.0 if e.t is None else float(e.t)
            self.n_edges = _K.append_edge(
                self._eu, self._ev, self._ew, self._et, self._alive,
                self._head, self._nxt, self.n_edges,
                int(e.u), int(e.v), float(e.w), t, self.track_leverage)
            self.live_mult[e.u] += 1
            self.live_mult[e.v] += 1
            self.weighted_deg[e.u] += e.w
            self.weighted_deg[e.v] += e.w
        self.live_edge_total += len(edges)

    def aggregated_column(self, v, scratch):
        """Aggregate v's star into one entry per distinct live neighbor
        (first-seen order) plus the star weight total.  The scratch must be
        all-zero on entry and is zeroed again before returning."""
        star_nbr = []
        star_w = []
        total = 0.0
        a = int(self._head[v])
        while a != -1:
            e = a >> 1
            if self._alive[e]:
                u = int(self._eu[e])
                if u == v:
                    u = int(self._ev[e])
                w = float(self._ew[e])
                star_nbr.append(u)
                star_w.append(w)
                total += w
                scratch.weight[u] += w
                if self.track_leverage:
                    scratch.leverage[u] += self._et[e]
            a = int(self._nxt[a])
        column = {}
        for u in star_nbr:
            if scratch.weight[u] != 0.0:
                column[u] = float(scratch.weight[u])
                scratch.weight[u] = 0.0
                scratch.leverage[u] = 0.0
        return column, total

    def star_edges(self, v):
        """The live edges incident on v, non-destructively, in the same
        order remove_star would return them."""
        star = []
        a = int(self._head[v])
        while a != -1:
            e = a >> 1
            if self._alive[e]:
                u = int(self._eu[e])
                if u == v:
                    u = int(self._ev[e])
                t = float(self._et[e]) if self.track_leverage else None
                star.append(MultiEdge(v, u, float(self._ew[e]), t))
            a = int(self._nxt[a])
        return star

    def mark_eliminated(self, v):
        self.eliminated[v] = True

    # -- queries ----------------------------------------------------------

    @property
    def edge_pool(self):
        """The append-only pool as MultiEdge objects (dead ones included).
        Intended for inspection at small scale."""
        out = []
        for e in range(self.n_edges):
            t = float(self._et[e]) if self.track_leverage else None
            out.append(MultiEdge(int(self._eu[e]), int(self._ev[e]),
                                 float(self._ew[e]), t,
                                 alive=bool(self._alive[e])))
        return out

    def live_edges(self):
        return [e for e in self.edge_pool if e.alive]

    def reconstruct_dense(self):
        """The dense matrix represented by the live edges.  Off-diagonals
        are accumulated once per unordered pair and mirrored, so the result
        is exactly symmetric."""
        n = self.n
        m = self.n_edges
        keep = self._alive[:m]
        eu = self._eu[:m][keep].astype(np.int64)
        ev = self._ev[:m][keep].astype(np.int64)
        ew = self._ew[:m][keep]
        deg = np.zeros(n)
        np.add.at(deg, eu, ew)
        np.add.at(deg, ev, ew)
        off = np.zeros((n, n))
        np.add.at(off, (np.minimum(eu, ev), np.maximum(eu, ev)), ew)
        L = -(off + off.T)
        L[np.arange(n), np.arange(n)] = deg
        return L

    def rescan_counters(self):
        """Recompute (live_mult, weighted_deg, live_edge_total) by a full
        pool scan, for consistency checks against the running counters."""
        mult = np.zeros(self.n, dtype=np.int64)
        wdeg = np.zeros(self.n, dtype=np.float64)
        m = self.n_edges
        keep = self._alive[:m]
        eu = self._eu[:m][keep]
        ev = self._ev[:m][keep]
        ew = self._ew[:m][keep]
        np.add.at(mult, eu, 1)
        np.add.at(mult, ev, 1)
        np.add.at(wdeg, eu, ew)
        np.add.at(wdeg, ev, ew)
        return mult, wdeg, int(keep.sum())

    def is_connected(self):
        if self.n == 1:
            return True
        seen = np.zeros(self.n, dtype=np.bool_)
        seen[0] = True
        queue = deque([0])
        reached = 1
        while queue:
            v = queue.popleft()
            a = int(self._head[v])
            while a != -1:
                e = a >> 1
                if self._alive[e]:
                    u = int(self._eu[e])
                    if u == v:
                        u = int(self._ev[e])
                    if not seen[u]:
                        seen[u] = True
                        reached += 1
                        queue.append(u)
                a = int(self._nxt[a])
        return reached == self.n

    def total_weight(self):
        return float(self._ew[:self.n_edges][self._alive[:self.n_edges]].sum())

    def copy(self):
        g = MultiGraph(self.n, capacity=max(self.n_edges, 4),
                       track_leverage=self.track_leverage)
        m = self.n_edges
        g._eu[:m] = self._eu[:m]
        g._ev[:m] = self._ev[:m]
        g._ew[:m] = self._ew[:m]
        if self.track_leverage:
            g._et[:m] = self._et[:m]
        g._alive[:m] = self._alive[:m]
        g._head[:] = self._head
        g._nxt[:2 * m] = self._nxt[:2 * m]
        g.n_edges = m
        g.live_mult[:] = self.live_mult
        g.weighted_deg[:] = self.weighted_deg
        g.live_edge_total = self.live_edge_total
        g.eliminated[:] = self.eliminated
        return g
