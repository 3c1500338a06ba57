"""Weighted O(1) discrete sampling and the clique sampler.

The alias table is Walker's structure: O(d) construction, two uniform
draws per sample (cell, then a biased coin).  ``clique_sample`` replaces
the clique created by eliminating a vertex with at most deg(v) unbiased
multi-edge samples: per attempt, one endpoint edge is drawn proportionally
to weight, the other uniformly, and distinct far endpoints contribute a
multi-edge with the series weight w1*w2/(w1+w2).

These are the object-level faces of the corresponding kernels and consume
the RNG stream in the identical order, so composed drivers reproduce the
fused elimination bit for bit.
"""

from dataclasses import dataclass, field

import numpy as np

from . import _kernel_impl as _impl
from ._kernels import active as _K
from .multigraph import MultiEdge

__all__ = ["AliasTable", "alias_build", "alias_sample", "alias_sample_many",
           "CliqueSampleOutput", "clique_sample"]


@dataclass
class AliasTable:
    """Walker alias structure: cell i returns i with probability prob[i],
    otherwise alias[i]."""

    prob: np.ndarray
    alias: np.ndarray
    total: float

    @property
    def size(self):
        return self.prob.shape[0]

    def pmf(self):
        """The exact probability mass function the table realizes."""
        d = self.size
        p = self.prob / d
        residual = (1.0 - self.prob) / d
        np.add.at(p, self.alias, residual)
        return p


def alias_build(weights, backend=None):
    """Build an alias table over nonnegative weights (at least one must be
    positive).  O(d) work, each weight touched a constant number of times."""
    w = np.ascontiguousarray(weights, dtype=np.float64)
    d = w.shape[0]
    if d == 0:
        raise ValueError("alias table needs at least one weight")
    if np.any(w < 0) or np.any(~np.isfinite(w)):
        raise ValueError("alias weights must be finite and nonnegative")
    if not np.any(w > 0):
        raise ValueError("alias table needs at least one positive weight")
    prob = np.empty(d, dtype=np.float64)
    alias = np.empty(d, dtype=np.int64)
    small = np.empty(d, dtype=np.int64)
    large = np.empty(d, dtype=np.int64)
    k = _K if backend is None else backend
    total = k.alias_build(w, d, prob, alias, small, large)
    return AliasTable(prob, alias, float(total))


def alias_sample(table, rng):
    """One index from the table: exactly two draws from rng (cell, coin)."""
    d = table.size
    cell = int(rng.uniform() * d)
    if cell >= d:
        cell = d - 1
    if rng.uniform() < table.prob[cell]:
        return cell
    return int(table.alias[cell])


def alias_sample_many(table, rng, count):
    """`count` indices as an int64 array, advancing rng`s stream."""
    out = np.empty(count, dtype=np.int64)
    state = rng.state_array()
    _K.alias_sample_many(table.prob, table.alias, table.size, state, out)
    rng.set_from_array(state)
    return out


@dataclass
class CliqueSampleOutput:
    """Sampled replacement for an elimination clique: `attempted` equals
    the multi-edge degree of the eliminated vertex, `samples` holds the
    non-degenerate draws (endpoints are distinct neighbors)."""

    samples: list = field(default_factory=list)
    attempted: int = 0


def clique_sample(star, v, w_total, rng):
    """Sample the elimination clique for vertex v from its star.

    Parameters
    ----------
    star : list of MultiEdge
        The live multi-edges incident on v (nonempty).
    v : int
        The vertex being eliminated.
    w_total : float
        Sum of the star weights.
    rng : SplitMix64
        The elimination step's substream.

    Returns
    -------
    CliqueSampleOutput
        One attempt per star edge; degenerate attempts (both draws landing
        on the same neighbor) are dropped, so len(samples) <= attempted.
    """
    cnt = len(star)
    if cnt == 0:
        raise ValueError("clique_sample requires a nonempty star")
    nbr = np.empty(cnt, dtype=np.int64)
    w = np.empty(cnt, dtype=np.float64)
    track = star[0].t is not None
    t = np.empty(cnt, dtype=np.float64)
    for i, e in enumerate(star):
        nbr[i] = e.other(v)
        w[i] = e.w
        if track:
            t[i] = e.t
    table = alias_build(w, backend=_impl)
    out = CliqueSampleOutput(attempted=cnt)
    for _ in range(cnt):
        i1 = alias_sample(table, rng)
        i2 = rng.uniform_index(cnt)
        u1 = int(nbr[i1])
        u2 = int(nbr[i2])
        if u1 != u2:
            w1 = w[i1]
            w2 = w[i2]
            wn = w1 * w2 / (w1 + w2)
            tn = None
            if track:
                tn = (w2 * t[i1] + w1 * t[i2]) / (w1 + w2)
            out.samples.append(MultiEdge(u1, u2, float(wn), tn))
    return out
