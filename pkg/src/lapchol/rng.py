"""Seedable 64-bit RNG with a fixed stream discipline.

The generator is splitmix64.  A factorization owns one root seed and
derives independent substreams from it: substream 0 drives vertex choices
(the upfront shuffle or the low-degree rejection draws), substream k >= 1
drives the clique sampling of elimination step k.  Keeping one substream
per elimination step makes whole factorizations bit-reproducible no matter
how the work inside a step is reorganized.

This module is the Python-level face of the stream; the kernels in
``lapchol._kernel_impl`` advance the same recurrence and the two are kept
bit-compatible (covered by the backend-equivalence tests).
"""

import numpy as np

from ._kernel_impl import GOLDEN, INV53, MASK64, _MIX1, _MIX2

__all__ = ["SplitMix64", "derive_stream", "mix64"]


def mix64(z):
    """The splitmix64 output mix over a masked 64-bit integer."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * _MIX1) & MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & MASK64
    return z ^ (z >> 31)


def derive_stream(root, index):
    """Starting state of substream `index` under root seed `root`."""
    return mix64((int(root) + (int(index) + 1) * GOLDEN) & MASK64)


class SplitMix64:
    """splitmix64 stream; state advances by the golden-ratio increment and
    each output is the mixed state."""

    __slots__ = ("state",)

    def __init__(self, state):
        self.state = int(state) & MASK64

    @classmethod
    def for_stream(cls, root, index):
        return cls(derive_stream(root, index))

    def next_u64(self):
        s = (self.state + GOLDEN) & MASK64
        self.state = s
        z = ((s ^ (s >> 30)) * _MIX1) & MASK64
        z = ((z ^ (z >> 27)) * _MIX2) & MASK64
        return z ^ (z >> 31)

    def uniform(self):
        """One double in [0, 1) with 53 random bits."""
        return (self.next_u64() >> 11) * INV53

    def uniform_index(self, bound):
        """floor(u * bound), redrawing the rounding boundary."""
        while True:
            idx = int(self.uniform() * bound)
            if idx < bound:
                return idx

    def state_array(self):
        """The state as a 1-element uint64 array, as the kernels take it."""
        return np.array([self.state], dtype=np.uint64)

    def set_from_array(self, arr):
        self.state = int(arr[0])
