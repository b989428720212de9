"""Counter-based pseudo-random streams (splitmix64 finalizer).

Every random decision in the samplers is a pure function of
``mix64(key + counter * GAMMA)``, where ``key`` identifies a stream and the
counter just increments.  Streams are derived by folding arbitrary integer
tags (seed, slot index, purpose tag, vertex index, ...) into a key, so

* any worker can regenerate any slot's stream without coordination, and
* an accepted rejection attempt can be replayed exactly from its starting
  counter value.

The same arithmetic is reimplemented inside the numba kernel
(:mod:`polyatree.sampler.fast`); a unit test pins the two to identical
outputs.
"""

from __future__ import annotations

MASK64 = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB

# Purpose tags for derived streams. Values are arbitrary but frozen:
# changing them changes every sampled tree for a given seed.
DOMAIN_REFERENCE = 0x52454631  # reference-path sampler draws
DOMAIN_SKELETON = 0x534B454C   # fast-path kernel walk
DOMAIN_FOREST = 0x464F5221     # forest decomposition during reconstruction
DOMAIN_SHAPE = 0x53484150      # uniform-shape rejection inside forests


def mix64(z: int) -> int:
    """The splitmix64 output mix: a 64-bit bijective scrambler."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return (z ^ (z >> 31)) & MASK64


def stream_key(*tags: int) -> int:
    """Fold integer tags into a 64-bit stream key.

    Order-sensitive; every distinct tag tuple gives an (effectively)
    independent stream.
    """
    key = 0
    for t in tags:
        key = mix64((key ^ (t & MASK64)) + GAMMA)
    return key


class CounterRng:
    """A tiny counter-mode generator over one derived stream.

    Not a general-purpose RNG: exactly what the reference sampler and the
    reconstruction paths need — uniforms in [0,1) and raw 64-bit words —
    with a replayable, jump-free counter.
    """

    __slots__ = ("key", "t")

    def __init__(self, key: int, t: int = 0):
        self.key = key & MASK64
        self.t = t

    def u64(self) -> int:
        self.t += 1
        return mix64((self.key + self.t * GAMMA) & MASK64)

    def uniform(self) -> float:
        """Uniform in [0, 1) with 53 random bits."""
        return (self.u64() >> 11) * 2.0 ** -53

    def clone(self) -> "CounterRng":
        return CounterRng(self.key, self.t)
