"""Tree functionals and the closed-form height laws of the continuum limit.

``compute_stats`` reduces one colored tree to the scalar summaries the
experiments aggregate: height and width of the whole tree, the blue
subtree's size/height/degree histogram, and the largest dangling forest.
The arena stores parents before children, so one forward sweep computes
every depth-derived quantity without recursion.

The continuum reference law is the height of the Brownian-excursion tree:

    P(H > x) = 2 * sum_{k>=1} (4 k^2 x^2 - 1) exp(-2 k^2 x^2),
    E[H^p]   = 2^(-p/2) p (p-1) Gamma(p/2) zeta(p)   (p >= 2),
    E[H]     = sqrt(pi/2).

The tail series converges slowly (with heavy cancellation) as x -> 0+; the
harness never evaluates below x = 0.05, and values are clamped to [0, 1].
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.special import zeta as _zeta

from .errors import InvariantViolation
from .sampler.core import ColoredTree

__all__ = ["TreeStats", "CrtLaw", "compute_stats", "crt_height_tail",
           "crt_height_moment"]


@dataclass(frozen=True)
class TreeStats:
    """Scalar summaries of one colored tree."""

    size: int
    height: int                      # edges, root alone has height 0
    width: int                       # max vertices at any one depth
    level_profile: tuple[int, ...]   # vertices per depth, root level included
    blue_size: int
    blue_height: int                 # height of the blue subtree
    max_forest: int                  # largest dangling forest |F(v)|
    blue_degree_histogram: tuple[int, ...]  # blue children counts of blue vertices

    def __post_init__(self):
        if sum(self.level_profile) != self.size:
            raise InvariantViolation("level profile does not sum to size")
        if self.height != len(self.level_profile) - 1:
            raise InvariantViolation("height must index the last nonzero level")
        if self.width != max(self.level_profile):
            raise InvariantViolation("width must be the max level occupancy")
        if sum(self.blue_degree_histogram) != self.blue_size:
            raise InvariantViolation("blue degree histogram must cover blue vertices")


@dataclass(frozen=True)
class CrtLaw:
    """Evaluation parameters for the continuum height law."""

    series_cutoff: float = 1e-16
    grid_lo: float = 0.05    # harness KS grid never evaluates below this
    grid_hi: float = 4.0

    def tail(self, x: float) -> float:
        return crt_height_tail(x, self.series_cutoff)

    def moment(self, p: int) -> float:
        return crt_height_moment(p)


def compute_stats(tree: ColoredTree) -> TreeStats:
    n = tree.size
    parent = tree.parent
    blue = tree.blue

    depth = [0] * n
    profile = [0] * n
    anchor = [0] * n          # nearest blue ancestor-or-self
    forest = [0] * n          # |F(v)| accumulated at blue anchors
    blue_children = [0] * n
    blue_size = 0
    blue_height = 0
    height = 0
    for v in range(n):
        p = parent[v]
        if p >= 0:
            d = depth[p] + 1
            depth[v] = d
            if d > height:
                height = d
        profile[depth[v]] += 1
        if blue[v]:
            blue_size += 1
            anchor[v] = v
            if depth[v] > blue_height:
                blue_height = depth[v]
            if p >= 0:
                blue_children[p] += 1
        else:
            a = anchor[p]
            anchor[v] = a
            forest[a] += 1

    level_profile = tuple(profile[: height + 1])
    hist = [0] * (max(blue_children[v] for v in range(n) if blue[v]) + 1)
    for v in range(n):
        if blue[v]:
            hist[blue_children[v]] += 1
    return TreeStats(
        size=n,
        height=height,
        width=max(level_profile),
        level_profile=level_profile,
        blue_size=blue_size,
        blue_height=blue_height,
        max_forest=max(forest),
        blue_degree_histogram=tuple(hist),
    )


def crt_height_tail(x: float, cutoff_tol: float = 1e-16) -> float:
    """P(height of the continuum tree > x), clamped to [0, 1].

    At x = 0 the height is positive almost surely, so the tail is 1.
    """
    if x < 0.0:
        raise ValueError("tail argument must be nonnegative")
    if x == 0.0:
        return 1.0
    total = 0.0
    k = 0
    while True:
        k += 1
        q = 2.0 * (k * x) ** 2
        e = math.exp(-q)
        total += (2.0 * q - 1.0) * e
        # terms decrease monotonically once 2q > 1; stop when they cannot
        # matter (bound covers everything later via the geometric envelope)
        if q > 1.0 and (2.0 * q + 1.0) * e < cutoff_tol:
            break
    return min(1.0, max(0.0, 2.0 * total))


def crt_height_moment(p: int) -> float:
    """E[H^p] for the continuum height; p = 1 gives sqrt(pi/2)."""
    if not isinstance(p, int) or p < 1:
        raise ValueError("moment order must be an integer >= 1")
    if p == 1:
        return math.sqrt(math.pi / 2.0)
    return 2.0 ** (-p / 2.0) * p * (p - 1) * math.gamma(p / 2.0) * float(_zeta(p, 1))
