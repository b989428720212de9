"""Joint law of (blue children, forest size) at a blue vertex, packed for speed.

A blue vertex draws a cycle type; its j fixpoints become blue children and
its cycles of length l >= 2 materialize l copies of a subtree each, for a
non-blue forest of total size f.  Summing the cycle-type law over everything
but (j, f) gives

    P(j, f) = (rho / A) * (A^j / j!) * S_j(f),
    S_j(f)  = sum over k in Omega, k >= j of R_{k-j}(f),

where R_m(f) is the weight of fixpoint-free cycle arrangements of order m
whose copies materialize exactly f vertices.  R satisfies a Newton-style
recurrence driven by per-cycle weights a_t * rho^(l t):

    m R_m(f) = sum_{l=2..m} sum_{t>=1, lt<=f} a_t rho^(lt) R_{m-l}(f - lt).

The fast sampling kernel draws (j, f) pairs from one alias table per degree
set; the reconstruction path re-expands an accepted draw sequence into a
full colored tree using the same R tables (conditional cycle peeling).

The forest size is truncated at ``f_cap``; the dropped relative mass is
reported as ``truncation_mass`` and stays far below any statistical
resolution in use (it is ~1e-15 for the degree sets sampled at scale).
"""

from __future__ import annotations

import math
from bisect import bisect_left

import numpy as np

from ..errors import InvariantViolation, TruncationTooShort
from ..gf_analysis import SingularData, _term
from ..series_core import DegreeSet
from .rng import CounterRng

__all__ = ["JointLaw", "AliasTable", "build_joint_law"]

F_CAP_DEFAULT = 128
PAIR_FLOOR = 2.0**-70   # (j,f) pairs below this probability are dropped
MAX_CELLS = 4096        # alias index must fit in the low 12 bits of a draw

_JF_BITS = 16           # (j << 8 | f) per outcome: both must fit one byte
_THRESHOLD_BITS = 32


class JointLaw:
    """Tabulated P(j, f) plus the R tables needed to re-expand forests."""

    __slots__ = (
        "omega", "sing", "f_cap", "ks", "R", "P",
        "pairs", "probs", "truncation_mass",
    )

    def __init__(self, omega, sing, f_cap, ks, R, P, pairs, probs, truncation_mass):
        self.omega = omega
        self.sing = sing
        self.f_cap = f_cap
        self.ks = ks                # degree support (ascending)
        self.R = R                  # R[m] = float array over f = 0..f_cap
        self.P = P                  # P[j][f] before trimming/renormalizing
        self.pairs = pairs          # kept (j, f), lexicographic
        self.probs = probs          # renormalized probabilities, same order
        self.truncation_mass = truncation_mass

    # -- reconstruction -----------------------------------------------------

    def draw_order(self, j: int, f: int, rng: CounterRng) -> int:
        """Total degree k given j fixpoints and forest size f: P proportional
        to R_{k-j}(f) over k in Omega, k >= j."""
        weights = []
        ks = []
        for k in self.ks:
            if k < j:
                continue
            w = self.R[k - j][f]
            if w > 0.0:
                ks.append(k)
                weights.append(w)
        if not ks:
            raise InvariantViolation(f"(j={j}, f={f}) has no admissible degree")
        if len(ks) == 1:
            return ks[0]
        total = math.fsum(weights)
        target = rng.uniform() * total
        acc = 0.0
        for k, w in zip(ks, weights):
            acc += w
            if acc >= target:
                return k
        return ks[-1]

    def peel_cycle(self, m: int, f: int, rng: CounterRng) -> tuple[int, int]:
        """First cycle (length l, subtree size t) of a fixpoint-free
        arrangement of order m and forest size f:
        P(l, t) = a_t rho^(lt) R_{m-l}(f-lt) / (m R_m(f))."""
        R = self.R
        counts = self.sing.counts
        rho = self.sing.rho
        target = rng.uniform() * (m * R[m][f])
        acc = 0.0
        last = None
        for length in range(2, m + 1):
            rest = R[m - length]
            for t in range(1, f // length + 1):
                at = counts.a[t]
                if at == 0:
                    continue
                w = _term(at, rho**length, t) * rest[f - length * t]
                if w <= 0.0:
                    continue
                acc += w
                last = (length, t)
                if acc >= target:
                    return last
        if last is None:
            raise InvariantViolation(f"cannot peel order {m} forest size {f}")
        return last


def _degree_support(omega: DegreeSet, sing: SingularData) -> list[int]:
    """Degrees retained for the law.

    Tailed sets reuse the reference path's adaptive cut at exponent 1, so
    both sampling paths share one truncated degree support.
    """
    if omega.tail_from is None:
        return list(omega.explicit)
    from .core import ExponentTables

    ent = ExponentTables(omega, sing).ensure(1)
    return list(ent.ks)


def build_joint_law(
    omega: DegreeSet,
    sing: SingularData,
    f_cap: int = F_CAP_DEFAULT,
) -> JointLaw:
    if f_cap < 2 or f_cap > sing.counts.N:
        raise ValueError("f_cap must lie within the exact count table")
    rho = sing.rho
    A = sing.a_rho
    counts = sing.counts
    ks = _degree_support(omega, sing)
    k_max = ks[-1]

    # per-cycle weights: cycle of length l with subtree size t contributes
    # a_t rho^(lt) at forest size lt
    R = [np.zeros(f_cap + 1) for _ in range(k_max + 1)]
    R[0][0] = 1.0
    for m in range(1, k_max + 1):
        acc = np.zeros(f_cap + 1)
        for length in range(2, m + 1):
            rest = R[m - length]
            xl = rho**length
            for t in range(1, f_cap // length + 1):
                at = counts.a[t]
                if at == 0:
                    continue
                w = _term(at, xl, t)
                lt = length * t
                acc[lt:] += w * rest[: f_cap + 1 - lt]
        R[m] = acc / m

    P = np.zeros((k_max + 1, f_cap + 1))
    for j in range(k_max + 1):
        s = np.zeros(f_cap + 1)
        for k in ks:
            if k >= j:
                s += R[k - j]
        P[j] = (rho / A) * (A**j / math.gamma(j + 1)) * s

    total = float(P.sum())
    # total mass below 1 comes from the f > f_cap tail and (for tailed
    # degree sets) the k > k_max tail
    truncation = 1.0 - total
    if truncation > 1e-9:
        raise TruncationTooShort(
            f"joint law mass {total} too far from 1; raise f_cap"
        )

    pairs = []
    probs = []
    kept = 0.0
    for j in range(k_max + 1):
        for f in range(f_cap + 1):
            p = float(P[j, f])
            if p >= PAIR_FLOOR:
                pairs.append((j, f))
                probs.append(p)
                kept += p
    probs = [p / kept for p in probs]
    truncation_mass = 1.0 - kept
    return JointLaw(omega, sing, f_cap, ks, R, P, pairs, probs, truncation_mass)


class AliasTable:
    """Walker alias table over (j, f) pairs, one uint64 cell per slot.

    Cell layout: ``threshold << 32 | alias_jf << 16 | primary_jf`` with
    ``jf = j << 8 | f`` (both fit a byte: f <= f_cap <= 255, j <= k_max).
    One 64-bit draw decides everything branchlessly: ``idx = u & mask``
    picks the cell (mask is at most 12 bits, disjoint from the threshold
    bits), and the draw takes the primary pair iff the top 32 bits of u
    are below the threshold, the alias pair otherwise.  Thresholds are
    quantized to 32 bits (saturating at 2^32 - 1), a total-variation
    perturbation of ~2^-32 — invisible at any statistical scale in use.
    """

    __slots__ = ("cells", "mask", "size", "pairs", "probs")

    def __init__(self, pairs: list[tuple[int, int]], probs: list[float]):
        n = len(pairs)
        if n == 0:
            raise InvariantViolation("alias table needs at least one outcome")
        size = 1
        while size < n:
            size *= 2
        if size > MAX_CELLS:
            raise InvariantViolation(f"{n} outcomes exceed {MAX_CELLS} alias cells")
        for j, f in pairs:
            if not (0 <= f < 256 and 0 <= j < 256):
                raise InvariantViolation(f"pair ({j},{f}) does not fit one byte each")

        top = (1 << _THRESHOLD_BITS) - 1   # saturated threshold: alias unreachable
        # Vose init on the padded outcome list (padding has probability 0)
        scaled = [p * size for p in probs] + [0.0] * (size - n)
        alias = [0] * size
        thresh = [0] * size
        small = [i for i, s in enumerate(scaled) if s < 1.0]
        large = [i for i, s in enumerate(scaled) if s >= 1.0]
        while small and large:
            s = small.pop()
            g = large.pop()
            thresh[s] = min(top, round(scaled[s] * (1 << _THRESHOLD_BITS)))
            alias[s] = g
            scaled[g] = (scaled[g] + scaled[s]) - 1.0
            (small if scaled[g] < 1.0 else large).append(g)
        for i in large + small:
            thresh[i] = top
            alias[i] = i

        jf = [(j << 8) | f for j, f in pairs] + [0] * (size - n)
        cells = np.zeros(size, dtype=np.uint64)
        for i in range(size):
            cells[i] = (thresh[i] << 32) | (jf[alias[i]] << _JF_BITS) | jf[i]
        self.cells = cells
        self.mask = size - 1
        self.size = size
        self.pairs = list(pairs)
        self.probs = list(probs)

    def decode(self, u: int) -> tuple[int, int]:
        """Map one 64-bit word to a (j, f) pair — the kernel's exact logic."""
        w = int(self.cells[u & self.mask])
        jf = w & 0xFFFF if (u >> 32) < (w >> 32) else (w >> _JF_BITS) & 0xFFFF
        return jf >> 8, jf & 0xFF
