"""Rejection sampling at scale: a compiled kernel plus exact replay.

The kernel walks the blue skeleton only.  Every 64-bit counter draw maps
through the alias table to a (j, f) pair — j blue children, f non-blue
forest vertices — so one draw advances one blue vertex:

    stubs     += j - 1        (one stub consumed, j created)
    committed += 1 + f        (the vertex plus its forest)

An attempt ends as soon as it must: acceptance when the stub stack empties
inside the size window, abort when ``committed + stubs`` (a lower bound on
the final size) exceeds the window top.  Because every draw commits at
least one vertex, an attempt costs at most ``cap`` draws.

Acceptance is rare (Theta(n^{-3/2}) for exact size), so almost all work is
this loop; Python only re-plays the draws of *accepted* attempts — the
counter RNG makes the replay exact — and expands each (j, f) into actual
forests: the total degree k conditioned on (j, f), then cycles peeled one
at a time, then uniform subtree shapes per cycle via the reference path.
Forest randomness comes from per-(slot, vertex) streams, so a slot's tree
is one pure function of (seed, slot) no matter which worker runs it.
"""

from __future__ import annotations

import math

import numpy as np
from numba import int64, njit, uint64

from ..errors import AttemptsExhausted, InvariantViolation
from ..gf_analysis import SingularData
from ..series_core import DegreeSet
from .core import (
    ColoredTree,
    ExponentTables,
    SamplerBudget,
    check_admissible,
    sample_exact,
)
from .rng import (
    DOMAIN_FOREST,
    DOMAIN_SHAPE,
    DOMAIN_SKELETON,
    GAMMA,
    MASK64,
    CounterRng,
    mix64,
    stream_key,
)
from .tables import AliasTable, JointLaw, build_joint_law

__all__ = ["FastSampler", "SlotResult"]

_U_GAMMA = uint64(0x9E3779B97F4A7C15)
_U_M1 = uint64(0xBF58476D1CE4E5B9)
_U_M2 = uint64(0x94D049BB133111EB)

STATUS_ACCEPT = 1
STATUS_EXHAUSTED = 0


@njit(uint64(uint64), cache=True, nogil=True, inline="always")
def _mix64_nb(z):
    z = (z ^ (z >> uint64(30))) * _U_M1
    z = (z ^ (z >> uint64(27))) * _U_M2
    return z ^ (z >> uint64(31))


@njit(cache=True, nogil=True, inline="always")
def _decode_nb(u, cells, mask):
    w = cells[u & mask]
    take_alias = (u >> uint64(32)) >= (w >> uint64(32))
    jf = (w >> uint64(16)) & uint64(0xFFFF) if take_alias else w & uint64(0xFFFF)
    return int64(jf >> uint64(8)), int64(jf & uint64(0xFF))


@njit(cache=True, nogil=True)
def _run_slot(key, cells, mask, lo, hi, cap, max_attempts, t0):
    """Drive one slot to acceptance.

    Returns (status, t_start, t_end, attempts, size): counters bracket the
    accepted attempt's draws, ``(t_start, t_end]`` in CounterRng numbering.
    """
    t = t0
    attempts = int64(0)
    while attempts < max_attempts:
        attempts += 1
        t_start = t
        stubs = int64(1)
        committed = int64(0)
        while True:
            t += 1
            u = _mix64_nb(key + uint64(t) * _U_GAMMA)
            j, f = _decode_nb(u, cells, mask)
            stubs += j - 1
            committed += 1 + f
            if stubs == 0:
                if lo <= committed and committed <= hi:
                    return STATUS_ACCEPT, t_start, t, attempts, committed
                break
            if committed + stubs > cap:
                break
    return STATUS_EXHAUSTED, int64(0), t, attempts, int64(0)


@njit(cache=True, nogil=True)
def _bench_draws(key, cells, mask, n_draws):
    """Pure draw loop for calibrating kernel throughput."""
    acc = int64(0)
    for t in range(1, n_draws + 1):
        u = _mix64_nb(key + uint64(t) * _U_GAMMA)
        j, f = _decode_nb(u, cells, mask)
        acc += j + f
    return acc


class SlotResult:
    """One accepted slot: the tree plus its rejection cost."""

    __slots__ = ("tree", "attempts", "draws", "forest_sizes")

    def __init__(self, tree, attempts, draws, forest_sizes):
        self.tree = tree
        self.attempts = attempts
        self.draws = draws
        self.forest_sizes = forest_sizes   # per blue vertex id, 0 for non-blue


class FastSampler:
    """Exact-size and window sampling through the compiled kernel.

    Instances hold the joint law, its alias table, and a reference-path
    table set for uniform subtree shapes; all of it is read-only after
    construction and safe to share across worker threads.
    """

    def __init__(self, omega: DegreeSet, sing: SingularData, f_cap: int | None = None):
        self.omega = omega
        self.sing = sing
        self.law: JointLaw = (
            build_joint_law(omega, sing) if f_cap is None
            else build_joint_law(omega, sing, f_cap)
        )
        self.alias = AliasTable(self.law.pairs, self.law.probs)
        self._ref_tables = ExponentTables(omega, sing)
        self._shape_budget = SamplerBudget(max_size=self.law.f_cap,
                                           max_attempts=10**8)

    # -- sampling ------------------------------------------------------------

    def sample_slot(
        self,
        lo: int,
        hi: int,
        seed: int,
        slot: int,
        max_attempts: int = 10**12,
        copy_groups: list | None = None,
    ) -> SlotResult:
        """The slot's tree with size in [lo, hi]; pure in (seed, slot)."""
        key = stream_key(DOMAIN_SKELETON, seed, slot)
        status, t_start, t_end, attempts, size = _run_slot(
            uint64(key), self.alias.cells, uint64(self.alias.mask),
            int64(lo), int64(hi), int64(hi), int64(max_attempts), int64(0),
        )
        if status != STATUS_ACCEPT:
            raise AttemptsExhausted(
                f"slot {slot}: no size in [{lo},{hi}] within {max_attempts} attempts",
                attempts=int(attempts),
            )
        tree, forest_sizes = self._rebuild(
            key, int(t_start), int(t_end), seed, slot, copy_groups
        )
        if tree.size != int(size):
            raise InvariantViolation(
                f"slot {slot}: rebuilt size {tree.size} != kernel size {size}"
            )
        return SlotResult(tree, int(attempts), int(t_end - t_start), forest_sizes)

    def sample_exact(self, n: int, seed: int, slot: int,
                     max_attempts: int = 10**12) -> SlotResult:
        check_admissible(self.sing, n)
        return self.sample_slot(n, n, seed, slot, max_attempts)

    def sample_window(self, n: int, epsilon: float, seed: int, slot: int,
                      max_attempts: int = 10**12) -> SlotResult:
        if not (0.0 < epsilon < 1.0):
            raise ValueError("epsilon must lie in (0,1)")
        lo = max(1, math.ceil(n * (1.0 - epsilon) - 1e-9))
        hi = math.floor(n * (1.0 + epsilon) + 1e-9)
        return self.sample_slot(lo, hi, seed, slot, max_attempts)

    # -- replay / reconstruction ----------------------------------------------

    def replay_pairs(self, key: int, t_start: int, t_end: int):
        """The (j, f) pairs of one accepted attempt, re-derived from counters."""
        decode = self.alias.decode
        out = []
        for t in range(t_start + 1, t_end + 1):
            u = mix64((key + t * GAMMA) & MASK64)
            out.append(decode(u))
        return out

    def _rebuild(self, key, t_start, t_end, seed, slot, copy_groups=None):
        law = self.law
        pairs = self.replay_pairs(key, t_start, t_end)

        # blue skeleton in depth-first stub order
        parent = []
        children: list[list[int]] = []
        blue = []
        js = []
        fs = []
        stack = [-1]
        for j, f in pairs:
            p = stack.pop()
            v = len(parent)
            parent.append(p)
            children.append([])
            blue.append(True)
            if p >= 0:
                children[p].append(v)
            js.append(j)
            fs.append(f)
            for _ in range(j):
                stack.append(v)
        if stack:
            raise InvariantViolation("replayed attempt left unfilled stubs")

        # expand each blue vertex's forest from its own streams
        n_blue = len(parent)
        for v in range(n_blue):
            f = fs[v]
            if f == 0:
                continue
            frng = CounterRng(stream_key(DOMAIN_FOREST, seed, slot, v))
            k = law.draw_order(js[v], f, frng)
            m = k - js[v]
            f_rem = f
            cycle_idx = 0
            while m > 0:
                length, t_sub = law.peel_cycle(m, f_rem, frng)
                srng = CounterRng(
                    stream_key(DOMAIN_SHAPE, seed, slot, v, cycle_idx)
                )
                shape = sample_exact(
                    t_sub, self.sing, self._shape_budget, srng,
                    tables=self._ref_tables,
                )
                roots = []
                for _ in range(length):
                    base = len(parent)
                    roots.append(base)
                    for w in range(shape.size):
                        sp = shape.parent[w]
                        parent.append(v if sp == -1 else base + sp)
                        children.append([])
                        blue.append(False)
                for base in roots:
                    children[v].append(base)
                    for w in range(1, shape.size):
                        children[base + shape.parent[w]].append(base + w)
                if copy_groups is not None and length >= 2:
                    copy_groups.append((v, length, tuple(roots)))
                m -= length
                f_rem -= length * t_sub
            if m != 0 or f_rem != 0:
                raise InvariantViolation(
                    f"forest of vertex {v} decomposed to (m={m}, f={f_rem})"
                )

        forest_sizes = [0] * len(parent)
        for v in range(n_blue):
            forest_sizes[v] = fs[v]
        return ColoredTree(parent, children, blue), forest_sizes

    def measure_attempts(self, lo: int, hi: int, seed: int, slot: int,
                         max_attempts: int = 10**12) -> tuple[int, int]:
        """Rejection cost of one slot, kernel only (no tree is built).

        Returns (attempts, accepted size); the draws are the same ones
        sample_slot would consume, so measurements match real sampling.
        """
        key = stream_key(DOMAIN_SKELETON, seed, slot)
        status, _, _, attempts, size = _run_slot(
            uint64(key), self.alias.cells, uint64(self.alias.mask),
            int64(lo), int64(hi), int64(hi), int64(max_attempts), int64(0),
        )
        if status != STATUS_ACCEPT:
            raise AttemptsExhausted(
                f"slot {slot}: no size in [{lo},{hi}] within {max_attempts} attempts",
                attempts=int(attempts),
            )
        return int(attempts), int(size)

    # -- calibration -----------------------------------------------------------

    def bench_ns_per_draw(self, n_draws: int = 50_000_000, seed: int = 1) -> float:
        import time
        key = uint64(stream_key(DOMAIN_SKELETON, seed, 0))
        _bench_draws(key, self.alias.cells, uint64(self.alias.mask), int64(1000))
        t0 = time.perf_counter()
        _bench_draws(key, self.alias.cells, uint64(self.alias.mask), int64(n_draws))
        return (time.perf_counter() - t0) / n_draws * 1e9
