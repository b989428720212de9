"""The colored Boltzmann sampler at the critical parameter rho.

One sampler attempt grows a *generator tree*: each generator node carries an
exponent e and draws a cycle type from the law

    P(sigma has cycle type nu) proportional to  prod_i p_i^{nu_i} / (i^{nu_i} nu_i!),
    p_i = A(rho^(i e)),

every cycle of length l spawns one child generator node at exponent e*l, and
a generator node at exponent e materializes into e identical vertices of the
final tree.  A vertex is blue iff its exponent is 1; blue vertices form the
Galton-Watson skeleton.  Only the cycle *type* is ever sampled -- the actual
permutation never matters because the recursion consumes cycle lengths only.

The committed size of a partial attempt is the sum of exponents of the
generator nodes created so far, which lets attempts abort as soon as they
can no longer hit the target window.
"""

from __future__ import annotations

import math
import threading
from bisect import bisect_left
from dataclasses import dataclass

from ..errors import (
    AttemptsExhausted,
    InadmissibleSize,
    InvariantViolation,
    TableMissing,
)
from ..gf_analysis import SingularData, eval_A
from ..series_core import DegreeSet
from .rng import CounterRng

__all__ = [
    "CycleType",
    "ColoredTree",
    "SamplerBudget",
    "Aborted",
    "ExponentTables",
    "sample_cycle_type",
    "sample_boltzmann",
    "sample_exact",
    "sample_window",
]

UNDERFLOW_WEIGHT = 1e-300   # below this A(rho^e), only k = 0 retains mass
K_MASS_EPS = 1e-16          # relative k-pmf mass dropped for tailed degree sets


@dataclass(frozen=True)
class CycleType:
    """Cycle type of the root permutation: multiplicities[i-1] cycles of length i."""

    multiplicities: tuple[int, ...]
    k: int

    def __post_init__(self):
        if self.k != sum(i * m for i, m in enumerate(self.multiplicities, start=1)):
            raise InvariantViolation("cycle type must satisfy sum i*m_i = k")
        if any(m < 0 for m in self.multiplicities):
            raise InvariantViolation("cycle multiplicities must be nonnegative")

    def cycles(self):
        """Yield cycle lengths, ascending, with multiplicity."""
        for i, m in enumerate(self.multiplicities, start=1):
            for _ in range(m):
                yield i


@dataclass(frozen=True)
class Aborted:
    """An attempt that exceeded its size bound; carries the committed size."""

    size_so_far: int


@dataclass(frozen=True)
class SamplerBudget:
    max_size: int
    max_attempts: int = 10**9
    rng_seed: int = 0

    def __post_init__(self):
        if self.max_size < 1:
            raise InvariantViolation("max_size must be >= 1")
        if self.max_attempts < 1:
            raise InvariantViolation("max_attempts must be >= 1")


class ColoredTree:
    """Arena-backed rooted tree with blue marks.

    Vertices are integers; index 0 is the root and every parent index is
    smaller than its children's (construction order), which lets metrics
    run single upward passes.  Child order is a construction artifact.
    """

    __slots__ = ("parent", "children", "blue")

    def __init__(self, parent: list[int], children: list[list[int]], blue: list[bool]):
        self.parent = parent
        self.children = children
        self.blue = blue

    @property
    def size(self) -> int:
        return len(self.parent)

    @property
    def root(self) -> int:
        return 0

    def outdegree(self, v: int) -> int:
        return len(self.children[v])

    def validate(self, omega: DegreeSet) -> None:
        """Audit the structural invariants; raises InvariantViolation."""
        n = self.size
        if n < 1 or self.parent[0] != -1:
            raise InvariantViolation("root must be vertex 0 with parent -1")
        if not self.blue[0]:
            raise InvariantViolation("the root is generated at exponent 1: must be blue")
        for v in range(n):
            if len(self.children[v]) not in omega:
                raise InvariantViolation(
                    f"vertex {v} has outdegree {len(self.children[v])} not in {omega}"
                )
            for c in self.children[v]:
                if self.parent[c] != v:
                    raise InvariantViolation("parent/children arrays disagree")
                if c <= v:
                    raise InvariantViolation("children must have larger indices")
                if self.blue[c] and not self.blue[v]:
                    raise InvariantViolation("a non-blue vertex has a blue child")

    def canonical(self) -> str:
        """Canonical encoding: sorted nested parentheses (isomorphism key)."""
        enc = [""] * self.size
        for v in range(self.size - 1, -1, -1):
            enc[v] = "(" + "".join(sorted(enc[c] for c in self.children[v])) + ")"
        return enc[0]

    def to_parent_array(self) -> tuple[list[int], list[int]]:
        return list(self.parent), [1 if b else 0 for b in self.blue]

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, ColoredTree)
            and self.parent == other.parent
            and self.children == other.children
            and self.blue == other.blue
        )

    def __hash__(self):
        return hash((tuple(self.parent), tuple(self.blue)))


class _ExponentEntry:
    """Evaluated weights at one exponent: p_i = A(rho^(i e)), h_k, k-pmf."""

    __slots__ = ("e", "underflow", "p", "h", "ks", "cum")

    def __init__(self, e, underflow, p, h, ks, cum):
        self.e = e
        self.underflow = underflow
        self.p = p          # p[i-1] = A(rho^(i e))
        self.h = h          # h[m] = complete homogeneous weight
        self.ks = ks        # admissible total orders with retained mass
        self.cum = cum      # cumulative probabilities aligned with ks


class ExponentTables:
    """Lazy per-exponent tables derived from one SingularData.

    Shared read-only across sampling tasks; the build lock makes concurrent
    lazy extension safe.
    """

    def __init__(self, omega: DegreeSet, sing: SingularData):
        self.omega = omega
        self.sing = sing
        self._entries: dict[int, _ExponentEntry] = {}
        self._lock = threading.Lock()

    def entry(self, e: int) -> _ExponentEntry:
        try:
            return self._entries[e]
        except KeyError:
            raise TableMissing(f"no table prepared for exponent {e}") from None

    def ensure(self, e: int) -> _ExponentEntry:
        ent = self._entries.get(e)
        if ent is not None:
            return ent
        with self._lock:
            ent = self._entries.get(e)
            if ent is None:
                ent = self._build(e)
                self._entries[e] = ent
            return ent

    def _value(self, m: int) -> float:
        """A(rho^m) for any m >= 1."""
        sing = self.sing
        if m == 1:
            return sing.a_rho
        if m <= sing.I_max:
            return sing.tail(m)
        x = sing.rho**m
        if x == 0.0:
            return 0.0
        return eval_A(sing.counts, x, 1e-13)

    def _build(self, e: int) -> _ExponentEntry:
        omega = self.omega
        p1 = self._value(e)
        if p1 < UNDERFLOW_WEIGHT:
            # at this weight only the empty permutation retains representable
            # mass: force k = 0 (the subtree is a single vertex)
            return _ExponentEntry(e, True, [], [1.0], [0], [1.0])

        finite = omega.tail_from is None
        k_cap = omega.max_degree() if finite else 512
        p = [p1]
        h = [1.0]

        def extend_to(m: int) -> None:
            while len(p) < m:
                p.append(self._value(e * (len(p) + 1)))
            while len(h) <= m:
                j = len(h)
                acc = 0.0
                for i in range(1, j + 1):
                    pi = p[i - 1]
                    if pi:
                        acc += pi * h[j - i]
                h.append(acc / j)

        ks: list[int] = []
        weights: list[float] = []
        total = 0.0
        for k in omega.degrees_upto(k_cap):
            extend_to(k)
            w = h[k]
            ks.append(k)
            weights.append(w)
            total += w
            if not finite and k > 2 and w < total * K_MASS_EPS:
                break
        cum = []
        acc = 0.0
        for w in weights:
            acc += w
            cum.append(acc / total)
        cum[-1] = 1.0   # renormalize: the dropped tail mass is < K_MASS_EPS
        return _ExponentEntry(e, False, p, h, ks, cum)


def _draw_cycle_lengths(ent: _ExponentEntry, rng: CounterRng) -> list[int]:
    """Cycle lengths of a random permutation with the entry's law (ascending)."""
    if ent.underflow:
        return []
    ks, cum = ent.ks, ent.cum
    k = ks[bisect_left(cum, rng.uniform())] if len(ks) > 1 else ks[0]
    if k == 0:
        return []
    p, h = ent.p, ent.h
    out = []
    m = k
    while m > 0:
        # P(first cycle length = i | order m) = p_i h_{m-i} / (m h_m)
        target = rng.uniform() * (m * h[m])
        acc = 0.0
        chosen = m
        for i in range(1, m + 1):
            w = p[i - 1] * h[m - i]
            acc += w
            if acc >= target and w > 0.0:
                chosen = i
                break
        out.append(chosen)
        m -= chosen
    out.sort()
    return out


def sample_cycle_type(tables: ExponentTables, e: int, rng: CounterRng) -> CycleType:
    """Cycle type of the root permutation at exponent e.

    The exponent must already be prepared (TableMissing otherwise); the
    sampling path proper prepares exponents as it descends.
    """
    ent = tables.entry(e)
    lengths = _draw_cycle_lengths(ent, rng)
    k = sum(lengths)
    mult = [0] * k
    for length in lengths:
        mult[length - 1] += 1
    ct = CycleType(tuple(mult), k)
    if k not in tables.omega:
        raise InvariantViolation(f"drew total order {k} outside {tables.omega}")
    return ct


def sample_boltzmann(
    sing: SingularData,
    budget: SamplerBudget,
    rng: CounterRng,
    tables: ExponentTables | None = None,
    one_copy: bool = False,
    copy_groups: list | None = None,
):
    """One Boltzmann draw at parameter rho: ColoredTree or Aborted.

    ``one_copy`` reproduces the known one-copy-per-cycle mistake from the
    literature (attach a single copy instead of l): a deliberately wrong
    mode that the uniformity audit must reject.  ``copy_groups``, when a
    list, receives (parent_vertex, l, copy_roots) triples for every cycle
    of length >= 2 -- the isomorphic-copies invariant audit reads them.
    """
    if tables is None:
        tables = ExponentTables(sing.omega, sing)
    cap = budget.max_size

    # phase A: grow the generator tree, abort on committed size
    gen_parent = [-1]
    gen_exp = [1]
    gen_len = [1]           # cycle length that spawned the node
    committed = 1
    stack = [0]
    while stack:
        g = stack.pop()
        e = gen_exp[g]
        ent = tables.ensure(e)
        for length in reversed(_draw_cycle_lengths(ent, rng)):
            child_e = e * length
            gen_parent.append(g)
            gen_exp.append(child_e)
            gen_len.append(length)
            committed += 1 if one_copy else child_e
            if committed > cap:
                return Aborted(committed)
            stack.append(len(gen_exp) - 1)

    # phase B: materialize generator nodes in creation order; node g turns
    # into `length` copies under each instance of its generator parent
    parent = [-1]
    children: list[list[int]] = [[]]
    blue = [True]
    instances = [[0]]
    for g in range(1, len(gen_exp)):
        length = 1 if one_copy else gen_len[g]
        is_blue = gen_exp[g] == 1
        mine: list[int] = []
        for v in instances[gen_parent[g]]:
            first = len(parent)
            for _ in range(length):
                w = len(parent)
                parent.append(v)
                children.append([])
                children[v].append(w)
                blue.append(is_blue)
                mine.append(w)
            if copy_groups is not None and gen_len[g] >= 2:
                copy_groups.append((v, gen_len[g], tuple(range(first, len(parent)))))
        instances.append(mine)
    return ColoredTree(parent, children, blue)


def check_admissible(sing: SingularData, n: int) -> None:
    """Reject target sizes with a_n = 0 before any sampling happens."""
    counts = sing.counts
    if n < 1:
        raise InadmissibleSize(f"size {n} is not positive")
    if n <= counts.N:
        if counts.a[n] == 0:
            raise InadmissibleSize(f"no tree of size {n} has outdegrees in {sing.omega}")
        return
    sp = sing.omega.span
    if n % sp != 1 % sp:
        raise InadmissibleSize(
            f"size {n} violates n = 1 mod {sp} for degree set {sing.omega}"
        )
    # beyond the exact table: the admissible residue class is populated
    # throughout the tabulated tail, so large n in the class are accepted
    if not any(
        counts.a[m] > 0
        for m in range(counts.N, max(0, counts.N - 3 * sp), -1)
        if (n - m) % sp == 0
    ):
        raise InadmissibleSize(f"size {n}: residue class empty up to N={counts.N}")


def sample_exact(
    n: int,
    sing: SingularData,
    budget: SamplerBudget,
    rng: CounterRng,
    tables: ExponentTables | None = None,
) -> ColoredTree:
    """Uniform tree of size exactly n, by rejection with early abort at n."""
    check_admissible(sing, n)
    if tables is None:
        tables = ExponentTables(sing.omega, sing)
    inner = SamplerBudget(max_size=n, max_attempts=budget.max_attempts,
                          rng_seed=budget.rng_seed)
    for attempt in range(1, budget.max_attempts + 1):
        result = sample_boltzmann(sing, inner, rng, tables=tables)
        if isinstance(result, ColoredTree) and result.size == n:
            return result
    raise AttemptsExhausted(
        f"no size-{n} tree within {budget.max_attempts} attempts",
        attempts=budget.max_attempts,
    )


def sample_window(
    n: int,
    epsilon: float,
    sing: SingularData,
    budget: SamplerBudget,
    rng: CounterRng,
    tables: ExponentTables | None = None,
) -> ColoredTree:
    """Boltzmann draw conditioned on |size - n| <= epsilon n.

    Within the window the law is Boltzmann (each size weighted by
    a_m rho^m), *not* uniform across sizes -- callers that need exact-size
    uniformity must use sample_exact.
    """
    if not (0.0 < epsilon < 1.0):
        raise ValueError("epsilon must lie in (0,1)")
    # tolerate float fuzz so that e.g. 50*(1-0.2) -> 40.000000000000004 keeps 40
    lo = max(1, math.ceil(n * (1.0 - epsilon) - 1e-9))
    hi = math.floor(n * (1.0 + epsilon) + 1e-9)
    if tables is None:
        tables = ExponentTables(sing.omega, sing)
    inner = SamplerBudget(max_size=hi, max_attempts=budget.max_attempts,
                          rng_seed=budget.rng_seed)
    for attempt in range(1, budget.max_attempts + 1):
        result = sample_boltzmann(sing, inner, rng, tables=tables)
        if isinstance(result, ColoredTree) and lo <= result.size <= hi:
            return result
    raise AttemptsExhausted(
        f"no tree in [{lo},{hi}] within {budget.max_attempts} attempts",
        attempts=budget.max_attempts,
    )
