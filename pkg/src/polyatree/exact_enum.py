"""Exact counting of Pólya trees with restricted outdegrees.

The counting series A(z) = sum a_n z^n satisfies

    A(z) = z * Z_Omega(A(z), A(z^2), A(z^3), ...),

so a_n = [z^(n-1)] Z_Omega(...) can be computed coefficient by coefficient:
every h_k appearing in Z_Omega has valuation >= k in z, and coefficient
n-1 of any term only consumes a_m with m < n.  All arithmetic is exact over
arbitrary-precision integers; the h_k recurrence is run on the scaled series
H_k = k! h_k to stay integral, and the full-tail part uses the exponential
closed form T = exp(sum_i A(z^i)/i) via the logarithmic-derivative
recurrence n t_n = sum_m c_m t_{n-m} with c_m = sum_{d | m} d a_d.

An independent brute-force enumerator over canonical encodings acts as the
test oracle for small n.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import total_ordering

from .errors import InvariantViolation, SizeGuardExceeded
from .series_core import DegreeSet, validate

__all__ = [
    "CountTable",
    "CanonicalTree",
    "count_coefficients",
    "brute_force_enumerate",
    "admissible_sizes",
    "BRUTE_FORCE_SIZE_GUARD",
]

BRUTE_FORCE_SIZE_GUARD = 16


# ---------------------------------------------------------------------------
# exact counts
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CountTable:
    """a_n = number of Pólya trees with n vertices and outdegrees in omega."""

    omega: DegreeSet
    a: tuple[int, ...]
    N: int

    def __post_init__(self):
        if len(self.a) != self.N + 1:
            raise InvariantViolation("count table length must be N + 1")
        if self.a[0] != 0:
            raise InvariantViolation("a_0 must be 0")
        if self.N >= 1 and self.a[1] != 1:
            raise InvariantViolation("a_1 must be 1 (the single-vertex tree)")
        sp = self.omega.span
        for n, an in enumerate(self.a):
            if an < 0:
                raise InvariantViolation(f"a_{n} negative")
            if n >= 1 and n % sp != 1 % sp and an != 0:
                raise InvariantViolation(f"a_{n} must vanish: {n} != 1 mod span {sp}")

    def __getitem__(self, n: int) -> int:
        return self.a[n]


def count_coefficients(omega: DegreeSet, N: int) -> CountTable:
    """Compute a_0..a_N exactly from the functional equation."""
    validate(omega)
    if N < 1:
        raise ValueError("N must be >= 1")

    # Which h_k series the finite part needs: explicit degrees, plus the
    # excluded k < K corrections when a tail is present.
    explicit = set(omega.explicit)
    if omega.tail_from is None:
        finite_ks = sorted(explicit)
        corrections: list[int] = []
        use_tail = False
    else:
        finite_ks = sorted(k for k in explicit if k >= 1)
        corrections = [k for k in range(omega.tail_from) if k not in explicit]
        use_tail = True

    max_k = max([0] + finite_ks + corrections)
    factorials = [math.factorial(k) for k in range(max_k + 1)]
    # f[k][i] = (k-1)! / (k-i)! for the integral H_k recurrence
    fall = [[0] * (k + 1) for k in range(max_k + 1)]
    for k in range(1, max_k + 1):
        prod = 1
        for i in range(1, k + 1):
            fall[k][i] = prod          # (k-1)(k-2)...(k-i+1), empty product = 1
            prod *= (k - i)

    a = [0] * (N + 1)
    # H[k][j] = [z^j] k! h_k(A(z), A(z^2), ...); filled incrementally in j
    H: dict[int, list[int]] = {k: [0] * N for k in range(max_k + 1)}
    H[0][0] = 1
    t = [1] + [0] * (N - 1) if use_tail else None   # T = exp(sum A(z^i)/i)
    c = [0] * N if use_tail else None               # c_m = sum_{d|m} d a_d

    def h_coeff(k: int, j: int) -> int:
        q, r = divmod(H[k][j], factorials[k])
        if r:
            raise AssertionError(f"H_{k}[{j}] not divisible by {k}!")
        return q

    for n in range(1, N + 1):
        j = n - 1
        # extend H_k at coefficient j (needs a_m, m <= j only)
        for k in range(1, max_k + 1):
            acc = 0
            for i in range(1, k + 1):
                fk = fall[k][i]
                Hki = H[k - i]
                s = 0
                for m in range(i, j + 1, i):
                    am = a[m // i]
                    if am:
                        s += am * Hki[j - m]
                if s:
                    acc += fk * s
            H[k][j] = acc
        # extend t at coefficient j via n t_n = sum c_m t_{n-m}
        if use_tail and j >= 1:
            acc = 0
            for m in range(1, j + 1):
                if c[m]:
                    acc += c[m] * t[j - m]
            q, r = divmod(acc, j)
            if r:
                raise AssertionError(f"t_{j} recurrence not integral")
            t[j] = q

        # a_n = [z^(n-1)] Z_Omega
        coeff = 0
        if omega.tail_from is None:
            if 0 in explicit:
                coeff += 1 if j == 0 else 0
            for k in finite_ks:
                if k >= 1 and k <= j:   # valuation: [z^j] h_k = 0 for k > j
                    coeff += h_coeff(k, j)
        else:
            # Z = T - sum of excluded h_k; explicit degrees below the tail
            # are not in `corrections`, so T covers them automatically.
            coeff = t[j]
            for k in corrections:
                if k == 0:
                    coeff -= 1 if j == 0 else 0
                elif k <= j:
                    coeff -= h_coeff(k, j)
        a[n] = coeff
        if use_tail:
            # fold a_n into the divisor sums c_m for future coefficients
            for m in range(n, N, n):
                c[m] += n * a[n]

    return CountTable(omega, tuple(a), N)


def admissible_sizes(omega: DegreeSet, N: int, counts: CountTable | None = None) -> set[int]:
    """{ n <= N : a_n > 0 }."""
    if counts is None:
        counts = count_coefficients(omega, N)
    if counts.N < N:
        raise ValueError(f"count table only reaches N={counts.N} < {N}")
    return {n for n in range(1, N + 1) if counts.a[n] > 0}


# ---------------------------------------------------------------------------
# brute-force oracle
# ---------------------------------------------------------------------------

@total_ordering
@dataclass(frozen=True)
class CanonicalTree:
    """Canonical encoding of a rooted unlabeled tree.

    Encoding: "(" + concatenation of children encodings, sorted
    lexicographically + ")".  Two rooted trees are isomorphic iff their
    encodings are equal.
    """

    encoding: str
    size: int

    @classmethod
    def leaf(cls) -> "CanonicalTree":
        return cls("()", 1)

    @classmethod
    def from_children(cls, children: "list[CanonicalTree]") -> "CanonicalTree":
        enc = "(" + "".join(sorted(c.encoding for c in children)) + ")"
        return cls(enc, 1 + sum(c.size for c in children))

    def __lt__(self, other: "CanonicalTree") -> bool:
        return (self.size, self.encoding) < (other.size, other.encoding)

    def outdegrees(self) -> list[int]:
        """Outdegree of every vertex, root first (decoded from the encoding)."""
        degs: list[int] = []
        stack: list[int] = []
        for ch in self.encoding:
            if ch == "(":
                stack.append(0)
            else:
                d = stack.pop()
                if stack:
                    stack[-1] += 1
                degs.append(d)
        return degs[::-1]


def brute_force_enumerate(omega: DegreeSet, n: int) -> set[CanonicalTree]:
    """Every isomorphism class of size n with outdegrees in omega.

    Independent of the generating-function machinery: builds classes
    recursively as root + multiset of strictly smaller classes whose
    multiplicity count lies in omega.
    """
    validate(omega)
    if n > BRUTE_FORCE_SIZE_GUARD:
        raise SizeGuardExceeded(
            f"brute force enumeration capped at n <= {BRUTE_FORCE_SIZE_GUARD}, got {n}"
        )
    if n < 1:
        return set()

    by_size: dict[int, list[CanonicalTree]] = {}
    for size in range(1, n + 1):
        found: set[CanonicalTree] = set()
        if 0 in omega and size == 1:
            found.add(CanonicalTree.leaf())
        # pool of smaller trees, ascending, as (size, tree) with stable order
        pool: list[CanonicalTree] = []
        for s in range(1, size):
            pool.extend(by_size[s])
        for k in omega.degrees_upto(size - 1):
            if k < 1:
                continue
            target = size - 1
            if target < k:          # k parts of size >= 1 each
                continue
            for combo in _multisets_with_total(pool, k, target, len(pool) - 1):
                found.add(CanonicalTree.from_children(combo))
        by_size[size] = sorted(found)
    return set(by_size[n])


def _multisets_with_total(pool, k, total, max_idx):
    """Multisets of k trees from pool with sizes summing to total.

    Indices are chosen nonincreasing, which enumerates each multiset once.
    """
    if k == 0:
        if total == 0:
            yield []
        return
    # remaining k-1 parts need at least k-1 vertices
    idx = max_idx
    while idx >= 0:
        t = pool[idx]
        if t.size <= total - (k - 1):
            for rest in _multisets_with_total(pool, k - 1, total - t.size, idx):
                yield [t] + rest
        idx -= 1
