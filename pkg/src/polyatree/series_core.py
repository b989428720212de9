"""Degree sets and cycle index sums of symmetric groups.

The cycle index sum of a degree set Omega is

    Z_Omega(s_1, s_2, ...) = sum_{k in Omega} h_k,
    h_k = (1/k!) sum_{sigma in S_k} s_1^{sigma_1} s_2^{sigma_2} ...

where sigma_i counts length-i cycles.  Evaluated at power sums p_i >= 0 the
weights h_k obey the Newton-style recurrence

    k h_k = sum_{i=1..k} p_i h_{k-i},          h_0 = 1,

and the fixpoint-free analogue (no length-1 cycles)

    m D_m = sum_{i=2..m} p_i D_{m-i},          D_0 = 1, D_1 = 0.

Degree sets are either finite or "finite part plus full tail {k >= K}"; for
the tail the closed form Z_{N0} = exp(sum_i p_i / i) applies, corrected by
the finitely many excluded h_k.
"""

from __future__ import annotations

import math
import re
import threading
from dataclasses import dataclass
from typing import Callable, Iterator

from .errors import (
    Divergent,
    MalformedTail,
    MissingZero,
    NoBranchingDegree,
    TruncationTooShort,
)

__all__ = [
    "DegreeSet",
    "ExactSeries",
    "PowerSumTable",
    "validate",
    "span",
    "complete_homogeneous",
    "fixpoint_free_weight",
    "cycle_index_eval",
    "cycle_index_partial",
    "shifted_cycle_index",
    "shifted_fixpoint_free_sum",
]


# ---------------------------------------------------------------------------
# degree sets
# ---------------------------------------------------------------------------

_SPEC_RE = re.compile(r"^\s*(\d+)\s*(\+?)\s*$")


@dataclass(frozen=True)
class DegreeSet:
    """The set of admissible outdegrees.

    ``explicit`` holds the finite entries; ``tail_from = K`` additionally
    admits every k >= K.  ``DegreeSet.parse("0,2")``, ``("0,3+")`` and
    ``("0+")`` cover the supported grammar (the last one is all of N0).

    Construction normalizes the representation (sorted, deduplicated) and
    rejects structurally broken input; the mathematical axioms (0 present,
    some degree >= 2 present) are checked by :func:`validate`.
    """

    explicit: tuple[int, ...]
    tail_from: int | None = None

    def __post_init__(self):
        ent = []
        for k in self.explicit:
            if not isinstance(k, int) or isinstance(k, bool) or k < 0:
                raise MalformedTail(f"degree entries must be nonnegative integers, got {k!r}")
            ent.append(k)
        object.__setattr__(self, "explicit", tuple(sorted(set(ent))))
        tf = self.tail_from
        if tf is not None and (not isinstance(tf, int) or isinstance(tf, bool) or tf < 0):
            raise MalformedTail(f"tail threshold must be a nonnegative integer, got {tf!r}")

    # -- membership and iteration

    def __contains__(self, k: int) -> bool:
        if self.tail_from is not None and k >= self.tail_from:
            return True
        return k in self.explicit

    @property
    def is_finite(self) -> bool:
        return self.tail_from is None

    def degrees_upto(self, k_max: int) -> Iterator[int]:
        """All admissible degrees k <= k_max, ascending."""
        if self.tail_from is None:
            yield from (k for k in self.explicit if k <= k_max)
        else:
            yield from (k for k in self.explicit if k <= min(k_max, self.tail_from - 1))
            yield from range(self.tail_from, k_max + 1)

    def max_degree(self) -> int | None:
        """Largest admissible degree for finite sets, None for tailed sets."""
        if self.tail_from is not None:
            return None
        return self.explicit[-1] if self.explicit else None

    # -- string grammar

    @classmethod
    def parse(cls, text: str) -> "DegreeSet":
        """Parse "0,2", "0,2,5", "0,3+", "0+" and validate the result."""
        parts = text.split(",")
        explicit: list[int] = []
        tail: int | None = None
        for i, part in enumerate(parts):
            m = _SPEC_RE.match(part)
            if m is None:
                raise MalformedTail(f"cannot parse degree entry {part!r} in {text!r}")
            value = int(m.group(1))
            if m.group(2) == "+":
                if i != len(parts) - 1:
                    raise MalformedTail(f"tail marker must be last in {text!r}")
                tail = value
            else:
                explicit.append(value)
        return validate(cls(tuple(explicit), tail))

    def __str__(self) -> str:
        parts = [str(k) for k in self.explicit]
        if self.tail_from is not None:
            parts.append(f"{self.tail_from}+")
        return ",".join(parts)

    @property
    def span(self) -> int:
        """gcd of the positive admissible degrees (tree sizes are 1 mod span)."""
        g = 0
        for k in self.explicit:
            if k > 0:
                g = math.gcd(g, k)
        if self.tail_from is not None:
            # K and K+1 are both admissible, so the tail contributes gcd 1
            g = 1 if g == 0 else math.gcd(g, 1)
        if g == 0:
            raise NoBranchingDegree(f"degree set {self} has no positive degree")
        return g


def validate(omega: DegreeSet) -> DegreeSet:
    """Check the degree-set axioms; return the set unchanged if they hold."""
    if omega.tail_from is not None:
        for k in omega.explicit:
            if k >= omega.tail_from:
                raise MalformedTail(
                    f"explicit degree {k} overlaps the tail k >= {omega.tail_from}"
                )
    if 0 not in omega:
        raise MissingZero(f"degree set {omega} must contain 0")
    has_branch = any(k >= 2 for k in omega.explicit) or omega.tail_from is not None
    if not has_branch:
        raise NoBranchingDegree(f"degree set {omega} needs some degree >= 2")
    return omega


def span(omega: DegreeSet) -> int:
    return validate(omega).span


# ---------------------------------------------------------------------------
# exact integer series
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExactSeries:
    """A truncated power series with arbitrary-precision integer coefficients.

    All arithmetic truncates at ``truncation_order`` exactly; coefficients
    index exponents 0..N.
    """

    coeffs: tuple[int, ...]
    truncation_order: int

    def __post_init__(self):
        n = self.truncation_order
        if n < 0:
            raise ValueError("truncation_order must be >= 0")
        c = tuple(self.coeffs)
        if len(c) < n + 1:
            c = c + (0,) * (n + 1 - len(c))
        elif len(c) > n + 1:
            c = c[: n + 1]
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def zero(cls, order: int) -> "ExactSeries":
        return cls((0,), order)

    @classmethod
    def monomial(cls, coeff: int, power: int, order: int) -> "ExactSeries":
        c = [0] * (order + 1)
        if power <= order:
            c[power] = coeff
        return cls(tuple(c), order)

    def __getitem__(self, n: int) -> int:
        if n > self.truncation_order:
            raise TruncationTooShort(f"coefficient {n} beyond order {self.truncation_order}")
        return self.coeffs[n]

    def __add__(self, other: "ExactSeries") -> "ExactSeries":
        n = min(self.truncation_order, other.truncation_order)
        return ExactSeries(
            tuple(a + b for a, b in zip(self.coeffs, other.coeffs)), n
        )

    def __sub__(self, other: "ExactSeries") -> "ExactSeries":
        n = min(self.truncation_order, other.truncation_order)
        return ExactSeries(
            tuple(a - b for a, b in zip(self.coeffs, other.coeffs)), n
        )

    def __mul__(self, other: "ExactSeries") -> "ExactSeries":
        n = min(self.truncation_order, other.truncation_order)
        a, b = self.coeffs, other.coeffs
        out = [0] * (n + 1)
        for i, ai in enumerate(a[: n + 1]):
            if ai == 0:
                continue
            for j in range(min(len(b) - 1, n - i) + 1):
                bj = b[j]
                if bj:
                    out[i + j] += ai * bj
        return ExactSeries(tuple(out), n)

    def scale(self, c: int) -> "ExactSeries":
        return ExactSeries(tuple(c * a for a in self.coeffs), self.truncation_order)

    def compose_power(self, k: int) -> "ExactSeries":
        """Substitute z -> z**k (k >= 1), truncated at the same order."""
        if k < 1:
            raise ValueError("compose_power needs k >= 1")
        n = self.truncation_order
        out = [0] * (n + 1)
        for m, a in enumerate(self.coeffs):
            if a and m * k <= n:
                out[m * k] = a
        return ExactSeries(tuple(out), n)

    def divexact(self, d: int) -> "ExactSeries":
        """Divide every coefficient by d, asserting exactness."""
        out = []
        for a in self.coeffs:
            q, r = divmod(a, d)
            if r:
                raise ArithmeticError(f"coefficient {a} not divisible by {d}")
            out.append(q)
        return ExactSeries(tuple(out), self.truncation_order)


# ---------------------------------------------------------------------------
# power-sum tables and symmetric-function weights
# ---------------------------------------------------------------------------

class PowerSumTable:
    """Evaluated power sums p_1..p_{I_max} with memoized h_k and D_m.

    ``tail_bound`` is a certified upper bound on sum_{i > I_max} p_i / i;
    it feeds the tail certificate of :func:`cycle_index_eval`.  Instances
    are immutable after construction; the memo tables grow lazily under a
    lock, so concurrent readers are safe.
    """

    __slots__ = ("values", "I_max", "tail_bound", "_h", "_d", "_lock")

    def __init__(self, values: "tuple[float, ...] | list[float]", tail_bound: float = 0.0):
        vals = tuple(float(v) for v in values)
        for v in vals:
            if v < 0.0 or math.isnan(v):
                raise ValueError(f"power sums must be nonnegative reals, got {v}")
        if tail_bound < 0.0:
            raise ValueError("tail_bound must be >= 0")
        self.values = vals
        self.I_max = len(vals)
        self.tail_bound = float(tail_bound)
        self._h = [1.0]          # h_0
        self._d = [1.0, 0.0]     # D_0, D_1
        self._lock = threading.Lock()

    @classmethod
    def from_decaying(
        cls,
        value_at: Callable[[int], float],
        ratio: float,
        *,
        cutoff: float = 1e-18,
        i_cap: int = 64,
    ) -> "PowerSumTable":
        """Build p_i = value_at(i) for i = 1.., truncating once p_i/i < cutoff.

        ``ratio`` must certify p_{i+1} <= ratio * p_i (true for p_i = A(x**i)
        with 0 <= x = ratio < 1); the geometric tail bound follows.
        """
        if not (0.0 <= ratio < 1.0):
            raise Divergent(f"no geometric tail certificate for ratio {ratio}")
        vals: list[float] = []
        i = 1
        while i <= i_cap:
            v = float(value_at(i))
            vals.append(v)
            if v / i < cutoff:
                break
            i += 1
        last = vals[-1]
        tail = last * ratio / ((len(vals) + 1) * (1.0 - ratio))
        return cls(tuple(vals), tail)

    def p(self, i: int) -> float:
        if i < 1 or i > self.I_max:
            raise TruncationTooShort(f"p_{i} outside tabulated range 1..{self.I_max}")
        return self.values[i - 1]

    def h(self, k: int) -> float:
        """Complete homogeneous weight h_k = Z over S_k at these power sums."""
        if k < 0:
            raise ValueError("k must be >= 0")
        if k > self.I_max:
            raise TruncationTooShort(f"h_{k} needs p_1..p_{k}, table has I_max={self.I_max}")
        if k < len(self._h):
            return self._h[k]
        with self._lock:
            h = self._h
            while len(h) <= k:
                m = len(h)
                acc = 0.0
                for i in range(1, m + 1):
                    acc += self.values[i - 1] * h[m - i]
                h.append(acc / m)
            return h[k]

    def d(self, m: int) -> float:
        """Fixpoint-free weight D_m (no length-1 cycles allowed)."""
        if m < 0:
            raise ValueError("m must be >= 0")
        if m > self.I_max and m > 1:
            raise TruncationTooShort(f"D_{m} needs p_2..p_{m}, table has I_max={self.I_max}")
        if m < len(self._d):
            return self._d[m]
        with self._lock:
            d = self._d
            while len(d) <= m:
                r = len(d)
                acc = 0.0
                for i in range(2, r + 1):
                    acc += self.values[i - 1] * d[r - i]
                d.append(acc / r)
            return d[m]

    def powersum_exp(self) -> float:
        """exp(sum_i p_i / i) — the closed form of Z_{N0} at this table."""
        return math.exp(sum(v / i for i, v in enumerate(self.values, start=1)))

    def fixpoint_free_exp(self) -> float:
        """exp(sum_{i>=2} p_i / i) = sum_m D_m."""
        return math.exp(sum(v / i for i, v in enumerate(self.values, start=1) if i >= 2))


def complete_homogeneous(p: PowerSumTable, k: int) -> float:
    """h_k = (1/k!) sum_{sigma in S_k} p_1^{sigma_1} ... p_k^{sigma_k}."""
    return p.h(k)


def fixpoint_free_weight(p: PowerSumTable, m: int) -> float:
    """D_m: as h_m but restricted to permutations without fixpoints."""
    return p.d(m)


# ---------------------------------------------------------------------------
# cycle index sums over a degree set
# ---------------------------------------------------------------------------

def _require_tail_certificate(omega: DegreeSet, p: PowerSumTable) -> None:
    if not math.isfinite(p.tail_bound):
        raise Divergent(
            f"power-sum tail bound is not finite; Z over {omega} cannot be certified"
        )


def shifted_cycle_index(omega: DegreeSet, p: PowerSumTable, r: int) -> float:
    """sum_{k in Omega, k >= r} h_{k-r}: the workhorse behind all partials.

    r = 0 gives Z_Omega itself (without the tail certificate bookkeeping).
    """
    validate(omega)
    if r < 0:
        raise ValueError("shift must be >= 0")
    acc = 0.0
    for k in omega.explicit:
        if k >= r:
            acc += p.h(k - r)
    if omega.tail_from is not None:
        _require_tail_certificate(omega, p)
        lo = max(omega.tail_from - r, 0)
        tail = p.powersum_exp()
        for m in range(lo):
            tail -= p.h(m)
        acc += tail
    return acc


def shifted_fixpoint_free_sum(omega: DegreeSet, p: PowerSumTable, r: int) -> float:
    """sum_{k in Omega, k >= r} D_{k-r}: the fixpoint-free analogue."""
    validate(omega)
    if r < 0:
        raise ValueError("shift must be >= 0")
    acc = 0.0
    for k in omega.explicit:
        if k >= r:
            acc += p.d(k - r)
    if omega.tail_from is not None:
        _require_tail_certificate(omega, p)
        lo = max(omega.tail_from - r, 0)
        tail = p.fixpoint_free_exp()
        for m in range(lo):
            tail -= p.d(m)
        acc += tail
    return acc


def cycle_index_eval(
    omega: DegreeSet, p: PowerSumTable, k_max: int | None = None
) -> tuple[float, float]:
    """Z_Omega at the power sums in ``p``.

    Returns ``(value, tail_certificate)``: the certificate bounds the error
    due to the truncated power-sum tail (finite degree sets evaluate their
    finitely many h_k exactly in the given p, so their certificate is 0).
    ``k_max`` optionally caps the largest h_k the evaluation may touch.
    """
    validate(omega)

    def _check_cap(k: int) -> None:
        if k_max is not None and k > k_max:
            raise TruncationTooShort(f"h_{k} needed but evaluation capped at k_max={k_max}")

    if omega.tail_from is None:
        acc = 0.0
        for k in omega.explicit:
            _check_cap(k)
            acc += p.h(k)
        return acc, 0.0

    _require_tail_certificate(omega, p)
    K = omega.tail_from
    if K > 0:
        _check_cap(K - 1)
    total = p.powersum_exp()
    value = total
    for k in range(K):
        if k not in omega.explicit:
            value -= p.h(k)
    cert = total * math.expm1(p.tail_bound)
    return value, cert


def cycle_index_partial(omega: DegreeSet, p: PowerSumTable, axis: int, order: int) -> float:
    """Partial derivatives of Z_Omega in the power-sum arguments.

    order 1: dZ/ds_axis = (1/axis) sum_{k in Omega, k >= axis} h_{k-axis};
    order 2 (axis must be 1): d2Z/ds_1^2 = sum_{k in Omega, k >= 2} h_{k-2}.
    """
    if axis < 1:
        raise ValueError("axis must be >= 1")
    if order == 1:
        return shifted_cycle_index(omega, p, axis) / axis
    if order == 2:
        if axis != 1:
            raise ValueError("second partials are only supported along s_1")
        return shifted_cycle_index(omega, p, 2)
    raise ValueError("order must be 1 or 2")
