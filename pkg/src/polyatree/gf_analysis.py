"""Numeric analysis of the counting series at its singularity.

Everything here lives on the real axis: A(x) = sum a_n x^n is evaluated by
certified partial summation of the exact counts, the singularity rho is
located as the solution of the 2x2 system

    w = E(z, w),    E_w(z, w) = 1,
    E(z, w) = z * Z_Omega(w, A(z^2), A(z^3), ...),

and the offspring/forest laws of the colored Galton-Watson skeleton are
extracted from their probability generating functions

    E[u^xi]   = (rho/A) * Z_Omega(u A, A(rho^2), A(rho^3), ...),
    E[u^zeta] = (rho/A) * Z_Omega(A, A((u rho)^2), A((u rho)^3), ...).

Each derived quantity that admits two independent routes (pmf moments vs.
closed-form partials) is computed both ways and cross-checked.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import (
    BracketFailure,
    InconsistentSigma,
    InvariantViolation,
    NoConvergence,
    TooCloseToSingularity,
    TruncationTooShort,
)
from .exact_enum import CountTable
from .series_core import (
    DegreeSet,
    PowerSumTable,
    cycle_index_eval,
    cycle_index_partial,
    shifted_cycle_index,
    shifted_fixpoint_free_sum,
    validate,
)

__all__ = [
    "SingularData",
    "OffspringLaw",
    "ForestLaw",
    "DerivedConstants",
    "eval_A",
    "eval_A_prime",
    "solve_singularity",
    "offspring_law",
    "forest_law",
    "derived_constants",
]

_LN2 = math.log(2.0)
POWER_SUM_CUTOFF = 1e-18   # stop tabulating p_i once p_i / i drops below this
POWER_SUM_CAP = 64
PMF_CAP = 512


# ---------------------------------------------------------------------------
# series evaluation
# ---------------------------------------------------------------------------

def _term(an: int, x: float, n: int) -> float:
    """a_n * x^n in float, falling back to log space for huge coefficients."""
    try:
        fa = float(an)
    except OverflowError:
        lg = an.bit_length()
        mant = an >> (lg - 64)
        lt = math.log(mant) + (lg - 64) * _LN2 + n * math.log(x)
        return math.exp(lt) if lt > -745.0 else 0.0
    return fa * x**n


def _growth_bound(counts: CountTable) -> tuple[int, int, float]:
    """(n1, n2, r) with a_n <= a_{n2} r^{n-n2} for n > n2 (extrapolated).

    r comes from the last two nonzero coefficients; since the counts behave
    like d * rho^-n n^(-3/2), the raw ratio underestimates 1/rho by a factor
    (n1/n2)^(3/2/(n2-n1)), so we inflate by twice that exponent to stay on
    the safe side.
    """
    a = counts.a
    n2 = next((n for n in range(counts.N, 0, -1) if a[n] > 0), None)
    n1 = next((n for n in range(n2 - 1, 0, -1) if a[n] > 0), None) if n2 else None
    if n1 is None:
        raise TruncationTooShort("need two nonzero coefficients for a growth bound")
    r_hat = (a[n2] / a[n1]) ** (1.0 / (n2 - n1))
    r = r_hat * (n2 / n1) ** (3.0 / (n2 - n1))
    return n1, n2, r


def eval_A(counts: CountTable, x: float, tol: float = 1e-12) -> float:
    """Certified evaluation of A(x) = sum a_n x^n from exact counts.

    Raises TooCloseToSingularity when the geometric tail bound beyond the
    tabulated N coefficients cannot be pushed below tol.
    """
    if x < 0.0 or math.isnan(x):
        raise ValueError(f"series argument must be >= 0, got {x}")
    if x == 0.0:
        return 0.0
    _, n2, r = _growth_bound(counts)
    q = x * r
    if q >= 1.0 - 1e-12:
        raise TooCloseToSingularity(
            f"x = {x} is at or beyond the extrapolated radius 1/r = {1.0 / r:.6g}"
        )
    tail = _term(counts.a[n2], x, n2) * q ** (counts.N + 1 - n2) / (1.0 - q)
    if tail > tol:
        raise TooCloseToSingularity(
            f"truncation tail {tail:.3g} exceeds tol {tol:.3g} at x = {x}"
        )
    terms = []
    for n in range(1, counts.N + 1):
        an = counts.a[n]
        if an == 0:
            continue
        t = _term(an, x, n)
        terms.append(t)
        if n > 32 and q < 0.9 and t < 1e-19 * terms[0]:
            break
    return math.fsum(terms)


def eval_A_prime(counts: CountTable, x: float, tol: float = 1e-12) -> float:
    """A'(x) = sum n a_n x^(n-1), certified like eval_A."""
    if x < 0.0 or math.isnan(x):
        raise ValueError(f"series argument must be >= 0, got {x}")
    if x == 0.0:
        return float(counts.a[1]) if counts.N >= 1 else 0.0
    _, n2, r = _growth_bound(counts)
    q = x * r
    if q >= 1.0 - 1e-12:
        raise TooCloseToSingularity(
            f"x = {x} is at or beyond the extrapolated radius 1/r = {1.0 / r:.6g}"
        )
    N = counts.N
    # sum_{n>N} n q^{n-n2} = q^{N+1-n2} ((N+1)/(1-q) + q/(1-q)^2)
    geom = q ** (N + 1 - n2) * ((N + 1) / (1.0 - q) + q / (1.0 - q) ** 2)
    tail = _term(counts.a[n2], x, n2) / x * geom
    if tail > tol:
        raise TooCloseToSingularity(
            f"derivative tail {tail:.3g} exceeds tol {tol:.3g} at x = {x}"
        )
    terms = []
    for n in range(1, N + 1):
        an = counts.a[n]
        if an == 0:
            continue
        t = n * _term(an, x, n) / x
        terms.append(t)
        if n > 32 and q < 0.9 and t < 1e-19 * terms[0]:
            break
    return math.fsum(terms)


# ---------------------------------------------------------------------------
# the singular system
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SingularData:
    """Solution of w = E(z,w), E_w = 1: the singularity and critical values.

    ``tails[i-2]`` holds A(rho^i) and ``d_tails[i-2]`` holds A'(rho^i) for
    i = 2..I_max; ``tail_bound`` certifies sum_{i > I_max} A(rho^i)/i.  The
    count table the solution was derived from rides along because every
    downstream law extraction needs the exact coefficients again.
    """

    omega: DegreeSet
    rho: float
    a_rho: float
    tails: tuple[float, ...]
    d_tails: tuple[float, ...]
    tail_bound: float
    residual: float
    counts: CountTable

    def __post_init__(self):
        if not (0.0 < self.rho < 1.0):
            raise InvariantViolation(f"rho must lie in (0,1), got {self.rho}")
        if not (self.a_rho > 0.0 and math.isfinite(self.a_rho)):
            raise InvariantViolation(f"A(rho) must be positive and finite, got {self.a_rho}")
        for lo, hi in zip(self.tails[1:], self.tails):
            if not lo < hi:
                raise InvariantViolation("tails A(rho^i) must decrease strictly in i")
        if self.tails and not self.tails[0] < self.a_rho:
            raise InvariantViolation("A(rho^2) must be smaller than A(rho)")
        if not (math.isfinite(self.residual) and self.residual >= 0.0):
            raise InvariantViolation("residual must be a finite nonnegative number")

    @property
    def I_max(self) -> int:
        return len(self.tails) + 1

    def power_table(self) -> PowerSumTable:
        """p_1 = A(rho), p_i = A(rho^i): the table Z_Omega is evaluated at."""
        return PowerSumTable((self.a_rho, *self.tails), self.tail_bound)

    def fixpoint_free_table(self) -> PowerSumTable:
        """Same table with p_1 = 0, as the D_m weights require."""
        return PowerSumTable((0.0, *self.tails), self.tail_bound)

    def tail(self, i: int) -> float:
        return self.a_rho if i == 1 else self.tails[i - 2]

    def d_tail(self, i: int) -> float:
        return self.d_tails[i - 2]


def _power_values(
    omega: DegreeSet, counts: CountTable, z: float, tol: float
) -> tuple[list[float], float]:
    """p_i = A(z^i) for i >= 2, with a geometric bound on the dropped tail."""
    finite = omega.tail_from is None
    cap = max(omega.max_degree(), 2) if finite else POWER_SUM_CAP
    vals: list[float] = []
    i = 2
    while i <= cap:
        v = eval_A(counts, z**i, tol)
        vals.append(v)
        if not finite and v / i < POWER_SUM_CUTOFF:
            break
        i += 1
    # p_{i+1} = A(z^{i+1}) <= z A(z^i), so the dropped sum_{i>last} p_i/i
    # is below p_last z / ((last+1)(1-z))
    bound = vals[-1] * z / ((len(vals) + 2) * (1.0 - z))
    return vals, bound


def _mk_table(w: float, vals: list[float], bound: float) -> PowerSumTable:
    return PowerSumTable((w, *vals), bound)


def _ratio_rho_guess(counts: CountTable, sp: int) -> float:
    """First-order Richardson extrapolation of (a_{n-sp}/a_n)^(1/sp)."""
    a = counts.a
    nz = [n for n in range(counts.N, 0, -1) if a[n] > 0][: 3]
    if len(nz) < 3:
        raise TruncationTooShort("need three nonzero coefficients to locate rho")
    n2, n1, n0 = nz
    if n2 - n1 != sp or n1 - n0 != sp:
        # irregular low-order gaps; fall back to the crudest estimate
        return (a[n1] / a[n2]) ** (1.0 / (n2 - n1))
    r_hi = (a[n1] / a[n2]) ** (1.0 / sp)   # ~ rho (1 + 3sp/(2 n2) + ...)
    r_lo = (a[n0] / a[n1]) ** (1.0 / sp)
    return r_hi + (r_hi - r_lo) * (n1 / sp)


def _w_fixpoint(
    omega: DegreeSet,
    z: float,
    vals: list[float],
    bound: float,
    w_cap: float,
    iters: int = 1200,
) -> tuple[bool, float]:
    """Iterate w <- E(z, w) from 0; report (subcritical?, last w).

    Below rho the iteration increases to the fixpoint and E_w stays < 1;
    above rho it either escapes past w_cap or stalls in the region where
    E_w has already crossed 1.  Both signals classify the side of rho.
    """
    w = 0.0
    for _ in range(iters):
        table = _mk_table(w, vals, bound)
        nxt = z * cycle_index_eval(omega, table)[0]
        if not math.isfinite(nxt) or nxt > w_cap:
            return False, w
        if abs(nxt - w) <= 1e-13 * (1.0 + nxt):
            w = nxt
            break
        w = nxt
    ew = z * shifted_cycle_index(omega, _mk_table(w, vals, bound), 1)
    return ew <= 1.0, w


def _system(
    omega: DegreeSet, counts: CountTable, z: float, w: float, tol: float
) -> tuple[float, float, float, float, float, float]:
    """Residuals (E-w, E_w-1) and the Jacobian entries at (z, w).

    E_z and E_wz chain through every power-sum argument p_i = A(z^i):
        E_z  = Z + sum_{i>=2} Z^(i) z^i A'(z^i),
        E_wz = Z^(1) + sum_{i>=2} Z^(i+1) z^i A'(z^i),
    with Z^(r) = sum_{k in Omega, k >= r} h_{k-r} the shifted sums.
    """
    vals, bound = _power_values(omega, counts, z, tol)
    table = _mk_table(w, vals, bound)
    Z = cycle_index_eval(omega, table)[0]
    Z1 = shifted_cycle_index(omega, table, 1)
    Z2 = shifted_cycle_index(omega, table, 2)
    s_ez = 0.0
    s_ewz = 0.0
    for i in range(2, len(vals) + 2):
        x = z**i
        zi = shifted_cycle_index(omega, table, i)
        zi1 = shifted_cycle_index(omega, table, i + 1)
        if zi == 0.0 and zi1 == 0.0:
            break
        ap = eval_A_prime(counts, x, tol)
        s_ez += zi * x * ap
        s_ewz += zi1 * x * ap
    F1 = z * Z - w
    F2 = z * Z1 - 1.0
    E_z = Z + s_ez
    E_ww = z * Z2
    E_wz = Z1 + s_ewz
    E_w = z * Z1
    return F1, F2, E_z, E_w, E_ww, E_wz


def solve_singularity(
    omega: DegreeSet, counts: CountTable, tol: float = 1e-12
) -> SingularData:
    """Locate (rho, A(rho)) by bracketed bisection plus damped Newton."""
    validate(omega)
    sp = omega.span
    guess = _ratio_rho_guess(counts, sp)
    inner_tol = min(tol, 1e-13)

    # --- bracket: lo must be subcritical, hi supercritical
    lo = guess * (1.0 - 4e-3)
    hi = guess * (1.0 + 4e-3)
    w_cap = 50.0
    lo_w = None
    for _ in range(10):
        vals, bound = _power_values(omega, counts, lo, inner_tol)
        ok, w = _w_fixpoint(omega, lo, vals, bound, w_cap)
        if ok:
            lo_w = w
            break
        lo *= 0.985
    else:
        raise BracketFailure(f"no subcritical point found below ratio guess {guess:.6g}")
    for _ in range(10):
        try:
            vals, bound = _power_values(omega, counts, hi, inner_tol)
            ok, _ = _w_fixpoint(omega, hi, vals, bound, w_cap)
        except TooCloseToSingularity:
            ok = False   # series mode already failed at hi^2: definitely past rho
        if not ok:
            break
        hi *= 1.015
    else:
        raise BracketFailure(f"no supercritical point found above ratio guess {guess:.6g}")

    # --- bisect to ~1e-7 relative, tracking the subcritical w
    while hi - lo > 1e-7 * hi:
        mid = 0.5 * (lo + hi)
        try:
            vals, bound = _power_values(omega, counts, mid, inner_tol)
            ok, w = _w_fixpoint(omega, mid, vals, bound, w_cap)
        except TooCloseToSingularity:
            ok = False
        if ok:
            lo, lo_w = mid, w
        else:
            hi = mid

    # --- damped Newton on the full 2x2 system
    z, w = lo, lo_w
    F1, F2, E_z, E_w, E_ww, E_wz = _system(omega, counts, z, w, inner_tol)
    resid = max(abs(F1), abs(F2))
    for _ in range(100):
        if resid < tol:
            break
        det = E_z * E_ww - (E_w - 1.0) * E_wz
        if det == 0.0 or not math.isfinite(det):
            raise NoConvergence(f"singular Jacobian at z={z:.12g}, w={w:.12g}")
        dz = -(F1 * E_ww - (E_w - 1.0) * F2) / det
        dw = -(E_z * F2 - E_wz * F1) / det
        lam = 1.0
        for _ in range(40):
            z_try, w_try = z + lam * dz, w + lam * dw
            if 0.0 < z_try < 1.0 and w_try > 0.0:
                try:
                    trial = _system(omega, counts, z_try, w_try, inner_tol)
                    r_try = max(abs(trial[0]), abs(trial[1]))
                except TooCloseToSingularity:
                    r_try = math.inf
                if r_try < resid:
                    z, w = z_try, w_try
                    F1, F2, E_z, E_w, E_ww, E_wz = trial
                    resid = r_try
                    break
            lam *= 0.5
        else:
            raise NoConvergence(
                f"Newton stalled at z={z:.12g}, w={w:.12g}, residual={resid:.3g}"
            )
    else:
        raise NoConvergence(
            f"no convergence after 100 Newton iterations; residual={resid:.3g}"
        )

    # --- tabulate critical values
    vals, bound = _power_values(omega, counts, z, inner_tol)
    d_tails = tuple(eval_A_prime(counts, z**i, inner_tol) for i in range(2, len(vals) + 2))
    return SingularData(
        omega=omega,
        rho=z,
        a_rho=w,
        tails=tuple(vals),
        d_tails=d_tails,
        tail_bound=bound,
        residual=resid,
        counts=counts,
    )


# ---------------------------------------------------------------------------
# offspring and forest laws
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OffspringLaw:
    """Law of xi: the number of fixpoints of the root permutation.

    P(xi = j) = (rho/A) (A^j / j!) sum_{k in Omega, k >= j} D_{k-j},
    with the fixpoint-free weights D taken at p_i = A(rho^i), i >= 2.
    """

    pmf: tuple[float, ...]
    mean: float
    variance: float
    truncation_mass: float

    def __post_init__(self):
        if self.truncation_mass > 1e-12:
            raise InvariantViolation(
                f"offspring pmf leaves mass {self.truncation_mass:.3g} uncovered"
            )
        if abs(self.mean - 1.0) > 1e-8:
            raise InvariantViolation(
                f"offspring mean {self.mean!r} violates criticality"
            )
        if not self.variance > 0.0:
            raise InvariantViolation("offspring variance must be positive")


@dataclass(frozen=True)
class ForestLaw:
    """Law of zeta: total size of the non-fixpoint forests at a blue vertex.

    ``mean`` is the closed-form E[zeta] from the partial-derivative display;
    the pmf supplies the independent moment route.
    """

    pmf: tuple[float, ...]
    mean: float
    truncation_mass: float

    def __post_init__(self):
        if self.truncation_mass > 1e-12:
            raise InvariantViolation(
                f"forest pmf leaves mass {self.truncation_mass:.3g} uncovered"
            )
        if len(self.pmf) > 1 and self.pmf[1] != 0.0:
            raise InvariantViolation("P(zeta = 1) must vanish: cycles cover >= 2 vertices")
        if not self.mean >= 0.0:
            raise InvariantViolation("E[zeta] must be nonnegative")


@dataclass(frozen=True)
class DerivedConstants:
    sigma2: float
    mean_zeta: float
    c_omega: float
    d_omega: float
    blue_fraction: float

    def __post_init__(self):
        if not self.c_omega > 0.0:
            raise InvariantViolation("c_omega must be positive")
        if not self.d_omega > 0.0:
            raise InvariantViolation("d_omega must be positive")
        if not (0.0 < self.blue_fraction <= 1.0):
            raise InvariantViolation("blue fraction must lie in (0, 1]")


def offspring_law(
    omega: DegreeSet, sing: SingularData, mass_tol: float = 1e-12
) -> OffspringLaw:
    validate(omega)
    A = sing.a_rho
    dtab = sing.fixpoint_free_table()
    max_k = omega.max_degree()
    pmf: list[float] = []
    coef = sing.rho / A          # (rho/A) A^j / j! at j = 0
    cum = 0.0
    j = 0
    while j <= PMF_CAP:
        sj = shifted_fixpoint_free_sum(omega, dtab, j)
        pj = coef * sj
        pmf.append(pj)
        cum += pj
        if 1.0 - cum <= mass_tol:
            break
        if max_k is not None and j >= max_k:
            break   # S_j = 0 from here on: the mass left is exactly 0
        j += 1
        coef *= A / j
    else:
        raise TruncationTooShort(
            f"offspring pmf needs more than {PMF_CAP} entries for mass {mass_tol:.3g}"
        )
    mass = math.fsum(pmf)
    mean = math.fsum(j * p for j, p in enumerate(pmf))
    var = math.fsum(j * j * p for j, p in enumerate(pmf)) - mean * mean
    return OffspringLaw(
        pmf=tuple(pmf),
        mean=mean,
        variance=var,
        truncation_mass=max(0.0, 1.0 - mass),
    )


def _forest_series(omega: DegreeSet, sing: SingularData, M: int) -> list[float]:
    """Coefficients in u of (rho/A) Z_Omega(A, A((u rho)^2), A((u rho)^3), ...)."""
    rho, A = sing.rho, sing.a_rho
    counts = sing.counts

    def p_series(i: int) -> list[float]:
        # A((u rho)^i) = sum_t a_t rho^{it} u^{it}
        out = [0.0] * (M + 1)
        for t in range(1, M // i + 1):
            at = counts.a[t] if t <= counts.N else None
            if at is None:
                raise TruncationTooShort(
                    f"forest series at order {M} needs counts beyond N={counts.N}"
                )
            if at:
                out[i * t] = _term(at, rho, i * t)
        return out

    if omega.tail_from is None:
        max_k = omega.max_degree()
        p = {1: [A] + [0.0] * M}
        for i in range(2, max_k + 1):
            p[i] = p_series(i)
        h = [[1.0] + [0.0] * M]
        for k in range(1, max_k + 1):
            hk = [0.0] * (M + 1)
            for i in range(1, k + 1):
                pi, hprev = p[i], h[k - i]
                for m in range(M + 1):
                    c = pi[m]
                    if c:
                        for r in range(M + 1 - m):
                            hk[m + r] += c * hprev[r]
            h.append([v / k for v in hk])
        Z = [0.0] * (M + 1)
        for k in omega.explicit:
            for m in range(M + 1):
                Z[m] += h[k][m]
    else:
        # S(u) = A + sum_{i>=2} A((u rho)^i)/i, then exp via n B_n = sum m S_m B_{n-m}
        S = [A] + [0.0] * M
        for i in range(2, M + 1):
            for t in range(1, M // i + 1):
                at = counts.a[t]
                if at:
                    S[i * t] += _term(at, rho, i * t) / i
        B = [math.exp(A)] + [0.0] * M
        for n in range(1, M + 1):
            acc = 0.0
            for m in range(1, n + 1):
                if S[m]:
                    acc += m * S[m] * B[n - m]
            B[n] = acc / n
        # subtract the h_k-series for excluded degrees below the tail
        K = omega.tail_from
        excl = [k for k in range(K) if k not in omega.explicit]
        Z = B
        if excl:
            kmax = max(excl)
            p = {1: [A] + [0.0] * M}
            for i in range(2, kmax + 1):
                p[i] = p_series(i)
            h = [[1.0] + [0.0] * M]
            for k in range(1, kmax + 1):
                hk = [0.0] * (M + 1)
                for i in range(1, k + 1):
                    pi, hprev = p[i], h[k - i]
                    for m in range(M + 1):
                        c = pi[m]
                        if c:
                            for r in range(M + 1 - m):
                                hk[m + r] += c * hprev[r]
                h.append([v / k for v in hk])
            for k in excl:
                for m in range(M + 1):
                    Z[m] -= h[k][m]
    scale = rho / A
    return [scale * v for v in Z]


def forest_law(
    omega: DegreeSet, sing: SingularData, mass_tol: float = 1e-12
) -> ForestLaw:
    validate(omega)
    pmf: list[float] | None = None
    for M in (128, 256, PMF_CAP):
        g = _forest_series(omega, sing, M)
        if 1.0 - math.fsum(g) <= mass_tol:
            pmf = g
            break
    if pmf is None:
        raise TruncationTooShort(
            f"forest pmf needs more than {PMF_CAP} entries for mass {mass_tol:.3g}"
        )
    # trim to the shortest prefix that still meets the mass target
    cum = 0.0
    cut = len(pmf)
    for m, v in enumerate(pmf):
        cum += v
        if 1.0 - cum <= mass_tol:
            cut = m + 1
            break
    pmf = pmf[:cut]

    # closed-form mean: (rho/A) sum_{i>=2} (dZ/ds_i) i rho^i A'(rho^i)
    table = sing.power_table()
    mean = 0.0
    for i in range(2, sing.I_max + 1):
        zi = cycle_index_partial(omega, table, i, 1)
        if zi == 0.0:
            continue
        mean += zi * i * sing.rho**i * sing.d_tail(i)
    mean *= sing.rho / sing.a_rho
    return ForestLaw(
        pmf=tuple(pmf),
        mean=mean,
        truncation_mass=max(0.0, 1.0 - math.fsum(pmf)),
    )


def derived_constants(
    omega: DegreeSet, sing: SingularData, xi: OffspringLaw, zeta: ForestLaw
) -> DerivedConstants:
    """sigma^2, E[zeta], c_Omega, d_Omega, blue fraction -- with cross-checks.

    sigma^2 comes from the second-partial display
        sigma^2 = rho A Z_{s1 s1} + rho Z_{s1} - rho^2 (Z_{s1})^2
    and must agree with the pmf variance of xi; d_Omega is
        gcd(Omega) sqrt(rho E_z / (2 pi E_ww))
    with E_z chained analytically through every A(z^i) argument.
    """
    validate(omega)
    rho, A = sing.rho, sing.a_rho
    table = sing.power_table()
    Z = cycle_index_eval(omega, table)[0]
    Z1 = cycle_index_partial(omega, table, 1, 1)
    Z11 = cycle_index_partial(omega, table, 1, 2)
    sigma2 = rho * A * Z11 + rho * Z1 - (rho * Z1) ** 2
    if abs(sigma2 - xi.variance) > 1e-6 * max(1.0, abs(sigma2)):
        raise InconsistentSigma(
            f"sigma^2 routes disagree: partials give {sigma2!r}, "
            f"pmf variance gives {xi.variance!r}"
        )
    mean_zeta = zeta.mean
    c_omega = math.sqrt(1.0 + mean_zeta) * math.sqrt(sigma2) / 2.0
    e_z = Z
    for i in range(2, sing.I_max + 1):
        zi = cycle_index_partial(omega, table, i, 1) * i   # Z^(i)
        if zi == 0.0:
            continue
        e_z += zi * rho**i * sing.d_tail(i)
    e_ww = rho * Z11
    d_omega = omega.span * math.sqrt(rho * e_z / (2.0 * math.pi * e_ww))
    return DerivedConstants(
        sigma2=sigma2,
        mean_zeta=mean_zeta,
        c_omega=c_omega,
        d_omega=d_omega,
        blue_fraction=1.0 / (1.0 + mean_zeta),
    )
