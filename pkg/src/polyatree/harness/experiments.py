"""Monte Carlo experiments over sampled trees.

Each experiment draws trees through the fast sampler, reduces every tree to
its TreeStats immediately (full trees are discarded unless asked for), and
packs the results into an ExperimentReport: a flat list of statistics, each
carrying its Monte Carlo standard error and sample count, plus free-form
extras and a timing block.

Determinism contract: a report is a pure function of its ExperimentConfig
except for the ``timing`` block.  Slot i of a run is sampled from streams
keyed by (seed, i) alone, so the worker count changes scheduling but not a
single sampled tree, and merging worker outputs by slot index reproduces
the single-worker report byte for byte.
"""

from __future__ import annotations

import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from threading import Lock

import numpy as np
from scipy import stats as sstats

from ..errors import (
    AttemptsExhausted,
    InadmissibleSize,
    InsufficientTailSamples,
    InvariantViolation,
)
from ..exact_enum import CountTable, brute_force_enumerate, count_coefficients
from ..gf_analysis import (
    DerivedConstants,
    ForestLaw,
    OffspringLaw,
    SingularData,
    derived_constants,
    forest_law,
    offspring_law,
    solve_singularity,
)
from ..metrics_crt import compute_stats, crt_height_moment, crt_height_tail
from ..sampler.core import (
    ColoredTree,
    ExponentTables,
    SamplerBudget,
    check_admissible,
    sample_boltzmann,
)
from ..sampler.fast import FastSampler
from ..sampler.rng import DOMAIN_REFERENCE, CounterRng, stream_key
from ..series_core import DegreeSet

__all__ = [
    "ExperimentConfig",
    "ExperimentReport",
    "AnalysisBundle",
    "analysis_bundle",
    "CollectedSamples",
    "collect_samples",
    "nearest_admissible",
    "run_height_experiment",
    "run_tail_experiment",
    "run_structure_experiment",
    "run_uniformity_audit",
    "run_benchmark",
]

SCHEMA_VERSION = 1
SLOT_MAX_ATTEMPTS = 10**12

KS_GRID_LO = 0.05
KS_GRID_HI = 4.0
KS_GRID_STEP = 0.025

BETA_GRID_LO = 0.5
BETA_GRID_HI = 3.0
BETA_GRID_STEP = 0.125
MIN_EXCEEDANCES = 50       # grid points below this are flagged, not fitted
MIN_FIT_POINTS = 3         # fewer usable points than this and no fit exists
ENVELOPE_SIGMAS = 3.0      # domination margin in units of residual rms


# --- configuration and report ------------------------------------------------

@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment run, fully specified (the seed included).

    ``omega`` stays a string here so that configs round-trip through TOML
    and CLI flags unchanged; admissibility of ``n`` is checked against the
    solved pipeline when the experiment starts, not at construction.
    """

    omega: str
    n: int
    samples: int
    seed: int = 0
    mode: str = "exact"          # or "window"
    epsilon: float = 0.05
    workers: int = 1
    keep_trees: bool = False

    def __post_init__(self):
        DegreeSet.parse(self.omega)   # fail fast on grammar errors
        if self.n < 1:
            raise InvariantViolation(f"target size must be >= 1, got {self.n}")
        if self.samples < 1:
            raise InvariantViolation(f"sample count must be >= 1, got {self.samples}")
        if self.mode not in ("exact", "window"):
            raise InvariantViolation(f"mode must be 'exact' or 'window', got {self.mode!r}")
        if self.mode == "window" and not (0.0 < self.epsilon < 1.0):
            raise InvariantViolation(f"epsilon must lie in (0,1), got {self.epsilon}")
        if self.workers < 1:
            raise InvariantViolation(f"workers must be >= 1, got {self.workers}")

    def echo(self) -> dict:
        # workers is deliberately absent: it is scheduling, not semantics,
        # and reports must be byte-identical across worker counts
        return {
            "omega": self.omega,
            "n": self.n,
            "samples": self.samples,
            "seed": self.seed,
            "mode": self.mode,
            "epsilon": self.epsilon,
            "keep_trees": self.keep_trees,
        }


@dataclass
class ExperimentReport:
    """Structured experiment output.

    ``statistics`` is the flat, plot-ready part: one dict per reported
    quantity with keys name/value/stderr/samples.  ``timing`` holds wall
    clock measurements and execution metadata (the worker count) and is
    the only part allowed to differ between two runs of the same config.
    """

    kind: str
    config: dict
    statistics: list = field(default_factory=list)
    extras: dict = field(default_factory=dict)
    timing: dict = field(default_factory=dict)
    partial: bool = False
    schema_version: int = SCHEMA_VERSION

    def add(self, name: str, value: float, stderr: float, samples: int) -> None:
        if not (math.isfinite(value) and math.isfinite(stderr)):
            raise InvariantViolation(f"statistic {name} is not finite: {value}, {stderr}")
        self.statistics.append({
            "name": name,
            "value": float(value),
            "stderr": float(stderr),
            "samples": int(samples),
        })

    def value(self, name: str) -> float:
        for row in self.statistics:
            if row["name"] == name:
                return row["value"]
        raise KeyError(name)

    def row(self, name: str) -> dict:
        for row in self.statistics:
            if row["name"] == name:
                return row
        raise KeyError(name)

    def to_json(self) -> str:
        payload = {
            "schema_version": self.schema_version,
            "kind": self.kind,
            "config": self.config,
            "partial": self.partial,
            "statistics": self.statistics,
            "extras": self.extras,
            "timing": self.timing,
        }
        return json.dumps(payload, sort_keys=True, indent=2) + "\n"

    def to_csv(self) -> str:
        lines = ["name,value,stderr,samples"]
        for row in self.statistics:
            lines.append(
                f"{row['name']},{row['value']!r},{row['stderr']!r},{row['samples']}"
            )
        for key in sorted(self.timing):
            lines.append(f"timing_{key},{self.timing[key]!r},,")
        return "\n".join(lines) + "\n"


# --- solved pipeline, cached per degree set -----------------------------------

@dataclass(frozen=True)
class AnalysisBundle:
    """Everything the experiments need for one degree set, built once."""

    omega: DegreeSet
    counts: CountTable
    sing: SingularData
    xi: OffspringLaw
    zeta: ForestLaw
    consts: DerivedConstants
    fast: FastSampler


_BUNDLES: dict = {}
_BUNDLE_LOCK = Lock()


def analysis_bundle(spec: str, n_coeffs: int = 400) -> AnalysisBundle:
    """The solved pipeline for a degree-set string, memoized per process."""
    omega = DegreeSet.parse(spec)
    key = (str(omega), n_coeffs)
    with _BUNDLE_LOCK:
        hit = _BUNDLES.get(key)
    if hit is not None:
        return hit
    counts = count_coefficients(omega, n_coeffs)
    sing = solve_singularity(omega, counts)
    xi = offspring_law(omega, sing)
    zeta = forest_law(omega, sing)
    consts = derived_constants(omega, sing, xi, zeta)
    fast = FastSampler(omega, sing)
    bundle = AnalysisBundle(omega, counts, sing, xi, zeta, consts, fast)
    with _BUNDLE_LOCK:
        return _BUNDLES.setdefault(key, bundle)


def nearest_admissible(sing: SingularData, n: int) -> int:
    """The admissible size closest to n; exact ties resolve upward."""
    if n < 1:
        raise InadmissibleSize(f"size {n} is not positive")
    span = sing.omega.span
    for d in range(span + 1):
        for candidate in (n + d, n - d):
            if candidate < 1:
                continue
            try:
                check_admissible(sing, candidate)
            except InadmissibleSize:
                continue
            return candidate
    raise InadmissibleSize(f"no admissible size within span {span} of {n}")


# --- sample collection --------------------------------------------------------

@dataclass
class CollectedSamples:
    """Per-slot sampling results, merged in slot order."""

    stats: list            # TreeStats per accepted slot
    attempts: list         # rejection attempts per accepted slot
    partial: bool
    trees: list | None     # ColoredTree per slot, only when keep_trees


def _run_slots(cfg: ExperimentConfig, bundle: AnalysisBundle, slots, results,
               lo: int, hi: int, max_attempts: int) -> None:
    fast = bundle.fast
    for slot in slots:
        try:
            res = fast.sample_slot(lo, hi, cfg.seed, slot, max_attempts)
        except AttemptsExhausted:
            continue                      # leave the slot empty; merge flags it
        tree = res.tree
        entry = (compute_stats(tree), res.attempts, tree if cfg.keep_trees else None)
        results[slot] = entry


def _size_window(cfg: ExperimentConfig, bundle: AnalysisBundle) -> tuple[int, int]:
    if cfg.mode == "exact":
        check_admissible(bundle.sing, cfg.n)
        return cfg.n, cfg.n
    lo = max(1, math.ceil(cfg.n * (1.0 - cfg.epsilon) - 1e-9))
    hi = math.floor(cfg.n * (1.0 + cfg.epsilon) + 1e-9)
    span = bundle.omega.span
    if not any(m % span == 1 % span for m in range(lo, min(hi, lo + span) + 1)):
        raise InadmissibleSize(
            f"window [{lo},{hi}] contains no size = 1 mod {span} for {bundle.omega}"
        )
    return lo, hi


def collect_samples(cfg: ExperimentConfig, bundle: AnalysisBundle | None = None,
                    max_attempts: int = SLOT_MAX_ATTEMPTS) -> CollectedSamples:
    """Draw cfg.samples trees and reduce them to TreeStats, slot by slot.

    Worker w owns slots w, w+workers, w+2*workers, ...; every slot's tree
    depends only on (seed, slot), so the merged result is invariant under
    the worker count.  Slots that exhaust ``max_attempts`` are dropped and
    the result is flagged partial.
    """
    if bundle is None:
        bundle = analysis_bundle(cfg.omega)
    lo, hi = _size_window(cfg, bundle)
    results: list = [None] * cfg.samples
    if cfg.workers == 1:
        _run_slots(cfg, bundle, range(cfg.samples), results, lo, hi, max_attempts)
    else:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            futures = [
                pool.submit(_run_slots, cfg, bundle,
                            range(w, cfg.samples, cfg.workers),
                            results, lo, hi, max_attempts)
                for w in range(cfg.workers)
            ]
            for fut in futures:
                fut.result()
    kept = [r for r in results if r is not None]
    partial = len(kept) < cfg.samples
    return CollectedSamples(
        stats=[r[0] for r in kept],
        attempts=[r[1] for r in kept],
        partial=partial,
        trees=[r[2] for r in kept] if cfg.keep_trees else None,
    )


# --- shared statistic helpers ---------------------------------------------------

def _mean_row(report: ExperimentReport, name: str, xs: np.ndarray) -> None:
    m = len(xs)
    mean = float(np.mean(xs))
    sd = float(np.std(xs, ddof=1)) if m > 1 else 0.0
    report.add(name, mean, sd / math.sqrt(m) if m > 0 else 0.0, m)


def _variance_row(report: ExperimentReport, name: str, xs: np.ndarray) -> None:
    m = len(xs)
    var = float(np.var(xs, ddof=1)) if m > 1 else 0.0
    # normal-theory spread of a sample variance: var * sqrt(2/(m-1))
    stderr = var * math.sqrt(2.0 / (m - 1)) if m > 1 else 0.0
    report.add(name, var, stderr, m)


def _quantile_row(report: ExperimentReport, name: str, xs_sorted: np.ndarray,
                  p: float) -> None:
    m = len(xs_sorted)
    value = float(np.quantile(xs_sorted, p))
    # one-sigma order-statistic bracket around rank p*m
    spread = math.sqrt(m * p * (1.0 - p))
    lo = xs_sorted[max(0, math.floor(p * m - spread))]
    hi = xs_sorted[min(m - 1, math.ceil(p * m + spread))]
    report.add(name, value, float(hi - lo) / 2.0, m)


# --- height experiment ----------------------------------------------------------

def run_height_experiment(cfg: ExperimentConfig,
                          precollected: CollectedSamples | None = None,
                          ) -> ExperimentReport:
    """Rescaled height and width against the continuum height law.

    Reports mean, second moment and variance of c*H/sqrt(n) and c*W/sqrt(n),
    and the Kolmogorov-Smirnov distance between the empirical law of the
    rescaled height and the continuum CDF on a fixed grid.
    """
    t0 = time.perf_counter()
    bundle = analysis_bundle(cfg.omega)
    coll = precollected if precollected is not None else collect_samples(cfg, bundle)
    if not coll.stats:
        raise AttemptsExhausted("no slot produced a tree", attempts=0)
    report = ExperimentReport(kind="height", config=cfg.echo(), partial=coll.partial)

    c = bundle.consts.c_omega
    heights = np.array([s.height for s in coll.stats], dtype=float)
    widths = np.array([s.width for s in coll.stats], dtype=float)
    sizes = np.array([s.size for s in coll.stats], dtype=float)
    # per-tree rescaling: in window mode each tree is scaled by its own size
    xs = c * heights / np.sqrt(sizes)
    ws = c * widths / np.sqrt(sizes)
    m = len(xs)

    _mean_row(report, "height_rescaled_mean", xs)
    _mean_row(report, "height_rescaled_second_moment", xs * xs)
    _variance_row(report, "height_rescaled_variance", xs)
    _mean_row(report, "width_rescaled_mean", ws)
    _variance_row(report, "width_rescaled_variance", ws)
    _mean_row(report, "attempts_per_sample", np.array(coll.attempts, dtype=float))

    grid_n = round((KS_GRID_HI - KS_GRID_LO) / KS_GRID_STEP) + 1
    grid = np.linspace(KS_GRID_LO, KS_GRID_HI, grid_n)
    xs_sorted = np.sort(xs)
    # empirical P(X > x) via right searchsorted on the sorted sample
    emp_tail = 1.0 - np.searchsorted(xs_sorted, grid, side="right") / m
    law_tail = np.array([crt_height_tail(x) for x in grid])
    ks = float(np.max(np.abs(emp_tail - law_tail)))
    report.add("height_ks_distance", ks, 1.0 / (2.0 * math.sqrt(m)), m)

    report.extras = {
        "limit_mean": crt_height_moment(1),
        "limit_second_moment": crt_height_moment(2),
        "c_omega": c,
        "ks_grid": {"lo": KS_GRID_LO, "hi": KS_GRID_HI, "step": KS_GRID_STEP},
    }
    report.timing = {"wall_s": time.perf_counter() - t0, "workers": cfg.workers}
    return report


# --- tail experiment -------------------------------------------------------------

def _tail_series(report: ExperimentReport, label: str, values: np.ndarray,
                 sizes: np.ndarray, betas: np.ndarray) -> dict:
    """Exceedance estimates and the sub-Gaussian fit for one functional.

    Grid points with fewer than MIN_EXCEEDANCES hits are flagged and kept
    out of the fit; the fit regresses log p-hat on beta^2 and the envelope
    check asks that every usable point lies below the fitted line raised
    by ENVELOPE_SIGMAS residual rms units.
    """
    m = len(values)
    thresholds = np.sqrt(sizes)[None, :] * betas[:, None]   # x = beta * sqrt(n)
    exceed = (values[None, :] >= thresholds).sum(axis=1)

    usable, flagged = [], []
    for b, k in zip(betas, exceed):
        if k >= MIN_EXCEEDANCES:
            usable.append((float(b), int(k)))
        else:
            flagged.append({"beta": float(b), "exceedances": int(k)})
    if len(usable) < MIN_FIT_POINTS:
        raise InsufficientTailSamples(
            f"{label}: only {len(usable)} grid points have >= "
            f"{MIN_EXCEEDANCES} exceedances; cannot fit a slope"
        )

    bet = np.array([b for b, _ in usable])
    phat = np.array([k / m for _, k in usable])
    logp = np.log(phat)
    for b, k in usable:
        p = k / m
        # delta-method error of log p-hat for a binomial proportion
        se = math.sqrt((1.0 - p) / (m * p))
        report.add(f"tail_{label}_logp_beta_{b:.3f}", math.log(p), se, m)

    x = bet * bet
    design = np.column_stack([np.ones_like(x), x])
    coef, *_ = np.linalg.lstsq(design, logp, rcond=None)
    intercept, slope = float(coef[0]), float(coef[1])
    resid = logp - design @ coef
    dof = len(x) - 2
    s2 = float(resid @ resid) / dof if dof > 0 else 0.0
    sxx = float(np.sum((x - np.mean(x)) ** 2))
    se_slope = math.sqrt(s2 / sxx) if sxx > 0 else float("inf")
    se_intercept = math.sqrt(s2 * (1.0 / len(x) + np.mean(x) ** 2 / sxx)) if sxx > 0 else float("inf")
    t_stat = slope / se_slope if se_slope > 0 else float("-inf")

    rms = math.sqrt(float(resid @ resid) / len(x))
    margin = ENVELOPE_SIGMAS * rms
    dominated = bool(np.all(logp <= design @ coef + margin))

    report.add(f"tail_{label}_slope", slope, se_slope, m)
    report.add(f"tail_{label}_intercept", intercept, se_intercept, m)
    return {
        "t_stat": t_stat,
        "points_used": len(usable),
        "flagged": flagged,
        "envelope_dominates": dominated,
        "envelope_margin": margin,
        "residual_rms": rms,
    }


def run_tail_experiment(cfg: ExperimentConfig,
                        precollected: CollectedSamples | None = None,
                        ) -> ExperimentReport:
    """Sub-Gaussian tail fits for height, width, and the blue-subtree height.

    Estimates log P(X >= beta * sqrt(n)) on the beta grid, fits the log
    exceedance against beta^2, and checks the empirical points are
    dominated by the fitted envelope.  Negative slope with large |t| is
    the finite-n signature of an exp(-c x^2 / n) bound.
    """
    t0 = time.perf_counter()
    bundle = analysis_bundle(cfg.omega)
    coll = precollected if precollected is not None else collect_samples(cfg, bundle)
    if not coll.stats:
        raise AttemptsExhausted("no slot produced a tree", attempts=0)
    report = ExperimentReport(kind="tails", config=cfg.echo(), partial=coll.partial)

    sizes = np.array([s.size for s in coll.stats], dtype=float)
    grid_n = round((BETA_GRID_HI - BETA_GRID_LO) / BETA_GRID_STEP) + 1
    betas = np.linspace(BETA_GRID_LO, BETA_GRID_HI, grid_n)

    series = {
        "H": np.array([s.height for s in coll.stats], dtype=float),
        "W": np.array([s.width for s in coll.stats], dtype=float),
        "blueH": np.array([s.blue_height for s in coll.stats], dtype=float),
    }
    extras: dict = {"beta_grid": {"lo": BETA_GRID_LO, "hi": BETA_GRID_HI,
                                  "step": BETA_GRID_STEP}}
    for label, values in series.items():
        extras[label] = _tail_series(report, label, values, sizes, betas)
    report.extras = extras
    report.timing = {"wall_s": time.perf_counter() - t0, "workers": cfg.workers}
    return report


# --- structure experiment ---------------------------------------------------------

def run_structure_experiment(cfg: ExperimentConfig,
                             precollected: CollectedSamples | None = None,
                             ) -> ExperimentReport:
    """Blue-skeleton share and dangling-forest sizes against predictions.

    The blue fraction should concentrate at 1/(1 + E[zeta]); the largest
    dangling forest should stay logarithmic, so max_forest / log n is
    reported through its quantiles.
    """
    t0 = time.perf_counter()
    bundle = analysis_bundle(cfg.omega)
    coll = precollected if precollected is not None else collect_samples(cfg, bundle)
    if not coll.stats:
        raise AttemptsExhausted("no slot produced a tree", attempts=0)
    report = ExperimentReport(kind="structure", config=cfg.echo(), partial=coll.partial)

    sizes = np.array([s.size for s in coll.stats], dtype=float)
    blue = np.array([s.blue_size for s in coll.stats], dtype=float) / sizes
    _mean_row(report, "blue_fraction_mean", blue)
    m = len(blue)
    sd = float(np.std(blue, ddof=1)) if m > 1 else 0.0
    report.add("blue_fraction_sd", sd, sd / math.sqrt(2.0 * (m - 1)) if m > 1 else 0.0, m)

    ratios = np.sort(np.array(
        [s.max_forest / math.log(s.size) for s in coll.stats if s.size > 1]
    ))
    if len(ratios) > 0:
        for p, name in ((0.5, "max_forest_log_ratio_q50"),
                        (0.9, "max_forest_log_ratio_q90"),
                        (0.99, "max_forest_log_ratio_q99")):
            _quantile_row(report, name, ratios, p)
    _mean_row(report, "attempts_per_sample", np.array(coll.attempts, dtype=float))

    zeta0 = bundle.zeta.pmf[0] if bundle.zeta.pmf else 0.0
    report.extras = {
        "blue_fraction_predicted": bundle.consts.blue_fraction,
        "mean_zeta": bundle.consts.mean_zeta,
        "zeta_mass_at_zero": zeta0,
        # the fraction is 1 exactly when zeta is almost surely 0
        "blue_fraction_is_one": bool(abs(bundle.consts.blue_fraction - 1.0) < 1e-12),
        "zeta_is_degenerate": bool(abs(zeta0 - 1.0) < 1e-12),
    }
    report.timing = {"wall_s": time.perf_counter() - t0, "workers": cfg.workers}
    return report


# --- uniformity audit ---------------------------------------------------------------

AUDIT_SIZE_CAP = 8


def run_uniformity_audit(omega_spec: str, n: int, samples: int, seed: int = 0,
                         mutated: bool = False, engine: str = "reference",
                         ) -> ExperimentReport:
    """Chi-square test of sampled isomorphism classes against uniformity.

    The class list comes from the brute-force enumerator, so the audit is
    independent of the generating-function machinery end to end.  With
    ``mutated=True`` the reference sampler materializes every cycle once
    instead of ell times — the audit exists to catch exactly this bug, so
    the mutated run must fail loudly.  Samples whose canonical form is not
    a valid class (possible under mutation) are tallied separately and
    force p = 0.
    """
    t0 = time.perf_counter()
    if n > AUDIT_SIZE_CAP:
        raise InvariantViolation(
            f"uniformity audit needs the full class list; n <= {AUDIT_SIZE_CAP}, got {n}"
        )
    if engine not in ("reference", "fast"):
        raise InvariantViolation(f"engine must be 'reference' or 'fast', got {engine!r}")
    if mutated and engine != "reference":
        raise InvariantViolation("the one-copy mutation lives on the reference path")
    bundle = analysis_bundle(omega_spec)
    check_admissible(bundle.sing, n)

    classes = sorted(t.encoding for t in brute_force_enumerate(bundle.omega, n))
    index = {enc: i for i, enc in enumerate(classes)}
    observed = np.zeros(len(classes), dtype=np.int64)
    invalid = 0

    if engine == "fast":
        for slot in range(samples):
            tree = bundle.fast.sample_exact(n, seed, slot).tree
            i = index.get(tree.canonical())
            if i is None:
                invalid += 1
            else:
                observed[i] += 1
    else:
        tables = ExponentTables(bundle.omega, bundle.sing)
        budget = SamplerBudget(max_size=n)
        for slot in range(samples):
            rng = CounterRng(stream_key(DOMAIN_REFERENCE, seed, slot))
            while True:
                result = sample_boltzmann(bundle.sing, budget, rng,
                                          tables=tables, one_copy=mutated)
                if isinstance(result, ColoredTree) and result.size == n:
                    tree = result
                    break
            i = index.get(tree.canonical())
            if i is None:
                invalid += 1
            else:
                observed[i] += 1

    if invalid > 0:
        # mass outside the admissible classes: uniformity is already dead
        chi2, p = float("inf"), 0.0
    elif len(classes) == 1:
        chi2, p = 0.0, 1.0          # a single class is trivially uniform
    else:
        chi2, p = sstats.chisquare(observed)
        chi2, p = float(chi2), float(p)

    report = ExperimentReport(
        kind="uniformity",
        config={"omega": omega_spec, "n": n, "samples": samples, "seed": seed,
                "mutated": mutated, "engine": engine},
    )
    dof = len(classes) - 1
    chi2_val = chi2 if math.isfinite(chi2) else -1.0
    report.add("chi_square_statistic", chi2_val,
               math.sqrt(2.0 * dof) if dof > 0 else 0.0, samples)
    report.add("chi_square_p", p, 0.0, samples)
    report.add("invalid_class_samples", float(invalid), 0.0, samples)
    report.extras = {
        "class_count": len(classes),
        "observed": observed.tolist(),
        "expected_per_class": samples / len(classes),
    }
    report.timing = {"wall_s": time.perf_counter() - t0}
    return report


# --- benchmark -----------------------------------------------------------------------

def run_benchmark(cfg: ExperimentConfig) -> ExperimentReport:
    """Rejection cost at n and 4n, plus window-mode cost at n.

    Attempt counts come from the kernel alone (no trees are built), so the
    numbers are a pure function of the seed; wall-clock rates live in the
    timing block.  The quadrupled size is snapped to the nearest admissible
    size when 4n itself is not one.
    """
    t0 = time.perf_counter()
    bundle = analysis_bundle(cfg.omega)
    check_admissible(bundle.sing, cfg.n)
    n4 = nearest_admissible(bundle.sing, 4 * cfg.n)
    report = ExperimentReport(kind="bench", config=cfg.echo())

    fast = bundle.fast
    means = {}
    for tag, size in (("base", cfg.n), ("quad", n4)):
        t_size = time.perf_counter()
        attempts = np.array(
            [fast.measure_attempts(size, size, cfg.seed, slot)[0]
             for slot in range(cfg.samples)],
            dtype=float,
        )
        _mean_row(report, f"attempts_exact_{tag}", attempts)
        means[tag] = (float(np.mean(attempts)),
                      float(np.std(attempts, ddof=1)) / math.sqrt(len(attempts))
                      if len(attempts) > 1 else 0.0)
        report.timing[f"wall_exact_{tag}_s"] = time.perf_counter() - t_size

    ratio = means["quad"][0] / means["base"][0]
    # delta-method error for the ratio of two independent means
    rel = math.sqrt((means["base"][1] / means["base"][0]) ** 2
                    + (means["quad"][1] / means["quad"][0]) ** 2)
    report.add("attempts_ratio_quad", ratio, ratio * rel, cfg.samples)

    lo = max(1, math.ceil(cfg.n * (1.0 - cfg.epsilon) - 1e-9))
    hi = math.floor(cfg.n * (1.0 + cfg.epsilon) + 1e-9)
    t_win = time.perf_counter()
    window_attempts = np.array(
        [fast.measure_attempts(lo, hi, cfg.seed, slot)[0]
         for slot in range(cfg.samples)],
        dtype=float,
    )
    _mean_row(report, "attempts_window", window_attempts)
    report.timing["wall_window_s"] = time.perf_counter() - t_win

    report.extras = {
        "n_base": cfg.n,
        "n_quad": n4,
        "window": [lo, hi],
        "epsilon": cfg.epsilon,
        "expected_ratio_exponent": 1.5,
    }
    report.timing["wall_s"] = time.perf_counter() - t0
    report.timing["workers"] = cfg.workers
    return report
