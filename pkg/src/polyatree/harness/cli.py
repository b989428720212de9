"""Command-line interface.

Five commands: ``enum`` (exact counts), ``solve`` (singularity and derived
constants), ``sample`` (random trees), ``crt`` (continuum height law
values), and ``experiment`` (the Monte Carlo harness).  Every command is
deterministic given its flags — timing fields in experiment reports are
the single exception.

The ``experiment`` command also reads a TOML config file whose keys mirror
the flags; explicit flags override config values, which override defaults.
"""

from __future__ import annotations

import json
import sys

import click

try:
    import tomllib
except ModuleNotFoundError:        # Python 3.10: the backport ships instead
    import tomli as tomllib

from ..errors import PolyaTreeError
from ..exact_enum import brute_force_enumerate, count_coefficients
from ..gf_analysis import derived_constants, forest_law, offspring_law, solve_singularity
from ..metrics_crt import crt_height_moment, crt_height_tail
from ..sampler.core import ColoredTree
from ..series_core import DegreeSet
from .experiments import (
    ExperimentConfig,
    analysis_bundle,
    collect_samples,
    run_benchmark,
    run_height_experiment,
    run_structure_experiment,
    run_tail_experiment,
    run_uniformity_audit,
)

PMF_PREVIEW = 32


def to_newick(tree: ColoredTree) -> str:
    """Newick line for one tree; node labels are b (blue) or w."""
    enc = [""] * tree.size
    for v in range(tree.size - 1, -1, -1):
        label = "b" if tree.blue[v] else "w"
        kids = tree.children[v]
        if kids:
            enc[v] = "(" + ",".join(enc[c] for c in kids) + ")" + label
        else:
            enc[v] = label
    return enc[0] + ";"


@click.group()
def main():
    """Enumeration, analysis and random generation of degree-restricted trees."""


def _fail(err: Exception) -> None:
    raise click.ClickException(str(err))


# --- enum ----------------------------------------------------------------------

@main.command("enum")
@click.option("--omega", required=True, help="degree set, e.g. '0,2' or '0,3+' or '0+'")
@click.option("--max-n", "max_n", type=int, required=True, help="tabulate a_n for n <= max-n")
@click.option("--oracle-check", "oracle_check", type=int, default=None,
              help="cross-check against brute-force enumeration for all n <= this")
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv")
def enum_cmd(omega, max_n, oracle_check, fmt):
    """Exact counts a_n of trees with n vertices."""
    try:
        om = DegreeSet.parse(omega)
        if max_n < 1:
            raise PolyaTreeError(f"--max-n must be >= 1, got {max_n}")
        counts = count_coefficients(om, max_n)
        if oracle_check is not None:
            for n in range(1, oracle_check + 1):
                classes = len(brute_force_enumerate(om, n))
                if classes != counts.a[n]:
                    raise PolyaTreeError(
                        f"count mismatch at n={n}: series {counts.a[n]}, "
                        f"brute force {classes}"
                    )
            click.echo(f"oracle check passed for n <= {oracle_check}", err=True)
    except PolyaTreeError as err:
        _fail(err)
    if fmt == "json":
        click.echo(json.dumps([str(a) for a in counts.a]))
    else:
        for n, a in enumerate(counts.a):
            click.echo(f"{n},{a}")


# --- solve ---------------------------------------------------------------------

@main.command("solve")
@click.option("--omega", required=True)
@click.option("--coeffs", type=int, default=400, help="series length backing the solver")
@click.option("--tol", type=float, default=1e-12, help="fixpoint solve tolerance")
def solve_cmd(omega, coeffs, tol):
    """Singularity, critical values and derived constants as JSON."""
    try:
        om = DegreeSet.parse(omega)
        counts = count_coefficients(om, coeffs)
        sing = solve_singularity(om, counts, tol)
        xi = offspring_law(om, sing)
        zeta = forest_law(om, sing)
        consts = derived_constants(om, sing, xi, zeta)
    except PolyaTreeError as err:
        _fail(err)
    payload = {
        "omega": str(om),
        "rho": sing.rho,
        "a_rho": sing.a_rho,
        "residual": sing.residual,
        "mean_xi": xi.mean,
        "sigma2": consts.sigma2,
        "mean_zeta": consts.mean_zeta,
        "c_omega": consts.c_omega,
        "d_omega": consts.d_omega,
        "blue_fraction": consts.blue_fraction,
        "xi_pmf": list(xi.pmf[:PMF_PREVIEW]),
        "zeta_pmf": list(zeta.pmf[:PMF_PREVIEW]),
    }
    click.echo(json.dumps(payload, sort_keys=True, indent=2))


# --- sample --------------------------------------------------------------------

@main.command("sample")
@click.option("--omega", required=True)
@click.option("--n", type=int, required=True, help="target size")
@click.option("--count", type=int, default=1, help="number of trees")
@click.option("--seed", type=int, default=0)
@click.option("--window", type=float, default=None,
              help="accept sizes within this relative window instead of exactly n")
@click.option("--format", "fmt",
              type=click.Choice(["newick", "parent-array", "json"]), default="newick")
def sample_cmd(omega, n, count, seed, window, fmt):
    """Random trees of (or near) a target size, uniform at each size."""
    try:
        if count < 1:
            raise PolyaTreeError(f"--count must be >= 1, got {count}")
        bundle = analysis_bundle(omega)
        trees = []
        for slot in range(count):
            if window is None:
                res = bundle.fast.sample_exact(n, seed, slot)
            else:
                res = bundle.fast.sample_window(n, window, seed, slot)
            trees.append(res.tree)
    except (PolyaTreeError, ValueError) as err:
        _fail(err)
    if fmt == "newick":
        for tree in trees:
            click.echo(to_newick(tree))
    elif fmt == "parent-array":
        for tree in trees:
            parents, flags = tree.to_parent_array()
            click.echo(" ".join(map(str, parents)))
            click.echo(" ".join(map(str, flags)))
    else:
        payload = {
            "omega": omega,
            "n": n,
            "seed": seed,
            "window": window,
            "trees": [
                dict(zip(("parent", "blue"), tree.to_parent_array()))
                for tree in trees
            ],
        }
        click.echo(json.dumps(payload, sort_keys=True))


# --- crt -----------------------------------------------------------------------

@main.command("crt")
@click.option("--tail", type=float, default=None, help="x: print P(height > x)")
@click.option("--moment", type=int, default=None, help="p: print E[height^p]")
def crt_cmd(tail, moment):
    """Continuum height law values (golden numbers for the harness)."""
    if (tail is None) == (moment is None):
        _fail(PolyaTreeError("exactly one of --tail or --moment is required"))
    try:
        value = crt_height_tail(tail) if tail is not None else crt_height_moment(moment)
    except (PolyaTreeError, ValueError) as err:
        _fail(err)
    click.echo(repr(value))


# --- experiment ------------------------------------------------------------------

_EXPERIMENT_KINDS = ("height", "tails", "structure", "uniformity", "bench")

# flag name -> (config key, type caster); used for TOML merging
_CFG_FIELDS = {
    "omega": str,
    "n": int,
    "samples": int,
    "seed": int,
    "mode": str,
    "epsilon": float,
    "workers": int,
    "keep_trees": bool,
    "mutated": bool,
    "engine": str,
    "format": str,
    "out": str,
}

_CFG_DEFAULTS = {
    "seed": 0,
    "mode": "exact",
    "epsilon": 0.05,
    "workers": 1,
    "keep_trees": False,
    "mutated": False,
    "engine": "reference",
    "format": "json",
    "out": None,
}


def _merge_config(cli_values: dict, config_path: str | None) -> dict:
    """CLI flags override TOML values override defaults."""
    merged = dict(_CFG_DEFAULTS)
    if config_path is not None:
        with open(config_path, "rb") as fh:
            data = tomllib.load(fh)
        for key, value in data.items():
            if key not in _CFG_FIELDS:
                raise PolyaTreeError(f"unknown config key {key!r}")
            merged[key] = _CFG_FIELDS[key](value)
    for key, value in cli_values.items():
        if value is not None:
            merged[key] = value
    for key in ("omega", "n", "samples"):
        if merged.get(key) is None:
            raise PolyaTreeError(f"missing required setting {key!r}")
    return merged


@main.command("experiment")
@click.argument("kind", type=click.Choice(_EXPERIMENT_KINDS))
@click.option("--omega", default=None)
@click.option("--n", type=int, default=None)
@click.option("--samples", type=int, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--mode", type=click.Choice(["exact", "window"]), default=None)
@click.option("--epsilon", type=float, default=None)
@click.option("--workers", type=int, default=None)
@click.option("--keep-trees", "keep_trees", is_flag=True, default=None,
              help="retain sampled trees; written next to --out as newick lines")
@click.option("--mutated", is_flag=True, default=None,
              help="uniformity only: run the corrupted one-copy sampler")
@click.option("--engine", type=click.Choice(["reference", "fast"]), default=None,
              help="uniformity only: which sampling path to audit")
@click.option("--out", type=click.Path(dir_okay=False, writable=True), default=None)
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default=None)
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
              default=None, help="TOML file mirroring the flags")
def experiment_cmd(kind, omega, n, samples, seed, mode, epsilon, workers,
                   keep_trees, mutated, engine, out, fmt, config_path):
    """Run one Monte Carlo experiment and emit its report."""
    try:
        merged = _merge_config(
            {"omega": omega, "n": n, "samples": samples, "seed": seed,
             "mode": mode, "epsilon": epsilon, "workers": workers,
             "keep_trees": keep_trees, "mutated": mutated, "engine": engine,
             "out": out, "format": fmt},
            config_path,
        )
        if merged["keep_trees"] and merged["out"] is None:
            raise PolyaTreeError("--keep-trees needs --out to hold the tree file")

        if kind == "uniformity":
            report = run_uniformity_audit(
                merged["omega"], merged["n"], merged["samples"], merged["seed"],
                mutated=merged["mutated"], engine=merged["engine"],
            )
            trees = None
        else:
            cfg = ExperimentConfig(
                omega=merged["omega"], n=merged["n"], samples=merged["samples"],
                seed=merged["seed"], mode=merged["mode"], epsilon=merged["epsilon"],
                workers=merged["workers"], keep_trees=merged["keep_trees"],
            )
            if kind == "bench":
                report, trees = run_benchmark(cfg), None
            else:
                coll = collect_samples(cfg)
                runner = {"height": run_height_experiment,
                          "tails": run_tail_experiment,
                          "structure": run_structure_experiment}[kind]
                report, trees = runner(cfg, coll), coll.trees
    except PolyaTreeError as err:
        _fail(err)

    text = report.to_json() if merged["format"] == "json" else report.to_csv()
    if merged["out"] is not None:
        with open(merged["out"], "w") as fh:
            fh.write(text)
        if trees is not None:
            with open(merged["out"] + ".trees", "w") as fh:
                for tree in trees:
                    fh.write(to_newick(tree) + "\n")
    else:
        click.echo(text, nl=False)


if __name__ == "__main__":
    main(sys.argv[1:])
