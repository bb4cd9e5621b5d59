"""Command-line interface: simulate, fit, predict, compare.

Each subcommand reads a JSON config file, applies any command-line
overrides, computes everything in memory and only then writes its output
files, so a failed run leaves no partial artifacts.  Validation problems
exit with status 2, numerical failures during sampling with status 3.

Relative paths inside a config resolve against the config file's
directory; output files land in the --out directory.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from pgcopula import fileio
from pgcopula.copula import CopulaFamily, CopulaParams, CorrelationMatrix
from pgcopula.diagnostics import lpml, predictive_grid, summarize_chain
from pgcopula.errors import NumericalError, ValidationError
from pgcopula.inference import GammaPrior, McmcConfig, PriorSpec, run_two_stage
from pgcopula.joint_model import ModelParams, simulate_dataset
from pgcopula.projected_gamma import MarginalParams

__all__ = ["build_parser", "entry", "main"]


def _load_config(path, allowed):
    path = Path(path)
    try:
        with open(path) as handle:
            doc = json.load(handle)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ValidationError(f"{path}: config must be a JSON object")
    unknown = sorted(set(doc) - set(allowed))
    if unknown:
        raise ValidationError(
            f"{path}: unknown config keys {unknown}; allowed keys are "
            f"{sorted(allowed)}")
    return doc


def _require(doc, key, path):
    if key not in doc:
        raise ValidationError(f"{path}: missing required config key {key!r}")
    return doc[key]


def _resolve(base, value):
    p = Path(value)
    return p if p.is_absolute() else Path(base) / p


def _parse_marginals(obj):
    if not isinstance(obj, list) or len(obj) < 2:
        raise ValidationError(
            "config 'marginals' must be a list of at least two [alpha1, "
            "alpha2, beta] triples")
    out = []
    for k, triple in enumerate(obj):
        if not isinstance(triple, list) or len(triple) != 3:
            raise ValidationError(
                f"marginal {k + 1} must be a [alpha1, alpha2, beta] triple")
        out.append(MarginalParams(*[float(v) for v in triple]))
    return tuple(out)


def _parse_copula(obj, dimension):
    if not isinstance(obj, dict):
        raise ValidationError("config 'copula' must be an object")
    unknown = sorted(set(obj) - {"family", "correlation", "nu"})
    if unknown:
        raise ValidationError(f"unknown copula keys {unknown}")
    family = CopulaFamily(str(obj.get("family", "gaussian")))
    corr = obj.get("correlation")
    if corr is None:
        raise ValidationError("config 'copula' needs a 'correlation' entry")
    arr = np.asarray(corr, dtype=np.float64)
    if arr.ndim == 1:
        correlation = CorrelationMatrix.from_upper(dimension, arr)
    else:
        correlation = CorrelationMatrix(arr)
    if correlation.dimension != dimension:
        raise ValidationError(
            f"correlation dimension {correlation.dimension} does not match "
            f"{dimension} marginals")
    if family is CopulaFamily.STUDENT_T:
        return CopulaParams(family, correlation, float(_require(obj, "nu", "copula")))
    return CopulaParams(family, correlation)


def _parse_prior(obj):
    if obj is None:
        return PriorSpec()
    if not isinstance(obj, dict):
        raise ValidationError("config 'prior' must be an object")
    unknown = sorted(set(obj) - {"alpha1", "alpha2", "beta", "nu_minus_2"})
    if unknown:
        raise ValidationError(f"unknown prior keys {unknown}")

    def one(pair, name):
        if not isinstance(pair, list) or len(pair) != 2:
            raise ValidationError(
                f"prior {name!r} must be a [shape, rate] pair, got {pair!r}")
        return GammaPrior(float(pair[0]), float(pair[1]))

    kwargs = {}
    for name in ("alpha1", "alpha2", "beta"):
        if name in obj:
            value = obj[name]
            if isinstance(value, list) and value and isinstance(value[0], list):
                kwargs[name] = tuple(one(p, name) for p in value)
            else:
                kwargs[name] = one(value, name)
    if "nu_minus_2" in obj:
        kwargs["nu_minus_2"] = one(obj["nu_minus_2"], "nu_minus_2")
    return PriorSpec(**kwargs)


_MCMC_KEYS = ("total", "burn_in", "lag", "seed", "step_marginal", "step_rho",
              "step_nu", "adapt_window", "stage2_sweeps", "stage2_warmup")


def _parse_mcmc(obj, seed_override):
    obj = {} if obj is None else obj
    if not isinstance(obj, dict):
        raise ValidationError("config 'mcmc' must be an object")
    unknown = sorted(set(obj) - set(_MCMC_KEYS))
    if unknown:
        raise ValidationError(f"unknown mcmc keys {unknown}")
    kwargs = dict(obj)
    if seed_override is not None:
        kwargs["seed"] = seed_override
    return McmcConfig(**kwargs)


def cmd_simulate(args):
    doc = _load_config(args.config, {"n", "seed", "marginals", "copula", "output"})
    marginals = _parse_marginals(_require(doc, "marginals", args.config))
    copula = _parse_copula(_require(doc, "copula", args.config), len(marginals))
    params = ModelParams(marginals=marginals, copula=copula)
    n = _require(doc, "n", args.config)
    if not isinstance(n, int) or n < 1:
        raise ValidationError(f"config 'n' must be a positive integer, got {n!r}")
    seed = args.seed if args.seed is not None else int(doc.get("seed", 0))
    rng = np.random.default_rng(seed)
    dataset = simulate_dataset(params, n, rng)
    out = Path(args.out) / str(doc.get("output", "dataset.csv"))
    fileio.write_dataset(out, dataset)
    print(f"seed = {seed}")
    print(f"wrote {dataset.n_obs} x {dataset.dimension} dataset to {out}")
    return 0


def cmd_fit(args):
    base = Path(args.config).parent
    doc = _load_config(args.config, {"data", "family", "mcmc", "prior", "interval"})
    data_path = _resolve(base, _require(doc, "data", args.config))
    data = fileio.read_dataset(data_path, degrees=args.degrees)
    if data.dimension < 2:
        raise ValidationError(
            f"{data_path}: fitting needs at least two angle columns, got "
            f"{data.dimension}")
    family = CopulaFamily(str(_require(doc, "family", args.config)))
    prior = _parse_prior(doc.get("prior"))
    gamma = float(doc.get("interval", 0.95))
    base_config = _parse_mcmc(doc.get("mcmc"), args.seed)
    config_echo = json.dumps(doc, separators=(", ", ": "), sort_keys=True)
    out_dir = Path(args.out)
    for k in range(args.chains):
        config = base_config if args.chains == 1 else McmcConfig(
            **{**{key: getattr(base_config, key) for key in _MCMC_KEYS},
               "seed": base_config.seed + k})
        chain = run_two_stage(data, family, prior, config)
        suffix = "" if args.chains == 1 else f"_{k + 1}"
        chain_path = out_dir / f"chain{suffix}.csv"
        fileio.write_chain(chain_path, chain)
        fileio.write_chain_metadata(
            out_dir / f"chain{suffix}.meta.txt", chain,
            # record the path as configured, not resolved, so identical
            # configs yield identical artifacts wherever they run
            extra={"config_json": config_echo, "data": str(doc["data"])})
        fileio.write_summary(out_dir / f"summary{suffix}.json",
                             summarize_chain(chain, gamma))
        shown = ", ".join(f"{name}={rate:.2f}"
                          for name, rate in sorted(chain.acceptance.items()))
        print(f"chain{suffix or ' '}: {len(chain)} draws (seed {config.seed}), "
              f"acceptance {shown}")
        print(f"wrote {chain_path}")
    return 0


def cmd_predict(args):
    base = Path(args.config).parent
    doc = _load_config(args.config, {"chain", "axes", "resolution", "output"})
    chain = fileio.read_chain(_resolve(base, _require(doc, "chain", args.config)))
    axes = doc.get("axes", [1, 2])
    if (not isinstance(axes, list) or len(axes) != 2
            or not all(isinstance(a, int) for a in axes)):
        raise ValidationError(
            f"config 'axes' must be two 1-based column indices, got {axes!r}")
    resolution = doc.get("resolution", 200)
    if not isinstance(resolution, int):
        raise ValidationError(f"config 'resolution' must be an integer, got "
                              f"{resolution!r}")
    grid = predictive_grid(chain, (axes[0] - 1, axes[1] - 1), resolution)
    out = Path(args.out) / str(doc.get("output", "grid.csv"))
    fileio.write_grid(out, grid)
    print(f"wrote {resolution} x {resolution} predictive grid for axes "
          f"({axes[0]}, {axes[1]}) to {out}")
    return 0


def cmd_compare(args):
    base = Path(args.config).parent
    doc = _load_config(args.config, {"data", "models", "output"})
    data = fileio.read_dataset(
        _resolve(base, _require(doc, "data", args.config)), degrees=args.degrees)
    models = _require(doc, "models", args.config)
    if not isinstance(models, list) or len(models) != 2:
        raise ValidationError("config 'models' must list exactly two chain entries")
    report = []
    for k, entry_doc in enumerate(models):
        if not isinstance(entry_doc, dict) or "chain" not in entry_doc:
            raise ValidationError(f"model {k + 1} must be an object with a 'chain' key")
        unknown = sorted(set(entry_doc) - {"chain", "label"})
        if unknown:
            raise ValidationError(f"model {k + 1}: unknown keys {unknown}")
        chain = fileio.read_chain(_resolve(base, entry_doc["chain"]))
        label = str(entry_doc.get("label", chain.family.value))
        report.append({"label": label, "lpml": lpml(data, chain)})
    difference = report[1]["lpml"] - report[0]["lpml"]
    preferred = report[1]["label"] if difference > 0 else report[0]["label"]
    for entry_doc in report:
        print(f"lpml[{entry_doc['label']}] = {entry_doc['lpml']:.4f}")
    print(f"difference (second minus first) = {difference:.4f}")
    print(f"preferred = {preferred}")
    out = Path(args.out) / str(doc.get("output", "compare.json"))
    fileio.write_summary(out, {"models": report, "difference": difference,
                               "preferred": preferred})
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="pgcopula",
        description="Simulate and fit copula-coupled projected-gamma angle models.")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="simulate a dataset from fixed parameters")
    sim.add_argument("--config", required=True, help="JSON config file")
    sim.add_argument("--seed", type=int, default=None,
                     help="override the config seed")
    sim.add_argument("--out", default=".", help="output directory")
    sim.set_defaults(func=cmd_simulate)

    fit = sub.add_parser("fit", help="run the two-stage sampler on a dataset")
    fit.add_argument("--config", required=True, help="JSON config file")
    fit.add_argument("--seed", type=int, default=None,
                     help="override the config seed")
    fit.add_argument("--degrees", action="store_true",
                     help="angles in the data file are degrees")
    fit.add_argument("--chains", type=int, default=1,
                     help="number of chains, seeded seed, seed+1, ...")
    fit.add_argument("--out", default=".", help="output directory")
    fit.set_defaults(func=cmd_fit)

    pred = sub.add_parser("predict", help="posterior predictive density grid")
    pred.add_argument("--config", required=True, help="JSON config file")
    pred.add_argument("--out", default=".", help="output directory")
    pred.set_defaults(func=cmd_predict)

    comp = sub.add_parser("compare", help="score two fitted chains on a dataset")
    comp.add_argument("--config", required=True, help="JSON config file")
    comp.add_argument("--degrees", action="store_true",
                      help="angles in the data file are degrees")
    comp.add_argument("--out", default=".", help="output directory")
    comp.set_defaults(func=cmd_compare)
    return parser


def main(argv=None):
    """Run the CLI; returns the process exit status."""
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "chains", 1) < 1:
        print("error: --chains must be at least 1", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entry():
    """Console-script wrapper."""
    raise SystemExit(main())
