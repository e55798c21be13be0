"""Command-line front end.

Subcommands:

``run``       run a named experiment; writes ``<out>/<experiment>_seed<seed>.csv``
              (or ``..._chain<i>.csv`` with ``--chains``) and a matching
              ``.summary.json``
``db-check``  detailed-balance self-check of the discrete kernel
``list``      print the experiment catalog

Settings for ``run`` are resolved as flags > environment > config file >
experiment defaults. Environment variables use the prefix ``LATENTSLICE_``
followed by the upper-cased setting name (``LATENTSLICE_SEED``,
``LATENTSLICE_ITERS``, ``LATENTSLICE_BURNIN``, ``LATENTSLICE_THIN``,
``LATENTSLICE_LAMBDA``, ``LATENTSLICE_K``, ``LATENTSLICE_OUT``,
``LATENTSLICE_CHAINS``, ``LATENTSLICE_EXPERIMENT``). The config file is JSON
with the same keys in lower case (``lambda`` for the rate).

Exit codes: 0 success, 1 usage error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Callable

import numpy as np

from . import diagnostics as diag
from .baselines import EllipticalConfig, SteppingOutConfig, run_gibbs_slice
from .discrete import DiscreteTarget, detailed_balance_residual
from .errors import SamplerError
from .experiments import (
    FiniteMixtureHyper,
    MDPHyper,
    finite_mixture_run,
    gp_regression_run,
    mdp_run,
    spike_slab_run,
    state_space_run,
)
from .latent import LatentSliceConfig, run_chain
from .models import (
    BimodalMixture,
    CorrelatedGaussian,
    ExponentialData,
    Funnel,
    GPRegression,
    IsotropicGaussian,
    NormalMixtureData,
    SpikeSlab,
    StateSpace,
)
from .rng import make_rng

SCHEMA_VERSION = 1
ENV_PREFIX = "LATENTSLICE_"
EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2

DATA_STREAM = 0


class UsageError(Exception):
    pass


@dataclass
class RunResult:
    columns: list[str]
    iterations: np.ndarray
    samples: np.ndarray
    extras: dict = field(default_factory=dict)


@dataclass(frozen=True)
class Experiment:
    name: str
    description: str
    runner: Callable
    iters: int
    burnin: int = 0
    thin: int = 1
    lam: float | None = None
    k: int | None = None


@dataclass
class ExperimentConfig:
    experiment: str
    seed: int = 0
    iters: int | None = None
    burnin: int | None = None
    thin: int | None = None
    lam: float | None = None
    k: int | None = None
    out: str = "out"
    chains: int = 1

    def resolved(self) -> "ExperimentConfig":
        """Fill unset fields from the experiment's defaults and validate."""
        if self.experiment not in CATALOG:
            raise UsageError(f"unknown experiment {self.experiment!r}; see 'list'")
        e = CATALOG[self.experiment]
        cfg = replace(
            self,
            iters=e.iters if self.iters is None else self.iters,
            burnin=e.burnin if self.burnin is None else self.burnin,
            thin=e.thin if self.thin is None else self.thin,
            lam=e.lam if self.lam is None else self.lam,
            k=e.k if self.k is None else self.k,
        )
        if cfg.iters < 1 or cfg.burnin < 0 or cfg.burnin >= cfg.iters:
            raise UsageError("need iters > burnin >= 0")
        if cfg.thin < 1:
            raise UsageError("thin must be >= 1")
        if cfg.lam is not None and not cfg.lam > 0:
            raise UsageError("lambda must be positive")
        if cfg.k is not None and cfg.k < 1:
            raise UsageError("k must be >= 1")
        if cfg.chains < 1:
            raise UsageError("chains must be >= 1")
        if not 0 <= cfg.seed < 2 ** 64:
            raise UsageError("seed must be a non-negative 64-bit integer")
        return cfg


def _retain(n_iter, burnin, thin):
    it = np.arange(1, n_iter + 1)
    return it[(it > burnin) & ((it - burnin) % thin == 0)]


def _latent(model, init):
    def run(cfg, data_rng, rng):
        out = run_chain(model.target(), init(model), LatentSliceConfig(lam=cfg.lam), cfg.iters, cfg.burnin, cfg.thin, rng=rng)
        names = ["v"] + [f"x{i}" for i in range(1, model.dim)] if isinstance(model, Funnel) else [f"y{i + 1}" for i in range(model.dim)]
        return RunResult(names, out.iterations, out.samples, {"mean_shrink_proposals": float(out.shrink_counts.mean())})

    return run


def _bimodal(cfg, data_rng, rng):
    res = _latent(BimodalMixture(), lambda m: np.zeros(1))(cfg, data_rng, rng)
    y = res.samples[:, 0]
    if y.size >= diag.MIN_LENGTH:
        res.extras.update(
            right_mode_fraction=float(diag.mode_fraction(y, [0.0])[1]),
            mode_switches=diag.mode_switches(y),
        )
    return res


def _funnel_baseline(cfg, data_rng, rng):
    model = Funnel()
    out = run_gibbs_slice(model.target(), np.zeros(model.dim), SteppingOutConfig(k=1.0, m=10), cfg.iters, cfg.burnin, cfg.thin, rng)
    names = ["v"] + [f"x{i}" for i in range(1, model.dim)]
    return RunResult(names, out.iterations, out.samples, {"mean_sweep_evaluations": float(out.shrink_counts.mean())})


def _mdp(cfg, data_rng, rng):
    x = NormalMixtureData().generate_data(data_rng)["x"]
    draws, _, _ = mdp_run(x, cfg.iters, cfg.burnin, MDPHyper(), cfg.k, rng)
    keep = _retain(cfg.iters, cfg.burnin, cfg.thin)
    return RunResult(["x_pred"], keep, draws[keep - cfg.burnin - 1][:, None])


def _finite_mixture(cfg, data_rng, rng):
    x = ExponentialData().generate_data(data_rng)["x"]
    Ms, draws, _ = finite_mixture_run(x, cfg.iters, cfg.burnin, FiniteMixtureHyper(), cfg.k, rng)
    keep = _retain(cfg.iters, cfg.burnin, cfg.thin)
    samples = np.column_stack([Ms[keep - 1], draws[keep - cfg.burnin - 1]])
    return RunResult(["M", "x_pred"], keep, samples)


def _gp(variant):
    def run(cfg, data_rng, rng):
        model = GPRegression()
        data = model.generate_data(data_rng)
        res = gp_regression_run(variant, data, cfg.iters, rng, model, cfg.burnin, EllipticalConfig(lam=cfg.lam))
        keep = _retain(cfg.iters, cfg.burnin, cfg.thin)
        rmse = float(np.sqrt(np.mean((res.mean - data["f_true"]) ** 2)))
        return RunResult(
            [f"f{i + 1}" for i in range(data.n)],
            keep,
            res.samples[keep - 1],
            {"posterior_mean_rmse": rmse, "mean_shrink_proposals": float(res.n_proposals.mean())},
        )

    return run


def _state_space(cfg, data_rng, rng):
    model = StateSpace()
    data = model.generate_data(data_rng)
    res = state_space_run(data, cfg.iters, cfg.lam, rng, model)
    keep = _retain(cfg.iters, cfg.burnin, cfg.thin)
    samples = np.column_stack([res.theta[keep - 1], res.x[keep - 1]])
    names = ["theta"] + [f"x{i + 1}" for i in range(data.n)]
    return RunResult(names, keep, samples, {"theta_mean": float(res.theta[keep - 1].mean())})


def _spike_slab(cfg, data_rng, rng):
    model = SpikeSlab()
    data = model.generate_data(data_rng)
    out = spike_slab_run(data, cfg.iters, cfg.lam, rng, model, burn_in=cfg.burnin, thin=cfg.thin)
    return RunResult([f"beta{j + 1}" for j in range(model.p)], out.iterations, out.samples)


CATALOG: dict[str, Experiment] = {
    e.name: e
    for e in [
        Experiment("bimodal", "1-d mixture of N(-10,1) and N(10,1); latent slice, lambda 0.01", _bimodal, 2000, lam=0.01),
        Experiment("bivariate", "bivariate normal with correlation 0.95; latent slice", _latent(CorrelatedGaussian(), lambda m: np.zeros(2)), 20000, lam=0.1),
        Experiment("gauss50", "50-d standard normal; latent slice", _latent(IsotropicGaussian(), lambda m: np.zeros(50)), 5000, lam=0.1),
        Experiment("funnel", "10-d funnel (v ~ N(0,9), x_i | v ~ N(0,e^v)); latent slice, lambda 0.2", _latent(Funnel(), lambda m: np.zeros(10)), 200_000, thin=100, lam=0.2),
        Experiment("funnel-slice-baseline", "10-d funnel; coordinate-wise stepping-out slice sampler (k=1, m=10)", _funnel_baseline, 200_000, thin=100),
        Experiment("mdp", "Dirichlet-process normal mixture on 400 points; predictive draws", _mdp, 20_000, burnin=15_000, k=5),
        Experiment("finite-mixture", "exponential mixture with unknown number of components on 400 Exp(3) points", _finite_mixture, 5000, burnin=1000, k=5),
        Experiment("gp", "GP regression, elliptical slice with latent-slice angle draws", _gp("latent"), 2000, lam=0.1),
        Experiment("gp-standard-ess", "GP regression, standard elliptical slice sampling", _gp("standard"), 2000, lam=0.1),
        Experiment("state-space", "Poisson AR(1) state-space model, n=500; block latent slice on x plus gamma theta", _state_space, 2000, lam=0.1),
        Experiment("spike-slab", "spike-and-slab linear regression, p=90; block latent slice on beta", _spike_slab, 10_000, lam=0.1),
    ]
}


def _format_row(i, row) -> str:
    return ",".join([str(int(i))] + [f"{v:.17g}" for v in row])


def _run_one(cfg: ExperimentConfig, chain: int | None):
    stream = 1 if chain is None else 1 + chain
    data_rng = make_rng(cfg.seed, DATA_STREAM)
    rng = make_rng(cfg.seed, stream)
    t0 = time.perf_counter()
    res = CATALOG[cfg.experiment].runner(cfg, data_rng, rng)
    wall = time.perf_counter() - t0

    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    stem = f"{cfg.experiment}_seed{cfg.seed}" + ("" if chain is None else f"_chain{chain}")
    csv_path = out / f"{stem}.csv"
    with open(csv_path, "w") as fh:
        fh.write(",".join(["iter"] + res.columns) + "\n")
        for i, row in zip(res.iterations, res.samples):
            fh.write(_format_row(i, row) + "\n")

    dims = []
    for j, name in enumerate(res.columns):
        col = res.samples[:, j]
        entry = {"name": name}
        if col.size >= diag.MIN_LENGTH:
            entry.update(diag.summarize(col).to_dict())
        dims.append(entry)
    summary = {
        "schema_version": SCHEMA_VERSION,
        "experiment": cfg.experiment,
        "seed": cfg.seed,
        "chain": chain,
        "n": int(res.samples.shape[0]),
        "config": {k: v for k, v in asdict(cfg).items() if k not in ("out",)},
        "dimensions": dims,
        "extras": res.extras,
        "wall_time_s": wall,
    }
    json_path = out / f"{stem}.summary.json"
    with open(json_path, "w") as fh:
        json.dump(summary, fh, indent=2, allow_nan=False, default=_json_default)
        fh.write("\n")
    return str(csv_path), str(json_path)


def _json_default(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return None if math.isnan(o) else float(o)
    raise TypeError(type(o).__name__)


def run(cfg: ExperimentConfig) -> list[tuple[str, str]]:
    """Run a resolved configuration; returns the written ``(csv, json)`` paths."""
    cfg = cfg.resolved()
    if cfg.chains == 1:
        return [_run_one(cfg, None)]
    with ProcessPoolExecutor(max_workers=min(cfg.chains, os.cpu_count() or 1)) as pool:
        return list(pool.map(_run_one, [cfg] * cfg.chains, range(cfg.chains)))


def db_check(k: int, n_states: int, seed: int, n_pmfs: int = 100) -> float:
    """Largest detailed-balance residual over ``n_pmfs`` random pmfs on ``{0..n_states-1}``."""
    rng = make_rng(seed)
    worst = 0.0
    for _ in range(n_pmfs):
        w = rng.random(n_states) + 1e-3
        worst = max(worst, detailed_balance_residual(DiscreteTarget.from_pmf(w), k, n_states - 1))
    return worst


# --- argument handling -------------------------------------------------------------------------

_KEYS = {
    "experiment": str,
    "seed": int,
    "iters": int,
    "burnin": int,
    "thin": int,
    "lambda": float,
    "k": int,
    "out": str,
    "chains": int,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="latentslice", description="Latent slice sampling experiments.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    r = sub.add_parser("run", help="run an experiment")
    r.add_argument("--experiment", help="experiment name (see 'list')")
    r.add_argument("--seed", type=int)
    r.add_argument("--iters", type=int)
    r.add_argument("--burnin", type=int)
    r.add_argument("--thin", type=int)
    r.add_argument("--lambda", dest="lam", type=float, help="rate of the gamma(2) scale prior")
    r.add_argument("--k", type=int, help="window width of the discrete kernel")
    r.add_argument("--out", help="output directory (default: out)")
    r.add_argument("--config", help="JSON file with default settings")
    r.add_argument("--chains", type=int, help="independent chains run in parallel")

    d = sub.add_parser("db-check", help="detailed-balance self-check")
    d.add_argument("--k", type=int, default=3)
    d.add_argument("--n-states", type=int, default=10)
    d.add_argument("--seed", type=int, default=0)
    d.add_argument("--pmfs", type=int, default=100)

    sub.add_parser("list", help="list experiments")
    return p


def _coerce(key, raw, source):
    try:
        return _KEYS[key](raw)
    except (TypeError, ValueError):
        raise UsageError(f"invalid value {raw!r} for {key} in {source}") from None


def config_from_sources(args, environ=None) -> ExperimentConfig:
    """Merge defaults, config file, environment and flags (in increasing priority)."""
    environ = os.environ if environ is None else environ
    values = {}
    if args.config:
        try:
            with open(args.config) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config file: {exc}") from None
        for key, raw in data.items():
            if key not in _KEYS:
                raise UsageError(f"unknown config key {key!r}")
            values[key] = _coerce(key, raw, args.config)
    for key in _KEYS:
        env = ENV_PREFIX + key.upper()
        if env in environ:
            values[key] = _coerce(key, environ[env], env)
    flags = vars(args)
    for key in _KEYS:
        attr = "lam" if key == "lambda" else key
        if flags.get(attr) is not None:
            values[key] = flags[attr]
    if "experiment" not in values:
        raise UsageError("--experiment is required")
    if "lambda" in values:
        values["lam"] = values.pop("lambda")
    return ExperimentConfig(**values)


def main(argv=None, environ=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "list":
            for e in CATALOG.values():
                print(f"{e.name:<22} {e.description}")
            return EXIT_OK
        if args.command == "db-check":
            if args.k < 1 or args.n_states < 1 or args.pmfs < 1:
                raise UsageError("k, n-states and pmfs must be positive")
            worst = db_check(args.k, args.n_states, args.seed, args.pmfs)
            print(f"max detailed-balance residual: {worst:.3e}")
            return EXIT_OK if worst < 1e-12 else EXIT_RUNTIME
        cfg = config_from_sources(args, environ)
        for csv_path, json_path in run(cfg):
            print(csv_path)
            print(json_path)
        return EXIT_OK
    except UsageError as exc:
        print(f"latentslice: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SamplerError, OSError, ValueError) as exc:
        print(f"latentslice: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
