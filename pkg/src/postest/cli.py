"""Command-line front end.

Exit status: 0 success, 2 usage or config error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import datetime
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__, bayes, config as cfgmod
from .bayes import DegeneratePosteriorError, ParameterGrid
from .information import (
    ZeroInformationError,
    bound_report,
    crb,
    fisher_information,
    generalized_fisher,
)
from .mle import IncompatibleDataError, mle_estimate, read_histogram
from .montecarlo import fmt, pgh_holevo_curve, run_sweep
from .statmodel import DomainError, Sample

EXIT_USAGE = 2
EXIT_NUMERIC = 3


class UsageError(Exception):
    pass


class NumericalFailure(Exception):
    pass


# output helpers


def _emit(args, name: str, columns, rows, extra=None) -> None:
    """Write a table as CSV or JSON to ``--out/<name>`` or stdout."""
    if args.format == "json":
        doc = {"columns": list(columns), "rows": [dict(zip(columns, r)) for r in rows]}
        if extra:
            doc.update(extra)
        text = json.dumps(doc, indent=2, default=_json_default) + "\n"
        suffix = ".json"
    else:
        lines = [",".join(columns)]
        lines += [",".join(_cell(v) for v in r) for r in rows]
        if extra:
            lines = [f"# {k}: {v}" for k, v in extra.items()] + lines
        text = "\n".join(lines) + "\n"
        suffix = ".csv"
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        path = out / (name + suffix)
        path.write_text(text)
        _write_manifest(args, out / (name + ".manifest.json"), [path])
    else:
        sys.stdout.write(text)


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, str):
        return v
    return fmt(v)


def _json_default(v):
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    raise TypeError(type(v))


def _resolved(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k != "func"}


def _write_manifest(args, path: Path, outputs, config=None) -> None:
    manifest = {
        "tool": "postest",
        "version": __version__,
        "command": args.command,
        "seed": getattr(args, "seed", None),
        "config": config if config is not None else _resolved(args),
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "outputs": [str(p) for p in outputs],
    }
    path.write_text(json.dumps(manifest, indent=2, default=_json_default) + "\n")


# model and data


def _model(args):
    try:
        return cfgmod.make_model(args.model, args.vis)
    except OSError as exc:
        raise UsageError(f"cannot read model table: {exc}") from None


def _params(args, model):
    if model.n_params == 2:
        if args.phi is None or args.vis is None:
            raise UsageError(f"model {args.model} needs --phi and --vis")
        return (args.phi, args.vis)
    if args.phi is None:
        raise UsageError("--phi (true parameter value) is required")
    return (args.phi,)


def _grid(args, model):
    lo, hi = model.domain
    return ParameterGrid(lo, hi, args.grid_points)


def read_sample(path, n_outcomes: int) -> Sample:
    """Outcomes from a data file.

    A file with commas is an ``outcome,count`` histogram; otherwise it lists
    outcome labels separated by whitespace, one record in file order.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise UsageError(f"{path}: {exc.strerror}") from None
    if "," in text:
        return Sample.from_counts(read_histogram(path, n_outcomes))
    labels = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0]
        for tok in line.split():
            try:
                k = int(tok)
            except ValueError:
                raise DomainError(f"{path}:{lineno}: bad outcome '{tok}'") from None
            if not 0 <= k < n_outcomes:
                raise DomainError(f"{path}:{lineno}: outcome {k} outside 0..{n_outcomes - 1}")
            labels.append(k)
    return Sample.of(labels, n_outcomes)


# subcommands


def cmd_fisher(args):
    model = _model(args)
    params = _params(args, model)
    alphas = args.alpha or [2.0]
    rows = []
    for a in alphas:
        rows.append((a, generalized_fisher(model, params, args.index, a)))
    _emit(args, "fisher", ("alpha", "f_alpha"), rows)


def cmd_bounds(args):
    model = _model(args)
    params = _params(args, model)
    columns = ("M", "beta", "alpha", "fisher", "generalized_fisher", "crb",
               "barankin_bound", "sigma_beta", "xi_beta", "gaussian_limit")
    rows = []
    for M in args.M or [1]:
        for beta in args.beta or [2.0]:
            rep = bound_report(model, params, M, beta, args.sigma, args.index)
            rows.append(tuple(getattr(rep, c) for c in columns))
    _emit(args, "bounds", columns, rows)


def _posterior_for(args, model, sample):
    if model.n_params == 2:
        vis_grid = ParameterGrid(0.0, 1.0, args.vis_points)
        return bayes.posterior_2d(model, sample, _grid(args, model), vis_grid)
    return bayes.posterior(model, sample, _grid(args, model))


def cmd_posterior(args):
    model = _model(args)
    sample = read_sample(args.data, model.n_outcomes)
    post = _posterior_for(args, model, sample)
    mesh = np.meshgrid(*(g.nodes for g in post.grids), indexing="ij")
    names = list(model.param_names) + ["weight"]
    rows = list(zip(*(m.ravel() for m in mesh), post.weights.ravel()))
    _emit(args, "posterior", names, rows)


def cmd_estimate(args):
    model = _model(args)
    sample = read_sample(args.data, model.n_outcomes)
    M = sample.M
    rows = []
    note = None
    if args.method == "mle":
        if model.n_params != 1:
            raise UsageError("mle supports single-parameter models only")
        res = mle_estimate(model, sample.histogram, _grid(args, model))
        f = fisher_information(model, (res.estimate,))
        rows.append((model.param_names[0], res.estimate, res.stderr**2, _crb(f, M)))
        columns = ("param", "estimate", "variance", "crb")
    else:
        post = _posterior_for(args, model, sample)
        marginals = [post] if post.ndim == 1 else [bayes.marginal(post, i) for i in range(2)]
        for name, m in zip(model.param_names, marginals):
            est = bayes.bayes_estimate(m)
            rows.append((name, est, bayes.posterior_variance(m)))
        if model.n_params == 1:
            f = fisher_information(model, (rows[0][1],))
            rows = [rows[0] + (_crb(f, M),)]
        else:
            rows = [r + (None,) for r in rows]
        columns = ("param", "estimate", "variance", "crb")
        if M == 0:
            note = "no information: empty data, prior summary"
    _emit(args, "estimate", columns, rows, {"M": M, "method": args.method, **({"note": note} if note else {})})
    if note:
        print(note, file=sys.stderr)


def _crb(f, M):
    if M < 1 or f <= 0:
        return math.inf
    return crb(f, M)


def cmd_sweep(args):
    try:
        raw = cfgmod.parse_file(args.config)
        for key, section, value in (
            ("seed", "sweep", args.seed),
            ("phi", "model", args.phi),
            ("vis", "model", args.vis),
            ("points", "grid", args.grid_points),
            ("repetitions", "sweep", args.repetitions),
        ):
            if value is not None:
                raw.set(section, key, value)
        if args.model is not None:
            raw.set("model", "name", args.model)
        experiment = cfgmod.build_experiment(raw)
    except cfgmod.ConfigError as exc:
        raise UsageError(str(exc)) from None
    resolved = cfgmod.describe(experiment, raw.get("model", "name", "noon"))
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    sweep_csv, bias_csv = out / "sweep.csv", out / "bias.csv"
    if args.dry_run:
        _write_manifest(args, out / "manifest.json", [], resolved)
        print(out / "manifest.json")
        return
    result = run_sweep(experiment, threads=args.threads)
    sweep_csv.write_text(result.to_csv())
    bias_csv.write_text(result.bias_csv())
    resolved["threads"] = args.threads
    resolved["n_degenerate"] = result.n_degenerate
    _write_manifest(args, out / "manifest.json", [sweep_csv, bias_csv], resolved)
    print(sweep_csv)
    print(bias_csv)
    if result.degenerate_fraction > 0.5:
        raise NumericalFailure(
            f"{result.n_degenerate} of {result.estimates.size} posteriors degenerate"
        )


def cmd_pgh(args):
    phi = 1.0 if args.phi is None else args.phi
    if args.shots == 0:
        rows = [(0, None, 1)]
        print("no information: zero shots", file=sys.stderr)
    else:
        checkpoints = args.checkpoints or [args.shots]
        if max(checkpoints) > args.shots or min(checkpoints) < 1:
            raise UsageError("checkpoints must lie in 1..shots")
        grid = ParameterGrid(0.0, 2 * math.pi, args.grid_points)
        curve = pgh_holevo_curve(phi, checkpoints, args.repetitions, grid, args.seed, args.threads)
        rows = [(m, v, 0) for m, v in curve]
    _emit(args, "pgh", ("M", "holevo_variance", "no_information"), rows)


# parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--model", default=None, help="noon | noon2 | feedback | table:<path>")
    common.add_argument("--phi", type=float, default=None)
    common.add_argument("--vis", type=float, default=None)
    common.add_argument("--grid-points", type=int, default=None)
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    common.add_argument("--out", default=None, help="output directory (default: stdout)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")

    p = argparse.ArgumentParser(prog="postest", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"postest {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("fisher", parents=[common], help="generalized Fisher information")
    s.add_argument("--alpha", type=float, action="append")
    s.add_argument("--index", type=int, default=0)
    s.set_defaults(func=cmd_fisher)

    s = sub.add_parser("bounds", parents=[common], help="CRB and Barankin bounds")
    s.add_argument("--M", type=int, action="append")
    s.add_argument("--beta", type=float, action="append")
    s.add_argument("--sigma", type=float, default=None, help="measured Sigma_beta")
    s.add_argument("--index", type=int, default=0)
    s.set_defaults(func=cmd_bounds)

    for name, func, help_ in (
        ("posterior", cmd_posterior, "posterior weights on the grid"),
        ("estimate", cmd_estimate, "point estimate from a data file"),
    ):
        s = sub.add_parser(name, parents=[common], help=help_)
        s.add_argument("data", help="outcome list or 'outcome,count' CSV")
        s.add_argument("--vis-points", type=int, default=bayes.DEFAULT_VIS_POINTS)
        if name == "estimate":
            s.add_argument("--method", choices=("bayes", "mle"), default="bayes")
        s.set_defaults(func=func)

    s = sub.add_parser("sweep", parents=[common], help="Xi_beta saturation sweep")
    s.add_argument("config")
    s.add_argument("--repetitions", type=int, default=None)
    s.add_argument("--dry-run", action="store_true")
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("pgh", parents=[common], help="PGH Holevo variance versus shots")
    s.add_argument("--shots", type=int, default=200)
    s.add_argument("--repetitions", type=int, default=200)
    s.add_argument("--checkpoints", type=lambda t: [int(x) for x in t.split(",")], default=None)
    s.set_defaults(func=cmd_pgh)
    return p


def _apply_defaults(args):
    if args.command in ("fisher", "bounds", "posterior", "estimate") and args.model is None:
        args.model = "noon"
    if args.command not in ("sweep",):
        if args.grid_points is None:
            args.grid_points = bayes.DEFAULT_PHI_POINTS
        if args.seed is None:
            args.seed = 0
    if args.command == "pgh":
        args.model = "feedback"


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _apply_defaults(args)
    try:
        args.func(args)
    except (NumericalFailure, DegeneratePosteriorError, IncompatibleDataError,
            ZeroInformationError) as exc:
        print(f"postest {args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (UsageError, DomainError, cfgmod.ConfigError) as exc:
        print(f"postest {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return 0


if __name__ == "__main__":
    sys.exit(main())
