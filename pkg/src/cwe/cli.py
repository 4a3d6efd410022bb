"""Command-line entry point.

Exit codes: 0 success, 2 bad arguments, 3 data parse failure, 4 numerical
failure.  Every report embeds its effective configuration, and identical
arguments produce byte-identical output.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .baselines import bayes_flat_expect, delta_method_sigma_v, lsq_fit, vase_demo
from .binomial import DEFAULT_P_GRID, binomial_predictive
from .errors import DataParseError, DomainError, NumericalError
from .io import csv_text, parse_dataset, write_atomic
from .models import (
    BinomialSpec,
    Dataset,
    GaussianSpec,
    LinearGaussianSpec,
    McConfig,
    alpha_closed,
    alpha_mc,
)
from .multivariate import (
    DEFAULT_LEVELS as CONTOUR_LEVELS,
    DEFAULT_RESOLUTION,
    alpha_grid_linfit,
    cwe_contour_expect,
    marching_squares,
    v_quantity,
)
from .report import EstimateReport, dumps
from .univariate import (
    DEFAULT_EPS,
    DEFAULT_GRID_SIZE,
    DEFAULT_LEVELS,
    auto_grid,
    build_alpha_curve,
    confidence_interval_table,
    cwe_expect_alpha_space,
    predictive_density,
    weight_normal_mu,
    weight_normal_sigma,
)

EXIT_ARGS, EXIT_PARSE, EXIT_NUMERIC = 2, 3, 4
DEFAULT_SEED = 42
DEFAULT_CI_LEVELS = "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.exit(EXIT_ARGS, f"{self.prog}: error: {message}\n")


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _ints(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _bounds(text: str) -> tuple[float, float]:
    vals = _floats(text)
    if len(vals) != 2 or not vals[0] < vals[1]:
        raise argparse.ArgumentTypeError("bounds must be LO,HI with LO < HI")
    return vals[0], vals[1]


def _univariate_data(args) -> Dataset:
    if args.input:
        return parse_dataset(args.input, "values")
    if args.values:
        return Dataset.of(args.values)
    raise DomainError("provide --input or --values")


def _pair_data(args) -> Dataset:
    return parse_dataset(args.input, "pairs")


# ---------------------------------------------------------------- subcommands


def cmd_ci_table(args):
    levels = [v / 100.0 if v >= 1 else v for v in args.levels]
    rows = confidence_interval_table(args.sigma, args.x, levels)
    if args.format == "csv":
        return csv_text(["level", "lo", "hi"], rows)
    return dumps({"sigma": args.sigma, "x": args.x,
                  "rows": [{"level": l, "lo": lo, "hi": hi} for l, lo, hi in rows]})


_OBSERVABLES = {
    "param": lambda t: t,
    "param-squared": lambda t: t * t,
    "log-param": np.log,
}


def _univariate(args, model: GaussianSpec, data: Dataset, weight):
    grid = auto_grid(model, data, args.eps, args.grid_size)
    curve = build_alpha_curve(model, data, grid)
    obs = _OBSERVABLES[args.observable]
    if args.observable == "log-param" and model.free == "mu":
        raise DomainError("log-param is only defined for sigma")
    if args.method == "alpha-space":
        report = cwe_expect_alpha_space(curve, obs, args.levels)
    else:
        report = _closed_weight_report(curve, obs, weight)
    config = dict(report.config, model=model.free, eps=args.eps, grid=grid.as_dict(),
                  observable=args.observable, method=args.method,
                  sigma=model.sigma, mu=model.mu, levels=args.levels)
    diagnostics = dict(report.diagnostics, n=len(data))
    if args.x2:
        method = "alpha_space" if args.method == "alpha-space" else "closed_weight"
        dens = predictive_density(model, data, np.array(args.x2), method, args.levels, curve)
        diagnostics["predictive_density"] = [{"x2": x, "density": d}
                                             for x, d in zip(args.x2, dens)]
    report = EstimateReport(report.method, report.estimate, report.spread, report.K,
                            config, diagnostics)
    return _emit_report(args, [report])


def _closed_weight_report(curve, obs, weight) -> EstimateReport:
    # trapezium over the curve's grid with the closed-form weight
    tau = curve.grid
    w = weight(tau)
    f = obs(tau)
    dt = np.diff(tau)
    norm = np.sum(0.5 * dt * (w[1:] + w[:-1]))
    m1 = np.sum(0.5 * dt * (w[1:] * f[1:] + w[:-1] * f[:-1])) / norm
    m2 = np.sum(0.5 * dt * (w[1:] * f[1:] ** 2 + w[:-1] * f[:-1] ** 2)) / norm
    if not (np.isfinite(m1) and np.isfinite(m2)):
        raise NumericalError("closed-weight quadrature failed")
    return EstimateReport("cwe-closed-weight", float(m1), math.sqrt(max(m2 - m1 * m1, 0.0)),
                          1.0, {}, {"weight_mass_on_grid": float(norm)})


def cmd_normal_mu(args):
    model = GaussianSpec(mu=None, sigma=args.sigma)
    data = _univariate_data(args)
    return _univariate(args, model, data, lambda m: weight_normal_mu(data, m, args.sigma))


def cmd_normal_sigma(args):
    model = GaussianSpec(mu=args.mu, sigma=None)
    data = _univariate_data(args)
    return _univariate(args, model, data, lambda s: weight_normal_sigma(data, s, args.mu))


def cmd_binomial(args):
    preds = [binomial_predictive(k, args.n, args.p_grid, args.strict_alpha_space)
             for k in args.k]
    if args.format == "csv":
        std = (lambda p: p.std_param) if args.std == "param" else (lambda p: p.std_predictive)
        return csv_text(["k", "most_likely", "std_ml", "expected", "std_expected"],
                        [[p.k_observed, p.most_likely_count, p.fisher_std,
                          p.expected_count, std(p)] for p in preds])
    reports = [EstimateReport(
        method="cwe-binomial",
        estimate=p.expected_count,
        spread=p.std_param if args.std == "param" else p.std_predictive,
        K=p.K,
        config={"n": args.n, "k": p.k_observed, "p_grid_size": args.p_grid,
                "strict_alpha_space": args.strict_alpha_space, "std": args.std},
        diagnostics=dict(p.diagnostics, most_likely_count=p.most_likely_count,
                         fisher_std=p.fisher_std, std_param=p.std_param,
                         std_predictive=p.std_predictive,
                         predictive_pmf=p.predictive_pmf),
    ) for p in preds]
    return _emit_report(args, reports)


def cmd_linfit(args):
    data = _pair_data(args)
    methods = ["lsq", "bayes", "cwe"] if args.method == "all" else [args.method]
    v = lambda a, b: v_quantity(b)
    reports = []
    grid = None
    for method in methods:
        if method == "lsq":
            fit = lsq_fit(data, args.sigma)
            diag = {"a": fit.a, "b": fit.b, "sigma_b": fit.sigma_b, "rss": fit.rss,
                    "cov_ab": fit.cov_ab}
            try:
                spread = delta_method_sigma_v(fit)
            except DomainError:
                spread, diag["delta_method"] = 0.0, "undefined at b = 0"
            reports.append(EstimateReport("least-squares", v_quantity(fit.b), spread, 1.0,
                                          {"sigma": args.sigma}, diag))
        elif method == "bayes":
            value, spread = bayes_flat_expect(data, args.sigma, args.bounds, v, args.bayes_grid)
            reports.append(EstimateReport("bayes-flat", value, spread, 1.0,
                                          {"sigma": args.sigma, "bounds": args.bounds,
                                           "resolution": args.bayes_grid}, {}))
        else:
            grid = alpha_grid_linfit(data, args.sigma, args.bounds, args.bounds, args.grid)
            est = cwe_contour_expect(grid, v, args.levels)
            reports.append(EstimateReport(
                "cwe-contour", est.value, est.spread, est.K,
                {"sigma": args.sigma, "bounds": args.bounds, "resolution": args.grid,
                 "levels": args.levels},
                {"levels_used": est.levels_used,
                 "boundary_clipped_fraction": est.boundary_clipped_fraction}))
    if args.export_grid or args.export_contours:
        grid = grid or alpha_grid_linfit(data, args.sigma, args.bounds, args.bounds, args.grid)
        if args.export_grid:
            A, B = np.meshgrid(grid.a, grid.b, indexing="ij")
            write_atomic(args.export_grid, csv_text(
                ["a", "b", "alpha"], zip(A.ravel(), B.ravel(), grid.values.ravel())))
        if args.export_contours:
            rows = []
            for level in (np.arange(args.levels) + 0.5) / args.levels:
                for pid, poly in enumerate(marching_squares(grid, level)):
                    rows.extend((float(level), pid, i, float(a), float(b))
                                for i, (a, b) in enumerate(poly.vertices))
            write_atomic(args.export_contours, csv_text(
                ["level", "polyline_id", "vertex_index", "a", "b"], rows))
    if args.format == "csv":
        return csv_text(["method", "estimate", "spread"],
                        [[r.method, r.estimate, r.spread] for r in reports])
    return _emit_report(args, reports)


def cmd_vase(args):
    res = vase_demo()
    frac = lambda f: {"exact": f"{f.numerator}/{f.denominator}", "value": float(f)}
    return dumps({
        "most_likely_p_blue": frac(res.most_likely_p_blue),
        "expected_p_blue": frac(res.expected_p_blue),
        "per_vase_posterior": [frac(p) for p in res.per_vase_posterior],
        "red_counts": list(range(91, 101)),
    })


def cmd_validate_alpha(args):
    mc = McConfig(samples=args.samples, seed=args.seed, shards=args.shards)
    if args.model == "gaussian":
        model = GaussianSpec(mu=None, sigma=args.sigma)
        data = _univariate_data(args)
        params = {"mu": args.mu}
    elif args.model == "binomial":
        model = BinomialSpec(args.n, args.k)
        data, params = None, {"p": args.p}
    else:
        model = LinearGaussianSpec(args.sigma)
        data = _pair_data(args)
        params = {"a": args.a, "b": args.b}
    closed = alpha_closed(model, data, params)
    alpha_hat, stderr = alpha_mc(model, data, params, mc)
    tol = 3.0 * max(stderr, math.sqrt(closed * (1 - closed) / mc.samples))
    return dumps({
        "model": args.model,
        "params": params,
        "alpha_closed": closed,
        "alpha_mc": alpha_hat,
        "stderr": stderr,
        "tolerance": tol,
        "pass": abs(alpha_hat - closed) <= tol,
        "config": {"samples": mc.samples, "seed": mc.seed, "shards": mc.shards,
                   "generator": "PCG64"},
    })


def _emit_report(args, reports):
    if len(reports) == 1:
        return reports[0].to_json()
    return dumps({"reports": [r.to_dict() for r in reports]})


# -------------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-o", "--output", help="write the report here instead of stdout")
    common.add_argument("--seed", type=int, default=DEFAULT_SEED,
                        help="seed for every random stream (default %(default)s)")

    parser = _Parser(prog="cwe", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("ci-table", parents=[common],
                       help="central confidence intervals for a normal mean")
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--x", type=float, default=0.0)
    p.add_argument("--levels", type=_floats, default=_floats(DEFAULT_CI_LEVELS),
                   help="fractions, or percentages when >= 1")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.set_defaults(func=cmd_ci_table)

    for name, func, fixed, default_obs in (
        ("normal-mu", cmd_normal_mu, "--sigma", "param"),
        ("normal-sigma", cmd_normal_sigma, "--mu", "log-param"),
    ):
        p = sub.add_parser(name, parents=[common],
                           help=f"confidence-weighted estimate with {name.split('-')[1]} free")
        src = p.add_mutually_exclusive_group()
        src.add_argument("--input", help="CSV or JSON file of observations")
        src.add_argument("--values", type=_floats, help="comma-separated observations")
        p.add_argument(fixed, type=float, default=1.0 if fixed == "--sigma" else 0.0)
        p.add_argument("--method", choices=["alpha-space", "closed-weight"],
                       default="alpha-space")
        p.add_argument("--observable", choices=sorted(_OBSERVABLES), default=default_obs)
        p.add_argument("--levels", type=int, default=DEFAULT_LEVELS)
        p.add_argument("--grid-size", type=int, default=DEFAULT_GRID_SIZE)
        p.add_argument("--eps", type=float, default=DEFAULT_EPS)
        p.add_argument("--x2", type=_floats, help="points at which to report the predictive density")
        p.add_argument("--format", choices=["json"], default="json")
        p.set_defaults(func=func)

    p = sub.add_parser("binomial", parents=[common], help="predictive counts for a binomial bin")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=_ints, required=True, help="observed count(s), comma-separated")
    p.add_argument("--p-grid", type=int, default=DEFAULT_P_GRID)
    p.add_argument("--strict-alpha-space", action="store_true",
                   help="include the 1/N factor (level-solution average)")
    p.add_argument("--std", choices=["param", "predictive"], default="param",
                   help="which spread fills the std_expected column")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.set_defaults(func=cmd_binomial)

    p = sub.add_parser("linfit", parents=[common], help="estimates of V=(1+|b|)^2 for y=ax+b")
    p.add_argument("--input", required=True, help="CSV (x,y) or JSON [[x, y], ...]")
    p.add_argument("--method", choices=["cwe", "bayes", "lsq", "all"], default="cwe")
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--bounds", type=_bounds, default=(-10.0, 10.0))
    p.add_argument("--grid", type=int, default=DEFAULT_RESOLUTION)
    p.add_argument("--levels", type=int, default=CONTOUR_LEVELS)
    p.add_argument("--bayes-grid", type=int, default=2001)
    p.add_argument("--export-grid", help="write (a, b, alpha) CSV")
    p.add_argument("--export-contours", help="write (level, polyline_id, vertex_index, a, b) CSV")
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.set_defaults(func=cmd_linfit)

    p = sub.add_parser("vase", parents=[common], help="the ten-vase most-likely example")
    p.add_argument("--format", choices=["json"], default="json")
    p.set_defaults(func=cmd_vase)

    p = sub.add_parser("validate-alpha", parents=[common],
                       help="closed-form alpha against Monte Carlo")
    p.add_argument("--model", choices=["gaussian", "binomial", "linear"], required=True)
    src = p.add_mutually_exclusive_group()
    src.add_argument("--input")
    src.add_argument("--values", type=_floats)
    p.add_argument("--mu", type=float, default=0.0)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--k", type=int, default=0)
    p.add_argument("--p", type=float, default=0.5)
    p.add_argument("--a", type=float, default=0.0)
    p.add_argument("--b", type=float, default=0.0)
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--shards", type=int, default=1)
    p.add_argument("--format", choices=["json"], default="json")
    p.set_defaults(func=cmd_validate_alpha)
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        text = args.func(args)
    except DataParseError as exc:
        print(f"cwe: data error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except DomainError as exc:
        print(f"cwe: invalid argument: {exc}", file=sys.stderr)
        return EXIT_ARGS
    except NumericalError as exc:
        print(f"cwe: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    if args.output:
        write_atomic(Path(args.output), text)
    else:
        sys.stdout.write(text)
    return 0


def main() -> None:
    sys.exit(run())
