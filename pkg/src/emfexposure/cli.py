"""Command-line front end.  Every subcommand writes one CSV.

    emfexposure mean --model ppp --observer passive --sweep user_density_ratio --grid 1,10,100
    emfexposure cdf --observer active --points 20 --mc-trials 2000
    emfexposure percentile --q 0.95
    emfexposure coverage --model mcp2 --mc-trials 10000
    emfexposure simulate --mc-trials 1000 --out trials.csv
    emfexposure sweep --sweep eta --grid 0.2,0.4,0.6 --outputs mean,p95,coverage

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import logging
import math
import sys
from dataclasses import dataclass, fields

import numpy as np

from . import __version__
from . import monte_carlo as mc
from .core_types import (
    CDF_QUAD,
    ConfigError,
    NetworkParams,
    ObserverKind,
    UserModel,
    load_config,
    parse_config_text,
    validate,
    with_density_ratio,
)
from .coverage import CoverageQuery, coverage_probability
from .ei_distribution import ei_cdf, ei_quantile
from .exposure_moments import mean_ei
from .gil_pelaez import BracketError, CfHandle, cdf, find_bracket, quantile
from .quadrature import QuadratureError

log = logging.getLogger("emfexposure")

EXIT_CONFIG = 2
EXIT_NUMERIC = 3
SWEEPABLE = ("user_density_ratio", "eta", "gamma_db")
OUTPUTS = ("mean", "cdf", "p95", "coverage", "percent_ul_u")
DEFAULT_GRIDS = {
    "user_density_ratio": [1.0, 10.0, 1e2, 1e3, 1e4, 1e5],
    "eta": [0.2, 0.4, 0.6, 0.8, 1.0],
    "gamma_db": [-10.0, 0.0, 10.0, 20.0, 30.0],
}
NA = "NA"


@dataclass(frozen=True)
class SweepSpec:
    """One swept parameter over a strictly monotone grid."""

    name: str | None
    grid: tuple
    outputs: tuple = ("mean",)
    mc_trials: int = 0

    def __post_init__(self):
        problems = []
        if self.name is not None and self.name not in SWEEPABLE:
            problems.append(("sweep", f"must be one of {', '.join(SWEEPABLE)}"))
        if not self.grid:
            problems.append(("grid", "must be nonempty"))
        g = np.asarray(self.grid, dtype=float)
        if g.size > 1 and not (np.all(np.diff(g) > 0) or np.all(np.diff(g) < 0)):
            problems.append(("grid", "must be strictly monotone"))
        bad = [o for o in self.outputs if o not in OUTPUTS]
        if bad:
            problems.append(("outputs", f"unknown {bad}; choose from {', '.join(OUTPUTS)}"))
        if self.mc_trials < 0:
            problems.append(("mc_trials", "must be nonnegative"))
        if problems:
            raise ConfigError(problems)

    def points(self, params: NetworkParams, model: UserModel):
        """(value, params) for every grid point."""
        for v in self.grid:
            yield v, apply_sweep(params, model, self.name, v)


def apply_sweep(params, model, name, value):
    if name is None:
        return params
    if name == "user_density_ratio":
        return with_density_ratio(params, model, value)
    if name == "eta":
        return params.replace(eta=float(value))
    return params.replace(gamma=10.0 ** (float(value) / 10.0))


def point_seed(master_seed, index):
    """Seed for grid point ``index``; adding points leaves earlier rows alone."""
    return int(np.random.SeedSequence(master_seed, spawn_key=(index,)).generate_state(1)[0])


def _fmt(x):
    if x is None:
        return NA
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    return NA if math.isnan(x) else repr(x)


class CsvOut:
    """CSV writer with the self-describing header comment."""

    def __init__(self, fh, params, model, observer, extra=""):
        self.fh = fh
        resolved = " ".join(f"{f.name}={getattr(params, f.name)!r}" for f in fields(params))
        fh.write(f"# emfexposure {__version__} model={model.value} observer={observer.value} {resolved}{extra}\n")
        self.writer = csv.writer(fh, lineterminator="\r\n")

    def row(self, values):
        self.writer.writerow([_fmt(v) for v in values])


# --- retries ------------------------------------------------------------------------


def _retrying(fn, quad):
    """Call fn(quad); on QuadratureError retry once with a looser budget."""
    try:
        return fn(quad)
    except QuadratureError as exc:
        log.warning("retrying after: %s", exc)
        wide = dataclasses.replace(quad, truncation_t_max=quad.truncation_t_max * 100,
                                   max_subdivisions=quad.max_subdivisions * 4)
        return fn(wide)


# --- commands -------------------------------------------------------------------------


def cmd_mean(args, params, model, observer, spec, out):
    cols = [spec.name or "point", "ei_bs", "ei_ul_u", "ei_ul_tr", "ei_total", "percent_ul_u"]
    if spec.mc_trials > 0:
        cols += [f"mc_{c}{s}" for c in mc.COMPONENTS for s in ("", "_ci")]
    out.row(cols)
    for i, (v, p) in enumerate(spec.points(params, model)):
        p = validate(p, model)
        rep = mean_ei(p, model, observer, args.intra)
        row = [v if spec.name else i, rep.ei_bs, rep.ei_ul_u, rep.ei_ul_tr, rep.total, rep.percent_ul_u]
        if spec.mc_trials > 0:
            res = mc.run(p, model, observer, spec.mc_trials, point_seed(args.seed, i))
            m = res.means
            for c in mc.COMPONENTS:
                row += [getattr(m, "total" if c == "ei_total" else c), m.ci[c]]
        out.row(row)


def _w_grid(args, mean):
    if args.w:
        return np.array([float(x) for x in args.w.split(",")])
    return mean * np.geomspace(1e-2, 10.0, args.points)


def cmd_cdf(args, params, model, observer, spec, out, quad):
    p = validate(params, model)
    w = _w_grid(args, mean_ei(p, model, observer, args.intra).total)
    F = _retrying(lambda q: ei_cdf(w, p, model, observer, intra=args.intra, quad=q), quad)
    cols = ["w", "cdf"]
    emp = None
    if spec.mc_trials > 0:
        cols += ["mc_cdf", "mc_cdf_ci"]
        res = mc.run(p, model, observer, spec.mc_trials, point_seed(args.seed, 0), sampling="thinned")
        emp = res.distributions["ei_total"]
    out.row(cols)
    for k, wk in enumerate(w):
        row = [wk, F[k]]
        if emp is not None:
            row += [emp.cdf(wk), emp.cdf_ci(wk)]
        out.row(row)


def _analytic_quantile(p, model, observer, q, intra, quad):
    try:
        return _retrying(lambda qq: ei_quantile(q, p, model, observer, intra=intra, quad=qq), quad)
    except (BracketError, QuadratureError) as exc:
        log.warning("quantile row marked NA: %s", exc)
        return None


def self_test_median():
    """Median of Uniform(0, 2) from its characteristic function."""

    def phi(t):
        t = np.asarray(t, dtype=float)
        with np.errstate(invalid="ignore", divide="ignore"):
            v = (np.exp(2j * t) - 1) / (2j * t)
        return np.where(t == 0, 1.0, v)

    cf = CfHandle(phi, mean=1.0)

    def F(x):
        return cdf(cf, x)

    return quantile(F, 0.5, find_bracket(F, 0.5, 0.3), rel_width=1e-6)


def cmd_percentile(args, params, model, observer, spec, out, quad):
    if not 0 < args.q < 1:
        raise ConfigError([("q", "must lie in (0, 1)")])
    if args.self_test:
        out.row(["distribution", "q", "quantile", "expected"])
        out.row(["uniform(0,2)", 0.5, self_test_median(), 1.0])
        return
    cols = [spec.name or "point", "q", "quantile"]
    if spec.mc_trials > 0:
        cols += ["mc_quantile", "mc_quantile_ci"]
    out.row(cols)
    for i, (v, p) in enumerate(spec.points(params, model)):
        p = validate(p, model)
        row = [v if spec.name else i, args.q, _analytic_quantile(p, model, observer, args.q, args.intra, quad)]
        if spec.mc_trials > 0:
            emp = mc.run(p, model, observer, spec.mc_trials, point_seed(args.seed, i),
                         sampling="thinned").distributions["ei_total"]
            row += [emp.quantile(args.q), emp.quantile_ci(args.q)]
        out.row(row)


def _coverage(p, model, gamma):
    try:
        return coverage_probability(CoverageQuery(gamma, model, p))
    except (QuadratureError, FloatingPointError) as exc:
        log.warning("coverage row marked NA: %s", exc)
        return None


def cmd_coverage(args, params, model, observer, spec, out):
    p0 = validate(params, model)
    etas = np.array([float(x) for x in args.etas.split(",")])
    vals = [_coverage(p0.replace(eta=e), model, p0.gamma) for e in etas]
    est = None
    if spec.mc_trials > 0:
        est = mc.coverage_mc(p0, model, etas, spec.mc_trials, point_seed(args.seed, 0), gamma=p0.gamma)
    known = [(c, k) for k, c in enumerate(vals) if c is not None]
    best = max(known)[1] if known else None
    cols = ["eta", "coverage"] + (["mc_coverage", "mc_coverage_ci"] if est is not None else []) + ["argmax"]
    out.row(cols)
    for k, e in enumerate(etas):
        row = [e, vals[k]]
        if est is not None:
            row += [est.coverage[k], est.ci[k]]
        out.row(row + [int(k == best)])


def cmd_simulate(args, params, model, observer, spec, out):
    trials = spec.mc_trials or 1000
    p = validate(params, model)
    res = mc.run(p, model, observer, trials, args.seed, sampling="thinned",
                 sinr=observer is ObserverKind.ACTIVE)
    out.row(["trial", "observer", *mc.COMPONENTS, "sinr_db"])
    for i in range(trials):
        s = "" if res.sinr is None else 10 * math.log10(res.sinr[i])
        out.row([i, observer.value, *res.faded[i], s])


def cmd_sweep(args, params, model, observer, spec, out, quad):
    cols = [spec.name or "point"]
    for o in spec.outputs:
        cols += {"mean": ["ei_total"], "cdf": [], "p95": ["p95"], "coverage": ["coverage"],
                 "percent_ul_u": ["percent_ul_u"]}[o]
    if "cdf" in spec.outputs:
        cols += ["cdf_at_mean"]
    mc_on = spec.mc_trials > 0
    if mc_on:
        cols += ["mc_ei_total", "mc_ei_total_ci"]
    out.row(cols)
    for i, (v, p) in enumerate(spec.points(params, model)):
        p = validate(p, model)
        rep = mean_ei(p, model, observer, args.intra)
        row = [v if spec.name else i]
        for o in spec.outputs:
            if o == "mean":
                row.append(rep.total)
            elif o == "p95":
                row.append(_analytic_quantile(p, model, observer, 0.95, args.intra, quad))
            elif o == "coverage":
                row.append(_coverage(p, model, p.gamma))
            elif o == "percent_ul_u":
                row.append(rep.percent_ul_u)
        if "cdf" in spec.outputs:
            row.append(_retrying(lambda q: ei_cdf(rep.total, p, model, observer, intra=args.intra, quad=q), quad))
        if mc_on:
            m = mc.run(p, model, observer, spec.mc_trials, point_seed(args.seed, i)).means
            row += [m.total, m.ci["ei_total"]]
        out.row(row)


# --- argument handling --------------------------------------------------------------


def build_parser():
    ap = argparse.ArgumentParser(prog="emfexposure", description="EMF exposure index and uplink coverage.")
    ap.add_argument("--version", action="version", version=f"emfexposure {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value [unit] parameter file")
    common.add_argument("--param", action="append", default=[], metavar="KEY=VALUE",
                        help="override one parameter (repeatable, same syntax as the config file)")
    common.add_argument("--model", default="ppp", choices=[m.value for m in UserModel])
    common.add_argument("--observer", default="passive", choices=[o.value for o in ObserverKind])
    common.add_argument("--intra", default="palm", choices=["palm", "literal"],
                        help="count of other active members in an active user's cluster")
    common.add_argument("--mc-trials", type=int, default=0)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", help="output CSV (default stdout)")
    common.add_argument("--quad-rel-tol", type=float, default=None,
                        help="tolerance of CDF inversions (an absolute error on probabilities)")
    common.add_argument("--sweep", choices=SWEEPABLE, default=None)
    common.add_argument("--grid", help="comma-separated sweep values")
    common.add_argument("-v", "--verbose", action="store_true")

    sub.add_parser("mean", parents=[common], help="mean EI and its components")
    p = sub.add_parser("cdf", parents=[common], help="CDF of EI")
    p.add_argument("--w", help="comma-separated thresholds in W/kg")
    p.add_argument("--points", type=int, default=20, help="size of the default geometric w-grid")
    p = sub.add_parser("percentile", parents=[common], help="quantile of EI")
    p.add_argument("--q", type=float, default=0.95)
    p.add_argument("--self-test", action="store_true", help="invert a synthetic CF with known median")
    p = sub.add_parser("coverage", parents=[common], help="uplink coverage over eta")
    p.add_argument("--etas", default="0.2,0.4,0.6,0.8,1.0")
    sub.add_parser("simulate", parents=[common], help="per-trial Monte Carlo dump")
    p = sub.add_parser("sweep", parents=[common], help="several outputs over one swept parameter")
    p.add_argument("--outputs", default="mean", help=f"comma-separated subset of {','.join(OUTPUTS)}")
    return ap


def resolve_params(args, model):
    text = "\n".join(s.replace("=", " = ", 1) for s in args.param)
    base = load_config(args.config, model) if args.config else NetworkParams()
    return validate(parse_config_text(text, base), model)


def resolve_spec(args):
    name = args.sweep
    if args.grid:
        if name is None:
            raise ConfigError([("grid", "--grid needs --sweep")])
        try:
            grid = tuple(float(x) for x in args.grid.split(","))
        except ValueError:
            raise ConfigError([("grid", f"not a list of numbers: {args.grid!r}")]) from None
    elif name is not None:
        grid = tuple(DEFAULT_GRIDS[name])
    else:
        grid = (0.0,)
    outputs = tuple(o.strip() for o in getattr(args, "outputs", "mean").split(","))
    return SweepSpec(name, grid, outputs, args.mc_trials)


def run_command(args) -> str:
    model = UserModel.parse(args.model)
    observer = ObserverKind.parse(args.observer)
    params = resolve_params(args, model)
    spec = resolve_spec(args)
    quad = CDF_QUAD if args.quad_rel_tol is None else dataclasses.replace(CDF_QUAD, abs_tol=args.quad_rel_tol)
    extra = f" sweep={spec.name} mc_trials={spec.mc_trials} seed={args.seed}"
    buf = io.StringIO()
    out = CsvOut(buf, params, model, observer, extra)
    cmd = args.command
    if cmd == "mean":
        cmd_mean(args, params, model, observer, spec, out)
    elif cmd == "cdf":
        cmd_cdf(args, params, model, observer, spec, out, quad)
    elif cmd == "percentile":
        cmd_percentile(args, params, model, observer, spec, out, quad)
    elif cmd == "coverage":
        cmd_coverage(args, params, model, observer, spec, out)
    elif cmd == "simulate":
        cmd_simulate(args, params, model, observer, spec, out)
    else:
        cmd_sweep(args, params, model, observer, spec, out, quad)
    return buf.getvalue()


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        text = run_command(args)
    except ConfigError as exc:
        for name, msg in exc.problems:
            print(f"config error: {name}: {msg}", file=sys.stderr)
        return EXIT_CONFIG
    except (QuadratureError, BracketError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
