"""Command-line interface.

Exit codes: 0 success, 1 property failure, 2 validation error, 3 numerical error.
JSON output uses lexicographic key order; CSV output has a header row and
``\\n`` line endings.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from typing import List, Optional

import numpy as np

from . import generators as G
from .divergence import chi2_lambda_quantum, mixture_divergence, petz_divergence
from .errors import NumericalError, PetzTurError, UnsupportedGenerator, ValidationError
from .ns_bridge import ns_pair
from .quadrature import QuadratureSpec
from .scenarios import ep_setup_from_json, entropy_production, lag_setup_from_json, lag_sweep, random_ep_setup, random_lag_setup
from .states import DensityMatrix, Observable, load_matrix, moment_triple, random_density, random_observable
from .tur import h_lambda, tur_report
from .verify import VerifyConfig, run_battery, summary
from .weights import GRID_POINTS, chebyshev_grid, invert_weight

EXIT_OK, EXIT_PROPERTY, EXIT_VALIDATION, EXIT_NUMERICAL = 0, 1, 2, 3
FLAGS = ("continuous_endpoints",)


def dump_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2)


def _emit_csv(header: List[str], rows, out) -> None:
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])


def _fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return v


def _flags(args) -> dict:
    flags = {name: False for name in FLAGS}
    for name in args.flag or ():
        if name not in flags:
            raise ValidationError(f"unknown flag {name!r}; known: {', '.join(FLAGS)}")
        flags[name] = True
    return flags


def _quad(args) -> QuadratureSpec:
    return QuadratureSpec(rel_tol=args.rel_tol)


def _state(path) -> DensityMatrix:
    return DensityMatrix(load_matrix(path))


def _read_json(path) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from exc
    except OSError as exc:
        raise ValidationError(f"{path}: {exc.strerror}") from exc


def _states_or_random(args, need_obs: bool):
    """States from files when given, otherwise drawn from ``--seed``/``--dim``."""
    if args.rho or args.sigma:
        if not (args.rho and args.sigma):
            raise ValidationError("--rho and --sigma must be given together")
        rho, sigma = _state(args.rho), _state(args.sigma)
        obs = Observable(load_matrix(args.obs)) if need_obs and args.obs else None
        if need_obs and obs is None:
            raise ValidationError("--obs is required with state files")
        return rho, sigma, obs
    if args.dim < 2:
        raise ValidationError("--dim must be >= 2")
    rng = np.random.default_rng(args.seed)
    rho, sigma = random_density(args.dim, rng), random_density(args.dim, rng)
    return rho, sigma, random_observable(args.dim, rng) if need_obs else None


# -- commands ----------------------------------------------------------------


def cmd_divergence(args, out) -> int:
    gen = G.by_name(args.gen)
    rho, sigma = _state(args.rho), _state(args.sigma)
    methods = {"ns": lambda: petz_divergence(gen, rho, sigma)}
    if gen.closed_form is not None:
        methods["closed"] = lambda: G.closed_form_divergence(gen, rho, sigma)
    if rho.is_full_rank() and sigma.is_full_rank():
        methods["mixture"] = lambda: mixture_divergence(gen, rho, sigma, quad=_quad(args))
    if args.via not in methods:
        raise UnsupportedGenerator(f"method {args.via!r} is unavailable for {gen.name} on these states")
    value = methods[args.via]()
    cross = {}
    for name, fn in sorted(methods.items()):
        if name != args.via:
            other = fn()
            cross[name] = None if math.isinf(other) or math.isinf(value) else other - value
    out.write(dump_json({"cross_check": cross, "generator": gen.name, "method": args.via, "value": value}) + "\n")
    return EXIT_OK


def cmd_weights(args, out) -> int:
    gen = G.by_name(args.gen)
    if args.points < 1:
        raise ValidationError("--points must be >= 1")
    w = gen.analytic_weight
    lam = chebyshev_grid(args.points)
    analytic = w.density_at(lam)
    numeric = None
    if not w.atoms:
        numeric = invert_weight(gen, (1.0 - lam) / lam) / lam
    rows = []
    for k, l in enumerate(lam):
        if numeric is None:
            rows.append((float(l), float(analytic[k]), "", ""))
        else:
            rows.append((float(l), float(analytic[k]), float(numeric[k]), float(abs(numeric[k] - analytic[k]))))
    _emit_csv(["lambda", "density_analytic", "density_numeric", "abs_error"], rows, out)
    block = dump_json({"atoms": [{"lambda": l, "mass": m} for l, m in w.atoms], "generator": gen.name})
    if args.atoms_json:
        with open(args.atoms_json, "w") as fh:
            fh.write(block + "\n")
    else:
        sys.stderr.write(block + "\n")
    return EXIT_OK


def cmd_tur(args, out) -> int:
    gen = G.by_name(args.gen)
    rho, sigma, obs = _states_or_random(args, need_obs=True)
    rep = tur_report(gen, rho, sigma, obs, _quad(args), continuous_endpoints=_flags(args)["continuous_endpoints"])
    out.write(dump_json(rep.to_dict()) + "\n")
    return EXIT_OK


def _grid(points: int) -> np.ndarray:
    if points < 1:
        raise ValidationError("--points must be >= 1")
    return chebyshev_grid(points)


def cmd_tur_curve(args, out) -> int:
    gen = G.by_name(args.gen)
    rho, sigma, obs = _states_or_random(args, need_obs=True)
    cont = _flags(args)["continuous_endpoints"]
    m = moment_triple(rho, sigma, obs)
    w = gen.analytic_weight
    rows = []
    if w.density is not None:
        lam = _grid(args.points)
        dens, h = w.density_at(lam), h_lambda(m, lam, cont)
        rows += [(float(l), float(d), float(hv), float(d * hv), False) for l, d, hv in zip(lam, dens, h)]
    for loc, mass in w.atoms:
        hv = h_lambda(m, loc, cont)
        rows.append((float(loc), float(mass), hv, mass * hv, True))
    _emit_csv(["lambda", "w", "h", "w*h", "atom"], rows, out)
    return EXIT_OK


def cmd_sweep(args, out) -> int:
    gen = G.by_name(args.gen)
    lam = _grid(args.points)
    rho, sigma, obs = _states_or_random(args, need_obs=True)
    cont = _flags(args)["continuous_endpoints"]
    m = moment_triple(rho, sigma, obs)
    joint = ns_pair(rho, sigma)
    w = gen.analytic_weight
    rows = []
    if w.density is not None:
        dens = w.density_at(lam)
        h = h_lambda(m, lam, cont)
        for l, d, hv in zip(lam, dens, h):
            rows.append((float(l), float(d), chi2_lambda_quantum(rho, sigma, float(l), joint), float(hv), float(d * hv), False))
    for loc, mass in w.atoms:
        hv = h_lambda(m, loc, cont)
        rows.append((float(loc), float(mass), chi2_lambda_quantum(rho, sigma, loc, joint), hv, mass * hv, True))
    _emit_csv(["lambda", "w_f", "chi2_lambda", "h_lambda", "w*h", "atom"], rows, out)
    return EXIT_OK


def cmd_verify(args, out) -> int:
    cfg = VerifyConfig(trials=args.trials, seed=args.seed, threads=args.threads, broken_weight=args.broken_weight)
    results = run_battery(cfg)
    summ = summary(results, cfg)
    out.write(dump_json(summ) + "\n")
    return EXIT_OK if summ["all_passed"] else EXIT_PROPERTY


def cmd_scenario(args, out) -> int:
    if args.kind == "ep":
        setup = ep_setup_from_json(_read_json(args.setup)) if args.setup else random_ep_setup(args.seed)
        gen = G.by_name(args.gen)
        rep = entropy_production(setup, _quad(args), gen, _flags(args)["continuous_endpoints"])
        out.write(dump_json(rep.to_dict()) + "\n")
        return EXIT_OK
    setup = lag_setup_from_json(_read_json(args.setup)) if args.setup else random_lag_setup(args.seed)
    alphas = [float(a) for a in args.alphas.split(",")] if args.alphas else np.round(np.arange(1, 10) / 10, 1).tolist()
    results = lag_sweep(setup, alphas, _quad(args))
    if args.output == "csv":
        _emit_csv(["alpha", "K_alpha", "bound", "stated_bound"],
                  [(r.alpha, r.K_alpha, r.bound, r.stated_bound) for r in results], out)
    else:
        out.write(dump_json({"sweep": [r.to_dict() for r in results]}) + "\n")
    return EXIT_OK


# -- parser ------------------------------------------------------------------


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--rel-tol", type=float, default=1e-10)
    p.add_argument("--output", choices=("json", "csv"), default="json")
    p.add_argument("--flag", action="append", metavar="NAME", help="enable a feature toggle (continuous_endpoints)")
    return p


def _state_args(p: argparse.ArgumentParser, obs: bool) -> None:
    p.add_argument("--rho", help="matrix JSON file")
    p.add_argument("--sigma", help="matrix JSON file")
    if obs:
        p.add_argument("--obs", help="matrix JSON file")


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="petz-tur", description="Petz f-divergences and the universal TUR.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("divergence", parents=[common], help="evaluate one divergence")
    p.add_argument("--gen", required=True)
    p.add_argument("--rho", required=True)
    p.add_argument("--sigma", required=True)
    p.add_argument("--via", choices=("closed", "ns", "mixture"), default="ns")
    p.set_defaults(func=cmd_divergence)

    p = sub.add_parser("weights", parents=[common], help="tabulate analytic and inverted weights")
    p.add_argument("--gen", required=True)
    p.add_argument("--points", type=int, default=GRID_POINTS)
    p.add_argument("--atoms-json", help="write the atom block here instead of stderr")
    p.set_defaults(func=cmd_weights)

    p = sub.add_parser("tur", parents=[common], help="TUR report for states and an observable")
    p.add_argument("--gen", required=True)
    _state_args(p, obs=True)
    p.set_defaults(func=cmd_tur)

    p = sub.add_parser("tur-curve", parents=[common], help="CSV of the bound integrand")
    p.add_argument("--gen", required=True)
    p.add_argument("--points", type=int, default=GRID_POINTS)
    _state_args(p, obs=True)
    p.set_defaults(func=cmd_tur_curve)

    p = sub.add_parser("verify", parents=[common], help="run the property battery")
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--broken-weight", default=None, help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sweep", parents=[common], help="CSV of weight, kernel and contrast on a lambda grid")
    p.add_argument("--gen", required=True)
    p.add_argument("--points", type=int, default=GRID_POINTS)
    _state_args(p, obs=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("scenario", parents=[common], help="entropy production or lag CGF")
    p.add_argument("kind", choices=("ep", "lag"))
    p.add_argument("--setup", help="setup JSON file (random setup from --seed when omitted)")
    p.add_argument("--gen", default="kl", help="generator for ep")
    p.add_argument("--alphas", help="comma-separated alphas for lag")
    p.set_defaults(func=cmd_scenario)
    return parser


def main(argv: Optional[List[str]] = None, out=None) -> int:
    out = sys.stdout if out is None else out
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "trials", 1) < 1:
        parser.exit(EXIT_VALIDATION, "error: --trials must be >= 1\n")
    if not args.rel_tol > 0:
        parser.exit(EXIT_VALIDATION, "error: --rel-tol must be positive\n")
    buf = io.StringIO()
    try:
        code = args.func(args, buf)
    except ValidationError as exc:
        sys.stderr.write(f"validation error: {type(exc).__name__}: {exc}\n")
        return EXIT_VALIDATION
    except (NumericalError, PetzTurError) as exc:
        sys.stderr.write(f"numerical error: {type(exc).__name__}: {exc}\n")
        return EXIT_NUMERICAL
    out.write(buf.getvalue())
    return code


if __name__ == "__main__":
    sys.exit(main())
