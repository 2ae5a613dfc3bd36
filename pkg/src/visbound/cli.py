"""Command-line front end.

Exit codes: 0 success, 1 invalid input, 2 solver failure, 3 verification
failure, 4 I/O error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .billiard import estimate_both
from .bounds import (LITERATURE_M, combined_bound, lambda_sweep, legendre_transform,
                     minimal_resistance_lp, theorem_bounds, tt2_asymptotic_coefficient,
                     tt2_constant)
from .constants import lambda_to_Lambda, make_dimension_context
from .discretize import cell_midpoints, cost_matrix, marginal_weights
from .errors import (InfeasibleError, SingularHitError, SolverError, TrappedRayError,
                     VisboundError)
from .kernel import eta_array, kappa_array, kappa_slope
from .scene import SceneError, corpus_names, corpus_scene, load_scene
from .svg import render
from .transport import TransportInstance, certificate_violation, solve_transport
from .verify import run_suite

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_SOLVER = 2
EXIT_VERIFY = 3
EXIT_IO = 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _nonneg_int(text):
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected a nonnegative integer, got {text}")
    return value


def _dim(text):
    value = int(text)
    if value < 2:
        raise argparse.ArgumentTypeError(f"dimension must be >= 2, got {text}")
    return value


def _finite(text):
    value = float(text)
    if not math.isfinite(value):
        raise argparse.ArgumentTypeError(f"expected a finite number, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="visbound", description="Lower bounds for the visibility index.")
    p.add_argument("--version", action="version", version=f"visbound {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    k = sub.add_parser("kappa", help="tabulate eta, kappa and its slope over theta")
    k.add_argument("--dim", type=_dim, default=2)
    k.add_argument("--Lambda", type=_finite, required=True)
    k.add_argument("--theta-grid", type=_positive_int, default=181)
    k.add_argument("--out")

    o = sub.add_parser("ot-solve", help="solve one discretised transport problem")
    o.add_argument("--dim", type=_dim, default=2)
    o.add_argument("--lambda", dest="lam", type=_finite, required=True)
    o.add_argument("--n", type=_positive_int, default=200)
    o.add_argument("--emit-plan")

    b = sub.add_parser("bound-curve", help="Legendre-transform bound curve")
    b.add_argument("--dim", type=_dim, default=2)
    b.add_argument("--n", type=_positive_int, default=200)
    b.add_argument("--lambda-samples", type=_positive_int, default=200)
    b.add_argument("--x-samples", type=_positive_int, default=101)
    b.add_argument("--m-source", choices=("lp", "literature"), default="lp")
    b.add_argument("--workers", type=_positive_int)
    b.add_argument("--out", required=True)
    b.add_argument("--svg")

    t = sub.add_parser("theorem-bounds", help="closed-form comparison curves")
    t.add_argument("--dim", type=_dim, default=2)
    t.add_argument("--x-samples", type=_positive_int, default=101)
    t.add_argument("--m-source", choices=("lp", "literature"), default="lp")
    t.add_argument("--n", type=_positive_int, default=200, help="grid for the LP value of m_d")
    t.add_argument("--out", required=True)

    s = sub.add_parser("simulate", help="Monte-Carlo visibility of a planar scene")
    s.add_argument("--scene", required=True, help=f"JSON file or bundled name ({', '.join(corpus_names())})")
    s.add_argument("--samples", type=_positive_int, default=100_000)
    s.add_argument("--seed", type=_nonneg_int, default=0)
    s.add_argument("--m-source", choices=("lp", "literature"), default="lp")
    s.add_argument("--n", type=_positive_int, default=200, help="grid for the LP value of m_d")
    s.add_argument("--workers", type=_positive_int)
    s.add_argument("--out", help="write the report as JSON")

    v = sub.add_parser("verify", help="run the property suite")
    v.add_argument("--quick", action="store_true")
    return p


def _config_header(args, skip=("out", "svg", "emit_plan", "workers")) -> str:
    cfg = {k: v for k, v in sorted(vars(args).items()) if k not in skip}
    blob = json.dumps(cfg, sort_keys=True)
    digest = hashlib.sha256(blob.encode()).hexdigest()[:16]
    return f"visbound {__version__} config={digest} {blob}"


def _write(path, text: str):
    Path(path).write_text(text)


def _csv(header: str, columns, rows) -> str:
    lines = [f"# {header}", ",".join(columns)]
    for row in rows:
        lines.append(",".join(repr(x) if isinstance(x, float) else str(x) for x in row))
    return "\n".join(lines) + "\n"


def _m_value(ctx, source: str, n: int) -> float:
    if source == "literature":
        if ctx.d not in LITERATURE_M:
            raise UsageError(f"no literature value of m_d for d={ctx.d}")
        return LITERATURE_M[ctx.d]
    return minimal_resistance_lp(ctx, n)


def cmd_kappa(args, out):
    if args.Lambda <= 0:
        raise UsageError("--Lambda must be positive")
    theta = np.linspace(0.0, math.pi, args.theta_grid)
    eta = eta_array(args.Lambda, theta)
    kap = kappa_array(args.Lambda, theta)
    slope = kappa_slope(args.Lambda, theta)
    rows = [(float(a), float(b), float(c), float(d)) for a, b, c, d in zip(theta, eta, kap, slope)]
    text = _csv(_config_header(args), ("theta", "eta", "kappa", "dkappa"), rows)
    if args.out:
        _write(args.out, text)
    else:
        out.write(text)
    return EXIT_OK


def cmd_ot_solve(args, out):
    ctx = make_dimension_context(args.dim)
    if not 0 < args.lam:
        raise UsageError("--lambda must be positive")
    w = marginal_weights(ctx.d, args.n).weights
    inst = TransportInstance(cost_matrix(ctx, args.lam, args.n).entries, w, w)
    plan = solve_transport(inst)
    cert = certificate_violation(inst, plan)
    report = {
        "d": ctx.d, "n": args.n, "lambda": args.lam, "Lambda": lambda_to_Lambda(ctx, args.lam),
        "objective": plan.objective, "I": ctx.prefactor * plan.objective - args.lam,
        "support_size": len(plan.support), "iterations": plan.iterations,
        "min_reduced_cost": cert["min_reduced_cost"], "duality_gap": cert["duality_gap"],
    }
    for key, value in report.items():
        out.write(f"{key}: {value}\n")
    if args.emit_plan:
        mids = cell_midpoints(args.n)
        rows = [(i + 1, j + 1, float(mids[i]), float(mids[j]), m) for i, j, m in plan.support]
        _write(args.emit_plan, _csv(_config_header(args), ("i", "j", "phi_mid", "psi_mid", "mass"), rows))
    return EXIT_OK


def cmd_bound_curve(args, out):
    ctx = make_dimension_context(args.dim)
    xs = np.linspace(0.0, 1.0, args.x_samples)
    sweep = lambda_sweep(ctx, args.n, args.lambda_samples, workers=args.workers)
    lp = legendre_transform(sweep, xs)
    if args.m_source == "lp":
        m_d = float(sweep.I_values[-1]) + float(sweep.lambdas[-1])
    else:
        m_d = _m_value(ctx, "literature", args.n)
    curves = [lp] + theorem_bounds(ctx, xs, m_d, args.m_source)
    rows = [(float(x), float(y), c.source) for c in curves for x, y in zip(c.xs, c.ys)]
    header = _config_header(args) + f" m_d={m_d!r}"
    _write(args.out, _csv(header, ("x", "bound", "source"), rows))
    if args.svg:
        _write(args.svg, render(curves, title=f"lower bounds, d={ctx.d}", header=header))
    out.write(f"I*(1) = {float(lp.ys[-1])!r}\n")
    out.write(f"m_d ({args.m_source}) = {m_d!r}\n")
    return EXIT_OK


def cmd_theorem_bounds(args, out):
    ctx = make_dimension_context(args.dim)
    xs = np.linspace(0.0, 1.0, args.x_samples)
    m_d = _m_value(ctx, args.m_source, args.n)
    curves = theorem_bounds(ctx, xs, m_d, args.m_source)
    c = tt2_constant(ctx)
    header = (_config_header(args) + f" m_d={m_d!r} quadratic_coefficient={1.0 / (2.0 * c)!r}"
              f" asymptotic_coefficient={tt2_asymptotic_coefficient(ctx)!r}")
    rows = [(float(x), float(y), cv.source) for cv in curves for x, y in zip(cv.xs, cv.ys)]
    _write(args.out, _csv(header, ("x", "bound", "source"), rows))
    out.write(f"quadratic coefficient 1/(2c) = {1.0 / (2.0 * c)!r}\n")
    out.write(f"asymptotic coefficient = {tt2_asymptotic_coefficient(ctx)!r}\n")
    out.write(f"m_d ({args.m_source}) = {m_d!r}\n")
    return EXIT_OK


def cmd_simulate(args, out):
    path = Path(args.scene)
    if path.suffix == ".json" or path.exists():
        scene = load_scene(path)
    elif args.scene in corpus_names():
        scene = corpus_scene(args.scene)
    else:
        raise SceneError(f"no scene file or bundled scene named {args.scene!r}")
    vis, f1 = estimate_both(scene, args.samples, args.seed, workers=args.workers)
    ctx = make_dimension_context(2)
    m_d = _m_value(ctx, args.m_source, args.n)
    x = scene.normalized_volume
    bound = combined_bound(ctx, x, m_d)
    report = {
        "scene": scene.name, "samples": vis.samples, "seed": args.seed, "discarded": vis.discarded,
        "mean": vis.mean, "std_error": vis.std_error, "area": scene.area,
        "normalized_volume": x, "F1": f1.mean, "F1_std_error": f1.std_error,
        "lower_bound": bound, "m_d": m_d, "m_source": args.m_source,
        "bound_respected": bool(vis.mean >= bound - 3 * vis.std_error),
        "volume_below_F1": bool(x <= f1.mean + 3 * f1.std_error),
    }
    for key, value in report.items():
        out.write(f"{key}: {value}\n")
    if args.out:
        report["header"] = _config_header(args)
        _write(args.out, json.dumps(report, indent=1, sort_keys=True) + "\n")
    return EXIT_OK


def cmd_verify(args, out):
    results = run_suite(quick=args.quick)
    for r in results:
        out.write(f"{'PASS' if r.passed else 'FAIL'}  {r.name}: {r.detail}\n")
    return EXIT_OK if all(r.passed for r in results) else EXIT_VERIFY


COMMANDS = {
    "kappa": cmd_kappa,
    "ot-solve": cmd_ot_solve,
    "bound-curve": cmd_bound_curve,
    "theorem-bounds": cmd_theorem_bounds,
    "simulate": cmd_simulate,
    "verify": cmd_verify,
}


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args, out)
    except UsageError as exc:
        err.write(f"visbound: error: {exc}\n")
        return EXIT_INPUT
    except (SolverError, TrappedRayError, SingularHitError) as exc:
        err.write(f"visbound: solver failure: {exc}\n")
        return EXIT_SOLVER
    except InfeasibleError as exc:
        err.write(f"visbound: error: {exc}\n")
        return EXIT_INPUT
    except VisboundError as exc:
        err.write(f"visbound: error: {exc}\n")
        return EXIT_INPUT
    except OSError as exc:
        err.write(f"visbound: I/O error: {exc}\n")
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
