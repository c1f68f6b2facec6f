"""Command-line entry point; every subcommand prints one JSON object to stdout."""
from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from .cech import build_complex, read_complex, write_complex
from .errors import CechLabError
from .experiments import SweepConfig, sweep
from .geometry import GeometryContext
from .homology import betti_numbers
from .morse import enumerate_critical_points, is_covered
from .sampling import RngStream, read_cloud, sample_poisson, write_cloud_csv
from .theta import DEFAULT_EPSILON, count_theta_cycles


def _add_radius(p: argparse.ArgumentParser, required: bool = True) -> None:
    g = p.add_mutually_exclusive_group(required=required)
    g.add_argument("--radius", type=float, help="ball radius r")
    g.add_argument("--lambda", dest="lam", type=float,
                   help="expected points per ball; r = (L / (omega_d N))^(1/d) with N the number of points")


def _resolve(args, cloud) -> tuple[float, float, GeometryContext]:
    """(r, Lambda, ctx) from --radius or --lambda."""
    ctx = GeometryContext(cloud.dim)
    n = len(cloud)
    if args.lam is not None:
        if n == 0:
            raise SystemExit("error: --lambda needs a non-empty point file")
        return ctx.radius_for_lambda(args.lam, n), args.lam, ctx
    lam = ctx.lambda_for_radius(args.radius, n) if n else math.nan
    return args.radius, lam, ctx


def cmd_sample(args) -> dict:
    ctx = GeometryContext(args.dim)
    cloud = sample_poisson(args.intensity, ctx, RngStream(args.seed, 0))
    if args.out:
        write_cloud_csv(cloud, args.out)
    else:
        write_cloud_csv(cloud, sys.stdout)
        return {}
    return {"dim": args.dim, "intensity": args.intensity, "seed": args.seed,
            "n_realized": len(cloud), "out": args.out}


def cmd_complex(args) -> dict:
    cloud = read_cloud(args.inp)
    r, lam, ctx = _resolve(args, cloud)
    cplx = build_complex(cloud, r, args.max_sdim, ctx)
    write_complex(cplx, args.out)
    return {"radius": r, "lambda": lam, "max_sdim": cplx.max_sdim, "simplex_counts": cplx.counts(),
            "out": args.out}


def cmd_betti(args) -> dict:
    if args.radius is None and args.lam is None:
        cplx = read_complex(args.inp)
        r = cplx.radius
    else:
        cloud = read_cloud(args.inp)
        r, _, ctx = _resolve(args, cloud)
        cplx = build_complex(cloud, r, None, ctx)
    bv = betti_numbers(cplx)
    return {"radius": r, "betti": list(bv.betti), "euler_characteristic": bv.chi_from_betti,
            "simplex_counts": list(bv.simplex_counts), "torus_homology_match": bv.matches_torus()}


def cmd_critical(args) -> dict:
    cloud = read_cloud(args.inp)
    r, lam, ctx = _resolve(args, cloud)
    census = enumerate_critical_points(cloud, r, ctx)
    return {"radius": r, "lambda": lam, "counts": list(census.counts), "chi_morse": census.chi_morse,
            "near_ties": census.ties}


def cmd_theta(args) -> dict:
    cloud = read_cloud(args.inp)
    r, lam, ctx = _resolve(args, cloud)
    counts, cycles = count_theta_cycles(cloud, r, args.epsilon, ctx, lam=lam if lam > 1 else None)
    phis = np.array([c.phi for c in cycles if c.isolation_certified])
    q = np.quantile(phis, [0.0, 0.1, 0.25, 0.5, 0.75, 0.9, 1.0]).tolist() if len(phis) else []
    return {"radius": r, "lambda": lam, "epsilon": args.epsilon, "theta_counts": list(counts),
            "window_candidates": len(cycles), "isolated_candidates": int(len(phis)),
            "phi_quantiles": dict(zip(["min", "q10", "q25", "median", "q75", "q90", "max"], q))}


def cmd_coverage(args) -> dict:
    cloud = read_cloud(args.inp)
    r, lam, ctx = _resolve(args, cloud)
    return {"radius": r, "lambda": lam, "covered": is_covered(cloud, r, ctx)}


def cmd_sweep(args) -> dict:
    cfg = SweepConfig.from_file(args.config)
    summaries = sweep(cfg, workers=args.workers)
    return {"outputs": cfg.outputs, "grid_points": len(summaries),
            "trials": cfg.trials * len(summaries)}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cechlab", description="Random Cech complexes on the flat torus.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="sample a Poisson process on T^d")
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--intensity", type=float, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("complex", help="build the Cech complex of a point file")
    p.add_argument("--in", dest="inp", required=True)
    _add_radius(p)
    p.add_argument("--max-sdim", dest="max_sdim", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_complex)

    p = sub.add_parser("betti", help="Betti numbers of a complex file (or of a point file with a radius)")
    p.add_argument("--in", dest="inp", required=True)
    _add_radius(p, required=False)
    p.set_defaults(func=cmd_betti)

    p = sub.add_parser("critical", help="count critical points of the distance function")
    p.add_argument("--in", dest="inp", required=True)
    _add_radius(p)
    p.set_defaults(func=cmd_critical)

    p = sub.add_parser("theta", help="count Theta-cycles")
    p.add_argument("--in", dest="inp", required=True)
    _add_radius(p)
    p.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON)
    p.set_defaults(func=cmd_theta)

    p = sub.add_parser("coverage", help="test whether the r-balls cover the torus")
    p.add_argument("--in", dest="inp", required=True)
    _add_radius(p)
    p.set_defaults(func=cmd_coverage)

    p = sub.add_parser("sweep", help="run a Monte Carlo sweep from a key=value config")
    p.add_argument("--config", required=True)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_sweep)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        out = args.func(args)
    except (CechLabError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if out:
        print(json.dumps(out))
    return 0
