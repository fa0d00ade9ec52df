"""Command-line front end: walk-spec ingestion, analysis pipelines, reports.

Batch oriented: JSON walk specs in, JSON or CSV reports out, no interactive
mode.  Every report embeds the full effective configuration (including the
seed and all defaults), so identical invocations produce byte-identical
output and exit codes double as CI assertions.

Exit codes: 0 success (all embedded checks pass), 1 an embedded numerical
check failed its tolerance, 2 usage or spec validation error, 3 analysis
error (no root bracket, solver residual, unclassifiable walk), 4 depth or
truncation limit hit.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import mc
from .boundary import (
    classify_tree_case,
    enumerate_minimal_families,
    harmonicity_residual,
    kernel_at,
    solve_coefficients,
    standard_boundary_points,
    up_to_boundary,
)
from .dlgraph import ORIGIN, dl_ball, make_dl_vertex
from .errors import (
    DepthExceeded,
    InsufficientDepth,
    NoBracket,
    NoConvergence,
    NotStochastic,
    TruncationExceeded,
    Unclassifiable,
    WalkSpecError,
)
from .tree import ROOT, BoundaryPoint, TreeVertex, ancestor, descend
from .walks import load_walk_spec

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_ANALYSIS = 3
EXIT_DEPTH = 4


def _fmt(v) -> str:
    return repr(float(v))


def _render_csv(header, rows) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(str(v) if isinstance(v, (int, str)) else _fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def _render_json(report) -> str:
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


def _emit(text: str, out_path) -> None:
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _config(args, fields) -> dict:
    cfg = {"command": args.command, "walk": args.walk}
    for f in fields:
        cfg[f.replace("-", "_")] = getattr(args, f.replace("-", "_"))
    return cfg


def _tree_walk(spec, side: int):
    return spec.measure.project_to_tree(side)


def cmd_analyze(args):
    spec = load_walk_spec(args.walk)
    qm = spec.measure
    z1 = qm.z_law(1)
    alpha = z1.drift()
    try:
        c0 = z1.find_c0()
    except NoBracket:
        c0 = None
    phi_grid = [[c / 4.0, z1.phi(c / 4.0)] for c in range(-8, 9)]
    report = {
        "config": _config(args, []),
        "q": spec.q,
        "r": spec.r,
        "family": spec.family,
        "mu_tilde": {str(n): p for n, p in z1.law},
        "alpha": alpha,
        "c0": c0,
        "phi_grid": phi_grid,
        "moments": {
            "m1": qm.moment(1.0),
            "m2_5": qm.moment(2.5),
            "exp_moment_c0": qm.exp_moment(c0) if c0 is not None else None,
        },
        "case": "I" if abs(alpha) <= 1e-12 else "II",
        "tree_cases": {
            str(side): classify_tree_case(_tree_walk(spec, side)).kind for side in (1, 2)
        },
    }
    return report, None, True


def cmd_classify(args):
    spec = load_walk_spec(args.walk)
    report = enumerate_minimal_families(spec.measure, J=args.j_max, tol=args.tol).to_jsonable()
    report["config"] = _config(args, ["j_max", "tol"])
    return report, None, True


def cmd_coeffs(args):
    spec = load_walk_spec(args.walk)
    walk = _tree_walk(spec, args.side)
    coeffs = solve_coefficients(walk, J=args.j_max, tol=args.tol)
    report = {
        "config": _config(args, ["side", "j_max", "tol", "mc_runs", "seed"]),
        "case": coeffs.case.kind,
        "c0": coeffs.case.c0,
        "normalization": coeffs.normalization,
        "residual": coeffs.residual,
        "a": list(coeffs.a),
    }
    if args.mc_runs > 0:
        # conjugated case: the boundary limits exist for the solved walk
        sim_walk = coeffs.walk_solved
        params = mc.TrajectoryParams(seed=args.seed)
        tally = mc.boundary_tally(sim_walk, ROOT, [ROOT], args.mc_runs, params)
        estimates = mc.tally_rows(tally, min(args.j_max, 20))
        report["mc"] = {
            "runs": tally.runs,
            "unconverged": tally.unconverged,
            "estimates": [list(r) for r in estimates],
        }
        rows = [(j, a, est[1], est[2], est[3]) for (j, a), est in
                zip(enumerate(coeffs.a), estimates)]
        return report, ("j,a_j,count,freq,stderr", rows), True
    rows = [(j, a) for j, a in enumerate(coeffs.a)]
    return report, ("j,a_j", rows), True


def _parse_vertex(text: str) -> TreeVertex:
    return TreeVertex.from_json(json.loads(text))


def cmd_kernel(args):
    spec = load_walk_spec(args.walk)
    coeffs = solve_coefficients(_tree_walk(spec, args.side), J=args.j_max, tol=args.tol)
    x = _parse_vertex(args.x)
    xi = BoundaryPoint.from_json(json.loads(args.xi))
    k = up_to_boundary(ROOT, xi)
    l = up_to_boundary(x, xi)
    report = {
        "config": _config(args, ["side", "j_max", "tol", "x", "xi"]),
        "k": k,
        "l": l,
        "m": x.hor,
        "value": kernel_at(coeffs, x, xi),
        "case": coeffs.case.kind,
    }
    return report, None, True


def _deep_dl_vertices(rng, q, r, count):
    out = []
    for _ in range(count):
        pos = rng.randrange(-4, 5)
        lamps = {}
        for m in range(pos - 5, pos + 6):
            limit = q if m <= pos else r
            lamps[m] = rng.randrange(limit)
        out.append(make_dl_vertex(pos, lamps))
    return out


def cmd_verify(args):
    import random

    spec = load_walk_spec(args.walk)
    qm = spec.measure
    rep = enumerate_minimal_families(qm, J=args.j_max, tol=args.tol)
    xis = {fam.side: standard_boundary_points(ks=(0, 1, 2), depth=24) for fam in rep.families}
    points = dl_ball(ORIGIN, args.radius, qm.q, qm.r)
    points += _deep_dl_vertices(random.Random(args.seed), qm.q, qm.r, args.deep)
    worst = 0.0
    per_function = []
    for h in rep.all_sample_functions(xis):
        resid = harmonicity_residual(h, qm, points)
        per_function.append({"kind": h.kind, "side": h.side, "max_rel_err": resid})
        worst = max(worst, resid)
    ok = worst < args.tol_harmonic
    report = {
        "config": _config(args, ["j_max", "tol", "radius", "deep", "seed", "tol_harmonic"]),
        "classification": rep.to_jsonable(),
        "points_checked": len(points),
        "functions": per_function,
        "harmonicity_max_rel_err": worst,
        "passed": ok,
    }
    return report, None, ok


def cmd_simulate(args):
    spec = load_walk_spec(args.walk)
    walk = _tree_walk(spec, args.side)
    params = mc.TrajectoryParams(steps=args.steps, seed=args.seed)
    traj = mc.simulate(walk, ROOT, params)
    rows = list(traj.rows)
    report = {
        "config": _config(args, ["side", "steps", "seed"]),
        "rows": [list(r) for r in rows],
    }
    return report, ("n,hor,up_o,up_from_o", rows), True


def _martin_x_choices():
    # on the target ray, off the ray at depth 1, and below the origin
    return [
        descend(ancestor(ROOT, 1), (1, 0)),
        descend(ancestor(ROOT, 1), (1, 1)),
        descend(ROOT, (1,)),
    ]


def cmd_martin(args):
    spec = load_walk_spec(args.walk)
    walk = _tree_walk(spec, args.side)
    coeffs = solve_coefficients(walk, J=args.j_max, tol=args.tol)
    xi = standard_boundary_points(ks=(args.k,), depth=24)[0]
    depths = [int(d) for d in args.depths.split(",")]
    if args.x:
        xs = [_parse_vertex(args.x)]
    else:
        xs = _martin_x_choices()
    rows = []
    ok = True
    results = []
    for i, x in enumerate(xs):
        rep = mc.martin_convergence_test(walk, coeffs, x, xi, depths, args.n_max)
        ok = ok and rep.final_rel_err < args.tol_martin and rep.trending_down()
        results.append({
            "x": x.to_json(),
            "target": rep.target,
            "final_rel_err": rep.final_rel_err,
            "trending_down": rep.trending_down(),
        })
        for row in rep.rows:
            rows.append((i, row.n, row.k_hat, rep.target, row.rel_err))
    report = {
        "config": _config(args, ["side", "k", "depths", "n_max", "j_max", "tol",
                                 "tol_martin", "x"]),
        "results": results,
        "passed": ok,
    }
    return report, ("x_index,n,k_hat,target,rel_err", rows), ok


COMMANDS = {
    "analyze": cmd_analyze,
    "classify": cmd_classify,
    "coeffs": cmd_coeffs,
    "kernel": cmd_kernel,
    "verify": cmd_verify,
    "simulate": cmd_simulate,
    "martin": cmd_martin,
}

CSV_COMMANDS = {"coeffs", "simulate", "martin"}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dlwalks",
                                description="semi-isotropic walks on trees and DL graphs")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, seed_default=None):
        sp.add_argument("--walk", required=True, help="path to a walk-spec JSON file")
        sp.add_argument("--out", default=None, help="output path (default stdout)")
        sp.add_argument("--format", choices=("json", "csv"), default="json")
        if seed_default is not None:
            sp.add_argument("--seed", type=int, default=seed_default)

    sp = sub.add_parser("analyze", help="drift, phi, moments, case classification")
    common(sp)

    sp = sub.add_parser("classify", help="minimal harmonic function families")
    common(sp)
    sp.add_argument("--j-max", type=int, default=200)
    sp.add_argument("--tol", type=float, default=1e-8)

    sp = sub.add_parser("coeffs", help="boundary cylinder masses a_j for one tree")
    common(sp, seed_default=0)
    sp.add_argument("--side", type=int, choices=(1, 2), default=1)
    sp.add_argument("--j-max", type=int, default=200)
    sp.add_argument("--tol", type=float, default=1e-8)
    sp.add_argument("--mc-runs", type=int, default=0,
                    help="also estimate a_j from this many boundary-limit runs")

    sp = sub.add_parser("kernel", help="evaluate the Martin kernel K(x, xi)")
    common(sp)
    sp.add_argument("--side", type=int, choices=(1, 2), default=1)
    sp.add_argument("--j-max", type=int, default=200)
    sp.add_argument("--tol", type=float, default=1e-8)
    sp.add_argument("--x", required=True, help="tree vertex JSON")
    sp.add_argument("--xi", required=True, help="boundary point JSON")

    sp = sub.add_parser("verify", help="exact harmonicity of every classified family")
    common(sp, seed_default=0)
    sp.add_argument("--j-max", type=int, default=200)
    sp.add_argument("--tol", type=float, default=1e-8)
    sp.add_argument("--radius", type=int, default=3)
    sp.add_argument("--deep", type=int, default=50)
    sp.add_argument("--tol-harmonic", type=float, default=1e-10)

    sp = sub.add_parser("simulate", help="one seeded trajectory of a tree projection")
    common(sp, seed_default=0)
    sp.add_argument("--side", type=int, choices=(1, 2), default=1)
    sp.add_argument("--steps", type=int, default=1000)

    sp = sub.add_parser("martin", help="Green-ratio convergence toward the kernel")
    common(sp)
    sp.add_argument("--side", type=int, choices=(1, 2), default=1)
    sp.add_argument("--k", type=int, default=1, help="cylinder index of the target end")
    sp.add_argument("--depths", default="4,6,8,10")
    sp.add_argument("--n-max", type=int, default=300)
    sp.add_argument("--j-max", type=int, default=200)
    sp.add_argument("--tol", type=float, default=1e-8)
    sp.add_argument("--tol-martin", type=float, default=0.05)
    sp.add_argument("--x", default=None, help="tree vertex JSON (default: three standard x)")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        report, csv_data, ok = COMMANDS[args.command](args)
    except WalkSpecError as e:
        print(f"walk spec error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (NoBracket, NoConvergence, Unclassifiable, NotStochastic) as e:
        print(f"analysis error: {e}", file=sys.stderr)
        return EXIT_ANALYSIS
    except (InsufficientDepth, TruncationExceeded, DepthExceeded) as e:
        print(f"depth error: {e}", file=sys.stderr)
        return EXIT_DEPTH
    except (ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    if args.format == "csv":
        if args.command not in CSV_COMMANDS or csv_data is None:
            print(f"error: --format csv is not supported for {args.command}", file=sys.stderr)
            return EXIT_USAGE
        header, rows = csv_data
        _emit(_render_csv(header.split(","), rows), args.out)
    else:
        _emit(_render_json(report), args.out)
    return EXIT_OK if ok else EXIT_CHECK_FAILED


if __name__ == "__main__":
    sys.exit(main())
