"""Batch command-line front end.

Commands
--------
ball          solve one geodesic ball eigenvalue; JSON result plus profile CSV
check-lemmas  sweep the closed-form identities and radial lemmas over a space set
verify        mesh -> spectrum -> trial pipeline -> inequality report for a domain
replay        re-run the config embedded in a report and compare margins

Exit codes: 0 all checks passed, 1 at least one check failed, 2 usage or
domain error.  Reports are JSON and embed their config and config hash, so
any report can be reproduced bit-identically (timestamp aside) with replay.
"""

from __future__ import annotations

import argparse
import json
import sys

from .geometry import parse_space, standard_spaces
from .pipeline import replay_report, run_from_config, run_verify
from .radial import SolverError, solve_ball
from .verify import lemma_report


def _cmd_ball(args) -> int:
    space = parse_space(args.space)
    ball = solve_ball(space, args.radius, tol=args.tol)
    if args.out:
        ball.to_json(args.out)
    if args.csv:
        ball.profile.to_csv(args.csv)
    print(json.dumps(ball.to_json_dict()))
    return 0


def _cmd_check_lemmas(args) -> int:
    if args.spaces:
        spaces = [parse_space(s) for s in args.spaces.split(",")]
    else:
        spaces = standard_spaces()
    checks = args.checks.split(",") if args.checks else None
    report = lemma_report(spaces=spaces, grid_n=args.grid, radii_n=args.radii,
                          checks=checks, jobs=args.jobs)
    if args.out:
        report.save(args.out)
    for c in report.checks:
        status = "pass" if c.passed else "FAIL"
        print(f"[{status}] {c.check_id:28s} {c.inputs.get('space', ''):12s}"
              f" margin={c.margin:.3e} tol={c.tol:.1e}")
    print(f"summary: {report.passed} passed, {report.failed} failed")
    return 0 if report.all_passed else 1


def _cmd_verify(args) -> int:
    config = {
        "command": "verify",
        "space": args.space,
        "domain": args.domain,
        "h": args.h,
        "q": args.q,
        "seed": args.seed,
        "tol_shoot": args.tol,
    }
    report = run_verify(config, workdir=args.workdir)
    if args.out:
        report.save(args.out)
    for c in report.checks:
        status = "pass" if c.passed else "FAIL"
        print(f"[{status}] {c.check_id:28s} margin={c.margin:.3e} tol={c.tol:.1e}")
    print(f"summary: {report.passed} passed, {report.failed} failed")
    return 0 if report.all_passed else 1


def _cmd_replay(args) -> int:
    ok, problems = replay_report(args.report, atol=args.atol)
    for p in problems:
        print(f"REPLAY MISMATCH: {p}")
    print("replay ok" if ok else "replay failed")
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rosseig", description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ball", help="solve a geodesic ball eigenvalue")
    p.add_argument("--space", required=True, help="e.g. K1_n3_nc")
    p.add_argument("--radius", type=float, required=True)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--out", help="write BallEig JSON here")
    p.add_argument("--csv", help="write the radial profile CSV here")
    p.set_defaults(func=_cmd_ball)

    p = sub.add_parser("check-lemmas", help="closed-form identity and lemma sweep")
    p.add_argument("--spaces", help="comma-separated space names (default: standard family)")
    p.add_argument("--grid", type=int, default=1000)
    p.add_argument("--radii", type=int, default=20)
    p.add_argument("--checks", help="comma-separated check ids to run")
    p.add_argument("--jobs", type=int, default=1, help="worker pool size")
    p.add_argument("--out", help="write the report JSON here")
    p.set_defaults(func=_cmd_check_lemmas)

    p = sub.add_parser("verify", help="full domain verification pipeline")
    p.add_argument("--space", required=True)
    p.add_argument("--domain", required=True,
                   help="ball:R | ellipse:a,b | peanut:size,pinch | "
                        "annulus:rin,rout | polyline:path")
    p.add_argument("--h", type=float, default=0.03, help="chart mesh resolution")
    p.add_argument("--q", type=int, default=6, help="number of eigenpairs")
    p.add_argument("--seed", type=int, default=None, help="mesh jitter seed")
    p.add_argument("--tol", type=float, default=1e-10, help="shooting tolerance")
    p.add_argument("--out", help="write the report JSON here")
    p.add_argument("--workdir", help="write mesh/profile/spectrum artifacts here")
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("replay", help="re-run a report's config and compare margins")
    p.add_argument("report")
    p.add_argument("--atol", type=float, default=1e-12)
    p.set_defaults(func=_cmd_replay)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code not in (0, None) else 0
    try:
        return args.func(args)
    except (ValueError, SolverError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
