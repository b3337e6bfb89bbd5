"""End-to-end verification runs driven by a plain config dict.

A config fully determines its outputs (identical config implies identical
report apart from the timestamp), which is what makes ``--replay`` possible:
reports embed their config, and replaying re-executes it and compares margins.

Domain grammar (chart coordinates unless noted):

    ball:R                  geodesic disk of radius R (model units)
    ellipse:a,b             axis-aligned ellipse with chart semi-axes a, b
    peanut:size,pinch       two-lobe curve rho = size (1 + pinch cos 2 theta)
    annulus:r_in,r_out      geodesic annulus (radial solver, no mesh)
    polyline:path           closed polyline read from a mesh-format text file
"""

from __future__ import annotations

import math
import os

import numpy as np

from .fem import assemble, build_model, solve_spectrum
from .geometry import ball_volume, parse_space, radius_from_volume
from .mesh import (
    CircleCurve,
    EllipseCurve,
    PeanutCurve,
    PolylineCurve,
    mesh_domain,
    write_mesh,
)
from .radial import solve_annulus, solve_ball
from .verify import (
    VerificationReport,
    build_trial_setup,
    candidate_eigenvalues,
    check_chain,
    check_main_inequality,
    domain_hash_mesh,
    lemma_report,
    trial_bound_check,
)

__all__ = ["parse_domain", "run_verify", "run_from_config", "replay_report"]


def parse_domain(text: str) -> dict:
    kind, _, rest = text.partition(":")
    args = [a for a in rest.split(",") if a]
    try:
        if kind == "ball":
            (R,) = map(float, args)
            return {"kind": "ball", "R": R}
        if kind == "ellipse":
            a, b = map(float, args)
            return {"kind": "ellipse", "a": a, "b": b}
        if kind == "peanut":
            size, pinch = map(float, args)
            return {"kind": "peanut", "size": size, "pinch": pinch}
        if kind == "annulus":
            r_in, r_out = map(float, args)
            return {"kind": "annulus", "r_in": r_in, "r_out": r_out}
        if kind == "polyline":
            return {"kind": "polyline", "path": rest}
    except ValueError:
        pass
    raise ValueError(
        f"cannot parse domain {text!r}; expected ball:R, ellipse:a,b, "
        f"peanut:size,pinch, annulus:r_in,r_out or polyline:path")


def _build_curve(model, dom: dict):
    if dom["kind"] == "ball":
        return CircleCurve(float(model.chart_rho(dom["R"])))
    if dom["kind"] == "ellipse":
        return EllipseCurve(dom["a"], dom["b"])
    if dom["kind"] == "peanut":
        return PeanutCurve(dom["size"], dom["pinch"])
    if dom["kind"] == "polyline":
        pts = np.loadtxt(dom["path"])
        return PolylineCurve(pts)
    raise ValueError(f"domain kind {dom['kind']} has no boundary curve")


def run_verify(config: dict, workdir: str | None = None) -> VerificationReport:
    """Mesh -> spectrum -> trial pipeline -> inequality checks for one domain."""
    space = parse_space(config["space"])
    dom = parse_domain(config["domain"])
    report = VerificationReport(config=config)

    if dom["kind"] == "annulus":
        modes = solve_annulus(space, dom["r_in"], dom["r_out"])
        volume = ball_volume(space, dom["r_out"]) - ball_volume(space, dom["r_in"])
        cands = candidate_eigenvalues(modes)
        inputs = {
            "domain_hash": f"annulus:{dom['r_in']:.17g},{dom['r_out']:.17g}",
            "solver_tags": ["annulus-shooting"],
        }
        report.checks.extend(check_main_inequality(
            space, cands, volume, provenance="annulus-candidate", inputs=inputs))
        return report

    h = float(config.get("h", 0.03))
    q = int(config.get("q", 6))
    seed = config.get("seed")
    model = build_model(space)
    curve = _build_curve(model, dom)
    mesh = mesh_domain(model, curve, h, seed=seed)
    K, M = assemble(model, mesh)
    spectrum = solve_spectrum(K, M, q, model_name=model.name, h_max=mesh.h_max())
    volume = float(M.sum())
    R = radius_from_volume(space, volume)
    ball = solve_ball(space, R, tol=float(config.get("tol_shoot", 1e-10)))
    setup = build_trial_setup(model, mesh, K, M, spectrum, ball)

    equality = dom["kind"] == "ball"
    report.checks.extend(trial_bound_check(setup))
    report.checks.extend(check_chain(setup, equality_case=equality))
    report.checks.extend(check_main_inequality(
        space, spectrum.eigenvalues[1:], volume, ball=ball, provenance="fem",
        inputs={"domain_hash": setup.domain_hash, "h": mesh.h_max(),
                "solver_tags": ["fem", "shooting"]},
        equality_case=equality))

    if workdir:
        os.makedirs(workdir, exist_ok=True)
        write_mesh(mesh, os.path.join(workdir, "mesh.txt"))
        ball.profile.to_csv(os.path.join(workdir, "ball_profile.csv"))
        ball.to_json(os.path.join(workdir, "ball.json"))
        import json

        with open(os.path.join(workdir, "spectrum.json"), "w") as f:
            json.dump(spectrum.to_json_dict(), f, indent=2)
            f.write("\n")
    return report


def run_from_config(config: dict, workdir: str | None = None) -> VerificationReport:
    command = config.get("command")
    if command == "verify":
        return run_verify(config, workdir=workdir)
    if command == "check_lemmas":
        spaces = [parse_space(s) for s in config["spaces"]]
        return lemma_report(spaces=spaces, grid_n=int(config.get("grid", 1000)),
                            radii_n=int(config.get("radii", 20)),
                            checks=config.get("checks") or None,
                            jobs=int(config.get("jobs", 1)))
    raise ValueError(f"config command {command!r} is not replayable")


def replay_report(path: str, atol: float = 1e-12) -> tuple[bool, list[str]]:
    """Re-run a saved report's config and compare all margins to ``atol``."""
    old = VerificationReport.load(path)
    new = run_from_config(dict(old.config))
    problems = []
    if len(old.checks) != len(new.checks):
        problems.append(
            f"check count changed: {len(old.checks)} -> {len(new.checks)}")
    for a, b in zip(old.checks, new.checks):
        if a.check_id != b.check_id:
            problems.append(f"check order changed: {a.check_id} vs {b.check_id}")
            continue
        if not (math.isfinite(a.margin) and math.isfinite(b.margin)):
            problems.append(f"{a.check_id}: non-finite margin")
        elif abs(a.margin - b.margin) > atol:
            problems.append(
                f"{a.check_id}: margin drifted {a.margin!r} -> {b.margin!r}")
    return (not problems), problems
