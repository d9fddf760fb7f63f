"""Command-line entry point: ``nozzleshock {radial,interval,map,verify2d,rerun}``.

Exit codes: 0 ok, 1 internal error, 2 out-of-range input (and usage
errors), 3 invariant breach, 4 non-convergence.

Options may also come from a JSON file given with ``--config``; flags
override the file.  Every run writes ``manifest.json`` holding the
resolved configuration, and ``nozzleshock rerun manifest.json`` replays
it byte for byte.  The output directory defaults to ``$NOZZLESHOCK_OUT``
or the current directory.
"""
import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__, fbp2d, io, radial
from .errors import (
    ConvergenceError,
    DomainError,
    InvariantError,
    LinearSolverError,
    NoSolutionError,
    OutOfIntervalError,
    DegenerateIntervalError,
)

EXIT_OK, EXIT_INTERNAL, EXIT_RANGE, EXIT_INVARIANT, EXIT_NONCONVERGED = 0, 1, 2, 3, 4

PROBLEM_DEFAULTS = {
    "gamma": 1.4,
    "b0": 2.5,
    "u0": 1.5,
    "r0": 1.0,
    "r1": 2.0,
    "dim": 3,
    "half_angle": math.pi / 6,
}
COMMAND_DEFAULTS = {
    "radial": {"n": 201, "tol": 1e-10},
    "interval": {"tol": 1e-8},
    "map": {"samples": 100},
    "verify2d": {
        "dim": 2,
        "nr": 128,
        "ntheta": 64,
        "picard_tol": 1e-10,
        "linear_tol": 1e-10,
        "front_tol": 1e-6,
        "omega": 1.0,
        "delta_clamp": 0.05,
        "max_outer": 60,
        "max_picard": 60,
        "mode": 1,
        "amplitude": 0.05,
    },
}


class UsageError(Exception):
    pass


def _add_problem_args(p):
    g = p.add_argument_group("problem")
    g.add_argument("--gamma", type=float, help="adiabatic exponent (> 1)")
    g.add_argument("--b0", type=float, help="Bernoulli constant")
    g.add_argument("--u0", type=float, help="supersonic entry speed")
    g.add_argument("--r0", type=float, help="entry radius")
    g.add_argument("--r1", type=float, help="exit radius")
    g.add_argument("--dim", type=int, choices=(2, 3), help="spatial dimension")
    g.add_argument("--half-angle", dest="half_angle", type=float, help="wall half-angle (dim=2), radians")
    p.add_argument("--config", type=Path, help="JSON file of option values; flags override it")
    p.add_argument("--out", type=Path, help="output directory")


def _add_shock_choice(p):
    grp = p.add_mutually_exclusive_group()
    grp.add_argument("--v1", type=float, help="exit speed (back pressure)")
    grp.add_argument("--rs", type=float, help="shock radius")


def build_parser():
    parser = argparse.ArgumentParser(prog="nozzleshock", argument_default=argparse.SUPPRESS)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("radial", help="symmetric transonic shock solution", argument_default=argparse.SUPPRESS)
    _add_problem_args(p)
    _add_shock_choice(p)
    p.add_argument("--n", type=int, help="profile grid size")
    p.add_argument("--tol", type=float, help="exit-speed tolerance for --v1")

    p = sub.add_parser("interval", help="admissible exit-speed interval", argument_default=argparse.SUPPRESS)
    _add_problem_args(p)
    p.add_argument("--tol", type=float, help="endpoint offset/resolution")

    p = sub.add_parser("map", help="table of exit speed against shock radius", argument_default=argparse.SUPPRESS)
    _add_problem_args(p)
    p.add_argument("--samples", type=int, help="number of shock radii (>= 2)")

    p = sub.add_parser("verify2d", help="2D free-boundary iteration from a perturbed front",
                       argument_default=argparse.SUPPRESS)
    _add_problem_args(p)
    _add_shock_choice(p)
    for name, typ in (("nr", int), ("ntheta", int), ("picard-tol", float), ("linear-tol", float),
                      ("front-tol", float), ("omega", float), ("delta-clamp", float),
                      ("max-outer", int), ("max-picard", int)):
        p.add_argument(f"--{name}", dest=name.replace("-", "_"), type=typ)
    pert = p.add_mutually_exclusive_group()
    pert.add_argument("--mode", type=int, help="cosine mode of the initial perturbation")
    pert.add_argument("--seed", type=int, help="seed of a smooth random perturbation")
    p.add_argument("--amplitude", type=float, help="perturbation amplitude (radius units)")

    p = sub.add_parser("rerun", help="replay a manifest")
    p.add_argument("manifest", type=Path)
    p.add_argument("--out", type=Path)
    return parser


def resolve_config(command, explicit, file_cfg=None):
    """Merge defaults < config file < explicit flags for ``command``."""
    cfg = dict(PROBLEM_DEFAULTS)
    cfg.update(COMMAND_DEFAULTS.get(command, {}))
    file_cfg = dict(file_cfg or {})
    for pair in (("v1", "rs"), ("mode", "seed")):
        if any(k in explicit for k in pair):
            for k in pair:
                file_cfg.pop(k, None)
    if "seed" in file_cfg or "seed" in explicit:
        cfg.pop("mode", None)
    cfg.update(file_cfg)
    cfg.update(explicit)
    if command in ("radial", "verify2d"):
        if ("v1" in cfg) == ("rs" in cfg):
            raise UsageError("exactly one of --v1 and --rs is required")
    if command == "verify2d":
        if cfg["dim"] != 2:
            raise UsageError("verify2d runs in 2D wedges only (--dim 2)")
        if ("mode" in cfg) == ("seed" in cfg):
            raise UsageError("give exactly one of --mode and --seed")
    return dict(sorted(cfg.items()))


def _problem(cfg):
    return radial.RadialProblem.build(
        gamma=cfg["gamma"], b0=cfg["b0"], u0=cfg["u0"], r0=cfg["r0"], r1=cfg["r1"],
        dim=cfg["dim"], half_angle=cfg["half_angle"],
    )


def _manifest(command, cfg):
    return {"command": command, "config": cfg, "version": __version__}


def cmd_radial(cfg, out):
    problem = _problem(cfg)
    if "rs" in cfg:
        solution = radial.shock_solution_at(problem, cfg["rs"], cfg["n"])
        solution.validate()
    else:
        solution = radial.find_shock(problem, cfg["v1"], cfg["tol"], cfg["n"])
    report = radial.verify_lemma1(problem, solution)
    io.write_json(out / "solution.json", io.solution_dict(solution, report))
    io.write_profile(out / "supersonic.csv", solution.supersonic, problem.gas)
    io.write_profile(out / "subsonic.csv", solution.subsonic, problem.gas)
    res = solution.invariant_residuals()
    print(
        f"r_s={solution.r_s:.12g} v1={solution.v1:.12g} v-={solution.v_minus:.12g} "
        f"v+={solution.v_plus:.12g} rh={res['rankine_hugoniot']:.2e} "
        f"mass={max(res['supersonic']['mass'], res['subsonic']['mass']):.2e} lemma1={'pass' if report.passed else 'FAIL'}"
    )
    return EXIT_OK if report.passed else EXIT_INVARIANT


def cmd_interval(cfg, out):
    problem = _problem(cfg)
    try:
        interval = radial.admissible_interval(problem, cfg["tol"])
    except DegenerateIntervalError as exc:
        io.write_json(out / "interval.json", {
            "v_lo": exc.v_lo, "v_hi": exc.v_hi, "open": True, "degenerate": True,
            "width": exc.v_hi - exc.v_lo, "message": str(exc),
        })
        print(f"v_lo={exc.v_lo:.12g} v_hi={exc.v_hi:.12g} (degenerate)", file=sys.stdout)
        raise
    io.write_json(out / "interval.json", {
        "v_lo": interval.v_lo, "v_hi": interval.v_hi, "open": True, "degenerate": False,
        "width": interval.width,
    })
    print(f"v_lo={interval.v_lo:.12g} v_hi={interval.v_hi:.12g}")
    return EXIT_OK


def cmd_map(cfg, out):
    n = cfg["samples"]
    if n < 2:
        raise UsageError("--samples must be at least 2")
    problem = _problem(cfg)
    span = problem.r1 - problem.r0
    eps = 1e-8 * span
    radii = np.linspace(problem.r0 + eps, problem.r1 - eps, n)
    speeds = radial.exit_velocity_map(problem, radii)
    io.write_csv(out / "map.csv", io.MAP_COLUMNS, zip(radii, speeds))
    steps = np.diff(speeds)
    print(f"{n} samples, v1 in [{speeds.min():.12g}, {speeds.max():.12g}], min step {steps.min():.3e}")
    if not np.all(steps > 0):
        raise InvariantError(
            f"exit speed is not strictly increasing in the shock radius "
            f"({int(np.count_nonzero(steps <= 0))} of {steps.size} steps are not positive)"
        )
    return EXIT_OK


def cmd_verify2d(cfg, out):
    problem = _problem(cfg)
    config = fbp2d.FbpConfig(**{k: cfg[k] for k in (
        "nr", "ntheta", "picard_tol", "linear_tol", "front_tol", "omega", "delta_clamp", "max_outer", "max_picard")})
    if "rs" in cfg:
        reference = radial.shock_solution_at(problem, cfg["rs"])
        v1 = reference.v1
    else:
        v1 = cfg["v1"]
        fbp2d._check_exit_speed(problem, v1)
        reference = radial.find_shock(problem, v1)
    try:
        front0 = fbp2d.perturb_front(
            problem, reference.r_s, cfg["amplitude"], cfg.get("mode"), cfg.get("seed"), config.ntheta)
    except DomainError as exc:
        raise UsageError(str(exc)) from exc
    front, field, report = fbp2d.run_fbp(problem, v1, front0, config, reference=reference)

    rows = ((k, th, f) for k, fr in enumerate(report.fronts) for th, f in zip(fr.thetas, fr.f))
    io.write_csv(out / "front_history.csv", io.FRONT_COLUMNS, rows)
    theta2d = np.broadcast_to(field.theta[None, :], field.r.shape)
    io.write_csv(out / "field.csv", io.FIELD_COLUMNS, zip(
        field.r.ravel(), theta2d.ravel(), field.v_r.ravel(), field.v_theta.ravel(),
        field.speed.ravel(), field.rho.ravel()))
    payload = report.as_dict()
    payload.update(problem=io.problem_dict(problem), v1=v1, reference_r_s=reference.r_s,
                   slip_residual=field.slip_residual)
    io.write_json(out / "report.json", payload)
    uniq = report.uniqueness
    print(
        f"verdict={report.verdict} iterations={report.iterations} "
        f"front_dev={uniq.get('front_deviation', float('nan')):.3e} "
        f"speed_linf={uniq.get('speed_rel_linf', float('nan')):.3e} "
        f"perpendicular={report.perpendicularity.get('passed')}"
    )
    if report.verdict != "converged":
        return EXIT_NONCONVERGED
    if not (uniq["within_thresholds"] and report.perpendicularity["passed"]):
        return EXIT_INVARIANT
    return EXIT_OK


COMMANDS = {"radial": cmd_radial, "interval": cmd_interval, "map": cmd_map, "verify2d": cmd_verify2d}


def execute(command, cfg, out):
    """Run ``command`` with a resolved config; writes the manifest first."""
    out.mkdir(parents=True, exist_ok=True)
    io.write_json(out / "manifest.json", _manifest(command, cfg))
    return COMMANDS[command](cfg, out)


def _run(argv):
    parser = build_parser()
    args = vars(parser.parse_args(argv))
    command = args.pop("command")
    out = args.pop("out", None) or Path(os.environ.get("NOZZLESHOCK_OUT", "."))
    if command == "rerun":
        manifest = json.loads(Path(args["manifest"]).read_text(encoding="utf-8"))
        command, cfg = manifest["command"], manifest["config"]
    else:
        cfg_path = args.pop("config", None)
        file_cfg = json.loads(cfg_path.read_text(encoding="utf-8")) if cfg_path else None
        if file_cfg and "config" in file_cfg and "command" in file_cfg:
            file_cfg = file_cfg["config"]  # a manifest also works as a config file
        cfg = resolve_config(command, args, file_cfg)
    return execute(command, cfg, Path(out))


def main(argv=None):
    try:
        return _run(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_RANGE
    except OutOfIntervalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RANGE
    except (DomainError, NoSolutionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RANGE
    except InvariantError as exc:
        print(f"invariant breach: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (ConvergenceError, LinearSolverError) as exc:
        print(f"no convergence: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGED
    except Exception as exc:  # noqa: BLE001 - top-level guard
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
