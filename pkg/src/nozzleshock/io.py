"""CSV/JSON writers with fixed column order and precision.

JSON floats use Python's shortest round-trip repr; CSV floats use 12
significant digits.  Outputs carry no timestamps or paths, so identical
inputs give identical bytes.
"""
import csv
import json
import math
from dataclasses import asdict, is_dataclass
from pathlib import Path

import numpy as np

from . import gas

PROFILE_COLUMNS = ("r", "v", "rho", "p", "mach", "phi")
FIELD_COLUMNS = ("r", "theta", "v_r", "v_theta", "speed", "rho")
FRONT_COLUMNS = ("iteration", "theta", "f")
MAP_COLUMNS = ("r_s", "v1")


def to_jsonable(obj):
    if is_dataclass(obj) and not isinstance(obj, type):
        return to_jsonable(asdict(obj))
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if hasattr(obj, "value"):  # enums
        return obj.value
    return obj


def dumps(payload):
    return json.dumps(to_jsonable(payload), indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_json(path, payload):
    Path(path).write_text(dumps(payload), encoding="utf-8")


def _fmt(x):
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".12g")


def write_csv(path, columns, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(x) for x in row])


def profile_rows(profile, model):
    p = profile.pressure(model)
    mach = profile.mach(model)
    return zip(profile.grid, profile.v, profile.rho, p, mach, profile.phi)


def write_profile(path, profile, model):
    write_csv(path, PROFILE_COLUMNS, profile_rows(profile, model))


def read_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        data = np.array([[float(x) for x in row] for row in reader])
    return header, data


def problem_dict(problem):
    return {
        "gamma": problem.gas.gamma,
        "b0": problem.gas.b0,
        "u0": problem.u0,
        "r0": problem.r0,
        "r1": problem.r1,
        "dim": problem.dim,
        "half_angle": problem.geom.half_angle,
        "rho0": problem.rho0,
        "a0": problem.a0,
        "critical_speed": gas.critical_speed(problem.gas),
        "max_speed": gas.max_speed(problem.gas),
    }


def solution_dict(solution, lemma_report=None):
    out = {
        "problem": problem_dict(solution.problem),
        "r_s": solution.r_s,
        "v1": solution.v1,
        "v_minus": solution.v_minus,
        "v_plus": solution.v_plus,
        "grid_size": int(solution.subsonic.grid.size),
        "residuals": solution.invariant_residuals(),
    }
    if lemma_report is not None:
        out["lemma1"] = lemma_report.as_dict()
    return out
