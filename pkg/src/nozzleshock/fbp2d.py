"""Shock-fitting free-boundary iteration in a 2D wedge nozzle.

The nozzle is ``r0 < r < r1, |theta| < half_angle``.  Ahead of a shock
front ``r = f(theta)`` the flow is the radial supersonic flow.  Behind
it, the subsonic potential solves

    d/dr (r rho phi_r) + d/dtheta (rho phi_theta / r) = 0

with the normal mass flux prescribed on the front (Rankine-Hugoniot),
slip on the walls and ``|grad phi| = v1`` on the exit arc.  The region
behind the front is mapped onto the unit rectangle through
``s = (r - f(theta)) / (r1 - f(theta))`` and discretised with a
vertex-centred finite-volume scheme.  Every cell balance is a difference
of face fluxes, so the interior fluxes telescope.

All boundary conditions of the subsonic problem are of flux type, so
the potential is fixed only up to a constant.  The solver appends a
uniform source with a Lagrange multiplier that absorbs any flux
incompatibility, and a gauge row that sets the mean Dirichlet mismatch
along the front to zero.  The front then moves with a Newton step on
the remaining mismatch ``phi^- - phi^+``.
"""
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import spsolve

from . import gas
from .errors import (
    ConvergenceError,
    DegenerateIntervalError,
    DomainError,
    LinearSolverError,
    OutOfIntervalError,
)
from .radial import (
    Branch,
    admissible_interval,
    branch_speed,
    find_shock,
    rh_jump,
    supersonic_potential,
)


@dataclass
class ShockFront:
    """Front radii ``f`` sampled on a uniform grid ``thetas`` over [-half_angle, half_angle]."""

    thetas: np.ndarray
    f: np.ndarray
    iteration: int = 0

    @property
    def h_theta(self):
        return self.thetas[1] - self.thetas[0]

    def validate(self, problem):
        if self.thetas.shape != self.f.shape or self.thetas.size < 3:
            raise DomainError("front needs matching theta/f arrays with at least 3 nodes")
        if not np.all(np.isfinite(self.f)):
            raise DomainError("front radii must be finite")
        if np.any(self.f <= problem.r0) or np.any(self.f >= problem.r1):
            raise DomainError(f"front must lie strictly inside ({problem.r0!r}, {problem.r1!r})")


@dataclass(frozen=True)
class FbpConfig:
    nr: int = 128
    ntheta: int = 64
    picard_tol: float = 1e-10
    linear_tol: float = 1e-10
    front_tol: float = 1e-6
    omega: float = 1.0
    delta_clamp: float = 0.05
    max_outer: int = 60
    max_picard: int = 60

    def __post_init__(self):
        if self.nr < 4 or self.ntheta < 4:
            raise DomainError("grid needs at least 4 nodes in each direction")
        for name in ("picard_tol", "linear_tol", "front_tol"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be positive")
        if not 0 < self.omega <= 1:
            raise DomainError("omega must lie in (0, 1]")
        if not 0 < self.delta_clamp < 1:
            raise DomainError("delta_clamp must lie in (0, 1)")
        if self.max_outer < 1 or self.max_picard < 1:
            raise DomainError("iteration caps must be positive")


@dataclass
class SupersonicTrace:
    """Upstream data along the front: potential, speed and normal mass flux."""

    phi: np.ndarray
    v: np.ndarray
    flux: np.ndarray


@dataclass
class Field2D:
    """Subsonic potential on the mapped (s, theta) grid, with derived nodal quantities."""

    s: np.ndarray
    theta: np.ndarray
    r: np.ndarray
    phi: np.ndarray
    v_r: np.ndarray
    v_theta: np.ndarray
    speed: np.ndarray
    rho: np.ndarray
    flux_imbalance: float = 0.0
    linear_residual: float = 0.0
    picard_history: list = field(default_factory=list)

    @property
    def slip_residual(self):
        """max |d phi / d theta| on the two walls (v_theta * r)."""
        walls = np.concatenate((self.v_theta[:, 0] * self.r[:, 0], self.v_theta[:, -1] * self.r[:, -1]))
        return float(np.max(np.abs(walls)))


@dataclass
class ConvergenceReport:
    iterations: int = 0
    front_deviation: list = field(default_factory=list)
    front_movement: list = field(default_factory=list)
    dirichlet_mismatch: list = field(default_factory=list)
    flux_imbalance: list = field(default_factory=list)
    picard_iterations: list = field(default_factory=list)
    clipped: list = field(default_factory=list)
    h_violations: list = field(default_factory=list)
    final_field_residual: float = float("nan")
    perpendicularity: dict = field(default_factory=dict)
    uniqueness: dict = field(default_factory=dict)
    verdict: str = "max-iterations"
    fronts: list = field(default_factory=list, repr=False)

    def as_dict(self):
        return {
            "verdict": self.verdict,
            "iterations": self.iterations,
            "front_deviation": self.front_deviation,
            "front_movement": self.front_movement,
            "dirichlet_mismatch": self.dirichlet_mismatch,
            "flux_imbalance": self.flux_imbalance,
            "picard_iterations": self.picard_iterations,
            "clipped": self.clipped,
            "h_violations": self.h_violations,
            "final_field_residual": self.final_field_residual,
            "perpendicularity": self.perpendicularity,
            "uniqueness": self.uniqueness,
        }


def _require_2d(problem):
    if problem.dim != 2:
        raise DomainError("the free-boundary solver handles dim=2 wedges only")


def flat_front(problem, r_s, ntheta=64):
    ha = problem.geom.half_angle
    thetas = np.linspace(-ha, ha, ntheta)
    return ShockFront(thetas, np.full(ntheta, float(r_s)))


def perturb_front(problem, r_s, amplitude, mode=1, seed=None, ntheta=64):
    """Shock front r_s + perturbation, orthogonal to both walls.

    ``mode=k`` gives ``amplitude * cos(k pi theta / half_angle)``.  With
    ``mode=None`` a seeded random cosine series in the wall-adapted basis
    ``cos(k pi (theta + half_angle) / (2 half_angle))``, k = 1..6, with
    coefficients damped like 1/k^2, is scaled to peak ``amplitude``.
    Every basis function has zero slope at the walls.
    """
    _require_2d(problem)
    if amplitude < 0 or amplitude >= min(r_s - problem.r0, problem.r1 - r_s):
        raise DomainError(
            f"amplitude {amplitude!r} must be below min(r_s - r0, r1 - r_s) = "
            f"{min(r_s - problem.r0, problem.r1 - r_s)!r}"
        )
    front = flat_front(problem, r_s, ntheta)
    ha = problem.geom.half_angle
    th = front.thetas
    if mode is not None:
        if mode < 1:
            raise DomainError("cosine mode must be a positive integer")
        shape = np.cos(mode * math.pi * th / ha)
    else:
        if seed is None:
            raise DomainError("noise perturbation needs a seed")
        rng = np.random.default_rng(seed)
        k = np.arange(1, 7)
        coef = rng.standard_normal(k.size) / k**2
        shape = np.cos(np.outer(math.pi * (th + ha) / (2 * ha), k)) @ coef
        shape = shape / np.max(np.abs(shape))
    front.f = r_s + amplitude * shape
    front.validate(problem)
    return front


def supersonic_trace(problem, front):
    """Supersonic potential, speed and normal mass flux at each front node.

    For the radial upstream flow <grad phi^-, nu> is just v^-(f), so the
    Rankine-Hugoniot datum is rho^- v^- = a0 / f.
    """
    _require_2d(problem)
    front.validate(problem)
    v = branch_speed(problem, front.f, Branch.SUPERSONIC)
    flux = gas.mass_flux_density(problem.gas, v)
    return SupersonicTrace(supersonic_potential(problem, front.f), v, flux)


# ---------------------------------------------------------------------------
# Discretisation


class _Grid:
    """Geometry of the mapped rectangle for one front position."""

    def __init__(self, problem, front, nr):
        self.nr, self.nt = nr, front.f.size
        self.r1 = problem.r1
        self.s = np.linspace(0.0, 1.0, nr)
        self.ds = self.s[1] - self.s[0]
        self.dt = front.h_theta
        self.theta = front.thetas
        self.f = front.f
        self.L = self.r1 - self.f
        self.fp = np.gradient(self.f, self.dt, edge_order=2)
        self.r = self.f[None, :] + self.s[:, None] * self.L[None, :]
        self.ws = np.full(nr, self.ds)
        self.ws[[0, -1]] *= 0.5
        self.wt = np.full(self.nt, self.dt)
        self.wt[[0, -1]] *= 0.5
        self.idx = np.arange(nr * self.nt).reshape(nr, self.nt)

    def gradients(self, phi):
        """Physical (phi_r, phi_theta) at the nodes, one-sided at the edges."""
        phi_s = np.gradient(phi, self.ds, axis=0, edge_order=2)
        phi_t = np.gradient(phi, self.dt, axis=1, edge_order=2)
        q = self.fp[None, :] * (1.0 - self.s[:, None])
        phi_r = phi_s / self.L[None, :]
        phi_theta = phi_t - phi_s * q / self.L[None, :]
        return phi_r, phi_theta

    def speed(self, phi):
        phi_r, phi_theta = self.gradients(phi)
        return np.hypot(phi_r, phi_theta / self.r), phi_r, phi_theta


def _coo(rows, cols, vals, shape):
    return sp.coo_matrix(
        (np.concatenate([v.ravel() for v in vals]),
         (np.concatenate([r.ravel() for r in rows]), np.concatenate([c.ravel() for c in cols]))),
        shape=shape,
    ).tocsr()


def _flux_operators(grid, rho):
    """Sparse maps from nodal phi to the s-face and theta-face fluxes.

    Returns (Fs, Ft): Fs has one row per face between s-nodes i and i+1
    (ordered i-major), Ft one row per face between theta-nodes j and j+1.
    """
    nr, nt, ds, dt = grid.nr, grid.nt, grid.ds, grid.dt
    idx = grid.idx
    N = nr * nt

    # s-faces (i+1/2, j)
    sf = 0.5 * (grid.s[:-1] + grid.s[1:])[:, None]
    L = grid.L[None, :]
    r_f = grid.f[None, :] + sf * L
    q = grid.fp[None, :] * (1.0 - sf)
    rho_f = 0.5 * (rho[:-1] + rho[1:])
    alpha = rho_f * (r_f / L + q * q / (r_f * L))
    beta = rho_f * q / r_f
    # on the walls phi_theta = 0 removes the cross term
    alpha[:, [0, -1]] = (rho_f * r_f / L)[:, [0, -1]]
    beta[:, [0, -1]] = 0.0
    face = np.arange((nr - 1) * nt).reshape(nr - 1, nt)
    rows, cols, vals = [face, face], [idx[1:], idx[:-1]], [alpha / ds, -alpha / ds]
    jc = slice(1, nt - 1)
    for ii in (slice(0, nr - 1), slice(1, nr)):
        b4 = -beta[:, jc] / (4.0 * dt)
        rows += [face[:, jc], face[:, jc]]
        cols += [idx[ii, 2:], idx[ii, :-2]]
        vals += [b4, -b4]
    Fs = _coo(rows, cols, vals, ((nr - 1) * nt, N))

    # theta-faces (i, j+1/2)
    f_f = 0.5 * (grid.f[:-1] + grid.f[1:])[None, :]
    L_f = grid.r1 - f_f
    k = (np.diff(grid.f) / dt)[None, :]
    qt = k * (1.0 - grid.s[:, None])
    rt_f = f_f + grid.s[:, None] * L_f
    rho_t = 0.5 * (rho[:, :-1] + rho[:, 1:])
    a_t = rho_t * L_f / rt_f
    b_t = rho_t * qt / rt_f
    tface = np.arange(nr * (nt - 1)).reshape(nr, nt - 1)
    rows = [tface, tface]
    cols = [idx[:, 1:], idx[:, :-1]]
    vals = [a_t / dt, -a_t / dt]
    # nodal d/ds stencils: centred inside, second-order one-sided at s=0 and s=1
    ds_stencil = {i: ((i - 1, -0.5 / ds), (i + 1, 0.5 / ds)) for i in range(1, nr - 1)}
    ds_stencil[0] = ((0, -1.5 / ds), (1, 2.0 / ds), (2, -0.5 / ds))
    ds_stencil[nr - 1] = ((nr - 1, 1.5 / ds), (nr - 2, -2.0 / ds), (nr - 3, 0.5 / ds))
    ii = np.arange(nr)
    for side in (0, 1):
        jj = np.arange(nt - 1) + side
        for slot in range(3):
            present = np.array([slot < len(ds_stencil[i]) for i in ii])
            src = np.array([ds_stencil[i][slot][0] if slot < len(ds_stencil[i]) else 0 for i in ii])
            w = np.array([ds_stencil[i][slot][1] if slot < len(ds_stencil[i]) else 0.0 for i in ii])
            coeff = -0.5 * b_t * (w * present)[:, None]
            rows.append(tface)
            cols.append(idx[src[:, None], jj[None, :]])
            vals.append(coeff)
    Ft = _coo(rows, cols, vals, (nr * (nt - 1), N))
    return Fs, Ft


def _divergence(grid):
    """Signed, width-weighted incidence from face fluxes to cell balances."""
    nr, nt, idx = grid.nr, grid.nt, grid.idx
    N = nr * nt
    face = np.arange((nr - 1) * nt).reshape(nr - 1, nt)
    wt = np.broadcast_to(grid.wt[None, :], (nr - 1, nt))
    Ms = _coo([idx[:-1], idx[1:]], [face, face], [wt, -wt], (N, (nr - 1) * nt))
    tface = np.arange(nr * (nt - 1)).reshape(nr, nt - 1)
    ws = np.broadcast_to(grid.ws[:, None], (nr, nt - 1))
    Mt = _coo([idx[:, :-1], idx[:, 1:]], [tface, tface], [ws, -ws], (N, nr * (nt - 1)))
    return Ms, Mt


def _exit_flux(problem, grid, phi, v1):
    """Exit flux r1 rho(v1^2) phi_r with phi_r = sqrt(v1^2 - (phi_theta/r1)^2), phi_r >= 0."""
    _, phi_theta = grid.gradients(phi)
    tang = phi_theta[-1] / problem.r1
    normal = np.sqrt(np.maximum(0.0, v1 * v1 - tang * tang))
    return problem.r1 * gas.density_from_speed(problem.gas, v1) * normal


def _clamped_density(problem, grid, phi, delta_clamp):
    speed, _, _ = grid.speed(phi)
    cap = (1.0 - delta_clamp) * gas.critical_speed(problem.gas)
    return np.asarray(gas.density_from_speed(problem.gas, np.minimum(speed, cap)))


def _assemble(problem, grid, rho, front_flux, exit_flux, phi_minus):
    Fs, Ft = _flux_operators(grid, rho)
    Ms, Mt = _divergence(grid)
    A = (Ms @ Fs + Mt @ Ft).tocsr()
    N = grid.nr * grid.nt
    b = np.zeros(N)
    b[grid.idx[0]] += grid.wt * front_flux
    b[grid.idx[-1]] -= grid.wt * exit_flux
    source = np.outer(grid.ws, grid.wt).ravel()
    gauge = np.zeros(N)
    gauge[grid.idx[0]] = grid.wt
    K = sp.bmat([[A, sp.csr_matrix(source[:, None])], [sp.csr_matrix(gauge[None, :]), None]], format="csc")
    rhs = np.concatenate((b, [grid.wt @ phi_minus]))
    return K, rhs, A, b, source


def _solve_linear(K, rhs, linear_tol):
    with np.errstate(all="raise"):
        try:
            x = spsolve(K, rhs)
        except (FloatingPointError, RuntimeError) as exc:
            raise LinearSolverError(f"sparse solve failed: {exc}") from exc
    if not np.all(np.isfinite(x)):
        raise LinearSolverError("sparse solve returned non-finite values")
    resid = float(np.max(np.abs(K @ x - rhs)) / max(np.max(np.abs(rhs)), 1e-300))
    if resid > linear_tol:
        raise LinearSolverError(f"linear residual {resid:.3e} exceeds linear_tol={linear_tol:g}")
    return x, resid


def _make_field(problem, grid, phi, rho, imbalance, resid, history):
    speed, phi_r, phi_theta = grid.speed(phi)
    return Field2D(
        s=grid.s, theta=grid.theta, r=grid.r, phi=phi, v_r=phi_r, v_theta=phi_theta / grid.r,
        speed=speed, rho=np.asarray(gas.density_from_speed(problem.gas, np.minimum(speed, gas.max_speed(problem.gas)))),
        flux_imbalance=imbalance, linear_residual=resid, picard_history=list(history),
    )


def initial_potential(problem, front, trace, nr):
    """Linear-in-r guess leaving the front with the local normal-shock speed."""
    s = np.linspace(0.0, 1.0, nr)
    v_plus = rh_jump(problem.gas, trace.v)
    return trace.phi[None, :] + v_plus[None, :] * s[:, None] * (problem.r1 - front.f)[None, :]


def solve_subsonic(problem, front, v1, config=FbpConfig(), initial=None, trace=None):
    """Picard iteration with frozen density for the subsonic flow behind ``front``.

    Each sweep evaluates rho from the previous iterate, with the speed
    clamped to ``(1 - delta_clamp) c*``, rebuilds the exit flux from the
    previous tangential velocity, and solves the linear conservative
    system directly.

    Raises:
        ConvergenceError: if successive iterates still differ by more than
            ``picard_tol`` (relative to the potential scale) after
            ``max_picard`` sweeps; carries the difference history.
        LinearSolverError: if a linear solve fails or misses ``linear_tol``.
    """
    _require_2d(problem)
    front.validate(problem)
    trace = supersonic_trace(problem, front) if trace is None else trace
    grid = _Grid(problem, front, config.nr)
    phi = initial_potential(problem, front, trace, config.nr) if initial is None else np.array(initial, float)
    front_flux = front.f * trace.flux
    history = []
    for _ in range(config.max_picard):
        rho = _clamped_density(problem, grid, phi, config.delta_clamp)
        exit_flux = _exit_flux(problem, grid, phi, v1)
        K, rhs, _, _, source = _assemble(problem, grid, rho, front_flux, exit_flux, trace.phi)
        x, resid = _solve_linear(K, rhs, config.linear_tol)
        new = x[:-1].reshape(grid.nr, grid.nt)
        change = float(np.max(np.abs(new - phi)) / max(1.0, np.max(np.abs(new))))
        history.append(change)
        phi = new
        if change < config.picard_tol:
            imbalance = float(x[-1] * source.sum())
            return _make_field(problem, grid, phi, rho, imbalance, resid, history)
    raise ConvergenceError(
        f"Picard iteration stagnated after {config.max_picard} sweeps (last change {history[-1]:.3e})",
        history=history,
    )


def field_residual(problem, front, field, v1, trace, config=FbpConfig()):
    """Nonlinear residual of the discrete balance with rho taken from ``field`` itself."""
    grid = _Grid(problem, front, config.nr)
    rho = _clamped_density(problem, grid, field.phi, config.delta_clamp)
    exit_flux = _exit_flux(problem, grid, field.phi, v1)
    _, _, A, b, source = _assemble(problem, grid, rho, front.f * trace.flux, exit_flux, trace.phi)
    lam = field.flux_imbalance / source.sum()
    return float(np.max(np.abs(A @ field.phi.ravel() + lam * source - b)) / np.max(np.abs(b)))


def front_update(problem, front, field, trace, omega=1.0, nr=None):
    """Newton step of the front on the Dirichlet mismatch phi^- - phi^+.

    The mismatch grows with the front radius at rate
    ``d phi^-/dr - d phi^+/dr > 0``, so a positive mismatch pulls the
    front inward.  The slope is floored at ``1e-6 c*`` and the new radii
    are clipped to ``[r0 + h_r, r1 - h_r]``.

    Returns:
        (new ShockFront, info dict with ``mismatch`` and ``clipped``).
    """
    nr = field.s.size if nr is None else nr
    cs = gas.critical_speed(problem.gas)
    mismatch = trace.phi - field.phi[0]
    slope = np.maximum(trace.v - field.v_r[0], 1e-6 * cs)
    f_new = front.f - omega * mismatch / slope
    h_r = (problem.r1 - problem.r0) / (nr - 1)
    lo, hi = problem.r0 + h_r, problem.r1 - h_r
    clipped = bool(np.any(f_new < lo) or np.any(f_new > hi))
    f_new = np.clip(f_new, lo, hi)
    info = {"mismatch": float(np.max(np.abs(mismatch))), "clipped": clipped}
    return ShockFront(front.thetas.copy(), f_new, front.iteration + 1), info


def check_perpendicularity(front, front_tol):
    """One-sided slopes f'(+-half_angle); the front should meet each wall at a right angle."""
    f, h = front.f, front.h_theta
    lo = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h)
    hi = (3.0 * f[-1] - 4.0 * f[-2] + f[-3]) / (2.0 * h)
    threshold = 10.0 * front_tol / h
    return {
        "slope_lower_wall": float(abs(lo)),
        "slope_upper_wall": float(abs(hi)),
        "threshold": float(threshold),
        "passed": bool(abs(lo) <= threshold and abs(hi) <= threshold),
    }


def check_uniqueness(problem, front, field, reference, trace=None, nr=None):
    """Deviation of a computed front/field from a symmetric reference solution.

    The reference subsonic branch is continued over every node radius so
    the speed comparison is defined even where the front sits ahead of
    the reference shock.
    """
    nr = field.s.size if nr is None else nr
    h_r = (problem.r1 - problem.r0) / (nr - 1)
    dev = float(np.max(np.abs(front.f - reference.r_s)))
    a_ref = reference.problem.area_factor(reference.r_s) * gas.mass_flux_density(reference.problem.gas, reference.v_plus)
    try:
        ref_speed = branch_speed(problem, field.r, Branch.SUBSONIC, float(a_ref))
    except Exception:  # reference flux not realisable in this nozzle
        ref_speed = np.full_like(field.speed, np.nan)
    rel = np.abs(field.speed - ref_speed) / ref_speed
    trace = supersonic_trace(problem, front) if trace is None else trace
    exit_err = float(np.max(np.abs(field.speed[-1] - reference.v1)) / reference.v1)
    linf = float(np.max(rel)) if np.all(np.isfinite(rel)) else float("inf")
    metrics = {
        "front_deviation": dev,
        "front_deviation_cells": dev / h_r,
        "front_threshold": 2.0 * (problem.r1 - problem.r0) / nr,
        "speed_rel_linf": linf,
        "speed_rel_l2": float(np.sqrt(np.mean(rel**2))) if np.all(np.isfinite(rel)) else float("inf"),
        "exit_speed_rel_error": exit_err,
        "dirichlet_mismatch": float(np.max(np.abs(trace.phi - field.phi[0]))),
        "max_speed_over_critical": float(np.max(field.speed) / gas.critical_speed(problem.gas)),
    }
    metrics["within_thresholds"] = bool(
        dev <= metrics["front_threshold"] and linf <= 0.01 and exit_err <= 0.01
    )
    return metrics


def _check_exit_speed(problem, v1):
    try:
        interval = admissible_interval(problem)
    except DegenerateIntervalError as exc:
        raise OutOfIntervalError(
            f"v1={v1!r} is outside the admissible interval I, which is empty: {exc}", exc.v_lo, exc.v_hi
        ) from exc
    if v1 not in interval:
        raise OutOfIntervalError(
            f"v1={v1!r} outside the admissible interval I=({interval.v_lo!r}, {interval.v_hi!r})",
            interval.v_lo, interval.v_hi,
        )


def run_fbp(problem, v1, front, config=FbpConfig(), reference=None):
    """Alternate subsonic solves and front updates until the front stops moving.

    Args:
        problem: dim=2 RadialProblem.
        v1: Exit speed.
        front: Initial ShockFront.
        config: FbpConfig.
        reference: Symmetric solution to measure against.  When omitted,
            v1 must lie strictly inside the admissible interval and the
            reference is ``find_shock(problem, v1)``.  When given, its exit
            speed must equal v1 and the interval check is skipped.

    Returns:
        (final ShockFront, Field2D on it, ConvergenceReport).

    Raises:
        OutOfIntervalError: before any solve, if v1 is not admissible.
    """
    _require_2d(problem)
    front.validate(problem)
    if front.f.size != config.ntheta:
        raise DomainError(f"front has {front.f.size} nodes, config expects ntheta={config.ntheta}")
    if reference is None:
        _check_exit_speed(problem, v1)
        reference = find_shock(problem, v1)
    elif abs(reference.v1 - v1) > 1e-9 * max(1.0, v1):
        raise DomainError(f"reference exit speed {reference.v1!r} does not match v1={v1!r}")

    report = ConvergenceReport(fronts=[front])
    trace = supersonic_trace(problem, front)
    field = solve_subsonic(problem, front, v1, config, trace=trace)
    clip_streak = 0
    for k in range(config.max_outer):
        new_front, info = front_update(problem, front, field, trace, config.omega, config.nr)
        move = float(np.max(np.abs(new_front.f - front.f)))
        report.iterations = k + 1
        report.front_movement.append(move)
        report.dirichlet_mismatch.append(info["mismatch"])
        report.clipped.append(info["clipped"])
        report.flux_imbalance.append(field.flux_imbalance)
        report.picard_iterations.append(len(field.picard_history))
        report.h_violations.append(int(np.count_nonzero(field.v_r < 0)))
        report.front_deviation.append(float(np.max(np.abs(new_front.f - reference.r_s))))
        front = new_front
        report.fronts.append(front)
        clip_streak = clip_streak + 1 if info["clipped"] else 0
        if not np.all(np.isfinite(front.f)) or clip_streak >= 3:
            report.verdict = "diverged"
            break
        trace = supersonic_trace(problem, front)
        field = solve_subsonic(problem, front, v1, config, initial=field.phi, trace=trace)
        if move < config.front_tol:
            report.verdict = "converged"
            break

    report.final_field_residual = field_residual(problem, front, field, v1, trace, config)
    if report.verdict == "converged":
        report.perpendicularity = check_perpendicularity(front, config.front_tol)
        report.uniqueness = check_uniqueness(problem, front, field, reference, trace, config.nr)
    return front, field, report
