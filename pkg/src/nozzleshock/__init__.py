"""Transonic shocks of steady potential flow in straight divergent nozzles."""
from .gas import GasModel, critical_speed, density_from_speed, mass_flux_density, max_speed, pressure, sound_speed
from .radial import (
    AdmissibleInterval,
    Branch,
    NozzleGeometry,
    RadialProblem,
    RadialProfile,
    TransonicShockSolution,
    admissible_interval,
    branch_speed,
    exit_velocity,
    find_shock,
    rh_jump,
    shock_solution_at,
    subsonic_profile_from_shock,
    supersonic_profile,
    verify_lemma1,
)

__version__ = "0.1.0"
