"""Polytropic closure for steady potential flow.

All quantities are nondimensional: the state with unit density has
pressure ``1/gamma`` and unit sound speed.  Every function accepts a
scalar or a numpy array of speeds/densities and returns the same shape.
"""
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

GAMMA_MIN_GAP = 1e-6
# Relative slack for speeds that land a few ulps past max_speed.
_SPEED_SLACK = 8 * np.finfo(float).eps


@dataclass(frozen=True)
class GasModel:
    """Adiabatic exponent and Bernoulli constant of the flow."""

    gamma: float = 1.4
    b0: float = 2.5

    def __post_init__(self):
        if not np.isfinite(self.gamma) or self.gamma < 1.0 + GAMMA_MIN_GAP:
            raise DomainError(
                f"gamma must be >= 1 + {GAMMA_MIN_GAP:g}, got {self.gamma!r}"
            )
        if not np.isfinite(self.b0) or 1.0 + (self.gamma - 1.0) * self.b0 <= 0.0:
            raise DomainError(
                f"need 1 + (gamma-1)*b0 > 0, got gamma={self.gamma!r}, b0={self.b0!r}"
            )


def _as_float(x):
    arr = np.asarray(x, dtype=float)
    return arr if arr.ndim else float(arr)


def _check_speed(model, v):
    vmax = max_speed(model)
    arr = np.asarray(v, dtype=float)
    if np.any(~np.isfinite(arr)) or np.any(arr < 0.0) or np.any(arr > vmax * (1 + _SPEED_SLACK)):
        raise DomainError(f"speed outside admissible range [0, {vmax!r}]")
    return arr


def _check_density(rho):
    arr = np.asarray(rho, dtype=float)
    if np.any(~np.isfinite(arr)) or np.any(arr < 0.0):
        raise DomainError("density must be finite and non-negative")
    return arr


def _enthalpy_base(model, v):
    # 1 + (gamma-1)(b0 - v^2/2) == c^2; clipped at vacuum.
    base = 1.0 + (model.gamma - 1.0) * (model.b0 - 0.5 * v * v)
    return np.maximum(base, 0.0)


def density_from_speed(model, v):
    """Density from speed through the Bernoulli law.

    Args:
        model: GasModel.
        v: Flow speed(s) in ``[0, max_speed(model)]``.

    Returns:
        rho = (1 + (gamma-1)(b0 - v^2/2))**(1/(gamma-1)).

    Raises:
        DomainError: if any speed is negative or exceeds the vacuum speed.
    """
    v = _check_speed(model, v)
    return _as_float(_enthalpy_base(model, v) ** (1.0 / (model.gamma - 1.0)))


def pressure(model, rho):
    """p = rho**gamma / gamma."""
    rho = _check_density(rho)
    return _as_float(rho ** model.gamma / model.gamma)


def sound_speed(model, rho):
    """c = rho**((gamma-1)/2)."""
    rho = _check_density(rho)
    return _as_float(rho ** (0.5 * (model.gamma - 1.0)))


def critical_speed(model):
    """Speed at which the flow is exactly sonic; the elliptic/hyperbolic threshold."""
    g = model.gamma
    return float(np.sqrt(2.0 / (g + 1.0) * (1.0 + (g - 1.0) * model.b0)))


def max_speed(model):
    """Vacuum speed, where the density vanishes."""
    return float(np.sqrt(2.0 * (model.b0 + 1.0 / (model.gamma - 1.0))))


def mass_flux_density(model, v):
    """Mass flux per unit area, rho(v^2) * v; unimodal with its peak at the critical speed."""
    v = _check_speed(model, v)
    return _as_float(_enthalpy_base(model, v) ** (1.0 / (model.gamma - 1.0)) * v)


def mass_flux_derivative(model, v):
    """d(rho v)/dv = rho (1 - v^2/c^2) = rho - v^2 rho^(2-gamma)."""
    v = _check_speed(model, v)
    base = _enthalpy_base(model, v)
    rho = base ** (1.0 / (model.gamma - 1.0))
    # rho / c^2 written without dividing by c^2, which vanishes at vacuum
    rho_over_c2 = base ** ((2.0 - model.gamma) / (model.gamma - 1.0))
    return _as_float(rho - v * v * rho_over_c2)


def bernoulli_residual(model, v, rho):
    """Relative residual of v^2/2 + (rho^(gamma-1) - 1)/(gamma-1) = b0.

    Normalised by the total energy scale ``max_speed**2 / 2`` so that
    it is meaningful for negative or tiny ``b0``.
    """
    g = model.gamma
    v = np.asarray(v, dtype=float)
    rho = np.asarray(rho, dtype=float)
    lhs = 0.5 * v * v + (rho ** (g - 1.0) - 1.0) / (g - 1.0)
    return _as_float(np.abs(lhs - model.b0) / (0.5 * max_speed(model) ** 2))


def mach_number(model, v):
    """v / c(rho(v^2)); infinite at the vacuum speed."""
    rho = np.asarray(density_from_speed(model, v))
    c = np.asarray(sound_speed(model, rho))
    with np.errstate(divide="ignore"):
        return _as_float(np.where(c > 0, np.asarray(v, dtype=float) / np.where(c > 0, c, 1.0), np.inf))
