"""Fourier-weighted Sobolev norms, the peridynamic seminorm and total energies.

Every sum over modes carries the grid's dual measure ``(2 pi / L)^d``, so
``h_s_norm(f, 0)`` equals the discrete L2 norm of the samples.
"""
import enum
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .propagator import ClassicalWave, Peridynamics


class EnergyKind(str, enum.Enum):
    PERIDYNAMIC = "peridynamic"
    WAVE = "wave"


@dataclass(frozen=True)
class EnergyReport:
    kinetic: float
    potential: float
    total: float
    kind: EnergyKind
    time: float


def _weighted_sum(field, weight):
    power = np.sum(np.abs(field.coeffs) ** 2, axis=0)
    return float(np.sum(weight * power)) * field.grid.dual_measure


def h_s_norm(field, s):
    """``( sum (1 + |xi|^2)^s |F|^2 dxi )^(1/2)`` summed over components."""
    s = float(s)
    weight = (1.0 + field.grid.xi_norm ** 2) ** s
    return float(np.sqrt(_weighted_sum(field, weight)))


def spectral_gradient(field):
    """Coefficients of ``d u_i / d x_j`` as an array ``(d, d, n, ..., n)``.

    Nyquist modes are zeroed (their derivative is not real-representable).
    """
    grid = field.grid
    mult = 1j * grid.xi * ~grid.nyquist_mask[None]
    return field.coeffs[:, None] * mult[None]


def _frequencies(source, grid):
    if isinstance(source, (Peridynamics, ClassicalWave)):
        return source.frequencies(grid)
    omega = np.asarray(source, dtype=float)
    if omega.shape != grid.shape:
        raise ConfigurationError("dispersion array does not match the grid")
    return omega


def w_delta_seminorm(field, source):
    """``|| omega u_hat ||`` with ``omega`` from a propagator or an array."""
    omega = _frequencies(source, field.grid)
    return float(np.sqrt(_weighted_sum(field, omega ** 2)))


def energy(state, kind):
    """Kinetic, potential and total energy of ``state``.

    A :class:`Peridynamics` kind gives ``1/2 ||v||^2 + 1/2 [u]_W^2``; a
    :class:`ClassicalWave` kind gives ``1/2 ||v||^2 + gamma^2/2 ||grad u||^2``.
    """
    grid = state.grid
    kinetic = 0.5 * _weighted_sum(state.v_hat, 1.0)
    if isinstance(kind, Peridynamics):
        potential = 0.5 * _weighted_sum(state.u_hat, kind.frequencies(grid) ** 2)
        label = EnergyKind.PERIDYNAMIC
    elif isinstance(kind, ClassicalWave):
        potential = 0.5 * kind.gamma ** 2 * _weighted_sum(state.u_hat, grid.xi_norm ** 2)
        label = EnergyKind.WAVE
    else:
        raise ConfigurationError(f"unknown energy kind {kind!r}")
    return EnergyReport(kinetic, potential, kinetic + potential, label, state.time)


def solution_gap(state_a, state_b, s):
    """``(||u_a - u_b||_{H^s}, ||v_a - v_b||_{H^(s-1)})``."""
    if state_a.grid != state_b.grid:
        raise ConfigurationError("states live on different grids")
    if not np.isclose(state_a.time, state_b.time, rtol=1e-12, atol=1e-12):
        raise ConfigurationError("states are at different times")
    du = state_a.u_hat - state_b.u_hat
    dv = state_a.v_hat - state_b.v_hat
    return h_s_norm(du, s), h_s_norm(dv, s - 1.0)


def l2_norm(field):
    return h_s_norm(field, 0.0)
