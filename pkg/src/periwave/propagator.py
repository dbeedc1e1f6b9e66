"""Exact spectral propagators and a Stormer-Verlet integrator.

Each Fourier mode of ``u_tt = -omega(xi)^2 u`` evolves as

    u(t) = cos(omega t) u0 + sin(omega t) / omega * v0
    v(t) = -omega sin(omega t) u0 + cos(omega t) v0

with ``omega = omega_delta(|xi|)`` for peridynamics and ``gamma |xi|`` for the
classical wave equation.
"""
import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, DomainError
from .grid import EvolutionState, SpectralField, dft_forward, dft_inverse
from .kernel import DEFAULT_TOL, gamma_constant, omega_delta
from .stencil import apply_K_delta, discrete_symbol_grid

SINC_SERIES_THRESHOLD = 1e-4


class SymbolChoice(str, enum.Enum):
    CONTINUUM = "continuum"
    DISCRETE = "discrete"


def continuum_frequencies(params, grid, tol=DEFAULT_TOL):
    """``omega_delta(|xi_k|)`` on the lattice, one quadrature per distinct radius."""
    norms = grid.xi_norm
    radii, inverse = np.unique(np.round(norms, 12), return_inverse=True)
    values = np.array([omega_delta(params, r, tol) for r in radii])
    return values[inverse].reshape(norms.shape)


@dataclass(frozen=True, eq=False)
class Peridynamics:
    """Peridynamic evolution with either the continuum or the lattice symbol."""

    params: object
    choice: SymbolChoice = SymbolChoice.CONTINUUM
    kernel: object = None
    tol: float = DEFAULT_TOL
    _cache: dict = field(default_factory=dict, repr=False)

    @classmethod
    def continuum(cls, params, tol=DEFAULT_TOL):
        return cls(params, SymbolChoice.CONTINUUM, None, tol)

    @classmethod
    def discrete(cls, kernel):
        return cls(kernel.params, SymbolChoice.DISCRETE, kernel)

    def frequencies(self, grid):
        if grid not in self._cache:
            if self.choice is SymbolChoice.DISCRETE:
                if self.kernel is None or self.kernel.grid != grid:
                    raise ConfigurationError("discrete symbol belongs to a different grid")
                omega = np.sqrt(np.maximum(discrete_symbol_grid(self.kernel), 0.0))
            else:
                if self.params.d != grid.d:
                    raise ConfigurationError("model and grid dimensions differ")
                omega = continuum_frequencies(self.params, grid, self.tol)
            omega.setflags(write=False)
            self._cache[grid] = omega
        return self._cache[grid]

    def describe(self):
        return {"kind": "peridynamics", "symbol": self.choice.value, **self.params.as_dict()}


@dataclass(frozen=True, eq=False)
class ClassicalWave:
    """Wave equation ``u_tt = gamma^2 Laplace u``."""

    gamma: float

    def __post_init__(self):
        if not self.gamma > 0:
            raise ConfigurationError("wave speed gamma must be positive")

    @classmethod
    def from_params(cls, params, tol=DEFAULT_TOL):
        return cls(gamma_constant(params, tol))

    def frequencies(self, grid):
        return self.gamma * grid.xi_norm

    def describe(self):
        return {"kind": "wave", "gamma": self.gamma}


def sin_over_omega(omega, t):
    """``sin(omega t) / omega`` with the ``omega -> 0`` limit ``t``.

    A three-term series is used where ``|omega t| < SINC_SERIES_THRESHOLD``.
    """
    omega = np.asarray(omega, dtype=float)
    z = omega * t
    small = np.abs(z) < SINC_SERIES_THRESHOLD
    safe = np.where(small, 1.0, omega)
    z2 = z * z
    series = t * (1.0 - z2 / 6.0 * (1.0 - z2 / 20.0))
    return np.where(small, series, np.sin(z) / safe)


def _multipliers(omega, t):
    c = np.cos(omega * t)
    s = sin_over_omega(omega, t)
    ws = omega * np.sin(omega * t)
    return c, s, ws


def evolve(kind, state0, t):
    """Exact mode-wise evolution of ``state0`` by time ``t >= 0``."""
    if not t >= 0:
        raise DomainError("evolution time must be nonnegative")
    state0.check_hermitian()
    omega = kind.frequencies(state0.grid)
    c, s, ws = _multipliers(omega, t)
    u0, v0 = state0.u_hat.coeffs, state0.v_hat.coeffs
    grid = state0.grid
    u = c * u0 + s * v0
    v = -ws * u0 + c * v0
    return EvolutionState(SpectralField(grid, u), SpectralField(grid, v), state0.time + t)


def trajectory(kind, state0, times):
    """States at each requested elapsed time (all relative to ``state0``)."""
    return [evolve(kind, state0, t) for t in times]


def flow_composition_check(kind, state0, t, s):
    """Max deviation between ``evolve(t + s)`` and ``evolve(evolve(t), s)``,
    relative to the largest coefficient involved."""
    direct = evolve(kind, state0, t + s)
    stepped = evolve(kind, evolve(kind, state0, t), s)
    scale = max(np.max(np.abs(direct.u_hat.coeffs)), np.max(np.abs(direct.v_hat.coeffs)),
                np.max(np.abs(state0.u_hat.coeffs)), np.max(np.abs(state0.v_hat.coeffs)))
    if scale == 0:
        return 0.0
    dev = max(np.max(np.abs(direct.u_hat.coeffs - stepped.u_hat.coeffs)),
              np.max(np.abs(direct.v_hat.coeffs - stepped.v_hat.coeffs)))
    return float(dev / scale)


def max_stable_step(kind, grid):
    """Largest step with ``dt * max omega <= 2``."""
    wmax = float(np.max(kind.frequencies(grid)))
    return math.inf if wmax == 0 else 2.0 / wmax


def leapfrog_evolve(kind, state0, t_final, n_steps, force="spectral"):
    """Velocity-Verlet (kick-drift-kick) integration up to ``t_final``.

    ``force="spectral"`` multiplies by ``-omega^2`` mode-wise;
    ``force="realspace"`` integrates grid samples with the lattice stencil
    (requires a discrete-symbol :class:`Peridynamics`). Steps violating
    ``dt * max omega <= 2`` are refused.
    """
    if n_steps < 1:
        raise ConfigurationError("n_steps must be at least 1")
    if not t_final >= 0:
        raise DomainError("final time must be nonnegative")
    state0.check_hermitian()
    grid = state0.grid
    dt = t_final / n_steps
    if dt > max_stable_step(kind, grid):
        raise ConfigurationError(
            f"time step {dt:.3e} violates dt * max(omega) <= 2 "
            f"(max stable step {max_stable_step(kind, grid):.3e})")
    if force == "spectral":
        omega2 = kind.frequencies(grid) ** 2

        def accel(u):
            return -omega2 * u

        u = state0.u_hat.coeffs.copy()
        v = state0.v_hat.coeffs.copy()
    elif force == "realspace":
        kernel = getattr(kind, "kernel", None)
        if kernel is None or kernel.grid != grid:
            raise ConfigurationError("real-space force needs a discrete-symbol propagator")

        def accel(u):
            return apply_K_delta(kernel, u)

        u = dft_inverse(state0.u_hat)
        v = dft_inverse(state0.v_hat)
    else:
        raise ConfigurationError(f"unknown force path {force!r}")

    a = accel(u)
    for _ in range(n_steps):
        v = v + 0.5 * dt * a
        u = u + dt * v
        a = accel(u)
        v = v + 0.5 * dt * a

    if force == "realspace":
        u_hat, v_hat = dft_forward(grid, u), dft_forward(grid, v)
    else:
        u_hat, v_hat = SpectralField(grid, u), SpectralField(grid, v)
    return EvolutionState(u_hat, v_hat, state0.time + t_final)
