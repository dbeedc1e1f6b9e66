"""Periodic box discretization and the unitary-style discrete Fourier pair.

Forward transform of samples ``f(x_j)`` on the cubic box ``[0, L)^d``::

    F(xi_k) = h^d / (2 pi)^(d/2) * sum_j f(x_j) exp(-i xi_k . x_j)

and the inverse carries ``(2 pi)^(d/2) / L^d``. With the dual measure
``(2 pi / L)^d`` this makes ``sum |f|^2 h^d == sum |F|^2 (2 pi / L)^d``,
the discrete counterpart of Plancherel's identity.

Frequency arrays use numpy's FFT ordering; the Nyquist index is labelled
``+n/2``.
"""
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import ConfigurationError, InvariantError

HERMITIAN_TOL = 1e-13
IMAG_TOL = 1e-12


@dataclass(frozen=True)
class GridSpec:
    """Cubic periodic box with ``n`` points per axis in ``d`` dimensions."""

    d: int
    box_length: float
    n: int

    def __post_init__(self):
        if self.d not in (1, 2, 3):
            raise ConfigurationError(f"grid dimension must be 1, 2 or 3, got {self.d!r}")
        if not self.box_length > 0:
            raise ConfigurationError("box_length must be positive")
        n = int(self.n)
        if n < 8 or n & (n - 1):
            raise ConfigurationError(f"n must be a power of two >= 8, got {self.n!r}")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "d", int(self.d))
        object.__setattr__(self, "box_length", float(self.box_length))

    @property
    def h(self):
        return self.box_length / self.n

    @property
    def shape(self):
        return (self.n,) * self.d

    @property
    def cell_volume(self):
        return self.h ** self.d

    @property
    def dual_measure(self):
        return (2.0 * math.pi / self.box_length) ** self.d

    @property
    def nyquist_radius(self):
        return math.pi * self.n / self.box_length

    @property
    def forward_scale(self):
        return self.cell_volume / (2.0 * math.pi) ** (self.d / 2.0)

    @cached_property
    def lattice_indices(self):
        """Signed integer labels ``k`` per axis, Nyquist as ``+n/2``."""
        k = np.fft.fftfreq(self.n, 1.0 / self.n).astype(int)
        k[self.n // 2] = self.n // 2
        return k

    @cached_property
    def axis_wavenumbers(self):
        return 2.0 * math.pi / self.box_length * self.lattice_indices

    @cached_property
    def xi(self):
        """Frequency vectors, shape ``(d, n, ..., n)``."""
        out = np.stack(np.meshgrid(*([self.axis_wavenumbers] * self.d), indexing="ij"))
        out.setflags(write=False)
        return out

    @cached_property
    def xi_norm(self):
        out = np.sqrt(np.sum(self.xi ** 2, axis=0))
        out.setflags(write=False)
        return out

    @cached_property
    def nyquist_mask(self):
        """True on modes with at least one Nyquist component."""
        idx = np.stack(np.meshgrid(*([self.lattice_indices] * self.d), indexing="ij"))
        out = np.any(idx == self.n // 2, axis=0)
        out.setflags(write=False)
        return out

    @cached_property
    def coordinates(self):
        """Sample positions, shape ``(d, n, ..., n)``."""
        x = np.arange(self.n) * self.h
        return np.stack(np.meshgrid(*([x] * self.d), indexing="ij"))

    def as_dict(self):
        return {"d": self.d, "box_length": self.box_length, "n": self.n}


def mirror(arr, d):
    """Reindex the trailing ``d`` axes by ``k -> -k`` (mod n)."""
    axes = tuple(range(arr.ndim - d, arr.ndim))
    return np.roll(np.flip(arr, axis=axes), 1, axis=axes)


def hermitian_part(arr, d):
    return 0.5 * (arr + np.conj(mirror(arr, d)))


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Fourier coefficients of a real vector field, shape ``(d, n, ..., n)``."""

    grid: GridSpec
    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self):
        coeffs = np.asarray(self.coeffs, dtype=complex)
        expected = (self.grid.d,) + self.grid.shape
        if coeffs.shape != expected:
            raise ConfigurationError(
                f"coefficient array has shape {coeffs.shape}, expected {expected}")
        coeffs.setflags(write=False)
        object.__setattr__(self, "coeffs", coeffs)

    @classmethod
    def zeros(cls, grid):
        return cls(grid, np.zeros((grid.d,) + grid.shape, dtype=complex))

    def hermitian_defect(self):
        """Largest ``|F(-k) - conj F(k)|`` relative to ``max(1, max |F|)``."""
        c = self.coeffs
        scale = max(1.0, float(np.max(np.abs(c))) if c.size else 1.0)
        return float(np.max(np.abs(c - np.conj(mirror(c, self.grid.d))))) / scale

    def check_hermitian(self, tol=HERMITIAN_TOL):
        defect = self.hermitian_defect()
        if defect > tol:
            raise InvariantError(f"field is not Hermitian-symmetric (defect {defect:.3e})")
        return self

    def symmetrized(self):
        return SpectralField(self.grid, hermitian_part(self.coeffs, self.grid.d))

    def _same_grid(self, other):
        if not isinstance(other, SpectralField) or other.grid != self.grid:
            raise ConfigurationError("fields live on different grids")

    def __add__(self, other):
        self._same_grid(other)
        return SpectralField(self.grid, self.coeffs + other.coeffs)

    def __sub__(self, other):
        self._same_grid(other)
        return SpectralField(self.grid, self.coeffs - other.coeffs)

    def __neg__(self):
        return SpectralField(self.grid, -self.coeffs)

    def __mul__(self, scalar):
        if isinstance(scalar, SpectralField):
            return NotImplemented
        return SpectralField(self.grid, self.coeffs * scalar)

    __rmul__ = __mul__

    def multiply(self, multiplier):
        """Apply a real, even Fourier multiplier defined on the lattice."""
        return SpectralField(self.grid, self.coeffs * np.asarray(multiplier)[None])


@dataclass(frozen=True)
class EvolutionState:
    """Displacement and velocity coefficients at one time instant."""

    u_hat: SpectralField
    v_hat: SpectralField
    time: float = 0.0

    def __post_init__(self):
        if self.u_hat.grid != self.v_hat.grid:
            raise ConfigurationError("displacement and velocity live on different grids")
        if not self.time >= 0:
            raise ConfigurationError("time must be nonnegative")

    @property
    def grid(self):
        return self.u_hat.grid

    def check_hermitian(self, tol=HERMITIAN_TOL):
        self.u_hat.check_hermitian(tol)
        self.v_hat.check_hermitian(tol)
        return self


def _check_samples(grid, samples):
    samples = np.asarray(samples)
    expected = (grid.d,) + grid.shape
    if samples.shape != expected:
        raise ConfigurationError(f"sample array has shape {samples.shape}, expected {expected}")
    if np.iscomplexobj(samples):
        raise ConfigurationError("samples must be real")
    return samples.astype(float, copy=False)


def dft_forward(grid, samples):
    """Transform real samples of shape ``(d, n, ..., n)`` to a :class:`SpectralField`."""
    samples = _check_samples(grid, samples)
    axes = tuple(range(1, grid.d + 1))
    coeffs = np.fft.fftn(samples, axes=axes) * grid.forward_scale
    scale = max(1.0, float(np.max(np.abs(coeffs))))
    defect = float(np.max(np.abs(coeffs - np.conj(mirror(coeffs, grid.d))))) / scale
    if defect > HERMITIAN_TOL:
        raise InvariantError(f"forward transform lost Hermitian symmetry ({defect:.3e})")
    return SpectralField(grid, hermitian_part(coeffs, grid.d))


def dft_inverse(field):
    """Real samples of a Hermitian-symmetric :class:`SpectralField`."""
    grid = field.grid
    field.check_hermitian()
    axes = tuple(range(1, grid.d + 1))
    values = np.fft.ifftn(field.coeffs, axes=axes) / grid.forward_scale
    scale = max(1.0, float(np.max(np.abs(values.real))))
    residue = float(np.max(np.abs(values.imag))) / scale
    if residue > IMAG_TOL:
        raise InvariantError(f"inverse transform has imaginary residue {residue:.3e}")
    return values.real.copy()


def band_limited_random(grid, radius, seed, scale=1.0):
    """Random real field with coefficients supported on ``|xi| <= radius``.

    Coefficients are complex normal (times ``scale``) before Hermitian
    symmetrization; Nyquist modes are never populated.
    """
    if not radius >= 0:
        raise ConfigurationError("radius must be nonnegative")
    if radius >= grid.nyquist_radius:
        raise ConfigurationError(
            f"radius {radius} is not below the Nyquist radius {grid.nyquist_radius}")
    rng = np.random.default_rng(seed)
    shape = (grid.d,) + grid.shape
    raw = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    mask = (grid.xi_norm <= radius) & ~grid.nyquist_mask
    raw = raw * mask[None] * scale
    return SpectralField(grid, hermitian_part(raw, grid.d))


def dilate_spectrum(field, factor):
    """Move the coefficient at lattice index ``k`` to ``factor * k``.

    The result has the same coefficient values with every frequency scaled by
    ``factor``: a band-limited field of radius ``R`` becomes one of radius
    ``factor * R`` with an identical spectral shape.
    """
    factor = int(factor)
    grid = field.grid
    if factor < 1:
        raise ConfigurationError("dilation factor must be a positive integer")
    idx = grid.lattice_indices
    src = np.nonzero(np.abs(idx) * factor < grid.n // 2)[0]
    if np.any(np.abs(field.coeffs) > 0):
        occupied = np.nonzero(np.any(np.abs(field.coeffs) > 0, axis=0))
        if any(np.any(np.abs(idx[o]) * factor >= grid.n // 2) for o in occupied):
            raise ConfigurationError("dilated spectrum would reach the Nyquist radius")
    dst = (idx[src] * factor) % grid.n
    out = np.zeros_like(field.coeffs)
    sel_src = np.ix_(*([src] * grid.d))
    sel_dst = np.ix_(*([dst] * grid.d))
    out[(slice(None),) + sel_dst] = field.coeffs[(slice(None),) + sel_src]
    return SpectralField(grid, out)
