"""Real-space lattice quadrature of the peridynamic operator on the torus.

The operator is applied in its symmetric second-difference form

    K[u](x) = 1/2 sum_j w_j (u(x + y_j) + u(x - y_j) - 2 u(x)),

which excludes ``y = 0`` and so needs no principal value. Weights are
midpoint-type: ``w_j = kappa delta^(2 alpha - 2) chi(|y_j| / delta) |y_j|^(-d - 2 alpha) h^d``.
"""
import csv
import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, DomainError
from .kernel import cutoff_eval


class EmptyStencilError(ConfigurationError):
    """The horizon is shorter than the mesh size, so no bonds exist."""


@dataclass(frozen=True, eq=False)
class StencilKernel:
    """Lattice offsets (in units of ``h``) inside the horizon and their weights."""

    params: object
    grid: object
    offsets: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)

    @property
    def displacements(self):
        return self.offsets * self.grid.h

    @property
    def total_weight(self):
        return float(self.weights.sum())

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow([f"offset_{i}" for i in range(self.grid.d)] + ["weight"])
            for off, w in zip(self.offsets, self.weights):
                writer.writerow([int(o) for o in off] + [repr(float(w))])


def build_stencil(params, grid):
    """Enumerate the nonzero-weight lattice bonds of the horizon ball."""
    if params.d != grid.d:
        raise ConfigurationError("model and grid dimensions differ")
    delta, h = params.delta, grid.h
    if delta >= 0.5 * grid.box_length:
        raise ConfigurationError("horizon must be shorter than half the box length")
    if delta < h:
        raise EmptyStencilError(f"horizon {delta} is shorter than the mesh size {h}")
    m = int(np.floor(delta / h))
    rng = range(-m, m + 1)
    offsets = np.array([j for j in itertools.product(rng, repeat=grid.d) if any(j)], dtype=int)
    dist = np.sqrt(np.sum((offsets * h) ** 2, axis=1))
    chi = cutoff_eval(params.cutoff, dist / delta)
    keep = chi > 0
    offsets, dist, chi = offsets[keep], dist[keep], chi[keep]
    a = params.alpha
    weights = (params.kappa * delta ** (2 * a - 2) * chi
               * dist ** (-grid.d - 2 * a) * grid.cell_volume)
    offsets.setflags(write=False)
    weights.setflags(write=False)
    return StencilKernel(params, grid, offsets, weights)


def _half_stencil(kernel):
    """Representatives of the ``{y, -y}`` pairs: first nonzero entry positive."""
    off = kernel.offsets
    first = off[np.arange(len(off)), np.argmax(off != 0, axis=1)]
    pick = first > 0
    return off[pick], kernel.weights[pick]


def _check_field(kernel, samples):
    samples = np.asarray(samples, dtype=float)
    d = kernel.grid.d
    if samples.ndim < d or samples.shape[-d:] != kernel.grid.shape:
        raise ConfigurationError(
            f"field shape {samples.shape} does not end with grid shape {kernel.grid.shape}")
    return samples


def apply_K_delta(kernel, samples):
    """Apply the operator to real samples whose trailing axes are the grid.

    Leading axes (e.g. vector components) are treated independently.
    """
    u = _check_field(kernel, samples)
    d = kernel.grid.d
    axes = tuple(range(u.ndim - d, u.ndim))
    out = np.zeros_like(u)
    for off, w in zip(*_half_stencil(kernel)):
        fwd = np.roll(u, tuple(-off), axis=axes)
        bwd = np.roll(u, tuple(off), axis=axes)
        out += w * (fwd + bwd - 2.0 * u)
    return out


def discrete_symbol(kernel, xi):
    """``sum_j w_j (1 - cos(y_j . xi))`` at lattice frequency vector(s) ``xi``.

    ``xi`` has trailing dimension ``d``; off-lattice frequencies are rejected.
    """
    grid = kernel.grid
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    if xi.shape[-1] != grid.d:
        raise DomainError(f"frequency must have {grid.d} components")
    k = xi * grid.box_length / (2 * np.pi)
    if np.any(np.abs(k - np.round(k)) > 1e-9 * np.maximum(1.0, np.abs(k))):
        raise DomainError("frequency is not on the grid's lattice")
    phase = np.tensordot(xi, kernel.displacements.T, axes=1)
    out = np.sum(kernel.weights * (1.0 - np.cos(phase)), axis=-1)
    return out if out.ndim else float(out)


def discrete_symbol_grid(kernel):
    """The discrete symbol on every lattice mode, shape ``grid.shape``.

    Computed as ``sum w - Re FFT(weights)``, the exact eigenvalues of
    :func:`apply_K_delta` (sign flipped).
    """
    grid = kernel.grid
    placed = np.zeros(grid.shape)
    idx = tuple((kernel.offsets % grid.n).T)
    np.add.at(placed, idx, kernel.weights)
    return kernel.total_weight - np.fft.fftn(placed).real


def nonlocal_energy_direct(kernel, samples):
    """``1/2 sum_x h^d sum_j w_j |u(x) - u(x - y_j)|^2`` over the full stencil.

    Equals ``-<K u, u>`` in the discrete L2 inner product.
    """
    u = _check_field(kernel, samples)
    d = kernel.grid.d
    axes = tuple(range(u.ndim - d, u.ndim))
    total = 0.0
    for off, w in zip(*_half_stencil(kernel)):
        diff = u - np.roll(u, tuple(off), axis=axes)
        # the pair {y, -y} contributes twice the same sum
        total += 2.0 * w * np.sum(diff * diff)
    return 0.5 * kernel.grid.cell_volume * total
