"""Constitutive model and dispersion relation of linear peridynamics.

The symbol of the operator is ``-omega_delta(xi)**2`` with

    omega_delta(xi)**2 = kappa / delta**(2 - 2 alpha)
                         * int chi(|y| / delta) (1 - cos(y . xi)) / |y|**(d + 2 alpha) dy.

Substituting ``y = delta * rho * theta`` (``theta`` on the unit sphere) and
integrating over directions gives the radial form used throughout::

    omega_delta(r)**2 = kappa / delta**2 * I(delta * r),
    I(x) = int_0^1 chi(rho) A_d(x rho) rho**(-1 - 2 alpha) d rho,

where ``A_d(s) = int_{S^{d-1}} (1 - cos(s theta_1)) d theta`` is the
:func:`angular_kernel`. The integrand behaves like ``rho**(1 - 2 alpha)``
at the origin. On ``[0, rho0]`` with ``rho0 = min(1/2, 1/(x + 1))`` the
cutoff equals one and ``x rho < 1``, so that piece is integrated exactly
from the even power series of ``A_d``; the remainder ``[rho0, 1]`` goes to
adaptive Gauss-Kronrod quadrature.
"""
import csv
import enum
import functools
import math
from dataclasses import dataclass, field

import numpy as np
import tomli
import tomli_w

from .errors import ConfigurationError, DomainError, InvariantError, NumericalError
from .quadrature import integrate
from .special import j0

DEFAULT_TOL = 1e-9
LAMBDA_TRUNCATION = 1e6
# largest delta * r resolved by quadrature (one panel per half period)
MAX_SCALED_RADIUS = 1e6

SPHERE_AREA = {1: 2.0, 2: 2.0 * math.pi, 3: 4.0 * math.pi}
BALL_VOLUME = {1: 2.0, 2: math.pi, 3: 4.0 * math.pi / 3.0}

_N_SERIES = 30


class Cutoff(str, enum.Enum):
    """Radial cutoff profile ``chi``; both equal one on ``[0, 1/2]`` and
    vanish on ``[1, inf)``."""

    INDICATOR = "indicator"
    # smoothstep bridge 1 - (3 t^2 - 2 t^3), t = 2 r - 1, on [1/2, 1]
    PLATEAU_SMOOTH = "plateau_smooth"


def cutoff_eval(profile, r):
    """Evaluate the cutoff profile at ``r >= 0`` (scalar or array)."""
    profile = Cutoff(profile)
    r_arr = np.asarray(r, dtype=float)
    if np.any(r_arr < 0) or np.any(np.isnan(r_arr)):
        raise DomainError("cutoff radius must be nonnegative")
    if profile is Cutoff.INDICATOR:
        out = np.where(r_arr < 1.0, 1.0, 0.0)
    else:
        t = np.clip(2.0 * r_arr - 1.0, 0.0, 1.0)
        out = 1.0 - t * t * (3.0 - 2.0 * t)
        out = np.where(r_arr <= 0.5, 1.0, np.where(r_arr >= 1.0, 0.0, out))
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class ModelParams:
    """Dimension, horizon, singularity exponent, stiffness and cutoff."""

    d: int = 1
    delta: float = 0.1
    alpha: float = 0.5
    kappa: float = 1.0
    cutoff: Cutoff = Cutoff.INDICATOR

    def __post_init__(self):
        if self.d not in (1, 2, 3):
            raise ConfigurationError(f"dimension d must be 1, 2 or 3, got {self.d!r}")
        if not self.delta > 0:
            raise ConfigurationError(f"horizon delta must be positive, got {self.delta!r}")
        if not 0 < self.alpha < 1:
            raise ConfigurationError(f"alpha must lie in (0, 1), got {self.alpha!r}")
        if not self.kappa > 0:
            raise ConfigurationError(f"kappa must be positive, got {self.kappa!r}")
        try:
            object.__setattr__(self, "cutoff", Cutoff(self.cutoff))
        except ValueError:
            raise ConfigurationError(f"unknown cutoff profile {self.cutoff!r}") from None
        object.__setattr__(self, "d", int(self.d))
        for name in ("delta", "alpha", "kappa"):
            object.__setattr__(self, name, float(getattr(self, name)))

    def replace(self, **changes):
        values = self.as_dict()
        values.update(changes)
        return ModelParams(**values)

    def as_dict(self):
        return {"d": self.d, "delta": self.delta, "alpha": self.alpha,
                "kappa": self.kappa, "cutoff": self.cutoff.value}

    @classmethod
    def from_mapping(cls, mapping):
        unknown = set(mapping) - {"d", "delta", "alpha", "kappa", "cutoff"}
        if unknown:
            raise ConfigurationError(f"unknown model keys: {sorted(unknown)}")
        return cls(**mapping)

    def to_toml(self):
        return tomli_w.dumps(self.as_dict())

    @classmethod
    def from_toml(cls, text):
        try:
            data = tomli.loads(text)
        except tomli.TOMLDecodeError as exc:
            raise ConfigurationError(f"malformed model config: {exc}") from None
        return cls.from_mapping(data)


def _angular_coefficients(d, n_terms=_N_SERIES):
    """Coefficients ``a_k`` (k = 1..n_terms) with ``A_d(s) = sum a_k s^(2k)``."""
    k = np.arange(1, n_terms + 1)
    sign = np.where(k % 2 == 1, 1.0, -1.0)
    lgam = np.array([math.lgamma(2 * kk + 1) for kk in k])
    if d == 1:
        return 2.0 * sign * np.exp(-lgam)
    if d == 2:
        lfact = np.array([math.lgamma(kk + 1) for kk in k])
        return 2.0 * math.pi * sign * np.exp(-k * math.log(4.0) - 2.0 * lfact)
    if d == 3:
        lgam3 = np.array([math.lgamma(2 * kk + 2) for kk in k])
        return 4.0 * math.pi * sign * np.exp(-lgam3)
    raise ConfigurationError(f"unsupported dimension {d!r}")


def angular_kernel(d, s):
    """``A_d(s)``: integral of ``1 - cos(s theta_1)`` over the unit sphere."""
    if d not in (1, 2, 3):
        raise ConfigurationError(f"unsupported dimension {d!r}")
    s = np.abs(np.asarray(s, dtype=float))
    small = s < 0.5
    out = np.empty_like(s)
    if np.any(small):
        out[small] = _series_eval(_angular_coefficients(d, 12), s[small], start=1)
    big = s[~small]
    if big.size:
        if d == 1:
            out[~small] = 2.0 * (1.0 - np.cos(big))
        elif d == 2:
            out[~small] = 2.0 * math.pi * (1.0 - j0(big))
        else:
            out[~small] = 4.0 * math.pi * (1.0 - np.sin(big) / big)
    return out if out.ndim else float(out)


def angular_deficit(d, s):
    """``c_d s^2 / 2 - A_d(s) >= 0``, free of cancellation for small ``s``.

    ``c_d s^2 / 2`` is the quadratic term of ``A_d``.
    """
    s = np.abs(np.asarray(s, dtype=float))
    coeff = _angular_coefficients(d, 16)
    out = np.empty_like(s)
    small = s < 1.0
    if np.any(small):
        out[small] = -_series_eval(coeff, s[small], start=2)
    big = s[~small]
    if big.size:
        out[~small] = coeff[0] * big * big - angular_kernel(d, big)
    return out if out.ndim else float(out)


def _series_eval(coeff, s, start):
    """Sum ``coeff[k-1] * s^(2k)`` for ``k >= start`` by Horner's rule."""
    s2 = s * s
    acc = np.zeros_like(s)
    for c in coeff[start - 1:][::-1]:
        acc = acc * s2 + c
    return acc * s2 ** start


def _radial_integral(params, x, tol, resolution, deficit):
    """``I(x)`` (or the deficit ``c_d x^2 M_1 / 2 - I(x)``) with an error estimate."""
    d, alpha = params.d, params.alpha
    if x == 0:
        return 0.0, 0.0
    rho0 = min(0.5, 1.0 / (x + 1.0))
    coeff = _angular_coefficients(d)
    k = np.arange(1, coeff.size + 1)
    # x rho0 < 1, so the powers below stay bounded for any x
    head_terms = coeff * (x * rho0) ** (2 * k) * rho0 ** (-2 * alpha) / (2 * k - 2 * alpha)
    if deficit:
        head = -head_terms[1:].sum()
        shape = functools.partial(angular_deficit, d)
    else:
        head = head_terms.sum()
        shape = functools.partial(angular_kernel, d)
    profile = params.cutoff

    def integrand(rho):
        return cutoff_eval(profile, rho) * shape(x * rho) * rho ** (-1.0 - 2.0 * alpha)

    if x > MAX_SCALED_RADIUS:
        raise NumericalError(
            f"delta * r = {x:.3g} exceeds {MAX_SCALED_RADIUS:.0e}; use lambda * r**alpha there")
    n_panels = resolution * max(1, math.ceil(x * (1.0 - rho0) / math.pi))
    tail, tail_err = integrate(integrand, rho0, 1.0, rel_tol=0.1 * tol,
                               abs_tol=0.1 * tol * abs(head), breakpoints=(0.5,),
                               n_panels=n_panels)
    total = head + tail
    return total, tail_err + 4 * np.finfo(float).eps * abs(head)


def _check_radius(r):
    r = float(r)
    if not r >= 0 or math.isinf(r):
        raise DomainError(f"frequency radius must be finite and nonnegative, got {r!r}")
    return r


def _check_tol(tol):
    if not 0 < tol <= 1e-3:
        raise DomainError(f"quadrature tolerance must lie in (0, 1e-3], got {tol!r}")


def omega_delta(params, r, tol=DEFAULT_TOL, resolution=1, full_output=False):
    """Dispersion relation ``omega_delta`` at radius ``r = |xi|``.

    ``resolution`` multiplies the initial number of quadrature panels. With
    ``full_output`` the pair ``(omega, relative_error_estimate)`` is returned.
    """
    r = _check_radius(r)
    _check_tol(tol)
    if r == 0:
        return (0.0, 0.0) if full_output else 0.0
    value, err = _radial_integral(params, params.delta * r, tol, resolution, deficit=False)
    omega = math.sqrt(params.kappa * value) / params.delta
    rel = 0.5 * err / value
    return (omega, rel) if full_output else omega


def dispersion_gap(params, r, tol=DEFAULT_TOL):
    """``gamma * r - omega_delta(r)``, accurate even where it is tiny relative
    to ``omega_delta(r)``. Nonnegative for every admissible cutoff."""
    r = _check_radius(r)
    _check_tol(tol)
    if r == 0:
        return 0.0
    deficit, _ = _radial_integral(params, params.delta * r, tol, 1, deficit=True)
    deficit *= params.kappa / params.delta ** 2
    gr = gamma_constant(params, tol) * r
    return deficit / (gr + omega_delta(params, r, tol))


def cutoff_moment(profile, power, tol=DEFAULT_TOL):
    """``int_0^1 chi(rho) rho**power d rho`` for ``power > -1``."""
    head = 0.5 ** (power + 1.0) / (power + 1.0)
    if Cutoff(profile) is Cutoff.INDICATOR:
        return 1.0 / (power + 1.0)
    tail, _ = integrate(lambda rho: cutoff_eval(profile, rho) * rho ** power,
                        0.5, 1.0, rel_tol=0.1 * tol, abs_tol=0.1 * tol * head)
    return head + tail


@functools.lru_cache(maxsize=256)
def gamma_constant(params, tol=DEFAULT_TOL):
    """Wave speed ``gamma``: the slope of ``omega_delta`` at the origin."""
    _check_tol(tol)
    moment = cutoff_moment(params.cutoff, 1.0 - 2.0 * params.alpha, tol)
    return math.sqrt(0.5 * params.kappa * BALL_VOLUME[params.d] * moment)


def _oscillatory_tail(q, radius, phase=0.0, n_terms=5):
    """Asymptotic ``int_R^inf exp(i (rho + phase)) rho**(-q) d rho``.

    Returns the complex value and a bound on the truncation error.
    """
    total = 0.0j
    term_mag = 0.0
    rising = 1.0
    for m in range(n_terms):
        term = (1j) ** (m + 1) * rising * radius ** (-q - m)
        total += term
        rising *= q + m
        term_mag = abs(rising * radius ** (-q - m - 1))
    return np.exp(1j * (radius + phase)) * total, 2.0 * term_mag


@functools.lru_cache(maxsize=64)
def _lambda_integral(d, alpha, tol):
    """``int_0^inf A_d(rho) rho**(-1 - 2 alpha) d rho`` and an error bound."""
    p = 1.0 + 2.0 * alpha
    coeff = _angular_coefficients(d)
    k = np.arange(1, coeff.size + 1)
    head = float(np.sum(coeff / (2 * k - 2 * alpha)))
    flat = SPHERE_AREA[d] / (2.0 * alpha)
    big = LAMBDA_TRUNCATION
    if d == 1:
        def osc(rho):
            return 2.0 * np.cos(rho) * rho ** -p
        tail, bound = _oscillatory_tail(p, big)
        tail, bound = 2.0 * tail.real, 2.0 * bound
    elif d == 2:
        def osc(rho):
            return 2.0 * math.pi * j0(rho) * rho ** -p
        # J0 ~ sqrt(2/(pi rho)) (cos(rho - pi/4) + sin(rho - pi/4) / (8 rho))
        scale = 2.0 * math.pi * math.sqrt(2.0 / math.pi)
        lead, b1 = _oscillatory_tail(p + 0.5, big, -0.25 * math.pi)
        corr, b2 = _oscillatory_tail(p + 1.5, big, -0.25 * math.pi)
        tail = scale * (lead.real + corr.imag / 8.0)
        bound = scale * (b1 + b2 + big ** (-p - 2.5))
    else:
        def osc(rho):
            return 4.0 * math.pi * np.sin(rho) * rho ** (-p - 1.0)
        tail, bound = _oscillatory_tail(p + 1.0, big)
        tail, bound = 4.0 * math.pi * tail.imag, 4.0 * math.pi * bound
    scale_est = abs(head + flat)
    n_panels = math.ceil((big - 1.0) / math.pi)
    body, body_err = integrate(osc, 1.0, big, rel_tol=0.0, abs_tol=0.05 * tol * scale_est,
                               n_panels=n_panels)
    value = head + flat - body - tail
    return value, body_err + bound


def lambda_constant(params, tol=DEFAULT_TOL, full_output=False):
    """High-frequency coefficient: ``omega_delta(r) / r**alpha -> lambda``.

    The oscillatory part of the integral is computed up to radius
    ``LAMBDA_TRUNCATION``; the remaining tail is added from its asymptotic
    expansion and its truncation bound enters the reported error.
    """
    _check_tol(tol)
    value, err = _lambda_integral(params.d, params.alpha, tol)
    lam = math.sqrt(params.kappa * value / params.delta ** (2.0 * (1.0 - params.alpha)))
    rel = 0.5 * err / value
    if rel > tol:
        raise NumericalError(f"lambda quadrature error {rel:.2e} exceeds tol {tol:.2e}")
    return (lam, rel) if full_output else lam


def low_frequency_bound(params, r):
    """Rigorous bound on ``gamma^2 r^2 - omega_delta(r)^2`` (>= 0)."""
    s_d = SPHERE_AREA[params.d]
    return params.kappa * params.delta ** 2 * r ** 4 * s_d / (24.0 * (4.0 - 2.0 * params.alpha))


def high_frequency_bound(params, r):
    """Rigorous bound on ``lambda^2 - omega_delta(r)^2 / r^(2 alpha)`` (>= 0)."""
    a = params.alpha
    s_d = SPHERE_AREA[params.d]
    x = params.delta * r
    return (params.kappa / params.delta ** (2 * (1 - a)) * 2.0 * s_d
            * (0.5 * x) ** (-2 * a) / (2 * a))


@dataclass(frozen=True)
class DispersionProfile:
    """Tabulated ``omega_delta`` on a geometric radius grid plus its asymptotes."""

    params: ModelParams
    gamma: float
    lam: float
    radii: np.ndarray = field(repr=False)
    omega: np.ndarray = field(repr=False)
    quadrature_tol: float = DEFAULT_TOL

    def __call__(self, r):
        """Exact (quadrature) evaluation; radial, so ``r`` may be ``|xi|``."""
        r = np.asarray(r, dtype=float)
        flat = np.array([omega_delta(self.params, v, self.quadrature_tol) for v in r.ravel()])
        return flat.reshape(r.shape) if r.ndim else float(flat[0])

    def interpolate(self, r):
        """Cheap log-log interpolation inside the table."""
        r = np.asarray(r, dtype=float)
        lo, hi = self.radii[0], self.radii[-1]
        if np.any((r != 0) & ((r < lo) | (r > hi))):
            raise DomainError("radius outside the tabulated range")
        out = np.zeros_like(r)
        nz = r > 0
        out[nz] = np.exp(np.interp(np.log(r[nz]), np.log(self.radii), np.log(self.omega)))
        return out

    def rows(self):
        a = self.params.alpha
        for r, w in zip(self.radii, self.omega):
            yield r, w, w / r, w / r ** a

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["r", "omega", "omega_over_r", "omega_over_r_alpha"])
            for row in self.rows():
                writer.writerow([repr(float(v)) for v in row])


def build_dispersion_profile(params, r_max, n_samples=64, tol=DEFAULT_TOL, r_min=None):
    """Tabulate ``omega_delta`` on ``n_samples`` geometric radii up to ``r_max``
    and verify the profile invariants.

    The low-frequency slope is checked at the smallest node when
    ``delta * r_min <= 1e-3`` and the high-frequency plateau at the largest
    node when ``delta * r_max >= 1e3``, each against an explicit bound.
    """
    if not r_max > 0:
        raise ConfigurationError("r_max must be positive")
    if n_samples < 16:
        raise ConfigurationError("n_samples must be at least 16")
    if r_min is None:
        r_min = min(1e-5 / params.delta, 1e-3 * r_max)
    if not 0 < r_min < r_max:
        raise ConfigurationError("need 0 < r_min < r_max")
    radii = np.geomspace(r_min, r_max, n_samples)
    omega = np.array([omega_delta(params, r, tol) for r in radii])
    gamma = gamma_constant(params, tol)
    lam = lambda_constant(params, tol)
    radii.setflags(write=False)
    omega.setflags(write=False)
    profile = DispersionProfile(params, gamma, lam, radii, omega, tol)

    if not np.all(omega > 0):
        raise InvariantError("omega_delta must be positive away from the origin")
    slack = 10.0 * tol
    if params.delta * r_min <= 1e-3:
        r0 = radii[0]
        dev = gamma * gamma * r0 * r0 - omega[0] ** 2
        if not -slack * omega[0] ** 2 <= dev <= low_frequency_bound(params, r0) + slack * omega[0] ** 2:
            raise InvariantError("omega/r does not approach gamma at the smallest radius")
    if params.delta * r_max >= 1e3:
        r1 = radii[-1]
        ratio2 = omega[-1] ** 2 / r1 ** (2 * params.alpha)
        dev = lam * lam - ratio2
        if not -slack * ratio2 <= dev <= high_frequency_bound(params, r1) + slack * ratio2:
            raise InvariantError("omega/r^alpha does not approach lambda at the largest radius")
    return profile
