"""Sweep studies comparing peridynamic and classical wave evolution.

Each ``run_*`` function takes an :class:`ExperimentConfig` and returns an
:class:`ExperimentReport` holding flat records (one CSV row each), log-log
fits and verdicts. Verdicts are pure functions of the records, so anyone
holding the CSV can recompute them.
"""
import hashlib
import json
import math
import platform
import time
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
import tomli

from .errors import ConfigurationError
from .grid import EvolutionState, GridSpec, band_limited_random, dft_forward, dilate_spectrum
from .kernel import (DEFAULT_TOL, ModelParams, build_dispersion_profile, dispersion_gap,
                     omega_delta)
from .norms import energy, l2_norm, solution_gap
from .propagator import ClassicalWave, Peridynamics, evolve
from .stencil import apply_K_delta, build_stencil, discrete_symbol_grid

__version__ = "0.1.0"

DEFAULT_TOLERANCES = {
    # dispersion asymptotes
    "low_frequency_ratio": 1e-4,
    "gap_slope_target": 2.0,
    "gap_slope_tol": 0.1,
    "high_frequency_rel": 0.01,
    # delta convergence
    "delta_rate_target": 1.0,
    "delta_rate_tol": 0.15,
    # low-frequency comparison
    "g_spread_max": 10.0,
    "r_slope_target": 2.0,
    "r_slope_tol": 0.2,
    "delta_slope_target": 1.0,
    "delta_slope_tol": 0.15,
    "t_slope_target": 1.0,
    "t_slope_tol": 0.2,
    "small_regime": 0.1,
    "vacuous_regime": 1.0,
    # energy drift
    "conserved_drift_max": 1e-12,
    "drift_ratio_lo": 3.3,
    "drift_ratio_hi": 4.7,
    # symbol consistency
    "identity_tol": 1e-12,
}

_SECTIONS = {
    "model": {"d", "kappa", "cutoff", "delta", "alpha"},
    "grid": {"n", "box_length"},
    "experiment": {"R", "s", "T", "n_times", "seed", "data_radius", "t_slope_base",
                   "t_slope_radius", "energy_periods", "energy_delta", "energy_radius",
                   "r_max", "n_samples", "low_radius", "slope_radii", "high_radius",
                   "symbol_delta", "symbol_box_length", "quadrature_tol", "amplitude"},
    "sweeps": {"alpha", "delta", "R", "n", "modes", "bench_n", "bench_ratio"},
    "tolerances": set(DEFAULT_TOLERANCES),
}


def _default_sections():
    return {
        "model": {"d": 1, "kappa": 1.0, "cutoff": "indicator", "delta": 0.1, "alpha": 0.5},
        "grid": {"n": 1024, "box_length": 2.0 * math.pi * 128},
        "experiment": {
            "R": 0.5, "s": [0.0, 1.0], "T": 1.0, "n_times": 50, "seed": 20240607,
            "data_radius": 0.125, "t_slope_base": 16.0, "t_slope_radius": 0.25,
            "energy_periods": 4.0, "energy_delta": 0.2, "energy_radius": 0.5,
            "r_max": 1e5, "n_samples": 64, "low_radius": 1e-3,
            "slope_radii": [1e-2, 1.0], "high_radius": 1e4,
            "symbol_delta": 0.2, "symbol_box_length": 2.0 * math.pi,
            "quadrature_tol": DEFAULT_TOL, "amplitude": 1.0,
        },
        "sweeps": {
            "alpha": [0.25, 0.5, 0.75], "delta": [0.2, 0.1, 0.05, 0.025],
            "R": [0.125, 0.25, 0.5], "n": [128, 256, 512],
            "modes": [1, 2, 3, 5, 8, 13, 21, 34],
            "bench_n": [256, 1024, 4096], "bench_ratio": [2, 4, 8, 16],
        },
        "tolerances": {},
    }


def _monotone(values):
    values = list(values)
    return (all(a < b for a, b in zip(values, values[1:]))
            or all(a > b for a, b in zip(values, values[1:])))


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated configuration; ``sections`` mirrors the TOML layout."""

    sections: dict
    overridden: frozenset = frozenset()

    def __post_init__(self):
        for name, keys in _SECTIONS.items():
            unknown = set(self.sections.get(name, {})) - keys
            if unknown:
                raise ConfigurationError(f"unknown keys in [{name}]: {sorted(unknown)}")
        unknown = set(self.sections) - set(_SECTIONS)
        if unknown:
            raise ConfigurationError(f"unknown config sections: {sorted(unknown)}")
        self.base_params
        grid = self.grid
        exp = self.sections["experiment"]
        if grid.d != self.base_params.d:
            raise ConfigurationError("model and grid dimensions differ")
        if not exp["T"] >= 0:
            raise ConfigurationError("T must be nonnegative")
        if int(exp["n_times"]) < 2:
            raise ConfigurationError("n_times must be at least 2")
        for key, values in self.sections["sweeps"].items():
            if len(values) == 0:
                raise ConfigurationError(f"sweep {key!r} is empty")
            if not _monotone(values) and len(values) > 1:
                raise ConfigurationError(f"sweep {key!r} must be strictly sorted")
        for radius in list(self.radii) + [exp["R"], exp["t_slope_radius"], exp["energy_radius"]]:
            if not 0 < radius < grid.nyquist_radius:
                raise ConfigurationError(
                    f"radius {radius} must lie in (0, Nyquist = {grid.nyquist_radius:.4g})")
        for key, value in self.tolerances.items():
            if not (isinstance(value, (int, float)) and math.isfinite(value)):
                raise ConfigurationError(f"tolerance {key!r} must be a finite number")

    # construction

    @classmethod
    def default(cls):
        return cls(_default_sections())

    @classmethod
    def from_mapping(cls, mapping, overridden=frozenset()):
        sections = _default_sections()
        for name, values in mapping.items():
            if not isinstance(values, dict):
                raise ConfigurationError(f"config entry {name!r} must be a section")
            sections.setdefault(name, {})
            sections[name] = {**sections[name], **values}
        return cls(sections, frozenset(overridden))

    @classmethod
    def from_toml(cls, text):
        try:
            data = tomli.loads(text)
        except tomli.TOMLDecodeError as exc:
            raise ConfigurationError(f"malformed config: {exc}") from None
        return cls.from_mapping(data)

    @classmethod
    def load(cls, path):
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigurationError(f"cannot read config {path}: {exc.strerror}") from None
        return cls.from_toml(text)

    def with_changes(self, section, **values):
        sections = {k: dict(v) for k, v in self.sections.items()}
        sections[section].update(values)
        return ExperimentConfig(sections, self.overridden)

    def with_tolerances(self, overrides):
        cfg = self.with_changes("tolerances", **overrides)
        return replace(cfg, overridden=self.overridden | frozenset(overrides))

    def with_seed(self, seed):
        return self.with_changes("experiment", seed=int(seed))

    # accessors

    @property
    def base_params(self):
        try:
            return ModelParams.from_mapping(self.sections["model"])
        except TypeError as exc:
            raise ConfigurationError(str(exc)) from None

    @property
    def grid(self):
        g = self.sections["grid"]
        return GridSpec(self.sections["model"]["d"], g["box_length"], g["n"])

    @property
    def experiment(self):
        return self.sections["experiment"]

    @property
    def alphas(self):
        return [float(a) for a in self.sections["sweeps"]["alpha"]]

    @property
    def deltas(self):
        return [float(v) for v in self.sections["sweeps"]["delta"]]

    @property
    def radii(self):
        return [float(v) for v in self.sections["sweeps"]["R"]]

    @property
    def s_values(self):
        s = self.experiment["s"]
        return [float(v) for v in (s if isinstance(s, (list, tuple)) else [s])]

    @property
    def tolerances(self):
        return {**DEFAULT_TOLERANCES, **self.sections["tolerances"]}

    @property
    def quad_tol(self):
        return float(self.experiment["quadrature_tol"])

    def params(self, alpha=None, delta=None):
        p = self.base_params
        changes = {}
        if alpha is not None:
            changes["alpha"] = alpha
        if delta is not None:
            changes["delta"] = delta
        return p.replace(**changes) if changes else p

    def echo(self):
        return json.loads(json.dumps(self.sections, sort_keys=True))

    def config_hash(self):
        blob = json.dumps(self.sections, sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


@dataclass(frozen=True)
class Verdict:
    name: str
    status: str  # "pass", "fail" or "skipped"
    value: object
    tolerance: str
    detail: str = ""
    overridden: bool = False

    def as_dict(self):
        return {"name": self.name, "status": self.status, "value": self.value,
                "tolerance": self.tolerance, "detail": self.detail,
                "overridden": self.overridden}


@dataclass
class ExperimentReport:
    name: str
    config: ExperimentConfig
    records: list = field(default_factory=list)
    fits: list = field(default_factory=list)
    verdicts: list = field(default_factory=list)
    traces: list = field(default_factory=list)
    volatile_fields: tuple = ()
    started: str = ""

    @property
    def passed(self):
        return all(v.status != "fail" for v in self.verdicts)

    def verdict(self, name):
        for v in self.verdicts:
            if v.name == name:
                return v
        raise KeyError(name)

    def add_verdict(self, name, ok, value, tolerance_keys, tolerance_text, detail=""):
        tol = self.config.tolerances
        over = any(k in self.config.overridden for k in tolerance_keys)
        if ok is None:
            status = "skipped"
        else:
            status = "pass" if ok else "fail"
        text = tolerance_text.format(**{k: tol[k] for k in tolerance_keys})
        self.verdicts.append(Verdict(name, status, _clean(value), text, detail, over))

    def stable_payload(self):
        records = [{k: v for k, v in r.items() if k not in self.volatile_fields}
                   for r in self.records]
        return {"experiment": self.name, "config_echo": self.config.echo(),
                "records": records, "fits": self.fits,
                "verdicts": [v.as_dict() for v in self.verdicts]}

    def determinism_hash(self):
        payload = {**self.stable_payload(), "traces": self.traces}
        blob = json.dumps(_clean(payload), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()

    def provenance(self):
        return {
            "config_hash": self.config.config_hash(),
            "seed": self.config.experiment["seed"],
            "versions": {"periwave": __version__, "numpy": np.__version__,
                         "python": platform.python_version()},
            "overridden_tolerances": sorted(self.config.overridden),
            "started": self.started,
            "determinism_hash": self.determinism_hash(),
        }

    def to_json(self):
        payload = self.stable_payload()
        payload["provenance"] = self.provenance()
        return json.dumps(_clean(payload), indent=2, sort_keys=True)

    def to_csv_text(self):
        return _table_text(self.records)

    def write(self, out_dir):
        """Write ``<name>.csv``, ``<name>.json`` and, when present, ``<name>_trace.csv``."""
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        stem = self.name.replace("-", "_")
        csv_path, json_path = out / f"{stem}.csv", out / f"{stem}.json"
        csv_path.write_text(self.to_csv_text())
        json_path.write_text(self.to_json())
        if self.traces:
            (out / f"{stem}_trace.csv").write_text(_table_text(self.traces))
        return csv_path, json_path


def _table_text(rows):
    if not rows:
        return ""
    keys = list(rows[0])
    lines = [",".join(keys)]
    for r in rows:
        lines.append(",".join(_fmt(r[k]) for k in keys))
    return "\n".join(lines) + "\n"


def _fmt(value):
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _clean(obj):
    """Make ``obj`` JSON-safe: numpy scalars to Python, non-finite to strings."""
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _new_report(name, config, volatile=()):
    return ExperimentReport(name, config, volatile_fields=tuple(volatile),
                            started=datetime.now(timezone.utc).isoformat())


def fit_loglog(x, y):
    """Least-squares slope of ``log y`` against ``log x``.

    Returns ``(slope, intercept, rms_residual)``; non-positive data give NaNs.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 2 or np.any(x <= 0) or np.any(~(y > 0)):
        return math.nan, math.nan, math.nan
    lx, ly = np.log(x), np.log(y)
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    return float(slope), float(intercept), float(np.sqrt(np.mean(resid ** 2)))


def _within(value, target, tol):
    return bool(math.isfinite(value) and abs(value - target) <= tol)


def _record_base(config):
    g = config.grid
    return {"config_hash": config.config_hash(), "d": g.d, "n": g.n, "box_length": g.box_length}


# initial data


def initial_state(config, radius, grid=None, rescale_time=False):
    """Band-limited data of radius ``radius``, the same shape for every radius.

    A random pair is drawn once on ``|xi| <= data_radius``. Larger radii move
    its coefficients from lattice index ``k`` to ``m k`` with integer
    ``m = radius / data_radius``, which keeps both L2 norms fixed. With
    ``rescale_time`` the velocity is also multiplied by ``m``, so the data
    follow the space-time rescaling ``u(x, t) -> u(m x, m t)`` and the
    energy splits the same way at every radius.
    """
    grid = grid or config.grid
    base = float(config.experiment["data_radius"])
    ratio = radius / base
    m = int(round(ratio))
    if m < 1 or abs(ratio - m) > 1e-9 * ratio:
        raise ConfigurationError(
            f"radius {radius} is not an integer multiple of data_radius {base}")
    seeds = np.random.SeedSequence(int(config.experiment["seed"])).spawn(2)
    amp = float(config.experiment["amplitude"])
    u0 = band_limited_random(grid, base, np.random.default_rng(seeds[0]), amp)
    v0 = band_limited_random(grid, base, np.random.default_rng(seeds[1]), amp)
    populated = int(np.count_nonzero((grid.xi_norm <= base) & ~grid.nyquist_mask))
    if populated < 2:
        raise ConfigurationError(
            f"data_radius {base} populates {populated} lattice mode(s); need at least 2")
    vscale = m if rescale_time else 1
    return EvolutionState(dilate_spectrum(u0, m), vscale * dilate_spectrum(v0, m))


def _times(T, n_times):
    return np.linspace(0.0, T, int(n_times))


class _Frequencies:
    """Memo of propagators per (alpha, delta) so each symbol is computed once."""

    def __init__(self, config):
        self.config = config
        self._peri = {}
        self._wave = {}

    def peri(self, alpha, delta):
        key = (alpha, delta)
        if key not in self._peri:
            self._peri[key] = Peridynamics.continuum(self.config.params(alpha, delta),
                                                     self.config.quad_tol)
        return self._peri[key]

    def wave(self, alpha):
        if alpha not in self._wave:
            self._wave[alpha] = ClassicalWave.from_params(self.config.params(alpha),
                                                          self.config.quad_tol)
        return self._wave[alpha]


def sup_gaps(peri, wave, state0, times, s_values, trace=None, tag=None):
    """For each ``s``: ``(sup u_gap, sup v_gap, sup (u_gap + v_gap))`` over ``times``.

    With a ``trace`` list, one row per ``(t, s)`` is appended carrying ``tag``,
    both gaps and the two energies of the peridynamic solution.
    """
    out = {s: [0.0, 0.0, 0.0] for s in s_values}
    for t in times:
        a = evolve(peri, state0, float(t))
        b = evolve(wave, state0, float(t))
        if trace is not None:
            e_peri, e_wave = energy(a, peri).total, energy(a, wave).total
        for s in s_values:
            gu, gv = solution_gap(a, b, s)
            if trace is not None:
                trace.append({**(tag or {}), "s": s, "t": float(t), "u_gap": gu, "v_gap": gv,
                              "energy_peri": e_peri, "energy_wave": e_wave})
            acc = out[s]
            acc[0] = max(acc[0], gu)
            acc[1] = max(acc[1], gv)
            acc[2] = max(acc[2], gu + gv)
    return out


# experiments


def run_dispersion(config):
    """Tabulate ``omega_delta`` and check its two asymptotes per alpha."""
    report = _new_report("dispersion", config)
    exp = config.experiment
    tol = config.quad_tol
    r_lo = float(exp["low_radius"])
    slope_lo, slope_hi = (float(v) for v in exp["slope_radii"])
    r_hi = float(exp["high_radius"])
    r_max = max(float(exp["r_max"]), r_hi)
    tols = config.tolerances
    for alpha in config.alphas:
        p = config.params(alpha)
        profile = build_dispersion_profile(p, r_max, int(exp["n_samples"]), tol)
        gamma, lam = profile.gamma, profile.lam
        for r, w, wr, wa in profile.rows():
            report.records.append({**_record_base(config), "alpha": alpha, "delta": p.delta,
                                   "kind": "profile", "r": float(r), "omega": float(w),
                                   "omega_over_r": float(wr), "omega_over_r_alpha": float(wa),
                                   "gap": dispersion_gap(p, float(r), tol)})
        slope_r = np.geomspace(slope_lo, slope_hi, 9)
        gaps = np.array([dispersion_gap(p, float(r), tol) for r in slope_r])
        for r, gp in zip(slope_r, gaps):
            w = omega_delta(p, float(r), tol)
            report.records.append({**_record_base(config), "alpha": alpha, "delta": p.delta,
                                   "kind": "gap_fit", "r": float(r), "omega": w,
                                   "omega_over_r": w / r, "omega_over_r_alpha": w / r ** alpha,
                                   "gap": float(gp)})
        slope, _, resid = fit_loglog(slope_r, gaps)
        report.fits.append({"alpha": alpha, "quantity": "gamma*r - omega vs r",
                            "range": [slope_lo, slope_hi], "slope": slope, "residual": resid})

        low = abs(omega_delta(p, r_lo, tol) / r_lo - gamma)
        high_r = np.geomspace(r_hi, r_max, 5)
        high = max(abs(omega_delta(p, float(r), tol) / r ** alpha / lam - 1.0) for r in high_r)
        tag = f"alpha={alpha:g}"
        report.add_verdict(f"low_frequency_ratio[{tag}]", low <= tols["low_frequency_ratio"],
                           low, ["low_frequency_ratio"], "|omega(r)/r - gamma| <= {low_frequency_ratio:g}",
                           f"r={r_lo:g}, gamma={gamma!r}")
        report.add_verdict(f"gap_slope[{tag}]",
                           _within(slope, tols["gap_slope_target"], tols["gap_slope_tol"]),
                           slope, ["gap_slope_target", "gap_slope_tol"],
                           "slope = {gap_slope_target:g} +/- {gap_slope_tol:g}",
                           f"r in [{slope_lo:g}, {slope_hi:g}], residual={resid:.3g}")
        report.add_verdict(f"high_frequency[{tag}]", high <= tols["high_frequency_rel"], high,
                           ["high_frequency_rel"], "|omega/r^alpha / lambda - 1| <= {high_frequency_rel:g}",
                           f"r >= {r_hi:g}, lambda={lam!r}")
    return report


def run_delta_convergence(config):
    """Sup-in-time gap between peridynamic and wave solutions along the delta sweep."""
    deltas = config.deltas
    if len(deltas) < 4:
        raise ConfigurationError("delta sweep needs at least 4 values")
    ratios = [a / b for a, b in zip(deltas, deltas[1:])]
    if not np.allclose(ratios, ratios[0], rtol=1e-9) or ratios[0] <= 1:
        raise ConfigurationError("delta sweep must be geometric and decreasing")
    report = _new_report("delta-convergence", config)
    exp = config.experiment
    R, T = float(exp["R"]), float(exp["T"])
    times = _times(T, exp["n_times"])
    state0 = initial_state(config, R)
    memo = _Frequencies(config)
    tols = config.tolerances
    for alpha in config.alphas:
        rows = {s: [] for s in config.s_values}
        for delta in deltas:
            gaps = sup_gaps(memo.peri(alpha, delta), memo.wave(alpha), state0, times,
                            config.s_values, report.traces,
                            {"alpha": alpha, "delta": delta, "R": R, "T": T})
            for s, (gu, gv, g) in gaps.items():
                rows[s].append(g)
                report.records.append({**_record_base(config), "alpha": alpha, "s": s,
                                       "delta": delta, "R": R, "T": T,
                                       "n_times": int(exp["n_times"]),
                                       "sup_u_gap": gu, "sup_v_gap": gv, "sup_gap": g})
        for s, gaps in rows.items():
            tag = f"alpha={alpha:g},s={s:g}"
            rate, _, resid = fit_loglog(deltas, gaps)
            report.fits.append({"alpha": alpha, "s": s, "quantity": "sup gap vs delta",
                                "slope": rate, "residual": resid})
            decreasing = all(b < a for a, b in zip(gaps, gaps[1:]))
            report.add_verdict(f"monotone[{tag}]", decreasing, gaps, [],
                               "strict decrease along the delta sweep")
            report.add_verdict(f"delta_rate[{tag}]",
                               _within(rate, tols["delta_rate_target"], tols["delta_rate_tol"]),
                               rate, ["delta_rate_target", "delta_rate_tol"],
                               "rate = {delta_rate_target:g} +/- {delta_rate_tol:g}",
                               f"residual={resid:.3g}")
    return report


def run_low_frequency_gap(config):
    """Normalized gaps ``sup_t gap / (T delta R^2 (|u0| + |v0|))`` and their slopes."""
    radii = config.radii
    for R in radii + [float(config.experiment["t_slope_radius"])]:
        if not 0 < R < 1:
            raise ConfigurationError(
                f"R = {R:g} violates the low-frequency hypothesis R in (0, 1)")
    report = _new_report("low-frequency", config)
    exp = config.experiment
    T = float(exp["T"])
    tols = config.tolerances
    vac = tols["vacuous_regime"]
    deltas = config.deltas
    memo = _Frequencies(config)
    states = {R: initial_state(config, R) for R in radii}

    def sweep_point(alpha, delta, R, T, study):
        state0 = states[R] if R in states else initial_state(config, R)
        size = l2_norm(state0.u_hat) + l2_norm(state0.v_hat)
        gaps = sup_gaps(memo.peri(alpha, delta), memo.wave(alpha), state0,
                        _times(T, exp["n_times"]), config.s_values, report.traces,
                        {"study": study, "alpha": alpha, "delta": delta, "R": R, "T": T})
        scale = T * delta * R * R
        out = {}
        for s, (gu, gv, g) in gaps.items():
            norm = g / (scale * size) if scale * size > 0 else math.nan
            report.records.append({**_record_base(config), "study": study, "alpha": alpha,
                                   "s": s, "delta": delta, "R": R, "T": T,
                                   "n_times": int(exp["n_times"]), "T_delta_R2": scale,
                                   "vacuous": bool(scale >= vac), "sup_u_gap": gu,
                                   "sup_v_gap": gv, "sup_gap": g, "data_norm": size, "g": norm})
            out[s] = (g, norm, scale < vac)
        return out

    for alpha in config.alphas:
        table = {}
        for delta in deltas:
            for R in radii:
                for s, val in sweep_point(alpha, delta, R, T, "sweep").items():
                    table[(s, delta, R)] = val
        for s in config.s_values:
            tag = f"alpha={alpha:g},s={s:g}"
            live = {k[1:]: v for k, v in table.items() if k[0] == s and v[2]}
            if len(live) >= 2:
                gs = [v[1] for v in live.values()]
                spread = max(gs) / min(gs) if min(gs) > 0 else math.inf
                report.add_verdict(f"g_bounded[{tag}]", spread <= tols["g_spread_max"], spread,
                                   ["g_spread_max"], "max g / min g <= {g_spread_max:g}")
            else:
                report.add_verdict(f"g_bounded[{tag}]", None, None, ["g_spread_max"],
                                   "max g / min g <= {g_spread_max:g}", "estimate vacuous")
            # R slope at the smallest delta, delta slope at the largest R
            d0, r0 = deltas[-1], radii[-1]
            r_pts = [(R, live[(d0, R)][0]) for R in radii if (d0, R) in live]
            d_pts = [(d, live[(d, r0)][0]) for d in deltas if (d, r0) in live]
            for name, pts, keys, where in (
                    ("r_slope", r_pts, ("r_slope_target", "r_slope_tol"), f"delta={d0:g}"),
                    ("delta_slope", d_pts, ("delta_slope_target", "delta_slope_tol"), f"R={r0:g}")):
                if len(pts) < 2:
                    report.add_verdict(f"{name}[{tag}]", None, None, list(keys),
                                       "slope = {%s:g} +/- {%s:g}" % keys, "estimate vacuous")
                    continue
                slope, _, resid = fit_loglog(*zip(*pts))
                report.fits.append({"alpha": alpha, "s": s, "quantity": f"sup gap {name}",
                                    "at": where, "slope": slope, "residual": resid})
                report.add_verdict(f"{name}[{tag}]",
                                   _within(slope, tols[keys[0]], tols[keys[1]]), slope,
                                   list(keys), "slope = {%s:g} +/- {%s:g}" % keys,
                                   f"{where}, residual={resid:.3g}")

        # T slope in the small T delta R^2 regime
        T0 = float(exp["t_slope_base"])
        Rt = float(exp["t_slope_radius"])
        dt_ = deltas[-1]
        Ts = [T0, 2 * T0, 4 * T0]
        small = 4 * T0 * dt_ * Rt * Rt <= tols["small_regime"]
        t_rows = {s: [] for s in config.s_values}
        for Tk in Ts:
            for s, val in sweep_point(alpha, dt_, Rt, Tk, "t_slope").items():
                t_rows[s].append(val[0])
        for s, gaps in t_rows.items():
            tag = f"alpha={alpha:g},s={s:g}"
            slope, _, resid = fit_loglog(Ts, gaps)
            report.fits.append({"alpha": alpha, "s": s, "quantity": "sup gap t_slope",
                                "at": f"delta={dt_:g},R={Rt:g}", "slope": slope,
                                "residual": resid})
            keys = ["t_slope_target", "t_slope_tol", "small_regime"]
            text = "slope = {t_slope_target:g} +/- {t_slope_tol:g} when 4 T0 delta R^2 <= {small_regime:g}"
            ok = _within(slope, tols["t_slope_target"], tols["t_slope_tol"]) if small else None
            report.add_verdict(f"t_slope[{tag}]", ok, slope, keys, text,
                               f"T in [{T0:g}, {4 * T0:g}], delta={dt_:g}, R={Rt:g}, "
                               f"residual={resid:.3g}")
    return report


def _relative_drift(values):
    values = np.asarray(values)
    e0 = values[0]
    if e0 == 0:
        return 0.0 if np.all(values == 0) else math.inf
    return float(np.max(np.abs(values - e0)) / abs(e0))


def energy_traces(peri, wave, state0, times):
    """Peridynamic and wave energies of the peridynamic solution at ``times``."""
    ek, ew = [], []
    for t in times:
        st = evolve(peri, state0, float(t))
        ek.append(energy(st, peri).total)
        ew.append(energy(st, wave).total)
    return np.array(ek), np.array(ew)


def run_energy_drift(config):
    """Conservation of the peridynamic energy and the delta^2 R^2 drift of the wave energy.

    The supremum over ``t >= 0`` is sampled on ``[0, P * 2 pi / (gamma R)]``
    with ``P = energy_periods``: the window spans the same number of periods
    of the fastest populated mode at every radius.
    """
    report = _new_report("energy-drift", config)
    exp = config.experiment
    tols = config.tolerances
    memo = _Frequencies(config)
    d0, r0 = float(exp["energy_delta"]), float(exp["energy_radius"])
    points = [("base", d0, r0), ("half_delta", d0 / 2, r0), ("half_R", d0, r0 / 2)]
    for alpha in config.alphas:
        wave = memo.wave(alpha)
        drift = {}
        for label, delta, R in points:
            peri = memo.peri(alpha, delta)
            window = float(exp["energy_periods"]) * 2 * math.pi / (wave.gamma * R)
            state0 = initial_state(config, R, rescale_time=True)
            times = _times(window, exp["n_times"])
            ek, ew = energy_traces(peri, wave, state0, times)
            report.traces.extend(
                {"alpha": alpha, "point": label, "delta": delta, "R": R, "t": float(t),
                 "energy_peri": a, "energy_wave": b} for t, a, b in zip(times, ek, ew))
            dk, dw = _relative_drift(ek), _relative_drift(ew)
            drift[label] = dw
            scaled = dw / (delta * R) ** 2
            report.records.append({**_record_base(config), "alpha": alpha, "point": label,
                                   "delta": delta, "R": R, "window": window,
                                   "n_times": int(exp["n_times"]), "energy_peri_0": ek[0],
                                   "energy_wave_0": ew[0], "drift_peri": dk, "drift_wave": dw,
                                   "drift_over_delta2_R2": scaled})
            report.add_verdict(f"conserved[alpha={alpha:g},{label}]",
                               dk <= tols["conserved_drift_max"], dk, ["conserved_drift_max"],
                               "relative drift <= {conserved_drift_max:g}")
        c_fit = drift["base"] / (d0 * r0) ** 2
        report.fits.append({"alpha": alpha, "quantity": "wave energy drift / (delta R)^2",
                            "C": c_fit, "admissible_delta_R": d0 * r0})
        for label in ("half_delta", "half_R"):
            ratio = drift["base"] / drift[label] if drift[label] > 0 else math.nan
            if drift["base"] == 0 and drift[label] == 0:
                ok, ratio = True, math.nan
            else:
                ok = tols["drift_ratio_lo"] <= ratio <= tols["drift_ratio_hi"]
            report.add_verdict(f"drift_ratio[alpha={alpha:g},{label}]", ok, ratio,
                               ["drift_ratio_lo", "drift_ratio_hi"],
                               "ratio in [{drift_ratio_lo:g}, {drift_ratio_hi:g}]",
                               f"C={c_fit:.4g}")
    return report


def _symbol_config(config):
    exp = config.experiment
    return (config.params(delta=float(exp["symbol_delta"])),
            float(exp["symbol_box_length"]),
            [int(n) for n in config.sections["sweeps"]["n"]],
            [int(k) for k in config.sections["sweeps"]["modes"]])


def run_symbol_consistency(config):
    """Lattice symbol vs continuum ``omega_delta^2`` under h-halving."""
    report = _new_report("symbol-consistency", config)
    tols = config.tolerances
    base, L, levels, modes = _symbol_config(config)
    levels = sorted(levels)
    d = base.d
    coarse = GridSpec(d, L, levels[0])
    if base.delta / coarse.h < 4:
        raise ConfigurationError("need delta / h >= 4 at the coarsest level")
    rng = np.random.default_rng(np.random.SeedSequence(int(config.experiment["seed"])))
    for alpha in config.alphas:
        p = base.replace(alpha=alpha)
        errors = {k: [] for k in modes}
        for n in levels:
            grid = GridSpec(d, L, n)
            kernel = build_stencil(p, grid)
            sym = discrete_symbol_grid(kernel)
            u = rng.standard_normal((d,) + grid.shape)
            lhs = dft_forward(grid, apply_K_delta(kernel, u)).coeffs
            rhs = -sym[None] * dft_forward(grid, u).coeffs
            identity = float(np.max(np.abs(lhs - rhs)) / np.max(np.abs(rhs)))
            report.add_verdict(f"identity[alpha={alpha:g},n={n}]", identity <= tols["identity_tol"],
                               identity, ["identity_tol"],
                               "max |FFT(K u) + symbol FFT(u)| / max |symbol FFT(u)| <= {identity_tol:g}")
            for k in modes:
                if not 0 <= k < n // 2:
                    raise ConfigurationError(f"test mode {k} is not below Nyquist at n={n}")
                idx = (k,) + (0,) * (d - 1)
                xi = 2 * math.pi * k / L
                disc = float(sym[idx])
                cont = omega_delta(p, xi, config.quad_tol) ** 2
                err = abs(disc - cont)
                errors[k].append(err)
                report.records.append({**_record_base(config), "alpha": alpha, "delta": p.delta,
                                       "symbol_n": n, "h": grid.h, "delta_over_h": p.delta / grid.h,
                                       "mode": k, "xi": xi, "discrete": disc, "continuum": cont,
                                       "error": err})
        hs = [L / n for n in levels]
        for k, errs in errors.items():
            tag = f"alpha={alpha:g},mode={k}"
            order, _, resid = fit_loglog(hs, errs)
            report.fits.append({"alpha": alpha, "mode": k, "quantity": "symbol error vs h",
                                "slope": order, "residual": resid})
            ok = all(b < a for a, b in zip(errs, errs[1:])) or all(e == 0 for e in errs)
            report.add_verdict(f"refinement[{tag}]", ok, errs, [],
                               "error decreases under every h-halving", f"order={order:.3g}")
    return report


def run_bench(config, repeats=3):
    """Time the real-space stencil against the spectral multiplier; no verdicts."""
    report = _new_report("bench", config,
                         volatile=("realspace_ns_per_point", "spectral_ns_per_point"))
    p = config.base_params
    for n in config.sections["sweeps"]["bench_n"]:
        for ratio in config.sections["sweeps"]["bench_ratio"]:
            L = 2 * math.pi
            grid = GridSpec(p.d, L, int(n))
            delta = ratio * grid.h
            if delta >= L / 2:
                continue
            kernel = build_stencil(p.replace(delta=delta), grid)
            sym = discrete_symbol_grid(kernel)
            rng = np.random.default_rng(0)
            u = rng.standard_normal((p.d,) + grid.shape)
            axes = tuple(range(1, p.d + 1))

            def spectral():
                return np.fft.ifftn(-sym[None] * np.fft.fftn(u, axes=axes), axes=axes).real

            t_real = _best_time(lambda: apply_K_delta(kernel, u), repeats)
            t_spec = _best_time(spectral, repeats)
            points = p.d * grid.n ** p.d
            report.records.append({**_record_base(config), "bench_n": int(n),
                                   "delta_over_h": float(ratio),
                                   "stencil_size": int(len(kernel.weights)),
                                   "realspace_ns_per_point": 1e9 * t_real / points,
                                   "spectral_ns_per_point": 1e9 * t_spec / points})
    return report


def _best_time(fn, repeats):
    best = math.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


EXPERIMENTS = {
    "dispersion": run_dispersion,
    "delta-convergence": run_delta_convergence,
    "low-frequency": run_low_frequency_gap,
    "energy-drift": run_energy_drift,
    "symbol-consistency": run_symbol_consistency,
    "bench": run_bench,
}
