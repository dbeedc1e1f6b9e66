"""File formats: field snapshots, trajectories and energy traces.

Binary field layout: a 32-byte little-endian header ``<8s I I d I I``
(magic, d, n, box length, component count, reserved) followed by the
complex128 coefficients in C order.
"""
import csv
import hashlib
import itertools
import json
import struct
from pathlib import Path

import numpy as np

from .errors import ConfigurationError
from .grid import EvolutionState, GridSpec, SpectralField

MAGIC = b"PWFIELD\0"
_HEADER = struct.Struct("<8s I I d I I")


def field_to_bytes(field):
    grid = field.grid
    header = _HEADER.pack(MAGIC, grid.d, grid.n, grid.box_length, field.coeffs.shape[0], 0)
    return header + np.ascontiguousarray(field.coeffs, dtype="<c16").tobytes()


def field_from_bytes(blob):
    if len(blob) < _HEADER.size:
        raise ConfigurationError("field file is shorter than its header")
    magic, d, n, length, ncomp, _ = _HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise ConfigurationError("not a field file (bad magic)")
    grid = GridSpec(d, length, n)
    count = ncomp * n ** d
    body = blob[_HEADER.size:]
    if len(body) != 16 * count:
        raise ConfigurationError("field file body has the wrong length")
    coeffs = np.frombuffer(body, dtype="<c16").reshape((ncomp,) + grid.shape)
    return SpectralField(grid, coeffs.astype(complex))


def write_field_binary(field, path):
    Path(path).write_bytes(field_to_bytes(field))


def read_field_binary(path):
    return field_from_bytes(Path(path).read_bytes())


def write_field_csv(field, path):
    """One row per mode: lattice indices, then ``re, im`` per component."""
    grid = field.grid
    header = [f"index_{i}" for i in range(grid.d)]
    for c in range(field.coeffs.shape[0]):
        header += [f"re_{c}", f"im_{c}"]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for pos in itertools.product(range(grid.n), repeat=grid.d):
            row = [int(grid.lattice_indices[p]) for p in pos]
            for c in range(field.coeffs.shape[0]):
                z = field.coeffs[(c,) + pos]
                row += [repr(float(z.real)), repr(float(z.imag))]
            writer.writerow(row)


def read_field_csv(path, grid):
    coeffs = np.zeros((grid.d,) + grid.shape, dtype=complex)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        next(reader)
        for row in reader:
            pos = tuple(int(k) % grid.n for k in row[:grid.d])
            vals = [float(v) for v in row[grid.d:]]
            coeffs[(slice(None),) + pos] = np.array(vals[0::2]) + 1j * np.array(vals[1::2])
    return SpectralField(grid, coeffs)


def _sha256(blob):
    return hashlib.sha256(blob).hexdigest()


def write_trajectory(states, directory, describe=None):
    """Write each state as two binary fields plus ``manifest.json``."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    entries = []
    for i, state in enumerate(states):
        entry = {"time": state.time}
        for name, fld in (("u", state.u_hat), ("v", state.v_hat)):
            blob = field_to_bytes(fld)
            fname = f"{name}_{i:05d}.bin"
            (directory / fname).write_bytes(blob)
            entry[name] = {"file": fname, "sha256": _sha256(blob)}
        entries.append(entry)
    manifest = {"grid": states[0].grid.as_dict() if states else None,
                "propagator": describe or {}, "snapshots": entries}
    (directory / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True))
    return directory / "manifest.json"


def read_trajectory(directory):
    """Load a trajectory written by :func:`write_trajectory`, verifying checksums."""
    directory = Path(directory)
    manifest = json.loads((directory / "manifest.json").read_text())
    states = []
    for entry in manifest["snapshots"]:
        fields = {}
        for name in ("u", "v"):
            blob = (directory / entry[name]["file"]).read_bytes()
            if _sha256(blob) != entry[name]["sha256"]:
                raise ConfigurationError(f"checksum mismatch for {entry[name]['file']}")
            fields[name] = field_from_bytes(blob)
        states.append(EvolutionState(fields["u"], fields["v"], entry["time"]))
    return states, manifest


ENERGY_TRACE_HEADER = ["t", "kinetic", "potential", "total", "h_s_gap", "h_sm1_gap"]


def write_energy_trace(rows, path):
    """``rows`` are tuples in :data:`ENERGY_TRACE_HEADER` order."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(ENERGY_TRACE_HEADER)
        for row in rows:
            writer.writerow([repr(float(v)) for v in row])
