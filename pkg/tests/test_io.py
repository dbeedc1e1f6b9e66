import json
import math

import numpy as np
import pytest

from periwave.errors import ConfigurationError
from periwave.grid import GridSpec, band_limited_random
from periwave.io import (ENERGY_TRACE_HEADER, field_from_bytes, field_to_bytes, read_field_binary,
                         read_field_csv, read_trajectory, write_energy_trace, write_field_binary,
                         write_field_csv, write_trajectory)
from periwave.kernel import ModelParams
from periwave.propagator import Peridynamics, trajectory
from periwave.grid import EvolutionState


@pytest.mark.parametrize("grid", [GridSpec(1, 2 * math.pi, 16), GridSpec(2, 3.5, 8)])
def test_binary_round_trip(grid, tmp_path):
    f = band_limited_random(grid, 3.0, 0)
    blob = field_to_bytes(f)
    assert len(blob) == 32 + 16 * grid.d * grid.n ** grid.d
    write_field_binary(f, tmp_path / "f.bin")
    g = read_field_binary(tmp_path / "f.bin")
    assert g.grid == grid and np.array_equal(g.coeffs, f.coeffs)


def test_binary_rejects_garbage():
    with pytest.raises(ConfigurationError):
        field_from_bytes(b"short")
    with pytest.raises(ConfigurationError):
        field_from_bytes(b"X" * 64)
    good = field_to_bytes(band_limited_random(GridSpec(1, 1.0, 8), 5.0, 0))
    with pytest.raises(ConfigurationError):
        field_from_bytes(good[:-16])


def test_csv_round_trip(tmp_path):
    grid = GridSpec(2, 2 * math.pi, 8)
    f = band_limited_random(grid, 2.5, 1)
    write_field_csv(f, tmp_path / "f.csv")
    header = (tmp_path / "f.csv").read_text().splitlines()[0]
    assert header == "index_0,index_1,re_0,im_0,re_1,im_1"
    g = read_field_csv(tmp_path / "f.csv", grid)
    assert np.array_equal(g.coeffs, f.coeffs)


def test_trajectory_manifest(tmp_path):
    grid = GridSpec(1, 2 * math.pi, 32)
    state = EvolutionState(band_limited_random(grid, 4.0, 0), band_limited_random(grid, 4.0, 1))
    peri = Peridynamics.continuum(ModelParams(1, 0.3, 0.5))
    states = trajectory(peri, state, [0.0, 0.5, 1.0])
    write_trajectory(states, tmp_path, peri.describe())
    back, manifest = read_trajectory(tmp_path)
    assert [s.time for s in back] == [0.0, 0.5, 1.0]
    assert manifest["propagator"]["symbol"] == "continuum"
    assert np.array_equal(back[2].v_hat.coeffs, states[2].v_hat.coeffs)
    (tmp_path / "u_00001.bin").write_bytes(field_to_bytes(states[0].u_hat))
    with pytest.raises(ConfigurationError):
        read_trajectory(tmp_path)


def test_energy_trace(tmp_path):
    write_energy_trace([(0.0, 1.0, 2.0, 3.0, 0.0, 0.0)], tmp_path / "e.csv")
    lines = (tmp_path / "e.csv").read_text().splitlines()
    assert lines[0].split(",") == ENERGY_TRACE_HEADER
    assert json.loads("[" + lines[1] + "]") == [0.0, 1.0, 2.0, 3.0, 0.0, 0.0]
