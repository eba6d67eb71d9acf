"""Shared fixtures for the eddy-lsm test suite."""

import math

import numpy as np
import pytest

from eddy_lsm.config.materials import MU_VACUUM, MaterialProperties, MaterialTable
from eddy_lsm.config.run import MeshConfig, NoiseConfig, RunConfig, SamplingConfig
from eddy_lsm.config.settings import SolverSettings, settings
from eddy_lsm.models.fields import ProbeArray


@pytest.fixture(autouse=True)
def no_disk_cache(monkeypatch, tmp_path):
    """Keep incident-field banks out of the working directory."""
    monkeypatch.setattr(settings.cache, "enabled", False)
    monkeypatch.setattr(settings.cache, "directory", tmp_path / "cache")


@pytest.fixture
def omega():
    return 200.0 * math.pi


@pytest.fixture
def table():
    return MaterialTable()


@pytest.fixture
def vacuum_table():
    """Every region behaves like vacuum except the deposit."""
    return MaterialTable(tube=MaterialProperties(sigma=0.0, mu=MU_VACUUM))


@pytest.fixture
def solver_settings():
    return SolverSettings()


@pytest.fixture
def small_config():
    """Four point probes on a coarse mesh; fast enough for unit tests."""
    return RunConfig(
        name="small",
        probes=ProbeArray(kind="point", count=4),
        mesh=MeshConfig(h=1e-3, data_refinement=1),
        noise=NoiseConfig(delta=0.01, seed=3),
        sampling=SamplingConfig(n_r=6, n_z=12),
    )


@pytest.fixture
def small_coil_config():
    return RunConfig(
        name="small_coils",
        probes=ProbeArray(kind="coil", count=4),
        mesh=MeshConfig(h=0.5e-3, data_refinement=1),
        noise=NoiseConfig(delta=0.01, seed=3),
        sampling=SamplingConfig(n_r=6, n_z=12),
    )


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
