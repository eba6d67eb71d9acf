"""Tests for synthetic multistatic data, noise and band truncation."""

import numpy as np
import pytest

from eddy_lsm.config.materials import MU_VACUUM, MaterialProperties, MaterialTable
from eddy_lsm.config.settings import SolverSettings
from eddy_lsm.models.results import MultistaticMatrix
from eddy_lsm.solvers.forward import ForwardSolver
from eddy_lsm.solvers.mesh_builder import build_problem_mesh
from eddy_lsm.solvers.synth import add_noise, band_mask, band_truncate, synthesize_coil, synthesize_point


@pytest.fixture
def matrix(rng):
    entries = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
    return MultistaticMatrix(entries=entries + entries.T, kind="point")


class TestNoise:
    def test_multiplicative_bounds(self, matrix):
        noisy = add_noise(matrix, 0.05, seed=7)
        eta = noisy.entries / matrix.entries - 1.0
        assert np.abs(eta.real).max() <= 0.05
        assert np.abs(eta.imag).max() <= 0.05
        assert noisy.delta == 0.05
        assert noisy.seed == 7
        assert noisy.provenance == "noisy"

    def test_reproducible(self, matrix):
        a = add_noise(matrix, 0.01, seed=1)
        b = add_noise(matrix, 0.01, seed=1)
        c = add_noise(matrix, 0.01, seed=2)
        np.testing.assert_array_equal(a.entries, b.entries)
        assert not np.array_equal(a.entries, c.entries)

    def test_zero_noise_keeps_entries(self, matrix):
        clean = add_noise(matrix, 0.0, seed=4)
        np.testing.assert_array_equal(clean.entries, matrix.entries)
        assert clean.provenance == "clean"

    @pytest.mark.parametrize("delta", [-0.01, 0.6, float("nan")])
    def test_invalid_level(self, matrix, delta):
        with pytest.raises(ValueError):
            add_noise(matrix, delta, seed=0)

    def test_invalid_seed(self, matrix):
        with pytest.raises(ValueError):
            add_noise(matrix, 0.01, seed=-1)


class TestBand:
    def test_exclusive_single_probe_is_diagonal(self):
        np.testing.assert_array_equal(band_mask(5, 1), np.eye(5, dtype=bool))

    def test_inclusive_is_one_wider(self):
        mask = band_mask(5, 1, "inclusive")
        assert mask.sum() == 5 + 2 * 4
        np.testing.assert_array_equal(band_mask(5, 2, "exclusive"), mask)

    def test_full_band_keeps_everything(self, matrix):
        truncated = band_truncate(matrix, matrix.size)
        np.testing.assert_array_equal(truncated.entries, matrix.entries)
        assert truncated.band == matrix.size

    def test_entries_outside_band_vanish(self, matrix):
        truncated = band_truncate(matrix, 2)
        i, j = np.indices(truncated.entries.shape)
        assert not np.any(truncated.entries[np.abs(i - j) > 1])
        np.testing.assert_array_equal(truncated.entries[np.abs(i - j) <= 1], matrix.entries[np.abs(i - j) <= 1])

    def test_composition_keeps_narrower_band(self, matrix):
        once = band_truncate(band_truncate(matrix, 4), 2)
        twice = band_truncate(band_truncate(matrix, 2), 4)
        assert once.band == twice.band == 2
        np.testing.assert_array_equal(once.entries, twice.entries)

    @pytest.mark.parametrize("band", [0, 7])
    def test_out_of_range(self, matrix, band):
        with pytest.raises(ValueError):
            band_truncate(matrix, band)

    def test_mixed_conventions_rejected(self, matrix):
        with pytest.raises(ValueError, match="convention"):
            band_truncate(band_truncate(matrix, 3, "inclusive"), 2, "exclusive")

    def test_residual_shrinks_with_band(self, matrix):
        gaps = [np.linalg.norm(matrix.entries - band_truncate(matrix, m).entries) for m in range(1, matrix.size + 1)]
        assert np.all(np.diff(gaps) < 0.0)
        assert gaps[-1] == 0.0

    def test_unknown_convention(self):
        with pytest.raises(ValueError):
            band_mask(4, 2, "diagonal")


class TestSynthesis:
    def test_point_matrix_is_symmetric(self, small_config):
        table = MaterialTable(force_mu_match=True)
        mesh = build_problem_mesh(small_config)
        solver = ForwardSolver(mesh, table, small_config.omega, SolverSettings(point_source_mode="nodal_delta"))
        matrix = synthesize_point(solver, small_config.probes)
        assert matrix.kind == "point"
        assert matrix.size == small_config.probes.count
        assert not matrix.is_zero
        assert matrix.symmetry_error() < 1e-6

    def test_coil_matrix_is_symmetric(self, small_coil_config):
        table = MaterialTable(force_mu_match=True)
        mesh = build_problem_mesh(small_coil_config)
        solver = ForwardSolver(mesh, table, small_coil_config.omega)
        matrix = synthesize_coil(solver, small_coil_config.probes)
        assert matrix.kind == "coil"
        assert not matrix.is_zero
        assert matrix.symmetry_error() < 1e-6

    def test_coil_matrix_quadratic_in_current_density(self, small_coil_config):
        config = small_coil_config
        solver = ForwardSolver(build_problem_mesh(config), config.materials, config.omega)
        probes = config.probes
        base = synthesize_coil(solver, probes)
        doubled = synthesize_coil(solver, probes.model_copy(update={"current_density": 2.0 * probes.current_density}))
        np.testing.assert_allclose(doubled.entries, 4.0 * base.entries, rtol=1e-9, atol=0.0)

    def test_no_deposit_gives_zero_matrix(self, small_config):
        table = MaterialTable(deposit=MaterialProperties(sigma=0.0, mu=MU_VACUUM))
        solver = ForwardSolver(build_problem_mesh(small_config), table, small_config.omega)
        matrix = synthesize_point(solver, small_config.probes)
        assert matrix.is_zero
        assert matrix.symmetry_error() == 0.0

    def test_probe_kind_checked(self, small_config):
        solver = ForwardSolver(build_problem_mesh(small_config), small_config.materials, small_config.omega)
        with pytest.raises(ValueError, match="coil probes"):
            synthesize_coil(solver, small_config.probes)

    def test_bank_from_other_mesh_rejected(self, small_config):
        solver = ForwardSolver(build_problem_mesh(small_config), small_config.materials, small_config.omega)
        other = ForwardSolver(
            build_problem_mesh(small_config, refinement=2), small_config.materials, small_config.omega
        )
        with pytest.raises(ValueError, match="different mesh"):
            synthesize_point(solver, small_config.probes, other.incident_bank(small_config.probes))
