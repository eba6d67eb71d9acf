"""Tests for the end-to-end reconstruction pipeline on small meshes."""

import numpy as np
import pytest

from eddy_lsm.config.run import BandConfig
from eddy_lsm.solvers.pipeline import ReconstructionPipeline


@pytest.fixture
def pipeline(small_config):
    return ReconstructionPipeline(small_config)


class TestSynthesize:
    def test_noise_metadata(self, pipeline):
        matrix = pipeline.synthesize()
        assert matrix.size == 4
        assert matrix.delta == pytest.approx(0.01)
        assert matrix.seed == 3
        assert matrix.config_hash == pipeline.config_hash
        relative = np.abs(matrix.entries / pipeline.clean_matrix.entries - 1.0)
        assert relative.max() <= np.sqrt(2.0) * 0.01 + 1e-12

    def test_band_applied_after_noise(self, small_config):
        config = small_config.model_copy(update={"band": BandConfig(width=2)})
        matrix = ReconstructionPipeline(config).synthesize()
        assert matrix.band == 2
        i, j = np.indices(matrix.entries.shape)
        assert np.all(matrix.entries[np.abs(i - j) > 1] == 0.0)
        assert np.all(matrix.entries[np.abs(i - j) <= 1] != 0.0)

    def test_same_seed_same_matrix(self, small_config):
        first = ReconstructionPipeline(small_config).synthesize()
        second = ReconstructionPipeline(small_config).synthesize()
        np.testing.assert_array_equal(first.entries, second.entries)

    def test_inversion_mesh_has_no_deposit(self, pipeline):
        assert not np.any(pipeline.inversion_mesh.region_tags == 2)
        assert np.any(pipeline.data_mesh.region_tags == 2)


class TestInvert:
    def test_run(self, pipeline):
        result = pipeline.run()
        grid = pipeline.config.sampling_grid()
        assert result.indicator.raw.shape == (grid.size,)
        assert np.all(np.isfinite(result.indicator.raw))
        assert np.all(result.indicator.raw >= 0.0)
        assert result.indicator.raw.max() > 0.0
        assert result.indicator.delta == pytest.approx(0.01)
        assert result.metrics.scenario == "small"
        assert result.metrics.probe_count == 4
        assert result.metrics.deposit_count == 1

    def test_delta_override(self, pipeline):
        matrix = pipeline.synthesize()
        field = pipeline.invert(matrix, delta=0.05)
        assert field.delta == pytest.approx(0.05)

    def test_clean_matrix_falls_back_to_configured_noise(self, pipeline):
        field = pipeline.invert(pipeline.clean_matrix)
        assert field.delta == pytest.approx(pipeline.config.noise.delta)

    def test_wrong_probe_kind(self, pipeline, small_coil_config):
        other = ReconstructionPipeline(small_coil_config.model_copy(update={"name": "x"}))
        matrix = pipeline.synthesize()
        with pytest.raises(ValueError, match="coil"):
            other.invert(matrix)


class TestForwardSnapshot:
    def test_total_is_sum(self, pipeline):
        fields = pipeline.forward_snapshot()
        np.testing.assert_allclose(
            fields["total"].values, fields["incident"].values + fields["scattered"].values
        )
        assert fields["incident"].has_singular_part

    def test_source_out_of_range(self, pipeline):
        with pytest.raises(ValueError, match="out of range"):
            pipeline.forward_snapshot(4)
