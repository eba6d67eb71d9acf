"""Tests for run configuration parsing, scenarios and settings."""

import math

import numpy as np
import pytest

from eddy_lsm.config.run import RunConfig, config_hash, load_config, parse_config, save_config
from eddy_lsm.config.scenarios import DROP_LENGTH, DROP_THICKNESS, drop_deposit, get_scenario, scenario_ids
from eddy_lsm.config.settings import Settings
from eddy_lsm.exceptions import ConfigurationError
from eddy_lsm.models.geometry import PolylineDeposit, SemiDiscDeposit


class TestParseConfig:
    def test_empty_config_is_reference_run(self):
        config = parse_config("")
        assert config.omega == pytest.approx(200.0 * math.pi)
        assert config.probes.count == 32
        assert config.probes.spacing == pytest.approx(2.5e-3)
        assert config.geometry.tube.inner_radius == pytest.approx(9.84e-3)
        assert config.geometry.tube.thickness == pytest.approx(1.27e-3)
        assert config.materials.tube.sigma == pytest.approx(0.97e3)
        assert isinstance(config.geometry.deposits[0], SemiDiscDeposit)
        assert config.band.width is None
        assert config == RunConfig()

    def test_negative_noise(self):
        with pytest.raises(ConfigurationError, match="noise.delta"):
            parse_config("[noise]\ndelta = -0.1\n")

    def test_probe_override_recentres(self):
        config = parse_config("[probes]\ncount = 4\n")
        np.testing.assert_allclose(config.probes.z_positions, [-3.75e-3, -1.25e-3, 1.25e-3, 3.75e-3])
        assert config.probes.z_positions.mean() == pytest.approx(0.0, abs=1e-18)

    def test_unknown_key(self):
        with pytest.raises(ConfigurationError, match="Extra inputs"):
            parse_config("[probes]\ncolour = 'red'\n")

    def test_malformed_toml(self):
        with pytest.raises(ConfigurationError, match="Malformed"):
            parse_config("[probes\ncount = 4")

    def test_all_violations_reported(self):
        text = "[probes]\ncount = 4\nradius = 0.012\n\n[band]\nwidth = 6\n"
        with pytest.raises(ConfigurationError) as info:
            parse_config(text)
        message = str(info.value)
        assert "inside the tube wall" in message
        assert "band width M=6 exceeds probe count N=4" in message

    def test_coil_taller_than_spacing(self):
        with pytest.raises(ConfigurationError, match="coil height"):
            parse_config("[probes]\nkind = 'coil'\ncoil_height = 0.003\n")

    def test_deposit_union(self):
        text = (
            "[[geometry.deposits]]\nkind = 'ellipse'\ncenter_r = 0.0125\ncenter_z = 0.01\n"
            "radius_r = 0.001\nradius_z = 0.002\n"
        )
        config = parse_config(text)
        assert config.geometry.deposits[0].kind == "ellipse"


class TestDerivedValues:
    def test_sampling_grid_defaults(self):
        config = RunConfig()
        grid = config.sampling_grid()
        assert grid.r_lo == pytest.approx(config.geometry.tube.outer_radius)
        assert grid.r_hi == pytest.approx(grid.r_lo + 6e-3)
        assert grid.z_lo == pytest.approx(config.probes.z_positions[0] - 5e-3)
        assert (grid.n_r, grid.n_z) == (40, 120)

    def test_overrides(self, tmp_path):
        config = RunConfig().with_overrides(seed=9, band_convention="inclusive", output_directory=tmp_path)
        assert config.noise.seed == 9
        assert config.band.convention == "inclusive"
        assert config.output.directory == tmp_path

    def test_hash_tracks_content(self):
        assert config_hash(RunConfig()) == config_hash(RunConfig())
        assert RunConfig().config_hash() != RunConfig(omega=100.0).config_hash()

    def test_hash_ignores_output_directory(self, tmp_path):
        moved = RunConfig().with_overrides(output_directory=tmp_path / "elsewhere")
        assert moved.config_hash() == RunConfig().config_hash()
        assert moved.with_overrides(seed=5).config_hash() != moved.config_hash()

    def test_region_specs(self):
        config = RunConfig()
        assert len(config.region_specs()) == 2
        assert len(config.region_specs(with_deposits=False)) == 1


class TestConfigFiles:
    def test_toml_file(self, tmp_path):
        path = tmp_path / "run.toml"
        path.write_text("name = 'file'\n[probes]\nkind = 'coil'\ncount = 8\n")
        config = load_config(path)
        assert config.name == "file"
        assert config.probes.kind == "coil"

    def test_json_snapshot_round_trip(self, tmp_path):
        original = get_scenario("fig10_drop")
        loaded = load_config(save_config(original, tmp_path / "config.json"))
        assert loaded == original
        assert loaded.config_hash() == original.config_hash()

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigurationError, match="not found"):
            load_config(tmp_path / "absent.toml")

    def test_default(self):
        assert load_config(None) == RunConfig()


class TestScenarios:
    def test_registry(self):
        ids = scenario_ids()
        assert len(ids) == 14
        for expected in ("fig5_N4", "fig6_M1", "fig7_coils_N16", "fig8_coils_M8", "fig9_two_deposits", "fig10_drop"):
            assert expected in ids

    @pytest.mark.parametrize("experiment", scenario_ids())
    def test_every_scenario_validates(self, experiment):
        config = get_scenario(experiment)
        assert config.name == experiment
        assert config.noise.delta == 0.01

    def test_band_sweep(self):
        config = get_scenario("fig8_coils_M2")
        assert config.probes.kind == "coil"
        assert config.probes.count == 32
        assert config.band.width == 2

    def test_unknown(self):
        with pytest.raises(ConfigurationError, match="fig5_N4"):
            get_scenario("fig99")

    def test_two_deposits_do_not_overlap(self):
        config = get_scenario("fig9_two_deposits")
        first, second = (d.bounds() for d in config.geometry.deposits)
        assert first[3] < second[2]
        assert second[2] - first[3] > 10e-3


class TestDropDeposit:
    def test_dimensions(self):
        drop = drop_deposit()
        assert isinstance(drop, PolylineDeposit)
        r_lo, r_hi, z_lo, z_hi = drop.bounds()
        assert z_hi - z_lo == pytest.approx(DROP_LENGTH)
        assert r_hi - r_lo == pytest.approx(DROP_THICKNESS)

    def test_blunt_end_towards_negative_z(self):
        drop = drop_deposit()
        r = drop.attachment_radius + 1e-3
        assert drop.contains(np.array([r]), np.array([-15e-3]))[0]
        assert not drop.contains(np.array([drop.attachment_radius + 3.5e-3]), np.array([15e-3]))[0]

    def test_rejects_non_positive_size(self):
        with pytest.raises(ValueError):
            drop_deposit(thickness=0.0)


class TestSettings:
    def test_environment_override(self, monkeypatch):
        monkeypatch.setenv("EDDY_LSM_SOLVER__WORKERS", "3")
        monkeypatch.setenv("EDDY_LSM_CACHE__ENABLED", "false")
        fresh = Settings()
        assert fresh.solver.workers == 3
        assert fresh.cache.enabled is False

    def test_defaults(self):
        fresh = Settings()
        assert fresh.solver.point_source_mode == "decomposition"
        assert fresh.solver.singular_value_floor == pytest.approx(1e-14)
        assert fresh.solver.relative_noise is False
