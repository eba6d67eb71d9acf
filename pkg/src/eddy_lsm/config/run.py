"""Run configuration: geometry, materials, probes, mesh, noise, band and sampling.

A run configuration is TOML text. Every key has a default taken from the
reference inspection setup, so an empty file describes a complete run::

    omega = 628.3185307179587

    [probes]
    kind = "coil"
    count = 16

    [band]
    width = 4

Unknown keys are rejected.
"""

import hashlib
import json
import math
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path
from typing import List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from eddy_lsm.config.materials import MaterialTable
from eddy_lsm.exceptions import ConfigurationError
from eddy_lsm.models.fields import ProbeArray
from eddy_lsm.models.geometry import DepositSpec, SemiDiscDeposit, TubeAnnulus
from eddy_lsm.models.results import SamplingGrid

OMEGA_DEFAULT = 200.0 * math.pi


class GeometryConfig(BaseModel):
    """Tube wall and deposits."""

    model_config = ConfigDict(extra="forbid")

    tube: TubeAnnulus = Field(default_factory=TubeAnnulus)
    deposits: List[DepositSpec] = Field(default_factory=lambda: [SemiDiscDeposit()])


class MeshConfig(BaseModel):
    """Mesh resolution and truncation extents."""

    model_config = ConfigDict(extra="forbid")

    h: float = Field(0.5e-3, gt=0.0, description="Node spacing near probes, tube and deposits (m)")
    coarse_factor: float = Field(4.0, ge=1.0, description="Spacing multiplier away from the region of interest")
    r_max: Optional[float] = Field(None, gt=0.0, description="Radial truncation, default 3 x tube outer radius")
    z_margin: Optional[float] = Field(None, gt=0.0, description="Axial margin beyond the probe span, default 3 x tube outer radius")
    data_refinement: int = Field(2, ge=1, le=8, description="Refinement of the mesh used to synthesize data")


class NoiseConfig(BaseModel):
    """Multiplicative noise model."""

    model_config = ConfigDict(extra="forbid")

    delta: float = Field(0.01, ge=0.0, le=0.5, description="Relative noise level")
    seed: int = Field(0, ge=0, description="Noise generator seed")


class BandConfig(BaseModel):
    """Band truncation of the data matrix."""

    model_config = ConfigDict(extra="forbid")

    width: Optional[int] = Field(None, ge=1, description="Band width M, omit for full data")
    convention: Literal["exclusive", "inclusive"] = "exclusive"


class SamplingConfig(BaseModel):
    """Sampling rectangle; unset bounds are derived from the geometry."""

    model_config = ConfigDict(extra="forbid")

    r_lo: Optional[float] = Field(None, gt=0.0, description="Default: tube outer radius")
    r_hi: Optional[float] = Field(None, gt=0.0, description="Default: r_lo + 6 mm")
    z_lo: Optional[float] = Field(None, description="Default: first probe - 2 spacings")
    z_hi: Optional[float] = Field(None, description="Default: last probe + 2 spacings")
    n_r: int = Field(40, ge=1, le=1000)
    n_z: int = Field(120, ge=1, le=4000)


class OutputConfig(BaseModel):
    """Where artifacts are written."""

    model_config = ConfigDict(extra="forbid")

    directory: Path = Path("results")
    write_pgm: bool = True


class RunConfig(BaseModel):
    """Complete description of a simulation and reconstruction run."""

    model_config = ConfigDict(extra="forbid")

    name: str = Field("default", description="Run identifier")
    omega: float = Field(OMEGA_DEFAULT, gt=0.0, allow_inf_nan=False, description="Angular frequency (rad/s)")
    materials: MaterialTable = Field(default_factory=MaterialTable)
    geometry: GeometryConfig = Field(default_factory=GeometryConfig)
    probes: ProbeArray = Field(default_factory=ProbeArray)
    mesh: MeshConfig = Field(default_factory=MeshConfig)
    noise: NoiseConfig = Field(default_factory=NoiseConfig)
    band: BandConfig = Field(default_factory=BandConfig)
    sampling: SamplingConfig = Field(default_factory=SamplingConfig)
    output: OutputConfig = Field(default_factory=OutputConfig)

    @model_validator(mode="after")
    def _check_consistency(self) -> "RunConfig":
        errors = []
        tube = self.geometry.tube
        probes = self.probes

        r_lo, r_hi = probes.r_extent
        if r_hi >= tube.inner_radius:
            errors.append(
                f"probes reach r={r_hi:.6g} m, inside the tube wall starting at {tube.inner_radius:.6g} m"
            )
        if probes.kind == "coil" and probes.coil_height > probes.spacing:
            errors.append(
                f"coil height {probes.coil_height:.6g} m exceeds the probe spacing {probes.spacing:.6g} m"
            )

        for k, deposit in enumerate(self.geometry.deposits):
            d_r_lo = deposit.bounds()[0]
            if d_r_lo < tube.outer_radius - 1e-12:
                errors.append(
                    f"deposit {k} starts at r={d_r_lo:.6g} m, inside the tube (outer radius {tube.outer_radius:.6g} m)"
                )

        if self.band.width is not None and self.band.width > probes.count:
            errors.append(f"band width M={self.band.width} exceeds probe count N={probes.count}")

        grid_r_lo = self.sampling.r_lo if self.sampling.r_lo is not None else tube.outer_radius
        if grid_r_lo < tube.outer_radius - 1e-12:
            errors.append(
                f"sampling grid starts at r={grid_r_lo:.6g} m, inside the tube (outer radius {tube.outer_radius:.6g} m)"
            )
        grid_r_hi = self.sampling.r_hi if self.sampling.r_hi is not None else grid_r_lo + 6e-3
        if grid_r_hi <= grid_r_lo:
            errors.append(f"sampling r_hi={grid_r_hi:.6g} must exceed r_lo={grid_r_lo:.6g}")
        if (
            self.sampling.z_lo is not None
            and self.sampling.z_hi is not None
            and self.sampling.z_hi <= self.sampling.z_lo
        ):
            errors.append(f"sampling z_hi={self.sampling.z_hi} must exceed z_lo={self.sampling.z_lo}")

        if self.mesh.r_max is not None:
            needed = max([grid_r_hi, tube.outer_radius] + [d.bounds()[1] for d in self.geometry.deposits])
            if self.mesh.r_max <= needed:
                errors.append(f"mesh r_max={self.mesh.r_max:.6g} m does not enclose the geometry (needs > {needed:.6g} m)")

        if errors:
            raise ValueError("; ".join(errors))
        return self

    # Derived quantities

    def sampling_grid(self) -> SamplingGrid:
        """Sampling grid with geometry-derived defaults filled in."""
        sampling = self.sampling
        z = self.probes.z_positions
        r_lo = sampling.r_lo if sampling.r_lo is not None else self.geometry.tube.outer_radius
        r_hi = sampling.r_hi if sampling.r_hi is not None else r_lo + 6e-3
        z_lo = sampling.z_lo if sampling.z_lo is not None else float(z[0]) - 2.0 * self.probes.spacing
        z_hi = sampling.z_hi if sampling.z_hi is not None else float(z[-1]) + 2.0 * self.probes.spacing
        return SamplingGrid(r_lo=r_lo, r_hi=r_hi, z_lo=z_lo, z_hi=z_hi, n_r=sampling.n_r, n_z=sampling.n_z)

    def region_specs(self, with_deposits: bool = True) -> list:
        specs: list = [self.geometry.tube]
        if with_deposits:
            specs.extend(self.geometry.deposits)
        return specs

    def with_overrides(
        self,
        seed: Optional[int] = None,
        band_convention: Optional[str] = None,
        output_directory: Optional[Path] = None,
    ) -> "RunConfig":
        """Copy with command-line overrides applied and re-validated."""
        data = self.model_dump()
        if seed is not None:
            data["noise"]["seed"] = seed
        if band_convention is not None:
            data["band"]["convention"] = band_convention
        if output_directory is not None:
            data["output"]["directory"] = output_directory
        return RunConfig.model_validate(data)

    def config_hash(self) -> str:
        return config_hash(self)


def config_hash(config: RunConfig) -> str:
    """Short hash of the canonical JSON form of a configuration, output settings excluded."""
    canonical = json.dumps(
        config.model_dump(mode="json", exclude={"output"}), sort_keys=True, separators=(",", ":")
    )
    return hashlib.md5(canonical.encode()).hexdigest()[:16]


def parse_config(text: str) -> RunConfig:
    """Parse and validate TOML run-configuration text.

    Args:
        text: TOML document, possibly empty

    Returns:
        Validated configuration with defaults filled in

    Raises:
        ConfigurationError: If the text is not TOML, has unknown keys or
            violates any invariant (all violations are reported together)
    """
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as e:
        raise ConfigurationError(f"Malformed configuration: {e}") from e

    try:
        return RunConfig.model_validate(data)
    except ValidationError as e:
        problems = []
        for err in e.errors():
            location = ".".join(str(part) for part in err["loc"]) or "config"
            problems.append(f"{location}: {err['msg']}")
        raise ConfigurationError("Invalid configuration: " + "; ".join(problems)) from e


def load_config(path: Union[str, Path, None]) -> RunConfig:
    """Load a configuration file; ``None`` gives the default run.

    ``.json`` files are the snapshots written next to run artifacts; any
    other extension is read as TOML.
    """
    if path is None:
        return RunConfig()
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(f"Configuration file not found: {path}")
    text = path.read_text(encoding="utf-8")
    if path.suffix.lower() != ".json":
        return parse_config(text)
    try:
        return RunConfig.model_validate_json(text)
    except ValidationError as e:
        raise ConfigurationError(f"Invalid configuration snapshot {path}: {e.error_count()} error(s); {e}") from e


def save_config(config: RunConfig, path: Union[str, Path]) -> Path:
    """JSON snapshot of a configuration, reloadable with :func:`load_config`."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(config.model_dump_json(indent=2), encoding="utf-8")
    return path
