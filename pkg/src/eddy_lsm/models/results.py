"""Measurement matrices, sampling grids and reconstruction results."""

from datetime import datetime
from enum import IntEnum
from typing import Dict, List, Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator


class MultistaticMatrix(BaseModel):
    """N x N matrix of probe responses, entry (i, j) = receiver i for source j."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    entries: np.ndarray = Field(..., description="Dense complex N x N data")
    kind: Literal["point", "coil"] = Field("point", description="Probe model that produced the data")
    delta: float = Field(0.0, ge=0.0, description="Relative noise level applied")
    band: Optional[int] = Field(None, ge=1, description="Band width M, None for full data")
    band_convention: Literal["exclusive", "inclusive"] = "exclusive"
    seed: Optional[int] = Field(None, description="Noise seed, None if clean")
    config_hash: Optional[str] = None

    @model_validator(mode="after")
    def _check_square(self) -> "MultistaticMatrix":
        shape = self.entries.shape
        if len(shape) != 2 or shape[0] != shape[1]:
            raise ValueError(f"Multistatic matrix must be square, got shape {shape}")
        return self

    @property
    def size(self) -> int:
        return self.entries.shape[0]

    @property
    def provenance(self) -> Literal["clean", "noisy"]:
        return "noisy" if self.delta > 0.0 else "clean"

    @property
    def is_zero(self) -> bool:
        return not np.any(self.entries)

    def symmetry_error(self) -> float:
        """max |Z_ij - Z_ji| / max |Z| (0 for a zero matrix)."""
        scale = np.abs(self.entries).max()
        if scale == 0.0:
            return 0.0
        return float(np.abs(self.entries - self.entries.T).max() / scale)


class SamplingGrid(BaseModel):
    """Uniform cell-centred grid over the probed rectangle."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    r_lo: float = Field(..., gt=0.0)
    r_hi: float = Field(..., gt=0.0)
    z_lo: float
    z_hi: float
    n_r: int = Field(40, ge=1)
    n_z: int = Field(120, ge=1)

    @model_validator(mode="after")
    def _check_bounds(self) -> "SamplingGrid":
        if self.r_hi <= self.r_lo:
            raise ValueError(f"Sampling grid r_hi={self.r_hi} must exceed r_lo={self.r_lo}")
        if self.z_hi <= self.z_lo:
            raise ValueError(f"Sampling grid z_hi={self.z_hi} must exceed z_lo={self.z_lo}")
        return self

    @property
    def r_centers(self) -> np.ndarray:
        dr = (self.r_hi - self.r_lo) / self.n_r
        return self.r_lo + dr * (np.arange(self.n_r) + 0.5)

    @property
    def z_centers(self) -> np.ndarray:
        dz = (self.z_hi - self.z_lo) / self.n_z
        return self.z_lo + dz * (np.arange(self.n_z) + 0.5)

    @property
    def size(self) -> int:
        return self.n_r * self.n_z

    def points(self) -> np.ndarray:
        """(n_z * n_r, 2) points, row-major with z as the outer index."""
        rr, zz = np.meshgrid(self.r_centers, self.z_centers)
        return np.column_stack([rr.ravel(), zz.ravel()])

    def reshape(self, values: np.ndarray) -> np.ndarray:
        """View per-point values as an (n_z, n_r) image."""
        return np.asarray(values).reshape(self.n_z, self.n_r)


class SVDecomposition(BaseModel):
    """Z = U diag(s) Vh with singular values below the floor treated as zero."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    u: np.ndarray
    s: np.ndarray
    vh: np.ndarray
    rank: int = Field(..., ge=0, description="Number of singular values above the floor")

    @property
    def sigma_max(self) -> float:
        return float(self.s[0]) if len(self.s) else 0.0

    def reconstruct(self) -> np.ndarray:
        return (self.u * self.s) @ self.vh


class MorozovFlag(IntEnum):
    """Outcome of the discrepancy-principle root search."""

    OK = 0
    LOWER = 1  # discrepancy unreachable even at the smallest epsilon
    UPPER = 2  # discrepancy not reached at the largest epsilon


class IndicatorField(BaseModel):
    """LSM indicator 1/||g|| over a sampling grid."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    grid: SamplingGrid
    raw: np.ndarray = Field(..., description="1 / ||g|| per grid point")
    epsilon: np.ndarray = Field(..., description="Tikhonov parameter per grid point")
    flags: np.ndarray = Field(..., description="MorozovFlag per grid point")
    discrepancy: Optional[np.ndarray] = Field(
        None, description="| ||Zg - phi|| - delta ||g|| | / (delta ||g||) per grid point"
    )
    delta: float = Field(0.0, ge=0.0)
    config_hash: Optional[str] = None

    @property
    def normalized(self) -> np.ndarray:
        """Affine map of ``raw`` onto [0, 1]."""
        lo, hi = float(self.raw.min()), float(self.raw.max())
        if hi <= lo:
            return np.ones_like(self.raw)
        return (self.raw - lo) / (hi - lo)

    def image(self) -> np.ndarray:
        return self.grid.reshape(self.raw)

    def argmax_point(self) -> tuple[float, float]:
        k = int(np.argmax(self.raw))
        point = self.grid.points()[k]
        return (float(point[0]), float(point[1]))


class ReconstructionMetrics(BaseModel):
    """Geometric localization metrics of one reconstruction."""

    scenario: str = Field(..., description="Scenario or run identifier")
    probe_kind: Literal["point", "coil"]
    probe_count: int = Field(..., ge=1)
    band: Optional[int] = None
    delta: float = Field(..., ge=0.0)

    argmax_r: float = Field(..., description="Radial coordinate of the indicator maximum (m)")
    argmax_z: float = Field(..., description="Axial coordinate of the indicator maximum (m)")
    argmax_inside: bool = Field(..., description="Whether the maximum lies inside a deposit")
    centroid_distance: float = Field(..., ge=0.0, description="Distance to nearest deposit centroid (m)")
    z_error: float = Field(..., ge=0.0, description="|z(argmax) - z(centroid)| (m)")
    contrast: float = Field(..., description="Mean indicator inside / mean outside the deposits")
    local_maxima: int = Field(..., ge=0, description="Peaks of the smoothed indicator")
    deposits_with_peak: int = Field(..., ge=0, description="Deposit components containing a peak")
    deposit_count: int = Field(..., ge=0)
    morozov_satisfied: float = Field(..., ge=0.0, le=1.0, description="Fraction of grid points meeting the discrepancy equality")

    calculated_at: datetime = Field(default_factory=datetime.now)

    @property
    def all_deposits_found(self) -> bool:
        return self.deposit_count > 0 and self.deposits_with_peak == self.deposit_count

    def as_row(self) -> Dict[str, object]:
        """Flat record for tables and CSV export."""
        row = self.model_dump(exclude={"calculated_at"})
        row["band"] = "full" if self.band is None else str(self.band)
        return row


def metrics_columns() -> List[str]:
    return [name for name in ReconstructionMetrics.model_fields if name != "calculated_at"]
