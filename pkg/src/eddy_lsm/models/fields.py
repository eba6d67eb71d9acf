"""Coefficient fields, sources, probe arrays and complex FEM fields."""

from typing import Annotated, List, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from eddy_lsm.models.geometry import Point2
from eddy_lsm.models.mesh import Mesh


class MaterialField(BaseModel):
    """Piecewise-constant (per triangle) conductivity and permeability."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    sigma: np.ndarray = Field(..., description="Per-triangle conductivity (S/m)")
    mu: np.ndarray = Field(..., description="Per-triangle permeability (H/m)")
    perturbed: bool = Field(..., description="True if deposit triangles carry deposit values")


class PointSource(BaseModel):
    """Point source at ``position`` on the probe line."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["point"] = "point"
    position: Point2


class CoilSource(BaseModel):
    """Rectangular coil cross-section with uniform current density."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["coil"] = "coil"
    center: Point2
    width: float = Field(..., gt=0.0, description="Radial extent W_c (m)")
    height: float = Field(..., gt=0.0, description="Axial extent H (m)")
    current_density: float = Field(1.0, description="Azimuthal current density J (A/m^2)")

    @property
    def r_bounds(self) -> tuple[float, float]:
        return (self.center.r - 0.5 * self.width, self.center.r + 0.5 * self.width)

    @property
    def z_bounds(self) -> tuple[float, float]:
        return (self.center.z - 0.5 * self.height, self.center.z + 0.5 * self.height)

    @property
    def area(self) -> float:
        return self.width * self.height

    def contains(self, r: np.ndarray, z: np.ndarray) -> np.ndarray:
        r_lo, r_hi = self.r_bounds
        z_lo, z_hi = self.z_bounds
        r = np.asarray(r)
        z = np.asarray(z)
        return (r > r_lo) & (r < r_hi) & (z > z_lo) & (z < z_hi)


SourceSpec = Annotated[Union[PointSource, CoilSource], Field(discriminator="kind")]


class ProbeArray(BaseModel):
    """Evenly spaced probes on the line ``r = radius`` inside the tube."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: Literal["point", "coil"] = Field("point", description="Probe model")
    count: int = Field(32, ge=1, le=512, description="Number of probes N")
    spacing: float = Field(2.5e-3, gt=0.0, description="Axial spacing between probes (m)")
    z_center: float = Field(0.0, description="Axial centre of the array (m)")
    radius: float = Field(8.165e-3, gt=0.0, description="Probe radius R_s (m)")

    # Coil geometry; the coil centre radius is coil_inner_radius + coil_width / 2
    coil_inner_radius: float = Field(7.83e-3, gt=0.0, description="Internal coil radius R_c (m)")
    coil_width: float = Field(0.67e-3, gt=0.0, description="Coil width W_c (m)")
    coil_height: float = Field(2e-3, gt=0.0, description="Coil height H (m)")
    current_density: float = Field(1.0, description="Coil current density J (A/m^2)")

    @property
    def z_positions(self) -> np.ndarray:
        offsets = np.arange(self.count) - 0.5 * (self.count - 1)
        return self.z_center + offsets * self.spacing

    @property
    def source_radius(self) -> float:
        """Radius at which probes act as sources and receivers."""
        if self.kind == "coil":
            return self.coil_inner_radius + 0.5 * self.coil_width
        return self.radius

    def positions(self) -> np.ndarray:
        """(N, 2) array of probe centres."""
        z = self.z_positions
        return np.column_stack([np.full_like(z, self.source_radius), z])

    def sources(self) -> List[Union[PointSource, CoilSource]]:
        if self.kind == "coil":
            return [
                CoilSource(
                    center=Point2(r=self.source_radius, z=float(z)),
                    width=self.coil_width,
                    height=self.coil_height,
                    current_density=self.current_density,
                )
                for z in self.z_positions
            ]
        return [PointSource(position=Point2(r=self.radius, z=float(z))) for z in self.z_positions]

    @property
    def r_extent(self) -> tuple[float, float]:
        if self.kind == "coil":
            return (self.coil_inner_radius, self.coil_inner_radius + self.coil_width)
        return (self.radius, self.radius)

    @property
    def z_extent(self) -> tuple[float, float]:
        z = self.z_positions
        half = 0.5 * self.coil_height if self.kind == "coil" else 0.0
        return (float(z[0]) - half, float(z[-1]) + half)


class ComplexField(BaseModel):
    """Azimuthal field on a mesh.

    The field is the P1 interpolant of ``values`` plus, for point-source
    incident fields, the analytic part ``singular_amplitude * Phi(.; singular_source)``.
    ``values`` vanish on Axis and Outer vertices.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    mesh: Mesh
    values: np.ndarray = Field(..., description="Nodal regular part, complex per vertex")
    singular_source: Optional[Point2] = None
    singular_amplitude: complex = 0.0

    @property
    def has_singular_part(self) -> bool:
        return self.singular_source is not None and self.singular_amplitude != 0.0

    def __add__(self, other: "ComplexField") -> "ComplexField":
        if other.mesh is not self.mesh:
            raise ValueError("Cannot add fields defined on different meshes")
        if self.has_singular_part and other.has_singular_part:
            raise ValueError("Cannot add two fields that both carry a singular part")
        carrier = self if self.has_singular_part else other
        return ComplexField(
            mesh=self.mesh,
            values=self.values + other.values,
            singular_source=carrier.singular_source,
            singular_amplitude=carrier.singular_amplitude,
        )


class LinearSystem(BaseModel):
    """Discrete system restricted to the free (interior) vertices."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    mesh: Mesh
    matrix: object = Field(..., description="scipy.sparse CSC matrix, complex-symmetric")
    free: np.ndarray = Field(..., description="Mesh vertex index of each unknown")
    rhs: Optional[np.ndarray] = Field(None, description="Load vector(s) on the free vertices")

    @property
    def size(self) -> int:
        return len(self.free)

    @property
    def n_vertices(self) -> int:
        return self.mesh.n_vertices

    def with_rhs(self, rhs: np.ndarray) -> "LinearSystem":
        return self.model_copy(update={"rhs": np.asarray(rhs)})
