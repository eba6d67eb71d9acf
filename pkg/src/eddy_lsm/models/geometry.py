"""Geometric primitives of the axisymmetric (r, z) half-plane."""

import math
from enum import IntEnum
from typing import Annotated, List, Literal, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator


class BoundaryFlag(IntEnum):
    """Per-vertex boundary marker."""

    INTERIOR = 0
    AXIS = 1  # r = 0
    OUTER = 2  # truncation boundary


class RegionTag(IntEnum):
    """Per-triangle material region label."""

    VACUUM = 0
    TUBE = 1
    DEPOSIT = 2


class Point2(BaseModel):
    """A point of the meridian half-plane, coordinates in metres."""

    model_config = ConfigDict(frozen=True)

    r: float = Field(..., ge=0.0, description="Radial coordinate (m)")
    z: float = Field(..., description="Axial coordinate (m)")

    def distance_to(self, other: "Point2") -> float:
        """Euclidean distance in the (r, z) plane."""
        return math.hypot(self.r - other.r, self.z - other.z)

    def __str__(self) -> str:
        return f"({self.r * 1e3:.3f} mm, {self.z * 1e3:.3f} mm)"


class TubeAnnulus(BaseModel):
    """Tube wall between ``inner_radius`` and ``inner_radius + thickness``."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["tube"] = "tube"
    inner_radius: float = Field(9.84e-3, gt=0.0, description="Internal radius R_t (m)")
    thickness: float = Field(1.27e-3, gt=0.0, description="Wall thickness W_t (m)")

    @property
    def tag(self) -> RegionTag:
        return RegionTag.TUBE

    @property
    def outer_radius(self) -> float:
        return self.inner_radius + self.thickness

    def contains(self, r: np.ndarray, z: np.ndarray) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        inside = (r > self.inner_radius) & (r < self.outer_radius)
        return np.broadcast_to(inside, np.broadcast(r, np.asarray(z)).shape)

    def bounds(self) -> Tuple[float, float, float, float]:
        return (self.inner_radius, self.outer_radius, -math.inf, math.inf)


class SemiDiscDeposit(BaseModel):
    """Half ellipse attached to the line ``r = attachment_radius``."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["semi_disc"] = "semi_disc"
    attachment_radius: float = Field(11.11e-3, gt=0.0, description="Tube outer radius (m)")
    radius_r: float = Field(3e-3, gt=0.0, description="Radial semi-axis (m)")
    radius_z: float = Field(5e-3, gt=0.0, description="Axial semi-axis (m)")
    center_z: float = Field(0.0, description="Axial centre (m)")

    @property
    def tag(self) -> RegionTag:
        return RegionTag.DEPOSIT

    def contains(self, r: np.ndarray, z: np.ndarray) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        z = np.asarray(z, dtype=float)
        rho = ((r - self.attachment_radius) / self.radius_r) ** 2 + (
            (z - self.center_z) / self.radius_z
        ) ** 2
        return (r > self.attachment_radius) & (rho < 1.0)

    def bounds(self) -> Tuple[float, float, float, float]:
        return (
            self.attachment_radius,
            self.attachment_radius + self.radius_r,
            self.center_z - self.radius_z,
            self.center_z + self.radius_z,
        )

    def area(self) -> float:
        """Exact area of the half ellipse."""
        return 0.5 * math.pi * self.radius_r * self.radius_z

    def perimeter(self) -> float:
        """Half of Ramanujan's ellipse perimeter plus the straight attachment side."""
        a, b = self.radius_r, self.radius_z
        h = ((a - b) / (a + b)) ** 2
        full = math.pi * (a + b) * (1.0 + 3.0 * h / (10.0 + math.sqrt(4.0 - 3.0 * h)))
        return 0.5 * full + 2.0 * b


class EllipseDeposit(BaseModel):
    """Full ellipse, optionally clipped to ``r > attachment_radius``."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["ellipse"] = "ellipse"
    center_r: float = Field(..., gt=0.0)
    center_z: float = 0.0
    radius_r: float = Field(..., gt=0.0)
    radius_z: float = Field(..., gt=0.0)
    attachment_radius: float = Field(0.0, ge=0.0)

    @property
    def tag(self) -> RegionTag:
        return RegionTag.DEPOSIT

    def contains(self, r: np.ndarray, z: np.ndarray) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        z = np.asarray(z, dtype=float)
        rho = ((r - self.center_r) / self.radius_r) ** 2 + (
            (z - self.center_z) / self.radius_z
        ) ** 2
        return (rho < 1.0) & (r > self.attachment_radius)

    def bounds(self) -> Tuple[float, float, float, float]:
        return (
            max(self.center_r - self.radius_r, self.attachment_radius),
            self.center_r + self.radius_r,
            self.center_z - self.radius_z,
            self.center_z + self.radius_z,
        )


class PolylineDeposit(BaseModel):
    """Closed polygon given by its (r, z) vertices, clipped to ``r > attachment_radius``."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["polyline"] = "polyline"
    vertices: List[Tuple[float, float]] = Field(..., min_length=3)
    attachment_radius: float = Field(0.0, ge=0.0)

    @model_validator(mode="after")
    def _check_vertices(self) -> "PolylineDeposit":
        for r, z in self.vertices:
            if not (math.isfinite(r) and math.isfinite(z)) or r <= 0.0:
                raise ValueError(f"Polyline vertex ({r}, {z}) must be finite with r > 0")
        return self

    @property
    def tag(self) -> RegionTag:
        return RegionTag.DEPOSIT

    def contains(self, r: np.ndarray, z: np.ndarray) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        z = np.asarray(z, dtype=float)
        r, z = np.broadcast_arrays(r, z)
        poly = np.asarray(self.vertices, dtype=float)
        r1, z1 = poly[:, 0], poly[:, 1]
        r2, z2 = np.roll(r1, -1), np.roll(z1, -1)

        # Even-odd ray casting along +r
        inside = np.zeros(r.shape, dtype=bool)
        for a_r, a_z, b_r, b_z in zip(r1, z1, r2, z2):
            straddles = (a_z > z) != (b_z > z)
            with np.errstate(divide="ignore", invalid="ignore"):
                r_cross = a_r + (z - a_z) * (b_r - a_r) / (b_z - a_z)
            inside ^= straddles & (r < r_cross)
        return inside & (r > self.attachment_radius)

    def bounds(self) -> Tuple[float, float, float, float]:
        poly = np.asarray(self.vertices, dtype=float)
        return (
            max(float(poly[:, 0].min()), self.attachment_radius),
            float(poly[:, 0].max()),
            float(poly[:, 1].min()),
            float(poly[:, 1].max()),
        )

    def area(self) -> float:
        """Shoelace area of the unclipped polygon."""
        poly = np.asarray(self.vertices, dtype=float)
        r, z = poly[:, 0], poly[:, 1]
        return 0.5 * abs(float(np.dot(r, np.roll(z, -1)) - np.dot(z, np.roll(r, -1))))


DepositSpec = Annotated[
    Union[SemiDiscDeposit, EllipseDeposit, PolylineDeposit],
    Field(discriminator="kind"),
]

RegionSpec = Annotated[
    Union[TubeAnnulus, SemiDiscDeposit, EllipseDeposit, PolylineDeposit],
    Field(discriminator="kind"),
]
