"""Triangular mesh of the truncated (r, z) rectangle."""

import hashlib
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from eddy_lsm.models.geometry import BoundaryFlag, Point2, RegionTag


class Mesh(BaseModel):
    """Tensor-product triangulation of ``[0, r_max] x [z_min, z_max]``.

    Vertex ``(i, j)`` (radial tick ``i``, axial tick ``j``) has index
    ``j * (n_r + 1) + i``. Grid cell ``c = j * n_r + i`` is split along its
    rising diagonal into triangles ``2c`` (below the diagonal) and ``2c + 1``.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    r_ticks: np.ndarray = Field(..., description="Strictly increasing radial grid lines, r_ticks[0] = 0")
    z_ticks: np.ndarray = Field(..., description="Strictly increasing axial grid lines")
    vertices: np.ndarray = Field(..., description="(n_vertices, 2) array of (r, z)")
    triangles: np.ndarray = Field(..., description="(n_triangles, 3) counterclockwise vertex indices")
    boundary_flags: np.ndarray = Field(..., description="Per-vertex BoundaryFlag")
    region_tags: np.ndarray = Field(..., description="Per-triangle RegionTag")

    @model_validator(mode="after")
    def _check_shapes(self) -> "Mesh":
        n_vertices = (len(self.r_ticks)) * (len(self.z_ticks))
        n_triangles = 2 * (len(self.r_ticks) - 1) * (len(self.z_ticks) - 1)
        if self.vertices.shape != (n_vertices, 2):
            raise ValueError(f"Expected {n_vertices} vertices, got array of shape {self.vertices.shape}")
        if self.triangles.shape != (n_triangles, 3):
            raise ValueError(f"Expected {n_triangles} triangles, got array of shape {self.triangles.shape}")
        if self.boundary_flags.shape != (n_vertices,):
            raise ValueError("boundary_flags must have one entry per vertex")
        if self.region_tags.shape != (n_triangles,):
            raise ValueError("region_tags must have one entry per triangle")
        return self

    # Grid dimensions

    @property
    def n_r(self) -> int:
        """Number of radial cells."""
        return len(self.r_ticks) - 1

    @property
    def n_z(self) -> int:
        """Number of axial cells."""
        return len(self.z_ticks) - 1

    @property
    def n_vertices(self) -> int:
        return self.vertices.shape[0]

    @property
    def n_triangles(self) -> int:
        return self.triangles.shape[0]

    @property
    def r_max(self) -> float:
        return float(self.r_ticks[-1])

    @property
    def z_min(self) -> float:
        return float(self.z_ticks[0])

    @property
    def z_max(self) -> float:
        return float(self.z_ticks[-1])

    @property
    def rectangle_area(self) -> float:
        return self.r_max * (self.z_max - self.z_min)

    @property
    def max_spacing(self) -> float:
        """Largest grid spacing in either direction."""
        return float(max(np.diff(self.r_ticks).max(), np.diff(self.z_ticks).max()))

    # Geometry

    def vertex_index(self, i: int, j: int) -> int:
        return j * (self.n_r + 1) + i

    def point(self, k: int) -> Point2:
        return Point2(r=float(self.vertices[k, 0]), z=float(self.vertices[k, 1]))

    def corners(self, triangles: Optional[np.ndarray] = None) -> np.ndarray:
        """(n, 3, 2) array of triangle corner coordinates."""
        tri = self.triangles if triangles is None else self.triangles[triangles]
        return self.vertices[tri]

    def signed_areas(self) -> np.ndarray:
        p = self.corners()
        e1 = p[:, 1] - p[:, 0]
        e2 = p[:, 2] - p[:, 0]
        return 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])

    def centroids(self) -> np.ndarray:
        return self.corners().mean(axis=1)

    def contains(self, r: float, z: float) -> bool:
        return 0.0 <= r <= self.r_max and self.z_min <= z <= self.z_max

    # Degrees of freedom

    @property
    def free_mask(self) -> np.ndarray:
        """Vertices carrying an unknown (neither Axis nor Outer)."""
        return self.boundary_flags == BoundaryFlag.INTERIOR

    @property
    def free_vertices(self) -> np.ndarray:
        return np.flatnonzero(self.free_mask)

    def triangles_with_tag(self, tag: RegionTag) -> np.ndarray:
        return np.flatnonzero(self.region_tags == tag)

    def with_tags(self, region_tags: np.ndarray) -> "Mesh":
        """Copy of the mesh carrying new region tags."""
        return self.model_copy(update={"region_tags": np.asarray(region_tags, dtype=np.int8)})

    def fingerprint(self) -> str:
        """Stable hash of geometry and tags, used as a cache key component."""
        digest = hashlib.md5()
        for array in (self.r_ticks, self.z_ticks, self.region_tags):
            digest.update(np.ascontiguousarray(array).tobytes())
        return digest.hexdigest()

    def __repr__(self) -> str:
        return (
            f"Mesh(vertices={self.n_vertices}, triangles={self.n_triangles}, "
            f"r_max={self.r_max:.4g}, z=[{self.z_min:.4g}, {self.z_max:.4g}])"
        )
