"""Structured and graded triangulations of the (r, z) rectangle."""

import math
from typing import Iterable, Sequence, Tuple

import numpy as np
from loguru import logger

from eddy_lsm.config.run import RunConfig
from eddy_lsm.exceptions import MeshError
from eddy_lsm.models.geometry import BoundaryFlag, Point2, RegionTag
from eddy_lsm.models.mesh import Mesh

Band = Tuple[float, float, float]  # (lo, hi, local spacing)


def build_structured_mesh(r_max: float, z_min: float, z_max: float, h: float) -> Mesh:
    """Uniform grid of right triangles with spacing at most ``h``.

    Args:
        r_max: Radial truncation (m)
        z_min: Lower axial bound (m)
        z_max: Upper axial bound (m)
        h: Target node spacing (m)

    Returns:
        Untagged (all vacuum) mesh

    Raises:
        MeshError: If the rectangle is empty or ``h`` is not a usable spacing
    """
    _check_rectangle(r_max, z_min, z_max)
    if not math.isfinite(h) or h <= 0.0:
        raise MeshError(f"Mesh spacing must be finite and positive. Got: {h}")
    if h > min(r_max, z_max - z_min):
        raise MeshError(f"Mesh spacing {h} exceeds the smallest rectangle side {min(r_max, z_max - z_min)}")

    n_r = max(1, math.ceil(r_max / h - 1e-9))
    n_z = max(1, math.ceil((z_max - z_min) / h - 1e-9))
    return build_graded_mesh(np.linspace(0.0, r_max, n_r + 1), np.linspace(z_min, z_max, n_z + 1))


def graded_ticks(
    lo: float,
    hi: float,
    h: float,
    breakpoints: Iterable[float] = (),
    bands: Sequence[Band] = (),
) -> np.ndarray:
    """Grid lines on ``[lo, hi]`` passing through every breakpoint.

    Each interval between consecutive knots (ends, breakpoints and band
    edges) is split uniformly with the finest spacing of the bands covering
    it, or ``h`` if none does.

    Args:
        lo: Interval start
        hi: Interval end
        h: Spacing outside every band
        breakpoints: Coordinates that must be grid lines
        bands: ``(band_lo, band_hi, spacing)`` refinement bands

    Returns:
        Strictly increasing ticks with ``ticks[0] == lo`` and ``ticks[-1] == hi``
    """
    if not hi > lo:
        raise MeshError(f"Empty interval [{lo}, {hi}]")
    if not math.isfinite(h) or h <= 0.0:
        raise MeshError(f"Mesh spacing must be finite and positive. Got: {h}")

    h_min = min([h] + [band[2] for band in bands])
    knots = [lo, hi]
    knots.extend(float(p) for p in breakpoints)
    for band_lo, band_hi, band_h in bands:
        if band_h <= 0.0:
            raise MeshError(f"Band spacing must be positive. Got: {band_h}")
        knots.extend([band_lo, band_hi])

    merged = [lo]
    for k in sorted(k for k in knots if lo < k < hi):
        if k - merged[-1] >= 0.25 * h_min:
            merged.append(k)
    if len(merged) > 1 and hi - merged[-1] < 0.25 * h_min:
        merged[-1] = hi
    else:
        merged.append(hi)

    ticks = [merged[0]]
    for a, b in zip(merged[:-1], merged[1:]):
        mid = 0.5 * (a + b)
        local = min([h] + [bh for blo, bhi, bh in bands if blo <= mid <= bhi])
        count = max(1, math.ceil((b - a) / local - 1e-9))
        ticks.extend(np.linspace(a, b, count + 1)[1:])
    return np.asarray(ticks, dtype=float)


def build_graded_mesh(r_ticks: np.ndarray, z_ticks: np.ndarray) -> Mesh:
    """Triangulate the tensor grid spanned by ``r_ticks`` x ``z_ticks``.

    Args:
        r_ticks: Radial grid lines starting at 0
        z_ticks: Axial grid lines

    Returns:
        Untagged (all vacuum) mesh
    """
    r_ticks = np.asarray(r_ticks, dtype=float)
    z_ticks = np.asarray(z_ticks, dtype=float)
    if r_ticks.ndim != 1 or len(r_ticks) < 2 or len(z_ticks) < 2:
        raise MeshError("Need at least two ticks in each direction")
    if r_ticks[0] != 0.0:
        raise MeshError(f"Radial ticks must start on the axis, got r={r_ticks[0]}")
    if np.any(np.diff(r_ticks) <= 0.0) or np.any(np.diff(z_ticks) <= 0.0):
        raise MeshError("Ticks must be strictly increasing")
    _check_rectangle(float(r_ticks[-1]), float(z_ticks[0]), float(z_ticks[-1]))

    n_r = len(r_ticks) - 1
    n_z = len(z_ticks) - 1

    rr, zz = np.meshgrid(r_ticks, z_ticks)
    vertices = np.column_stack([rr.ravel(), zz.ravel()])

    ii, jj = np.meshgrid(np.arange(n_r), np.arange(n_z))
    v00 = (jj * (n_r + 1) + ii).ravel()
    v10 = v00 + 1
    v01 = v00 + n_r + 1
    v11 = v01 + 1
    triangles = np.empty((2 * n_r * n_z, 3), dtype=np.int64)
    triangles[0::2] = np.column_stack([v00, v10, v11])
    triangles[1::2] = np.column_stack([v00, v11, v01])

    vi, vj = np.meshgrid(np.arange(n_r + 1), np.arange(n_z + 1))
    vi, vj = vi.ravel(), vj.ravel()
    flags = np.full(vertices.shape[0], BoundaryFlag.INTERIOR, dtype=np.int8)
    flags[(vi == n_r) | (vj == 0) | (vj == n_z)] = BoundaryFlag.OUTER
    flags[vi == 0] = BoundaryFlag.AXIS

    mesh = Mesh(
        r_ticks=r_ticks,
        z_ticks=z_ticks,
        vertices=vertices,
        triangles=triangles,
        boundary_flags=flags,
        region_tags=np.full(triangles.shape[0], RegionTag.VACUUM, dtype=np.int8),
    )
    logger.debug(f"Built {mesh!r}")
    return mesh


def tag_regions(mesh: Mesh, specs: Sequence) -> Mesh:
    """Tag every triangle by the region spec containing its centroid.

    Args:
        mesh: Mesh to tag (its existing tags are ignored)
        specs: Region specs (tube annulus, deposits)

    Returns:
        New mesh with region tags; triangles outside all specs are vacuum

    Raises:
        MeshError: If two specs claim the same centroid or a spec leaves the rectangle
    """
    centroids = mesh.centroids()
    tags = np.full(mesh.n_triangles, RegionTag.VACUUM, dtype=np.int8)
    owner = np.full(mesh.n_triangles, -1, dtype=np.int64)

    for k, spec in enumerate(specs):
        r_lo, r_hi, z_lo, z_hi = spec.bounds()
        if r_hi > mesh.r_max or (math.isfinite(z_lo) and (z_lo < mesh.z_min or z_hi > mesh.z_max)):
            raise MeshError(f"Region {k} ({spec.kind}) extends outside the mesh rectangle")

        inside = spec.contains(centroids[:, 0], centroids[:, 1])
        clash = inside & (owner >= 0)
        if np.any(clash):
            t = int(np.flatnonzero(clash)[0])
            raise MeshError(
                f"Overlapping regions {owner[t]} and {k} at triangle {t} "
                f"(centroid r={centroids[t, 0]:.6g}, z={centroids[t, 1]:.6g})"
            )
        owner[inside] = k
        tags[inside] = spec.tag

    logger.debug(
        f"Tagged {np.count_nonzero(tags == RegionTag.TUBE)} tube and "
        f"{np.count_nonzero(tags == RegionTag.DEPOSIT)} deposit triangles"
    )
    return mesh.with_tags(tags)


def locate(mesh: Mesh, p: Point2) -> Tuple[int, np.ndarray]:
    """Containing triangle and barycentric weights of ``p``.

    Raises:
        MeshError: If ``p`` lies outside the mesh rectangle
    """
    triangles, weights = locate_many(mesh, np.array([[p.r, p.z]]))
    return int(triangles[0]), weights[0]


def locate_many(mesh: Mesh, points: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Vectorized :func:`locate` for an (n, 2) array of points.

    Returns:
        Triangle indices (n,) and barycentric weights (n, 3) in the triangle's
        vertex order
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    r, z = points[:, 0], points[:, 1]
    tol = 1e-12 * max(mesh.r_max, mesh.z_max - mesh.z_min)
    outside = (r < -tol) | (r > mesh.r_max + tol) | (z < mesh.z_min - tol) | (z > mesh.z_max + tol)
    if np.any(outside):
        k = int(np.flatnonzero(outside)[0])
        raise MeshError(f"Point (r={r[k]:.6g}, z={z[k]:.6g}) lies outside the mesh rectangle")

    i = np.clip(np.searchsorted(mesh.r_ticks, r, side="right") - 1, 0, mesh.n_r - 1)
    j = np.clip(np.searchsorted(mesh.z_ticks, z, side="right") - 1, 0, mesh.n_z - 1)
    dr = mesh.r_ticks[i + 1] - mesh.r_ticks[i]
    dz = mesh.z_ticks[j + 1] - mesh.z_ticks[j]
    s = (r - mesh.r_ticks[i]) / dr
    t = (z - mesh.z_ticks[j]) / dz

    lower = s >= t
    cell = j * mesh.n_r + i
    triangles = 2 * cell + np.where(lower, 0, 1)
    # lower: (v00, v10, v11); upper: (v00, v11, v01)
    weights = np.where(
        lower[:, None],
        np.column_stack([1.0 - s, s - t, t]),
        np.column_stack([1.0 - t, s, t - s]),
    )
    return triangles, weights


def build_problem_mesh(config: RunConfig, refinement: int = 1, with_deposits: bool = True) -> Mesh:
    """Graded, tagged mesh for a run configuration.

    Probe, coil, tube and deposit edges are grid lines. Spacing is
    ``config.mesh.h / refinement`` over the band holding probes, tube,
    deposits and sampling grid, and ``coarse_factor`` times larger elsewhere.

    Args:
        config: Run configuration
        refinement: Spacing divisor (the synthetic-data mesh uses ``data_refinement``)
        with_deposits: Tag deposits (False gives the deposit-free reference geometry)

    Returns:
        Tagged mesh
    """
    if refinement < 1:
        raise MeshError(f"Refinement must be >= 1. Got: {refinement}")

    h = config.mesh.h / refinement
    coarse = h * config.mesh.coarse_factor
    # extents and band margins are fixed by the unrefined spacing
    margin = config.mesh.h * config.mesh.coarse_factor
    tube = config.geometry.tube
    probes = config.probes
    grid = config.sampling_grid()
    deposits = config.geometry.deposits

    # Radial layout
    r_points = [tube.inner_radius, tube.outer_radius, grid.r_lo, grid.r_hi, *probes.r_extent, probes.source_radius]
    for deposit in deposits:
        d_r_lo, d_r_hi, _, _ = deposit.bounds()
        r_points.extend([d_r_lo, d_r_hi])
    fine_r = (max(min(r_points) - 2.0 * margin, 0.0), max(r_points) + 2.0 * margin)
    r_max = config.mesh.r_max or 3.0 * tube.outer_radius
    r_max = max(r_max, fine_r[1] + margin)

    # Axial layout: span of probes, grid and deposits plus z_margin on each side
    z_points = [*probes.z_extent, grid.z_lo, grid.z_hi]
    for deposit in deposits:
        _, _, d_z_lo, d_z_hi = deposit.bounds()
        z_points.extend([d_z_lo, d_z_hi])
    z_margin = config.mesh.z_margin or 3.0 * tube.outer_radius
    z_lo = min(z_points) - z_margin
    z_hi = max(z_points) + z_margin
    fine_z = (max(min(z_points) - 2.0 * margin, z_lo), min(max(z_points) + 2.0 * margin, z_hi))

    z_breaks = list(probes.z_positions)
    if probes.kind == "coil":
        half = 0.5 * probes.coil_height
        z_breaks.extend(probes.z_positions - half)
        z_breaks.extend(probes.z_positions + half)
    for deposit in deposits:
        z_breaks.extend(deposit.bounds()[2:])

    r_ticks = graded_ticks(0.0, r_max, coarse, breakpoints=r_points, bands=[(fine_r[0], fine_r[1], h)])
    z_ticks = graded_ticks(z_lo, z_hi, coarse, breakpoints=z_breaks, bands=[(fine_z[0], fine_z[1], h)])

    mesh = tag_regions(build_graded_mesh(r_ticks, z_ticks), config.region_specs(with_deposits))
    logger.info(
        f"Problem mesh (refinement {refinement}): {mesh.n_vertices} vertices, "
        f"{mesh.n_triangles} triangles, r_max={r_max * 1e3:.2f} mm, "
        f"z=[{z_lo * 1e3:.2f}, {z_hi * 1e3:.2f}] mm"
    )
    return mesh


def _check_rectangle(r_max: float, z_min: float, z_max: float) -> None:
    for name, value in (("r_max", r_max), ("z_min", z_min), ("z_max", z_max)):
        if not math.isfinite(value):
            raise MeshError(f"{name} must be finite. Got: {value}")
    if r_max <= 0.0:
        raise MeshError(f"r_max must be positive. Got: {r_max}")
    if z_max <= z_min:
        raise MeshError(f"z_max={z_max} must exceed z_min={z_min}")


def mesh_summary(mesh: Mesh) -> dict:
    """Counts per region and extents, for CLI tables."""
    return {
        "vertices": mesh.n_vertices,
        "triangles": mesh.n_triangles,
        "free_vertices": int(mesh.free_mask.sum()),
        "tube_triangles": int(np.count_nonzero(mesh.region_tags == RegionTag.TUBE)),
        "deposit_triangles": int(np.count_nonzero(mesh.region_tags == RegionTag.DEPOSIT)),
        "r_max": mesh.r_max,
        "z_min": mesh.z_min,
        "z_max": mesh.z_max,
        "max_spacing": mesh.max_spacing,
    }
