"""Geometric localization metrics of an indicator field against the true deposits."""

from typing import List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger
from scipy import ndimage

from eddy_lsm.models.fields import ProbeArray
from eddy_lsm.models.results import IndicatorField, MorozovFlag, ReconstructionMetrics

PEAK_THRESHOLD = 0.5
DISCREPANCY_TOLERANCE = 1e-6


def deposit_masks(deposits: Sequence, points: np.ndarray) -> List[np.ndarray]:
    """One boolean mask over ``points`` per deposit."""
    return [np.asarray(d.contains(points[:, 0], points[:, 1]), dtype=bool) for d in deposits]


def deposit_centroids(deposits: Sequence, points: np.ndarray) -> np.ndarray:
    """(n_deposits, 2) centroids of the grid points inside each deposit.

    A deposit that covers no grid point falls back to the centre of its
    bounding box.
    """
    centroids = []
    for deposit, mask in zip(deposits, deposit_masks(deposits, points)):
        if np.any(mask):
            centroids.append(points[mask].mean(axis=0))
        else:
            r_lo, r_hi, z_lo, z_hi = deposit.bounds()
            centroids.append(np.array([0.5 * (r_lo + r_hi), 0.5 * (z_lo + z_hi)]))
    return np.array(centroids).reshape(-1, 2)


def local_maxima(field: IndicatorField, threshold: float = PEAK_THRESHOLD) -> List[Tuple[float, float]]:
    """Peaks of the 3x3-smoothed normalized indicator above ``threshold``.

    Plateaus of equal maxima count once; each peak is reported at the grid
    point of its connected plateau with the largest smoothed value.
    """
    image = field.grid.reshape(field.normalized)
    smoothed = ndimage.uniform_filter(image, size=3, mode="nearest")
    peak = (smoothed == ndimage.maximum_filter(smoothed, size=3, mode="nearest")) & (smoothed >= threshold)

    labels, count = ndimage.label(peak)
    r, z = field.grid.r_centers, field.grid.z_centers
    peaks = []
    for k in range(1, count + 1):
        flat = np.flatnonzero((labels == k).ravel())
        best = flat[np.argmax(smoothed.ravel()[flat])]
        iz, ir = np.unravel_index(best, image.shape)
        peaks.append((float(r[ir]), float(z[iz])))
    return peaks


def contrast_ratio(field: IndicatorField, inside: np.ndarray) -> float:
    """Mean indicator inside the deposits over the mean outside (nan if either set is empty)."""
    if not np.any(inside) or np.all(inside):
        return float("nan")
    return float(field.raw[inside].mean() / field.raw[~inside].mean())


def morozov_satisfied(field: IndicatorField, tolerance: float = DISCREPANCY_TOLERANCE) -> float:
    """Fraction of unflagged grid points meeting the discrepancy equality to ``tolerance``."""
    ok = field.flags == MorozovFlag.OK
    if field.discrepancy is None or not np.any(ok):
        return 0.0
    return float(np.mean(field.discrepancy[ok] < tolerance))


def compute_metrics(
    field: IndicatorField,
    deposits: Sequence,
    probes: ProbeArray,
    band: Optional[int],
    scenario: str = "run",
) -> ReconstructionMetrics:
    """Localization metrics of one reconstruction.

    Raises:
        ValueError: If there is no deposit to compare against
    """
    if not deposits:
        raise ValueError("Localization metrics need at least one deposit")

    points = field.grid.points()
    masks = deposit_masks(deposits, points)
    inside = np.logical_or.reduce(masks)
    centroids = deposit_centroids(deposits, points)

    argmax = np.array(field.argmax_point())
    distances = np.hypot(*(centroids - argmax).T)
    nearest = int(np.argmin(distances))
    argmax_inside = bool(np.any([d.contains(argmax[0], argmax[1]) for d in deposits]))

    peaks = local_maxima(field)
    with_peak = sum(
        1 for d in deposits if any(bool(d.contains(r, z)) for r, z in peaks)
    )

    contrast = contrast_ratio(field, inside)
    if not np.isfinite(contrast):
        logger.warning("Sampling grid does not separate deposit and background points; contrast undefined")

    metrics = ReconstructionMetrics(
        scenario=scenario,
        probe_kind=probes.kind,
        probe_count=probes.count,
        band=band,
        delta=field.delta,
        argmax_r=float(argmax[0]),
        argmax_z=float(argmax[1]),
        argmax_inside=argmax_inside,
        centroid_distance=float(distances[nearest]),
        z_error=float(abs(argmax[1] - centroids[nearest, 1])),
        contrast=contrast,
        local_maxima=len(peaks),
        deposits_with_peak=with_peak,
        deposit_count=len(deposits),
        morozov_satisfied=morozov_satisfied(field),
    )
    logger.info(
        f"Metrics for {scenario}: argmax {'inside' if argmax_inside else 'outside'} deposit, "
        f"z error {metrics.z_error * 1e3:.2f} mm, contrast {contrast:.3f}, {len(peaks)} peak(s)"
    )
    return metrics
