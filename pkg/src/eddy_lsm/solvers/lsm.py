"""Linear Sampling Method with Tikhonov regularization and the Morozov principle.

For every sampling point xi the regularized equation

    eps g + Z* Z g = Z* phi_xi

is solved through one shared SVD of Z, with eps chosen so that
||Z g - phi|| = delta ||g||. The indicator is 1 / ||g||.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Optional, Tuple

import numpy as np
from loguru import logger
from scipy import linalg, optimize

from eddy_lsm.config.settings import settings
from eddy_lsm.exceptions import SingularPointError
from eddy_lsm.models.fields import ProbeArray
from eddy_lsm.models.geometry import Point2, TubeAnnulus
from eddy_lsm.models.results import (
    IndicatorField,
    MorozovFlag,
    MultistaticMatrix,
    SamplingGrid,
    SVDecomposition,
)
from eddy_lsm.solvers.forward import IncidentFieldBank

RHSProvider = Callable[[np.ndarray], np.ndarray]

EPS_LOWER = 1e-16  # bracket, in units of sigma_1^2
EPS_UPPER = 1e4
LOG_TOLERANCE = 1e-10


def compute_svd(z: np.ndarray, floor: Optional[float] = None) -> SVDecomposition:
    """SVD of the data matrix with singular values below ``floor * sigma_1`` dropped.

    Raises:
        ValueError: If the matrix is zero
    """
    z = np.asarray(z, dtype=complex)
    if not np.any(z):
        raise ValueError("no scattering data: the multistatic matrix is zero")
    floor = settings.solver.singular_value_floor if floor is None else floor

    u, s, vh = linalg.svd(z)
    rank = int(np.count_nonzero(s >= floor * s[0]))
    logger.debug(f"SVD: sigma_1={s[0]:.3e}, sigma_N={s[-1]:.3e}, rank {rank}/{len(s)}")
    return SVDecomposition(u=u, s=s, vh=vh, rank=rank)


def _filters(svd: SVDecomposition, eps) -> Tuple[np.ndarray, np.ndarray]:
    """Tikhonov filter s/(s^2+eps) and residual factor eps/(s^2+eps); zero / one beyond the rank."""
    s2 = svd.s**2
    kept = np.arange(len(svd.s)) < svd.rank
    eps = np.asarray(eps, dtype=float)[..., None]
    solution = np.where(kept, svd.s / (s2 + eps), 0.0)
    residual = np.where(kept, eps / (s2 + eps), 1.0)
    return solution, residual


def tikhonov_solve(svd: SVDecomposition, phi: np.ndarray, eps: float) -> np.ndarray:
    """g = sum_s (s / (s^2 + eps)) (u_s^* phi) v_s.

    Raises:
        ValueError: If eps is not positive
    """
    if not eps > 0.0:
        raise ValueError(f"Regularization parameter must be positive. Got: {eps}")
    beta = svd.u.conj().T @ np.asarray(phi, dtype=complex)
    solution, _ = _filters(svd, eps)
    return svd.vh.conj().T @ (solution * beta)


def morozov_function(svd: SVDecomposition, beta: np.ndarray, eps: float, delta: float) -> float:
    """||Z g_eps - phi||^2 - delta^2 ||g_eps||^2 in terms of beta = U^* phi."""
    solution, residual = _filters(svd, eps)
    weight = np.abs(beta) ** 2
    return float(np.sum(residual**2 * weight) - delta**2 * np.sum(solution**2 * weight))


def _discrepancy_target(svd: SVDecomposition, delta: float, relative_noise: bool) -> float:
    return delta * svd.sigma_max if relative_noise else delta


def _root(svd: SVDecomposition, beta: np.ndarray, delta_eff: float) -> Tuple[float, MorozovFlag]:
    scale = svd.sigma_max**2
    log_lo = math.log10(EPS_LOWER * scale)
    log_hi = math.log10(EPS_UPPER * scale)

    def f(log_eps: float) -> float:
        return morozov_function(svd, beta, 10.0**log_eps, delta_eff)

    if f(log_lo) > 0.0:
        return 10.0**log_lo, MorozovFlag.LOWER
    if f(log_hi) < 0.0:
        return 10.0**log_hi, MorozovFlag.UPPER
    log_eps = optimize.bisect(f, log_lo, log_hi, xtol=LOG_TOLERANCE, maxiter=200)
    return 10.0**log_eps, MorozovFlag.OK


def morozov_epsilon(
    svd: SVDecomposition,
    phi: np.ndarray,
    delta: float,
    relative_noise: Optional[bool] = None,
) -> Tuple[float, MorozovFlag]:
    """Tikhonov parameter meeting ||Z g - phi|| = delta_eff ||g||.

    The bisection runs on log10(eps) over [1e-16, 1e4] * sigma_1^2. The
    target is delta itself; with ``relative_noise`` it is delta * sigma_1.

    Returns:
        (eps, flag); a bracket end is returned with LOWER / UPPER when the
        discrepancy cannot be matched inside the bracket

    Raises:
        ValueError: If delta <= 0 or phi = 0
    """
    if not delta > 0.0:
        raise ValueError(f"Morozov principle needs a positive noise level. Got: {delta}")
    phi = np.asarray(phi, dtype=complex)
    if not np.any(phi):
        raise ValueError("Right-hand side is zero")
    relative_noise = settings.solver.relative_noise if relative_noise is None else relative_noise

    beta = svd.u.conj().T @ phi
    return _root(svd, beta, _discrepancy_target(svd, delta, relative_noise))


class IncidentRHS:
    """Right-hand sides phi_xi(i) = u0(x_i; xi) for every probe i.

    Point probes use reciprocity, u0(x_i; xi) = (r_xi / R_s) u0(xi; x_i), so
    the N incident fields with sources at the probes serve every sampling
    point. Coil probes use u0_i(xi) directly.
    """

    def __init__(self, bank: IncidentFieldBank, tube: Optional[TubeAnnulus] = None):
        self.bank = bank
        self.tube = tube
        self.probes: ProbeArray = bank.probes

    def __call__(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        self._check(points)
        values = self.bank.evaluate_many(points)
        if self.probes.kind == "point":
            values = values * (points[:, 0] / self.probes.source_radius)[:, None]
        return values

    def _check(self, points: np.ndarray) -> None:
        if self.tube is not None:
            inside = self.tube.contains(points[:, 0], points[:, 1])
            if np.any(inside):
                k = int(np.flatnonzero(inside)[0])
                raise ValueError(f"Sampling point (r={points[k, 0]:.6g}, z={points[k, 1]:.6g}) lies inside the tube wall")
        probes = self.probes.positions()
        distance = np.hypot(
            points[:, None, 0] - probes[None, :, 0], points[:, None, 1] - probes[None, :, 1]
        )
        if np.any(distance < 1e-6 * self.probes.source_radius):
            raise SingularPointError("Sampling point coincides with a probe")


def rhs_point(array: ProbeArray, xi: Point2, incident_fields: IncidentFieldBank, tube: Optional[TubeAnnulus] = None) -> np.ndarray:
    """phi(i) = (r_xi / R_s) u0_i(xi) for a point-probe array."""
    if array.kind != "point":
        raise ValueError(f"rhs_point needs point probes, got {array.kind!r}")
    return IncidentRHS(incident_fields, tube)(np.array([[xi.r, xi.z]]))[0]


def rhs_coil(array: ProbeArray, xi: Point2, incident_fields: IncidentFieldBank, tube: Optional[TubeAnnulus] = None) -> np.ndarray:
    """phi(i) = u0_i(xi) for a coil array."""
    if array.kind != "coil":
        raise ValueError(f"rhs_coil needs coil probes, got {array.kind!r}")
    return IncidentRHS(incident_fields, tube)(np.array([[xi.r, xi.z]]))[0]


def run_lsm(
    matrix: MultistaticMatrix,
    grid: SamplingGrid,
    rhs_provider: RHSProvider,
    delta: Optional[float] = None,
    workers: Optional[int] = None,
    relative_noise: Optional[bool] = None,
) -> IndicatorField:
    """Indicator 1/||g|| over a sampling grid.

    Args:
        matrix: Possibly banded and noisy multistatic data
        grid: Sampling grid
        rhs_provider: Maps (P, 2) points to (P, N) right-hand sides
        delta: Noise level, defaults to the matrix metadata
        workers: Threads for the per-point root searches
        relative_noise: Scale the discrepancy target by sigma_1 (off by default)

    Returns:
        Indicator field with per-point epsilon, flag and discrepancy

    Raises:
        ValueError: If the matrix is zero ("no scattering data") or delta <= 0
    """
    delta = matrix.delta if delta is None else delta
    if not delta > 0.0:
        raise ValueError(f"Morozov principle needs a positive noise level. Got: {delta}")
    workers = workers or settings.solver.workers
    relative_noise = settings.solver.relative_noise if relative_noise is None else relative_noise

    svd = compute_svd(matrix.entries)
    delta_eff = _discrepancy_target(svd, delta, relative_noise)

    points = grid.points()
    phi = np.asarray(rhs_provider(points), dtype=complex)
    if phi.shape != (grid.size, matrix.size):
        raise ValueError(f"Right-hand sides have shape {phi.shape}, expected {(grid.size, matrix.size)}")
    beta = svd.u.conj().T @ phi.T  # (N, P)

    epsilon = np.empty(grid.size)
    flags = np.empty(grid.size, dtype=np.int8)

    def work(indices: range) -> None:
        for k in indices:
            epsilon[k], flags[k] = _root(svd, beta[:, k], delta_eff)

    chunks = [range(start, min(start + 256, grid.size)) for start in range(0, grid.size, 256)]
    logger.info(f"Running LSM on {grid.size} sampling points with {workers} worker(s), delta={delta:g}")
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(work, chunks))
    else:
        for chunk in chunks:
            work(chunk)

    solution, residual = _filters(svd, epsilon)  # (P, N)
    weight = np.abs(beta.T) ** 2
    g_norm = np.sqrt(np.sum(solution**2 * weight, axis=1))
    misfit = np.sqrt(np.sum(residual**2 * weight, axis=1))

    with np.errstate(divide="ignore", invalid="ignore"):
        raw = np.where(g_norm > 0.0, 1.0 / g_norm, 0.0)
        discrepancy = np.abs(misfit - delta_eff * g_norm) / (delta_eff * g_norm)
    if np.any(g_norm == 0.0):
        logger.warning(f"{int(np.sum(g_norm == 0.0))} sampling points have right-hand sides outside the data range")

    n_flagged = int(np.count_nonzero(flags != MorozovFlag.OK))
    if n_flagged:
        logger.warning(f"Morozov bracket hit at {n_flagged}/{grid.size} sampling points")

    return IndicatorField(
        grid=grid,
        raw=raw,
        epsilon=epsilon,
        flags=flags,
        discrepancy=discrepancy,
        delta=delta,
        config_hash=matrix.config_hash,
    )
