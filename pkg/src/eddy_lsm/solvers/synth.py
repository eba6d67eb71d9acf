"""Synthetic multistatic data: point and coil probe arrays, noise, band truncation."""

from typing import Optional

import numpy as np
from loguru import logger

from eddy_lsm.models.fields import ProbeArray
from eddy_lsm.models.results import MultistaticMatrix
from eddy_lsm.solvers.forward import ForwardSolver, IncidentFieldBank, assemble_matrix
from eddy_lsm.solvers.mesh_builder import locate_many
from eddy_lsm.utils.validators import validate_band, validate_band_convention, validate_noise_level, validate_seed


def synthesize_point(
    solver: ForwardSolver, array: ProbeArray, bank: Optional[IncidentFieldBank] = None
) -> MultistaticMatrix:
    """Z_ij = u^s(x_i; x_j) for a point-probe array.

    Args:
        solver: Forward solver on the data mesh (deposit tagged)
        array: Point probe array
        bank: Incident fields of ``array`` on ``solver.mesh``, computed if None

    Returns:
        Clean N x N matrix
    """
    if array.kind != "point":
        raise ValueError(f"synthesize_point needs point probes, got {array.kind!r}")
    bank = bank or solver.incident_bank(array)
    bank = _bind_bank(solver, bank)

    scattered = solver.scattered_values(bank.fields())
    if not np.any(scattered):
        logger.warning("Deposit region is empty: scattered fields vanish")
        return MultistaticMatrix(entries=np.zeros((array.count, array.count), dtype=complex), kind="point")

    triangles, weights = locate_many(solver.mesh, array.positions())
    corners = solver.mesh.triangles[triangles]  # (N, 3)
    entries = np.einsum("ikj,ik->ij", scattered[corners], weights)
    logger.info(f"Synthesized {array.count}x{array.count} point-probe matrix, max |Z|={np.abs(entries).max():.3e}")
    return MultistaticMatrix(entries=entries, kind="point")


def synthesize_coil(
    solver: ForwardSolver,
    array: ProbeArray,
    bank: Optional[IncidentFieldBank] = None,
    reference_radius: Optional[float] = None,
) -> MultistaticMatrix:
    """Coil impedance matrix Z_ij = (i omega / r0) int_D (sigma - sigma0) u_i u0_j r.

    ``u_i`` is the total field of coil i, ``u0_j`` the incident field of coil j
    and ``r0`` defaults to the mid-coil radius.

    Returns:
        Clean N x N matrix; zero (with a warning) if there is no deposit
    """
    if array.kind != "coil":
        raise ValueError(f"synthesize_coil needs coil probes, got {array.kind!r}")
    bank = bank or solver.incident_bank(array)
    bank = _bind_bank(solver, bank)
    r0 = reference_radius or array.source_radius

    deposit = solver.contrast_triangles
    if len(deposit) == 0:
        logger.warning("Deposit region is empty: impedance matrix is zero")
        return MultistaticMatrix(entries=np.zeros((array.count, array.count), dtype=complex), kind="coil")

    incident = bank.values
    total = incident + solver.scattered_values(bank.fields())
    weight = solver.perturbed.sigma[deposit] - solver.reference.sigma[deposit]
    deposit_mass = assemble_matrix(solver.mesh, deposit, np.zeros(len(deposit)), weight, solver.order)

    entries = (1j * solver.omega / r0) * (total.T @ (deposit_mass @ incident))
    logger.info(f"Synthesized {array.count}x{array.count} coil impedance matrix, max |Z|={np.abs(entries).max():.3e}")
    return MultistaticMatrix(entries=np.asarray(entries), kind="coil")


def add_noise(m: MultistaticMatrix, delta: float, seed: int) -> MultistaticMatrix:
    """Multiply every entry by (1 + eta), Re(eta) and Im(eta) uniform on [-delta, delta].

    Raises:
        ValueError: If delta is negative or above 0.5
    """
    delta = validate_noise_level(delta)
    seed = validate_seed(seed)
    if delta == 0.0:
        return m.model_copy(update={"seed": seed})

    rng = np.random.default_rng(seed)
    shape = m.entries.shape
    eta = rng.uniform(-delta, delta, size=shape) + 1j * rng.uniform(-delta, delta, size=shape)
    logger.debug(f"Applied {delta:.2%} multiplicative noise with seed {seed}")
    return m.model_copy(update={"entries": m.entries * (1.0 + eta), "delta": delta, "seed": seed})


def band_mask(count: int, band: int, convention: str = "exclusive") -> np.ndarray:
    """Retained entries of an N x N band: |i-j| <= M-1 (exclusive) or |i-j| <= M (inclusive)."""
    convention = validate_band_convention(convention)
    offset = np.abs(np.subtract.outer(np.arange(count), np.arange(count)))
    reach = band - 1 if convention == "exclusive" else band
    return offset <= reach


def band_truncate(m: MultistaticMatrix, band: int, convention: Optional[str] = None) -> MultistaticMatrix:
    """Zero the entries outside the band of width M.

    Truncating an already banded matrix keeps the narrower band.

    Raises:
        ValueError: If M is outside [1, N]
    """
    band = validate_band(band, m.size)
    convention = validate_band_convention(convention or m.band_convention)
    if m.band is not None and m.band_convention != convention:
        raise ValueError(f"Matrix is banded with the {m.band_convention} convention, not {convention}")

    effective = band if m.band is None else min(band, m.band)
    mask = band_mask(m.size, effective, convention)
    return m.model_copy(
        update={"entries": np.where(mask, m.entries, 0.0), "band": effective, "band_convention": convention}
    )


def _bind_bank(solver: ForwardSolver, bank: IncidentFieldBank) -> IncidentFieldBank:
    if bank.mesh is solver.mesh:
        return bank
    if bank.mesh.fingerprint() != solver.mesh.fingerprint():
        raise ValueError("Incident field bank was computed on a different mesh")
    return bank.model_copy(update={"mesh": solver.mesh})
