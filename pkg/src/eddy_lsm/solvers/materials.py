"""Per-triangle material coefficients."""

import numpy as np
from loguru import logger

from eddy_lsm.config.materials import MaterialTable
from eddy_lsm.models.fields import MaterialField
from eddy_lsm.models.geometry import RegionTag
from eddy_lsm.models.mesh import Mesh


def coefficients(mesh: Mesh, table: MaterialTable, perturbed: bool) -> MaterialField:
    """Assign sigma and mu to each triangle from its region tag.

    Args:
        mesh: Tagged mesh
        table: Material table
        perturbed: If False, deposit triangles receive the vacuum values

    Returns:
        Piecewise-constant material field

    Raises:
        ValueError: If the mesh carries an unknown tag
    """
    known = {int(tag) for tag in RegionTag}
    unknown = set(np.unique(mesh.region_tags).tolist()) - known
    if unknown:
        raise ValueError(f"Unknown region tags on mesh: {sorted(unknown)}")

    sigma = np.empty(mesh.n_triangles)
    mu = np.empty(mesh.n_triangles)
    for tag in RegionTag:
        selected = mesh.region_tags == tag
        if tag == RegionTag.DEPOSIT and not perturbed:
            props = table.vacuum
        else:
            props = table.for_tag(tag)
        sigma[selected] = props.sigma
        mu[selected] = props.mu

    logger.debug(f"Assigned {'perturbed' if perturbed else 'reference'} coefficients to {mesh.n_triangles} triangles")
    return MaterialField(sigma=sigma, mu=mu, perturbed=perturbed)


def contrast_support(reference: MaterialField, perturbed: MaterialField) -> np.ndarray:
    """Triangles where the two fields differ."""
    return np.flatnonzero((reference.sigma != perturbed.sigma) | (reference.mu != perturbed.mu))
