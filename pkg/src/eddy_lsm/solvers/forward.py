"""P1 finite elements for the axisymmetric eddy-current problem.

Weak form on the truncated half-plane, Dirichlet on Axis and Outer vertices:

    a(u, v) = int (1/(mu r)) grad(r u) . grad(r v) - i omega int sigma u v r  = l(v)

Element integrals use a tensor Gauss rule collapsed at the triangle vertex
nearest the axis, so the 1/r weight is integrated exactly on triangles that
touch r = 0 and no quadrature point ever sits on the axis.
"""

from functools import cached_property
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np
from loguru import logger
from pydantic import BaseModel, ConfigDict
from scipy import sparse
from scipy.sparse.linalg import LinearOperator, onenormest, splu

from eddy_lsm.config.materials import MaterialTable
from eddy_lsm.config.settings import SolverSettings, settings
from eddy_lsm.exceptions import MeshError, NumericalError
from eddy_lsm.models.fields import (
    CoilSource,
    ComplexField,
    LinearSystem,
    MaterialField,
    PointSource,
    ProbeArray,
)
from eddy_lsm.models.geometry import BoundaryFlag, Point2, RegionTag
from eddy_lsm.models.mesh import Mesh
from eddy_lsm.solvers.green import green_values
from eddy_lsm.solvers.materials import coefficients, contrast_support
from eddy_lsm.solvers.mesh_builder import locate, locate_many

Source = Union[PointSource, CoilSource]

_CHUNK = 4096


def _collapsed_rule(order: int) -> Tuple[np.ndarray, np.ndarray]:
    """Barycentric points (nq, 3) and reference weights (nq,) of the collapsed Gauss rule.

    The first barycentric coordinate belongs to the collapse vertex. Weights
    include the Duffy Jacobian factor and sum to 1/2.
    """
    x, w = np.polynomial.legendre.leggauss(order)
    u = 0.5 * (x + 1.0)
    wu = 0.5 * w
    s, t = np.meshgrid(u, u, indexing="ij")
    s, t = s.ravel(), t.ravel()
    weights = np.outer(wu, wu).ravel() * s
    lam = np.column_stack([1.0 - s, s * (1.0 - t), s * t])
    return lam, weights


class ElementQuadrature:
    """Quadrature data for a batch of triangles given by their corners (nt, 3, 2)."""

    def __init__(self, corners: np.ndarray, order: int):
        corners = np.asarray(corners, dtype=float)
        lam_ref, w_ref = _collapsed_rule(order)

        collapse = np.argmin(corners[:, :, 0], axis=1)
        roll = (collapse[:, None] + np.arange(3)[None, :]) % 3
        rolled = np.take_along_axis(corners, roll[:, :, None], axis=1)
        unroll = (np.arange(3)[None, :] - collapse[:, None]) % 3

        self.points = np.einsum("qm,tmc->tqc", lam_ref, rolled)
        self.lam = lam_ref[:, unroll].transpose(1, 0, 2)
        self.r = self.points[..., 0]

        p0, p1, p2 = corners[:, 0], corners[:, 1], corners[:, 2]
        det = (p1[:, 0] - p0[:, 0]) * (p2[:, 1] - p0[:, 1]) - (p2[:, 0] - p0[:, 0]) * (p1[:, 1] - p0[:, 1])
        if np.any(det == 0.0):
            raise MeshError("Degenerate triangle in quadrature batch")
        self.weights = np.abs(det)[:, None] * w_ref[None, :]

        grads = np.empty((corners.shape[0], 3, 2))
        grads[:, 0] = np.column_stack([p1[:, 1] - p2[:, 1], p2[:, 0] - p1[:, 0]]) / det[:, None]
        grads[:, 1] = np.column_stack([p2[:, 1] - p0[:, 1], p0[:, 0] - p2[:, 0]]) / det[:, None]
        grads[:, 2] = np.column_stack([p0[:, 1] - p1[:, 1], p1[:, 0] - p0[:, 0]]) / det[:, None]
        self.grads = grads

        # grad(r phi_m) = (phi_m + r d_r phi_m, r d_z phi_m)
        r = self.r[:, :, None]
        self.weighted_grads = np.stack(
            [self.lam + r * grads[:, None, :, 0], r * grads[:, None, :, 1]], axis=-1
        )

    def stiffness(self) -> np.ndarray:
        """int (1/r) grad(r phi_m) . grad(r phi_n), shape (nt, 3, 3)."""
        v = self.weighted_grads
        return np.einsum("tq,tqmc,tqnc->tmn", self.weights / self.r, v, v)

    def mass(self) -> np.ndarray:
        """int phi_m phi_n r, shape (nt, 3, 3)."""
        return np.einsum("tq,tqm,tqn->tmn", self.weights * self.r, self.lam, self.lam)

    def load(
        self,
        stiffness_coef: np.ndarray,
        mass_coef: np.ndarray,
        f: np.ndarray,
        f_r: Optional[np.ndarray] = None,
        f_z: Optional[np.ndarray] = None,
    ) -> np.ndarray:
        """Element loads of a function given at the quadrature points.

        Computes ``int k_s (1/r) grad(r f) . grad(r phi_m) + k_m f phi_m r``
        per triangle with per-triangle coefficients ``k_s`` and ``k_m``.

        Returns:
            (nt, 3) complex element loads
        """
        out = np.einsum("t,tq,tq,tqm->tm", mass_coef, self.weights * self.r, f, self.lam).astype(complex)
        if f_r is not None and f_z is not None and np.any(stiffness_coef != 0.0):
            flux = np.stack([f + self.r * f_r, self.r * f_z], axis=-1)
            out += np.einsum("t,tq,tqc,tqmc->tm", stiffness_coef, self.weights / self.r, flux, self.weighted_grads)
        return out


def element_matrices(corners: np.ndarray, order: Optional[int] = None) -> Tuple[np.ndarray, np.ndarray]:
    """Stiffness and mass element matrices for triangles (nt, 3, 2)."""
    quadrature = ElementQuadrature(corners, order or settings.solver.quadrature_order)
    return quadrature.stiffness(), quadrature.mass()


def local_matrices(
    coords: np.ndarray, mu: float, sigma: float, omega: float, order: Optional[int] = None
) -> np.ndarray:
    """Complex 3x3 element matrix of a(., .) on one triangle.

    Args:
        coords: (3, 2) counterclockwise corners (r, z)
        mu: Permeability on the triangle
        sigma: Conductivity on the triangle
        omega: Angular frequency

    Returns:
        K / mu - i omega sigma M
    """
    stiffness, mass = element_matrices(np.asarray(coords, dtype=float)[None], order)
    return stiffness[0] / mu - 1j * omega * sigma * mass[0]


def assemble_matrix(
    mesh: Mesh,
    triangles: np.ndarray,
    stiffness_coef: np.ndarray,
    mass_coef: np.ndarray,
    order: Optional[int] = None,
) -> sparse.csr_matrix:
    """Global sparse matrix sum_t (k_s K_t + k_m M_t) over selected triangles.

    Returns:
        (n_vertices, n_vertices) CSR matrix, exactly symmetric
    """
    order = order or settings.solver.quadrature_order
    triangles = np.asarray(triangles, dtype=np.int64)
    stiffness_coef = np.asarray(stiffness_coef)
    mass_coef = np.asarray(mass_coef)

    rows, cols, data = [], [], []
    for start in range(0, len(triangles), _CHUNK):
        batch = triangles[start : start + _CHUNK]
        quadrature = ElementQuadrature(mesh.corners(batch), order)
        local = (
            stiffness_coef[start : start + _CHUNK, None, None] * quadrature.stiffness()
            + mass_coef[start : start + _CHUNK, None, None] * quadrature.mass()
        )
        tri = mesh.triangles[batch]
        rows.append(np.repeat(tri, 3, axis=1).ravel())
        cols.append(np.tile(tri, (1, 3)).ravel())
        data.append(local.ravel())

    n = mesh.n_vertices
    if not data:
        return sparse.csr_matrix((n, n), dtype=complex)
    matrix = sparse.coo_matrix(
        (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)
    ).tocsr()
    return ((matrix + matrix.T) * 0.5).tocsr()


def assemble_load(
    mesh: Mesh,
    f: Callable[[np.ndarray, np.ndarray], np.ndarray],
    triangles: Optional[np.ndarray] = None,
    order: Optional[int] = None,
) -> np.ndarray:
    """Load vector int f phi_m r over the mesh (or selected triangles)."""
    order = order or settings.solver.quadrature_order
    triangles = np.arange(mesh.n_triangles) if triangles is None else np.asarray(triangles)
    load = np.zeros(mesh.n_vertices, dtype=complex)
    for start in range(0, len(triangles), _CHUNK):
        batch = triangles[start : start + _CHUNK]
        quadrature = ElementQuadrature(mesh.corners(batch), order)
        values = f(quadrature.points[..., 0], quadrature.points[..., 1])
        ones = np.ones(len(batch))
        local = quadrature.load(np.zeros(len(batch)), ones, np.asarray(values, dtype=complex))
        np.add.at(load, mesh.triangles[batch], local)
    return load


def assemble(mesh: Mesh, mat: MaterialField, omega: float, order: Optional[int] = None) -> LinearSystem:
    """Assemble a(., .) on the free vertices.

    Args:
        mesh: Tagged mesh
        mat: Per-triangle coefficients
        omega: Angular frequency (rad/s)

    Returns:
        Linear system without right-hand side

    Raises:
        ValueError: If a coefficient is not finite
    """
    if not (np.all(np.isfinite(mat.sigma)) and np.all(np.isfinite(mat.mu))):
        raise ValueError("Material coefficients must be finite")
    if np.any(mat.mu <= 0.0):
        raise ValueError("Permeability must be positive")

    full = assemble_matrix(
        mesh, np.arange(mesh.n_triangles), 1.0 / mat.mu, -1j * omega * mat.sigma, order
    )
    free = mesh.free_vertices
    matrix = full[free][:, free].tocsc()
    logger.debug(f"Assembled system with {len(free)} unknowns and {matrix.nnz} nonzeros")
    return LinearSystem(mesh=mesh, matrix=matrix, free=free)


class FactorizedSystem:
    """Sparse LU factorization shared by many right-hand sides."""

    def __init__(self, system: LinearSystem, tolerance: Optional[float] = None):
        self.system = system
        self.tolerance = tolerance or settings.solver.residual_tolerance
        self.lu = splu(sparse.csc_matrix(system.matrix))
        logger.debug(f"Factorized system of size {system.size}")

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        """Solve for one (n,) or several (n, k) right-hand sides on the free vertices.

        Raises:
            NumericalError: If the relative residual stays above the tolerance
                after one step of iterative refinement
        """
        rhs = np.asarray(rhs, dtype=complex)
        single = rhs.ndim == 1
        b = rhs[:, None] if single else rhs
        x = np.zeros_like(b)

        norms = np.linalg.norm(b, axis=0)
        active = norms > 0.0
        if np.any(active):
            b_active = b[:, active]
            x_active = self.lu.solve(b_active)
            residual = self._relative_residual(x_active, b_active, norms[active])
            if residual.max() > self.tolerance:
                x_active = x_active + self.lu.solve(b_active - self.system.matrix @ x_active)
                residual = self._relative_residual(x_active, b_active, norms[active])
            if residual.max() > self.tolerance:
                raise NumericalError(
                    "Linear solve did not reach the residual tolerance",
                    residual=float(residual.max()),
                    condition_estimate=self.condition_estimate(),
                )
            x[:, active] = x_active
        return x[:, 0] if single else x

    def _relative_residual(self, x: np.ndarray, b: np.ndarray, norms: np.ndarray) -> np.ndarray:
        return np.linalg.norm(b - self.system.matrix @ x, axis=0) / norms

    def condition_estimate(self) -> float:
        """1-norm condition number estimate."""
        n = self.system.size
        inverse = LinearOperator(
            (n, n),
            matvec=lambda v: self.lu.solve(np.asarray(v, dtype=complex).ravel()),
            rmatvec=lambda v: np.conj(self.lu.solve(np.conj(np.asarray(v, dtype=complex).ravel()))),
            dtype=complex,
        )
        return float(onenormest(self.system.matrix) * onenormest(inverse))


def solve(system: LinearSystem) -> ComplexField:
    """Solve an assembled system with its right-hand side.

    Raises:
        ValueError: If the system carries no right-hand side
        NumericalError: If the residual contract is not met
    """
    if system.rhs is None:
        raise ValueError("System has no right-hand side")
    return _to_field(system, FactorizedSystem(system).solve(system.rhs))


def _to_field(system: LinearSystem, x: np.ndarray, **singular) -> ComplexField:
    values = np.zeros(system.n_vertices, dtype=complex)
    values[system.free] = x
    return ComplexField(mesh=system.mesh, values=values, **singular)


def _background_at(mesh: Mesh, mat: MaterialField, p: Point2) -> Tuple[int, float, float]:
    """Triangle, mu and sigma of the material at a point source."""
    if p.r <= 0.0 or not (0.0 < p.r < mesh.r_max and mesh.z_min < p.z < mesh.z_max):
        raise MeshError(f"Point source {p} must lie strictly inside the mesh rectangle")
    triangle, _ = locate(mesh, p)
    if mesh.region_tags[triangle] == RegionTag.DEPOSIT:
        raise MeshError(f"Point source {p} lies inside the deposit")
    return triangle, float(mat.mu[triangle]), float(mat.sigma[triangle])


def point_source_loads(
    mesh: Mesh,
    mat_ref: MaterialField,
    omega: float,
    sources: Sequence[PointSource],
    order: Optional[int] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """Loads of the regular parts and the singular amplitudes mu0(x0).

    The regular part of u0 = mu0(x0) Phi + u~ solves a_ref(u~, v) = l(v) with

        l(v) = int (1 - mu0(x0)/mu0) (1/r) grad(r Phi) . grad(r v) + int i omega sigma0 mu0(x0) Phi v r

    which is supported where the background differs from its value at x0.

    Returns:
        Loads (n_vertices, N) and amplitudes (N,)
    """
    order = order or settings.solver.quadrature_order
    loads = np.zeros((mesh.n_vertices, len(sources)), dtype=complex)
    amplitudes = np.zeros(len(sources), dtype=complex)

    for j, source in enumerate(sources):
        x0 = source.position
        _, mu_x0, sigma_x0 = _background_at(mesh, mat_ref, x0)
        if sigma_x0 != 0.0:
            raise MeshError(f"Point source {x0} must lie in a non-conductive region")
        amplitudes[j] = mu_x0

        stiffness_coef = 1.0 / mu_x0 - 1.0 / mat_ref.mu
        mass_coef = 1j * omega * mat_ref.sigma
        support = np.flatnonzero((stiffness_coef != 0.0) | (mass_coef != 0.0))
        for start in range(0, len(support), _CHUNK):
            batch = support[start : start + _CHUNK]
            quadrature = ElementQuadrature(mesh.corners(batch), order)
            phi, phi_r, phi_z = green_values(quadrature.r, quadrature.points[..., 1], x0.r, x0.z)
            local = quadrature.load(
                stiffness_coef[batch], mass_coef[batch], mu_x0 * phi, mu_x0 * phi_r, mu_x0 * phi_z
            )
            np.add.at(loads[:, j], mesh.triangles[batch], local)
    return loads, amplitudes


def nodal_delta_loads(mesh: Mesh, sources: Sequence[PointSource]) -> np.ndarray:
    """Loads r0 v(x0) on the barycentric weights of each source."""
    loads = np.zeros((mesh.n_vertices, len(sources)), dtype=complex)
    for j, source in enumerate(sources):
        triangle, weights = locate(mesh, source.position)
        loads[mesh.triangles[triangle], j] += source.position.r * weights
    return loads


def coil_loads(
    mesh: Mesh, omega: float, sources: Sequence[CoilSource], order: Optional[int] = None
) -> np.ndarray:
    """Loads int i omega J v r over the triangles whose centroid lies in each coil."""
    centroids = mesh.centroids()
    loads = np.zeros((mesh.n_vertices, len(sources)), dtype=complex)
    for j, coil in enumerate(sources):
        inside = np.flatnonzero(coil.contains(centroids[:, 0], centroids[:, 1]))
        if len(inside) == 0:
            raise MeshError(f"Coil at {coil.center} covers no triangle centroid; refine the mesh")
        if np.any(mesh.region_tags[inside] != RegionTag.VACUUM):
            raise MeshError(f"Coil at {coil.center} intersects the tube or a deposit")
        density = 1j * omega * coil.current_density
        loads[:, j] = assemble_load(mesh, lambda r, z: np.full_like(r, density, dtype=complex), inside, order)
    return loads


def contrast_loads(
    mesh: Mesh,
    mat_ref: MaterialField,
    mat_pert: MaterialField,
    omega: float,
    incident: Sequence[ComplexField],
    order: Optional[int] = None,
    triangles: Optional[np.ndarray] = None,
    contrast_matrix: Optional[sparse.spmatrix] = None,
) -> np.ndarray:
    """Loads a_ref(u0, v) - a_pert(u0, v) over the contrast triangles.

    The nodal part of each u0 goes through the contrast matrix; the analytic
    part of a decomposed point-source field is integrated element by element.

    Args:
        mesh: Mesh shared by the incident fields
        mat_ref: Reference (deposit-free) coefficients
        mat_pert: Perturbed coefficients
        omega: Angular frequency
        incident: Incident fields u0
        order: Quadrature order
        triangles: Contrast support, computed from the coefficients if None
        contrast_matrix: Assembled a_ref - a_pert on ``triangles``, assembled if None

    Returns:
        Loads, (n_vertices, N)

    Raises:
        ValueError: If an incident field lives on another mesh
    """
    if any(u0.mesh is not mesh for u0 in incident):
        raise ValueError("Incident field is defined on a different mesh")
    loads = np.zeros((mesh.n_vertices, len(incident)), dtype=complex)
    order = order or settings.solver.quadrature_order
    t = contrast_support(mat_ref, mat_pert) if triangles is None else triangles
    if len(t) == 0 or len(incident) == 0:
        return loads

    stiffness_coef = 1.0 / mat_ref.mu[t] - 1.0 / mat_pert.mu[t]
    mass_coef = -1j * omega * (mat_ref.sigma[t] - mat_pert.sigma[t])
    if contrast_matrix is None:
        contrast_matrix = assemble_matrix(mesh, t, stiffness_coef, mass_coef, order)
    loads[:] = contrast_matrix @ np.column_stack([u0.values for u0 in incident])

    singular = [j for j, u0 in enumerate(incident) if u0.has_singular_part]
    if not singular:
        return loads
    for start in range(0, len(t), _CHUNK):
        batch = slice(start, start + _CHUNK)
        quadrature = ElementQuadrature(mesh.corners(t[batch]), order)
        for j in singular:
            source = incident[j].singular_source
            a = incident[j].singular_amplitude
            phi, phi_r, phi_z = green_values(quadrature.r, quadrature.points[..., 1], source.r, source.z)
            local = quadrature.load(stiffness_coef[batch], mass_coef[batch], a * phi, a * phi_r, a * phi_z)
            np.add.at(loads[:, j], mesh.triangles[t[batch]], local)
    return loads


def evaluate(field: ComplexField, p: Point2) -> complex:
    """Field value at a point of the mesh rectangle.

    Raises:
        MeshError: If p is outside the mesh
        SingularPointError: If p coincides with the field's point source
    """
    return complex(evaluate_many(field, np.array([[p.r, p.z]]))[0])


def evaluate_many(field: ComplexField, points: np.ndarray) -> np.ndarray:
    """Vectorized :func:`evaluate` for an (n, 2) array."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    triangles, weights = locate_many(field.mesh, points)
    values = np.einsum("nk,nk->n", field.values[field.mesh.triangles[triangles]], weights)
    if field.has_singular_part:
        source = field.singular_source
        phi, _, _ = green_values(points[:, 0], points[:, 1], source.r, source.z)
        values = values + field.singular_amplitude * phi
    return values


class IncidentFieldBank(BaseModel):
    """Incident fields of every probe of an array on one mesh.

    Column ``j`` of ``values`` is the nodal regular part of the field of
    probe ``j``; point probes add ``amplitudes[j] * Phi(.; x_j)``.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    mesh: Mesh
    probes: ProbeArray
    values: np.ndarray
    amplitudes: np.ndarray

    @property
    def count(self) -> int:
        return self.values.shape[1]

    def field(self, j: int) -> ComplexField:
        singular = {}
        if self.amplitudes[j] != 0.0:
            r, z = self.probes.positions()[j]
            singular = {"singular_source": Point2(r=float(r), z=float(z)), "singular_amplitude": complex(self.amplitudes[j])}
        return ComplexField(mesh=self.mesh, values=self.values[:, j], **singular)

    def fields(self) -> List[ComplexField]:
        return [self.field(j) for j in range(self.count)]

    def evaluate_many(self, points: np.ndarray) -> np.ndarray:
        """Values of all N fields at (n, 2) points, shape (n, N)."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        triangles, weights = locate_many(self.mesh, points)
        corner_values = self.values[self.mesh.triangles[triangles]]  # (n, 3, N)
        out = np.einsum("nkj,nk->nj", corner_values, weights)
        positions = self.probes.positions()
        for j in np.flatnonzero(self.amplitudes != 0.0):
            phi, _, _ = green_values(points[:, 0], points[:, 1], positions[j, 0], positions[j, 1])
            out[:, j] += self.amplitudes[j] * phi
        return out


class ForwardSolver:
    """Reference and perturbed eddy-current problems on one mesh.

    Both systems are factorized once, on first use, and shared by every
    right-hand side.
    """

    def __init__(
        self,
        mesh: Mesh,
        table: MaterialTable,
        omega: float,
        solver_settings: Optional[SolverSettings] = None,
    ):
        """Initialize forward solver.

        Args:
            mesh: Tagged mesh
            table: Material table
            omega: Angular frequency (rad/s)
            solver_settings: Numerical settings, uses global settings if None
        """
        self.mesh = mesh
        self.table = table
        self.omega = omega
        self.solver_settings = solver_settings or settings.solver
        self.reference = coefficients(mesh, table, perturbed=False)
        self.perturbed = coefficients(mesh, table, perturbed=True)
        self.contrast_triangles = contrast_support(self.reference, self.perturbed)

        logger.info(
            f"Forward solver initialized: {mesh.n_vertices} vertices, omega={omega:.6g} rad/s, "
            f"{len(self.contrast_triangles)} contrast triangles"
        )

    @property
    def order(self) -> int:
        return self.solver_settings.quadrature_order

    @cached_property
    def reference_system(self) -> LinearSystem:
        return assemble(self.mesh, self.reference, self.omega, self.order)

    @cached_property
    def perturbed_system(self) -> LinearSystem:
        if len(self.contrast_triangles) == 0:
            return self.reference_system
        return assemble(self.mesh, self.perturbed, self.omega, self.order)

    @cached_property
    def reference_factor(self) -> FactorizedSystem:
        return FactorizedSystem(self.reference_system, self.solver_settings.residual_tolerance)

    @cached_property
    def perturbed_factor(self) -> FactorizedSystem:
        if len(self.contrast_triangles) == 0:
            return self.reference_factor
        return FactorizedSystem(self.perturbed_system, self.solver_settings.residual_tolerance)

    @cached_property
    def contrast_matrix(self) -> sparse.csr_matrix:
        """Matrix of a_ref - a_pert, supported on the contrast triangles."""
        t = self.contrast_triangles
        return assemble_matrix(
            self.mesh,
            t,
            1.0 / self.reference.mu[t] - 1.0 / self.perturbed.mu[t],
            -1j * self.omega * (self.reference.sigma[t] - self.perturbed.sigma[t]),
            self.order,
        )

    # Incident fields

    def incident_loads(self, sources: Sequence[Source]) -> Tuple[np.ndarray, np.ndarray]:
        """Loads (n_vertices, N) and singular amplitudes (N,) for a batch of sources."""
        if all(isinstance(s, CoilSource) for s in sources):
            return coil_loads(self.mesh, self.omega, sources, self.order), np.zeros(len(sources), dtype=complex)
        if not all(isinstance(s, PointSource) for s in sources):
            raise ValueError("A source batch must be all point sources or all coils")
        if self.solver_settings.point_source_mode == "nodal_delta":
            return nodal_delta_loads(self.mesh, sources), np.zeros(len(sources), dtype=complex)
        return point_source_loads(self.mesh, self.reference, self.omega, sources, self.order)

    def incident_fields(self, sources: Sequence[Source]) -> List[ComplexField]:
        """Incident (deposit-free) fields for several sources with one factorization."""
        bank = self._solve_incident(sources)
        return [
            ComplexField(
                mesh=self.mesh,
                values=bank[0][:, j],
                **(
                    {"singular_source": sources[j].position, "singular_amplitude": complex(bank[1][j])}
                    if bank[1][j] != 0.0
                    else {}
                ),
            )
            for j in range(len(sources))
        ]

    def incident_field(self, source: Source) -> ComplexField:
        return self.incident_fields([source])[0]

    def incident_bank(self, probes: ProbeArray) -> IncidentFieldBank:
        """Incident fields of every probe of an array."""
        values, amplitudes = self._solve_incident(probes.sources())
        logger.info(f"Computed {probes.count} incident fields ({probes.kind} probes)")
        return IncidentFieldBank(mesh=self.mesh, probes=probes, values=values, amplitudes=amplitudes)

    def _solve_incident(self, sources: Sequence[Source]) -> Tuple[np.ndarray, np.ndarray]:
        loads, amplitudes = self.incident_loads(sources)
        free = self.mesh.free_vertices
        values = np.zeros((self.mesh.n_vertices, len(sources)), dtype=complex)
        values[free] = self.reference_factor.solve(loads[free])
        return values, amplitudes

    # Scattered fields

    def scattered_loads(self, incident: Sequence[ComplexField]) -> np.ndarray:
        """Loads a_ref(u0, v) - a_pert(u0, v) over the contrast triangles, (n_vertices, N)."""
        t = self.contrast_triangles
        return contrast_loads(
            self.mesh,
            self.reference,
            self.perturbed,
            self.omega,
            incident,
            self.order,
            triangles=t,
            contrast_matrix=self.contrast_matrix if len(t) else None,
        )

    def scattered_fields(self, incident: Sequence[ComplexField]) -> List[ComplexField]:
        """Scattered fields u^s solving a_pert(u^s, v) = a_ref(u0, v) - a_pert(u0, v)."""
        values = self.scattered_values(incident)
        return [ComplexField(mesh=self.mesh, values=values[:, j]) for j in range(len(incident))]

    def scattered_field(self, u0: ComplexField) -> ComplexField:
        return self.scattered_fields([u0])[0]

    def scattered_values(self, incident: Sequence[ComplexField]) -> np.ndarray:
        """Nodal scattered fields (n_vertices, N)."""
        loads = self.scattered_loads(incident)
        values = np.zeros_like(loads)
        if not np.any(loads):
            return values
        free = self.mesh.free_vertices
        values[free] = self.perturbed_factor.solve(loads[free])
        return values


def incident_field(
    mesh: Mesh,
    mat_ref: MaterialField,
    omega: float,
    src: Source,
    solver_settings: Optional[SolverSettings] = None,
) -> ComplexField:
    """Incident field of one source on the reference (deposit-free) background.

    Point sources give u0 = mu0(x0) Phi + u~ with u~ carried nodally; coils
    solve with the load int i omega J v r over the coil rectangle.
    """
    solver_settings = solver_settings or settings.solver
    order = solver_settings.quadrature_order
    if mat_ref.perturbed and np.any(mesh.region_tags == RegionTag.DEPOSIT):
        raise ValueError("Incident fields need the reference (deposit-free) coefficients")

    system = assemble(mesh, mat_ref, omega, order)
    factor = FactorizedSystem(system, solver_settings.residual_tolerance)
    singular = {}
    if isinstance(src, CoilSource):
        load = coil_loads(mesh, omega, [src], order)[:, 0]
    elif solver_settings.point_source_mode == "nodal_delta":
        load = nodal_delta_loads(mesh, [src])[:, 0]
    else:
        loads, amplitudes = point_source_loads(mesh, mat_ref, omega, [src], order)
        load = loads[:, 0]
        singular = {"singular_source": src.position, "singular_amplitude": complex(amplitudes[0])}
    return _to_field(system, factor.solve(load[system.free]), **singular)


def scattered_field(
    mesh: Mesh,
    mat_ref: MaterialField,
    mat_pert: MaterialField,
    omega: float,
    u0: ComplexField,
    solver_settings: Optional[SolverSettings] = None,
) -> ComplexField:
    """Scattered field of a deposit for a given incident field.

    Raises:
        ValueError: If u0 lives on another mesh
    """
    solver_settings = solver_settings or settings.solver
    order = solver_settings.quadrature_order
    load = contrast_loads(mesh, mat_ref, mat_pert, omega, [u0], order)[:, 0]
    if not np.any(load):
        return ComplexField(mesh=mesh, values=np.zeros(mesh.n_vertices, dtype=complex))
    system = assemble(mesh, mat_pert, omega, order)
    return _to_field(system, FactorizedSystem(system, solver_settings.residual_tolerance).solve(load[system.free]))


def boundary_values(field: ComplexField) -> np.ndarray:
    """Nodal values on Axis and Outer vertices (zero by construction)."""
    return field.values[field.mesh.boundary_flags != BoundaryFlag.INTERIOR]

