"""Tests for assembly, solves and field evaluation of the forward problem."""

import math

import numpy as np
import pytest
from scipy import integrate

from eddy_lsm.config.materials import MU_VACUUM, MaterialProperties, MaterialTable
from eddy_lsm.config.settings import SolverSettings
from eddy_lsm.exceptions import MeshError, SingularPointError
from eddy_lsm.models.fields import CoilSource, ComplexField, MaterialField, PointSource
from eddy_lsm.models.geometry import Point2, RegionTag
from eddy_lsm.solvers.forward import (
    FactorizedSystem,
    ForwardSolver,
    assemble,
    assemble_load,
    boundary_values,
    contrast_loads,
    element_matrices,
    evaluate,
    evaluate_many,
    incident_field,
    local_matrices,
    scattered_field,
    solve,
)
from eddy_lsm.solvers.green import green_values
from eddy_lsm.solvers.materials import coefficients
from eddy_lsm.solvers.mesh_builder import build_problem_mesh, build_structured_mesh

TRIANGLE = np.array([[1.0, 0.0], [2.0, 0.0], [1.0, 1.0]])


def _basis(r, z):
    return [2.0 - r - z, r - 1.0, z]


def _weighted_grads(r, z):
    # grad(r phi) for the three basis functions of TRIANGLE
    return [(2.0 - 2.0 * r - z, -r), (2.0 * r - 1.0, 0.0), (z, r)]


def _uniform_material(mesh, sigma=0.0, mu=1.0):
    return MaterialField(
        sigma=np.full(mesh.n_triangles, sigma), mu=np.full(mesh.n_triangles, mu), perturbed=False
    )


class TestElementMatrices:
    def test_hand_values(self):
        stiffness, mass = element_matrices(TRIANGLE[None])
        assert mass[0, 2, 2] == pytest.approx(0.1, rel=1e-12)
        expected = 2.0 / 3.0 + (8.0 * math.log(2.0) - 16.0 / 3.0) / 3.0
        assert stiffness[0, 2, 2] == pytest.approx(expected, rel=1e-10)

    def test_against_adaptive_quadrature(self):
        stiffness, mass = element_matrices(TRIANGLE[None])
        for m in range(3):
            for n in range(3):
                k_mn, _ = integrate.dblquad(
                    lambda z, r: np.dot(_weighted_grads(r, z)[m], _weighted_grads(r, z)[n]) / r,
                    1.0,
                    2.0,
                    0.0,
                    lambda r: 2.0 - r,
                    epsabs=1e-13,
                )
                m_mn, _ = integrate.dblquad(
                    lambda z, r: _basis(r, z)[m] * _basis(r, z)[n] * r, 1.0, 2.0, 0.0, lambda r: 2.0 - r, epsabs=1e-13
                )
                assert stiffness[0, m, n] == pytest.approx(k_mn, rel=1e-9, abs=1e-12)
                assert mass[0, m, n] == pytest.approx(m_mn, rel=1e-9, abs=1e-12)

    def test_axis_triangle_is_finite(self):
        stiffness, mass = element_matrices(np.array([[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]]]))
        assert np.all(np.isfinite(stiffness))
        np.testing.assert_allclose(stiffness[0], stiffness[0].T, atol=1e-14)
        assert np.all(np.linalg.eigvalsh(mass[0]) > 0.0)

    def test_mu_scaling(self, omega):
        a = local_matrices(TRIANGLE, mu=1.0, sigma=0.0, omega=omega)
        b = local_matrices(TRIANGLE, mu=2.0, sigma=0.0, omega=omega)
        np.testing.assert_allclose(b, 0.5 * a, rtol=1e-14)

    def test_conductivity_term(self, omega):
        stiffness, mass = element_matrices(TRIANGLE[None])
        local = local_matrices(TRIANGLE, mu=1.0, sigma=3.0, omega=omega)
        np.testing.assert_allclose(local.imag, -3.0 * omega * mass[0], rtol=1e-14)
        np.testing.assert_allclose(local.real, stiffness[0], rtol=1e-14)


class TestAssembly:
    def test_vacuum_system_is_spd(self):
        mesh = build_structured_mesh(1.0, -1.0, 1.0, 0.125)
        system = assemble(mesh, _uniform_material(mesh), omega=1.0)
        dense = system.matrix.toarray()
        assert np.abs(dense.imag).max() == 0.0
        np.testing.assert_allclose(dense, dense.T, atol=1e-14)
        assert np.linalg.eigvalsh(dense.real).min() > 0.0
        assert system.size == len(mesh.free_vertices)

    def test_rejects_non_finite_coefficients(self):
        mesh = build_structured_mesh(1.0, 0.0, 1.0, 0.5)
        bad = _uniform_material(mesh, sigma=math.nan)
        with pytest.raises(ValueError):
            assemble(mesh, bad, omega=1.0)

    def test_solve_without_rhs(self):
        mesh = build_structured_mesh(1.0, 0.0, 1.0, 0.25)
        with pytest.raises(ValueError, match="no right-hand side"):
            solve(assemble(mesh, _uniform_material(mesh), omega=1.0))

    def test_zero_rhs(self):
        mesh = build_structured_mesh(1.0, 0.0, 1.0, 0.25)
        system = assemble(mesh, _uniform_material(mesh), omega=1.0)
        x = FactorizedSystem(system).solve(np.zeros((system.size, 2)))
        assert not np.any(x)


class TestManufacturedSolution:
    """u = r (1 - r) sin(pi z) on [0, 1] x [0, 1] with mu = sigma = omega = 1."""

    @staticmethod
    def exact(r, z):
        return r * (1.0 - r) * np.sin(math.pi * z)

    @staticmethod
    def source(r, z):
        s = np.sin(math.pi * z)
        return (3.0 + math.pi**2 * r * (1.0 - r)) * s - 1j * r * (1.0 - r) * s

    def _error(self, h):
        mesh = build_structured_mesh(1.0, 0.0, 1.0, h)
        system = assemble(mesh, _uniform_material(mesh, sigma=1.0), omega=1.0)
        load = assemble_load(mesh, self.source)
        field = solve(system.with_rhs(load[system.free]))

        centroids = mesh.centroids()
        approx = field.values[mesh.triangles].mean(axis=1)
        error = approx - self.exact(centroids[:, 0], centroids[:, 1])
        weight = mesh.signed_areas() * centroids[:, 0]
        return math.sqrt(float(np.sum(weight * np.abs(error) ** 2)))

    def test_second_order_convergence(self):
        errors = [self._error(h) for h in (1 / 8, 1 / 16, 1 / 32)]
        assert errors[0] > errors[1] > errors[2]
        order = math.log2(errors[1] / errors[2])
        assert 1.8 <= order <= 2.2


class TestIncidentFields:
    @pytest.fixture(scope="class")
    def vacuum_mesh(self):
        return build_structured_mesh(0.04, -0.04, 0.04, 0.25e-3)

    @pytest.fixture(scope="class")
    def vacuum_material(self, vacuum_mesh):
        return coefficients(vacuum_mesh, MaterialTable(), perturbed=False)

    def test_point_source_in_vacuum_is_the_green_function(self, vacuum_mesh, vacuum_material):
        source = PointSource(position=Point2(r=8e-3, z=0.0))
        field = incident_field(vacuum_mesh, vacuum_material, 200 * math.pi, source)
        assert field.has_singular_part
        assert field.singular_amplitude == pytest.approx(MU_VACUUM)
        assert np.abs(field.values).max() < 1e-12 * MU_VACUUM
        p = Point2(r=10e-3, z=4e-3)
        phi, _, _ = green_values(np.array([p.r]), np.array([p.z]), 8e-3, 0.0)
        assert evaluate(field, p) == pytest.approx(MU_VACUUM * phi[0], rel=1e-12)

    def test_nodal_delta_matches_decomposition(self, vacuum_mesh, vacuum_material):
        source = PointSource(position=Point2(r=8e-3, z=0.0))
        nodal = SolverSettings(point_source_mode="nodal_delta")
        delta_field = incident_field(vacuum_mesh, vacuum_material, 200 * math.pi, source, nodal)
        exact_field = incident_field(vacuum_mesh, vacuum_material, 200 * math.pi, source)
        assert not delta_field.has_singular_part
        p = Point2(r=10e-3, z=4e-3)
        assert evaluate(delta_field, p) == pytest.approx(evaluate(exact_field, p), rel=2e-2)

    def test_coil_matches_integrated_point_sources(self, vacuum_mesh, vacuum_material, omega):
        coil = CoilSource(center=Point2(r=8e-3, z=0.0), width=1e-3, height=1e-3)
        field = incident_field(vacuum_mesh, vacuum_material, omega, coil)
        assert not field.has_singular_part

        p = Point2(r=10e-3, z=4e-3)
        x, w = np.polynomial.legendre.leggauss(8)
        r_nodes = coil.center.r + 0.5 * coil.width * x
        z_nodes = coil.center.z + 0.5 * coil.height * x
        total = 0.0
        for r0, wr in zip(r_nodes, w):
            for z0, wz in zip(z_nodes, w):
                phi, _, _ = green_values(np.array([p.r]), np.array([p.z]), r0, z0)
                total += wr * wz * phi[0]
        expected = 1j * omega * coil.current_density * MU_VACUUM * total * 0.25 * coil.area
        assert evaluate(field, p) == pytest.approx(expected, rel=2e-2)

    def test_boundary_values_vanish(self, vacuum_mesh, vacuum_material, omega):
        coil = CoilSource(center=Point2(r=8e-3, z=0.0), width=1e-3, height=1e-3)
        field = incident_field(vacuum_mesh, vacuum_material, omega, coil)
        assert not np.any(boundary_values(field))

    def test_source_in_conductor_rejected(self, small_config, omega):
        mesh = build_problem_mesh(small_config)
        reference = coefficients(mesh, small_config.materials, perturbed=False)
        inside_tube = PointSource(position=Point2(r=10.5e-3, z=0.0))
        with pytest.raises(MeshError):
            incident_field(mesh, reference, omega, inside_tube)


class TestForwardSolver:
    def test_zero_contrast_gives_zero_scattered_field(self, small_config):
        table = MaterialTable(deposit=MaterialProperties(sigma=0.0, mu=MU_VACUUM))
        mesh = build_problem_mesh(small_config)
        solver = ForwardSolver(mesh, table, small_config.omega)
        assert len(solver.contrast_triangles) == 0
        incident = solver.incident_fields(small_config.probes.sources())
        scattered = solver.scattered_values(incident)
        assert not np.any(scattered)

    def test_total_field_solves_perturbed_problem(self, small_coil_config):
        config = small_coil_config
        mesh = build_problem_mesh(config)
        solver = ForwardSolver(mesh, config.materials, config.omega)
        sources = config.probes.sources()
        loads, _ = solver.incident_loads(sources)
        bank = solver.incident_bank(config.probes)
        total = bank.values + solver.scattered_values(bank.fields())
        assert np.any(total - bank.values)

        free = mesh.free_vertices
        residual = solver.perturbed_system.matrix @ total[free] - loads[free]
        relative = np.linalg.norm(residual, axis=0) / np.linalg.norm(loads[free], axis=0)
        assert relative.max() < 1e-8

    def test_bank_matches_single_solves(self, small_config):
        mesh = build_problem_mesh(small_config)
        solver = ForwardSolver(mesh, small_config.materials, small_config.omega)
        bank = solver.incident_bank(small_config.probes)
        single = incident_field(mesh, solver.reference, small_config.omega, small_config.probes.sources()[1])
        np.testing.assert_allclose(bank.field(1).values, single.values, rtol=1e-9, atol=1e-14)
        assert bank.field(1).singular_amplitude == pytest.approx(single.singular_amplitude)

    def test_scattered_fields_are_regular(self, small_config):
        mesh = build_problem_mesh(small_config)
        solver = ForwardSolver(mesh, small_config.materials, small_config.omega)
        assert len(solver.contrast_triangles) > 0
        fields = solver.incident_fields(small_config.probes.sources())
        scattered = solver.scattered_fields(fields)
        assert all(s.mesh is mesh for s in scattered)
        assert not any(s.has_singular_part for s in scattered)

    def test_module_scattered_field_matches_solver(self, small_config):
        mesh = build_problem_mesh(small_config)
        solver = ForwardSolver(mesh, small_config.materials, small_config.omega)
        u0 = solver.incident_field(small_config.probes.sources()[2])
        assert u0.has_singular_part
        expected = solver.scattered_field(u0)
        single = scattered_field(mesh, solver.reference, solver.perturbed, small_config.omega, u0)
        np.testing.assert_allclose(single.values, expected.values, rtol=1e-9, atol=1e-12 * np.abs(expected.values).max())

    def test_contrast_loads_without_cached_matrix(self, small_config):
        mesh = build_problem_mesh(small_config)
        solver = ForwardSolver(mesh, small_config.materials, small_config.omega)
        fields = solver.incident_fields(small_config.probes.sources())
        fresh = contrast_loads(mesh, solver.reference, solver.perturbed, small_config.omega, fields, solver.order)
        np.testing.assert_allclose(fresh, solver.scattered_loads(fields), rtol=1e-12, atol=0.0)

    def test_contrast_loads_reject_foreign_field(self, small_config):
        mesh = build_problem_mesh(small_config)
        solver = ForwardSolver(mesh, small_config.materials, small_config.omega)
        other = build_problem_mesh(small_config, refinement=2)
        foreign = ComplexField(mesh=other, values=np.zeros(other.n_vertices, dtype=complex))
        with pytest.raises(ValueError, match="different mesh"):
            solver.scattered_loads([foreign])
        with pytest.raises(ValueError, match="different mesh"):
            scattered_field(mesh, solver.reference, solver.perturbed, small_config.omega, foreign)


class TestEvaluate:
    @pytest.fixture
    def mesh(self):
        return build_structured_mesh(1.0, -1.0, 1.0, 0.2)

    def test_vertex_value(self, mesh, rng):
        values = rng.normal(size=mesh.n_vertices) + 1j * rng.normal(size=mesh.n_vertices)
        field = ComplexField(mesh=mesh, values=values)
        for k in [0, 13, mesh.n_vertices - 1]:
            assert evaluate(field, mesh.point(k)) == pytest.approx(values[k], abs=1e-12)

    def test_affine_fields_are_exact(self, mesh, rng):
        r, z = mesh.vertices[:, 0], mesh.vertices[:, 1]
        field = ComplexField(mesh=mesh, values=(1.0 + 2.0j) + 3.0 * r - (0.5 + 1j) * z)
        points = np.column_stack([rng.uniform(0.0, 1.0, 50), rng.uniform(-1.0, 1.0, 50)])
        expected = (1.0 + 2.0j) + 3.0 * points[:, 0] - (0.5 + 1j) * points[:, 1]
        np.testing.assert_allclose(evaluate_many(field, points), expected, atol=1e-12)

    def test_singular_point(self, mesh):
        source = Point2(r=0.5, z=0.0)
        field = ComplexField(
            mesh=mesh, values=np.zeros(mesh.n_vertices, dtype=complex), singular_source=source, singular_amplitude=1.0
        )
        with pytest.raises(SingularPointError):
            evaluate(field, source)

    def test_outside(self, mesh):
        field = ComplexField(mesh=mesh, values=np.zeros(mesh.n_vertices, dtype=complex))
        with pytest.raises(MeshError):
            evaluate(field, Point2(r=2.0, z=0.0))

    def test_fields_on_different_meshes_do_not_add(self, mesh):
        other = build_structured_mesh(1.0, -1.0, 1.0, 0.5)
        a = ComplexField(mesh=mesh, values=np.zeros(mesh.n_vertices, dtype=complex))
        b = ComplexField(mesh=other, values=np.zeros(other.n_vertices, dtype=complex))
        with pytest.raises(ValueError):
            a + b


def test_region_tags_drive_solver_coefficients(small_config):
    mesh = build_problem_mesh(small_config)
    solver = ForwardSolver(mesh, small_config.materials, small_config.omega)
    deposit = mesh.region_tags == RegionTag.DEPOSIT
    assert np.all(solver.reference.sigma[deposit] == 0.0)
    assert np.all(solver.perturbed.sigma[deposit] == small_config.materials.deposit.sigma)
