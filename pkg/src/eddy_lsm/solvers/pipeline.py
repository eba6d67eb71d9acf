"""End-to-end reconstruction: data synthesis on a fine mesh, LSM on a coarse one."""

from functools import cached_property
from typing import Dict, Optional

from loguru import logger
from pydantic import BaseModel, ConfigDict

from eddy_lsm.config.run import RunConfig
from eddy_lsm.config.settings import SolverSettings, settings
from eddy_lsm.data.cache import CacheManager, bank_key, cache_manager
from eddy_lsm.models.fields import ComplexField
from eddy_lsm.models.mesh import Mesh
from eddy_lsm.models.results import IndicatorField, MultistaticMatrix, ReconstructionMetrics
from eddy_lsm.solvers.forward import ForwardSolver, IncidentFieldBank
from eddy_lsm.solvers.lsm import IncidentRHS, run_lsm
from eddy_lsm.solvers.mesh_builder import build_problem_mesh
from eddy_lsm.solvers.metrics import compute_metrics
from eddy_lsm.solvers.synth import add_noise, band_truncate, synthesize_coil, synthesize_point


class PipelineResult(BaseModel):
    """Artifacts of one reconstruction run."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    matrix: MultistaticMatrix
    indicator: IndicatorField
    metrics: ReconstructionMetrics


class ReconstructionPipeline:
    """Synthesize data for a configuration and reconstruct the deposits.

    Data is computed on a mesh ``data_refinement`` times finer than the
    deposit-free mesh that provides the LSM right-hand sides.
    """

    def __init__(
        self,
        config: RunConfig,
        solver_settings: Optional[SolverSettings] = None,
        cache: Optional[CacheManager] = None,
    ):
        """Initialize pipeline.

        Args:
            config: Validated run configuration
            solver_settings: Numerical settings, uses global settings if None
            cache: Cache for incident-field banks, uses the global manager if None
        """
        self.config = config
        self.solver_settings = solver_settings or settings.solver
        self.cache = cache or cache_manager
        self.config_hash = config.config_hash()
        logger.info(
            f"Pipeline initialized for {config.name!r} ({config.probes.kind} probes, "
            f"N={config.probes.count}, band={config.band.width or 'full'}, config {self.config_hash})"
        )

    # Meshes and solvers

    @cached_property
    def data_mesh(self) -> Mesh:
        return build_problem_mesh(self.config, refinement=self.config.mesh.data_refinement, with_deposits=True)

    @cached_property
    def inversion_mesh(self) -> Mesh:
        return build_problem_mesh(self.config, refinement=1, with_deposits=False)

    @cached_property
    def data_solver(self) -> ForwardSolver:
        return ForwardSolver(self.data_mesh, self.config.materials, self.config.omega, self.solver_settings)

    @cached_property
    def inversion_solver(self) -> ForwardSolver:
        return ForwardSolver(self.inversion_mesh, self.config.materials, self.config.omega, self.solver_settings)

    def _bank(self, solver: ForwardSolver) -> IncidentFieldBank:
        key = bank_key(
            solver.mesh.fingerprint(), self.config.probes, self.config.omega, self.config.materials, self.solver_settings
        )
        bank = self.cache.cached_call(key, lambda: solver.incident_bank(self.config.probes))
        if bank.mesh is not solver.mesh:
            bank = bank.model_copy(update={"mesh": solver.mesh})
        return bank

    @cached_property
    def data_bank(self) -> IncidentFieldBank:
        return self._bank(self.data_solver)

    @cached_property
    def inversion_bank(self) -> IncidentFieldBank:
        return self._bank(self.inversion_solver)

    # Stages

    @cached_property
    def clean_matrix(self) -> MultistaticMatrix:
        """Noise-free multistatic matrix from the data mesh."""
        if self.config.probes.kind == "coil":
            matrix = synthesize_coil(self.data_solver, self.config.probes, self.data_bank)
        else:
            matrix = synthesize_point(self.data_solver, self.config.probes, self.data_bank)
        return matrix.model_copy(update={"config_hash": self.config_hash})

    def synthesize(self) -> MultistaticMatrix:
        """Clean data with noise applied, then band-truncated if configured."""
        noise = self.config.noise
        band = self.config.band
        matrix = add_noise(self.clean_matrix, noise.delta, noise.seed)
        matrix = matrix.model_copy(update={"band_convention": band.convention})
        if band.width is not None:
            matrix = band_truncate(matrix, band.width, band.convention)
        logger.info(f"Synthesized data: {matrix.provenance}, delta={matrix.delta:g}, band={matrix.band or 'full'}")
        return matrix

    def rhs_provider(self) -> IncidentRHS:
        return IncidentRHS(self.inversion_bank, self.config.geometry.tube)

    def invert(self, matrix: MultistaticMatrix, delta: Optional[float] = None) -> IndicatorField:
        """LSM indicator over the configured sampling grid.

        Args:
            matrix: Data matrix for the configured probe array
            delta: Noise level override; defaults to the matrix metadata,
                then to the configured noise level

        Raises:
            ValueError: If the matrix does not match the probe array
        """
        probes = self.config.probes
        if matrix.size != probes.count:
            raise ValueError(f"Matrix is {matrix.size}x{matrix.size} but the probe array has N={probes.count}")
        if matrix.kind != probes.kind:
            raise ValueError(f"Matrix was produced by {matrix.kind} probes, configuration uses {probes.kind}")

        if delta is None:
            delta = matrix.delta if matrix.delta > 0.0 else self.config.noise.delta
        field = run_lsm(
            matrix,
            self.config.sampling_grid(),
            self.rhs_provider(),
            delta=delta,
            workers=self.solver_settings.workers,
            relative_noise=self.solver_settings.relative_noise,
        )
        return field.model_copy(update={"config_hash": self.config_hash})

    def metrics(self, field: IndicatorField, band: Optional[int] = None) -> ReconstructionMetrics:
        return compute_metrics(
            field,
            self.config.geometry.deposits,
            self.config.probes,
            band if band is not None else self.config.band.width,
            scenario=self.config.name,
        )

    def run(self) -> PipelineResult:
        """Synthesize, invert and score."""
        matrix = self.synthesize()
        field = self.invert(matrix)
        return PipelineResult(matrix=matrix, indicator=field, metrics=self.metrics(field, matrix.band))

    def forward_snapshot(self, source_index: Optional[int] = None) -> Dict[str, ComplexField]:
        """Incident, scattered and total fields of one probe on the data mesh.

        The middle probe of the array is used by default.
        """
        probes = self.config.probes
        j = probes.count // 2 if source_index is None else source_index
        if not 0 <= j < probes.count:
            raise ValueError(f"Source index {j} out of range for N={probes.count}")

        incident = self.data_bank.field(j)
        scattered = self.data_solver.scattered_field(incident)
        logger.info(f"Forward snapshot for probe {j} at z={probes.z_positions[j] * 1e3:.3f} mm")
        return {"incident": incident, "scattered": scattered, "total": incident + scattered}
