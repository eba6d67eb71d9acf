"""Numerical engines: meshing, Green function, FEM, data synthesis and LSM."""

from eddy_lsm.solvers.forward import ForwardSolver, IncidentFieldBank
from eddy_lsm.solvers.pipeline import ReconstructionPipeline

__all__ = [
    "ForwardSolver",
    "IncidentFieldBank",
    "ReconstructionPipeline",
]
