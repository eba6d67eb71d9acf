"""Domain models for eddy-lsm."""

from eddy_lsm.models.geometry import (
    BoundaryFlag,
    EllipseDeposit,
    Point2,
    PolylineDeposit,
    RegionTag,
    SemiDiscDeposit,
    TubeAnnulus,
)
from eddy_lsm.models.mesh import Mesh
from eddy_lsm.models.fields import (
    CoilSource,
    ComplexField,
    LinearSystem,
    MaterialField,
    PointSource,
    ProbeArray,
)
from eddy_lsm.models.results import (
    IndicatorField,
    MorozovFlag,
    MultistaticMatrix,
    ReconstructionMetrics,
    SamplingGrid,
    SVDecomposition,
)

__all__ = [
    "BoundaryFlag",
    "RegionTag",
    "Point2",
    "TubeAnnulus",
    "SemiDiscDeposit",
    "EllipseDeposit",
    "PolylineDeposit",
    "Mesh",
    "MaterialField",
    "PointSource",
    "CoilSource",
    "ProbeArray",
    "ComplexField",
    "LinearSystem",
    "MultistaticMatrix",
    "SamplingGrid",
    "SVDecomposition",
    "MorozovFlag",
    "IndicatorField",
    "ReconstructionMetrics",
]
