"""Physical material table for the tube inspection problem.

Conductivities in S/m, permeabilities in H/m. Defaults are the reference
values for the vacuum, the tube alloy and a conductive deposit.
"""

import math
from typing import Dict

from pydantic import BaseModel, ConfigDict, Field, model_validator

from eddy_lsm.models.geometry import RegionTag

MU_VACUUM = 4.0e-7 * math.pi


class MaterialProperties(BaseModel):
    """Conductivity and permeability of one region."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    sigma: float = Field(0.0, ge=0.0, allow_inf_nan=False, description="Conductivity (S/m)")
    mu: float = Field(MU_VACUUM, gt=0.0, allow_inf_nan=False, description="Permeability (H/m)")


class MaterialTable(BaseModel):
    """Per-region material properties."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    vacuum: MaterialProperties = Field(default_factory=MaterialProperties)
    tube: MaterialProperties = Field(
        default_factory=lambda: MaterialProperties(sigma=0.97e3, mu=4.04e-7 * math.pi)
    )
    deposit: MaterialProperties = Field(
        default_factory=lambda: MaterialProperties(sigma=1.75e3, mu=4.04e-7 * math.pi)
    )
    force_mu_match: bool = Field(
        False, description="Give the deposit the vacuum permeability (pure conductivity contrast)"
    )

    @model_validator(mode="after")
    def _check_vacuum(self) -> "MaterialTable":
        if self.vacuum.sigma != 0.0:
            raise ValueError(f"Vacuum conductivity must be 0. Got: {self.vacuum.sigma}")
        return self

    def for_tag(self, tag: RegionTag) -> MaterialProperties:
        """Get the properties assigned to a region tag.

        Args:
            tag: Region tag

        Returns:
            Material properties of the region

        Raises:
            ValueError: If the tag is unknown
        """
        if tag == RegionTag.VACUUM:
            return self.vacuum
        if tag == RegionTag.TUBE:
            return self.tube
        if tag == RegionTag.DEPOSIT:
            if self.force_mu_match:
                return MaterialProperties(sigma=self.deposit.sigma, mu=self.vacuum.mu)
            return self.deposit
        raise ValueError(f"Unknown region tag: {tag!r}")

    def as_dict(self) -> Dict[str, Dict[str, float]]:
        """Plain mapping of region name to sigma / mu, for tables and logs."""
        return {
            tag.name.lower(): self.for_tag(tag).model_dump()
            for tag in (RegionTag.VACUUM, RegionTag.TUBE, RegionTag.DEPOSIT)
        }


def default_table() -> MaterialTable:
    """Reference material table (vacuum, tube alloy, deposit)."""
    return MaterialTable()
