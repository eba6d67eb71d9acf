"""Canned reconstruction experiments.

Each scenario is a complete :class:`RunConfig`: the probe-count and band
sweeps on the reference semi-disc deposit, with point sources and with
coils, plus two coil experiments on more involved deposits.
"""

from typing import Callable, Dict, List

import numpy as np

from eddy_lsm.config.run import BandConfig, GeometryConfig, NoiseConfig, RunConfig
from eddy_lsm.exceptions import ConfigurationError
from eddy_lsm.models.fields import ProbeArray
from eddy_lsm.models.geometry import EllipseDeposit, PolylineDeposit, SemiDiscDeposit, TubeAnnulus
from eddy_lsm.utils.validators import validate_positive_length

TUBE = TubeAnnulus()

# Two deposits about 24.5 mm apart
TWO_DEPOSIT_OFFSET = 12.25e-3

# Drop-shaped clog: length along z and largest radial thickness
DROP_LENGTH = 50e-3
DROP_THICKNESS = 4e-3


def drop_deposit(
    length: float = DROP_LENGTH,
    thickness: float = DROP_THICKNESS,
    center_z: float = 0.0,
    attachment_radius: float = TUBE.outer_radius,
    n_vertices: int = 48,
) -> PolylineDeposit:
    """Teardrop outline attached to the tube, blunt end towards -z.

    The radial thickness follows sqrt(s) (1 - s) along the normalized axial
    coordinate s, scaled so its maximum equals ``thickness``.
    """
    length = validate_positive_length(length, "drop length")
    thickness = validate_positive_length(thickness, "drop thickness")
    s = np.linspace(0.0, 1.0, n_vertices)
    profile = np.sqrt(s) * (1.0 - s)
    profile *= thickness / profile.max()
    z = center_z - 0.5 * length + s * length
    # profile vanishes at both ends, so the closing side runs along the tube
    vertices = [(attachment_radius + float(t), float(zz)) for t, zz in zip(profile, z)]
    return PolylineDeposit(vertices=vertices, attachment_radius=attachment_radius)


def _run(name: str, kind: str, count: int, band=None, deposits=None) -> RunConfig:
    geometry = GeometryConfig(tube=TUBE, deposits=deposits or [SemiDiscDeposit()])
    return RunConfig(
        name=name,
        geometry=geometry,
        probes=ProbeArray(kind=kind, count=count),
        noise=NoiseConfig(delta=0.01, seed=0),
        band=BandConfig(width=band),
    )


def _two_deposits() -> RunConfig:
    deposits = [
        SemiDiscDeposit(center_z=-TWO_DEPOSIT_OFFSET),
        EllipseDeposit(
            center_r=TUBE.outer_radius + 0.5e-3,
            center_z=TWO_DEPOSIT_OFFSET,
            radius_r=2e-3,
            radius_z=4e-3,
            attachment_radius=TUBE.outer_radius,
        ),
    ]
    return _run("fig9_two_deposits", "coil", 32, band=8, deposits=deposits)


def _build_registry() -> Dict[str, Callable[[], RunConfig]]:
    registry: Dict[str, Callable[[], RunConfig]] = {}
    for n in (4, 8, 16):
        registry[f"fig5_N{n}"] = lambda n=n: _run(f"fig5_N{n}", "point", n)
        registry[f"fig7_coils_N{n}"] = lambda n=n: _run(f"fig7_coils_N{n}", "coil", n)
    for m in (1, 2, 8):
        registry[f"fig6_M{m}"] = lambda m=m: _run(f"fig6_M{m}", "point", 32, band=m)
        registry[f"fig8_coils_M{m}"] = lambda m=m: _run(f"fig8_coils_M{m}", "coil", 32, band=m)
    registry["fig9_two_deposits"] = _two_deposits
    registry["fig10_drop"] = lambda: _run("fig10_drop", "coil", 32, band=8, deposits=[drop_deposit()])
    return registry


SCENARIOS = _build_registry()


def scenario_ids() -> List[str]:
    return sorted(SCENARIOS)


def get_scenario(experiment_id: str) -> RunConfig:
    """Configuration of a canned experiment.

    Raises:
        ConfigurationError: If the id is unknown; the message lists valid ids
    """
    try:
        factory = SCENARIOS[experiment_id]
    except KeyError:
        raise ConfigurationError(
            f"Unknown experiment {experiment_id!r}. Available: {', '.join(scenario_ids())}"
        ) from None
    return factory()
