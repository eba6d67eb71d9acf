"""Input validation utilities for the eddy-current LSM toolkit."""

import math
from typing import Literal, Union

Number = Union[int, float]
BandConvention = Literal["exclusive", "inclusive"]


def validate_positive_length(value: Number, name: str = "length") -> float:
    """Validate a strictly positive, finite length in metres.

    Args:
        value: Length to check
        name: Parameter name used in the error message

    Returns:
        Validated length as float

    Raises:
        ValueError: If the length is non-finite or not positive
    """
    try:
        length = float(value)
    except (ValueError, TypeError):
        raise ValueError(f"Invalid {name}: {value!r}. Must be a number.")

    if not math.isfinite(length):
        raise ValueError(f"Invalid {name}: {length}. Must be finite.")

    if length <= 0.0:
        raise ValueError(f"Invalid {name}: {length}. Must be positive.")

    return length


def validate_noise_level(delta: Number, upper: float = 0.5) -> float:
    """Validate a relative noise level.

    Args:
        delta: Noise level (dimensionless)
        upper: Largest admissible level

    Returns:
        Validated noise level

    Raises:
        ValueError: If delta is negative, non-finite or above ``upper``
    """
    try:
        level = float(delta)
    except (ValueError, TypeError):
        raise ValueError(f"Invalid noise level: {delta!r}. Must be a number.")

    if not math.isfinite(level) or level < 0.0:
        raise ValueError(f"Noise level must be finite and >= 0. Got: {level}")

    if level > upper:
        raise ValueError(f"Noise level {level} exceeds the maximum of {upper}")

    return level


def validate_band(band: int, count: int) -> int:
    """Validate a band width M against the matrix size N.

    Args:
        band: Number of sliding probes M
        count: Matrix size N

    Returns:
        Validated band width

    Raises:
        ValueError: If M is outside [1, N]
    """
    if isinstance(band, bool) or int(band) != band:
        raise ValueError(f"Band width must be an integer. Got: {band!r}")

    band = int(band)
    if band < 1 or band > count:
        raise ValueError(f"Band width M={band} out of range. Must satisfy 1 <= M <= {count}")

    return band


def validate_band_convention(convention: str) -> BandConvention:
    """Validate and normalize a band convention name.

    Args:
        convention: ``exclusive`` (|i-j| <= M-1) or ``inclusive`` (|i-j| <= M)

    Returns:
        Normalized convention

    Raises:
        ValueError: If the convention is unknown
    """
    normalized = convention.strip().lower()
    if normalized not in ("exclusive", "inclusive"):
        raise ValueError(
            f"Invalid band convention: {convention}. Valid conventions: exclusive, inclusive"
        )
    return normalized  # type: ignore[return-value]


def validate_seed(seed: Union[int, str]) -> int:
    """Validate a random seed.

    Args:
        seed: Non-negative integer seed

    Returns:
        Validated seed

    Raises:
        ValueError: If the seed is not a non-negative integer
    """
    try:
        seed_int = int(seed)
    except (ValueError, TypeError):
        raise ValueError(f"Invalid seed: {seed!r}. Must be an integer.")

    if seed_int < 0:
        raise ValueError(f"Seed must be non-negative. Got: {seed_int}")

    return seed_int
