"""Artifact persistence and caching."""

from eddy_lsm.data.cache import CacheManager

__all__ = [
    "CacheManager",
]
