"""Disk cache for incident-field banks shared between runs."""

import hashlib
import json
from datetime import timedelta
from pathlib import Path
from typing import Any, Callable, Optional

import diskcache as dc
from loguru import logger

from eddy_lsm.config.settings import SolverSettings, settings


class CacheManager:
    """Manages caching of expensive forward-solver results.

    The underlying :class:`diskcache.Cache` is opened on first use, so the
    directory configured in ``settings`` at that moment is the one used.
    """

    def __init__(self, cache_dir: Optional[Path] = None):
        """Initialize cache manager.

        Args:
            cache_dir: Directory for cache storage. Uses settings default if None.
        """
        self._cache_dir = cache_dir
        self._cache: Optional[dc.Cache] = None

    @property
    def cache_dir(self) -> Path:
        return Path(self._cache_dir or settings.cache.directory)

    @property
    def cache(self) -> dc.Cache:
        if self._cache is None:
            self.cache_dir.mkdir(parents=True, exist_ok=True)
            max_size_bytes = int(settings.cache.max_size_gb * 1024**3)
            self._cache = dc.Cache(
                str(self.cache_dir),
                size_limit=max_size_bytes,
                eviction_policy="least-recently-used",
            )
            logger.info(f"Cache initialized at {self.cache_dir} with {settings.cache.max_size_gb}GB limit")
        return self._cache

    @property
    def default_ttl(self) -> timedelta:
        return timedelta(days=settings.cache.ttl_days)

    @staticmethod
    def generate_key(*parts: Any) -> str:
        """Stable key from JSON-serializable parts."""
        key_data = json.dumps(parts, sort_keys=True, default=str)
        return hashlib.md5(key_data.encode()).hexdigest()

    def get(self, key: str) -> Optional[Any]:
        """Get item from cache.

        Returns:
            Cached value or None if not found, expired or caching is disabled
        """
        if not settings.cache.enabled:
            return None

        try:
            return self.cache.get(key)
        except Exception as e:
            logger.warning(f"Cache get failed for key {key}: {e}")
            return None

    def set(self, key: str, value: Any, ttl: Optional[timedelta] = None) -> bool:
        """Set item in cache.

        Returns:
            True if successfully cached
        """
        if not settings.cache.enabled:
            return False

        ttl_seconds = int((ttl or self.default_ttl).total_seconds())
        try:
            return self.cache.set(key, value, expire=ttl_seconds)
        except Exception as e:
            logger.warning(f"Cache set failed for key {key}: {e}")
            return False

    def cached_call(self, key: str, func: Callable[[], Any], ttl: Optional[timedelta] = None) -> Any:
        """Return the cached value for ``key`` or compute and store it."""
        cached_result = self.get(key)
        if cached_result is not None:
            logger.debug(f"Cache hit for {key}")
            return cached_result

        logger.debug(f"Cache miss for {key}, computing")
        result = func()
        if result is not None:
            self.set(key, result, ttl)
        return result

    def clear_all(self) -> bool:
        """Clear all cache entries.

        Returns:
            True if successful
        """
        try:
            self.cache.clear()
            logger.info("Cleared all cache entries")
            return True
        except Exception as e:
            logger.error(f"Failed to clear cache: {e}")
            return False

    def get_stats(self) -> dict:
        """Get cache statistics."""
        try:
            return {
                "size_bytes": self.cache.volume(),
                "size_mb": round(self.cache.volume() / 1024**2, 2),
                "count": len(self.cache),
                "directory": str(self.cache_dir),
                "max_size_gb": settings.cache.max_size_gb,
                "ttl_days": settings.cache.ttl_days,
                "enabled": settings.cache.enabled,
            }
        except Exception as e:
            logger.error(f"Failed to get cache stats: {e}")
            return {}

    def close(self) -> None:
        """Close cache connection."""
        if self._cache is None:
            return
        try:
            self._cache.close()
            logger.debug("Cache connection closed")
        except Exception as e:
            logger.warning(f"Error closing cache: {e}")
        finally:
            self._cache = None

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        self.close()


def bank_key(mesh_fingerprint: str, probes: Any, omega: float, materials: Any, solver_settings: SolverSettings) -> str:
    """Cache key of the incident-field bank of a probe array on a mesh."""
    return "bank:" + CacheManager.generate_key(
        mesh_fingerprint,
        probes.model_dump(mode="json"),
        repr(float(omega)),
        materials.model_dump(mode="json"),
        solver_settings.point_source_mode,
        solver_settings.quadrature_order,
    )


# Global cache manager instance
cache_manager = CacheManager()
