"""Command line interface for eddy-lsm."""

from eddy_lsm.cli.main import app

__all__ = ["app"]
