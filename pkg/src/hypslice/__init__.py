"""Hyperboloidal-slice energies, decay estimates and characteristic
transport for 2+1 dimensional wave / Klein-Gordon systems.

The package is organized around a verification workflow: finite-difference
evolutions on a rolling window (``grid``, ``systems``, ``kernels``), slice
and probe observers that stream geometric quantities out of the window
(``sampling``, ``slices``, ``hyperbolas``, ``decay``), closed-form and
quadrature reference machinery (``frames``, ``nullforms``, ``poisson``),
and a CLI (``hypslice.cli``) whose verification suites tie the two sides
together.
"""

from .config import T0, ConfigError, RunConfig, config_hash, load, parse
from .frames import SpacetimePoint, to_hyperbolic
from .grid import BlowupError, Grid2D, GridRun, RadialField, SupportError
from .nullforms import MINKOWSKI, check_null, classify_symmetric_null
from .runs import build_run, build_system

__version__ = "0.1.0"

__all__ = [
    "T0",
    "ConfigError",
    "RunConfig",
    "config_hash",
    "load",
    "parse",
    "SpacetimePoint",
    "to_hyperbolic",
    "BlowupError",
    "Grid2D",
    "GridRun",
    "RadialField",
    "SupportError",
    "MINKOWSKI",
    "check_null",
    "classify_symmetric_null",
    "build_run",
    "build_system",
    "__version__",
]
