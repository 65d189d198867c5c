"""Lê polyhedra for germs f*conj(g) with g depending only on y."""

__version__ = "0.1.0"

from .algebra import BivariatePoly, GaussianRational, poly_parse  # noqa: E402
from .errors import (  # noqa: E402
    ConfigError,
    ConsistencyError,
    GeometryError,
    HypothesisError,
    LepolyError,
    TrackingError,
)
from .pipeline import Report, RunConfig, run_pipeline  # noqa: E402

__all__ = [
    "BivariatePoly",
    "GaussianRational",
    "poly_parse",
    "LepolyError",
    "ConfigError",
    "HypothesisError",
    "GeometryError",
    "TrackingError",
    "ConsistencyError",
    "RunConfig",
    "Report",
    "run_pipeline",
]
