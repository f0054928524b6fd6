"""Spacelike surfaces in standard null cones of static spherically symmetric spacetimes."""

from .errors import DomainError, NotSpacelikeError, NullConeError, NumericGuardError, TheoremViolation
from .spacetime import WarpingModel
from .spectral import SphereField, SphereGrid, ZonalField, ZonalGrid
from .surface import NullConeSurface, boost_sphere, fit_boosted_sphere, random_surface

__all__ = [
    "DomainError",
    "NotSpacelikeError",
    "NullConeError",
    "NumericGuardError",
    "TheoremViolation",
    "WarpingModel",
    "SphereField",
    "SphereGrid",
    "ZonalField",
    "ZonalGrid",
    "NullConeSurface",
    "boost_sphere",
    "fit_boosted_sphere",
    "random_surface",
]

__version__ = "0.1.0"
