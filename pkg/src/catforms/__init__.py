"""Catenaries in the plane, the sphere and the hyperbolic plane.

Integrates the prescribed-curvature laws of weighted-length critical curves,
verifies them against variational and quadrature oracles, and evaluates the
mean curvature of the surfaces of revolution they generate in S^3 and H^3.
"""

__version__ = "0.1.0"

from .errors import (CatformsError, DegenerateError, DomainError, InputError,  # noqa: E402
                     ProjectionError, QuadratureError, ResampleError, UnsupportedFamily)
from .flow import IntegratorConfig, SampledCurve, first_integral, integrate  # noqa: E402
from .geometry import CurveState, FamilySpec, distance_to_reference  # noqa: E402
from .laws import dual_form_target, target_curvature  # noqa: E402

__all__ = [
    "CatformsError", "DegenerateError", "DomainError", "InputError", "ProjectionError",
    "QuadratureError", "ResampleError", "UnsupportedFamily",
    "IntegratorConfig", "SampledCurve", "first_integral", "integrate",
    "CurveState", "FamilySpec", "distance_to_reference",
    "dual_form_target", "target_curvature",
]
