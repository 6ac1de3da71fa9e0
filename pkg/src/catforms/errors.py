"""Exception hierarchy shared by all catforms modules."""


class CatformsError(Exception):
    """Base class for library errors."""


class DomainError(CatformsError, ValueError):
    """A point lies on or beyond the reference line, or near a chart pole."""


class DegenerateError(CatformsError, ArithmeticError):
    """A formula hit a vanishing denominator (zero speed, zero weight...)."""


class InputError(CatformsError, ValueError):
    """Caller supplied invalid arguments."""


class UnsupportedFamily(CatformsError, ValueError):
    """Operation is not defined for the requested catenary family."""


class QuadratureError(CatformsError, ArithmeticError):
    """Quadrature range empty or refinement did not converge."""


class ResampleError(CatformsError, ValueError):
    """Curve cannot be rewritten as a graph over the rotation parameter."""


class ProjectionError(CatformsError, ValueError):
    """A mesh vertex is too close to the stereographic projection pole."""
