"""Charts, reference distances, ambient fields and unit normals.

Three model spaces are used, all written in a two-dimensional chart (u, v):

* ``euclidean``  the plane, reference line ``v = 0``;
* ``sphere``     latitude/longitude chart of S^2, reference geodesic is the
  equator (or, for the extrinsic family, the plane z = 0 of R^3);
* ``half-plane`` upper half-plane model of H^2 with metric (du^2+dv^2)/v^2,
  reference line is the vertical geodesic u = 0 or the horocycle v = 1.

Headings are chart angles: (u', v') = (cos theta, sin theta).  Every
reference line is fixed; other geodesics or horocycles are reached by
conjugating with an isometry, which this package does not do.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DomainError, InputError

EPS_D = 1e-6
EPS_POLE = 1e-6

EUCLIDEAN = "euclidean"
SPHERE = "sphere"
SPHERE_EXTRINSIC = "sphere-extrinsic"
HYP_GEODESIC = "hyp-geodesic"
HYP_HORODIST = "hyp-horodist"
HOROCYCLE = "horocycle"

KINDS = (EUCLIDEAN, SPHERE, SPHERE_EXTRINSIC, HYP_GEODESIC, HYP_HORODIST, HOROCYCLE)
SPHERICAL = frozenset({SPHERE, SPHERE_EXTRINSIC})
HYPERBOLIC = frozenset({HYP_GEODESIC, HYP_HORODIST, HOROCYCLE})


@dataclass(frozen=True)
class FamilySpec:
    """A catenary problem: reference geometry ``kind`` and weight exponent ``alpha``.

    ``paper_c`` selects the closed-form spherical right-hand side driven by a
    fixed first-integral constant (only meaningful for ``kind='sphere'``,
    ``alpha=1``).
    """

    kind: str
    alpha: float = 1.0
    paper_c: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InputError(f"unknown family {self.kind!r}; expected one of {KINDS}")
        if not math.isfinite(self.alpha):
            raise InputError("alpha must be finite")
        if self.paper_c is not None:
            if self.kind != SPHERE:
                raise InputError("paper_c is only valid with family 'sphere'")
            if not self.paper_c > 0:
                raise InputError("paper_c must be positive")
            if self.alpha != 1:
                raise InputError("the fixed-c spherical law is only defined for alpha = 1")

    @property
    def space(self) -> str:
        return space_of(self.kind)


class SphereChartPoint(NamedTuple):
    u: float
    v: float


class HalfPlanePoint(NamedTuple):
    x: float
    y: float


@dataclass(frozen=True)
class CurveState:
    """Chart position plus unwrapped heading angle."""

    u: float
    v: float
    theta: float

    @property
    def du(self) -> float:
        return math.cos(self.theta)

    @property
    def dv(self) -> float:
        return math.sin(self.theta)

    @property
    def position(self) -> tuple[float, float]:
        return (self.u, self.v)


def space_of(kind: str) -> str:
    if kind in SPHERICAL:
        return "sphere"
    if kind in HYPERBOLIC:
        return "half-plane"
    if kind == EUCLIDEAN:
        return "euclidean-plane"
    raise InputError(f"unknown family {kind!r}")


# ----------------------------------------------------------------------------
# sphere chart

def sphere_embed(p) -> np.ndarray:
    u, v = p
    cu = math.cos(u)
    return np.array([cu * math.cos(v), cu * math.sin(v), math.sin(u)])


def sphere_tangent(u: float, v: float, du: float, dv: float) -> np.ndarray:
    """Push a chart velocity (du, dv) forward to R^3."""
    su, cu = math.sin(u), math.cos(u)
    sv, cv = math.sin(v), math.cos(v)
    return np.array([-su * cv * du - cu * sv * dv,
                     -su * sv * du + cu * cv * dv,
                     cu * du])


def sphere_speed(u: float, du: float, dv: float) -> float:
    """|gamma'| for gamma = Psi(u, v): sqrt(u'^2 + v'^2 cos^2 u)."""
    c = math.cos(u)
    return math.sqrt(du * du + dv * dv * c * c)


# ----------------------------------------------------------------------------
# reference distances

def _raw_distance(kind: str, u: float, v: float) -> float:
    if kind == EUCLIDEAN:
        return v
    if kind == SPHERE:
        return u
    if kind == SPHERE_EXTRINSIC:
        return math.sin(u)
    if kind == HYP_GEODESIC:
        if v <= 0:
            return -math.inf
        r = math.hypot(u, v)
        return math.log((u + r) / v) if u + r > 0 else -math.inf
    if kind == HYP_HORODIST:
        return u / v if v > 0 else -math.inf
    if kind == HOROCYCLE:
        return math.log(v) if v > 0 else -math.inf
    raise InputError(f"unknown family {kind!r}")


def distance_to_reference(family: FamilySpec | str, p) -> float:
    """Distance (or height) of chart point ``p`` to the family's reference line.

    euclidean: v; sphere: u; sphere-extrinsic: sin u; hyp-geodesic:
    log((x + r)/y); hyp-horodist: x/y; horocycle: log y.
    """
    kind = family.kind if isinstance(family, FamilySpec) else family
    u, v = p
    d = _raw_distance(kind, u, v)
    if not d > 0:
        raise DomainError(f"point {tuple(p)} is not strictly on the positive side of the {kind} reference")
    return d


# ----------------------------------------------------------------------------
# ambient fields

def meridian_field(u: float, v: float) -> np.ndarray:
    """Unit field X on S^2 tangent to the meridians, as a vector of R^3."""
    return np.array([-math.sin(u) * math.cos(v), -math.sin(u) * math.sin(v), math.cos(u)])


def geodesic_field(x: float, y: float) -> np.ndarray:
    """Unit field Y of H^2 along the geodesics orthogonal to u = 0."""
    r = math.hypot(x, y)
    return np.array([y * y / r, -x * y / r])


def horocycle_field(x: float, y: float) -> np.ndarray:
    """Field W = y d_x - x d_y, equal to (r/y) Y."""
    return np.array([y, -x])


def vertical_field(x: float, y: float) -> np.ndarray:
    """Unit field V = y d_y of H^2."""
    return np.array([0.0, y])


def field_at(family: FamilySpec | str, p, eps_pole: float = EPS_POLE) -> np.ndarray:
    """Direction field paired with the unit normal in the coordinate-free law.

    Sphere families return vectors of R^3 (X, or d_z for the extrinsic
    weight); the others return chart components.
    """
    kind = family.kind if isinstance(family, FamilySpec) else family
    u, v = p
    if kind == SPHERE:
        if abs(u) >= math.pi / 2 - eps_pole:
            raise DomainError("meridian field is undefined at the poles")
        return meridian_field(u, v)
    if kind == SPHERE_EXTRINSIC:
        return np.array([0.0, 0.0, 1.0])
    if kind == EUCLIDEAN:
        return np.array([0.0, 1.0])
    if v <= 0:
        raise DomainError("half-plane point must have y > 0")
    if kind == HYP_GEODESIC:
        return geodesic_field(u, v)
    if kind == HYP_HORODIST:
        return horocycle_field(u, v)
    return vertical_field(u, v)


# ----------------------------------------------------------------------------
# normals and inner products

def unit_normal(space: str, state: CurveState) -> np.ndarray:
    """Unit normal of a curve at ``state``.

    half-plane and euclidean-plane: +90 degree rotation of the chart tangent,
    rescaled to unit length in the metric.  sphere: (gamma x gamma')/|gamma'|
    in R^3, the orientation matching N(p) = -p on S^2.
    """
    du, dv = state.du, state.dv
    if space == "euclidean-plane":
        m = math.hypot(du, dv)
        return np.array([-dv, du]) / m
    if space == "half-plane":
        m = math.hypot(du, dv)
        return state.v * np.array([-dv, du]) / m
    if space == "sphere":
        g = sphere_embed((state.u, state.v))
        gp = sphere_tangent(state.u, state.v, du, dv)
        return np.cross(g, gp) / np.linalg.norm(gp)
    raise InputError(f"unknown space {space!r}")


def hyp_inner(p, a, b) -> float:
    """Hyperbolic inner product of chart tangents a, b at p."""
    y = p[1]
    return float(np.dot(a, b)) / (y * y)


def metric_inner(space: str, p, a, b) -> float:
    if space == "half-plane":
        return hyp_inner(p, a, b)
    return float(np.dot(a, b))


def metric_gradient(family: FamilySpec | str, p, step: float = 1e-7) -> np.ndarray:
    """Central-difference gradient of the reference distance, raised by the metric.

    Sphere families return the gradient as a vector of R^3 tangent to S^2.
    """
    kind = family.kind if isinstance(family, FamilySpec) else family
    u, v = p
    gu = (_raw_distance(kind, u + step, v) - _raw_distance(kind, u - step, v)) / (2 * step)
    gv = (_raw_distance(kind, u, v + step) - _raw_distance(kind, u, v - step)) / (2 * step)
    if kind in SPHERICAL:
        # g = diag(1, cos^2 u); push (gu, gv/cos^2 u) to R^3
        c = math.cos(u)
        return sphere_tangent(u, v, gu, gv / (c * c))
    if kind in HYPERBOLIC:
        return v * v * np.array([gu, gv])
    return np.array([gu, gv])


# ----------------------------------------------------------------------------
# admissibility

def guard(kind: str, alpha: float, u: float, v: float,
          eps_d: float = EPS_D, eps_pole: float = EPS_POLE) -> str | None:
    """Return None if (u, v) is admissible, else the stop reason.

    With ``alpha == 0`` the law has no reference-line singularity, so only
    the chart itself is guarded (sphere poles, the ideal boundary v = 0).
    """
    if not (math.isfinite(u) and math.isfinite(v)):
        return "numeric-failure"
    if kind in SPHERICAL:
        if abs(u) >= math.pi / 2 - eps_pole:
            return "pole-guard"
    elif kind in HYPERBOLIC:
        if v <= eps_d:
            return "domain-guard"
    if alpha == 0:
        return None
    if not _raw_distance(kind, u, v) > eps_d:
        return "domain-guard"
    return None


def check_admissible(family: FamilySpec, u: float, v: float,
                     eps_d: float = EPS_D, eps_pole: float = EPS_POLE) -> None:
    reason = guard(family.kind, family.alpha, u, v, eps_d, eps_pole)
    if reason is not None:
        raise DomainError(f"({u}, {v}) not admissible for {family.kind}: {reason}")
