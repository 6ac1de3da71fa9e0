"""Curvature formulas and the prescribed-curvature law of each family.

All laws are written for a chart velocity (u', v'); the integrator uses the
chart arc-length parametrization u' = cos theta, v' = sin theta, so m = 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import geometry as geo
from .errors import DegenerateError, DomainError
from .geometry import CurveState, FamilySpec


@dataclass(frozen=True)
class CurvatureReport:
    kappa_actual: float
    kappa_target: float

    @property
    def residual(self) -> float:
        return self.kappa_actual - self.kappa_target


# ----------------------------------------------------------------------------
# curvature of a chart curve

def chart_curvature(du: float, dv: float, ddu: float, ddv: float) -> float:
    m = du * du + dv * dv
    if m == 0:
        raise DegenerateError("zero chart speed")
    return (du * ddv - dv * ddu) / m ** 1.5


def hyperbolic_curvature(v: float, kappa_e: float, du: float, m: float) -> float:
    """Geodesic curvature in H^2 from the Euclidean one (conformal change)."""
    return v * kappa_e + du / math.sqrt(m)


def sphere_geodesic_curvature(u: float, du: float, dv: float, ddu: float, ddv: float) -> float:
    """Geodesic curvature of Psi(u(t), v(t)) in S^2, normal N(p) = -p."""
    c, s = math.cos(u), math.sin(u)
    speed2 = du * du + dv * dv * c * c
    if speed2 == 0:
        raise DegenerateError("zero speed on the sphere")
    num = dv * (2 * du * du * s + dv * dv * c * c * s + ddu * c) - du * ddv * c
    return num / speed2 ** 1.5


def realized_curvature(space: str, u, v, du, dv, ddu, ddv):
    """Space-form curvature from chart derivatives; works on scalars or arrays."""
    if space == "sphere":
        c, s = np.cos(u), np.sin(u)
        speed2 = du * du + dv * dv * c * c
        num = dv * (2 * du * du * s + dv * dv * c * c * s + ddu * c) - du * ddv * c
        return num / speed2 ** 1.5
    m = du * du + dv * dv
    ke = (du * ddv - dv * ddu) / m ** 1.5
    if space == "half-plane":
        return v * ke + du / np.sqrt(m)
    return ke


# ----------------------------------------------------------------------------
# prescribed laws

def _target(kind: str, alpha: float, u: float, v: float, du: float, dv: float,
            eps_d: float = geo.EPS_D) -> float:
    if alpha == 0:
        return 0.0
    d = geo._raw_distance(kind, u, v)
    if not d > eps_d:
        raise DomainError(f"{kind} law is singular at ({u}, {v})")
    if kind == geo.SPHERE:
        c = math.cos(u)
        return alpha * dv * c / (d * math.sqrt(du * du + dv * dv * c * c))
    if kind == geo.SPHERE_EXTRINSIC:
        c = math.cos(u)
        return alpha * dv * c * c / (d * math.sqrt(du * du + dv * dv * c * c))
    sm = math.sqrt(du * du + dv * dv)
    if kind == geo.EUCLIDEAN:
        return alpha * du / (sm * d)
    if kind == geo.HYP_GEODESIC:
        return -alpha / d * (u * du + v * dv) / (math.hypot(u, v) * sm)
    if kind == geo.HYP_HORODIST:
        return -alpha * (u * du + v * dv) / (d * v * sm)
    return alpha * du / (d * sm)


def target_curvature(family: FamilySpec, state: CurveState, eps_d: float = geo.EPS_D) -> float:
    """Curvature the family's law prescribes at ``state``.

    Measured as kappa_s on S^2, kappa_h on H^2 and kappa_e on the plane.
    """
    return _target(family.kind, family.alpha, state.u, state.v, state.du, state.dv, eps_d)


def dual_form_target(family: FamilySpec, state: CurveState, eps_d: float = geo.EPS_D) -> float:
    """alpha <n, field> / d, evaluated with explicit normals and fields."""
    if family.alpha == 0:
        return 0.0
    p = state.position
    d = geo.distance_to_reference(family, p)
    if not d > eps_d:
        raise DomainError(f"{family.kind} law is singular at {p}")
    n = geo.unit_normal(family.space, state)
    field = geo.field_at(family, p)
    return family.alpha * geo.metric_inner(family.space, p, n, field) / d


def weighted_sphere_law(f: float, fprime: float, state: CurveState) -> float:
    """kappa_s prescribed by the weight f(u) in the energy int f(u)|gamma'| dt."""
    if f == 0:
        raise DegenerateError("weight vanishes")
    c = math.cos(state.u)
    du, dv = state.du, state.dv
    return fprime * dv * c / (f * math.sqrt(du * du + dv * dv * c * c))


# ----------------------------------------------------------------------------
# heading equations

def _sphere_theta_rhs(u: float, du: float, dv: float, kappa: float) -> float:
    # inverts sphere_geodesic_curvature with u'' = -v' theta', v'' = u' theta'
    c, s = math.cos(u), math.sin(u)
    speed2 = du * du + dv * dv * c * c
    return (dv * s * (2 * du * du + dv * dv * c * c) - kappa * speed2 ** 1.5) / c


def kappa_beta(c: float, u: float) -> float:
    """Curvature of the graph v -> (u(v), v) of a spherical catenary with first integral c."""
    cu, su = math.cos(u), math.sin(u)
    # cos^2 u (u^2 cos^2 u - c^2) + c^2, rearranged to avoid cancellation near u = 0
    den = (c * su) ** 2 + (u * cu * cu) ** 2
    if den <= 0:
        raise DegenerateError("non-positive radicand in the graph curvature")
    num = c * c * su + u * cu ** 3 - 2 * u * u * su * cu * cu
    return c * cu * num / den ** 1.5


def paper_mode_sphere_rhs(c: float, u: float) -> float:
    """Heading rate of the fixed-c spherical system in the (u', v') = (cos, sin) convention.

    ``kappa_beta`` is the curvature of the graph over the v axis, whose
    orientation is opposite to theta; the sign flip makes the two agree on
    genuine catenaries.
    """
    return -kappa_beta(c, u)


def _theta_rhs(kind: str, alpha: float, paper_c: float | None, u: float, v: float,
               du: float, dv: float, eps_d: float = geo.EPS_D,
               eps_pole: float = geo.EPS_POLE) -> float:
    if kind in geo.SPHERICAL:
        if abs(u) >= math.pi / 2 - eps_pole:
            raise DomainError("chart pole")
        if paper_c is not None:
            if not u > eps_d:
                raise DomainError("reference line")
            return paper_mode_sphere_rhs(paper_c, u)
        return _sphere_theta_rhs(u, du, dv, _target(kind, alpha, u, v, du, dv, eps_d))
    kappa = _target(kind, alpha, u, v, du, dv, eps_d)
    if kind == geo.EUCLIDEAN:
        return kappa
    if v <= 0:
        raise DomainError("ideal boundary")
    return (kappa - du) / v


def theta_rhs(family: FamilySpec, state: CurveState, eps_d: float = geo.EPS_D,
              eps_pole: float = geo.EPS_POLE) -> float:
    """theta' = Euclidean chart curvature of the family's solution through ``state``."""
    return _theta_rhs(family.kind, family.alpha, family.paper_c, state.u, state.v,
                      state.du, state.dv, eps_d, eps_pole)


def curvature_report(family: FamilySpec, state: CurveState, kappa_actual: float) -> CurvatureReport:
    return CurvatureReport(kappa_actual, target_curvature(family, state))
