"""Surfaces of revolution generated by catenaries, and their mean curvature.

S^3: a curve u = u(t) in the chart (u, v = t) of the totally geodesic
S^2 = {x4 = 0} is rotated in the (x3, x4) plane,

    Phi(t, s) = (cos u cos t, cos u sin t, sin u cos s, sin u sin s).

H^3 (upper half-space): a curve (u(t), v(t)) of the half-plane {x2 = 0,
x1 > 0} is rotated about the x3 axis, Phi(t, s) = (u cos s, u sin s, v).
Hyperbolic mean curvature follows from the Euclidean one by the conformal
change H = x3 H_e + N3, with N the Euclidean unit normal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from .errors import DegenerateError, InputError, ProjectionError, ResampleError
from .flow import SampledCurve, hermite_splines
from .laws import _theta_rhs

SPACES = ("s3", "h3")
POLE_TOL = 1e-9
DEFAULT_POLE = (-1.0, 0.0, 0.0, 0.0)


def _as_real(x) -> np.ndarray:
    """Float array, keeping extended precision if the input has it."""
    x = np.asarray(x)
    return x.astype(np.result_type(x.dtype, np.float64), copy=False)


# ----------------------------------------------------------------------------
# closed forms

def s3_mean_curvature(u: float, du: float, ddu: float) -> float:
    """Mean curvature of the S^3 revolution of the graph u(t), v = t.

    Normalized as the sum of the principal curvatures, so the parallel
    circle u = const gives 2 cot 2u.
    """
    s, c = math.sin(u), math.cos(u)
    if s == 0:
        raise DegenerateError("generating curve touches the rotation axis")
    q = du * du + c * c
    if q <= 0:
        raise DegenerateError("degenerate generating curve")
    num = c * (c + math.cos(3 * u)) + (3 * math.cos(2 * u) - 1) * du * du - 2 * ddu * s * c
    return num / (2 * s * q ** 1.5)


def graph_geodesic_curvature(u: float, du: float, ddu: float) -> float:
    """Geodesic curvature in S^2 of t -> Psi(u(t), t)."""
    s, c = math.sin(u), math.cos(u)
    q = du * du + c * c
    return (2 * du * du * s + c * c * s + ddu * c) / q ** 1.5


def s3_mean_curvature_from_kappa(u: float, speed: float, kappa_s: float) -> float:
    """H from the geodesic curvature of the generating curve: (cos^2 u - sin u |g'| k) / (sin u |g'|)."""
    s = math.sin(u)
    if s == 0 or speed == 0:
        raise DegenerateError("degenerate generating curve")
    return (math.cos(u) ** 2 - s * speed * kappa_s) / (s * speed)


def h3_mean_curvature(u: float, v: float, du: float, dv: float, kappa_e: float) -> float:
    """Hyperbolic mean curvature of the H^3 revolution: 2H = v k_e + v v'/(u sqrt m) + 2u'/sqrt m."""
    if u == 0:
        raise DegenerateError("generating curve touches the rotation axis")
    sm = math.hypot(du, dv)
    if sm == 0:
        raise DegenerateError("zero chart speed")
    return 0.5 * (v * kappa_e + v * dv / (u * sm) + 2 * du / sm)


def euclidean_revolution_curvature(u: float, du: float, dv: float, kappa_e: float) -> float:
    """Euclidean mean curvature H_e = k_e/2 + v'/(2u sqrt m) of the rotation about the x3 axis."""
    sm = math.hypot(du, dv)
    return 0.5 * kappa_e + dv / (2 * u * sm)


# ----------------------------------------------------------------------------
# patches

@dataclass
class RevolutionPatch:
    """Revolution of a generating profile.

    ``profile(t)`` returns chart arrays (u, v); for ``space='s3'`` it must
    satisfy v = t.  ``t_samples`` are the generating samples used for meshes
    and reports, ``n_angular`` the number of angular intervals.
    """

    space: str
    profile: Callable[[np.ndarray], tuple[np.ndarray, np.ndarray]]
    t_samples: np.ndarray
    n_angular: int = 64

    def __post_init__(self):
        if self.space not in SPACES:
            raise InputError(f"space must be one of {SPACES}")
        self.t_samples = np.asarray(self.t_samples, float)
        if self.t_samples.ndim != 1 or len(self.t_samples) < 2:
            raise InputError("a patch needs at least two generating samples")
        if self.n_angular < 3:
            raise InputError("need at least 3 angular intervals")
        u, v = self.profile(self.t_samples)
        if self.space == "s3":
            if not np.all((u > 0) & (u < math.pi / 2)):
                raise InputError("S^3 generating curve must satisfy 0 < u < pi/2")
        elif not np.all((u > 0) & (v > 0)):
            raise InputError("H^3 generating curve must satisfy u > 0 and v > 0")

    @classmethod
    def from_function(cls, space: str, u_of_t, t_samples, n_angular: int = 64, v_of_t=None):
        """Patch from an analytic profile; S^3 takes u(t) only."""
        if space == "s3":
            def profile(t):
                t = _as_real(t)
                return np.broadcast_to(u_of_t(t), t.shape).astype(t.dtype), t
        else:
            if v_of_t is None:
                raise InputError("H^3 patches need v(t)")

            def profile(t):
                t = _as_real(t)
                return (np.broadcast_to(u_of_t(t), t.shape).astype(t.dtype),
                        np.broadcast_to(v_of_t(t), t.shape).astype(t.dtype))
        return cls(space, profile, t_samples, n_angular)

    @classmethod
    def from_curve(cls, curve: SampledCurve, space: str, n_angular: int = 64, n_t: int | None = None):
        """Patch generated by an integrated curve.

        For S^3 the curve is re-parametrized as a graph over v (cubic Hermite
        with slope cot theta); ResampleError if v is not strictly monotone.
        """
        if len(curve) < 2:
            raise InputError("a patch needs at least two generating samples")
        if space == "s3":
            v = curve.v
            dv = np.diff(v)
            if not (np.all(dv > 0) or np.all(dv < 0)):
                raise ResampleError("curve is not a monotone graph over the rotation parameter")
            order = np.argsort(v)
            sin_t = np.sin(curve.theta[order])
            if np.any(np.abs(sin_t) < 1e-12):
                raise ResampleError("vertical tangent: curve is not a graph over v")
            spline = CubicHermiteSpline(v[order], curve.u[order], np.cos(curve.theta[order]) / sin_t)

            def profile(t):
                t = np.asarray(t, float)
                return spline(t), t

            ts = v[order] if n_t is None else np.linspace(v[order][0], v[order][-1], n_t)
            return cls("s3", profile, ts, n_angular)
        su, sv = hermite_splines(curve)

        def profile(t):
            t = np.asarray(t, float)
            return su(t), sv(t)

        ts = curve.t if n_t is None else np.linspace(curve.t[0], curve.t[-1], n_t)
        return cls(space, profile, ts, n_angular)

    def embed(self, t, s) -> np.ndarray:
        """Phi(t, s); shape (..., 4) for S^3 and (..., 3) for H^3."""
        t, s = np.broadcast_arrays(_as_real(t), _as_real(s))
        u, v = self.profile(t.ravel())
        u, v = u.reshape(t.shape), v.reshape(t.shape)
        if self.space == "s3":
            cu, su = np.cos(u), np.sin(u)
            return np.stack([cu * np.cos(v), cu * np.sin(v), su * np.cos(s), su * np.sin(s)], axis=-1)
        return np.stack([u * np.cos(s), u * np.sin(s), v], axis=-1)

    def grid(self) -> np.ndarray:
        """Embedded vertex grid (n_t, n_angular + 1, dim); the seam column is repeated."""
        s = np.linspace(0.0, 2 * math.pi, self.n_angular + 1)
        s[-1] = 0.0
        T, S = np.meshgrid(self.t_samples, s, indexing="ij")
        return self.embed(T, S)


@dataclass(frozen=True)
class FundamentalForms:
    """First and second forms at one point.

    ``H`` follows the closed forms: principal-curvature sum in S^3, hyperbolic
    mean (average) curvature in H^3.
    """

    E: float
    F: float
    G: float
    h11: float
    h12: float
    h22: float
    normal: np.ndarray
    H: float

    @property
    def det(self) -> float:
        return self.E * self.G - self.F ** 2


def _normal_s3(p, a, b) -> np.ndarray:
    """Unit vector of R^4 orthogonal to p, a, b (cofactor expansion of det[., p, a, b])."""
    M = np.array([p, a, b])
    n = np.array([(-1) ** k * np.linalg.det(np.delete(M, k, axis=1)) for k in range(4)])
    norm = np.linalg.norm(n)
    if norm == 0:
        raise DegenerateError("tangent vectors are dependent")
    return n / norm


def _shape_mean(E, F, G, h11, h12, h22) -> float:
    return (E * h22 - 2 * F * h12 + G * h11) / (2 * (E * G - F * F))


def forms_from_derivatives(space: str, x, xt, xs, xtt, xts, xss, min_det: float = 0.0) -> FundamentalForms:
    E, F, G = xt @ xt, xt @ xs, xs @ xs
    if E * G - F * F <= min_det:
        raise DegenerateError("singular first fundamental form")
    if space == "s3":
        # orientation chosen so that the parallel circle u = pi/6 has H = +2/sqrt 3
        N = -_normal_s3(x, xt, xs)
    else:
        N = np.cross(xt, xs)
        N = N / np.linalg.norm(N)
    h11, h12, h22 = xtt @ N, xts @ N, xss @ N
    H = _shape_mean(E, F, G, h11, h12, h22)
    if space == "s3":
        # s3_mean_curvature is normalized as the sum of principal curvatures
        H = 2 * H
    else:
        H = x[2] * H + N[2]
    return FundamentalForms(E, F, G, h11, h12, h22, N, H)


def numeric_fundamental_forms(patch: RevolutionPatch, t: float, s: float, delta: float = 1e-4) -> FundamentalForms:
    """Fundamental forms from central differences of Phi with step ``delta``.

    Phi is sampled in extended precision where the platform has it: the
    second differences lose about eps/delta^2, which at delta = 1e-4 would
    otherwise be 1e-8.  Analytic profiles benefit; spline profiles are
    evaluated in double precision anyway.
    """
    ld = np.longdouble
    t, s, d = ld(t), ld(s), ld(delta)
    pts = patch.embed(np.array([t, t + d, t - d, t, t, t + d, t + d, t - d, t - d]),
                      np.array([s, s, s, s + d, s - d, s + d, s - d, s + d, s - d]))
    x, xp, xm, yp, ym, pp, pm, mp, mm = pts
    xt = (xp - xm) / (2 * d)
    xs = (yp - ym) / (2 * d)
    xtt = (xp - 2 * x + xm) / d ** 2
    xss = (yp - 2 * x + ym) / d ** 2
    xts = (pp - pm - mp + mm) / (4 * d * d)
    x, xt, xs, xtt, xts, xss = (np.asarray(a, np.float64) for a in (x, xt, xs, xtt, xts, xss))
    return forms_from_derivatives(patch.space, x, xt, xs, xtt, xts, xss, min_det=float(d) ** 2)


# ----------------------------------------------------------------------------
# minimality along integrated curves

@dataclass
class MinimalityReport:
    space: str
    H: np.ndarray
    max_abs: float
    mean_abs: float

    def is_minimal(self, tol: float = 1e-6) -> bool:
        return self.max_abs < tol


def minimality_report(curve: SampledCurve, space: str) -> MinimalityReport:
    """Closed-form H along a chart-parametrized integrated curve.

    Second derivatives come from the family's heading law (theta' is the
    chart curvature), never from differencing the samples.
    """
    if space not in SPACES:
        raise InputError(f"space must be one of {SPACES}")
    if curve.parametrization != "chart":
        raise InputError("minimality_report needs chart-arc-length samples")
    fam = curve.family
    if space == "s3" and fam.space != "sphere":
        raise InputError("S^3 revolutions need a spherical family")
    if space == "h3" and fam.space != "half-plane":
        raise InputError("H^3 revolutions need a hyperbolic family")
    if space == "s3":
        sv = np.sin(curve.theta)
        if not (np.all(sv > 0) or np.all(sv < 0)):
            raise ResampleError("curve is not a monotone graph over the rotation parameter")
    H = np.empty(len(curve))
    for i in range(len(curve)):
        u, v, th = curve.u[i], curve.v[i], curve.theta[i]
        du, dv = math.cos(th), math.sin(th)
        dth = _theta_rhs(fam.kind, fam.alpha, fam.paper_c, u, v, du, dv, 0.0, 0.0)
        if space == "s3":
            if not 0 < u < math.pi / 2:
                raise InputError("S^3 generating curve must satisfy 0 < u < pi/2")
            if abs(dv) < 1e-8:
                raise ResampleError("vertical tangent: curve is not a graph over v")
            H[i] = s3_mean_curvature(u, du / dv, -dth / dv ** 3)
        else:
            if not (u > 0 and v > 0):
                raise InputError("H^3 generating curve must satisfy u > 0 and v > 0")
            H[i] = h3_mean_curvature(u, v, du, dv, dth)
    a = np.abs(H)
    return MinimalityReport(space, H, float(a.max()), float(a.mean()))


# ----------------------------------------------------------------------------
# meshes

def stereographic(points: np.ndarray, pole=DEFAULT_POLE) -> np.ndarray:
    """Project points of S^3 to R^3 from ``pole``."""
    p = np.asarray(pole, float)
    p = p / np.linalg.norm(p)
    x = np.asarray(points, float)
    if np.any(np.linalg.norm(x - p, axis=-1) < POLE_TOL):
        raise ProjectionError("a vertex lies at the projection pole")
    k = int(np.argmax(np.abs(p)))
    if np.isclose(abs(p[k]), 1.0, atol=0, rtol=1e-15):
        basis = np.delete(np.eye(4), k, axis=0)
    else:
        basis = np.linalg.svd(p[None, :])[2][1:]
    dot = x @ p
    return (x @ basis.T) / (1 - dot)[..., None]


def mesh_arrays(patch: RevolutionPatch, pole=DEFAULT_POLE) -> tuple[np.ndarray, np.ndarray]:
    """Vertices (R^3) and 0-based triangles of the patch grid, seam duplicated."""
    g = patch.grid()
    if patch.space == "s3":
        g = stereographic(g, pole)
    n_t, n_c = g.shape[0], g.shape[1]
    verts = g.reshape(-1, 3)
    i, j = np.meshgrid(np.arange(n_t - 1), np.arange(n_c - 1), indexing="ij")
    a = (i * n_c + j).ravel()
    b = a + n_c
    c = b + 1
    d = a + 1
    tris = np.empty((2 * len(a), 3), dtype=np.int64)
    tris[0::2] = np.column_stack([a, b, c])
    tris[1::2] = np.column_stack([a, c, d])
    return verts, tris


def export_mesh(patch: RevolutionPatch, path, pole=DEFAULT_POLE) -> tuple[int, int]:
    """Write the patch as an ASCII OBJ; returns (vertex count, triangle count)."""
    verts, tris = mesh_arrays(patch, pole)
    if not np.all(np.isfinite(verts)):
        raise ProjectionError("non-finite projected vertex")
    with Path(path).open("w") as fh:
        for x, y, z in verts:
            fh.write(f"v {x:.17g} {y:.17g} {z:.17g}\n")
        for a, b, c in tris + 1:
            fh.write(f"f {a} {b} {c}\n")
    return len(verts), len(tris)


def load_obj(path) -> tuple[np.ndarray, np.ndarray]:
    """Read `v` and `f` records; faces are returned 0-based."""
    verts, faces = [], []
    with Path(path).open() as fh:
        for line in fh:
            parts = line.split()
            if not parts:
                continue
            if parts[0] == "v":
                verts.append([float(x) for x in parts[1:4]])
            elif parts[0] == "f":
                faces.append([int(x.split("/")[0]) - 1 for x in parts[1:4]])
    return np.array(verts), np.array(faces, dtype=np.int64)


def grid_mean_curvature(verts: np.ndarray, n_t: int, n_angular: int, space: str = "h3") -> np.ndarray:
    """Mean curvature at interior grid nodes of a re-imported revolution mesh.

    Uses index spacing (H does not depend on the parametrization) and wraps
    around the seam.  Only meaningful for H^3 meshes, whose vertices are
    chart coordinates.
    """
    if space != "h3":
        raise InputError("grid curvature is available for H^3 meshes only")
    g = verts.reshape(n_t, n_angular + 1, 3)[:, :-1]
    xt = 0.5 * (g[2:] - g[:-2])[:, :]
    xtt = g[2:] - 2 * g[1:-1] + g[:-2]
    gi = g[1:-1]
    right, left = np.roll(gi, -1, axis=1), np.roll(gi, 1, axis=1)
    xs = 0.5 * (right - left)
    xss = right - 2 * gi + left
    xts = 0.25 * (np.roll(g[2:], -1, 1) - np.roll(g[2:], 1, 1) - np.roll(g[:-2], -1, 1) + np.roll(g[:-2], 1, 1))
    out = np.empty(gi.shape[:2])
    for i in range(gi.shape[0]):
        for j in range(gi.shape[1]):
            out[i, j] = forms_from_derivatives("h3", gi[i, j], xt[i, j], xs[i, j],
                                               xtt[i, j], xts[i, j], xss[i, j]).H
    return out
