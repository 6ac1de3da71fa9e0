"""Brute-force check that integrated curves are critical points.

Weighted lengths are discretized on polylines with the midpoint rule,

    E = sum_k w(m_k) * len_k,   m_k = (P_k + P_{k+1}) / 2,

where len_k is the metric length of the chord evaluated at the midpoint.
Polylines are minimized with pinned endpoints and compared with two-point
solutions of the ODE found by shooting on the initial heading.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_banded
from scipy.optimize import brentq

from . import geometry as geo
from .errors import DomainError, InputError
from .flow import (IntegratorConfig, SampledCurve, attach_curvature, check_initial,
                   hermite_splines, make_rhs, rk4_step)
from .geometry import CurveState, FamilySpec


@dataclass
class Polyline:
    vertices: np.ndarray
    family: FamilySpec

    def __post_init__(self):
        self.vertices = np.array(self.vertices, dtype=float)
        if self.vertices.ndim != 2 or self.vertices.shape[1] != 2:
            raise InputError("vertices must be an (N, 2) array")
        if len(self.vertices) < 3:
            raise InputError("a polyline needs at least 3 vertices")
        if np.allclose(self.vertices[0], self.vertices[-1], rtol=0, atol=1e-14):
            raise InputError("endpoints coincide")

    @classmethod
    def chord(cls, family: FamilySpec, a, b, n: int) -> "Polyline":
        s = np.linspace(0.0, 1.0, n)[:, None]
        a, b = np.asarray(a, float), np.asarray(b, float)
        return cls((1 - s) * a + s * b, family)

    def __len__(self) -> int:
        return len(self.vertices)


@dataclass(frozen=True)
class MinimizerConfig:
    max_iters: int = 20000
    grad_tol: float = 1e-10
    initial_step: float = 1.0
    shrink: float = 0.5
    armijo: float = 1e-4
    precondition: bool = True
    moves: str = "normal"

    def __post_init__(self):
        if not (self.max_iters > 0 and self.grad_tol > 0 and 0 < self.shrink < 1
                and self.armijo > 0 and self.initial_step > 0):
            raise InputError("invalid minimizer configuration")
        if self.moves not in ("normal", "free"):
            raise InputError("moves must be 'normal' or 'free'")


@dataclass
class Minimization:
    """Result of ``minimize``.

    ``grad_max`` is the max component of the full energy gradient,
    ``descent_grad_max`` the one the stopping rule looks at (the normal
    components when ``moves == 'normal'``).
    """

    polyline: Polyline
    converged: bool
    iterations: int
    grad_max: float
    descent_grad_max: float
    energies: list[float] = field(default_factory=list)


# ----------------------------------------------------------------------------
# weights

def _distance_and_grad(kind: str, u, v):
    one, zero = np.ones_like(u), np.zeros_like(u)
    if kind == geo.EUCLIDEAN:
        return v, zero, one
    if kind == geo.SPHERE:
        return u, one, zero
    if kind == geo.SPHERE_EXTRINSIC:
        return np.sin(u), np.cos(u), zero
    if kind == geo.HYP_GEODESIC:
        r = np.hypot(u, v)
        return np.log((u + r) / v), 1 / r, -u / (r * v)
    if kind == geo.HYP_HORODIST:
        return u / v, 1 / v, -u / (v * v)
    return np.log(v), zero, 1 / v


def _weight(family: FamilySpec, u, v):
    """w = d^alpha and its chart gradient at midpoints; DomainError if inadmissible."""
    kind, a = family.kind, family.alpha
    if kind in geo.SPHERICAL and np.any(np.abs(u) >= math.pi / 2):
        raise DomainError("midpoint at a sphere pole")
    if kind in geo.HYPERBOLIC and np.any(v <= 0):
        raise DomainError("midpoint on the ideal boundary")
    if a == 0:
        return np.ones_like(u), np.zeros_like(u), np.zeros_like(u)
    with np.errstate(all="ignore"):
        d, du, dv = _distance_and_grad(kind, u, v)
    if not np.all(d > 0):
        raise DomainError(f"midpoint on or beyond the {kind} reference line")
    w = d ** a
    dw = a * d ** (a - 1)
    return w, dw * du, dw * dv


class FamilyEnergy:
    """Discrete weighted length of a family; value, gradient and a stiffness model."""

    def __init__(self, family: FamilySpec):
        self.family = family

    def _terms(self, P):
        m = 0.5 * (P[:-1] + P[1:])
        D = np.diff(P, axis=0)
        w, wu, wv = _weight(self.family, m[:, 0], m[:, 1])
        return m, D, w, wu, wv

    def segments(self, P) -> tuple[np.ndarray, np.ndarray]:
        """Per-segment energy and stiffness weight/length."""
        m, D, w, wu, wv = self._terms(P)
        if self.family.space == "sphere":
            c = np.cos(m[:, 0])
            ell = np.sqrt(D[:, 0] ** 2 + (c * D[:, 1]) ** 2)
            return w * ell, w / ell
        ell = np.hypot(D[:, 0], D[:, 1])
        F = w / m[:, 1] if self.family.space == "half-plane" else w
        return F * ell, F / ell

    def value(self, P) -> float:
        return float(np.sum(self.segments(P)[0]))

    def gradient(self, P) -> np.ndarray:
        m, D, w, wu, wv = self._terms(P)
        if self.family.space == "sphere":
            c, s = np.cos(m[:, 0]), np.sin(m[:, 0])
            ell = np.sqrt(D[:, 0] ** 2 + (c * D[:, 1]) ** 2)
            gm = np.column_stack([wu * ell - w * c * s * D[:, 1] ** 2 / ell, np.zeros_like(ell)])
            gD = np.column_stack([w * D[:, 0] / ell, w * c * c * D[:, 1] / ell])
        else:
            ell = np.hypot(D[:, 0], D[:, 1])
            if self.family.space == "half-plane":
                lam = 1 / m[:, 1]
                F = w * lam
                Fu = wu * lam
                Fv = wv * lam - w * lam * lam
            else:
                F, Fu, Fv = w, wu, wv
            gm = np.column_stack([Fu, Fv]) * ell[:, None]
            gD = F[:, None] * D / ell[:, None]
        return _assemble(gm, gD)


class ConformalLength:
    """Length in the conformal metric factor(u, v)^2 (du^2 + dv^2).

    ``factor`` is a vectorized callable; its gradient is taken by central
    differences, so this path shares no weight formulas with FamilyEnergy.
    """

    def __init__(self, factor, step: float = 1e-6):
        self.factor = factor
        self.step = step

    def segments(self, P):
        m = 0.5 * (P[:-1] + P[1:])
        ell = np.hypot(*np.diff(P, axis=0).T)
        F = self.factor(m[:, 0], m[:, 1])
        if not np.all(np.isfinite(F)):
            raise DomainError("conformal factor undefined at a midpoint")
        return F * ell, F / ell

    def value(self, P) -> float:
        return float(np.sum(self.segments(P)[0]))

    def gradient(self, P) -> np.ndarray:
        m = 0.5 * (P[:-1] + P[1:])
        D = np.diff(P, axis=0)
        ell = np.hypot(D[:, 0], D[:, 1])
        f, h = self.factor, self.step
        F = f(m[:, 0], m[:, 1])
        Fu = (f(m[:, 0] + h, m[:, 1]) - f(m[:, 0] - h, m[:, 1])) / (2 * h)
        Fv = (f(m[:, 0], m[:, 1] + h) - f(m[:, 0], m[:, 1] - h)) / (2 * h)
        return _assemble(np.column_stack([Fu, Fv]) * ell[:, None], F[:, None] * D / ell[:, None])


def conformal_factor(family: FamilySpec):
    """Factor w/v of a hyperbolic family's weighted length, as a vectorized callable."""
    if family.kind not in geo.HYPERBOLIC:
        raise InputError("conformal reading applies to the hyperbolic families")

    def factor(u, v):
        with np.errstate(all="ignore"):
            d = np.array([geo._raw_distance(family.kind, a, b) for a, b in zip(np.atleast_1d(u), np.atleast_1d(v))])
            return np.where(d > 0, d ** family.alpha / np.atleast_1d(v), np.nan)

    return factor


def _assemble(gm: np.ndarray, gD: np.ndarray) -> np.ndarray:
    n = len(gm) + 1
    G = np.zeros((n, 2))
    G[:-1] += 0.5 * gm - gD
    G[1:] += 0.5 * gm + gD
    G[0] = 0.0
    G[-1] = 0.0
    return G


def discrete_energy(p: Polyline) -> float:
    return FamilyEnergy(p.family).value(p.vertices)


def energy_gradient(p: Polyline) -> np.ndarray:
    """Analytic gradient of discrete_energy; endpoint rows are zero."""
    return FamilyEnergy(p.family).gradient(p.vertices)


# ----------------------------------------------------------------------------
# minimization

def _chain_solve(stiff: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Solve the weighted chain Laplacian (H^1 inner product) on interior vertices."""
    a = stiff
    n_in = len(a) - 1
    ab = np.zeros((3, n_in))
    ab[1] = a[:-1] + a[1:]
    ab[0, 1:] = -a[1:-1]
    ab[2, :-1] = -a[1:-1]
    out = np.zeros_like(g)
    out[1:-1] = solve_banded((1, 1), ab, g[1:-1])
    return out


def vertex_normals(P: np.ndarray) -> np.ndarray:
    """Chart unit normals from central chords; endpoint rows are zero."""
    n = np.zeros_like(P)
    d = P[2:] - P[:-2]
    n[1:-1] = np.column_stack([-d[:, 1], d[:, 0]]) / np.hypot(d[:, 0], d[:, 1])[:, None]
    return n


def _direction(energy, P, G, cfg):
    """Descent direction and the gradient components it is meant to drive to zero."""
    if cfg.moves == "normal":
        N = vertex_normals(P)
        g = np.sum(G * N, axis=1)
        phi = _chain_solve(energy.segments(P)[1], g) if cfg.precondition else g
        return -phi[:, None] * N, g
    d = _chain_solve(energy.segments(P)[1], G) if cfg.precondition else G
    return -d, G


def minimize(p0: Polyline, cfg: MinimizerConfig | None = None, energy=None) -> Minimization:
    """Gradient descent with Armijo backtracking and pinned endpoints.

    With ``cfg.precondition`` the step is the gradient in the weighted H^1
    metric of the chain, which removes the N^2 stiffness of the vertex
    gradient.  With ``cfg.moves == 'normal'`` vertices only move along
    their normals: sliding vertices along the curve is a reparametrization
    in which the midpoint energy is nearly flat (unstable for convex
    weights), so plain descent stalls there without changing the shape.
    Trial steps leaving the domain are shrunk like rejected ones.
    """
    cfg = cfg or MinimizerConfig()
    energy = energy or FamilyEnergy(p0.family)
    P = p0.vertices.copy()
    E = energy.value(P)
    energies = [E]
    G = energy.gradient(P)
    d, g = _direction(energy, P, G, cfg)
    gmax = float(np.max(np.abs(g)))
    it = 0
    while it < cfg.max_iters and gmax > cfg.grad_tol:
        slope = float(np.sum(G * d))
        if not slope < 0:
            break
        step = cfg.initial_step
        accepted = False
        feasible = False
        while step > 1e-30:
            trial = P + step * d
            try:
                Et = energy.value(trial)
                feasible = True
            except DomainError:
                Et = math.inf
            if Et <= E + cfg.armijo * step * slope:
                accepted = True
                break
            step *= cfg.shrink
        if not accepted:
            if not feasible:
                raise DomainError("no feasible descent step inside the domain")
            break
        P, E = trial, Et
        energies.append(E)
        G = energy.gradient(P)
        d, g = _direction(energy, P, G, cfg)
        gmax = float(np.max(np.abs(g)))
        it += 1
    return Minimization(Polyline(P, p0.family), gmax <= cfg.grad_tol, it,
                        float(np.max(np.abs(G))), gmax, energies)


# ----------------------------------------------------------------------------
# comparisons

def distance_to_polyline(points: np.ndarray, chain: np.ndarray) -> np.ndarray:
    """Chart distance of each point to a piecewise-linear chain."""
    A, B = chain[:-1], chain[1:]
    D = B - A
    dd = np.maximum(np.sum(D * D, axis=1), 1e-300)
    out = np.empty(len(points))
    for i, p in enumerate(points):
        s = np.clip(np.sum((p - A) * D, axis=1) / dd, 0.0, 1.0)
        q = A + s[:, None] * D
        out[i] = np.min(np.hypot(q[:, 0] - p[0], q[:, 1] - p[1]))
    return out


def compare_to_ode(p: Polyline, curve: SampledCurve) -> float:
    """Max chart distance from polyline vertices to the sampled ODE curve."""
    if p.family.kind != curve.family.kind:
        raise InputError("polyline and curve belong to different families")
    return float(np.max(distance_to_polyline(p.vertices, curve.points())))


def resample_polyline(curve: SampledCurve, n: int) -> Polyline:
    """n vertices equally spaced in chart arc length along ``curve``."""
    su, sv = hermite_splines(curve)
    t = np.linspace(curve.t[0], curve.t[-1], n)
    P = np.column_stack([su(t), sv(t)])
    P[0] = curve.u[0], curve.v[0]
    P[-1] = curve.u[-1], curve.v[-1]
    return Polyline(P, curve.family)


# ----------------------------------------------------------------------------
# shooting

@dataclass
class ShotResult:
    curve: SampledCurve
    theta0: float
    miss: float
    evaluations: int


def _fire(family, a, e_hat, n_hat, dist, theta0, cfg: IntegratorConfig, length_factor: float):
    """Integrate from ``a`` until crossing the line through b orthogonal to (b - a)."""
    rhs = make_rhs(family, cfg.eps_d, cfg.eps_pole)
    h = cfg.h
    u, v, th = a[0], a[1], theta0
    states = [(u, v, th)]
    ts = [0.0]

    def along(x, y):
        return (x - a[0]) * e_hat[0] + (y - a[1]) * e_hat[1]

    n_max = int(length_factor * dist / h) + 1
    for _ in range(n_max):
        try:
            un, vn, thn = rk4_step(rhs, u, v, th, h)
        except (DomainError, ZeroDivisionError, ValueError, OverflowError):
            return None
        if geo.guard(family.kind, family.alpha, un, vn, cfg.eps_d, cfg.eps_pole) is not None:
            return None
        if along(un, vn) >= dist:
            base = (u, v, th)

            def excess(hh):
                x, y, _ = rk4_step(rhs, *base, hh)
                return along(x, y) - dist

            hh = brentq(excess, 0.0, h, xtol=1e-16, rtol=1e-15) if excess(h) > 0 else h
            un, vn, thn = rk4_step(rhs, *base, hh)
            states.append((un, vn, thn))
            ts.append(ts[-1] + hh)
            miss = (un - a[0]) * n_hat[0] + (vn - a[1]) * n_hat[1]
            return miss, np.array(ts), np.array(states)
        u, v, th = un, vn, thn
        states.append((u, v, th))
        ts.append(ts[-1] + h)
        if along(u, v) < -dist:
            return None
    return None


def shoot(family: FamilySpec, a, b, bracket: tuple[float, float] | None = None,
          cfg: IntegratorConfig | None = None, tol: float = 1e-10,
          length_factor: float = 4.0, scan: int = 25, scan_width: float = 1.2) -> ShotResult:
    """Two-point solution from a to b by bisection on the initial heading.

    Without ``bracket`` the headings chord +- ``scan_width`` are scanned and
    the sign change nearest to the chord direction is refined.
    """
    cfg = cfg or IntegratorConfig()
    a = np.asarray(a, float)
    b = np.asarray(b, float)
    chord = b - a
    dist = float(np.hypot(*chord))
    if dist < 1e-12:
        raise InputError("endpoints coincide")
    check_initial(family, CurveState(a[0], a[1], 0.0), cfg)
    check_initial(family, CurveState(b[0], b[1], 0.0), cfg)
    e_hat = chord / dist
    n_hat = np.array([-e_hat[1], e_hat[0]])
    base = math.atan2(chord[1], chord[0])
    evals = 0

    def miss(th0):
        nonlocal evals
        evals += 1
        return _fire(family, a, e_hat, n_hat, dist, th0, cfg, length_factor)

    if bracket is None:
        offs = np.linspace(-scan_width, scan_width, scan)
        vals = [miss(base + o) for o in offs]
        pairs = []
        for k in range(scan - 1):
            if vals[k] is not None and vals[k + 1] is not None and vals[k][0] * vals[k + 1][0] <= 0:
                pairs.append((abs(offs[k] + offs[k + 1]), k))
        if not pairs:
            raise InputError("no heading bracket found; supply one explicitly")
        k = min(pairs)[1]
        lo, hi = base + offs[k], base + offs[k + 1]
        r_lo, r_hi = vals[k], vals[k + 1]
    else:
        lo, hi = bracket
        r_lo, r_hi = miss(lo), miss(hi)
        if r_lo is None or r_hi is None or r_lo[0] * r_hi[0] > 0:
            raise InputError("bracket does not straddle the target")

    best = min((r_lo, lo), (r_hi, hi), key=lambda x: abs(x[0][0]))
    while abs(best[0][0]) > tol and hi - lo > 1e-15:
        mid = 0.5 * (lo + hi)
        r_mid = miss(mid)
        if r_mid is None:
            raise InputError("shooting left the domain inside the bracket")
        if r_mid[0] * r_lo[0] <= 0:
            hi, r_hi = mid, r_mid
        else:
            lo, r_lo = mid, r_mid
        if abs(r_mid[0]) < abs(best[0][0]):
            best = (r_mid, mid)
    (m, ts, st), th0 = best
    curve = SampledCurve(family, ts, st[:, 0], st[:, 1], st[:, 2], "length-exhausted", cfg.h)
    return ShotResult(attach_curvature(curve), th0, float(m), evals)
