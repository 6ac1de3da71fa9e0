"""Arc-length integration of catenary flows and conserved-quantity monitoring."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_simpson
from scipy.interpolate import CubicHermiteSpline

from . import geometry as geo
from .errors import DomainError, InputError, UnsupportedFamily
from .geometry import CurveState, FamilySpec
from .laws import _theta_rhs, realized_curvature

STOP_REASONS = ("length-exhausted", "domain-guard", "pole-guard", "numeric-failure")


@dataclass(frozen=True)
class IntegratorConfig:
    h: float = 1e-3
    max_length: float = 10.0
    eps_d: float = geo.EPS_D
    eps_pole: float = geo.EPS_POLE

    def __post_init__(self):
        if not (self.h > 0 and math.isfinite(self.h)):
            raise InputError("step size must be positive")
        if not (self.max_length > 0 and math.isfinite(self.max_length)):
            raise InputError("max_length must be positive")
        if not (self.eps_d > 0 and self.eps_pole > 0):
            raise InputError("guards must be positive")


@dataclass
class SampledCurve:
    """Samples of a catenary with per-sample diagnostics.

    ``t`` is chart arc length unless ``parametrization == 'metric'``.
    ``first_integral`` is NaN for families without a known conserved momentum.
    """

    family: FamilySpec
    t: np.ndarray
    u: np.ndarray
    v: np.ndarray
    theta: np.ndarray
    stop_reason: str = "length-exhausted"
    h: float | None = None
    first_integral: np.ndarray | None = None
    kappa_target: np.ndarray | None = None
    kappa_actual: np.ndarray | None = None
    warnings: list[str] = field(default_factory=list)
    parametrization: str = "chart"
    metric_length: float | None = None

    def __post_init__(self):
        for name in ("t", "u", "v", "theta"):
            setattr(self, name, np.asarray(getattr(self, name), dtype=float))
        if self.first_integral is None:
            self.first_integral = first_integral_array(self.family, self.u, self.v, self.theta)

    def __len__(self) -> int:
        return len(self.t)

    @property
    def residual(self) -> np.ndarray | None:
        if self.kappa_actual is None:
            return None
        return self.kappa_actual - self.kappa_target

    def state(self, i: int) -> CurveState:
        return CurveState(float(self.u[i]), float(self.v[i]), float(self.theta[i]))

    def points(self) -> np.ndarray:
        return np.column_stack([self.u, self.v])

    def first_integral_drift(self) -> float:
        fi = self.first_integral
        if fi is None or len(fi) == 0 or np.isnan(fi[0]):
            return math.nan
        return float(np.max(np.abs(fi - fi[0])))


# ----------------------------------------------------------------------------
# first integrals

def first_integral(family: FamilySpec, state: CurveState) -> float:
    """Conserved momentum dJ/dv' (sphere) or dJ/du' (horocycle)."""
    if family.kind not in (geo.SPHERE, geo.HOROCYCLE):
        raise UnsupportedFamily(f"no first integral is known for {family.kind}")
    return float(first_integral_array(family, state.u, state.v, state.theta))


def first_integral_array(family: FamilySpec, u, v, theta):
    u, v, theta = np.asarray(u, float), np.asarray(v, float), np.asarray(theta, float)
    du, dv = np.cos(theta), np.sin(theta)
    a = family.alpha
    with np.errstate(all="ignore"):
        if family.kind == geo.SPHERE:
            c = np.cos(u)
            return u ** a * dv * c * c / np.sqrt(du * du + dv * dv * c * c)
        if family.kind == geo.HOROCYCLE:
            return du * np.log(v) ** a / (v * np.hypot(du, dv))
    return np.full_like(u, np.nan)


# ----------------------------------------------------------------------------
# finite-difference diagnostics

def fd_derivatives(t: np.ndarray, x: np.ndarray, width: int = 5) -> tuple[np.ndarray, np.ndarray]:
    """First and second derivatives of samples x(t) from local polynomial stencils.

    Each sample uses ``width`` neighbours (centered where possible); on a
    uniform grid the interior stencils are fourth order.
    """
    t = np.asarray(t, float)
    x = np.asarray(x, float)
    n = len(t)
    width = min(width, n)
    if width < 3:
        raise InputError("need at least 3 samples for curvature")
    start = np.clip(np.arange(n) - width // 2, 0, n - width)
    idx = start[:, None] + np.arange(width)[None, :]
    scale = (t[-1] - t[0]) / max(n - 1, 1) or 1.0
    off = (t[idx] - t[:, None]) / scale
    k = np.arange(width)
    fact = np.array([math.factorial(j) for j in k], dtype=float)
    vander = off[:, None, :] ** k[None, :, None] / fact[None, :, None]
    rhs = np.zeros((n, width, 2))
    rhs[:, 1, 0] = 1.0
    rhs[:, 2, 1] = 1.0
    w = np.linalg.solve(vander, rhs)
    xs = x[idx]
    d1 = np.einsum("nw,nw->n", w[:, :, 0], xs) / scale
    d2 = np.einsum("nw,nw->n", w[:, :, 1], xs) / scale ** 2
    return d1, d2


def target_curvature_array(kind: str, alpha: float, u, v, du, dv) -> np.ndarray:
    u, v, du, dv = (np.asarray(a, float) for a in (u, v, du, dv))
    if alpha == 0:
        return np.zeros_like(u)
    with np.errstate(all="ignore"):
        if kind in geo.SPHERICAL:
            c = np.cos(u)
            speed = np.sqrt(du * du + dv * dv * c * c)
            if kind == geo.SPHERE:
                return alpha * dv * c / (u * speed)
            return alpha * dv * c * c / (np.sin(u) * speed)
        sm = np.hypot(du, dv)
        if kind == geo.EUCLIDEAN:
            return alpha * du / (sm * v)
        if kind == geo.HYP_GEODESIC:
            r = np.hypot(u, v)
            d = np.log((u + r) / v)
            return -alpha / d * (u * du + v * dv) / (r * sm)
        if kind == geo.HYP_HORODIST:
            return -alpha * (u * du + v * dv) / ((u / v) * v * sm)
        return alpha * du / (np.log(v) * sm)


def attach_curvature(curve: SampledCurve, family: FamilySpec | None = None) -> SampledCurve:
    """Fill kappa_target (law at each sample) and kappa_actual (finite differences).

    The velocity comes from differencing u and v; the normal acceleration
    from differencing the recorded heading, theta' (-v', u').  Second
    differences of positions would lose eps/h^2 (about 1e-10 at h = 1e-3)
    to roundoff.  Only the normal part enters a curvature, so the missing
    tangential acceleration does not matter.
    """
    fam = family or curve.family
    if len(curve) < 3:
        curve.kappa_actual = np.full(len(curve), np.nan)
        curve.kappa_target = np.full(len(curve), np.nan)
        return curve
    du, _ = fd_derivatives(curve.t, curve.u)
    dv, _ = fd_derivatives(curve.t, curve.v)
    dth, _ = fd_derivatives(curve.t, np.unwrap(curve.theta))
    ddu, ddv = -dv * dth, du * dth
    curve.kappa_actual = realized_curvature(fam.space, curve.u, curve.v, du, dv, ddu, ddv)
    curve.kappa_target = target_curvature_array(fam.kind, fam.alpha, curve.u, curve.v,
                                                np.cos(curve.theta), np.sin(curve.theta))
    return curve


# ----------------------------------------------------------------------------
# integrator

def rk4_step(rhs, u: float, v: float, th: float, h: float) -> tuple[float, float, float]:
    """One classical RK4 step of (u, v, theta)' = (cos theta, sin theta, rhs)."""
    c1, s1 = math.cos(th), math.sin(th)
    k1 = rhs(u, v, th)
    th2 = th + 0.5 * h * k1
    c2, s2 = math.cos(th2), math.sin(th2)
    k2 = rhs(u + 0.5 * h * c1, v + 0.5 * h * s1, th2)
    th3 = th + 0.5 * h * k2
    c3, s3 = math.cos(th3), math.sin(th3)
    k3 = rhs(u + 0.5 * h * c2, v + 0.5 * h * s2, th3)
    th4 = th + h * k3
    c4, s4 = math.cos(th4), math.sin(th4)
    k4 = rhs(u + h * c3, v + h * s3, th4)
    return (u + h / 6 * (c1 + 2 * c2 + 2 * c3 + c4),
            v + h / 6 * (s1 + 2 * s2 + 2 * s3 + s4),
            th + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4))


def make_rhs(family: FamilySpec, eps_d: float = geo.EPS_D, eps_pole: float = geo.EPS_POLE):
    kind, alpha, c = family.kind, family.alpha, family.paper_c

    def rhs(u, v, th):
        return _theta_rhs(kind, alpha, c, u, v, math.cos(th), math.sin(th), eps_d, eps_pole)

    return rhs


def check_initial(family: FamilySpec, initial: CurveState, cfg: IntegratorConfig) -> None:
    reason = geo.guard(family.kind, family.alpha, initial.u, initial.v, 2 * cfg.eps_d, 2 * cfg.eps_pole)
    if reason is not None or not math.isfinite(initial.theta):
        raise InputError(f"initial state {initial} is not admissible for {family.kind} ({reason})")


def _stop_reason_after_failure(family: FamilySpec, u, v, th, h, cfg) -> str:
    ue, ve = u + h * math.cos(th), v + h * math.sin(th)
    reason = geo.guard(family.kind, family.alpha, ue, ve, cfg.eps_d, cfg.eps_pole)
    return reason or "domain-guard"


def integrate(family: FamilySpec, initial: CurveState, cfg: IntegratorConfig | None = None) -> SampledCurve:
    """Fixed-step RK4 on u' = cos theta, v' = sin theta, theta' = theta_rhs.

    Stops when the arc-length budget is spent or when the next state would
    leave the family's admissible region; the reason is recorded, not raised.
    """
    cfg = cfg or IntegratorConfig()
    check_initial(family, initial, cfg)
    rhs = make_rhs(family, cfg.eps_d, cfg.eps_pole)
    h = cfg.h
    n_steps = int(math.floor(cfg.max_length / h + 1e-9))
    us, vs, ths = [initial.u], [initial.v], [initial.theta]
    u, v, th = initial.u, initial.v, initial.theta
    stop = "length-exhausted"
    for _ in range(n_steps):
        try:
            un, vn, thn = rk4_step(rhs, u, v, th, h)
        except DomainError:
            stop = _stop_reason_after_failure(family, u, v, th, h, cfg)
            break
        except (ZeroDivisionError, OverflowError, ValueError):
            stop = "numeric-failure"
            break
        if not (math.isfinite(un) and math.isfinite(vn) and math.isfinite(thn)):
            stop = "numeric-failure"
            break
        reason = geo.guard(family.kind, family.alpha, un, vn, cfg.eps_d, cfg.eps_pole)
        if reason is not None:
            stop = reason
            break
        u, v, th = un, vn, thn
        us.append(u)
        vs.append(v)
        ths.append(th)
    t = h * np.arange(len(us))
    curve = SampledCurve(family, t, np.array(us), np.array(vs), np.array(ths), stop, h)
    if family.paper_c is not None:
        c0 = first_integral(family, initial)
        if abs(c0 - family.paper_c) > 1e-9:
            curve.warnings.append(
                f"fixed constant c={family.paper_c:.17g} differs from the first integral "
                f"{c0:.17g} of the initial state")
    return attach_curvature(curve)


# ----------------------------------------------------------------------------
# interpolation and resampling

def hermite_splines(curve: SampledCurve) -> tuple[CubicHermiteSpline, CubicHermiteSpline]:
    """C^1 interpolants of u(t), v(t) using the sampled headings as slopes."""
    if curve.parametrization != "chart":
        raise InputError("hermite interpolation needs a chart arc-length parametrization")
    return (CubicHermiteSpline(curve.t, curve.u, np.cos(curve.theta)),
            CubicHermiteSpline(curve.t, curve.v, np.sin(curve.theta)))


def metric_speed(space: str, u, v, theta):
    """Metric length per unit chart arc length."""
    if space == "sphere":
        return np.sqrt(np.cos(theta) ** 2 + (np.sin(theta) * np.cos(u)) ** 2)
    if space == "half-plane":
        return 1.0 / np.asarray(v, float)
    return np.ones_like(np.asarray(u, float))


def resample_metric_arclength(curve: SampledCurve, n: int | None = None) -> SampledCurve:
    """Resample at equal spacing in the space-form metric.

    The returned curve carries ``metric_length`` and is parametrized by
    metric arc length.
    """
    if len(curve) == 0:
        raise InputError("empty curve")
    n = n or len(curve)
    speed = metric_speed(curve.family.space, curve.u, curve.v, curve.theta)
    if len(curve) >= 3:
        s = cumulative_simpson(speed, x=curve.t, initial=0.0)
    else:
        s = np.concatenate([[0.0], np.cumsum(0.5 * (speed[1:] + speed[:-1]) * np.diff(curve.t))])
    total = float(s[-1])
    s_new = np.linspace(0.0, total, n)
    t_new = np.interp(s_new, s, curve.t)
    if len(curve) >= 2 and curve.parametrization == "chart":
        su, sv = hermite_splines(curve)
        u_new, v_new = su(t_new), sv(t_new)
    else:
        u_new, v_new = np.interp(t_new, curve.t, curve.u), np.interp(t_new, curve.t, curve.v)
    th_new = np.interp(t_new, curve.t, curve.theta)
    out = SampledCurve(curve.family, s_new, u_new, v_new, th_new, curve.stop_reason,
                       total / (n - 1) if n > 1 else None, parametrization="metric",
                       metric_length=total)
    out.warnings = list(curve.warnings)
    return out
