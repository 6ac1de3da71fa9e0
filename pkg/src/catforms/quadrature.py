"""Catenaries as graphs, built by integrating the first integrals.

sphere:     v(u) = c * int du / (cos u * sqrt(u^(2a) cos^2 u - c^2))
horocycle:  u(v) = int c t dt / sqrt((log t)^(2a) - c^2 t^2)

Both integrands blow up like an inverse square root where the radicand
vanishes (the turning points of the curve).  The independent variable is
substituted by x = a + (b - a)(1 - cos phi)/2, which makes the integrand
bounded on [0, pi]; its endpoint values are the analytic limits.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.optimize import brentq

from . import geometry as geo
from .errors import InputError, QuadratureError, UnsupportedFamily
from .flow import SampledCurve
from .geometry import FamilySpec

EPS_RAD = 1e-12
TAYLOR_SWITCH = 1e-6


def adaptive_simpson(f, a: float, b: float, tol: float = 1e-10, max_depth: int = 50) -> float:
    """Adaptive Simpson rule with interval halving and Richardson correction."""
    fa, fm, fb = f(a), f(0.5 * (a + b)), f(b)
    whole = (b - a) / 6 * (fa + 4 * fm + fb)
    total = 0.0
    stack = [(a, b, fa, fm, fb, whole, tol, 0)]
    while stack:
        a0, b0, fa0, fm0, fb0, s0, tol0, depth = stack.pop()
        m0 = 0.5 * (a0 + b0)
        fl, fr = f(0.5 * (a0 + m0)), f(0.5 * (m0 + b0))
        left = (m0 - a0) / 6 * (fa0 + 4 * fl + fm0)
        right = (b0 - m0) / 6 * (fm0 + 4 * fr + fb0)
        err = left + right - s0
        if abs(err) <= 15 * tol0:
            total += left + right + err / 15
        elif depth >= max_depth:
            raise QuadratureError(f"adaptive Simpson did not converge on [{a0}, {b0}]")
        else:
            stack.append((a0, m0, fa0, fl, fm0, left, 0.5 * tol0, depth + 1))
            stack.append((m0, b0, fm0, fr, fb0, right, 0.5 * tol0, depth + 1))
    return total


def _problem(family: FamilySpec, c: float):
    """Return (numerator g, radicand R, dR/dx, domain) for the graph integral."""
    a = family.alpha
    if family.kind == geo.SPHERE:
        def g(x):
            return c / math.cos(x)

        def rad(x):
            return x ** (2 * a) * math.cos(x) ** 2 - c * c

        def drad(x):
            return 2 * a * x ** (2 * a - 1) * math.cos(x) ** 2 - 2 * x ** (2 * a) * math.cos(x) * math.sin(x)

        return g, rad, drad, (0.0, math.pi / 2)
    if family.kind == geo.HOROCYCLE:
        def g(x):
            return c * x

        def rad(x):
            return math.log(x) ** (2 * a) - c * c * x * x

        def drad(x):
            return 2 * a * math.log(x) ** (2 * a - 1) / x - 2 * c * c * x

        return g, rad, drad, (1.0, math.inf)
    raise UnsupportedFamily(f"no quadrature form for {family.kind}")


def admissible_interval(family: FamilySpec, c: float) -> tuple[float, float]:
    """Range of the independent variable on which the radicand is non-negative.

    Requires alpha > 0, where u^a cos u (resp. (log t)^a / t) is unimodal.
    """
    if not family.alpha > 0:
        raise InputError("admissible interval needs alpha > 0")
    if not c > 0:
        raise InputError("first-integral constant must be positive")
    a = family.alpha
    if family.kind == geo.SPHERE:
        peak = brentq(lambda x: a * math.cos(x) - x * math.sin(x), 1e-12, math.pi / 2)
        prof = lambda x: x ** a * math.cos(x) - c  # noqa: E731
        lo_end, hi_end = 1e-300, math.pi / 2
    elif family.kind == geo.HOROCYCLE:
        peak = math.exp(a)
        prof = lambda x: math.log(x) ** a / x - c  # noqa: E731
        lo_end, hi_end = 1.0, peak
        while prof(hi_end) > 0:
            hi_end *= 2
    else:
        raise UnsupportedFamily(f"no quadrature form for {family.kind}")
    if prof(peak) <= 0:
        raise QuadratureError(f"c = {c} exceeds the maximum {prof(peak) + c} of the first integral")
    # the profile is -c at both chart ends, so both brackets are valid
    lo = brentq(prof, lo_end, peak, xtol=1e-15, rtol=1e-15)
    hi = brentq(prof, peak, hi_end, xtol=1e-15, rtol=1e-15)
    return lo, hi


def graph_by_quadrature(family: FamilySpec, c: float, range_: tuple[float, float] | None = None,
                        n: int = 201, tol: float = 1e-10, eps_rad: float = EPS_RAD) -> SampledCurve:
    """Sample the catenary with first integral ``c`` as a graph.

    sphere: samples (u, v(u)) with v = 0 at the lower end of ``range_``;
    horocycle: samples (u(v), v) with u = 0 at the lower end.  ``range_``
    defaults to the full admissible interval between two turning points.
    An end of the range counts as a turning point when |radicand| <= eps_rad.
    """
    g, rad, drad, (dom_lo, dom_hi) = _problem(family, c)
    lo, hi = range_ if range_ is not None else admissible_interval(family, c)
    if not (dom_lo < lo < hi < dom_hi):
        raise InputError(f"range ({lo}, {hi}) outside the chart domain")
    if n < 2:
        raise InputError("need at least two samples")
    half = 0.5 * (hi - lo)

    probe = np.linspace(lo, hi, 257)[1:-1]
    vals = np.array([rad(x) for x in probe])
    if np.all(vals <= 0):
        raise QuadratureError("radicand is non-positive on the whole range")
    if np.any(vals <= 0):
        raise QuadratureError("radicand changes sign inside the range; split it at the turning points")

    # Near a turning point the radicand is evaluated from its Taylor
    # expansion, R = delta (R' + R'' delta / 2): computing R(x) directly
    # cancels to noise of order eps / R, which adaptive Simpson can't
    # resolve.  With x - lo = 2 half sin^2(phi/2) the inverse square root
    # then simplifies to a bounded expression.
    ends = []
    for x, sign in ((lo, 1.0), (hi, -1.0)):
        if abs(rad(x)) > eps_rad:
            ends.append(None)
            continue
        slope = sign * drad(x)
        if not slope > 0:
            raise QuadratureError(f"radicand has a multiple root at {x}; integral diverges")
        step = 1e-6 * (hi - lo)
        curv = sign * (drad(x + sign * step) - drad(x)) / step
        ends.append((slope, curv))
    root2h = math.sqrt(2 * half)

    def near_end(k, delta):
        slope, curv = ends[k]
        return delta * slope < TAYLOR_SWITCH and slope + 0.5 * curv * delta > 0

    def integrand(phi):
        sh, ch = math.sin(0.5 * phi), math.cos(0.5 * phi)
        if phi <= 0.5 * math.pi:
            delta = 2 * half * sh * sh
            x = lo + delta
            if ends[0] is not None and near_end(0, delta):
                slope, curv = ends[0]
                return g(x) * root2h * ch / math.sqrt(slope + 0.5 * curv * delta)
        else:
            delta = 2 * half * ch * ch
            x = hi - delta
            if ends[1] is not None and near_end(1, delta):
                slope, curv = ends[1]
                return g(x) * root2h * sh / math.sqrt(slope + 0.5 * curv * delta)
        r = rad(x)
        if not r > 0:
            raise QuadratureError(f"radicand vanishes inside the range at {x}")
        return g(x) / math.sqrt(r) * half * math.sin(phi)

    phis = np.linspace(0.0, math.pi, n)
    xs = lo + half * (1 - np.cos(phis))
    ys = np.zeros(n)
    for k in range(n - 1):
        ys[k + 1] = ys[k] + adaptive_simpson(integrand, phis[k], phis[k + 1], tol / (n - 1))

    r = np.array([max(rad(x), 0.0) for x in xs])
    gx = np.array([g(x) for x in xs])
    if family.kind == geo.SPHERE:
        u, v = xs, ys
        theta = np.arctan2(np.full(n, c), np.cos(xs) * np.sqrt(r))  # direction (cos u sqrt R, c)
    else:
        u, v = ys, xs
        theta = np.arctan2(np.sqrt(r), gx)  # direction (c t, sqrt R)
    t = np.concatenate([[0.0], np.cumsum(np.hypot(np.diff(u), np.diff(v)))])
    return SampledCurve(family, t, u, v, theta, "length-exhausted", None)
