"""Domain boundary from the support function and the orbit criticality check.

With t = phi(z, w) on the invariant circle w = conj(z), the orbit of the
billiard is t_k = phi(B^k(z, w)) + (2k+1) pi omega where
B(z, w) = (e^{i b(zw)} z, e^{-i b(zw)} w).  Each bounce must be critical for
the generating function S(t, t') = q((t+t')/2) sin((t'-t)/2).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from flint import acb, arb

from .errors import ConfigurationError
from .series import UniSeries, mag, to_complex, workprec
from .solver import GtpSolution

VALIDATED_Z = 0.1      # residual scaling was checked for |z| up to this


@dataclass
class OrbitPoint:
    z: complex
    times: tuple          # (t_{-1}, t_0, t_1) as floats
    residual: float


@dataclass
class OrbitReport:
    order: int
    points: list
    slopes: list = field(default_factory=list)
    warnings: list = field(default_factory=list)


def truncated_q(sol: GtpSolution, N: int) -> UniSeries:
    """q_0 + ... + q_{N+1} t^{N+1} (the coefficients fixed by orders <= N)."""
    with workprec(sol.params.precision):
        vals = [sol.q(k) for k in range(N + 2)]
        return UniSeries(tuple(vals), sol.params.precision)


def _shifts(rotation) -> arb:
    om = Fraction(rotation)
    return arb.pi() * om.numerator / om.denominator


def _raw_times(sol: GtpSolution, z, N: int) -> tuple:
    # phi at B^{-1}, identity, B applied to (z, conj z), without the pi omega shifts
    P = sol.params
    z = acb(z)
    w = z.conjugate()
    phi = sol.phi.truncate(N)
    b = P.b

    def B(z, w, s):
        e = (acb(0, 1) * s * b(z * w)).exp()
        return z * e, w / e

    zm, wm = B(z, w, -1)
    zp, wp = B(z, w, 1)
    return phi(zm, wm), phi(z, w), phi(zp, wp)


def orbit_times(sol: GtpSolution, z, N: int | None = None) -> tuple:
    """(t_{-1}, t_0, t_1) for w = conj(z)."""
    N = sol.order if N is None else N
    with workprec(sol.params.precision):
        tm, t, tp = _raw_times(sol, z, N)
        pw = _shifts(sol.params.rotation)
        return tm - pw, t + pw, tp + 3 * pw


def orbit_residual(sol: GtpSolution, z, N: int | None = None) -> acb:
    """S_2(t_{-1}, t_0) + S_1(t_0, t_1) with q and phi truncated at order N.

    The midpoint (t_0 + t_1)/2 exceeds its unshifted value by 2 pi omega, a
    multiple of the period of q, so both midpoints are evaluated next to 0.
    """
    P = sol.params
    N = sol.order if N is None else N
    if N > sol.order:
        raise ConfigurationError(f"truncation order {N} exceeds solution order {sol.order}")
    with workprec(P.precision):
        tm, t, tp = _raw_times(sol, z, N)
        pw = _shifts(P.rotation)
        q = truncated_q(sol, N)
        dq = q.derivative()

        def parts(t, tt):
            m = (t + tt) / 2
            d = (tt - t) / 2 + pw
            return dq(m) / 2 * d.sin(), q(m) / 2 * d.cos()

        a2, b2 = parts(tm, t)       # dS/dt' = q'/2 sin + q/2 cos
        a1, b1 = parts(t, tp)       # dS/dt  = q'/2 sin - q/2 cos
        return a2 + b2 + a1 - b1


def orbit_report(sol: GtpSolution, zs, N: int | None = None) -> OrbitReport:
    N = sol.order if N is None else N
    rep = OrbitReport(N, [])
    for z in zs:
        z = complex(z)
        if abs(z) > VALIDATED_Z:
            rep.warnings.append(f"|z| = {abs(z):g} is outside the validated range |z| <= {VALIDATED_Z}")
        r = orbit_residual(sol, z, N)
        ts = tuple(to_complex(t).real for t in orbit_times(sol, z, N))
        rep.points.append(OrbitPoint(z, ts, mag(r)))
    pts = [p for p in rep.points if p.residual > 0 and abs(p.z) > 0]
    for p1, p2 in zip(pts, pts[1:]):
        if abs(p1.z) != abs(p2.z):
            rep.slopes.append(math.log(p1.residual / p2.residual) / math.log(abs(p1.z) / abs(p2.z)))
    return rep


@dataclass
class Boundary:
    t: np.ndarray
    points: np.ndarray        # (copies * samples, 2)
    copies: int
    curvature_radius: np.ndarray
    convex: bool


def boundary_points(sol: GtpSolution, N: int | None = None, samples: int = 400,
                    t_range: tuple | None = None) -> Boundary:
    """gamma(t) = q(t) u(t) + q'(t) u'(t) on one period, replicated q~ times by rotation."""
    P = sol.params
    N = sol.order if N is None else N
    qd = Fraction(P.rotation).denominator
    if t_range is None:
        t_range = (-math.pi / qd, math.pi / qd)
    if samples < 2:
        raise ConfigurationError("samples >= 2")
    ts = np.linspace(t_range[0], t_range[1], samples)
    with workprec(P.precision):
        q = truncated_q(sol, N)
        dq = q.derivative()
        d2q = dq.derivative()
        qv = np.array([to_complex(q(acb(t))).real for t in ts])
        dqv = np.array([to_complex(dq(acb(t))).real for t in ts])
        rad = qv + np.array([to_complex(d2q(acb(t))).real for t in ts])
    x = qv * np.cos(ts) - dqv * np.sin(ts)
    y = qv * np.sin(ts) + dqv * np.cos(ts)
    pts = []
    for k in range(qd):
        a = 2 * math.pi * k / qd
        c, s = math.cos(a), math.sin(a)
        pts.append(np.stack([c * x - s * y, s * x + c * y], axis=1))
    return Boundary(ts, np.concatenate(pts), qd, rad, bool(np.all(rad > 0)))
