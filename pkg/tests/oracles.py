"""Independent reference computations used by the tests.

Nothing here calls the online solver engine: each oracle evaluates a
quantity by a different route (direct composition of the unsymmetrized
equation, closed forms, or mpmath special functions).
"""
from __future__ import annotations

import math

import mpmath
from flint import acb

from gtplab.series import BiSeries, UniSeries, compose_bi_into_uni, cos_offset_coeffs, workprec


def maineq_direct(sol, N: int | None = None) -> BiSeries:
    """Unsymmetrized criticality equation for constant b, by full composition.

    With t = phi(z, w) and t_pm = phi(lam^{pm1} z, lam^{mp1} w) the series

        sum_{s=+-1} q'((t+t_s)/2) cos((t_s-t)/2 - s alpha) + s q((t+t_s)/2) sin(...)

    (written through derivatives of cos(x - alpha)) must vanish identically.
    """
    P = sol.params
    N = sol.order if N is None else N
    prec = P.precision
    if any(not P.b[i].is_zero() for i in range(1, P.b.order + 1)):
        raise ValueError("maineq_direct needs constant b")
    with workprec(prec):
        lam = P.lam
        phi = sol.phi.truncate(N)

        def twist(s):
            return BiSeries.from_dict({(j, k): v * s ** j * (1 / s) ** k for (j, k), v in phi.items()}, N, prec)

        t, tp, tm = phi, twist(lam), twist(1 / lam)
        qv = [sol.q(k) for k in range(N + 2)]
        qs = UniSeries(tuple(qv[: N + 1]), prec)
        dq = UniSeries(tuple(qv[k + 1] * (k + 1) for k in range(N + 1)), prec)
        c1 = cos_offset_coeffs(P.alpha, N + 1, prec)
        c = c1.truncate(N)
        dc = c1.derivative()
        h = acb(1) / 2

        def term(a, b, sgn):
            return (compose_bi_into_uni(dq, a) * compose_bi_into_uni(c, b)
                    + (compose_bi_into_uni(qs, a) * compose_bi_into_uni(dc, b)).scale(sgn))

        return term((tm + t).scale(h), (t - tm).scale(h), 1) + term((tp + t).scale(h), (tp - t).scale(h), -1)


def symmetry_gauge_phi(phi: BiSeries, c_coeffs: dict) -> BiSeries:
    """phi o h with h(z, w) = (z e^{c(zw)}, w e^{-c(zw)}), c(r) = sum c_m r^m.

    h commutes with the normal form, so phi o h solves the same equation
    with the same q; only the |j-k| = 1 entries and the d-diagonals shift.
    The c_m must be purely imaginary so that h keeps w = conj(z).
    """
    N = phi.order
    with workprec(phi.prec):
        # e^{d c(r)} as a series in r up to N//2
        L = N // 2 + 1
        out = {}
        for (j, k), v in phi.items():
            if v.is_zero():
                continue
            d = j - k
            e = _exp_series([acb(0)] + [d * acb(c_coeffs.get(m, 0)) for m in range(1, L + 1)], L)
            for l, el in enumerate(e):
                if j + k + 2 * l > N:
                    break
                out[(j + l, k + l)] = out.get((j + l, k + l), acb(0)) + v * el
        return BiSeries.from_dict(out, N, phi.prec)


def _exp_series(x, L):
    e = [acb(1)]
    for n in range(1, L + 1):
        s = acb(0)
        for k in range(1, n + 1):
            if k < len(x):
                s += k * x[k] * e[n - k]
        e.append(s / n)
    return e


def q2_closed(b0: float, dps: int = 60):
    """q2 = tan^2(b0/2)/2."""
    with mpmath.workdps(dps):
        return mpmath.tan(mpmath.mpf(b0) / 2) ** 2 / 2


def catalan_reversion(n: int) -> int:
    """Coefficient of x^n in the inverse of x + x^2: (-1)^{n-1} C_{n-1}."""
    m = n - 1
    return (-1) ** m * math.comb(2 * m, m) // (m + 1)


def cubic_reversion(k: int) -> tuple:
    """Coefficient of x^{2k+1} in the inverse of x + x^3: (-1)^k binom(3k,k)/(2k+1)."""
    return (-1) ** k * math.comb(3 * k, k), 2 * k + 1


def tanh_bernoulli(K: int, dps: int = 40) -> list:
    """z^{2m-1} coefficients of tanh: 2^{2m}(2^{2m}-1) B_{2m}/(2m)!."""
    with mpmath.workdps(dps):
        return [mpmath.mpf(2) ** (2 * m) * (mpmath.mpf(2) ** (2 * m) - 1) * mpmath.bernoulli(2 * m)
                / mpmath.factorial(2 * m) for m in range(1, K + 1)]


def sech_taylor(N: int, dps: int = 50) -> list:
    """t^{2j} coefficients of sech via mpmath's numerical Taylor expansion."""
    with mpmath.workdps(dps + 20):
        c = mpmath.taylor(mpmath.sech, 0, 2 * N)
        return [c[2 * j] for j in range(N + 1)]


# full contributing-tree counts computed once by dynamic programming over
# depth-one trees and frozen here
TREE_COUNTS = {
    ("circle", 0, 2): 5,
    ("box", None, 2): 1,
    ("box", None, 4): 54,
    ("circle", 0, 4): 1179,
    ("circle", 3, 5): 52265,
    ("box", None, 6): 28210,
}
# depth-one circle trees keyed by (label, order)
DEPTH_ONE_CIRCLE = {(0, 2): 5, (3, 3): 11, (0, 4): 62, (3, 5): 124, (0, 6): 518, (3, 7): 1066,
                    (0, 8): 3926, (3, 9): 8336, (2, 2): 4, (4, 4): 26, (-2, 6): 450}
