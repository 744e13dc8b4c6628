"""Principal recurrence: R coefficients, rescaling, closed-form solutions,
the Taylor recurrence operator T, its cone, forced iteration, Gevrey fits
and the small-denominator grid."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import numpy as np
from flint import acb, arb

from .errors import ConfigurationError, DegenerateError, DomainError
from .series import mag, workprec
from .solver import ProblemParams, key_combination, quadratic_phi_closed_form


@dataclass
class RecurrenceCoeffs:
    sigma: int
    j: int
    value_exact: acb | None
    value_hat: acb


def _comb(n, k):
    return math.comb(n, k) if 0 <= k <= n else 0


def recurrence_R_exact(sigma: int, j: int, params: ProblemParams, phi_quadratic=None) -> acb:
    """Total root multiplier of principal trees with 2*sigma order-two circle children."""
    if sigma < 1 or j - 2 * sigma <= 0:
        raise DomainError(f"R_exact needs j - 2 sigma > 0 (sigma={sigma}, j={j})")
    with workprec(params.precision):
        if phi_quadratic is None:
            phi_quadratic = quadratic_phi_closed_form(params)
        p20, p11, p02 = phi_quadratic
        cb = params.b0.cos()
        a, c = p20 * cb, p02 * cb
        s2 = 2 * sigma
        tot = acb(0)
        for u in range(s2 + 1):
            for w in range(s2 + 1 - u):
                v = s2 - u - w
                bn = _comb(2 * j - 4 * sigma - 1, j - 2 * sigma - u + w)
                if not bn:
                    continue
                tot += a ** u * p11 ** v * c ** w * bn / (math.factorial(u) * math.factorial(v) * math.factorial(w))
        pre = Fraction(math.factorial(s2) * (j - sigma) * _comb(2 * j - 2 * sigma - 1, s2),
                       j * _comb(2 * j - 1, j))
        ct = (params.b0 / 2).cos()
        return -acb(pre.numerator) / pre.denominator * ct ** (-4 * sigma) * tot


def recurrence_R_hat(sigma: int, j: int, params: ProblemParams, K: acb | None = None) -> acb:
    """Asymptotic form -(2j)!/((2j-2s)! 2^{4s}) cos(b0/2)^{-4s} K^{2s}/(2s)!."""
    if sigma < 1:
        raise DomainError("sigma >= 1")
    with workprec(params.precision):
        K = key_combination(params) if K is None else K
        ff = math.perm(2 * j, 2 * sigma) if 2 * j >= 2 * sigma else 0
        ct = (params.b0 / 2).cos()
        return -acb(ff) / 2 ** (4 * sigma) * ct ** (-4 * sigma) * K ** (2 * sigma) / math.factorial(2 * sigma)


def scale_factor(j: int, params: ProblemParams, K: acb | None = None) -> acb:
    """S_j = j! K^j / (cos^{2j}(b0/2) 2^{2j})."""
    with workprec(params.precision):
        K = key_combination(params) if K is None else K
        if mag(K) < 2.0 ** (-params.precision / 2):
            raise DegenerateError("key combination vanishes (q3 = 0 or b0 at its zero angle)")
        ct = (params.b0 / 2).cos()
        return acb(math.factorial(j)) * K ** j / (ct ** (2 * j) * 4 ** j)


@dataclass
class ScaledState:
    q_hat: list
    q_breve: list
    q_vec: list
    S: list


def scaled_state(q_hat: list, params: ProblemParams, K: acb | None = None) -> ScaledState:
    """q_hat[j] holds the coefficient of t^{2j}; returns breve coordinates and the vectors q_{n,j}."""
    with workprec(params.precision):
        K = key_combination(params) if K is None else K
        S = [scale_factor(2 * j, params, K) for j in range(len(q_hat))]
        qb = [acb(q) / s for q, s in zip(q_hat, S)]
        vec = [[qb[n - j] / math.factorial(j) for j in range(n + 1)] for n in range(len(qb))]
        return ScaledState(list(q_hat), qb, vec, S)


def solve_reduced(N: int, dps: int = 50) -> list:
    """breve q_{2j}, j = 0..N: q0 = 1, sum_{s=0}^{j} q_{2j-2s}/(2s)! = 0 (Maclaurin coefficients of sech)."""
    if N < 1:
        raise ConfigurationError("N >= 1")
    with mpmath.workdps(dps + _guard(N)):
        q = [mpmath.mpf(1)]
        for j in range(1, N + 1):
            q.append(-mpmath.fsum(q[j - s] / mpmath.factorial(2 * s) for s in range(1, j + 1)))
    with mpmath.workdps(dps):
        return [+x for x in q]


def solve_degenerate(N: int, dps: int = 50) -> list:
    """q_{2j} = -sum_{s>=1} q_{2j-2s}/s! (coefficients of exp(-t^2))."""
    if N < 1:
        raise ConfigurationError("N >= 1")
    with mpmath.workdps(dps + _guard(N)):
        q = [mpmath.mpf(1)]
        for j in range(1, N + 1):
            q.append(-mpmath.fsum(q[j - s] / mpmath.factorial(s) for s in range(1, j + 1)))
    with mpmath.workdps(dps):
        return [+x for x in q]


def _guard(N: int) -> int:
    # the alternating sums cancel about N log10(2) digits
    return int(0.31 * N) + 10


def sech_coefficients(N: int, dps: int = 50) -> list:
    """E_{2j}/(2j)! from mpmath's Euler numbers (independent of the recurrence)."""
    with mpmath.workdps(dps):
        return [mpmath.eulernum(2 * j) / mpmath.factorial(2 * j) for j in range(N + 1)]


# ---------------------------------------------------------------------------
# operator T

@dataclass
class OperatorT:
    dim: int
    matrix: np.ndarray

    def row0(self):
        return self.matrix[0]


def _row0_exact(M: int, dps: int):
    with mpmath.workdps(dps):
        return [-mpmath.factorial(j) / mpmath.factorial(2 * j + 2) for j in range(M)]


def operator_T(M: int) -> OperatorT:
    if M < 8:
        raise ConfigurationError("truncation M >= 8")
    A = np.zeros((M, M))
    for j in range(M):
        A[0, j] = -math.exp(math.lgamma(j + 1) - math.lgamma(2 * j + 3))
    for k in range(1, M):
        A[k, k - 1] = 1.0 / k
    return OperatorT(M, A)


def apply_T(x: list, dps: int = 50) -> list:
    """Structured application of the truncated T in mpmath."""
    M = len(x)
    with mpmath.workdps(dps):
        r0 = _row0_exact(M, dps)
        y0 = mpmath.fsum(r * xi for r, xi in zip(r0, x))
        return [y0] + [x[k - 1] / k for k in range(1, M)]


def _char(lam, M):
    # truncated eigen-equation: lam + sum_{j<M} lam^{-j} / (2j+2)! = 0
    return lam + mpmath.fsum(lam ** (-j) / mpmath.factorial(2 * j + 2) for j in range(M))


def spectrum(M: int = 200, refine: int = 4, dps: int = 40) -> list:
    """Eigenvalues of the truncation sorted by decreasing magnitude.

    All eigenvalues come from a dense float solve; the leading ``refine``
    are polished by Newton on the truncated characteristic equation.
    """
    T = operator_T(M)
    ev = np.linalg.eigvals(T.matrix)
    ev = sorted(ev, key=lambda z: -abs(z))
    out = [complex(z) for z in ev]
    with mpmath.workdps(dps):
        for i in range(min(refine, len(out))):
            z0 = mpmath.mpf(out[i].real) if abs(out[i].imag) < 1e-12 else mpmath.mpc(out[i])
            try:
                z = mpmath.findroot(lambda t: _char(t, M), z0)
            except (ValueError, ZeroDivisionError):
                continue
            out[i] = z
    return out


def exact_eigenvalue(m: int) -> float:
    return -4.0 / ((2 * m + 1) ** 2 * math.pi ** 2)


def leading_eigenvector(M: int = 200, dps: int = 40, iters: int = 6, shift=None) -> tuple:
    """(lambda, x) for the leading eigenpair by structured inverse iteration in mpmath; x0 = 1."""
    with mpmath.workdps(dps):
        mu = mpmath.mpf(shift) if shift is not None else spectrum(M, refine=1, dps=dps)[0]
        mu = mpmath.re(mu) + mpmath.mpf(10) ** (-dps // 2)
        r0 = _row0_exact(M, dps)
        x = [mpmath.mpf(1)] + [mpmath.mpf(0)] * (M - 1)
        for _ in range(iters):
            # solve (T - mu) y = x: y_k = (y_{k-1}/k - x_k)/mu for k >= 1, y linear in y0
            a = [mpmath.mpf(1)]
            b = [mpmath.mpf(0)]
            for k in range(1, M):
                a.append(a[k - 1] / k / mu)
                b.append((b[k - 1] / k - x[k]) / mu)
            # row 0: sum r0_j y_j - mu y0 = x0
            ca = mpmath.fsum(r * ai for r, ai in zip(r0, a)) - mu
            cb = mpmath.fsum(r * bi for r, bi in zip(r0, b))
            y0 = (x[0] - cb) / ca
            y = [y0 * ai + bi for ai, bi in zip(a, b)]
            x = [yi / y[0] for yi in y]
        Tx = apply_T(x, dps)
        lam = Tx[0] / x[0]
        return lam, x


def left_eigenvector(M: int, lam, dps: int = 40) -> list:
    """u with u^T T = lam u^T (u0 = 1), by the backward recurrence u_j = (r0_j + u_{j+1}/(j+1))/lam."""
    with mpmath.workdps(dps):
        r0 = _row0_exact(M, dps)
        lam = mpmath.mpmathify(lam)
        u = [mpmath.mpf(0)] * (M + 1)
        for j in range(M - 1, -1, -1):
            u[j] = (r0[j] + u[j + 1] / (j + 1)) / lam
        return [t / u[0] for t in u[:M]]


def hilbert_schmidt_sq(M: int) -> float:
    T = operator_T(M)
    return float(np.sum(T.matrix ** 2))


# ---------------------------------------------------------------------------
# cone

@dataclass
class ConeReport:
    inside: bool
    margin: float
    ratios: list
    N2: int
    theta: float


class Cone:
    """L1 = leading eigenvector span, L2 = kernel of the left leading eigenvector (at truncation)."""

    def __init__(self, M: int = 200, theta: float = 1.0, N2: int | None = None, dps: int = 40):
        self.M = M
        self.theta = theta
        self.T = operator_T(M).matrix
        lam, v = leading_eigenvector(M, dps=dps)
        u = left_eigenvector(M, lam, dps=dps)
        self.lam = float(lam)
        v1 = np.array([float(t) for t in v])
        u1 = np.array([float(t) for t in u])
        self.v1 = v1 / np.linalg.norm(v1)
        self.u1 = u1 / np.linalg.norm(u1)
        cond = abs(self.u1 @ self.v1)
        if cond < 1e-8:
            warnings.warn(f"ill-conditioned L1/L2 split: |u.v| = {cond:.2e}")
        self.condition = 1.0 / cond
        self.P1 = np.outer(self.v1, self.u1) / (self.u1 @ self.v1)
        self.P2 = np.eye(M) - self.P1
        self.N2 = N2 if N2 is not None else self._choose_N2()

    def _choose_N2(self, max_n: int = 64) -> int:
        TL2 = self.P2 @ self.T @ self.P2
        P = np.eye(self.M)
        for n in range(1, max_n + 1):
            P = TL2 @ P
            if np.linalg.norm(P, 2) < math.pi ** (-2 * n):
                return n
        raise DomainError("no N2 found for the L2 contraction condition")

    def split(self, x):
        x = np.asarray(x, dtype=float)
        x1 = self.P1 @ x
        return x1, x - x1

    def ratio(self, x) -> float:
        x1, x2 = self.split(x)
        n2 = np.linalg.norm(x2)
        return math.inf if n2 == 0 else np.linalg.norm(x1) / n2

    def membership(self, x, theta: float | None = None) -> ConeReport:
        """Refined test: T^j x in the basic cone of aperture 2^{j/N2} theta for j < N2."""
        th = self.theta if theta is None else theta
        y = np.asarray(x, dtype=float)
        rs = []
        margin = math.inf
        for j in range(self.N2):
            r = self.ratio(y)
            rs.append(r)
            margin = min(margin, r / (2 ** (j / self.N2) * th))
            y = self.T @ y
            nrm = np.linalg.norm(y)
            if nrm > 0:
                y = y / nrm
        return ConeReport(margin > 1, margin, rs, self.N2, th)


def cone_membership(x, theta: float = 1.0, M: int | None = None, cone: Cone | None = None):
    """(inside, margin) for the refined cone test."""
    if cone is None:
        cone = Cone(M or len(x), theta)
    rep = cone.membership(_pad_vec(x, cone.M), theta)
    return rep.inside, rep.margin


def _pad_vec(x, M):
    v = np.zeros(M)
    xs = [float(t) for t in x][:M]
    v[:len(xs)] = xs
    return v


# ---------------------------------------------------------------------------
# forced iteration

@dataclass
class ForcedRun:
    vectors: list
    first: list
    inside: list = field(default_factory=list)
    margins: list = field(default_factory=list)


def forced_iteration(n0: int, C8=1, N: int = 20, M: int = 200, scale=1, dps: int = 40,
                     perturb: bool = False, seed: int = 0, cone: Cone | None = None) -> ForcedRun:
    """q_{n0} = 0, q_n = T q_{n-1} - scale^{-1} C8/(2n-2n0-1)! e0 for n0 < n <= n0+N.

    With ``perturb`` each step adds a random vector of norm n^{-4/5}|q_n| and
    the cone test is recorded.
    """
    rng = np.random.default_rng(seed)
    with mpmath.workdps(dps):
        f = mpmath.mpmathify(C8) / mpmath.mpmathify(scale)
        x = [mpmath.mpf(0)] * M
        vecs, first = [], []
        run = ForcedRun(vecs, first)
        for n in range(n0 + 1, n0 + N + 1):
            x = apply_T(x, dps)
            x[0] -= f / mpmath.factorial(2 * (n - n0) - 1)
            if perturb:
                nrm = mpmath.sqrt(mpmath.fsum(t * t for t in x))
                d = rng.standard_normal(M)
                d /= np.linalg.norm(d)
                eps = nrm * mpmath.mpf(n) ** (-0.8)
                x = [t + eps * float(di) for t, di in zip(x, d)]
            vecs.append(list(x))
            first.append(x[0])
            if cone is not None:
                nrm = mpmath.sqrt(mpmath.fsum(t * t for t in x))
                rep = cone.membership([float(t / nrm) for t in x]) if nrm else None
                run.inside.append(bool(rep and rep.inside))
                run.margins.append(rep.margin if rep else 0.0)
        return run


def tanh_coefficients(K: int, dps: int = 40) -> list:
    """Coefficients of z^{2m-1} in tanh z, m = 1..K."""
    with mpmath.workdps(dps):
        c = mpmath.taylor(mpmath.tanh, 0, 2 * K)
        return [c[2 * m - 1] for m in range(1, K + 1)]


# ---------------------------------------------------------------------------
# Gevrey fit

@dataclass
class GevreyFit:
    alpha: float
    beta: float
    gamma: float
    alpha_band: tuple
    n_range: tuple
    dropped: list
    residual: float


def gevrey_fit(coeffs: list, start: int = 1, windows: int = 3) -> GevreyFit:
    """Least squares log|c_n| = alpha log((2n)!) + beta 2n + gamma, c_n the t^{2n} coefficient.

    ``alpha_band`` is the range of alpha over trailing windows.
    """
    pts = []
    dropped = []
    for n, c in enumerate(coeffs):
        if n < start:
            continue
        m = abs(complex(c)) if not isinstance(c, acb) else None
        if isinstance(c, acb):
            lv = _log_abs_acb(c)
        else:
            lv = math.log(m) if m and math.isfinite(m) and m > 0 else None
            if lv is None and c != 0:
                lv = float(mpmath.log(abs(mpmath.mpmathify(c))))
        if lv is None or lv == -math.inf:
            dropped.append(n)
            continue
        pts.append((n, lv))
    if len(pts) < 20:
        raise ConfigurationError(f"gevrey_fit needs >= 20 nonzero coefficients, got {len(pts)}")

    def fit(sub):
        X = np.array([[math.lgamma(2 * n + 1), 2 * n, 1.0] for n, _ in sub])
        y = np.array([v for _, v in sub])
        sol, res, *_ = np.linalg.lstsq(X, y, rcond=None)
        r = float(np.sqrt(np.mean((X @ sol - y) ** 2)))
        return sol, r

    sol, r = fit(pts)
    band = []
    L = len(pts)
    for w in range(windows):
        sub = pts[L * w // (2 * windows):]
        if len(sub) >= 10:
            band.append(fit(sub)[0][0])
    band = band or [sol[0]]
    return GevreyFit(float(sol[0]), float(sol[1]), float(sol[2]), (float(min(band)), float(max(band))),
                     (pts[0][0], pts[-1][0]), dropped, r)


def _log_abs_acb(c: acb):
    if c.is_zero():
        return None
    a = abs(c)
    try:
        return float(a.log().mid())
    except Exception:
        return None


# ---------------------------------------------------------------------------
# small-denominator grid

@dataclass
class GridReport:
    b0: float
    N: int
    values: np.ndarray          # values[j, k] = |circle linear denominator|
    diag: dict                  # d -> |cos^2(d b0/2) - cos^2(b0/2)|
    pairs: list                 # (D, (D-1, D+1), min value)


def small_denominator_grid(b0, N: int, rotation=Fraction(1, 2), prec: int = 128,
                           exact_zero_tol: float | None = None) -> GridReport:
    """|cos(alpha)/cos^2(theta) (cos^2(d theta) - cos^2 theta)| on the (j,k) grid, theta = b0/2.

    Paired diagonals d = D -/+ 1 are flagged where |sin(D theta)| reaches a
    new record minimum (lambda^D closest to 1 so far).
    """
    if N > 200:
        raise ConfigurationError("grid limited to N <= 200")
    with workprec(prec):
        b = b0 if isinstance(b0, (acb, arb)) else _as_arb(b0)
        th = acb(b) / 2
        alpha = arb.pi() / 2 - arb.pi() * float(rotation) if not isinstance(rotation, Fraction) else \
            arb.pi() / 2 - arb.pi() * rotation.numerator / rotation.denominator
        ca = acb(alpha).cos()
        c2 = th.cos() ** 2
        diag = {}
        for d in range(-N, N + 1):
            v = (d * th).cos() ** 2 - c2
            diag[d] = 0.0 if v.contains(0) else mag(v)
        vals = np.zeros((N + 1, N + 1))
        scale = mag(ca / c2)
        for j in range(N + 1):
            for k in range(N + 1):
                vals[j, k] = scale * diag[j - k]
        pairs = []
        best = math.inf
        for D in range(3, N + 1):   # D = 2 would pair with the gauge diagonal d = 1
            s = (D * th).sin()
            m = 0.0 if s.contains(0) else mag(s)
            if m < best:
                best = m
                pairs.append((D, (D - 1, D + 1), min(diag[D - 1], diag.get(D + 1, math.inf))))
        return GridReport(float(mag(b)), N, vals, diag, pairs)


def _as_arb(x):
    if isinstance(x, str):
        return arb(x)
    if isinstance(x, Fraction):
        return arb(x.numerator) / x.denominator
    return arb(x)


def rational_b0(p: int, q: int, prec: int = 128) -> arb:
    """b0 = pi p/q as an exact-ball value."""
    with workprec(prec):
        return arb.pi() * p / q
