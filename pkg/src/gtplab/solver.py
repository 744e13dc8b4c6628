"""Order-by-order formal solution of the symmetrized criticality equation.

Unknowns are the even table coefficients q_{2n} and the conjugacy
coefficients phi_{j,k}.  The residual at z^j0 w^k0 (d0 = j0 - k0) is the
coefficient of

    cos(d0 b(zw)/2) q'(A) cos(B - alpha) + i sin(d0 b(zw)/2) q(A) sin(B - alpha)

with A = sum phi_jk z^j w^k cos((j-k) b(zw)/2) and
B = i sum phi_jk z^j w^k sin((j-k) b(zw)/2).

The engine keeps every intermediate series as homogeneous components and
extends them one total degree at a time, so the order-n residual is
available at O(n^2) polynomial products instead of a full recomposition.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Optional

from flint import acb, acb_poly, arb

from .errors import (ConfigurationError, ConsistencyError, DegenerateError, DomainError,
                     ResonanceError)
from .series import (BiSeries, UniSeries, check_precision, compose_bi_into_uni,
                     cos_offset_coeffs, default_precision, mag, to_acb, trig_multiple_series,
                     workprec)

log = logging.getLogger(__name__)

GOLDEN_B0 = "golden"


def golden_b0(prec: int) -> acb:
    """b0 = pi (sqrt5 - 1)/2."""
    with workprec(prec):
        return acb(arb.pi() * (arb(5).sqrt() - 1) / 2)


@dataclass(frozen=True)
class ProblemParams:
    """Input data: Birkhoff series b(r) = sum b_{2j} r^j, odd part of q, rotation number."""

    b: UniSeries
    q_odd: UniSeries
    rotation: Fraction = Fraction(1, 2)
    precision: int = 384
    max_order: int = 20
    resonance_threshold: Optional[float] = None

    def __post_init__(self):
        check_precision(self.precision)
        if self.b.prec != self.precision or self.q_odd.prec != self.precision:
            raise ConfigurationError("series precision differs from params.precision")
        if self.q_odd.parity != "odd":
            raise ConfigurationError("q_odd must have odd parity")
        if not self.q_odd[1].is_zero():
            raise DomainError("q_1 must vanish for the periodic orbit to exist")
        for c in self.b.coeffs:
            if mag(c.imag) > 0:
                raise DomainError("b coefficients must be real")
        r = Fraction(self.rotation)
        if not (0 < r <= Fraction(1, 2)):
            raise DomainError(f"rotation number must lie in (0, 1/2], got {r}")
        if self.max_order < 1:
            raise ConfigurationError("max_order must be >= 1")
        if mag(self.lam + 1) < 2.0 ** (-self.precision / 2):
            raise ResonanceError("lambda = -1 is excluded", magnitude=0.0)

    @classmethod
    def create(cls, b0="golden", b_higher=(), q_odd=None, rotation=Fraction(1, 2),
               precision: int | None = None, max_order: int = 20,
               resonance_threshold: float | None = None) -> "ProblemParams":
        """Convenience constructor. ``q_odd`` maps odd index -> value (default {3: 1})."""
        precision = default_precision() if precision is None else precision
        check_precision(precision)
        if q_odd is None:
            q_odd = {3: 1}
        with workprec(precision):
            b0v = golden_b0(precision) if b0 == GOLDEN_B0 else to_acb(b0)
            bvals = [b0v] + [to_acb(x) for x in b_higher]
            L = max_order + 2
            b = UniSeries.from_values(bvals, precision, order=max(L, len(bvals) - 1))
            qv = [0] * (L + 1)
            for k, v in dict(q_odd).items():
                k = int(k)
                if k % 2 == 0:
                    raise DomainError(f"q_odd index {k} is even")
                if k <= L:
                    qv[k] = v
            qs = UniSeries.from_values(qv, precision, parity="odd")
        return cls(b, qs, Fraction(rotation), precision, max_order, resonance_threshold)

    def with_order(self, N: int) -> "ProblemParams":
        L = N + 2
        return replace(self, max_order=N, b=self.b.truncate(max(L, self.b.order)),
                       q_odd=self.q_odd.truncate(max(L, self.q_odd.order)))

    # derived quantities --------------------------------------------------
    @property
    def b0(self) -> acb:
        return self.b[0]

    @property
    def lam(self) -> acb:
        with workprec(self.precision):
            return (acb(0, 1) * self.b0).exp()

    @property
    def alpha(self) -> acb:
        with workprec(self.precision):
            w = Fraction(self.rotation)
            return acb(arb.pi() / 2 - arb.pi() * arb(w.numerator) / w.denominator)

    @property
    def threshold(self) -> float:
        if self.resonance_threshold is not None:
            return float(self.resonance_threshold)
        return 2.0 ** (-self.precision / 4)

    def q(self, k: int) -> acb:
        return self.q_odd[k]


@dataclass
class GtpSolution:
    """Reconstructed q_even (q0 = 1 at index 0) and phi, plus resonance diagnostics."""

    params: ProblemParams
    q_even: UniSeries
    phi: BiSeries
    resonance_log: list = field(default_factory=list)
    order: int = 0
    min_denominator: float = math.inf

    @property
    def q_full(self) -> UniSeries:
        n = min(self.q_even.order, self.params.q_odd.order)
        return self.q_even.truncate(n) + self.params.q_odd.truncate(n)

    def q(self, k: int) -> acb:
        return self.q_even[k] if k % 2 == 0 else self.params.q_odd[k]


# ---------------------------------------------------------------------------
# closed forms

def init_q2(params: ProblemParams) -> acb:
    """q2 = -(lam - 2 + 1/lam) / (2 (1/lam + 2 + lam))."""
    with workprec(params.precision):
        lam = params.lam
        den = 2 * (1 / lam + 2 + lam)
        if mag(den) < 2.0 ** (-params.precision / 2):
            raise ResonanceError("q2: lambda = -1", magnitude=mag(den))
        return -(lam - 2 + 1 / lam) / den


def _circle_den(d: int, params: ProblemParams) -> acb:
    with workprec(params.precision):
        th = params.b0 / 2
        ca = params.alpha.cos()
        return ca / th.cos() ** 2 * ((d * th).cos() ** 2 - th.cos() ** 2)


def _box_den(j: int, params: ProblemParams) -> acb:
    with workprec(params.precision):
        th = params.b0 / 2
        return th.cos() ** (2 * j) * (2 * j) * params.alpha.cos() * math.comb(2 * j - 1, j)


def linear_denominator(j: int, k: int, params: ProblemParams, log_to: list | None = None) -> acb:
    """Coefficient of the unknown in the z^j w^k residual (q_{2j} when j = k+1, phi_jk otherwise)."""
    if j + k < 2 and not (j == 1 and k == 0):
        raise DomainError("linear_denominator needs j+k >= 2")
    if j == k + 1:
        val = _box_den(j, params)
        if log_to is not None:
            log_to.append((j, k, mag(val)))
        return val
    val = _circle_den(j - k, params)
    m = mag(val)
    if log_to is not None:
        log_to.append((j, k, m))
    if m < params.threshold:
        raise ResonanceError(f"small denominator at (j,k)=({j},{k}): |den|={m:.3e}",
                             index=(j, k), magnitude=m)
    return val


def quadratic_phi_closed_form(params: ProblemParams):
    """(phi20, phi11, phi02) from the explicit order-two formulas.

    phi20 = -[3/4 q3 ((lam+1)^2 + (1/lam+1)^2) - q2 tan(alpha) (lam - 1/lam)] / D,
    D = q2 (lam^2 + 2 + lam^-2) + (lam^2 - 2 + lam^-2)/2,
    phi02 = conj(phi20), phi11 = -3 q3 (lam+1)(1/lam+1) / (4 q2).
    """
    with workprec(params.precision):
        lam = params.lam
        il = lam.conjugate()
        q2 = init_q2(params)
        if mag(q2) < 2.0 ** (-params.precision / 2):
            raise DegenerateError("q2 = 0: quadratic coefficients undefined")
        q3 = params.q(3)
        ta = params.alpha.tan()
        D = q2 * (lam ** 2 + 2 + il ** 2) + (lam ** 2 - 2 + il ** 2) / 2
        if mag(D) < params.threshold:
            raise ResonanceError("order-two denominator vanishes (lam^3 = 1)", index=(2, 0), magnitude=mag(D))
        num = acb(3) / 4 * q3 * ((lam + 1) ** 2 + (il + 1) ** 2) - q2 * ta * (lam - il)
        phi20 = -num / D
        phi02 = phi20.conjugate()
        phi11 = -3 * q3 * (lam + 1) * (il + 1) / (4 * q2)
        return phi20, phi11, phi02


def twist_ratio(params: ProblemParams) -> acb:
    """r = (lam^2 - 2 + lam^-2) / (2 (lam^2 + 2 + lam^-2)) = -tan^2(b0)/2."""
    with workprec(params.precision):
        lam = params.lam
        return (lam ** 2 - 2 + lam ** -2) / (2 * (lam ** 2 + 2 + lam ** -2))


def key_combination(params: ProblemParams, phi_quadratic=None) -> acb:
    """K = phi20 cos b0 + phi11 + phi02 cos b0."""
    with workprec(params.precision):
        if phi_quadratic is None:
            if params.q(3).is_zero():
                return acb(0)
            phi_quadratic = quadratic_phi_closed_form(params)
        p20, p11, p02 = phi_quadratic
        cb = params.b0.cos()
        return p20 * cb + p11 + p02 * cb


def key_combination_factored(params: ProblemParams) -> acb:
    """K = -3/4 q3 (lam+1)(1/lam+1) (1/(q2 + r) + 1/q2) with r = twist_ratio."""
    with workprec(params.precision):
        lam = params.lam
        q2 = init_q2(params)
        r = twist_ratio(params)
        return -acb(3) / 4 * params.q(3) * (lam + 1) * (1 / lam + 1) * (1 / (q2 + r) + 1 / q2)


def key_zero_angle(prec: int = 384) -> acb:
    """b0 in (0, pi) where K vanishes for every q3: tan^2(b0/2) = 1 + sqrt 2."""
    with workprec(prec):
        return 2 * acb(arb(1 + arb(2).sqrt()).sqrt().atan())


# ---------------------------------------------------------------------------
# engine

def _pad(p: acb_poly, n: int) -> list:
    L = p.length()
    return [p[j] if j < L else acb(0) for j in range(n + 1)]


class GtpState:
    """Incremental solver state; ``advance(n)`` determines all order-n unknowns."""

    def __init__(self, params: ProblemParams, gauge: Callable[[int], object] | None = None,
                 check_symmetry: bool = True):
        self.params = params
        self.prec = params.precision
        self.N = params.max_order
        self.gauge = gauge
        self.check_symmetry = check_symmetry
        self.resonance_log: list = []
        self.min_den = math.inf
        N, prec = self.N, self.prec
        with workprec(prec):
            self.I = acb(0, 1)
            al = params.alpha
            self.ca, self.sa = al.cos(), al.sin()
            L = N // 2 + 1
            self.b_const = all(params.b[i].is_zero() for i in range(1, params.b.order + 1))
            self.C, self.S = {}, {}
            for d in range(0, N + 1):
                if self.b_const:
                    x = d * params.b0 / 2
                    c, s = [x.cos()], [x.sin()]
                else:
                    cu, su = trig_multiple_series(params.b, d, L)
                    c, s = list(cu.coeffs), list(su.coeffs)
                self.C[d], self.S[d] = c, s
                self.C[-d], self.S[-d] = c, [-v for v in s]
            self.q = [acb(0)] * (N + 3)
            self.q[0] = acb(1)
            for k in range(3, N + 3, 2):
                self.q[k] = params.q_odd[k]
            self.q_known = [k % 2 == 1 or k == 0 for k in range(N + 3)]
            self.q2 = acb(0)
            zero0 = acb_poly([acb(0)])
            self.phi = [[acb(0)]]
            self.A = [zero0]
            self.B = [zero0]
            self.pw = [[acb_poly([acb(1)])], [zero0]]  # pw[k][n]
            self.qA = [acb_poly([acb(1)])]
            self.dqA = [zero0]
            self.cosB = [acb_poly([acb(1)])]
            self.sinB = [zero0]
            self.cBa = [acb_poly([self.ca])]
            self.sBa = [acb_poly([-self.sa])]
            self.U = [zero0]
            self.V = [acb_poly([-self.sa])]
        self.done = 0

    # series-in-r coefficient lookups
    def _c(self, d, l):
        c = self.C[d]
        return c[l] if l < len(c) else None

    def _s(self, d, l):
        s = self.S[d]
        return s[l] if l < len(s) else None

    def _lin_A(self, n, phi_n, with_l0):
        """Contributions to A_n, B_n from phi of orders n - 2l."""
        a, bb = [], []
        I = self.I
        for j in range(n + 1):
            d = 2 * j - n
            sa = acb(0)
            sb = acb(0)
            for l in range(0 if with_l0 else 1, min(j, n - j) + 1):
                c = self._c(d, l)
                if c is None:
                    break
                f = phi_n[j] if l == 0 else self.phi[n - 2 * l][j - l]
                if f.is_zero():
                    continue
                sa += c * f
                sb += self._s(d, l) * f
            a.append(sa)
            bb.append(I * sb)
        return a, bb

    def advance(self, n: int):
        """Solve every unknown of total order n (phi_{j,n-j}, and q_{n+1} for odd n)."""
        if n != self.done + 1:
            raise ConfigurationError(f"orders must be solved in sequence (next is {self.done + 1})")
        if n > self.N:
            raise ConfigurationError(f"order {n} exceeds max_order {self.N}")
        P = self.params
        I = self.I
        with workprec(self.prec):
            phi_n = [acb(0)] * (n + 1)
            if n == 1:
                phi_n = [acb(1), acb(1)]
            elif n % 2 == 1 and self.gauge is not None:
                m = (n - 1) // 2
                g = to_acb(self.gauge(n))
                phi_n[m + 1] = g
                phi_n[m] = g.conjugate()
            a, bb = self._lin_A(n, phi_n, with_l0=(n == 1 or (n % 2 == 1 and self.gauge is not None)))
            An, Bn = acb_poly(a), acb_poly(bb)
            self.A.append(An)
            self.B.append(Bn)
            # powers of A
            self.pw[1].append(An)
            self.pw.append([acb_poly([])] * n)  # pw[n+1] row starts (degrees < n+1 vanish)
            for k in range(2, n + 1):
                s = acb_poly([])
                for t in range(1, n - k + 2):
                    pa, pb = self.A[t], self.pw[k - 1][n - t]
                    if pa.length() and pb.length():
                        s = s + pa * pb
                self.pw[k].append(s)
            for k in range(len(self.pw)):
                while len(self.pw[k]) < n + 1:
                    self.pw[k].append(acb_poly([]))
            q = self.q
            qA = acb_poly([])
            for k in range(2, n + 1):
                if not q[k].is_zero():
                    qA = qA + self.pw[k][n] * q[k]
            dqA = acb_poly([])
            for k in range(1, n + 1):
                if k + 1 < len(q) and self.q_known[k + 1] and not q[k + 1].is_zero():
                    dqA = dqA + self.pw[k][n] * ((k + 1) * q[k + 1])
            # cos B, sin B by the Euler-operator recurrence
            cs, sn = acb_poly([]), acb_poly([])
            for t in range(1, n + 1):
                bt = self.B[t]
                if not bt.length():
                    continue
                cs = cs - bt * self.sinB[n - t] * t
                sn = sn + bt * self.cosB[n - t] * t
            cs, sn = cs * (acb(1) / n), sn * (acb(1) / n)
            self.qA.append(qA)
            self.dqA.append(dqA)
            self.cosB.append(cs)
            self.sinB.append(sn)
            self.cBa.append(cs * self.ca + sn * self.sa)
            self.sBa.append(sn * self.ca - cs * self.sa)
            U, V = acb_poly([]), acb_poly([])
            for t in range(0, n + 1):
                if self.dqA[t].length() and self.cBa[n - t].length():
                    U = U + self.dqA[t] * self.cBa[n - t]
                if self.qA[t].length() and self.sBa[n - t].length():
                    V = V + self.qA[t] * self.sBa[n - t]
            self.U.append(U)
            self.V.append(V)
            R = self._residual_order(n)
            scale = max([1.0] + [mag(x) for x in R])
            tol = 2.0 ** (-self.prec / 2) * scale

            dA = [acb(0)] * (n + 1)
            dB = [acb(0)] * (n + 1)
            dU = [acb(0)] * (n + 1)
            if n % 2 == 1:
                m = (n - 1) // 2
                j = m + 1
                den = linear_denominator(j, m, P)
                qn = (-R[j] / den).mid()
                if n + 1 < len(q):
                    q[n + 1] = qn
                    self.q_known[n + 1] = True
                if n == 1:
                    self.q2 = qn
                dq = self.pw[n][n] * ((n + 1) * qn)
                self.dqA[n] = self.dqA[n] + dq
                dql = _pad(dq, n)
                for jj in range(n + 1):
                    dU[jj] += self.ca * dql[jj]
                    R[jj] += self.C[2 * jj - n][0] * self.ca * dql[jj]
                if self.check_symmetry and mag(R[m]) > tol:
                    raise ConsistencyError(
                        f"symmetric residual z^{m} w^{m + 1} = {mag(R[m]):.3e} does not vanish (tol {tol:.3e})")
            if n >= 2:
                for j in range(n + 1):
                    d = 2 * j - n
                    if abs(d) == 1:
                        continue
                    den = linear_denominator(j, n - j, P)
                    md = mag(den)
                    if md < self.min_den:
                        self.min_den = md
                        self.resonance_log.append((j, n - j, md))
                    f = (-R[j] / den).mid()
                    phi_n[j] = f
                    dA[j] = self.C[d][0] * f
                    dB[j] = I * self.S[d][0] * f
            self.phi.append(phi_n)
            if n >= 2:
                dAp, dBp = acb_poly(dA), acb_poly(dB)
                self.A[n] = self.A[n] + dAp
                self.B[n] = self.B[n] + dBp
                self.pw[1][n] = self.A[n]
                q2 = self.q[2]
                self.dqA[n] = self.dqA[n] + dAp * (2 * q2)
                self.sinB[n] = self.sinB[n] + dBp
                self.cBa[n] = self.cBa[n] + dBp * self.sa
                self.sBa[n] = self.sBa[n] + dBp * self.ca
                self.U[n] = self.U[n] + acb_poly(dU) + dAp * (2 * q2 * self.ca)
                self.V[n] = self.V[n] + dBp * self.ca
            elif n == 1:
                self.U[n] = self.U[n] + acb_poly(dU)
        self.done = n
        return self

    def _residual_order(self, n: int) -> list:
        I = self.I
        R = []
        for j in range(n + 1):
            d = 2 * j - n
            s = acb(0)
            for l in range(0, min(j, n - j) + 1):
                c = self._c(d, l)
                if c is None:
                    break
                Ul = self.U[n - 2 * l]
                Vl = self.V[n - 2 * l]
                jj = j - l
                u = Ul[jj] if jj < Ul.length() else acb(0)
                v = Vl[jj] if jj < Vl.length() else acb(0)
                s += c * u + I * self._s(d, l) * v
            R.append(s)
        return R

    def step(self, m: int):
        """Step m: orders 2m and 2m+1 (q_{2m+2} and the phi of those orders)."""
        if self.done < 1:
            self.advance(1)
        for n in (2 * m, 2 * m + 1):
            if n <= self.N and n > self.done:
                self.advance(n)
        return self

    def solution(self) -> GtpSolution:
        P = self.params
        n_done = self.done
        with workprec(self.prec):
            top = n_done + 1 if n_done % 2 == 1 else n_done
            qe = [self.q[k] if k % 2 == 0 else acb(0) for k in range(top + 1)]
            q_even = UniSeries(tuple(qe), self.prec, "even")
            table = {}
            for n in range(1, n_done + 1):
                for j in range(n + 1):
                    if not self.phi[n][j].is_zero():
                        table[(j, n - j)] = self.phi[n][j]
            phi = BiSeries.from_dict(table, n_done, self.prec)
        return GtpSolution(P, q_even, phi, list(self.resonance_log), n_done, self.min_den)


def step(state: GtpState, m: int) -> GtpState:
    return state.step(m)


def solve(params: ProblemParams, gauge: Callable[[int], object] | None = None,
          check_symmetry: bool = True) -> GtpSolution:
    """Solve all orders up to params.max_order.

    On resonance the raised ResonanceError carries ``partial`` (a GtpSolution
    of the orders completed so far).
    """
    st = GtpState(params, gauge=gauge, check_symmetry=check_symmetry)
    try:
        for n in range(1, params.max_order + 1):
            st.advance(n)
    except ResonanceError as e:
        e.partial = st.solution()
        raise
    return st.solution()


# ---------------------------------------------------------------------------
# independent residual via full composition

def newmain_series(sol: GtpSolution, order: int | None = None) -> BiSeries:
    """Left side of the symmetrized equation as a BiSeries, via Horner composition."""
    P = sol.params
    N = sol.order if order is None else order
    prec = P.precision
    with workprec(prec):
        phi = sol.phi.truncate(N)
        L = N // 2 + 1
        cache = {}

        def cs(d):
            if d not in cache:
                cache[d] = trig_multiple_series(P.b.truncate(max(L, 1)), d, L)
            return cache[d]

        A = phi.diag_map(lambda d: cs(d)[0])
        B = phi.diag_map(lambda d: cs(d)[1]).scale(acb(0, 1))
        qv = [sol.q(k) for k in range(N + 2)]
        qser = UniSeries(tuple(qv[: N + 1]), prec)
        dq = UniSeries(tuple(qv[k + 1] * (k + 1) for k in range(N + 1)), prec)
        c1 = cos_offset_coeffs(P.alpha, N + 1, prec)
        c = c1.truncate(N)
        s = -c1.derivative()  # sin(x - a) = -d/dx cos(x - a)
        U = compose_bi_into_uni(dq, A) * compose_bi_into_uni(c, B)
        V = compose_bi_into_uni(qser, A) * compose_bi_into_uni(s, B)
        return U.diag_map(lambda d: cs(d)[0]) + V.diag_map(lambda d: cs(d)[1]).scale(acb(0, 1))


def residual(solution: GtpSolution, j: int, k: int, series: BiSeries | None = None) -> acb:
    """z^j w^k coefficient of the symmetrized equation with the solution substituted."""
    if j + k > solution.order:
        raise DomainError(f"({j},{k}) beyond solution order {solution.order}")
    if series is None:
        series = newmain_series(solution, j + k)
    return series[(j, k)]
