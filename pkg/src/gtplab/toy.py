"""Diagonal inversion toy problem.

Find an odd q with [z^n w^{n-1}] q(phi(z, w)) = delta_{n,2} for a polynomial
phi = z + w + (higher terms).  With Q_k = k! q_k every equation reads

    sum_k Q_k [z^n w^{n-1} t^k] exp(t phi) = target_n,

which for separable phi = f(z) + g(w) is an integer convolution.
"""
from __future__ import annotations

import math
import statistics
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from flint import fmpq, fmpz, fmpz_poly

from .errors import ConfigurationError, DegenerateError, DomainError

MAIN_PHI = {(1, 0): 1, (0, 1): 1, (3, 0): 1, (0, 3): 1}
VARIANTS = {
    "z+w+z^2w+zw^2": {(1, 0): 1, (0, 1): 1, (2, 1): 1, (1, 2): 1},
    "z+w+(z+w)^3": {(1, 0): 1, (0, 1): 1, (3, 0): 1, (2, 1): 3, (1, 2): 3, (0, 3): 1},
}

# the printed dip-neighbourhood ratio sequence
REFERENCE_WINDOW = (-8.8, -8.5, -8.1, -7.6, -6.7, -5.1, -0.7, 108.5, -20.2, -14.6, -12.8, -11.9, -11.3)


@dataclass(frozen=True)
class ToyProblem:
    phi: dict = field(default_factory=lambda: dict(MAIN_PHI))
    normalization: str = "coefficient"   # or 'derivative'
    max_n: int = 100

    def __post_init__(self):
        if self.normalization not in ("coefficient", "derivative"):
            raise ConfigurationError("normalization must be 'coefficient' or 'derivative'")
        if self.max_n < 2:
            raise ConfigurationError("max_n >= 2")
        phi = {tuple(k): Fraction(v) for k, v in self.phi.items() if v != 0}
        if (0, 0) in phi:
            raise DomainError("phi(0,0) must vanish")
        if phi.get((1, 0)) != 1 or phi.get((0, 1)) != 1:
            raise DomainError("phi must have linear part z + w")
        object.__setattr__(self, "phi", phi)

    @property
    def separable(self) -> bool:
        return all(a == 0 or b == 0 for a, b in self.phi)


@dataclass
class ToySolution:
    problem: ToyProblem
    q: list          # q[n-1] = q_{2n-1} as fmpq, n = 1..max_n

    def coeff(self, k: int) -> fmpq:
        if k % 2 == 0:
            return fmpq(0)
        return self.q[(k + 1) // 2 - 1]

    def as_fractions(self) -> list:
        return [Fraction(int(x.p), int(x.q)) for x in self.q]


def _target(n: int, problem: ToyProblem) -> Fraction:
    if n != 2:
        return Fraction(0)
    if problem.normalization == "derivative":
        return Fraction(1, math.factorial(n) * math.factorial(n - 1))
    return Fraction(1)


def _side_poly(coeffs: dict, n: int) -> list:
    """[x^n] exp(t f(x)) * n!, as a list over powers of t, f given by {degree: coeff}."""
    out = {}
    higher = [(d, c) for d, c in coeffs.items() if d > 1]
    for ms in _mults(higher, n):
        used = sum(m * d for m, (d, _) in zip(ms, higher))
        a1 = n - used
        if a1 < 0:
            continue
        k = a1 + sum(ms)
        val = Fraction(math.factorial(n), math.factorial(a1))
        for m, (_, c) in zip(ms, higher):
            val *= c ** m / math.factorial(m)
        out[k] = out.get(k, 0) + val
    return out


def _mults(higher, n):
    if not higher:
        yield ()
        return
    d, _ = higher[0]
    for m in range(n // d + 1):
        for rest in _mults(higher[1:], n - m * d):
            yield (m,) + rest


def solve_toy(problem: ToyProblem) -> ToySolution:
    """Triangular solve for q_1, q_3, ..., q_{2 max_n - 1}."""
    if problem.separable:
        B = _rows_separable(problem)
    else:
        B = _rows_generic(problem)
    N = problem.max_n
    Q = {}  # Q_k = k! q_k (exact rationals; integers for integer phi)
    for n in range(1, N + 1):
        row = B(n)
        lead = row.get(2 * n - 1, 0)
        if lead == 0:
            raise DegenerateError(f"diagonal equation {n}: leading multiplier vanishes")
        rhs = _target(n, problem) * math.factorial(n) * math.factorial(n - 1)
        s = fmpq(rhs.numerator, rhs.denominator)
        for k, c in row.items():
            if k < 2 * n - 1 and k % 2 == 1:
                s -= Q[k] * c
        Q[2 * n - 1] = s / lead
    q = [Q[2 * n - 1] / math.factorial(2 * n - 1) for n in range(1, N + 1)]
    return ToySolution(problem, q)


def _to_fmpq(x) -> fmpq:
    x = Fraction(x)
    return fmpq(x.numerator, x.denominator)


def _rows_separable(problem: ToyProblem):
    """Row n: {k: n!(n-1)! [z^n w^{n-1} t^k] exp(t phi)} via a polynomial product in t."""
    f = {a: c for (a, b), c in problem.phi.items() if b == 0}
    g = {b: c for (a, b), c in problem.phi.items() if a == 0}
    integral = all(c.denominator == 1 for c in problem.phi.values())

    def side(coeffs, n):
        d = _side_poly(coeffs, n)
        if integral and all(v.denominator == 1 for v in d.values()):
            L = max(d) + 1
            return fmpz_poly([int(d.get(i, 0)) for i in range(L)]), True
        return d, False

    def row(n):
        P, ok1 = side(f, n)
        R, ok2 = side(g, n - 1)
        if ok1 and ok2:
            W = P * R
            return {k: fmpz(W[k]) for k in range(W.degree() + 1) if W[k] != 0}
        out = {}
        Pd = P if isinstance(P, dict) else {i: Fraction(int(P[i])) for i in range(P.degree() + 1)}
        Rd = R if isinstance(R, dict) else {i: Fraction(int(R[i])) for i in range(R.degree() + 1)}
        for i, a in Pd.items():
            for j, b in Rd.items():
                out[i + j] = out.get(i + j, 0) + a * b
        return {k: _to_fmpq(v) for k, v in out.items() if v != 0}

    return row


def _rows_generic(problem: ToyProblem):
    """Row n by multinomial enumeration over the higher monomials."""
    higher = [((a, b), c) for (a, b), c in problem.phi.items() if a + b > 1]

    def row(n):
        out = {}
        fn = math.factorial(n) * math.factorial(n - 1)
        for ms in _mults_2d(higher, n, n - 1):
            za = n - sum(m * a for m, ((a, _), _) in zip(ms, higher))
            wb = n - 1 - sum(m * b for m, ((_, b), _) in zip(ms, higher))
            if za < 0 or wb < 0:
                continue
            k = za + wb + sum(ms)
            val = Fraction(fn, math.factorial(za) * math.factorial(wb))
            for m, (_, c) in zip(ms, higher):
                val *= c ** m / math.factorial(m)
            out[k] = out.get(k, 0) + val
        return {k: _to_fmpq(v) for k, v in out.items() if v != 0}

    return row


def _mults_2d(higher, za, wb):
    if not higher:
        yield ()
        return
    (a, b), _ = higher[0]
    m = 0
    while m * a <= za and m * b <= wb:
        for rest in _mults_2d(higher[1:], za - m * a, wb - m * b):
            yield (m,) + rest
        m += 1


def diagonal_residuals(sol: ToySolution, upto: int | None = None) -> list:
    """[z^n w^{n-1}] q(phi) - target_n for n = 1..upto, by direct expansion (independent of the solver rows)."""
    from .series import BiSeries, UniSeries, compose_bi_into_uni, to_acb, workprec
    prob = sol.problem
    N = upto or prob.max_n
    deg = 2 * N - 1
    with workprec(2048):
        phi = BiSeries.from_dict(dict(prob.phi), deg, 2048)
        qs = UniSeries.from_values([0] + [_fmpq_str(sol.coeff(k)) for k in range(1, deg + 1)], 2048, order=deg)
        comp = compose_bi_into_uni(qs, phi)
        return [comp[n, n - 1] - to_acb(_target(n, prob)) for n in range(1, N + 1)]


def _fmpq_str(x: fmpq):
    return Fraction(int(x.p), int(x.q))


# ---------------------------------------------------------------------------
# ratios and dips

@dataclass
class RatioReport:
    q: list
    r: list                    # r[n] = q_{2n+1}/q_{2n-1} (index n, None where undefined); r[0] unused
    dips: list
    spacing_fit: tuple | None = None
    normalized: list = field(default_factory=list)   # Q_{n+1}/Q_n, Q_n = binom(2n-1, n) q_{2n-1}


def ratio_sequence(q, window: int = 12, factor: float = 2.0) -> RatioReport:
    """Ratios and dip indices (r_n > 0 followed by r_{n+1} < -factor * trailing median |r|)."""
    if isinstance(q, ToySolution):
        q = q.q
    vals = [fmpq(x) if not isinstance(x, fmpq) else x for x in q]
    N = len(vals)
    r = [None]
    rho = [None]
    for n in range(1, N):
        a, b = vals[n - 1], vals[n]     # q_{2n-1}, q_{2n+1}
        if a == 0:
            r.append(None)
            rho.append(None)
            continue
        x = b / a
        r.append(float(x.p) / float(x.q) if abs(x.p) < 10 ** 300 and x.q < 10 ** 300 else float(Fraction(int(x.p), int(x.q))))
        rho.append(r[-1] * 2 * (2 * n + 1) / (n + 1))
    dips = detect_dips(r, window, factor)
    return RatioReport(list(q), r, dips, None, rho)


def detect_dips(r: list, window: int = 12, factor: float = 2.0) -> list:
    dips = []
    for n in range(1, len(r) - 1):
        if r[n] is None or r[n + 1] is None or r[n] <= 0:
            continue
        trail = [abs(x) for x in r[max(1, n - window):n] if x is not None]
        med = statistics.median(trail) if trail else 0.0
        if r[n + 1] < -factor * med:
            dips.append(n)
    return dips


@dataclass
class SpacingFit:
    C: float
    exponent: float
    residual: float
    ratio_spread: float
    ratios: list


def dip_analysis(report_or_dips, up_to_n: int | None = None) -> SpacingFit:
    """Fit spacing between consecutive dips against C n^e (and against C sqrt(n))."""
    dips = report_or_dips.dips if isinstance(report_or_dips, RatioReport) else list(report_or_dips)
    if up_to_n is not None:
        dips = [d for d in dips if d <= up_to_n]
    if len(dips) < 5:
        raise ConfigurationError(f"need >= 5 dips for a spacing fit, found {len(dips)}")
    n = np.array(dips[:-1], dtype=float)
    gap = np.diff(np.array(dips, dtype=float))
    A = np.vstack([np.log(n), np.ones_like(n)]).T
    (e, logc), *_ = np.linalg.lstsq(A, np.log(gap), rcond=None)
    ratios = gap / np.sqrt(n)
    C = float(np.mean(ratios))
    res = float(np.sqrt(np.mean((gap - C * np.sqrt(n)) ** 2)))
    spread = float(np.std(ratios) / C)
    fit = SpacingFit(C, float(e), res, spread, ratios.tolist())
    if isinstance(report_or_dips, RatioReport):
        report_or_dips.spacing_fit = (C, float(e))
    return fit


def find_window(report: RatioReport, pattern=REFERENCE_WINDOW, digits: int = 1, mode: str = "round",
                convention: str = "normalized") -> list:
    """Start indices n0 where the ratio sequence from n0 reproduces ``pattern`` at ``digits`` decimals."""
    seq = report.normalized if convention == "normalized" else report.r
    L = len(pattern)
    hits = []
    for n0 in range(1, len(seq) - L + 1):
        win = seq[n0:n0 + L]
        if any(x is None for x in win):
            continue
        if all(_shown(x, digits, mode) == p for x, p in zip(win, pattern)):
            hits.append(n0)
    return hits


def _shown(x: float, digits: int, mode: str) -> float:
    s = 10 ** digits
    if mode == "round":
        return round(x * s) / s
    return math.trunc(x * s) / s


def cycles_monotone(report: RatioReport) -> list:
    """For each complete cycle between dips, whether r increases strictly from the jump to the next dip."""
    out = []
    for a, b in zip(report.dips, report.dips[1:]):
        seg = report.r[a + 1:b + 1]
        out.append(all(y > x for x, y in zip(seg, seg[1:])))
    return out


def log_curvature(sol: ToySolution, start: int = 3) -> float:
    """Mean second difference of log|q_{2n-1}| over the run."""
    lv = []
    for x in sol.q[start - 1:]:
        if x == 0:
            continue
        lv.append(_log_abs(x))
    d2 = np.diff(np.array(lv), 2)
    return float(np.mean(d2))


def _log_abs(x: fmpq) -> float:
    p, q = abs(int(x.p)), int(x.q)
    return (p.bit_length() - q.bit_length()) * math.log(2) + math.log(
        (p >> max(0, p.bit_length() - 60)) / 2.0 ** min(60, p.bit_length())) - math.log(
        (q >> max(0, q.bit_length() - 60)) / 2.0 ** min(60, q.bit_length()))


def log_abs_q(sol: ToySolution) -> list:
    return [None if x == 0 else _log_abs(x) for x in sol.q]


# ---------------------------------------------------------------------------
# one-dimensional reductions

@dataclass
class ReductionReport:
    variant: str
    convention: str            # 'plain': q_k = c X_k; 'diagonal': binom(2n-1, n) q_{2n-1} = c X_{2n-1}
    scale: Fraction
    max_deviation: float
    q: list
    reversion: list
    dips: list
    ratio_bound: float


# which normalization of q reproduces the reversion for each variant
VARIANT_CONVENTION = {"z+w+z^2w+zw^2": "diagonal", "z+w+(z+w)^3": "plain"}


def _ball_to_int(x) -> int:
    m, e = x.real.mid().man_exp()
    m, e = int(m), int(e)
    return m << e if e >= 0 else round(Fraction(m, 1 << -e))


def special_case_reduction(variant: str, max_n: int = 20, prec: int | None = None) -> ReductionReport:
    """Compare a variant's toy solution with the reversion X of x + x^3, for odd k >= 3."""
    from .series import UniSeries, revert, workprec
    if variant not in VARIANTS:
        raise ConfigurationError(f"unknown variant {variant!r}; choose from {sorted(VARIANTS)}")
    sol = solve_toy(ToyProblem(VARIANTS[variant], "coefficient", max_n))
    deg = 2 * max_n - 1
    prec = prec or max(128, 8 * deg)
    with workprec(prec):
        X = revert(UniSeries.from_values([0, 1, 0, 1], prec, order=deg))
        xi = [_ball_to_int(X[k]) for k in range(deg + 1)]
    q = sol.as_fractions()
    conv = VARIANT_CONVENTION[variant]
    if conv == "diagonal":
        vals = [math.comb(2 * n - 1, n) * q[n - 1] for n in range(1, max_n + 1)]
    else:
        vals = q
    c = vals[1] / xi[3]
    dev = 0.0
    for n in range(2, max_n + 1):
        k = 2 * n - 1
        dev = max(dev, float(abs(c * xi[k] - vals[n - 1]) / max(1, abs(vals[n - 1]))))
    rep = ratio_sequence(sol)
    rb = max(abs(x) for x in rep.r if x is not None)
    return ReductionReport(variant, conv, c, dev, q, xi, rep.dips, rb)
