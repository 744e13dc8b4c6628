"""Arbitrary-precision coefficients and truncated uni/bivariate power series.

Coefficients are flint ``acb`` balls; only the midpoint is treated as the
value.  A bivariate series is stored as a list of homogeneous components,
component ``n`` being an ``acb_poly`` in z whose coefficient ``j`` is the
coefficient of z^j w^(n-j).  Products of homogeneous components are then
plain univariate polynomial products.
"""
from __future__ import annotations

import math
import os
from contextlib import contextmanager
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import mpmath
from flint import acb, acb_poly, acb_series, arb, ctx, fmpq

from .errors import ConfigurationError, DomainError

DEFAULT_PRECISION = 384
MIN_PRECISION = 64

Coeff = acb  # arbitrary-precision complex scalar (midpoint + radius)


def default_precision() -> int:
    """Default working precision in bits, overridable by GTPLAB_PRECISION."""
    env = os.environ.get("GTPLAB_PRECISION")
    if env:
        try:
            bits = int(env)
        except ValueError:
            raise ConfigurationError(f"GTPLAB_PRECISION={env!r} is not an integer")
        check_precision(bits)
        return bits
    return DEFAULT_PRECISION


def check_precision(bits) -> int:
    if not isinstance(bits, int) or bits < MIN_PRECISION:
        raise ConfigurationError(f"precision must be an integer >= {MIN_PRECISION}, got {bits!r}")
    return bits


@contextmanager
def workprec(bits: int):
    """Temporarily set the flint working precision."""
    old = ctx.prec
    ctx.prec = bits
    try:
        yield
    finally:
        ctx.prec = old


# ---------------------------------------------------------------------------
# scalar helpers

def to_acb(x) -> acb:
    """Convert common numeric types (and decimal strings) to ``acb`` at the current precision."""
    if isinstance(x, acb):
        return +x
    if isinstance(x, arb):
        return acb(x)
    if isinstance(x, bool):
        return acb(int(x))
    if isinstance(x, int):
        return acb(x)
    if isinstance(x, Fraction):
        return acb(arb(fmpq(x.numerator, x.denominator)))
    if isinstance(x, fmpq):
        return acb(arb(x))
    if isinstance(x, float):
        return acb(x)
    if isinstance(x, complex):
        return acb(x.real, x.imag)
    if isinstance(x, str):
        return acb(arb(x))
    if isinstance(x, mpmath.mpf):
        return acb(arb(mpmath.nstr(x, int(ctx.prec * 0.302) + 5)))
    if isinstance(x, mpmath.mpc):
        n = int(ctx.prec * 0.302) + 5
        return acb(arb(mpmath.nstr(x.real, n)), arb(mpmath.nstr(x.imag, n)))
    if isinstance(x, (tuple, list)) and len(x) == 2:
        return acb(to_acb(x[0]).real, to_acb(x[1]).real)
    raise ConfigurationError(f"cannot convert {type(x).__name__} to a coefficient")


def mid(x: acb) -> acb:
    """Midpoint of a ball (drops the error radius)."""
    return x.mid()


def mag(x) -> float:
    """Magnitude of the midpoint as a Python float."""
    if isinstance(x, (int, float, complex)):
        return abs(x)
    m = abs(acb(x).mid())
    return float(m.mid())


def to_complex(x) -> complex:
    x = acb(x).mid()
    return complex(float(x.real.mid()), float(x.imag.mid()))


def rel_close(a, b, bits: int) -> bool:
    """|a-b| <= 2^-bits * max(1, |a|, |b|)."""
    scale = max(1.0, mag(a), mag(b))
    return mag(acb(a) - acb(b)) <= 2.0 ** (-bits) * scale


def acb_str(x: acb, digits: int | None = None) -> tuple[str, str]:
    """Decimal strings for the real and imaginary midpoints at full precision."""
    if digits is None:
        digits = int(ctx.prec * math.log10(2)) + 3
    x = acb(x).mid()
    return (x.real.mid().str(digits, radius=False), x.imag.mid().str(digits, radius=False))


def _check_same_prec(a, b):
    if a.prec != b.prec:
        raise ConfigurationError(f"precision mismatch: {a.prec} vs {b.prec} bits")


# ---------------------------------------------------------------------------
# univariate series

_PARITIES = ("none", "even", "odd")


@dataclass(frozen=True)
class UniSeries:
    """Truncated univariate series sum_{i<=N} c_i t^i."""

    coeffs: tuple
    prec: int
    parity: str = "none"

    def __post_init__(self):
        if self.parity not in _PARITIES:
            raise ConfigurationError(f"unknown parity {self.parity!r}")
        check_precision(self.prec)
        if self.parity != "none":
            bad = 1 if self.parity == "even" else 0
            for i in range(bad, len(self.coeffs), 2):
                if not self.coeffs[i].is_zero():
                    raise DomainError(f"{self.parity} series has nonzero coefficient at index {i}")

    @classmethod
    def from_values(cls, values: Iterable, prec: int | None = None, parity: str = "none",
                    order: int | None = None) -> "UniSeries":
        prec = default_precision() if prec is None else prec
        if parity not in _PARITIES:
            raise ConfigurationError(f"unknown parity {parity!r}")
        with workprec(prec):
            cs = [to_acb(v) for v in values]
            if order is not None:
                cs = (cs + [acb(0)] * (order + 1))[: order + 1]
            if parity != "none":
                bad = 1 if parity == "even" else 0
                for i in range(bad, len(cs), 2):
                    if not cs[i].is_zero():
                        raise DomainError(f"{parity} series has nonzero coefficient at index {i}")
        return cls(tuple(cs), prec, parity)

    @classmethod
    def zero(cls, order: int, prec: int | None = None, parity: str = "none"):
        return cls.from_values([0] * (order + 1), prec, parity)

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def __len__(self):
        return len(self.coeffs)

    def __getitem__(self, i):
        if isinstance(i, slice):
            return self.coeffs[i]
        if 0 <= i < len(self.coeffs):
            return self.coeffs[i]
        return acb(0)

    def _wrap(self, cs, parity="none"):
        cs = list(cs)
        if parity != "none":
            bad = 1 if parity == "even" else 0
            for i in range(bad, len(cs), 2):
                cs[i] = acb(0)
        return UniSeries(tuple(cs), self.prec, parity)

    def truncate(self, order: int) -> "UniSeries":
        cs = (list(self.coeffs) + [acb(0)] * (order + 1))[: order + 1]
        return self._wrap(cs, self.parity)

    def __add__(self, other: "UniSeries") -> "UniSeries":
        _check_same_prec(self, other)
        n = min(self.order, other.order)
        par = self.parity if self.parity == other.parity else "none"
        with workprec(self.prec):
            return self._wrap([self.coeffs[i] + other.coeffs[i] for i in range(n + 1)], par)

    def __neg__(self):
        return self._wrap([-c for c in self.coeffs], self.parity)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, s) -> "UniSeries":
        with workprec(self.prec):
            s = to_acb(s)
            return self._wrap([s * c for c in self.coeffs], self.parity)

    def __mul__(self, other):
        if isinstance(other, UniSeries):
            return mul(self, other)
        return self.scale(other)

    __rmul__ = __mul__

    def derivative(self) -> "UniSeries":
        par = {"even": "odd", "odd": "even"}.get(self.parity, "none")
        with workprec(self.prec):
            cs = [self.coeffs[i] * i for i in range(1, len(self.coeffs))] or [acb(0)]
        return self._wrap(cs, par)

    def poly(self) -> acb_poly:
        return acb_poly(list(self.coeffs))

    def __call__(self, x):
        """Evaluate the truncated polynomial at a scalar."""
        with workprec(self.prec):
            x = to_acb(x)
            s = acb(0)
            for c in reversed(self.coeffs):
                s = s * x + c
            return s

    def compose(self, g: "UniSeries") -> "UniSeries":
        """Truncated f(g(t)); g must have zero constant term."""
        _check_same_prec(self, g)
        if not g[0].is_zero():
            raise DomainError("composition requires g(0) = 0")
        n = min(self.order, g.order)
        with workprec(self.prec):
            gp = acb_poly(list(g.coeffs[: n + 1]))
            res = acb_poly([self.coeffs[n]]) if n < len(self.coeffs) else acb_poly([])
            for k in range(n - 1, -1, -1):
                res = (res * gp).truncate(n + 1) + self.coeffs[k]
            cs = [res[i] for i in range(n + 1)]
        par = "none"
        if self.parity in ("even", "odd") and g.parity == "odd":
            par = self.parity
        elif self.parity == "even" and g.parity == "even":
            par = "even"
        return self._wrap(cs, par)

    def values(self) -> list:
        return list(self.coeffs)

    def to_complex(self) -> list:
        return [to_complex(c) for c in self.coeffs]


# ---------------------------------------------------------------------------
# bivariate series

def _comp_get(p: acb_poly, j: int) -> acb:
    return p[j] if 0 <= j < p.length() else acb(0)


@dataclass(frozen=True)
class BiSeries:
    """Truncated bivariate series, total-degree triangular (j+k <= N).

    ``comps[n]`` is the homogeneous component of degree n, an ``acb_poly``
    whose coefficient j multiplies z^j w^(n-j).
    """

    comps: tuple
    prec: int

    @classmethod
    def from_dict(cls, table: dict, order: int, prec: int | None = None) -> "BiSeries":
        prec = default_precision() if prec is None else prec
        check_precision(prec)
        with workprec(prec):
            rows = [[acb(0)] * (n + 1) for n in range(order + 1)]
            for (j, k), v in table.items():
                if j < 0 or k < 0:
                    raise DomainError(f"negative exponent ({j},{k})")
                if j + k <= order:
                    rows[j + k][j] = to_acb(v)
            return cls(tuple(acb_poly(r) for r in rows), prec)

    @classmethod
    def from_components(cls, comps: Sequence, prec: int) -> "BiSeries":
        return cls(tuple(acb_poly(list(c)) if not isinstance(c, acb_poly) else c for c in comps), prec)

    @classmethod
    def zero(cls, order: int, prec: int | None = None):
        return cls.from_dict({}, order, prec)

    @property
    def order(self) -> int:
        return len(self.comps) - 1

    def __getitem__(self, jk) -> acb:
        j, k = jk
        n = j + k
        if j < 0 or k < 0 or n > self.order:
            return acb(0)
        return _comp_get(self.comps[n], j)

    def items(self):
        for n, p in enumerate(self.comps):
            for j in range(n + 1):
                yield (j, n - j), _comp_get(p, j)

    def to_dict(self, skip_zero: bool = True) -> dict:
        return {jk: v for jk, v in self.items() if not (skip_zero and v.is_zero())}

    def component(self, n: int) -> list:
        return [_comp_get(self.comps[n], j) for j in range(n + 1)] if n <= self.order else [acb(0)] * (n + 1)

    def truncate(self, order: int) -> "BiSeries":
        comps = list(self.comps[: order + 1]) + [acb_poly([])] * max(0, order - self.order)
        return BiSeries(tuple(comps), self.prec)

    def __add__(self, other: "BiSeries") -> "BiSeries":
        _check_same_prec(self, other)
        n = min(self.order, other.order)
        with workprec(self.prec):
            return BiSeries(tuple(self.comps[i] + other.comps[i] for i in range(n + 1)), self.prec)

    def __neg__(self):
        return BiSeries(tuple(-p for p in self.comps), self.prec)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, s) -> "BiSeries":
        with workprec(self.prec):
            s = to_acb(s)
            return BiSeries(tuple(p * s for p in self.comps), self.prec)

    def __mul__(self, other):
        if isinstance(other, BiSeries):
            return mul(self, other)
        return self.scale(other)

    __rmul__ = __mul__

    def add_constant(self, c) -> "BiSeries":
        with workprec(self.prec):
            comps = list(self.comps)
            comps[0] = comps[0] + to_acb(c)
            return BiSeries(tuple(comps), self.prec)

    def diag_map(self, fn: Callable[[int], "UniSeries"]) -> "BiSeries":
        """Multiply the diagonal j-k=d by the series fn(d) evaluated at r = zw.

        (F * u_d(zw))_{j,k} = sum_l u_{d,l} F_{j-l,k-l}.
        """
        N = self.order
        cache = {}
        with workprec(self.prec):
            out = []
            for n in range(N + 1):
                row = []
                for j in range(n + 1):
                    d = 2 * j - n
                    if d not in cache:
                        cache[d] = fn(d)
                    u = cache[d]
                    s = acb(0)
                    for l in range(0, min(j, n - j) + 1):
                        if l > u.order:
                            break
                        ul = u[l]
                        if ul.is_zero():
                            continue
                        s += ul * _comp_get(self.comps[n - 2 * l], j - l)
                    row.append(s)
                out.append(acb_poly(row))
        return BiSeries(tuple(out), self.prec)

    def conj_swap(self) -> "BiSeries":
        """(j,k) -> conj(F_{k,j}); fixed points are Hermitian-symmetric series."""
        with workprec(self.prec):
            out = []
            for n, p in enumerate(self.comps):
                out.append(acb_poly([_comp_get(p, n - j).conjugate() for j in range(n + 1)]))
        return BiSeries(tuple(out), self.prec)

    def __call__(self, z, w):
        with workprec(self.prec):
            z, w = to_acb(z), to_acb(w)
            s = acb(0)
            for n in range(self.order, -1, -1):
                p = self.comps[n]
                t = acb(0)
                for j in range(n + 1):
                    c = _comp_get(p, j)
                    if not c.is_zero():
                        t += c * z ** j * w ** (n - j)
                s += t
            return s


# ---------------------------------------------------------------------------
# generic operations

def mul(a, b):
    """Truncated Cauchy product of two UniSeries or two BiSeries."""
    _check_same_prec(a, b)
    if isinstance(a, UniSeries) and isinstance(b, UniSeries):
        n = min(a.order, b.order)
        with workprec(a.prec):
            p = (a.poly() * b.poly()).truncate(n + 1)
            cs = [p[i] if i < p.length() else acb(0) for i in range(n + 1)]
        par = "none"
        if a.parity != "none" and b.parity != "none":
            par = "even" if a.parity == b.parity else "odd"
        return a._wrap(cs, par)
    if isinstance(a, BiSeries) and isinstance(b, BiSeries):
        N = min(a.order, b.order)
        with workprec(a.prec):
            out = []
            for n in range(N + 1):
                s = acb_poly([])
                for i in range(n + 1):
                    pa, pb = a.comps[i], b.comps[n - i]
                    if pa.length() and pb.length():
                        s = s + pa * pb
                out.append(s)
        return BiSeries(tuple(out), a.prec)
    raise ConfigurationError("mul expects two UniSeries or two BiSeries")


def compose_bi_into_uni(f: UniSeries, g: BiSeries) -> BiSeries:
    """Truncated f(g(z,w)) by Horner evaluation in the bivariate series algebra."""
    _check_same_prec(f, g)
    if not g.comps[0].length() == 0 and not _comp_get(g.comps[0], 0).is_zero():
        raise DomainError("composition requires g(0,0) = 0")
    N = g.order
    M = min(f.order, N)
    with workprec(g.prec):
        res = [acb_poly([]) for _ in range(N + 1)]
        res[0] = acb_poly([f[M]])
        for k in range(M - 1, -1, -1):
            # only degrees <= N-k survive the remaining k multiplications by g
            top = N - k
            new = [acb_poly([]) for _ in range(N + 1)]
            for n in range(1, top + 1):
                s = acb_poly([])
                for i in range(1, n + 1):
                    pg, pr = g.comps[i], res[n - i]
                    if pg.length() and pr.length():
                        s = s + pg * pr
                new[n] = s
            new[0] = acb_poly([f[k]])
            res = new
    return BiSeries(tuple(res), g.prec)


def cos_offset_coeffs(alpha, N: int, prec: int | None = None) -> UniSeries:
    """Coefficients c_j with cos(x - alpha) = sum c_j x^j."""
    prec = default_precision() if prec is None else prec
    if N < 0:
        raise DomainError("N must be >= 0")
    with workprec(prec):
        a = to_acb(alpha)
        ca, sa = a.cos(), a.sin()
        cs = []
        fact = acb(1)
        for j in range(N + 1):
            if j:
                fact = fact * j
            # d^j/dx^j cos(x - alpha) at 0 cycles through cos, -sin, -cos, sin of (-alpha)
            v = (ca, sa, -ca, -sa)[j % 4]
            cs.append(v / fact)
    return UniSeries(tuple(cs), prec)


def exp_series(x: UniSeries, N: int | None = None) -> UniSeries:
    """exp of a series with zero constant term via n e_n = sum k x_k e_{n-k}."""
    if not x[0].is_zero():
        raise DomainError("exp_series expects zero constant term")
    N = x.order if N is None else N
    with workprec(x.prec):
        e = [acb(1)]
        for n in range(1, N + 1):
            s = acb(0)
            for k in range(1, n + 1):
                xk = x[k]
                if not xk.is_zero():
                    s += k * xk * e[n - k]
            e.append(s / n)
    return UniSeries(tuple(e), x.prec)


def trig_multiple_series(b: UniSeries, d, N: int) -> tuple[UniSeries, UniSeries]:
    """(cos(d*b(r)/2), sin(d*b(r)/2)) as series in r, truncated at N."""
    with workprec(b.prec):
        half = to_acb(d) / 2
        b0 = b[0]
        beta = [acb(0)] + [b[i] * half for i in range(1, N + 1)]
        ip = exp_series(UniSeries(tuple(acb(0, 1) * c for c in beta), b.prec), N)
        im = exp_series(UniSeries(tuple(acb(0, -1) * c for c in beta), b.prec), N)
        e0p = (acb(0, 1) * half * b0).exp()
        e0m = (acb(0, -1) * half * b0).exp()
        cs, ss = [], []
        for i in range(N + 1):
            p, m = e0p * ip[i], e0m * im[i]
            cs.append((p + m) / 2)
            ss.append((p - m) / acb(0, 2))
    return UniSeries(tuple(cs), b.prec), UniSeries(tuple(ss), b.prec)


def trig_half_series(b: UniSeries, kind: str, N: int | None = None) -> UniSeries:
    """Normalized cos(b(r)/2)/cos(b0/2) ('cos_norm') or sin(b(r)/2)/sin(b0/2) ('sin_norm')."""
    from .errors import ResonanceError

    N = b.order if N is None else N
    c, s = trig_multiple_series(b, 1, N)
    if kind == "cos_norm":
        base = c
    elif kind == "sin_norm":
        base = s
    else:
        raise ConfigurationError(f"unknown kind {kind!r}")
    with workprec(b.prec):
        norm = base[0]
        if mag(norm) < 2.0 ** (-b.prec / 2):
            raise ResonanceError(f"{kind}: normalizer vanishes at b0", magnitude=mag(norm))
        cs = [acb(1)] + [base[i] / norm for i in range(1, N + 1)]
    return UniSeries(tuple(cs), b.prec)


def revert(f: UniSeries) -> UniSeries:
    """Compositional inverse of f (f(0)=0, f'(0)!=0) to the truncation order of f."""
    if not f[0].is_zero():
        raise DomainError("revert requires f(0) = 0")
    if f.order < 1 or mag(f[1]) == 0.0:
        raise DomainError("revert requires f'(0) != 0")
    N = f.order
    old_cap = ctx.cap
    try:
        ctx.cap = max(old_cap, N + 1)
        with workprec(f.prec):
            s = acb_series(list(f.coeffs), prec=N + 1).reversion()
            cs = s.coeffs()
    finally:
        ctx.cap = old_cap
        cs = (list(cs) + [acb(0)] * (N + 1))[: N + 1]
    par = "odd" if f.parity == "odd" else "none"
    return f._wrap(cs, par)


def factorial_acb(n: int) -> acb:
    return acb(math.factorial(n))
