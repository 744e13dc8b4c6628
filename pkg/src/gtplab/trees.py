"""Tree calculus: every term of the triangular system as a weighted ordered tree.

Vertex kinds: circle (phi_jk, label j-k), box (q_2j, no label), diamond
(q_odd, label = index), semicircle (b, b^c or b^s by position, even label),
pentagon (c_j, label j).  Children of a non-leaf vertex are laid out as

    [front semicircles] P1 [P1 semicircles] [P1-side circles, each followed
    by its own semicircles] P2 [P2 semicircles] [P2-side circles ...]

where P1/P2 are the square-kind (box/diamond) and pentagon children.  A
childless circle/box carrying ``order`` is a stub standing for a known
lower coefficient.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product
from typing import Iterator, Optional

from flint import acb, arb

from .errors import ConfigurationError, DomainError
from .series import cos_offset_coeffs, trig_half_series, workprec
from .solver import ProblemParams, init_q2, linear_denominator

KINDS = ("circle", "box", "diamond", "semicircle", "pentagon")
LEAF_KINDS = ("diamond", "semicircle", "pentagon")
SQUARE_KINDS = ("box", "diamond")
MAX_ENUM_ORDER = 10


@dataclass(frozen=True)
class Tree:
    kind: str
    label: Optional[int] = None
    children: tuple = ()
    order: Optional[int] = None  # stubs only

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigurationError(f"unknown vertex kind {self.kind!r}")

    @property
    def is_leaf(self) -> bool:
        return self.kind in LEAF_KINDS

    @property
    def is_stub(self) -> bool:
        return self.kind in ("circle", "box") and not self.children

    def vertices(self):
        yield self
        for c in self.children:
            yield from c.vertices()

    def to_dict(self) -> dict:
        d = {"kind": self.kind}
        if self.label is not None:
            d["label"] = self.label
        if self.order is not None:
            d["order"] = self.order
        if self.children:
            d["children"] = [c.to_dict() for c in self.children]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Tree":
        return cls(d["kind"], d.get("label"), tuple(cls.from_dict(c) for c in d.get("children", ())),
                   d.get("order"))


@dataclass
class VertexStats:
    order: int
    s_q: int
    s_c: int
    C_q: int
    C_c: int
    delta: int
    hidden_10: Optional[int] = None  # x + pentagonal phi10 when unique; None when summed over
    hidden_01: Optional[int] = None
    order_inductive: Optional[int] = None
    first: str = ""             # 'square' or 'pentagon'
    y_q: int = 0
    y_c: int = 0
    valid: bool = True


@dataclass
class _Layout:
    front: list
    square: Optional[Tree] = None
    pent: Optional[Tree] = None
    first: str = ""
    sq_semis: list = field(default_factory=list)
    pe_semis: list = field(default_factory=list)
    sq_circles: list = field(default_factory=list)  # (circle tree, [semis])
    pe_circles: list = field(default_factory=list)


def _layout(v: Tree) -> _Layout:
    ch = list(v.children)
    i = 0
    front = []
    while i < len(ch) and ch[i].kind == "semicircle":
        front.append(ch[i])
        i += 1
    lay = _Layout(front)
    side = None
    cur_circle = None
    while i < len(ch):
        c = ch[i]
        if c.kind in SQUARE_KINDS or c.kind == "pentagon":
            is_sq = c.kind in SQUARE_KINDS
            if (is_sq and lay.square is not None) or (not is_sq and lay.pent is not None):
                raise DomainError("vertex has two children of the same polygon type")
            if is_sq:
                lay.square = c
            else:
                lay.pent = c
            if not lay.first:
                lay.first = "square" if is_sq else "pentagon"
            side = "sq" if is_sq else "pe"
            cur_circle = None
        elif c.kind == "semicircle":
            if side is None:
                raise DomainError("semicircle placement is ambiguous")
            if cur_circle is not None:
                cur_circle[1].append(c)
            else:
                (lay.sq_semis if side == "sq" else lay.pe_semis).append(c)
        elif c.kind == "circle":
            if side is None:
                raise DomainError("first non-semicircle child must be a polygon")
            cur_circle = (c, [])
            (lay.sq_circles if side == "sq" else lay.pe_circles).append(cur_circle)
        else:
            raise DomainError(f"unexpected child kind {c.kind}")
        i += 1
    if not lay.first:
        raise DomainError("non-leaf vertex without a polygon child")
    return lay


def _poly_order(t: Optional[Tree]) -> int:
    if t is None:
        return 0
    if t.kind == "box":
        return order_of(t)
    return t.label


def order_of(v: Tree) -> int:
    """Order by the inductive (hidden-vertex) method."""
    if v.kind in LEAF_KINDS:
        return v.label
    if v.is_stub:
        if v.order is None:
            raise DomainError("stub vertex without an order")
        return v.order
    return _stats_core(v).order_inductive


def order_by_definition(v: Tree) -> int:
    """Sum of leaf labels in the subtree minus twice the circle count (root counts one half)."""
    leaves = 0
    circles = 0
    for u in v.vertices():
        if u.kind in LEAF_KINDS:
            leaves += u.label
        elif u.is_stub:
            # stub: contributes its order as if expanded
            leaves += u.order + (1 if u.kind == "circle" else 0)
            if u.kind == "circle":
                circles += 1
            continue
        if u.kind == "circle" and not u.is_stub:
            circles += 1
    res = leaves - 2 * circles
    if v.kind == "circle":
        res += 1
    return res


def _stats_core(v: Tree) -> VertexStats:
    lay = _layout(v)
    beta = _poly_order(lay.square)
    gamma = _poly_order(lay.pent)
    if lay.first == "square":
        nA, nB = beta - 1, gamma
    else:
        nA, nB = beta, gamma - 1
    s_q, s_c = len(lay.sq_circles), len(lay.pe_circles)
    C_q, C_c = nA - s_q, nB - s_c
    lab = 1 if v.kind == "box" else v.label
    delta = lab - sum(c.label for c, _ in lay.sq_circles + lay.pe_circles)
    semis = sum(s.label for s in v.children if s.kind == "semicircle")
    circ = sum(order_of(c) for c, _ in lay.sq_circles + lay.pe_circles)
    od = circ + semis + C_q + C_c + (1 if v.kind == "box" else 0)
    st = VertexStats(order=od, s_q=s_q, s_c=s_c, C_q=C_q, C_c=C_c, delta=delta,
                     order_inductive=od, first=lay.first, y_q=len(lay.sq_semis), y_c=len(lay.pe_semis))
    tot = C_q + C_c
    if C_q < 0 or C_c < 0 or (tot + delta) % 2 or abs(delta) > tot:
        st.valid = False
    else:
        st.hidden_10 = (tot + delta) // 2
        st.hidden_01 = (tot - delta) // 2
    return st


def vertex_stats(tree: Tree, vertex: Tree | None = None) -> VertexStats:
    v = tree if vertex is None else vertex
    if v.kind in LEAF_KINDS or v.is_stub:
        raise DomainError("statistics are defined for expanded non-leaf vertices")
    st = _stats_core(v)
    st.order = order_by_definition(v)
    return st


def validate_potential(tree: Tree) -> None:
    """Raise DomainError if the tree violates the potential-tree definition."""
    if tree.kind not in ("circle", "box"):
        raise DomainError("root must be a circle or a box")
    for u in tree.vertices():
        if u.kind in LEAF_KINDS:
            if u.children:
                raise DomainError(f"{u.kind} must be a leaf")
            if u.label is None or u.label <= 0:
                raise DomainError("leaf labels are positive integers")
            if u.kind == "diamond" and (u.label % 2 == 0 or u.label < 3):
                raise DomainError("diamond labels are odd and >= 3")
            if u.kind == "semicircle" and u.label % 2:
                raise DomainError("semicircle labels are even")
        else:
            if u.kind == "circle" and (u.label is None or abs(u.label) == 1):
                raise DomainError("circle labels have |label| != 1")
            if not u.children:
                if u.order is None:
                    raise DomainError("squares and circles cannot be leaves")
                continue
            _layout(u)


def is_contributing(tree: Tree) -> bool:
    try:
        validate_potential(tree)
    except DomainError:
        return False
    for u in tree.vertices():
        if u.kind in LEAF_KINDS or u.is_stub:
            continue
        st = _stats_core(u)
        if not st.valid:
            return False
        od = st.order_inductive
        if od < 2:
            return False
        if u.kind == "circle" and (od - u.label) % 2:
            return False
        if u.kind == "circle" and abs(u.label) > od:
            return False
        lay = _layout(u)
        for c in u.children:
            if c.kind in ("circle", "box"):
                co = order_of(c)
                if co < 2:
                    return False
                if u.kind == "box" and c.kind == "box" and co == od:
                    return False
                if u.kind == "box" and c.kind == "circle" and co == od - 1:
                    return False
                if u.kind == "circle" and c.kind == "circle" and co == od:
                    return False
        if st.y_q > st.C_q or st.y_c > st.C_c:
            return False
        if lay.square is None and (lay.sq_semis or lay.sq_circles):
            return False
    return True


# ---------------------------------------------------------------------------
# weights

class _Data:
    """Leaf values and trigonometric constants for one parameter set."""

    def __init__(self, params: ProblemParams, order: int):
        self.params = params
        self.prec = params.precision
        L = order + 2
        with workprec(self.prec):
            self.b = params.b
            self.bc = trig_half_series(params.b.truncate(max(L, 1)), "cos_norm", L)
            self.bs = trig_half_series(params.b.truncate(max(L, 1)), "sin_norm", L)
            self.c = cos_offset_coeffs(params.alpha, L + 2, self.prec)
            self.theta = params.b0 / 2
            self.ct, self.st = self.theta.cos(), self.theta.sin()
            self.ca = params.alpha.cos()
            self.I = acb(0, 1)
        self._tay = {}

    def taylor(self, fn: str, l: int, m: int) -> acb:
        """m-th Taylor coefficient of cos/sin at l*b0/2, times (l/2)^m."""
        key = (fn, l, m)
        if key not in self._tay:
            with workprec(self.prec):
                shift = l * self.theta + arb.pi() * m / 2
                v = shift.cos() if fn == "cos" else shift.sin()
                v = v / math.factorial(m) * (acb(l) / 2) ** m
            self._tay[key] = v
        return self._tay[key]

    def leaf(self, t: Tree, semi_kind: str = "b") -> acb:
        if t.kind == "diamond":
            return self.params.q_odd[t.label]
        if t.kind == "pentagon":
            return self.c[t.label]
        if t.kind == "semicircle":
            idx = t.label // 2
            src = {"b": self.b, "bc": self.bc, "bs": self.bs}[semi_kind]
            return src[idx]
        raise DomainError(f"{t.kind} is not a leaf")


def _combinatorial(st: VertexStats, d: _Data) -> acb:
    tot = st.C_q + st.C_c
    if st.C_q < 0 or st.C_c < 0 or (tot + st.delta) % 2 or abs(st.delta) > tot:
        return acb(0)
    h10 = (tot + st.delta) // 2
    base = (math.comb(st.C_q + st.s_q, st.s_q) * math.comb(st.C_c + st.s_c, st.s_c)
            * math.comb(st.C_q, st.y_q) * math.comb(st.C_c, st.y_c))
    s = 0
    for x in range(0, st.C_q + 1):
        px = h10 - x
        if px < 0 or px > st.C_c:
            continue
        p01 = (st.C_c - st.C_q - st.delta) // 2 + x
        s += math.comb(st.C_q, x) * math.comb(st.C_c, px) * (-1) ** p01
    with workprec(d.prec):
        return acb(base * s) * d.ct ** st.C_q * d.st ** st.C_c


def _base(v: Tree, lay: _Layout, st: VertexStats, d: _Data) -> acb:
    with workprec(d.prec):
        lab = 1 if v.kind == "box" else v.label
        beta = _poly_order(lay.square)
        gamma = _poly_order(lay.pent)
        term1 = lay.first == "square"
        B = acb(beta if term1 else -gamma)
        B *= d.I ** gamma
        B *= d.taylor("cos" if term1 else "sin", lab, len(lay.front))
        for c, sem in lay.sq_circles:
            B *= d.taylor("cos", c.label, len(sem))
        for c, sem in lay.pe_circles:
            B *= d.taylor("sin", c.label, len(sem))
        if lay.pent is None:
            B *= d.ca
        return B


def _linear(v: Tree, order: int, params: ProblemParams) -> acb:
    with workprec(params.precision):
        if v.kind == "box":
            j = order // 2
            return -1 / linear_denominator(j, j - 1, params)
        l = v.label
        jj, kk = (order + l) // 2, (order - l) // 2
        return -1 / linear_denominator(jj, kk, params)


def _vertex_multiplier(v: Tree, d: _Data) -> tuple[acb, list]:
    """Weight multiplier of v and the list of (child, semicircle kind) leaves/children."""
    lay = _layout(v)
    st = _stats_core(v)
    with workprec(d.prec):
        m = _base(v, lay, st, d) * _combinatorial(st, d) * _linear(v, st.order_inductive, d.params)
    kids = [(s, "b") for s in lay.front]
    for poly, semis, circles, kind in ((lay.square, lay.sq_semis, lay.sq_circles, "bc"),
                                       (lay.pent, lay.pe_semis, lay.pe_circles, "bs")):
        if poly is None:
            continue
        kids.append((poly, None))
        kids.extend((s, kind) for s in semis)
        for c, sem in circles:
            kids.append((c, None))
            kids.extend((s, "b") for s in sem)
    return m, kids


def tree_weight(tree: Tree, params: ProblemParams, lower_coeffs: dict | None = None,
                _data: _Data | None = None) -> acb:
    """Product over non-leaf vertices of base x combinatorial x linear multipliers, times leaf weights.

    Stub circles/boxes take their value from ``lower_coeffs`` keyed by
    ('phi', j, k) or ('q', 2j).
    """
    d = _data or _Data(params, max(order_of(tree), 2))
    with workprec(params.precision):
        return _weight_rec(tree, d, lower_coeffs or {})


def _weight_rec(v: Tree, d: _Data, lower: dict) -> acb:
    if v.is_stub:
        o = v.order
        key = ("q", o) if v.kind == "box" else ("phi", (o + v.label) // 2, (o - v.label) // 2)
        if key not in lower:
            raise DomainError(f"no value supplied for stub {key}")
        return lower[key]
    m, kids = _vertex_multiplier(v, d)
    w = m
    for c, sk in kids:
        if c.kind in ("circle", "box"):
            w *= _weight_rec(c, d, lower)
        else:
            w *= d.leaf(c, sk)
    return w


# ---------------------------------------------------------------------------
# enumeration of depth-one trees

def _compositions(n: int, maxlen: int | None = None):
    """Ordered tuples of positive integers summing to n (empty tuple for n = 0)."""
    if n == 0:
        yield ()
        return
    if maxlen == 0:
        return
    for first in range(1, n + 1):
        for rest in _compositions(n - first, None if maxlen is None else maxlen - 1):
            yield (first,) + rest


def _weak(n: int, k: int):
    """Weak compositions of n into k parts."""
    if k == 0:
        if n == 0:
            yield ()
        return
    if k == 1:
        yield (n,)
        return
    for first in range(n + 1):
        for rest in _weak(n - first, k - 1):
            yield (first,) + rest


def _circle_options(max_order: int, exclude_order: int | None):
    out = []
    for o in range(2, max_order + 1):
        if o == exclude_order:
            continue
        for lab in range(-o, o + 1, 2):
            if abs(lab) == 1:
                continue
            out.append((o, lab))
    return out


def _root_info(kind: str, label: int | None, order: int):
    if kind == "box":
        if order % 2 or order < 2:
            raise DomainError("box orders are even and >= 2")
        return 1, order - 1
    if kind == "circle":
        if abs(label) == 1 or (order - label) % 2 or abs(label) > order or order < 2:
            raise DomainError(f"invalid circle target label={label} order={order}")
        return label, order
    raise DomainError("root must be a circle or a box")


def depth_one_trees(kind: str, label: int | None, order: int) -> list:
    """All contributing depth-one trees (children are leaves or stubs) for one root."""
    lab, D = _root_info(kind, label, order)
    res = []
    for term in (1, 2):
        for nA in range(0, D + 1):
            for nB in range(0, D + 1 - nA):
                if term == 1:
                    beta, gamma = nA + 1, nB
                    if beta < 2:
                        continue
                else:
                    beta, gamma = nA, nB + 1
                    if beta == 1:
                        continue
                if kind == "box" and beta == order:
                    continue
                sq = None
                if beta >= 2:
                    sq = Tree("box", order=beta) if beta % 2 == 0 else (
                        Tree("diamond", beta) if beta >= 3 else None)
                    if sq is None:
                        continue
                pe = Tree("pentagon", gamma) if gamma >= 1 else None
                for s_q in range(0, nA + 1):
                    for s_c in range(0, nB + 1):
                        if sq is None and s_q:
                            continue
                        C_q, C_c = nA - s_q, nB - s_c
                        E = D - C_q - C_c
                        if E < 0:
                            continue
                        res.extend(_fill(kind, lab, order, term, sq, pe, s_q, s_c, C_q, C_c, E))
    return res


def _fill(kind, lab, order, term, sq, pe, s_q, s_c, C_q, C_c, E):
    excl = order if kind == "circle" else order - 1
    maxo = order - 1 if kind == "circle" else order - 2
    opts = _circle_options(maxo, excl)
    ncirc = s_q + s_c
    out = []
    for circs in _circle_seqs(opts, ncirc, E):
        co = sum(o for o, _ in circs)
        S = E - co
        if S < 0 or S % 2:
            continue
        delta = lab - sum(l for _, l in circs)
        tot = C_q + C_c
        if abs(delta) > tot or (tot + delta) % 2:
            continue
        # distribute S/2 semicircle units over groups: front, sq-semis, pe-semis, per circle
        ngroups = 3 + ncirc
        for dist in _weak(S // 2, ngroups):
            if dist[1] and sq is None:
                continue
            if dist[2] and pe is None:
                continue
            groups = [list(_compositions(u)) for u in dist]
            groups[1] = [g for g in groups[1] if len(g) <= C_q]
            groups[2] = [g for g in groups[2] if len(g) <= C_c]
            if not groups[1] or not groups[2]:
                continue
            for choice in product(*groups):
                out.append(_assemble(kind, lab, term, sq, pe, circs[:s_q], circs[s_q:], choice))
    return out


def _circle_seqs(opts, n, budget):
    """Ordered sequences of n circle options with total order <= budget."""
    if n == 0:
        yield ()
        return
    for o, l in opts:
        if o + 2 * (n - 1) > budget:
            continue
        for rest in _circle_seqs(opts, n - 1, budget - o):
            yield ((o, l),) + rest


def _assemble(kind, lab, term, sq, pe, sq_circs, pe_circs, choice):
    semi = lambda g: [Tree("semicircle", 2 * u) for u in g]
    front, sqs, pes = choice[0], choice[1], choice[2]
    per = choice[3:]
    ch = semi(front)
    blocks = []
    k = 0
    sq_block = []
    if sq is not None:
        sq_block = [sq] + semi(sqs)
        for o, l in sq_circs:
            sq_block += [Tree("circle", l, order=o)] + semi(per[k])
            k += 1
    pe_block = []
    if pe is not None:
        pe_block = [pe] + semi(pes)
        for o, l in pe_circs:
            pe_block += [Tree("circle", l, order=o)] + semi(per[k])
            k += 1
    blocks = sq_block + pe_block if term == 1 else pe_block + sq_block
    return Tree(kind, None if kind == "box" else lab, tuple(ch + blocks))


# ---------------------------------------------------------------------------
# oracle: coefficient values from tree sums

def _target_key(target):
    """('q', 2j) / ('phi', j, k) / (j, k) / 2n -> (kind, label, order)."""
    if isinstance(target, int):
        return "box", None, target
    if isinstance(target, tuple) and target and target[0] == "q":
        return "box", None, int(target[1])
    if isinstance(target, tuple) and target and target[0] == "phi":
        target = target[1:]
    j, k = target
    return "circle", j - k, j + k


class TreeOracle:
    """Memoized tree-sum evaluation of q_{2j} and phi_{j,k} for one parameter set."""

    def __init__(self, params: ProblemParams, max_order: int = 8, explicit_q2: bool = True):
        if max_order > MAX_ENUM_ORDER:
            raise ConfigurationError(f"tree oracle limited to order {MAX_ENUM_ORDER}")
        self.params = params
        self.max_order = max_order
        self.explicit_q2 = explicit_q2
        self.data = _Data(params, max_order + 2)
        self.memo = {}
        self.d1 = {}

    def depth_one(self, kind, label, order):
        key = (kind, label, order)
        if key not in self.d1:
            self.d1[key] = depth_one_trees(kind, label, order)
        return self.d1[key]

    def value(self, kind, label, order) -> acb:
        key = (kind, label if kind == "circle" else None, order)
        if key in self.memo:
            return self.memo[key]
        P = self.params
        with workprec(P.precision):
            if kind == "box" and order == 2 and self.explicit_q2:
                v = init_q2(P)
            else:
                v = acb(0)
                for t in self.depth_one(kind, label, order):
                    v += self._eval_depth_one(t)
        self.memo[key] = v
        return v

    def _eval_depth_one(self, t: Tree) -> acb:
        m, kids = _vertex_multiplier(t, self.data)
        if m.is_zero():
            return m
        w = m
        for c, sk in kids:
            if c.kind == "circle":
                w *= self.value("circle", c.label, c.order)
            elif c.kind == "box":
                w *= self.value("box", None, c.order)
            else:
                w *= self.data.leaf(c, sk)
        return w

    def coefficient(self, target) -> acb:
        kind, label, order = _target_key(target)
        if order > self.max_order + 1:
            raise ConfigurationError(f"target order {order} exceeds oracle limit")
        _root_info(kind, label, order)
        return self.value(kind, label, order)


def coefficient_from_trees(target, params: ProblemParams, oracle: TreeOracle | None = None) -> acb:
    """Value of q_{2j} (target ('q', 2j)) or phi_{j,k} (target (j, k)) as a sum over contributing trees."""
    kind, label, order = _target_key(target)
    if order > 8 + 1:
        raise ConfigurationError("coefficient_from_trees supports orders <= 8")
    oracle = oracle or TreeOracle(params, max(order, 2))
    return oracle.coefficient(target)


# ---------------------------------------------------------------------------
# full enumeration and structural statistics

class TreeCounter:
    """Counts and structural extremes over full contributing trees, by dynamic programming."""

    def __init__(self):
        self.memo = {}
        self.d1 = {}

    def _d1(self, kind, label, order):
        key = (kind, label, order)
        if key not in self.d1:
            self.d1[key] = depth_one_trees(kind, label, order)
        return self.d1[key]

    def stats(self, kind, label, order):
        """(count, max leaf-label sum, max vertex count, min of leaf sum - 3*circles)."""
        key = (kind, label if kind == "circle" else None, order)
        if key in self.memo:
            return self.memo[key]
        total = 0
        mx_leaf = mx_vert = -1
        mn_slack = None
        for t in self._d1(kind, label, order):
            cnt, leaf, vert = 1, 0, 1
            slack = -3 if kind == "circle" else 0
            for c in t.children:
                if c.kind in LEAF_KINDS:
                    leaf += c.label
                    slack += c.label
                    vert += 1
                else:
                    sc, sl, sv, ss = self.stats(c.kind, c.label, c.order)
                    cnt *= sc
                    if sc == 0:
                        break
                    leaf += sl
                    vert += sv
                    slack += ss
            if cnt == 0:
                continue
            total += cnt
            mx_leaf = max(mx_leaf, leaf)
            mx_vert = max(mx_vert, vert)
            mn_slack = slack if mn_slack is None else min(mn_slack, slack)
        self.memo[key] = (total, mx_leaf, mx_vert, mn_slack)
        return self.memo[key]

    def count(self, kind, label, order) -> int:
        return self.stats(kind, label, order)[0]


def _expand(t: Tree, cache: dict) -> Iterator[Tree]:
    """All full trees obtained by expanding the stubs of a depth-one tree."""
    options = []
    for c in t.children:
        if c.is_stub:
            options.append(list(_full_trees(c.kind, c.label, c.order, cache)))
        else:
            options.append([c])
    for combo in product(*options):
        yield Tree(t.kind, t.label, tuple(combo))


def _full_trees(kind, label, order, cache):
    key = (kind, label if kind == "circle" else None, order)
    if key not in cache:
        out = []
        for t in depth_one_trees(kind, label, order):
            out.extend(_expand(t, cache))
        cache[key] = out
    return cache[key]


def _resolve_target(root_kind, target):
    if root_kind == "box":
        return "box", None, int(target[-1] if isinstance(target, tuple) else target)
    if root_kind == "circle":
        j, k = target
        return "circle", j - k, j + k
    raise ConfigurationError("root_kind must be 'circle' or 'box'")


def count_trees(root_kind: str, target) -> int:
    kind, label, order = _resolve_target(root_kind, target)
    _root_info(kind, label, order)
    return TreeCounter().count(kind, label, order)


def enumerate_trees(root_kind: str, target, max_order: int = MAX_ENUM_ORDER,
                    max_count: int = 200_000) -> list:
    """All full contributing trees for a target: (j,k) for circles, 2n for boxes.

    Refuses (ConfigurationError carrying the exact count) when the order
    exceeds ``max_order`` or the number of trees exceeds ``max_count``.
    """
    kind, label, order = _resolve_target(root_kind, target)
    _root_info(kind, label, order)
    cap = min(max_order, MAX_ENUM_ORDER)
    if order > cap:
        raise ConfigurationError(f"enumeration refused: order {order} above cap {cap}")
    n = TreeCounter().count(kind, label, order)
    if n > max_count:
        raise ConfigurationError(f"enumeration refused: {n} trees exceed max_count={max_count}")
    return list(_full_trees(kind, label, order, {}))


def leaf_label_sum(t: Tree) -> int:
    return sum(u.label for u in t.vertices() if u.kind in LEAF_KINDS)


def vertex_count(t: Tree) -> int:
    return sum(1 for _ in t.vertices())


def circle_count(t: Tree) -> int:
    return sum(1 for u in t.vertices() if u.kind == "circle")
