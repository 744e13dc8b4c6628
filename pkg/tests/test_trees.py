import math

import pytest
from flint import acb
from hypothesis import given, settings, strategies as st

from gtplab.errors import ConfigurationError, DomainError
from gtplab.recurrence import recurrence_R_exact
from gtplab.series import mag, workprec
from gtplab.solver import ProblemParams, init_q2, solve
from gtplab.trees import (LEAF_KINDS, Tree, TreeCounter, TreeOracle, _vertex_multiplier,
                          circle_count, coefficient_from_trees, count_trees, depth_one_trees,
                          enumerate_trees, is_contributing, leaf_label_sum, order_by_definition,
                          order_of, tree_weight, validate_potential, vertex_count, vertex_stats)

import oracles

PREC = 256
TOL = 2.0 ** (-PREC / 2)


@pytest.fixture(scope="module")
def golden():
    P = ProblemParams.create(q_odd={3: 1, 5: 0.2}, precision=PREC, max_order=10)
    return P, solve(P)


def sample_tree():
    """q18 tree: box[b4, c8, phi52[q8[q4[c4], b2, phi03[q3, c1]]]]."""
    phi03 = Tree("circle", -3, (Tree("diamond", 3), Tree("pentagon", 1)))
    q4 = Tree("box", None, (Tree("pentagon", 4),))
    q8 = Tree("box", None, (q4, Tree("semicircle", 2), phi03))
    phi52 = Tree("circle", 3, (q8,))
    root = Tree("box", None, (Tree("semicircle", 4), Tree("pentagon", 8), phi52))
    return root, phi52, q8, q4, phi03


# ---------------------------------------------------------------------------
# vertex statistics

def test_sample_tree_root_stats():
    root = sample_tree()[0]
    st_ = vertex_stats(root)
    assert (st_.C_q, st_.C_c, st_.delta, st_.s_q, st_.s_c) == (0, 6, -2, 0, 1)
    assert st_.order == 18 == order_of(root)
    assert st_.hidden_10 - st_.hidden_01 == st_.delta
    assert st_.hidden_10 + st_.hidden_01 == st_.C_q + st_.C_c


def test_sample_tree_phi03_stats():
    root, *_, phi03 = sample_tree()
    st_ = vertex_stats(root, phi03)
    assert (st_.C_q, st_.C_c, st_.delta, st_.s_q, st_.s_c) == (2, 1, -3, 0, 0)
    assert st_.order == 3
    assert (st_.hidden_10, st_.hidden_01) == (0, 3)


def test_sample_tree_inner_box_not_contributing():
    # the q8 vertex has C_q + C_c = 2 < |delta| = 4
    root, _, q8, *_ = sample_tree()
    st_ = vertex_stats(root, q8)
    assert (st_.C_q + st_.C_c, st_.delta) == (2, 4)
    assert not st_.valid
    assert not is_contributing(root)
    validate_potential(root)


@pytest.mark.parametrize("v", range(5))
def test_order_definition_matches_inductive(v):
    node = sample_tree()[v]
    assert order_by_definition(node) == order_of(node)


def test_potential_tree_rules():
    with pytest.raises(DomainError):
        validate_potential(Tree("pentagon", 2))
    with pytest.raises(DomainError):
        validate_potential(Tree("box", None, (Tree("diamond", 4), Tree("pentagon", 1))))
    with pytest.raises(DomainError):
        validate_potential(Tree("box", None, (Tree("semicircle", 3), Tree("pentagon", 2))))
    with pytest.raises(DomainError):
        validate_potential(Tree("circle", 1, (Tree("pentagon", 2),)))
    with pytest.raises(ConfigurationError):
        Tree("hexagon", 1)


def test_box_with_same_order_box_child_not_contributing():
    inner = Tree("box", None, (Tree("pentagon", 2),))
    t = Tree("box", None, (inner,))
    assert order_of(t) == order_of(inner) == 2
    assert not is_contributing(t)


def test_tree_dict_roundtrip():
    root = sample_tree()[0]
    assert Tree.from_dict(root.to_dict()) == root


# ---------------------------------------------------------------------------
# counts

@pytest.mark.parametrize("key", sorted(oracles.DEPTH_ONE_CIRCLE))
def test_depth_one_counts(key):
    label, order = key
    assert len(depth_one_trees("circle", label, order)) == oracles.DEPTH_ONE_CIRCLE[key]


@pytest.mark.parametrize("key", sorted(oracles.TREE_COUNTS, key=str))
def test_full_tree_counts(key):
    kind, label, order = key
    assert TreeCounter().count(kind, label, order) == oracles.TREE_COUNTS[key]


def test_counts_symmetric_in_label():
    c = TreeCounter()
    for order in range(2, 8):
        for lab in range(2, order + 1):
            if (order - lab) % 2 == 0:
                assert c.count("circle", lab, order) == c.count("circle", -lab, order)


def test_order_two_enumeration_frozen():
    assert len(enumerate_trees("circle", (1, 1))) == 5
    assert len(enumerate_trees("circle", (2, 0))) == 4
    assert len(enumerate_trees("box", 2)) == 1


def test_enumeration_matches_dp_count():
    for kind, tgt in [("circle", (3, 0)), ("box", 4), ("circle", (2, 2))]:
        assert len(enumerate_trees(kind, tgt)) == count_trees(kind, tgt)


def test_enumeration_guard():
    with pytest.raises(ConfigurationError, match="max_count"):
        enumerate_trees("box", 8, max_count=1000)
    with pytest.raises(ConfigurationError, match="cap"):
        enumerate_trees("box", 12)


# ---------------------------------------------------------------------------
# structural properties of enumerated trees

ENUM_TARGETS = [("circle", (1, 1)), ("circle", (3, 0)), ("box", 4), ("circle", (2, 2)), ("circle", (0, 4))]


@pytest.mark.parametrize("kind,tgt", ENUM_TARGETS)
def test_enumerated_trees_structural_bounds(kind, tgt):
    j = sum(tgt) if kind == "circle" else tgt
    target_label = (tgt[0] - tgt[1]) if kind == "circle" else None
    for t in enumerate_trees(kind, tgt):
        assert is_contributing(t)
        assert order_of(t) == order_by_definition(t) == j
        assert leaf_label_sum(t) <= 3 * j
        assert vertex_count(t) <= 15 * j
        assert leaf_label_sum(t) >= 3 * circle_count(t)
        for u in t.vertices():
            if u is t or u.kind in LEAF_KINDS:
                continue
            o = order_of(u)
            if u.kind == "circle":
                assert (o - u.label) % 2 == 0
                # the target coefficient never appears below the root
                assert not (u.label == target_label and o == j)
            else:
                assert o % 2 == 0
                assert not (kind == "box" and o == j)


def test_dp_bounds_through_order_eight():
    c = TreeCounter()
    for order in range(2, 9):
        for lab in range(-order, order + 1):
            if abs(lab) == 1 or (order - lab) % 2:
                continue
            n, leaf, vert, slack = c.stats("circle", lab, order)
            if n:
                assert leaf <= 3 * order and vert <= 15 * order and slack >= 0
                assert math.log(n) <= 75 * order
        if order % 2 == 0:
            n, leaf, vert, slack = c.stats("box", None, order)
            assert leaf <= 3 * order and vert <= 15 * order and slack >= 0


# ---------------------------------------------------------------------------
# weights and the oracle

def test_q2_tree_weight_is_closed_form():
    P = ProblemParams.create(b0=1.3, precision=PREC, max_order=4)
    t = Tree("box", None, (Tree("pentagon", 2),))
    w = tree_weight(t, P)
    with workprec(PREC):
        ref = (acb(1.3) / 2).tan() ** 2 / 2
    assert mag(w - ref) <= TOL
    assert mag(w - init_q2(P)) <= TOL


def test_q2_explicit_path_matches_tree_sum():
    P = ProblemParams.create(b0=0.9, precision=PREC, max_order=4)
    a = TreeOracle(P, 4, explicit_q2=True).coefficient(("q", 2))
    b = TreeOracle(P, 4, explicit_q2=False).coefficient(("q", 2))
    assert mag(a - b) <= TOL


@pytest.mark.parametrize("kind,tgt", [("circle", (3, 0)), ("box", 4), ("circle", (2, 2)), ("box", 6)])
def test_full_tree_weights_sum_to_solution(golden, kind, tgt):
    P, sol = golden
    with workprec(PREC):
        s = acb(0)
        for t in enumerate_trees(kind, tgt):
            s += tree_weight(t, P)
    ref = sol.q(tgt) if kind == "box" else sol.phi[tgt]
    assert mag(s - ref) <= TOL * max(1.0, mag(ref))


def test_stub_weights_need_lower_values(golden):
    P, sol = golden
    t = depth_one_trees("circle", 3, 3)[0]
    if any(c.is_stub for c in t.children):
        with pytest.raises(DomainError):
            tree_weight(t, P)


@pytest.mark.parametrize("j,sigma", [(3, 1), (4, 1), (5, 1), (5, 2)])
def test_principal_trees_match_recurrence_multiplier(golden, j, sigma):
    # depth-one q_{2j} trees whose only children are the box q_{2j-2sigma} and
    # 2 sigma order-two circles
    P, sol = golden
    d = TreeOracle(P, 10).data
    with workprec(PREC):
        tot = acb(0)
        for t in depth_one_trees("box", None, 2 * j):
            kids = t.children
            if len(kids) != 1 + 2 * sigma or kids[0].kind != "box" or kids[0].order != 2 * j - 2 * sigma:
                continue
            if not all(c.kind == "circle" and c.order == 2 for c in kids[1:]):
                continue
            m, ks = _vertex_multiplier(t, d)
            for c, _ in ks:
                if c.kind == "circle":
                    m *= sol.phi[((2 + c.label) // 2, (2 - c.label) // 2)]
            tot += m
        R = recurrence_R_exact(sigma, j, P)
    assert mag(tot - R) <= TOL * max(1.0, mag(R))


@pytest.mark.parametrize("kw", [
    dict(q_odd={3: 1}),
    dict(q_odd={}),
    dict(b0=1.1, b_higher=[0.2, -0.1], q_odd={3: 1, 5: 0.3}, rotation="1/3"),
])
def test_oracle_equivalence_through_order_six(kw):
    from fractions import Fraction
    kw = dict(kw)
    kw["rotation"] = Fraction(kw.get("rotation", "1/2"))
    P = ProblemParams.create(precision=PREC, max_order=8, **kw)
    sol = solve(P)
    O = TreeOracle(P, 8)
    for n in range(2, 7):
        for j in range(n + 1):
            if abs(2 * j - n) == 1:
                continue
            ref = sol.phi[(j, n - j)]
            assert mag(coefficient_from_trees((j, n - j), P, O) - ref) <= TOL * max(1.0, mag(ref))
    for k in (2, 4, 6):
        assert mag(O.coefficient(("q", k)) - sol.q(k)) <= TOL * max(1.0, mag(sol.q(k)))


def test_oracle_order_limit():
    P = ProblemParams.create(precision=PREC, max_order=4)
    with pytest.raises(ConfigurationError):
        coefficient_from_trees((10, 0), P)
    with pytest.raises(ConfigurationError):
        TreeOracle(P, 12)


@settings(max_examples=10)
@given(st.sampled_from([(2, 0), (1, 1), (3, 0), (0, 3), (2, 2), (4, 0)]))
def test_random_enumerated_tree_is_contributing(tgt):
    for t in enumerate_trees("circle", tgt)[:50]:
        assert is_contributing(t)
        assert order_of(t) == sum(tgt)
