import json
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from twistq.identities import (
    bethe_equations,
    degenerate_bethe_check,
    eval_Q,
    eval_Qtilde,
    numeric_consistency,
    qq_rhs_factors,
    qq_sides,
    tq_relation,
    verify_counterexamples,
    verify_qq,
)
from twistq.lweights import SpectralParam, alpha_weight, fold_char, make_psi_tilde, resolve
from twistq.repcheck import load_builtin, qchar_from_module

A2T, A3T, D43 = resolve("A2^2"), resolve("A3^2"), resolve("D4^3")
ONE = SpectralParam(0, 0)
NEG = SpectralParam(0, 3)


def test_eval_q_single_term():
    ch = eval_Q(A3T, 1, "q", 4)
    assert list(ch.terms.values()) == [1]


def test_eval_qtilde_trunc_zero():
    ch = eval_Qtilde(A2T, 1, "q^2", 0)
    want = alpha_weight(A2T, 1, Fraction(-1, 2)) * make_psi_tilde(A2T, 1, ONE)
    assert ch.terms == {want: 1}


def test_eval_qtilde_matches_module_and_fold():
    h = 5
    tw = eval_Qtilde(A2T, 1, "q^2", h)
    x = qchar_from_module(load_builtin("X_A2t", h + 3)).window(h)
    assert tw * alpha_weight(A2T, 1, Fraction(1, 2)) == x
    assert fold_char(eval_Qtilde(resolve("A2"), 1, "q^2", h), A2T) == tw


def test_rhs_factor_examples():
    # A2^(2): the single orbit couples to itself at -a
    assert qq_rhs_factors(A2T, 1) == [(1, NEG)]
    # D4^(3) centre: three factors at a, a w, a w^2
    assert qq_rhs_factors(D43, 2) == [(1, ONE), (1, SpectralParam(0, 2)), (1, SpectralParam(0, 4))]
    # A3^(2): non-fixed node sees the fixed node once, the fixed node sees both of +-a
    assert qq_rhs_factors(A3T, 1) == [(2, ONE)]
    assert qq_rhs_factors(A3T, 2) == [(1, ONE), (1, NEG)]


def test_qq_trunc_zero():
    lhs, rhs = qq_sides(A2T, 1, "1", 0)
    assert lhs == rhs


def test_qq_sign_flip_detected():
    lhs, rhs = qq_sides(A2T, 1, "1", 3)
    assert lhs == rhs
    r = verify_qq(A2T, 1, "1", 3)
    assert r["status"] == "pass"
    assert (-lhs) != rhs


@pytest.mark.parametrize("tw, base, i", [("A3^2", "A3", 1), ("D4^3", "D4", 1), ("D4^3", "D4", 2), ("A2^2", "A2", 1)])
def test_twisted_qq_is_folded(tw, base, i):
    fd = resolve(tw)
    l0, r0 = qq_sides(base, i, "1", 4)
    l1, r1 = qq_sides(fd, i, "1", 4)
    assert fold_char(l0, fd) == l1 and fold_char(r0, fd) == r1


@settings(max_examples=25, deadline=None)
@given(
    st.sampled_from(["A2^2", "A3^2", "D3^2", "D4^3"]),
    st.builds(SpectralParam.make, st.integers(-4, 4), st.integers(0, 5)),
    st.integers(0, 3),
    st.data(),
)
def test_qq_holds_for_any_parameter(name, a, trunc, data):
    fd = resolve(name)
    i = data.draw(st.sampled_from(fd.reps))
    assert verify_qq(fd, i, a, trunc)["status"] == "pass"


def test_tq_render_a2_twisted():
    t = tq_relation(A2T, 1, "1")
    text = t.render()
    assert text.startswith("[V_{1,1}] = ")
    assert text.count(" + ") == 2
    lhs, rhs = t.evaluate(4)
    assert lhs == rhs
    assert t.render_cleared().startswith("[V_{1,1}]*[L+_")


def test_tq_single_term():
    t = tq_relation(A2T, 1, "1", trunc=0)
    assert len(t.terms) == 1
    assert t.render() == "[V_{1,1}] = [omega_1]*[L+_{1,q^-1}]/([L+_{1,q}])"


def test_tq_a3_twisted_evaluates():
    lhs, rhs = tq_relation(A3T, 1, "1").evaluate(4)
    assert lhs == rhs


def test_canonical_is_idempotent():
    t = tq_relation(A3T, 1, "1")
    assert t.canonical().terms == t.terms


def test_counterexamples():
    rep = verify_counterexamples()
    assert [r["status"] for r in rep] == ["pass"] * 3
    assert (rep[0]["twisted"], rep[0]["untwisted"]) == (6, 9)
    assert rep[1]["first_difference"]


def test_bethe_relabeling_invariance():
    assert bethe_equations(A3T, 3) == bethe_equations(A3T, 1)
    assert bethe_equations(D43, 4).render() == bethe_equations(D43, 1).render()


def test_bethe_fixed_node_d43():
    text = bethe_equations(D43, 2).render()
    assert text.startswith("-u_2^-2 * Q_2(a0*q^2)/Q_2(a0*q^-2) = ")
    for c in ("", "*w^2", "*w^4"):
        assert f"Q_1(a0*q^1{c})/Q_1(a0*q^-1{c})" in text


def test_bethe_json():
    j = bethe_equations(A3T, 2).to_json()
    assert json.loads(json.dumps(j)) == j
    assert j["rhs"] == [[1, 0, 0], [1, 0, 3]]


def test_degenerate_bethe():
    lhs, rhs = degenerate_bethe_check(A3T, 1)
    assert lhs == -1 and rhs == 1


def test_numeric_consistency():
    assert numeric_consistency(A3T, 2) < 1e-20
