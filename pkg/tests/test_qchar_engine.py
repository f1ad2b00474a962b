from math import comb

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import sympy_oracle as O
from twistq.lweights import SpectralParam, fold_char, resolve
from twistq.qchar_engine import (
    TermBudgetExceeded,
    a_factorization,
    cone_decomposition,
    fm_qcharacter,
    kr_monomial,
    kr_qcharacter,
    neg_prefund_qchar,
    normalized_X_qchar,
    parse_monomial,
    pos_prefund_qchar,
)

A2, A2T = resolve("A2"), resolve("A2^2")
ONE = SpectralParam(0, 0)


def tableaux(k, start, h=None):
    return O.counter_of([(c, 1) for c, ht in O.kr_sl3_tableaux(k, start) if h is None or ht <= h])


def test_sl3_fundamental_three_terms():
    ch = fm_qcharacter(A2, "Y[1,1]", 5)
    assert ch.total() == 3 and len(ch.terms) == 3
    assert O.char_to_counter(ch) == tableaux(1, 1)


def test_trunc_zero_keeps_only_top():
    ch = fm_qcharacter(A2, "Y[1,1]", 0)
    assert list(ch.terms.values()) == [1]
    assert next(iter(ch.terms)) == parse_monomial("Y[1,1]").lweight(A2)


@pytest.mark.parametrize("k", [2, 3])
def test_sl3_kr_matches_tableaux(k):
    ch = kr_qcharacter(A2, 1, k, "q^-2", 3 * k)
    assert O.char_to_counter(ch) == tableaux(k, O.q**-2)
    assert ch.total() == comb(k + 2, 2)


def test_generic_product_total():
    assert fm_qcharacter(A2, "Y[1,1]*Y[2,-q^2]", 6).total() == 9


def test_twisted_kr():
    ch = kr_qcharacter(A2T, 1, 2, "1", 8)
    assert ch.total() == 6
    one = kr_qcharacter(A2T, 1, 1, "1", 4)
    assert one == fold_char(fm_qcharacter(A2, "Y[1,1]", 4), A2T)
    assert O.char_to_counter(one) == O.counter_of([(O.fold_sl3(c), 1) for c, _ in O.kr_sl3_tableaux(1, 1)])


def test_kr_rejects_k_zero():
    with pytest.raises(ValueError):
        kr_qcharacter(A2, 1, 0, "1", 3)


def test_budget_overflow():
    with pytest.raises(TermBudgetExceeded):
        kr_qcharacter(A2, 1, 4, "1", 10, budget=5)


def _sl3_neg_oracle(h):
    # normalized KR tableaux with k large enough to be stable below height h
    k = h + 2
    start = O.s ** (2 - 4 * k)
    top = O.mul(*[O.Y(1, start * O.q ** (2 * p)) for p in range(k)])
    psi = (1 / (1 - O.u), O.sp.Integer(1))
    return O.counter_of([(O.mul(c, O.inv(top), psi), 1) for c, ht in O.kr_sl3_tableaux(k, start) if ht <= h])


def test_neg_prefund_sl3_against_tableau_limit():
    h = 4
    ch, k = neg_prefund_qchar(A2, 1, "1", h, report=True)
    assert O.char_to_counter(ch) == _sl3_neg_oracle(h)
    assert k <= h + 2


def test_neg_prefund_twisted_closed_form():
    h = 5
    got = fold_char(neg_prefund_qchar(A2, 1, "1", h).normalized(), A2T)
    assert O.char_to_counter(got) == O.normalize_tw(O.neg_prefund_B1(h), h)


def test_neg_prefund_trunc_zero():
    ch = neg_prefund_qchar(A2, 1, "1", 0)
    assert len(ch.terms) == 1
    (w,) = ch.terms
    assert O.lweight_to_sympy(w) == (1 / (1 - O.u), 1)


def test_prefund_usual_characters_agree():
    h = 5
    neg = neg_prefund_qchar(A2, 1, "1", h)
    pos = pos_prefund_qchar(A2, 1, "1", h)
    assert neg.usual() == pos.usual()


def test_pos_prefund_coefficients():
    h = 6
    pos = fold_char(pos_prefund_qchar(A2, 1, "1", h), A2T)
    by = pos.by_height()
    assert [sum(by[k].values()) for k in range(h + 1)] == [k // 2 + 1 for k in range(h + 1)]
    assert [len(by[k]) for k in range(h + 1)] == [1] * (h + 1)
    assert O.char_to_counter(pos) == O.counter_of(O.pos_prefund_B2(h))
    norm = pos.normalized()
    assert len(norm.terms) == 1 and O.char_to_counter(norm) == O.counter_of([(O.psi_tw(1), 1)])


def test_normalized_x_twisted():
    h = 6
    got = normalized_X_qchar(A2T, 1, "1", h)
    assert O.char_to_counter(got) == O.normalize_tw(O.x_B3(h), h)
    assert O.char_to_counter(normalized_X_qchar(A2T, 1, "1", 0)) == O.counter_of([(O.psi_tilde_tw(1), 1)])


def test_normalized_x_folds():
    h = 5
    assert fold_char(normalized_X_qchar(A2, 1, "1", h), A2T) == normalized_X_qchar(A2T, 1, "1", h)


def test_parse_monomial_error_column():
    with pytest.raises(ValueError, match="column 8"):
        parse_monomial("Y[1,1]*X[2,q]")


def test_parse_monomial_roundtrip():
    m = parse_monomial("Y[1,q^-1]*Y[2,-q^2]^2")
    assert parse_monomial(m.render("Y")) == m


def test_a_factorization_rejects_non_cone():
    assert a_factorization(A2, parse_monomial("Y[1,1]").lweight(A2)) is None


# --- properties ------------------------------------------------------------------

kr_args = st.tuples(
    st.sampled_from([1, 2]),
    st.integers(1, 3),
    st.builds(SpectralParam.make, st.integers(-4, 4).map(lambda n: 2 * n), st.sampled_from([0, 3])),
)


def _s1(v):
    return (-v[0], v[1] + v[0])


def _s2(v):
    return (v[0] + v[1], -v[1])


@settings(max_examples=20, deadline=None)
@given(kr_args)
def test_kr_finite_properties(args):
    i, k, a = args
    ch = kr_qcharacter(A2, i, k, a, 2 * k)
    assert ch.total() == comb(k + 2, 2)
    # every term lies in the A^{-1} cone of the top
    dec = cone_decomposition(ch)
    top = kr_monomial(i, k, a).lweight(A2)
    for w, fac in dec.items():
        assert len(fac) == ch.height(w)
    # Weyl-group symmetry of the ordinary character
    weights = sorted(tuple(int(x) for x in w.const) for w, m in ch.terms.items() for _ in range(m))
    assert sorted(_s1(v) for v in weights) == weights
    assert sorted(_s2(v) for v in weights) == weights
    assert ch.leading() == [(top, 1)]


@settings(max_examples=20, deadline=None)
@given(kr_args)
def test_fold_preserves_total_and_twist(args):
    i, k, a = args
    ch = kr_qcharacter(A2, i, k, a, 2 * k)
    f = fold_char(ch, A2T)
    assert f.total() == ch.total()
    assert all(w.satisfies_twist() for w in f.terms)


def test_deterministic():
    a = kr_qcharacter(A2T, 1, 2, "q", 6).to_json()
    b = kr_qcharacter(A2T, 1, 2, "q", 6).to_json()
    assert a == b
