import itertools

import pytest
from gmpy2 import mpq
from hypothesis import given, settings
from hypothesis import strategies as st

from feynmzv import mzv
from feynmzv.errors import UnresolvedConstantError
from feynmzv.mzv import (MZV_ONE, MZV_ZERO, MZVExpr, all_words,
                         composition_to_word, convergent_words, format_mzv,
                         free_words, is_convergent, normal_form, normal_table,
                         reg_infinity_word, shuffle, shuffle_regularize,
                         stuffle, weight, word_to_composition, zeta,
                         zeta_infinity, zeta_word)


def W(text):
    return tuple(int(c) for c in text)


# ---------------------------------------------------------------------------
# words and compositions


def test_word_composition_round_trip():
    assert word_to_composition(W("01")) == (2,)
    assert word_to_composition(W("011")) == (1, 2)
    assert word_to_composition(W("00101")) == (2, 3)
    assert composition_to_word((2, 3)) == W("00101")
    assert composition_to_word((1, 2)) == W("011")


@given(st.lists(st.integers(min_value=1, max_value=5), min_size=1,
                max_size=4).map(lambda ns: tuple(ns[:-1]) + (ns[-1] + 1,)))
def test_composition_round_trip_random(comp):
    w = composition_to_word(comp)
    assert is_convergent(w)
    assert word_to_composition(w) == comp
    assert weight(w) == sum(comp)


def test_convergence_is_boundary_letters():
    assert is_convergent(W("01"))
    assert not is_convergent(W("10"))
    assert not is_convergent(W("010"))
    assert not is_convergent(W("11"))
    assert not is_convergent(())


def test_word_enumeration_counts():
    assert len(list(all_words(4))) == 16
    # convergent words of weight n: start 0 end 1 -> 2^(n-2)
    assert [len(convergent_words(n)) for n in range(2, 7)] == [1, 2, 4, 8, 16]


# ---------------------------------------------------------------------------
# shuffle and stuffle


def test_shuffle_small():
    assert shuffle(W("0"), W("1")) == {W("01"): mpq(1), W("10"): mpq(1)}
    assert shuffle(W("01"), W("1")) == {W("011"): mpq(2), W("101"): mpq(1)}


@given(st.tuples(st.lists(st.integers(0, 1), max_size=3),
                 st.lists(st.integers(0, 1), max_size=3)))
def test_shuffle_counts_and_symmetry(pair):
    u, v = tuple(pair[0]), tuple(pair[1])
    prod = shuffle(u, v)
    total = sum(prod.values())
    import math
    assert total == math.comb(len(u) + len(v), len(u))
    assert prod == shuffle(v, u)
    assert all(len(w) == len(u) + len(v) for w in prod)


@given(st.tuples(st.lists(st.integers(0, 1), min_size=1, max_size=2),
                 st.lists(st.integers(0, 1), min_size=1, max_size=2),
                 st.lists(st.integers(0, 1), min_size=1, max_size=2)))
@settings(max_examples=40)
def test_shuffle_associative(triple):
    u, v, x = (tuple(t) for t in triple)

    def scale(prod, c):
        return {w: k * c for w, k in prod.items()}

    left: dict = {}
    for w, c in shuffle(u, v).items():
        for ww, cc in shuffle(w, x).items():
            left[ww] = left.get(ww, 0) + c * cc
    right: dict = {}
    for w, c in shuffle(v, x).items():
        for ww, cc in shuffle(u, w).items():
            right[ww] = right.get(ww, 0) + c * cc
    assert left == right


def test_stuffle_depth_one():
    prod = stuffle((2,), (3,))
    assert prod == {(2, 3): mpq(1), (3, 2): mpq(1), (5,): mpq(1)}


def test_stuffle_euler_product():
    # zeta(2) * zeta(3) expanded by the quasi-shuffle of the nested sums
    lhs = zeta(2) * zeta(3)
    rhs = zeta(2, 3) + zeta(3, 2) + zeta(5)
    assert lhs == rhs


# ---------------------------------------------------------------------------
# regularization


def test_shuffle_regularization_goldens():
    assert zeta_word(W("10")) == -zeta(2)
    assert zeta_word(W("100")) == zeta(3)
    assert zeta_word(W("010")) == -2 * zeta(3)
    assert zeta_word(W("110")) == zeta(3)
    assert zeta_word(W("101")) == -2 * zeta(3)
    # both boundary letters regularize to zero
    assert zeta_word(W("0")) == MZV_ZERO
    assert zeta_word(W("1")) == MZV_ZERO
    assert zeta_word(()) == MZV_ONE


def test_regularized_words_satisfy_shuffle():
    # L_u * L_v = sum over shuffles, preserved by regularization
    for u, v in [(W("1"), W("01")), (W("0"), W("101")), (W("10"), W("01"))]:
        prod = MZV_ZERO
        for w, c in shuffle(u, v).items():
            prod = prod + c * zeta_word(w)
        assert prod == zeta_word(u) * zeta_word(v)


def test_regularize_is_identity_on_convergent():
    assert shuffle_regularize(W("00101")) == {W("00101"): mpq(1)}


# ---------------------------------------------------------------------------
# the relation table


def test_free_word_dimensions():
    by_weight = {}
    for w in free_words():
        by_weight[len(w)] = by_weight.get(len(w), 0) + 1
    assert by_weight == {2: 1, 3: 1, 4: 1, 5: 2, 6: 2}


def test_euler_identity():
    assert zeta(1, 2) == zeta(3)


def test_classical_even_weight_identities():
    assert zeta(2) * zeta(2) == mpq(5, 2) * zeta(4)
    assert zeta(2) * zeta(2) * zeta(2) == mpq(35, 8) * zeta(6)
    assert zeta(2, 2) == mpq(3, 4) * zeta(4)
    assert zeta(1, 3) == mpq(1, 4) * zeta(4)


def test_weight_five_reductions():
    # depth-two values at weight five over the two survivors
    assert zeta(2, 3) == -mpq(11, 2) * zeta(5) + 3 * zeta(2) * zeta(3)
    assert zeta(3, 2) == mpq(9, 2) * zeta(5) - 2 * zeta(2) * zeta(3)
    assert zeta(1, 4) == 2 * zeta(5) - zeta(2) * zeta(3)


def test_weight_six_reductions():
    assert zeta(3) * zeta(3) == zeta(3, 3) * 2 + zeta(6)
    assert zeta(2, 4) == zeta(3) * zeta(3) - mpq(4, 3) * zeta(6)


def test_normal_form_rejects_beyond_cap():
    with pytest.raises(UnresolvedConstantError):
        normal_form({tuple([0] * 6 + [1]): mpq(1)})


def test_expression_arithmetic():
    e = (zeta(2) + 1) * (zeta(3) - 1)
    assert e == zeta(2) * zeta(3) - zeta(2) + zeta(3) - 1
    assert (e - e).is_zero()
    assert MZVExpr.rational(mpq(2, 3)).rational_part() == mpq(2, 3)
    assert (zeta(2) / 2) * 2 == zeta(2)
    assert zeta(2).max_weight() == 2
    assert hash(zeta(1, 2)) == hash(zeta(3))


def test_format_over_display_monomials():
    assert format_mzv(zeta(2)) == "z2"
    assert format_mzv(6 * zeta(3)) == "6*z3"
    assert format_mzv(zeta(2) * zeta(3)) == "z2*z3"
    assert format_mzv(MZV_ZERO) == "0"
    assert "z3*z3" in format_mzv(zeta(3) * zeta(3))


# ---------------------------------------------------------------------------
# regularized limits at infinity


def test_zeta_infinity_low_weight_table():
    z2, z3 = zeta(2), zeta(3)
    assert zeta_infinity(W("01")) == -z2
    assert zeta_infinity(W("10")) == z2
    assert zeta_infinity(W("101")) == -2 * z3
    assert zeta_infinity(W("011")) == z3
    assert zeta_infinity(W("110")) == z3
    for w in [W("0"), W("1"), W("00"), W("11"), W("000"), W("111"),
              W("001"), W("100"), W("010")]:
        assert zeta_infinity(w) == MZV_ZERO, w


def test_zeta_infinity_weight_cap():
    with pytest.raises(UnresolvedConstantError):
        zeta_infinity(tuple([0, 1] * 3))


def test_reg_infinity_goldens():
    z2, z3 = zeta(2), zeta(3)
    assert reg_infinity_word(W("01")) == z2
    assert reg_infinity_word(W("10")) == -z2
    assert reg_infinity_word(W("101")) == -2 * z3
    assert reg_infinity_word(W("011")) == z3
    assert reg_infinity_word(W("010")) == MZV_ZERO
    assert reg_infinity_word(W("100")) == MZV_ZERO
    assert reg_infinity_word(()) == MZV_ONE
    for n in (1, 2, 3):
        assert reg_infinity_word(tuple([1] * n)) == MZV_ZERO


def test_reg_infinity_wheel_corner():
    # the two-letter pieces produced by the flagship integration
    total = (2 * reg_infinity_word(W("011")) - reg_infinity_word(W("010"))
             + zeta(2) * reg_infinity_word(W("1"))
             + reg_infinity_word(W("100")) - 2 * reg_infinity_word(W("101")))
    assert total == 6 * zeta(3)


# ---------------------------------------------------------------------------
# the shipped table artifact


def test_table_file_matches_regenerated():
    assert mzv.load_table_file() == mzv._table_blob()


def test_certified_against_numerics():
    assert mzv.certify_relations(45) < 1e-40
