import pytest
from gmpy2 import mpq
from hypothesis import given, settings, strategies as st

from feynmzv.errors import NotLinearError
from feynmzv.polyring import (INFINITY, Factorization, MultiPoly,
                              RationalFunction, as_ratfun, exact_div,
                              factorize, format_poly, limit_to_zero,
                              linear_split, normalize, parse_poly, poly_gcd,
                              sqrt_perfect_square)

P = parse_poly


# -- strategies -------------------------------------------------------------

coeffs = st.integers(min_value=-6, max_value=6)
exponents = st.tuples(st.integers(0, 3), st.integers(0, 3), st.integers(0, 3))


@st.composite
def polys(draw, max_terms=5):
    n = draw(st.integers(0, max_terms))
    terms = {}
    for _ in range(n):
        e = draw(exponents)
        c = draw(coeffs)
        terms[e] = terms.get(e, 0) + c
    return MultiPoly(("a1", "a2", "a3"), terms)


# -- canonical form ---------------------------------------------------------

def test_unused_variables_dropped():
    p = MultiPoly(("a1", "a2"), {(1, 0): 2})
    assert p.variables == ("a1",)
    assert p == 2 * MultiPoly.var("a1")


def test_natural_variable_order():
    p = MultiPoly.var("a10") + MultiPoly.var("a2")
    assert p.variables == ("a2", "a10")


def test_zero_coefficients_removed():
    p = MultiPoly(("a1",), {(1,): 1, (0,): 0})
    assert len(p) == 1
    assert (p - p).is_zero()


def test_parse_format_round_trip():
    samples = [
        "a1*a2 + a1*a4 + a2*a5 + a4*a5",
        "a3^2 + a3*a4 + a4^2",
        "2*a1^3 - 1/2*a2 + 7",
        "a3 - a4",
        "-a1 + 1",
        "0",
    ]
    for s in samples:
        p = P(s)
        assert P(format_poly(p)) == p


def test_parse_rejects_parentheses():
    with pytest.raises(ValueError):
        P("(a1+a2)*a3")


@given(polys())
def test_format_round_trips(p):
    assert P(format_poly(p)) == p


# -- arithmetic -------------------------------------------------------------

def test_subtraction_and_power():
    a, b = MultiPoly.var("a1"), MultiPoly.var("a2")
    assert (a + b) ** 2 == a**2 + 2 * a * b + b**2
    assert (a - b) * (a + b) == a**2 - b**2


@given(polys(), polys(), polys())
def test_distributivity(p, q, r):
    assert p * (q + r) == p * q + p * r


@given(polys(), polys())
def test_commutativity(p, q):
    assert p * q == q * p
    assert p + q == q + p


def test_diff():
    p = P("a1^2*a2 + 3*a1 - a2")
    assert p.diff("a1") == P("2*a1*a2 + 3")
    assert p.diff("a2") == P("a1^2 - 1")
    assert p.diff("a9").is_zero()


def test_subs_and_eval():
    p = P("a1^2 + a2*a1 + 2")
    assert p.subs("a1", 3) == P("3*a2 + 11")
    assert p.eval_rational({"a1": mpq(1, 2), "a2": 2}) == mpq(13, 4)


def test_coeff_of_power():
    p = P("a1^2*a2 + a1*a3 + 5")
    assert p.coeff_of_power("a1", 2) == P("a2")
    assert p.coeff_of_power("a1", 1) == P("a3")
    assert p.coeff_of_power("a1", 0) == P("5")


# -- linear split -----------------------------------------------------------

def test_linear_split():
    p = P("a1*a2 + a1*a3 + a2*a3")
    g, h = linear_split(p, "a1")
    assert g == P("a2 + a3")
    assert h == P("a2*a3")
    assert g * MultiPoly.var("a1") + h == p


def test_linear_split_missing_variable():
    g, h = linear_split(P("a2 + a3"), "a1")
    assert g.is_zero()
    assert h == P("a2 + a3")


def test_linear_split_rejects_quadratic():
    with pytest.raises(NotLinearError):
        linear_split(P("a1^2 + a2"), "a1")


# -- division, gcd, factorization -------------------------------------------

def test_exact_div():
    p = P("a1^2 - a2^2")
    assert exact_div(p, P("a1 - a2")) == P("a1 + a2")
    assert exact_div(p, P("a1 + 1")) is None


def test_poly_gcd():
    p = P("a1^2 - a2^2") * P("a1 + a3")
    q = P("a1 + a2") * P("a2 + a3")
    assert poly_gcd(p, q) == P("a1 + a2")
    assert poly_gcd(p, P("7")).is_constant()


def test_content_and_primitive():
    c, prim = P("4*a1 + 6*a2").content_and_primitive()
    assert c == 2 and prim == P("2*a1 + 3*a2")
    c, prim = P("-a1 - a2").content_and_primitive()
    assert c == -1 and prim == P("a1 + a2")


def test_factorize_strips_monomials():
    p = P("a1^2*a2 + a1*a2^2")  # a1*a2*(a1+a2)
    fac = factorize(p)
    bases = {format_poly(b): m for b, m in fac}
    assert bases == {"a1": 1, "a2": 1, "a1 + a2": 1}
    assert fac.expand() == p


def test_factorize_square():
    p = P("a1 + a2") ** 2 * P("a1 - a2")
    fac = factorize(p)
    assert sorted(m for _, m in fac) == [1, 2]
    assert fac.expand() == p


def test_factorize_with_hints_matches_plain():
    p = P("a1 + a2") * P("a2 + a3") * P("a1*a2 + a3")
    plain = factorize(p)
    hinted = factorize(p, hints=[P("a2 + a3"), P("a1 + 17")])
    assert set(plain) == set(hinted)


def test_factorization_unit():
    fac = factorize(P("-2*a1 - 2*a2"))
    assert fac.unit == -2
    assert fac.expand() == P("-2*a1 - 2*a2")


# the two-loop reduction produces a cross term that is a perfect square
# with root a2*a5 + a4*a5 + a3*a4 + a3*a5
def test_dodgson_square():
    u = P("a1*a2 + a1*a4 + a2*a5 + a4*a5 + a1*a3 + a2*a3 + a3*a4 + a3*a5")
    v = P("a1*a3*a4 + a1*a3*a5 + a2*a3*a4 + a2*a3*a5 + a2*a4*a5 + a1*a4*a5 "
          "+ a1*a2*a5 + a1*a2*a4")
    u1, u0 = linear_split(u, "a1")
    v1, v0 = linear_split(v, "a1")
    cross = u0 * v1 - u1 * v0
    d = sqrt_perfect_square(cross)
    assert d is not None
    assert d * d == cross
    assert normalize(d) == P("a2*a5 + a4*a5 + a3*a4 + a3*a5")


def test_sqrt_rejects_non_square():
    assert sqrt_perfect_square(P("a1*a2")) is None
    assert sqrt_perfect_square(P("a1^2 + a2")) is None


@given(polys(max_terms=4))
@settings(max_examples=60)
def test_sqrt_recovers_root(p):
    sq = p * p
    r = sqrt_perfect_square(sq)
    assert r is not None
    assert r * r == sq


# -- rational functions -----------------------------------------------------

def test_ratfun_lowest_terms():
    r = RationalFunction(P("a1^2 - a2^2"), P("a1 + a2"))
    assert r == RationalFunction(P("a1 - a2"))
    # denominator is primitive with positive leading coefficient
    r2 = RationalFunction(P("a1"), P("-2*a1 - 2*a2"))
    assert format_poly(r2.den) == "a1 + a2"


def test_ratfun_arithmetic():
    x = RationalFunction.var("a1")
    y = RationalFunction.var("a2")
    s = 1 / x + 1 / y
    assert s == RationalFunction(P("a1 + a2"), P("a1*a2"))
    assert (x / y) * (y / x) == as_ratfun(1)
    assert x - x == as_ratfun(0)


def test_ratfun_diff():
    x = RationalFunction.var("a1")
    r = 1 / (1 + x)
    assert r.diff("a1") == -1 / ((1 + x) * (1 + x))


def test_ratfun_subs_ratfun():
    r = RationalFunction(P("a1"), P("a1 + a2"))
    t = RationalFunction(P("a3"), P("a3 + 1"))
    out = r.subs("a1", t)
    assert out == RationalFunction(P("a3"), P("a2*a3 + a3 + a2"))


def test_ratfun_hashable_unique():
    r1 = RationalFunction(P("2*a1"), P("2*a2"))
    r2 = RationalFunction(P("a1"), P("a2"))
    assert r1 == r2 and hash(r1) == hash(r2)


# -- limits -----------------------------------------------------------------

def test_limit_plain_substitution():
    r = RationalFunction(P("a1 + a2"), P("a2 + 1"))
    assert limit_to_zero(r, "a2") == RationalFunction(P("a1"))


def test_limit_cancels_common_power():
    r = RationalFunction(P("a1*a2"), P("a1*a3"))
    assert limit_to_zero(r, "a1") == RationalFunction(P("a2"), P("a3"))


def test_limit_infinite():
    r = RationalFunction(P("a2 + 1"), P("a1"))
    assert limit_to_zero(r, "a1") is INFINITY


def test_limit_zero_over_nonzero():
    r = RationalFunction(P("a1"), P("a1 + a2"))
    assert limit_to_zero(r, "a1") == as_ratfun(0)


def test_limit_variable_absent():
    r = RationalFunction(P("a2"), P("a3"))
    assert limit_to_zero(r, "a1") == r
