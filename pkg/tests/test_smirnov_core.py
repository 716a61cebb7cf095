from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from smirnov_primes.smirnov_core import (
    BoundaryQuery,
    LowerThresholdProfile,
    ProbabilityResult,
    lower_profile,
    q_exact,
    q_exact_general,
    q_reflect_upper,
    q_steck,
    steck_upper,
    upper_profile,
)


def nested_integral(a):
    """m! times the volume of {a_i <= x_i, x_1 <= ... <= x_m <= 1}.

    G(s) = integral of the inner levels over t in [max(a_i, s), 1], built
    from the innermost variable outwards as explicit piecewise polynomials.
    """
    s, t = sympy.symbols("s t", real=True)
    G = sympy.Integer(1)
    for ai in reversed(a):
        ai = sympy.Rational(ai)
        inner = G.subs(s, t)
        below = sympy.integrate(inner, (t, ai, 1))
        above = sympy.integrate(inner, (t, s, 1))
        G = sympy.Piecewise((below, s < ai), (above, True))
    return Fraction(str(sympy.nsimplify(sympy.factorial(len(a)) * G.subs(s, 0))))


def test_lower_profile_examples():
    assert lower_profile(BoundaryQuery(2, 1, 2)).a == (0, Fraction(1, 2))
    assert lower_profile(BoundaryQuery(1, 2, 1)).a == (0,)
    assert lower_profile(BoundaryQuery(3, 0, 3)).a == (Fraction(1, 3), Fraction(2, 3), 1)


def test_profile_validation():
    with pytest.raises(ValueError):
        LowerThresholdProfile((0.5, 0.2))
    with pytest.raises(ValueError):
        LowerThresholdProfile((1.2,))
    with pytest.raises(ValueError):
        BoundaryQuery(0, 1, 1)
    with pytest.raises(ValueError):
        BoundaryQuery(2, -1, 1)
    with pytest.raises(ValueError):
        BoundaryQuery(2, 1, 0)
    with pytest.raises(ValueError):
        ProbabilityResult(Fraction(1, 2), "exact-rational", 1e-3)


def test_w_is_derived():
    q = BoundaryQuery(5, Fraction(3, 2), 4)
    assert q.w == Fraction(1, 2)


@pytest.mark.parametrize(
    "a, expected",
    [((0,), 1), ((0, Fraction(1, 2)), Fraction(3, 4)), ((0, 1), 0)],
)
def test_general_examples(a, expected):
    assert q_exact_general(LowerThresholdProfile(a)).value == expected


@pytest.mark.parametrize(
    "m, u, v, expected",
    [
        (1, Fraction(1, 2), 1, Fraction(1, 2)),
        (2, 1, 2, Fraction(3, 4)),
        (5, 5, 1, 1),
        (10, 0, 10, 0),
        (3, 3, 1, 1),
        (4, 0, 4, 0),
    ],
)
def test_three_paths_agree_on_examples(m, u, v, expected):
    q = BoundaryQuery(m, u, v)
    for fn in (q_exact, q_steck, q_reflect_upper):
        res = fn(q)
        assert res.value == expected
        assert res.mode == "exact-rational"
        assert res.abs_error_bound == 0


def test_float_inputs_select_float_mode():
    res = q_exact(BoundaryQuery(1, 0.5, 1.0))
    assert res.mode == "float"
    assert res.value == pytest.approx(0.5, abs=1e-15)
    assert res.abs_error_bound >= 0


@pytest.mark.parametrize(
    "a",
    [
        (Fraction(1, 3),),
        (Fraction(1, 5), Fraction(2, 3)),
        (0, Fraction(1, 4), Fraction(3, 4)),
        (Fraction(1, 10), Fraction(1, 10), Fraction(1, 2)),
        (Fraction(1, 7), Fraction(3, 7), Fraction(5, 7)),
    ],
)
def test_dp_matches_nested_integration(a):
    assert q_exact_general(LowerThresholdProfile(a)).value == nested_integral(a)


def test_known_value_three():
    assert q_exact(BoundaryQuery(3, 1, Fraction(5, 2))).value == Fraction(49, 125)


def literal_steck(b):
    m = len(b)
    M = sympy.zeros(m, m)
    for i in range(m):
        for j in range(m):
            if j - i + 1 >= 0:
                M[i, j] = sympy.Rational(sympy.Rational(b[i]) ** (j - i + 1), sympy.factorial(j - i + 1))
    return Fraction(str(sympy.factorial(m) * M.det()))


@pytest.mark.parametrize(
    "b",
    [
        (Fraction(1, 2),),
        (Fraction(1, 3), Fraction(2, 3)),
        (Fraction(1, 4), Fraction(1, 2), 1),
        (Fraction(1, 5), Fraction(1, 5), Fraction(4, 5), Fraction(9, 10)),
        (0, Fraction(1, 3), Fraction(1, 2), Fraction(2, 3), 1),
    ],
)
def test_steck_recursion_matches_determinant(b):
    assert steck_upper(b) == literal_steck(b)


@settings(max_examples=60, deadline=None)
@given(
    m=st.integers(1, 12),
    u=st.fractions(0, 14, max_denominator=7),
    v=st.fractions(Fraction(1, 7), 14, max_denominator=7),
)
def test_oracle_triangle_rational(m, u, v):
    if v <= 0:
        return
    q = BoundaryQuery(m, u, v)
    a = q_exact(q).value
    assert a == q_steck(q).value == q_reflect_upper(q).value
    assert 0 <= a <= 1


@settings(max_examples=40, deadline=None)
@given(
    m=st.integers(1, 40),
    u=st.floats(0, 45),
    v=st.floats(0.05, 60),
)
def test_float_mode_agrees_with_exact_value(m, u, v):
    q = BoundaryQuery(m, u, v)
    fl = q_exact(q, exact=False)
    ex = q_exact(q, exact=True)
    assert abs(fl.value - float(ex.value)) <= fl.abs_error_bound + 1e-12


@settings(max_examples=40, deadline=None)
@given(m=st.integers(1, 15), u=st.fractions(0, 10, max_denominator=5), d=st.fractions(0, 3, max_denominator=5))
def test_monotone_in_u_and_v(m, u, d):
    v = Fraction(m, 2) + 1
    base = q_exact(BoundaryQuery(m, u, v)).value
    assert q_exact(BoundaryQuery(m, u + d, v)).value >= base
    assert q_exact(BoundaryQuery(m, u, v + d)).value >= base


def test_upper_profile_is_reflection():
    q = BoundaryQuery(4, 1, 3)
    b = upper_profile(q)
    a = lower_profile(q).a
    assert tuple(1 - x for x in reversed(b)) == a


def test_steck_rejects_large_m():
    with pytest.raises(ValueError):
        q_steck(BoundaryQuery(201, 5, 201))


def test_large_float_dp_is_valid_probability():
    res = q_exact(BoundaryQuery(1600, 40.0, 1600.0))
    assert 0 < res.value < 1
    assert res.abs_error_bound < 1e-9
