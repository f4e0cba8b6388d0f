import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from blindbench.field import (
    FieldElement,
    UnivariatePoly,
    field_arith,
    poly_eval,
    poly_interpolate,
    smallest_session_prime,
)

SMALL_PRIMES = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31]


def trial_division_prime(k):
    return k >= 2 and all(k % d for d in range(2, int(k**0.5) + 1))


def scan_prime(start):
    k = start
    while not trial_division_prime(k):
        k += 1
    return k


def F(v, p=7):
    return FieldElement(v, p)


def test_add_wraps():
    assert field_arith(F(3), F(4), "add") == F(0)


@pytest.mark.parametrize("a", range(7))
def test_mul_identity(a):
    assert field_arith(F(a), F(1), "mul") == F(a)


def test_div_matches_brute_force():
    # 3x = 5 mod 7
    x = next(x for x in range(7) if 3 * x % 7 == 5)
    assert x == 4
    assert field_arith(F(5), F(3), "div") == F(x)


def test_division_by_zero_raises():
    with pytest.raises(ZeroDivisionError):
        field_arith(F(5), F(0), "div")
    with pytest.raises(ZeroDivisionError):
        field_arith(F(0), None, "inv")


def test_values_reduced():
    assert F(-1).value == 6
    assert (F(6) + 5).value == 4
    assert (2 - F(5)).value == 4


def test_mixed_moduli_rejected():
    with pytest.raises(ArithmeticError):
        FieldElement(1, 7) + FieldElement(1, 11)


@pytest.mark.parametrize("n, expected", [(1, 17), (2, 17), (3, 83), (4, 257)])
def test_smallest_session_prime(n, expected):
    assert expected == scan_prime(max(n**4, 17))
    assert smallest_session_prime(n) == expected


@pytest.mark.parametrize("n", range(1, 13))
def test_session_prime_against_trial_division(n):
    assert smallest_session_prime(n) == scan_prime(max(n**4, 17))


def test_session_prime_rejects_zero():
    with pytest.raises(ValueError):
        smallest_session_prime(0)


@pytest.mark.parametrize("p", SMALL_PRIMES)
def test_field_axioms_exhaustive(p):
    els = [FieldElement(v, p) for v in range(p)]
    zero, one = els[0], els[1]
    for a in els:
        assert a + zero == a and a * one == a
        assert a + (-a) == zero
        if a.value:
            assert a.inverse() * a == one
    for a, b in itertools.product(els, repeat=2):
        assert a + b == b + a
        assert a * b == b * a
        assert 0 <= (a * b).value < p
    for a, b, c in itertools.product(els, repeat=3):
        assert (a + b) + c == a + (b + c)
        assert (a * b) * c == a * (b * c)
        assert a * (b + c) == a * b + a * c


def test_poly_eval_examples():
    assert poly_eval(UnivariatePoly([2, 3], 7), 0) == F(2)
    for c in range(7):
        assert poly_eval(UnivariatePoly([0, 1], 7), c) == F(c)
    assert poly_eval(UnivariatePoly([1, 2, 3], 7), 2) == F(17 % 7)
    assert poly_eval(UnivariatePoly([], 7), 5) == F(0)


def test_zero_poly_degree():
    assert UnivariatePoly([0, 0], 7).degree == -1
    assert UnivariatePoly([0, 0], 7).to_payload() == ("0",)


def test_interpolate_examples():
    assert poly_interpolate([(0, 5)], 7).coeffs == (5,)
    assert poly_interpolate([(0, 0), (1, 1)], 7).coeffs == (0, 1)
    # brute force over all quadratics mod 7
    matches = [
        c
        for c in itertools.product(range(7), repeat=3)
        if all((c[0] + c[1] * x + c[2] * x * x) % 7 == y for x, y in [(0, 1), (1, 2), (2, 5)])
    ]
    assert matches == [(1, 0, 1)]
    assert poly_interpolate([(0, 1), (1, 2), (2, 5)], 7).coeffs == (1, 0, 1)


def test_interpolate_duplicate_x():
    with pytest.raises(ValueError):
        poly_interpolate([(1, 2), (8, 3)], 7)


def test_interpolation_roundtrip_1000_sets():
    rng = random.Random(2024)
    for _ in range(1000):
        p = rng.choice([17, 83, 257, 7919])
        k = rng.randint(1, min(8, p))
        xs = rng.sample(range(p), k)
        pts = [(x, rng.randrange(p)) for x in xs]
        poly = poly_interpolate(pts, p)
        assert poly.degree < k
        assert all(poly(x) == y for x, y in pts)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 96), st.integers(0, 96)), min_size=1, max_size=10, unique_by=lambda t: t[0]))
def test_interpolation_roundtrip_property(points):
    poly = poly_interpolate(points, 97)
    assert all(poly(x) == y for x, y in points)
    assert poly.degree < len(points)


def test_payload_roundtrip():
    poly = UnivariatePoly([3, 0, 9], 17)
    assert UnivariatePoly.from_payload(poly.to_payload(), 17) == poly
