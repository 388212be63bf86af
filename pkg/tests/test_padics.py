import math
import random
from fractions import Fraction

import pytest

from orbitlang.padics import (
    PadicNumber,
    is_prime,
    next_prime,
    padic_of_rational,
    primes_upto,
    valuation,
)


def test_valuation_examples():
    assert valuation(Fraction(50, 3), 5) == 2
    assert valuation(0, 7) == math.inf
    assert valuation(Fraction(1, 3), 3) == -1


def test_valuation_rejects_composite():
    with pytest.raises(ValueError):
        valuation(Fraction(1, 2), 6)


def test_primes_helpers():
    assert primes_upto(20) == (2, 3, 5, 7, 11, 13, 17, 19)
    assert next_prime(13) == 17
    assert is_prime(2**61 - 1)
    assert not is_prime(2**61)


def test_padic_of_rational_unit_examples():
    x = padic_of_rational(Fraction(1, 3), 2, 4)
    assert x.valuation == 0
    assert x.unit == 11  # 3 * 11 == 1 mod 16

    y = padic_of_rational(Fraction(50, 3), 5, 6)
    assert y.valuation == 2
    assert y.unit == 2 * pow(3, -1, 5**4) % 5**4

    z = padic_of_rational(0, 5, 6)
    assert z.valuation == math.inf
    assert z.unit is None


def test_padic_round_trip_residue():
    # result must agree with the modular-inverse computation mod p**M
    for q, p, M in [(Fraction(7, 5), 3, 8), (Fraction(-11, 4), 7, 5), (Fraction(9, 2), 5, 6)]:
        x = padic_of_rational(q, p, M)
        expected = q.numerator * pow(q.denominator, -1, p**M) % p**M
        assert x.residue() == expected


def test_negative_valuation():
    x = padic_of_rational(Fraction(1, 5), 5, 6)
    assert x.valuation == -1
    assert x.abs_p() == 5


def test_ultrametric_on_valuations():
    rng = random.Random(7)
    for p in (3, 5, 7):
        for _ in range(40):
            a = Fraction(rng.randint(-400, 400), rng.randint(1, 60))
            b = Fraction(rng.randint(-400, 400), rng.randint(1, 60))
            if a == 0 or b == 0 or a + b == 0:
                continue
            assert valuation(a * b, p) == valuation(a, p) + valuation(b, p)
            assert valuation(a + b, p) >= min(valuation(a, p), valuation(b, p))


def test_ring_homomorphism_at_precision():
    rng = random.Random(11)
    p, M = 5, 10
    for _ in range(60):
        a = Fraction(rng.randint(-300, 300), rng.choice([1, 2, 3, 7, 25]))
        b = Fraction(rng.randint(-300, 300), rng.choice([1, 2, 3, 7, 25]))
        xa, xb = padic_of_rational(a, p, M), padic_of_rational(b, p, M)
        assert xa + xb == padic_of_rational(a + b, p, M)
        prod = xa * xb
        assert prod == padic_of_rational(a * b, p, prod.precision)


def test_arithmetic_precision_propagation():
    p = 3
    x = PadicNumber(p, 2, 1, 8)  # 9 + O(3^8)
    y = PadicNumber(p, 0, 2, 5)  # 2 + O(3^5)
    assert (x + y).precision == 5
    z = x * y
    # absolute error: min(v_x + M_y, v_y + M_x) = min(7, 8)
    assert z.precision == 7
    assert z.valuation == 2

    inv = y.inverse()
    assert inv.valuation == 0
    assert (inv * y).unit == 1


def test_zero_at_precision_semantics():
    p = 5
    tiny = PadicNumber.from_integer(5**6, p, 4)
    assert tiny.is_zero_at_precision
    assert tiny.valuation == math.inf
    assert tiny == PadicNumber.zero(p, 4)
    # multiplying an invisible value keeps a sound precision bound
    unit = PadicNumber.from_integer(2, p, 4)
    prod = tiny * unit
    assert prod.is_zero_at_precision


def test_division():
    p = 7
    a = padic_of_rational(Fraction(3, 2), p, 6)
    b = padic_of_rational(Fraction(5, 4), p, 6)
    q = a / b
    assert q == padic_of_rational(Fraction(6, 5), p, q.precision)
