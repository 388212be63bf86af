import random
from fractions import Fraction

import pytest

from orbitlang.dynsys import (
    INFINITY_POINT,
    CycleRecord,
    MoebiusMap,
    NoExceptional,
    NotPeriodic,
    OneExceptional,
    PPoint,
    RationalMap,
    TwoExceptional,
    classify_cycle,
    conjugate,
    critical_points,
    cycle_multiplier,
    exceptional_structure,
    iterate,
    orbit_status,
)
from orbitlang.errors import SingularMu
from orbitlang.polynomials import Polynomial


T_SQ = RationalMap.quadratic(0)
T_SQ_MINUS_1 = RationalMap.quadratic(-1)
T_SQ_PLUS_1 = RationalMap.quadratic(1)


def test_iterate_examples():
    assert iterate(T_SQ_MINUS_1, 2, 2) == PPoint.of(8)  # 2 -> 3 -> 8
    assert iterate(T_SQ_PLUS_1, Fraction(7, 3), 0) == PPoint.of(Fraction(7, 3))
    # orbit of 0 under t^2+1 is 0, 1, 2, 5, 26, 677
    values = [iterate(T_SQ_PLUS_1, 0, n).as_fraction() for n in range(6)]
    assert values == [0, 1, 2, 5, 26, 677]


def test_iterate_additivity():
    rng = random.Random(5)
    phi = RationalMap.from_affine(
        Polynomial.univariate([1, 0, 1]), Polynomial.univariate([0, 1])
    )  # (t^2+1)/t
    for _ in range(10):
        m, n = rng.randint(0, 5), rng.randint(0, 5)
        x = Fraction(rng.randint(1, 9), rng.randint(1, 5))
        assert iterate(phi, x, m + n) == iterate(phi, iterate(phi, x, m), n)


def test_map_normalization_canonical():
    a = RationalMap([Fraction(-1, 2), 0, Fraction(-1)], [Fraction(1, 2), 0, 0])
    b = RationalMap([1, 0, 2], [-1, 0, 0])
    assert a == b


def test_critical_points_examples():
    for c in (0, 1, -1):
        pts = dict(critical_points(RationalMap.quadratic(c)))
        assert pts == {PPoint.of(0): 2, INFINITY_POINT: 2}
    cubic = dict(critical_points(RationalMap.polynomial([0, 0, 0, 1])))
    assert cubic == {PPoint.of(0): 3, INFINITY_POINT: 3}
    phi = RationalMap.from_affine(Polynomial.univariate([1, 0, 1]), Polynomial.univariate([0, 1]))
    assert dict(critical_points(phi)) == {PPoint.of(1): 2, PPoint.of(-1): 2}


def test_riemann_hurwitz_on_rational_critical_maps():
    for phi in (T_SQ, T_SQ_MINUS_1, RationalMap.polynomial([0, 0, 0, 1])):
        total = sum(e - 1 for _, e in critical_points(phi))
        assert total == 2 * phi.degree - 2


def test_classify_cycle_superattracting():
    rec = classify_cycle(T_SQ_MINUS_1, 0, "archimedean")
    assert isinstance(rec, CycleRecord)
    assert rec.period == 2
    assert rec.multiplier == 0
    assert rec.cycle_class == "superattracting"


def test_classify_cycle_indifferent_at_prime():
    rec = classify_cycle(T_SQ, 1, 7)
    assert isinstance(rec, CycleRecord)
    assert rec.period == 1
    assert rec.multiplier == 2
    assert rec.cycle_class == "indifferent"


def test_classify_cycle_strictly_preperiodic():
    rec = classify_cycle(RationalMap.quadratic(-2), 0, "archimedean")
    assert isinstance(rec, NotPeriodic)
    assert rec.reason == "strictly-preperiodic"
    assert (rec.tail, rec.cycle_length) == (2, 1)  # 0 -> -2 -> 2 -> 2


def test_orbit_status_escape_proofs():
    st = orbit_status(T_SQ_PLUS_1, 1)
    assert st.kind == "wanders" and st.proven
    st2 = orbit_status(T_SQ_MINUS_1, Fraction(1, 3))
    assert st2.kind == "wanders" and st2.proven and st2.reason == "p-adic-escape"


def test_orbit_status_periodic_point_of_rational_map():
    phi = RationalMap.from_affine(Polynomial.univariate([1, 0, 1]), Polynomial.univariate([0, 1]))
    st = orbit_status(phi, INFINITY_POINT)
    # infinity -> infinity under (t^2+1)/t? No: (t^2+1)/t at infinity has image infinity.
    assert st.kind == "periodic"


def test_multiplier_with_infinity_in_cycle():
    lam = cycle_multiplier(T_SQ, (INFINITY_POINT,))
    assert lam == 0  # superattracting fixed point of a polynomial


def test_exceptional_structure_examples():
    two = exceptional_structure(T_SQ)
    assert isinstance(two, TwoExceptional)
    assert set(two.points) == {PPoint.of(0), INFINITY_POINT}
    assert not two.swapped

    one = exceptional_structure(T_SQ_MINUS_1)
    assert isinstance(one, OneExceptional)
    assert one.point == INFINITY_POINT

    phi = RationalMap.from_affine(
        Polynomial.univariate([1, 0, 1]), Polynomial.univariate([-1, 0, 1])
    )  # (t^2+1)/(t^2-1)
    assert isinstance(exceptional_structure(phi), NoExceptional)


def test_exceptional_swapped_pair():
    # t -> 1/t^2 swaps 0 and infinity
    phi = RationalMap([1, 0, 0], [0, 0, 1])
    ex = exceptional_structure(phi)
    assert isinstance(ex, TwoExceptional)
    assert ex.swapped and ex.power_sign == -1


def test_conjugate_examples():
    mu = MoebiusMap(2, 0, 0, 1)  # t -> 2t
    psi = conjugate(T_SQ, mu)
    assert psi == RationalMap.polynomial([0, 0, 2])  # mu^-1(mu(t)^2) = 2 t^2
    assert conjugate(T_SQ_PLUS_1, MoebiusMap.identity()) == T_SQ_PLUS_1


def test_conjugate_singular():
    with pytest.raises(SingularMu):
        MoebiusMap(1, 2, 2, 4)


def test_multiplier_invariant_under_conjugation():
    rng = random.Random(9)
    for _ in range(8):
        mu = MoebiusMap(rng.randint(1, 5), rng.randint(-3, 3), 0, rng.randint(1, 4))
        phi = T_SQ_MINUS_1
        psi = conjugate(phi, mu)
        before = classify_cycle(phi, 0, "archimedean")
        after = classify_cycle(psi, mu.inverse().apply(0).as_fraction(), "archimedean")
        assert isinstance(before, CycleRecord) and isinstance(after, CycleRecord)
        assert before.multiplier == after.multiplier
        assert before.period == after.period


def test_superattracting_iff_cycle_meets_critical_set():
    for phi, x in [(T_SQ_MINUS_1, 0), (T_SQ, 1), (RationalMap.quadratic(Fraction(-3, 4)), Fraction(-1, 2))]:
        rec = classify_cycle(phi, x, "archimedean")
        assert isinstance(rec, CycleRecord)
        crit = {p for p, _ in critical_points(phi)}
        assert (rec.multiplier == 0) == any(p in crit for p in rec.points)


def test_iterate_polynomial_matches_pointwise():
    f3 = T_SQ_PLUS_1.iterate_polynomial(3)
    assert f3.evaluate({"t": 0}) == 5
    assert f3.evaluate({"t": 1}) == 26
