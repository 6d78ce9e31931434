import math

import numpy as np
import pytest

import oracles
from paraspin import fixtures
from paraspin.curves import (
    CountTable,
    CurveSpec,
    PointCounts,
    count_points,
    extension_count,
    hecke_from_counts,
    least_nonresidue,
    model_at_two,
    model_bad_primes,
    parse_equation,
    poly_discriminant,
    primes_up_to,
    sweep_counts,
)

CURVES = fixtures.curves()


def test_parse_equation_forms():
    assert parse_equation("y^2 + y = x^5 - 2x^3 + 2x^2 - x") == ((0, -1, 2, -2, 0, 1), (1,))
    assert parse_equation("y^2 + (x^3 + x + 1) y = x^2") == ((0, 0, 1), (1, 1, 0, 1))
    assert parse_equation("y^2 + x y = -x^5 - 3x^4 - 4x^3 - 3x^2 - x") == ((0, -1, -3, -4, -3, -1), (0, 1))
    assert parse_equation("y^2 = -3x^6 + 18x^4 + 6x^3 + 9x^2 - 54x + 57")[1] == (0,)


@pytest.mark.parametrize("key", list(CURVES))
def test_table_curves_roundtrip_and_smooth(key):
    c = CURVES[key]
    assert parse_equation(c.equation()) == (c.f_coeffs, c.h_coeffs)
    assert c.is_nonsingular()
    # the level divides the discriminant of 4f + h^2
    assert poly_discriminant(c.g_coeffs) % c.level == 0


def test_curve_validation():
    f, h = parse_equation("y^2 + y = x^5 - 2x^3 + 2x^2 - x")
    with pytest.raises(ValueError):
        CurveSpec(276, 1, 8, f, h)
    with pytest.raises(ValueError):
        CurveSpec(277, 0, 8, f, h)
    with pytest.raises(ValueError):
        CurveSpec(277, 1, 8, (0, 1, 1), (1,))  # genus 0


def test_point_counts_range():
    with pytest.raises(ValueError):
        PointCounts(5, 13)


def test_least_nonresidue():
    for q in primes_up_to(200)[1:].tolist():
        d = least_nonresidue(q)
        assert pow(d, (q - 1) // 2, q) == q - 1
        assert all(pow(v, (q - 1) // 2, q) == 1 for v in range(1, d))


@pytest.mark.parametrize("key", list(CURVES))
def test_counts_match_grid_enumeration_small(key):
    """[DERIVED] every (x, y) pair enumerated over F_q, q < 200."""
    c = CURVES[key]
    for q in primes_up_to(200).tolist():
        assert count_points(c, q, 1) == oracles.count_grid(c.f_coeffs, c.h_coeffs, q), q


def test_hecke_from_counts_example():
    # level 277 at q = 3: N1 = 3 + 1 - lambda
    c = CURVES["277"]
    pc = PointCounts(3, count_points(c, 3, 1), count_points(c, 3, 2))
    lam, lam2 = hecke_from_counts(pc)
    assert lam == 1 + 3 - pc.n1
    assert abs(lam) <= 4 * math.sqrt(3)
    a_q2 = 1 + 3 + 9 - 4 * pc.n1 + (pc.n1**2 - pc.n2) // 2
    assert lam2 == a_q2 - 1


def test_hecke_parity_guard():
    with pytest.raises(AssertionError):
        hecke_from_counts(PointCounts(5, 6, 27))


def test_model_bad_primes():
    assert model_bad_primes(CURVES["277"]) == [277]
    assert model_bad_primes(CURVES["587+"]) == [2, 3, 587]


def test_model_at_two_is_same_curve():
    c = CURVES["587+"]
    m = model_at_two(c)
    # 4F' + H^2 = (4f + h^2) / 4: the substitution Y = 2y' + H
    assert tuple(4 * v for v in m.g_coeffs) == c.g_coeffs
    assert 2 not in model_bad_primes(m)
    assert model_at_two(CURVES["277"]) is CURVES["277"]


def test_sweep_and_csv_roundtrip(tmp_path):
    c = CURVES["389"]
    tab = sweep_counts(c, 500)
    assert set(tab.counts) == set(primes_up_to(500).tolist())
    assert tab.counts[3].n2 is not None and tab.counts[499].n2 is None
    path = tmp_path / "c.csv"
    tab.save(path)
    back = CountTable.load(path)
    assert back.counts == tab.counts
    assert path.read_text().splitlines()[0] == "q,N1,N2"


def test_sweep_extends_existing():
    c = CURVES["349"]
    small = sweep_counts(c, 300)
    big = sweep_counts(c, 600, existing=small)
    fresh = sweep_counts(c, 600)
    assert big.counts == fresh.counts


def test_extension_count_against_field_oracle():
    """[DERIVED] brute force over F_{q^k} built from a primitive polynomial."""
    c = CURVES["353"]
    for q, k in [(3, 3), (5, 3), (3, 5), (7, 2)]:
        pc = PointCounts(q, count_points(c, q, 1), count_points(c, q, 2))
        assert extension_count(pc, k) == oracles.count_ext(c.f_coeffs, c.h_coeffs, q, k)
    pc = PointCounts(5, count_points(c, 5, 1), count_points(c, 5, 2))
    assert extension_count(pc, 1) == pc.n1 and extension_count(pc, 2) == pc.n2
    with pytest.raises(ValueError):
        extension_count(PointCounts(5, 6), 3)
