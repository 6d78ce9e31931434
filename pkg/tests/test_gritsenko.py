import math
from fractions import Fraction

import numpy as np
import pytest

from paraspin.analytic import central_value, dirichlet_value
from paraspin.gritsenko import (
    JacobiCoefficientTable,
    LiftMeta,
    MissingJacobiCoefficient,
    constant_cstar,
    lift_central_value,
    lift_coefficient,
    lift_fourier_table,
    lift_prefactor,
    parse_cstar_spec,
    pseudorandom_cstar,
    verify_prop1,
)
from paraspin.lseries import (
    LSeriesCoefficients,
    SelbergData,
    elliptic_curve_coefficients,
    elliptic_selberg_data,
    selberg_data,
    twist,
)
from paraspin.quadforms import class_data, gamma0p_orbits

E11 = [0, -1, 1, -10, -20]


def test_lift_coefficient_divisor_sum():
    jt = JacobiCoefficientTable(2, 1, {(4, 2): 5, (1, 1): 7, (2, 2): 0})
    # gcd(2, 2, 2) = 2: c(4, 2) + 2 c(1, 1)
    assert lift_coefficient(jt, 2, 2, 2) == 5 + 2 * 7
    # weight 3 weighs delta by delta^2
    assert lift_coefficient(jt, 2, 2, 2, k=3) == 5 + 4 * 7
    assert lift_coefficient(jt, 1, 1, 1) == 7


def test_jacobi_table_validation_and_lookup():
    with pytest.raises(ValueError):
        # r^2 - 4 n p = -3 for both, different values
        JacobiCoefficientTable(2, 1, {(1, 1): 1, (3, 3): 2})
    jt = JacobiCoefficientTable(2, 5, {(1, 3): 4})
    assert jt.c(1, -3) == 4
    with pytest.raises(MissingJacobiCoefficient):
        jt.c(2, 1)
    with pytest.raises(ValueError):
        JacobiCoefficientTable(2, 5, {(1, 3): 4}, cstar_fn=lambda D: 1)


def test_jacobi_csv():
    jt = JacobiCoefficientTable.from_csv("n,r,c\n1,1,3\n2,1,-1\n", index=1)
    assert jt.c(1, 1) == 3 and jt.c(2, -1) == -1
    with pytest.raises(ValueError):
        JacobiCoefficientTable.from_csv("n,c\n1,3\n", index=1)


def test_cstar_specs():
    assert parse_cstar_spec("const:3", 277).cstar(-3) == 3
    a = parse_cstar_spec("random:7", 277)
    b = pseudorandom_cstar(7, 277)
    assert [a.cstar(D) for D in (-3, -4, -23)] == [b.cstar(D) for D in (-3, -4, -23)]
    assert constant_cstar(5, 277).cstar(-5) == 0  # -5 is not a discriminant
    with pytest.raises(ValueError):
        parse_cstar_spec("gauss:1", 277)


def test_lift_identity_examples():
    """A(D) of the lift equals h/w c*(D): 1/6 at D = -3 and 3/2 at D = -23."""
    assert verify_prop1(constant_cstar(1, 277), -3, 277) == (Fraction(1, 6), Fraction(1, 6), True)
    assert verify_prop1(constant_cstar(1, 277), -23, 277) == (Fraction(3, 2), Fraction(3, 2), True)
    lhs, rhs, ok = verify_prop1(constant_cstar(0, 277), -40, 277)
    assert lhs == rhs == 0 and ok


def test_lift_identity_random_table():
    jt = pseudorandom_cstar(11, 587)
    for D in (-8, -15, -23, -111):
        lhs, rhs, ok = verify_prop1(jt, D, 587)
        cd = class_data(D)
        assert ok and rhs == Fraction(cd.h, cd.w) * jt.cstar(D)


def test_lift_identity_rejects_non_fundamental():
    with pytest.raises(ValueError):
        verify_prop1(constant_cstar(1, 277), -12, 277)


def test_lift_table_covers_mirrors():
    tbl = lift_fourier_table(constant_cstar(1, 277), -40, 277)
    orb = gamma0p_orbits(-40, 277)
    assert {T.key for T, _ in orb.reps} <= set(tbl.entries)
    jt = pseudorandom_cstar(3, 277)
    tbl = lift_fourier_table(jt, -40, 277)
    for (a0, b, c), v in tbl.entries.items():
        assert v == lift_coefficient(jt, c, b, a0)


def test_lift_prefactor_closed_form():
    """L(0) L(1) = 4 pi h^2 / (w^2 sqrt|D|), cross-checked against direct Dirichlet values."""
    for D in (-3, -4, -7, -23, -84):
        cd = class_data(D)
        closed = 4 * math.pi * cd.h**2 / (cd.w**2 * math.sqrt(-D))
        assert abs(lift_prefactor(D) - closed) < 1e-12
        assert abs(dirichlet_value(D, 0.0) * dirichlet_value(D, 1.0) - closed) < 1e-10


def _lift_series(f: LSeriesCoefficients) -> LSeriesCoefficients:
    """Arithmetic coefficients of zeta(s) zeta(s - 1) L(f, s): (1 * id * a_f)(n)."""
    N = f.n_max
    sigma = np.zeros(N + 1, dtype=np.int64)
    for d in range(1, N + 1):
        sigma[d::d] += d
    out = np.zeros(N + 1, dtype=np.int64)
    for d in range(1, N + 1):
        m = np.arange(1, N // d + 1)
        out[d * m] += sigma[d] * f.a[m]
    return LSeriesCoefficients(f.level, N, out)


@pytest.mark.parametrize("D", [-3, -4, -7, -8, -19])
def test_lift_value_matches_degree_four_engine(D):
    """The factorization through Dirichlet values agrees with the degree-4 series of the product."""
    f = elliptic_curve_coefficients(E11, 11, 20000)
    F = _lift_series(f)
    sd = selberg_data(11, D, 1)
    sd = SelbergData(sd.cond_q, elliptic_selberg_data(11, D, 1).sign, sd.gamma_kind)
    v4 = central_value(twist(F, D), sd, strict=False)
    v2 = lift_central_value(f, D, 11, 1)
    assert abs(v4.value - v2) < 1e-10


def test_lift_meta():
    meta = LiftMeta(2, 277, 1.5)
    assert meta.star(-3) == 1 and meta.star(-277 * 4) == 2
    with pytest.raises(ValueError):
        LiftMeta(2, 587, 1.0, al_sign=-1)
    with pytest.raises(ValueError):
        LiftMeta(2, 277, 0.0)
