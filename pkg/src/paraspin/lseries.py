"""Euler factors, Dirichlet coefficients, quadratic twists and Selberg data.

Coefficients are stored in the arithmetic normalization (a(q) = q + 1 - N1 at
good q, so |a(n)| <= d_4(n) sqrt(n)); the shift to the analytic center happens
in :mod:`paraspin.analytic`.
"""

from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .curves import is_prime, primes_up_to

_INT64_LIMIT = 2**62


class ExperimentalModeError(ValueError):
    """Raised for twists with p | D unless experimental mode is on."""


@dataclass(frozen=True)
class EulerFactor:
    """L_q(X) = c0 + c1 X + ... with c0 = 1; the local factor is L_q(q^-s)^-1."""

    q: int
    coeffs: tuple[int, ...]

    def __post_init__(self):
        if not self.coeffs or self.coeffs[0] != 1:
            raise ValueError("Euler factor must start with 1")

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def prime_power_values(self, jmax: int) -> list[int]:
        """[a(1), a(q), ..., a(q^jmax)] from the inverse power series of L_q."""
        c = self.coeffs
        out = [1]
        for j in range(1, jmax + 1):
            s = 0
            for i in range(1, min(j, len(c) - 1) + 1):
                s -= c[i] * out[j - i]
            out.append(s)
        return out


def good_euler_factor(lambda_q: int, lambda_q2: int | None, q: int) -> EulerFactor:
    """Degree-4 weight-2 spinor factor; with lambda_q2 None only the linear term is kept."""
    if lambda_q2 is None:
        return EulerFactor(q, (1, -lambda_q))
    return EulerFactor(
        q, (1, -lambda_q, lambda_q * lambda_q - lambda_q2 - 1, -lambda_q * q, q * q)
    )


def bad_euler_factor(al_sign: int, lambda_p: int, p: int) -> EulerFactor:
    """(1 - eps X)(1 - lambda X + p X^2) expanded."""
    if al_sign not in (1, -1):
        raise ValueError("al_sign must be +1 or -1")
    e, l = al_sign, lambda_p
    return EulerFactor(p, (1, -(e + l), e * l + p, -e * p))


@dataclass
class LSeriesCoefficients:
    """a(0..n_max) with a[0] unused; integers in the arithmetic normalization."""

    level: int
    n_max: int
    a: np.ndarray

    def __getitem__(self, n):
        return self.a[n]

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("n,a_n\n")
        for n in range(1, self.n_max + 1):
            buf.write(f"{n},{int(self.a[n])}\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, level: int = 0) -> "LSeriesCoefficients":
        rows = list(csv.DictReader(io.StringIO(text)))
        n_max = max(int(r["n"]) for r in rows)
        a = np.zeros(n_max + 1, dtype=np.int64)
        for r in rows:
            a[int(r["n"])] = int(r["a_n"])
        return cls(level, n_max, a)

    def save(self, path: Path) -> None:
        np.save(path, self.a)

    def truncated(self, n_max: int) -> "LSeriesCoefficients":
        n_max = min(n_max, self.n_max)
        return LSeriesCoefficients(self.level, n_max, self.a[: n_max + 1].copy())


def dirichlet_expansion(factors: Mapping[int, EulerFactor], n_max: int, level: int = 0) -> LSeriesCoefficients:
    """Expand prod_q L_q(q^-s)^-1 into a(1..n_max).

    Every prime <= n_max needs a factor; factors only have to be complete up to
    the highest power of q that stays below n_max.
    """
    a = np.ones(n_max + 1, dtype=np.int64)
    a[0] = 0
    for q in primes_up_to(n_max).tolist():
        fac = factors.get(q)
        if fac is None:
            raise KeyError(f"missing Euler factor at q={q}")
        jmax = 0
        qj = 1
        while qj * q <= n_max:
            qj *= q
            jmax += 1
        vals = fac.prime_power_values(jmax)
        qj = 1
        for j in range(1, jmax + 1):
            qj *= q
            v = vals[j]
            if abs(v) >= _INT64_LIMIT:
                raise OverflowError(f"a({q}^{j}) exceeds int64")
            if qj * q > n_max:
                idx = slice(qj, n_max + 1, qj)
                block = a[idx]
            else:
                m = np.arange(qj, n_max + 1, qj)
                m = m[(m // qj) % q != 0]
                block = a[m]
                idx = m
            if v != 0 and block.size and int(np.abs(block).max()) * abs(v) >= _INT64_LIMIT:
                raise OverflowError(f"coefficient overflow at multiples of {q}^{j}")
            a[idx] = block * v
    return LSeriesCoefficients(level, n_max, a)


# ---------------------------------------------------------------------------
# quadratic characters


def _squarefree(n: int) -> bool:
    n = abs(n)
    d = 2
    while d * d <= n:
        if n % (d * d) == 0:
            return False
        d += 1
    return True


def is_fundamental(D: int) -> bool:
    if D in (0, 1):
        return False
    if D % 4 == 1:
        return _squarefree(D)
    if D % 4 == 0:
        m = D // 4
        return m % 4 in (2, 3) and _squarefree(m)
    return False


def fundamental_discriminants(lo: int, hi: int) -> list[int]:
    """Fundamental discriminants D with lo <= D <= hi, ascending."""
    return [D for D in range(lo, hi + 1) if is_fundamental(D)]


def _jacobi(a: int, n: int) -> int:
    # n odd positive
    a %= n
    result = 1
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def kronecker(D: int, n: int) -> int:
    """Kronecker symbol (D|n) for any integer D and n >= 0 (no validation)."""
    if n == 0:
        return 1 if D in (1, -1) else 0
    if n < 0:
        raise ValueError("n must be non-negative")
    result = 1
    while n % 2 == 0:
        n //= 2
        if D % 2 == 0:
            return 0
        if D % 8 in (3, 5):
            result = -result
    if n == 1:
        return result
    return result * _jacobi(D, n)


def kronecker_symbol(D: int, n: int) -> int:
    """chi_D(n) for a fundamental discriminant D (or D = 1)."""
    if D != 1 and not is_fundamental(D):
        raise ValueError(f"{D} is not a fundamental discriminant")
    if n <= 0:
        raise ValueError("n must be positive")
    return kronecker(D, n)


def character_table(D: int) -> np.ndarray:
    """chi_D(0..|D|-1); chi_D has period |D| for fundamental D."""
    if D == 1:
        return np.ones(1, dtype=np.int64)
    if not is_fundamental(D):
        raise ValueError(f"{D} is not a fundamental discriminant")
    m = abs(D)
    return np.array([kronecker(D, r) for r in range(m)], dtype=np.int64)


def character_values(D: int, n_max: int) -> np.ndarray:
    """chi_D(n) for n = 0..n_max (index 0 is 0 unless D = 1)."""
    tab = character_table(D)
    chi = tab[np.arange(n_max + 1) % tab.size]
    chi[0] = 0 if D != 1 else 1
    return chi


def twist(coeffs: LSeriesCoefficients, D: int, experimental: bool = False) -> LSeriesCoefficients:
    if coeffs.level and math.gcd(D, coeffs.level) != 1 and not experimental:
        raise ExperimentalModeError(f"twist by D={D} with p={coeffs.level} dividing D needs experimental mode")
    chi = character_values(D, coeffs.n_max)
    return LSeriesCoefficients(coeffs.level, coeffs.n_max, coeffs.a * chi)


# ---------------------------------------------------------------------------
# Selberg data


class GammaKind(enum.Enum):
    DEGREE4_PARAMODULAR_WT2 = "degree4_paramodular_wt2"  # Gamma(s+1/2)^2
    DEGREE2_ELLIPTIC_WT2 = "degree2_elliptic_wt2"  # Gamma(s+1/2)
    DIRICHLET_ODD = "dirichlet_odd"  # Gamma((s+1)/2)


@dataclass(frozen=True)
class SelbergData:
    """Lambda(s) = cond_q^s gamma(s) L(s) with Lambda(s) = sign Lambda(1-s)."""

    cond_q: float
    sign: int
    gamma_kind: GammaKind

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        if not self.cond_q > 0:
            raise ValueError("cond_q must be positive")


def selberg_data(p: int, D: int, al_sign: int) -> SelbergData:
    """Twisted spinor data: Q = sqrt(p) D^2 / (4 pi^2), sign = eps (D|p)."""
    if D != 1 and not is_fundamental(D):
        raise ValueError(f"{D} is not a fundamental discriminant")
    if D % p == 0:
        # the twisted conductor is not pinned down when p | D
        raise ExperimentalModeError(f"p={p} divides D={D}; twisted conductor unknown")
    sign = al_sign * kronecker(D, p)
    q = math.sqrt(p) * D * D / (4 * math.pi**2)
    return SelbergData(q, sign, GammaKind.DEGREE4_PARAMODULAR_WT2)


def elliptic_selberg_data(conductor: int, D: int, root_number: int) -> SelbergData:
    """Weight-2 newform of level N twisted by chi_D with gcd(D, N) = 1."""
    if D != 1 and math.gcd(D, conductor) != 1:
        raise ExperimentalModeError("twist must be coprime to the level")
    sign = root_number if D == 1 else root_number * kronecker(D, conductor) * (-1 if D < 0 else 1)
    q = math.sqrt(conductor) * abs(D) / (2 * math.pi)
    return SelbergData(q, sign, GammaKind.DEGREE2_ELLIPTIC_WT2)


def dirichlet_selberg_data(D: int) -> SelbergData:
    """Odd real character chi_D (D < 0): Q = sqrt(|D| / pi), root number 1."""
    if D >= 0 or not is_fundamental(D):
        raise ValueError("need a negative fundamental discriminant")
    return SelbergData(math.sqrt(abs(D) / math.pi), 1, GammaKind.DIRICHLET_ODD)


# ---------------------------------------------------------------------------
# assembling the series of a curve


def curve_euler_factors(counts, curve, n_max: int, extra: Mapping[int, EulerFactor] | None = None) -> dict[int, EulerFactor]:
    """Euler factors from a :class:`~paraspin.curves.CountTable` plus the bad factor.

    ``extra`` overrides individual primes (used where the model is singular
    but the Jacobian has good reduction).
    """
    from .curves import PointCounts, hecke_from_counts

    extra = dict(extra or {})
    out: dict[int, EulerFactor] = {}
    for q in primes_up_to(n_max).tolist():
        if q in extra:
            out[q] = extra[q]
        elif q == curve.level:
            # the linear root is -eps: the root number of the series is eps
            # and for multiplicative-type reduction a_p = -w_p
            out[q] = bad_euler_factor(-curve.al_sign, curve.lambda_p, q)
        else:
            pc: PointCounts = counts.counts[q]
            lam, lam2 = hecke_from_counts(pc)
            if lam2 is None and q * q <= n_max:
                raise ValueError(f"N2 needed at q={q} for n_max={n_max}")
            out[q] = good_euler_factor(lam, lam2, q)
    return out


def elliptic_curve_coefficients(ainvs: Sequence[int], conductor: int, n_max: int) -> LSeriesCoefficients:
    """a(n) for an elliptic curve [a1,a2,a3,a4,a6] by point counting at each prime."""
    from .curves import _char_sum

    a1, a2, a3, a4, a6 = ainvs
    # 4(x^3 + a2 x^2 + a4 x + a6) + (a1 x + a3)^2, ascending
    g = [4 * a6 + a3 * a3, 4 * a4 + 2 * a1 * a3, 4 * a2 + a1 * a1, 4]
    factors = {}
    for q in primes_up_to(n_max).tolist():
        if q == 2:
            pts = 1
            for x in range(2):
                for y in range(2):
                    lhs = (y * y + a1 * x * y + a3 * y) % 2
                    rhs = (x**3 + a2 * x * x + a4 * x + a6) % 2
                    pts += lhs == rhs
            ap = q + 1 - pts
        else:
            gm = np.array([v % q for v in g], dtype=np.int64)
            ap = -int(_char_sum(gm, q))
        if conductor % q:
            factors[q] = EulerFactor(q, (1, -ap, q))
        else:
            factors[q] = EulerFactor(q, (1, -ap))
    return dirichlet_expansion(factors, n_max, level=conductor)
