"""Jacobi coefficients, Gritsenko lift coefficients and the two lift identities.

For Grit(phi) the coefficient at the form [p m, r, n] (our a0 = m, b = r,
c = n) is sum over delta | (n, r, m) of delta^(k-1) c(m n / delta^2, r / delta).
"""

from __future__ import annotations

import csv
import io
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable

from .analytic import central_value, dirichlet_class_number_values
from .lseries import LSeriesCoefficients, elliptic_selberg_data, is_fundamental, twist
from .quadforms import (
    MIRROR,
    BinaryForm,
    FourierCoefficientTable,
    average_AD,
    class_data,
    gamma0p_orbits,
)


class MissingJacobiCoefficient(KeyError):
    pass


def _cstar_admissible(D: int, p: int) -> bool:
    return any((r * r - D) % (4 * p) == 0 for r in range(2 * p))


@dataclass
class JacobiCoefficientTable:
    """c(n, r) of a Jacobi form of weight k and index p.

    Either explicit ``entries`` or a ``cstar`` function of the discriminant
    r^2 - 4 n p (synthetic tables) supplies the values.
    """

    weight: int
    index: int
    entries: dict[tuple[int, int], int] = field(default_factory=dict)
    cstar_fn: Callable[[int], int] | None = None

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        """c(n, r) must depend only on r^2 - 4 n p."""
        seen: dict[int, tuple[int, int, int]] = {}
        for (n, r), v in self.entries.items():
            D = r * r - 4 * n * self.index
            if D in seen and seen[D][2] != v:
                n0, r0, v0 = seen[D]
                raise ValueError(
                    f"c({n},{r}) = {v} but c({n0},{r0}) = {v0} at the same discriminant {D}"
                )
            seen.setdefault(D, (n, r, v))
        if self.cstar_fn is not None:
            for D, (n, r, v) in seen.items():
                if self.cstar_fn(D) != v:
                    raise ValueError(f"entry c({n},{r}) disagrees with the c* function")

    def c(self, n: int, r: int) -> int:
        if (n, r) in self.entries:
            return self.entries[(n, r)]
        if (n, -r) in self.entries:
            return self.entries[(n, -r)]
        if self.cstar_fn is not None:
            return self.cstar_fn(r * r - 4 * n * self.index)
        raise MissingJacobiCoefficient((n, r))

    def cstar(self, D: int) -> int:
        """c((r^2 - D) / 4p, r) for an admissible r, else 0."""
        p = self.index
        for r in range(2 * p):
            if (r * r - D) % (4 * p) == 0:
                n = (r * r - D) // (4 * p)
                return self.c(n, r)
        return 0

    @classmethod
    def from_csv(cls, text: str, index: int, weight: int = 2) -> "JacobiCoefficientTable":
        reader = csv.DictReader(io.StringIO(text))
        if reader.fieldnames is None or [h.strip() for h in reader.fieldnames] != ["n", "r", "c"]:
            raise ValueError("Jacobi coefficient CSV needs header n,r,c")
        entries = {(int(row["n"]), int(row["r"])): int(row["c"]) for row in reader}
        return cls(weight, index, entries)

    @classmethod
    def load(cls, path: Path, index: int, weight: int = 2) -> "JacobiCoefficientTable":
        return cls.from_csv(Path(path).read_text(), index, weight)


def constant_cstar(value: int, p: int, weight: int = 2) -> JacobiCoefficientTable:
    """Synthetic table with c*(D) = value for every admissible D < 0."""
    return JacobiCoefficientTable(weight, p, cstar_fn=lambda D: value if D < 0 else 0)


def pseudorandom_cstar(seed: int, p: int, weight: int = 2, bound: int = 50) -> JacobiCoefficientTable:
    """Synthetic table with a deterministic pseudorandom c*(D) for D < 0."""

    def fn(D: int) -> int:
        if D >= 0:
            return 0
        return random.Random(f"{seed}:{p}:{D}").randint(-bound, bound)

    return JacobiCoefficientTable(weight, p, cstar_fn=fn)


def parse_cstar_spec(spec: str, p: int, weight: int = 2) -> JacobiCoefficientTable:
    """'const:V' or 'random:SEED'."""
    kind, _, arg = spec.partition(":")
    if kind == "const":
        return constant_cstar(int(arg), p, weight)
    if kind == "random":
        return pseudorandom_cstar(int(arg), p, weight)
    raise ValueError(f"unknown c* spec {spec!r}; use const:V or random:SEED")


@dataclass(frozen=True)
class LiftMeta:
    weight: int
    level: int
    waldspurger_constant: float
    al_sign: int = 1

    def __post_init__(self):
        if self.al_sign != 1:
            raise ValueError("Gritsenko lifts lie in the plus space")
        if not self.waldspurger_constant > 0:
            raise ValueError("the Waldspurger constant must be positive")

    def star(self, D: int) -> int:
        return 2 if D % self.level == 0 else 1


def lift_coefficient(jt: JacobiCoefficientTable, n: int, r: int, m: int, k: int | None = None) -> int:
    """sum_{delta | (n, r, m)} delta^(k-1) c(m n / delta^2, r / delta)."""
    k = jt.weight if k is None else k
    g = math.gcd(math.gcd(n, r), m)
    total = 0
    for d in range(1, g + 1):
        if g % d == 0:
            total += d ** (k - 1) * jt.c(m * n // (d * d), r // d)
    return total


def lift_fourier_table(jt: JacobiCoefficientTable, D: int, p: int) -> FourierCoefficientTable:
    """Lift coefficients on every orbit representative of disc D and on its mirror image."""
    orbits = gamma0p_orbits(D, p)
    entries: dict[tuple[int, int, int], Fraction] = {}
    for T, _ in orbits.reps:
        for S in (T, T.act(MIRROR)):
            entries[S.key] = Fraction(lift_coefficient(jt, S.c, S.b, S.a0))
    return FourierCoefficientTable(p, jt.weight, entries, al_sign=1)


def verify_prop1(jt: JacobiCoefficientTable, D: int, p: int) -> tuple[Fraction, Fraction, bool]:
    """(A(D) of the lift, h(D)/w_D c*(D), equal?) in exact rationals."""
    if D >= 0 or not is_fundamental(D):
        raise ValueError("D must be a negative fundamental discriminant")
    tbl = lift_fourier_table(jt, D, p)
    lhs = average_AD(tbl, D, p)
    cd = class_data(D)
    rhs = Fraction(cd.h, cd.w) * jt.cstar(D)
    return lhs, rhs, lhs == rhs


def lift_prefactor(D: int) -> float:
    """L(0, chi_D) L(1, chi_D) = 4 pi h^2 / (w^2 sqrt|D|)."""
    l0, l1 = dirichlet_class_number_values(D)
    return float(l0) * l1


def lift_central_value(
    f_coeffs: LSeriesCoefficients,
    D: int,
    p: int,
    root_number: int,
    tol: float = 1e-10,
) -> float:
    """L(Grit(f), 1/2, chi_D) from the weight-2 newform f of level p.

    Uses L(F, s, chi_D) = L(s + 1/2, chi_D) L(s - 1/2, chi_D) L(f, s, chi_D).
    """
    if D >= 0 or not is_fundamental(D) or math.gcd(D, p) != 1:
        raise ValueError("need a negative fundamental D coprime to p")
    sd = elliptic_selberg_data(p, D, root_number)
    lf = central_value(twist(f_coeffs, D), sd, tol=tol).value
    return lift_prefactor(D) * lf
