"""Positive definite binary forms [p*a0, b, c] and their Gamma0^(p)-orbits.

A form T = [[p a0, b/2], [b/2, c]] has discriminant b^2 - 4 p a0 c.  Matrices
act by T[U] = U' T U; Gamma0^(p) is the set of U in GL2(Z) with p dividing
the lower-left entry (Gamma0(p) together with diag(1, -1)).

Orbits are produced from SL2(Z)-reduced forms f: the Gamma0(p)-classes inside
the SL2(Z)-class of f correspond to the roots of f on P^1(F_p), and the form
f[sigma] with sigma in SL2(Z) having first column at such a root has p | A.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Callable, Iterable, Mapping

from .lseries import kronecker

Matrix = tuple[tuple[int, int], tuple[int, int]]
IDENTITY: Matrix = ((1, 0), (0, 1))
MIRROR: Matrix = ((1, 0), (0, -1))


class CoverageError(KeyError):
    """A Fourier coefficient table misses some orbit representatives."""

    def __init__(self, missing):
        self.missing = list(missing)
        super().__init__(f"missing coefficients for forms (a0,b,c): {self.missing}")


class OrbitConstancyError(ValueError):
    pass


# ---------------------------------------------------------------------------
# matrices and forms as plain triples (A, B, C) = A x^2 + B x y + C y^2


def mat_mul(m: Matrix, n: Matrix) -> Matrix:
    return (
        (m[0][0] * n[0][0] + m[0][1] * n[1][0], m[0][0] * n[0][1] + m[0][1] * n[1][1]),
        (m[1][0] * n[0][0] + m[1][1] * n[1][0], m[1][0] * n[0][1] + m[1][1] * n[1][1]),
    )


def mat_det(m: Matrix) -> int:
    return m[0][0] * m[1][1] - m[0][1] * m[1][0]


def mat_inv(m: Matrix) -> Matrix:
    d = mat_det(m)
    if d not in (1, -1):
        raise ValueError("matrix not unimodular")
    return ((m[1][1] * d, -m[0][1] * d), (-m[1][0] * d, m[0][0] * d))


def act(form: tuple[int, int, int], u: Matrix) -> tuple[int, int, int]:
    """T[U]: the form (x, y) -> T(U (x, y))."""
    A, B, C = form
    (a, b), (c, d) = u
    return (
        A * a * a + B * a * c + C * c * c,
        2 * A * a * b + B * (a * d + b * c) + 2 * C * c * d,
        A * b * b + B * b * d + C * d * d,
    )


def disc(form: tuple[int, int, int]) -> int:
    A, B, C = form
    return B * B - 4 * A * C


def reduce_form(form: tuple[int, int, int]) -> tuple[tuple[int, int, int], Matrix]:
    """SL2(Z)-reduced form f and M in SL2(Z) with form[M] = f."""
    A, B, C = form
    if B * B - 4 * A * C >= 0 or A <= 0:
        raise ValueError(f"{form} is not positive definite")
    M = IDENTITY
    f = form
    while True:
        A, B, C = f
        if not (-A < B <= A):
            k = (A - B) // (2 * A)
            t = ((1, k), (0, 1))
            f, M = act(f, t), mat_mul(M, t)
            continue
        if A > C:
            s = ((0, -1), (1, 0))
            f, M = act(f, s), mat_mul(M, s)
            continue
        if A == C and B < 0:
            s = ((0, -1), (1, 0))
            f, M = act(f, s), mat_mul(M, s)
            continue
        return f, M


def reduced_forms(D: int) -> list[tuple[int, int, int]]:
    """All reduced forms (a, b, c) of discriminant D < 0 (primitive or not)."""
    if D >= 0:
        raise ValueError("D must be negative")
    if D % 4 not in (0, 1):
        return []
    out = []
    a = 1
    while 3 * a * a <= -D:
        for b in range(-a + 1, a + 1):
            num = b * b - D
            if num % (4 * a):
                continue
            c = num // (4 * a)
            if c < a or (c == a and b < 0):
                continue
            out.append((a, b, c))
        a += 1
    return out


@dataclass(frozen=True)
class ClassData:
    h: int
    w: int


def class_data(D: int) -> ClassData:
    forms = [f for f in reduced_forms(D) if math.gcd(math.gcd(*f[:2]), f[2]) == 1]
    w = 6 if D == -3 else 4 if D == -4 else 2
    return ClassData(len(forms), w)


def solvable(D: int, p: int) -> bool:
    """True iff some b has b^2 = D mod 4p, i.e. (D|p) != -1."""
    return kronecker(D, p) != -1


# ---------------------------------------------------------------------------
# isometries between reduced forms


def _vectors_of_value(form, n: int) -> list[tuple[int, int]]:
    """All integer (x, y) with form(x, y) == n (form positive definite)."""
    A, B, C = form
    d = 4 * A * C - B * B
    out = []
    ymax = math.isqrt(4 * A * n // d) + 1
    for y in range(-ymax, ymax + 1):
        # A x^2 + B y x + (C y^2 - n) = 0
        rad = B * B * y * y - 4 * A * (C * y * y - n)
        if rad < 0:
            continue
        r = math.isqrt(rad)
        if r * r != rad:
            continue
        for num in {-B * y + r, -B * y - r}:
            if num % (2 * A) == 0:
                out.append((num // (2 * A), y))
    return out


def isometries(f, g) -> list[Matrix]:
    """All U in GL2(Z) with f[U] == g."""
    if disc(f) != disc(g):
        return []
    out = []
    cols1 = _vectors_of_value(f, g[0])
    cols2 = _vectors_of_value(f, g[2])
    for v in cols1:
        for w in cols2:
            u = ((v[0], w[0]), (v[1], w[1]))
            if mat_det(u) in (1, -1) and act(f, u) == g:
                out.append(u)
    return out


def _in_gamma0hat(u: Matrix, p: int, proper_only: bool = False) -> bool:
    return u[1][0] % p == 0 and (not proper_only or mat_det(u) == 1)


# ---------------------------------------------------------------------------
# the forms T and their orbits


@dataclass(frozen=True)
class BinaryForm:
    """T = [[p a0, b/2], [b/2, c]]."""

    a0: int
    b: int
    c: int
    level: int

    def __post_init__(self):
        if self.a0 <= 0 or self.c <= 0 or self.disc >= 0:
            raise ValueError(f"({self.a0},{self.b},{self.c}) at level {self.level} is not positive definite")

    @property
    def disc(self) -> int:
        return self.b * self.b - 4 * self.level * self.a0 * self.c

    @property
    def triple(self) -> tuple[int, int, int]:
        return (self.level * self.a0, self.b, self.c)

    @property
    def key(self) -> tuple[int, int, int]:
        return (self.a0, self.b, self.c)

    @classmethod
    def from_triple(cls, t, p: int) -> "BinaryForm":
        A, B, C = t
        if A % p:
            raise ValueError(f"{t}: top-left entry not divisible by {p}")
        return cls(A // p, B, C, p)

    def act(self, u: Matrix) -> "BinaryForm":
        if u[1][0] % self.level:
            raise ValueError("matrix not in Gamma0^(p)")
        return BinaryForm.from_triple(act(self.triple, u), self.level)


def is_equivalent(T: BinaryForm, T2: BinaryForm, p: int | None = None, proper_only: bool = False) -> Matrix | None:
    """Some U in Gamma0^(p) with T[U] = T2, or None.

    With ``proper_only`` only det U = 1 is allowed (plain Gamma0(p)).
    """
    p = p or T.level
    if T.disc != T2.disc:
        raise ValueError("discriminants differ")
    f, M = reduce_form(T.triple)
    g, M2 = reduce_form(T2.triple)
    M2inv = mat_inv(M2)
    # T[M alpha M2^-1] = f[alpha M2^-1] = g[M2^-1] = T2
    for alpha in isometries(f, g):
        u = mat_mul(mat_mul(M, alpha), M2inv)
        if _in_gamma0hat(u, p, proper_only):
            return u
    return None


def stabilizer(T: BinaryForm, p: int | None = None, proper_only: bool = False) -> list[Matrix]:
    p = p or T.level
    f, M = reduce_form(T.triple)
    Minv = mat_inv(M)
    out = []
    for alpha in isometries(f, f):
        u = mat_mul(mat_mul(M, alpha), Minv)
        if _in_gamma0hat(u, p, proper_only):
            out.append(u)
    return out


def epsilon_T(T: BinaryForm, p: int | None = None) -> int:
    """#{U in Gamma0^(p) : T[U] = T}."""
    return len(stabilizer(T, p))


def small_representative(T: BinaryForm) -> BinaryForm:
    """A Gamma0(p)-equivalent form with small coefficients (greedy descent)."""
    p = T.level
    A, B, C = T.triple
    while True:
        changed = False
        # x -> x + k y keeps A, sends B -> B + 2Ak
        k = -((B + A) // (2 * A)) if not (-A < B <= A) else 0
        if k:
            A, B, C = act((A, B, C), ((1, k), (0, 1)))
            changed = True
        # y -> p k x + y keeps C, sends A -> A + B p k + C p^2 k^2
        step = 2 * C * p
        k = round(-B / step) if step else 0
        if k:
            cand = act((A, B, C), ((1, 0), (p * k, 1)))
            if cand[0] < A:
                A, B, C = cand
                changed = True
        if not changed:
            break
    return BinaryForm.from_triple((A, B, C), p)


@dataclass
class OrbitDecomposition:
    disc: int
    level: int
    reps: list[tuple[BinaryForm, int]]
    gamma0_count: int  # number of Gamma0(p)-classes before the diag(1,-1) merge

    def mass(self) -> Fraction:
        return sum((Fraction(1, e) for _, e in self.reps), Fraction(0))

    def find(self, T: BinaryForm) -> tuple[int, Matrix]:
        """Index of the orbit containing T and a matrix U with rep[U] = T."""
        for i, (R, _) in enumerate(self.reps):
            u = is_equivalent(R, T)
            if u is not None:
                return i, u
        raise ValueError(f"{T.key} lies in no orbit of disc {self.disc}")


def _root_matrices(f, p: int) -> list[Matrix]:
    """SL2(Z) matrices whose first column is a root of f on P^1(F_p)."""
    A, B, C = f
    out = []
    if A % p == 0:
        out.append(IDENTITY)  # root (1:0)
    for x in range(p):
        if (A * x * x + B * x + C) % p == 0:
            out.append(((x, -1), (1, 0)))  # first column (x, 1)
    return out


def gamma0p_orbits(D: int, p: int) -> OrbitDecomposition:
    """Gamma0^(p)-orbit representatives of positive forms [p a0, b, c] of disc D."""
    if D >= 0:
        raise ValueError("D must be negative")
    if not solvable(D, p):
        return OrbitDecomposition(D, p, [], 0)
    classes = [f for f in reduced_forms(D) if math.gcd(math.gcd(*f[:2]), f[2]) == 1]
    gamma0_reps: list[BinaryForm] = []
    for f in classes:
        for sigma in _root_matrices(f, p):
            gamma0_reps.append(small_representative(BinaryForm.from_triple(act(f, sigma), p)))
    # certificate: b mod 2p with b^2 = D mod 4p, times h(D)
    roots = sum(1 for b in range(2 * p) if (b * b - D) % (4 * p) == 0)
    if len(gamma0_reps) != roots * len(classes):
        raise AssertionError(
            f"orbit count {len(gamma0_reps)} != {roots} * h for D={D}, p={p}"
        )
    for i in range(len(gamma0_reps)):
        for j in range(i):
            if is_equivalent(gamma0_reps[j], gamma0_reps[i], proper_only=True) is not None:
                raise AssertionError(f"duplicate Gamma0({p}) class for D={D}")
    reps: list[tuple[BinaryForm, int]] = []
    for T in gamma0_reps:
        if any(is_equivalent(R, T) is not None for R, _ in reps):
            continue
        reps.append((T, epsilon_T(T)))
    return OrbitDecomposition(D, p, reps, len(gamma0_reps))


# ---------------------------------------------------------------------------
# Fourier coefficient tables and A(D)


def _parse_rational(text: str) -> Fraction:
    return Fraction(text.strip())


@dataclass
class FourierCoefficientTable:
    level: int
    weight: int
    entries: dict[tuple[int, int, int], Fraction]
    al_sign: int | None = None

    @classmethod
    def from_csv(cls, text: str, level: int, weight: int = 2, al_sign: int | None = None) -> "FourierCoefficientTable":
        reader = csv.DictReader(io.StringIO(text))
        if reader.fieldnames is None or [h.strip() for h in reader.fieldnames] != ["a0", "b", "c", "value"]:
            raise ValueError("Fourier coefficient CSV needs header a0,b,c,value")
        entries = {}
        for row in reader:
            key = (int(row["a0"]), int(row["b"]), int(row["c"]))
            entries[key] = _parse_rational(row["value"])
        return cls(level, weight, entries, al_sign)

    @classmethod
    def load(cls, path: Path, level: int, weight: int = 2, al_sign: int | None = None):
        return cls.from_csv(Path(path).read_text(), level, weight, al_sign)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("a0,b,c,value\n")
        for (a0, b, c), v in sorted(self.entries.items()):
            buf.write(f"{a0},{b},{c},{v}\n")
        return buf.getvalue()

    def orbit_values(self, orbits: OrbitDecomposition) -> list[Fraction]:
        """Value on each orbit rep, checking constancy (up to det(U)^k) across entries."""
        p, k = self.level, self.weight
        vals: list[Fraction | None] = [None] * len(orbits.reps)
        for key, v in self.entries.items():
            a0, b, c = key
            if b * b - 4 * p * a0 * c != orbits.disc:
                continue
            T = BinaryForm(a0, b, c, p)
            i, u = orbits.find(T)
            # a(T) = a(R[U]) = det(U)^k a(R)
            val = v * mat_det(u) ** k
            if vals[i] is None:
                vals[i] = val
            elif vals[i] != val:
                raise OrbitConstancyError(
                    f"coefficients of {orbits.reps[i][0].key} and {key} disagree"
                )
        missing = [orbits.reps[i][0].key for i, v in enumerate(vals) if v is None]
        if missing:
            raise CoverageError(missing)
        return vals  # type: ignore[return-value]


def average_AD(tbl: FourierCoefficientTable, D: int, p: int | None = None, orbits: OrbitDecomposition | None = None) -> Fraction:
    """A(D) = sum over orbit reps of a(T) / eps(T), exactly."""
    p = p or tbl.level
    orbits = orbits or gamma0p_orbits(D, p)
    vals = tbl.orbit_values(orbits)
    return sum((v / e for v, (_, e) in zip(vals, orbits.reps)), Fraction(0))


@dataclass
class TwinCheck:
    ok: bool
    average: Fraction
    violation: str | None = None


def minus_space_vanishing_check(
    tbl: FourierCoefficientTable,
    twin: Mapping[tuple[int, int, int], tuple[int, int, int]],
    D: int,
    p: int | None = None,
) -> TwinCheck:
    """Check a(Twin T) = -a(T) on every orbit; then A(D) must vanish.

    ``twin`` maps (a0, b, c) keys of orbit representatives (any form in the
    orbit may be used) to keys of their partners.
    """
    p = p or tbl.level
    orbits = gamma0p_orbits(D, p)
    if not orbits.reps:
        return TwinCheck(True, Fraction(0))
    vals = tbl.orbit_values(orbits)
    index: dict[int, int] = {}
    for src, dst in twin.items():
        s = BinaryForm(*src, p)
        if s.disc != D:
            continue
        i, _ = orbits.find(s)
        j, _ = orbits.find(BinaryForm(*dst, p))
        index[i] = j
    if set(index) != set(range(len(orbits.reps))):
        raise ValueError("twin must be defined on every orbit")
    for i, j in index.items():
        if index[j] != i:
            raise ValueError("twin is not an involution on the orbit set")
        if orbits.reps[i][1] != orbits.reps[j][1]:
            raise ValueError("twin does not preserve stabilizer orders")
    avg = sum((v / e for v, (_, e) in zip(vals, orbits.reps)), Fraction(0))
    for i, j in sorted(index.items()):
        if vals[j] != -vals[i]:
            return TwinCheck(
                False,
                avg,
                f"a(Twin{orbits.reps[i][0].key}) = {vals[j]} but a{orbits.reps[i][0].key} = {vals[i]}",
            )
    return TwinCheck(avg == 0, avg)


def parse_twin_csv(text: str) -> dict[tuple[int, int, int], tuple[int, int, int]]:
    """Pairing CSV with header a0,b,c,twin_a0,twin_b,twin_c."""
    reader = csv.DictReader(io.StringIO(text))
    want = ["a0", "b", "c", "twin_a0", "twin_b", "twin_c"]
    if reader.fieldnames is None or [h.strip() for h in reader.fieldnames] != want:
        raise ValueError("twin CSV needs header " + ",".join(want))
    return {
        (int(r["a0"]), int(r["b"]), int(r["c"])): (int(r["twin_a0"]), int(r["twin_b"]), int(r["twin_c"]))
        for r in reader
    }
