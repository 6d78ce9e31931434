"""Point counting on genus-2 curves y^2 + h(x) y = f(x) over F_q and F_{q^2}.

Odd characteristic goes through g = 4f + h^2 and the quadratic character;
characteristic 2 enumerates (x, y) pairs directly.  The prime sweep used to
build L-series runs a compiled finite-difference loop, so the cost per prime
is a handful of additions per field element.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from numba import njit


# ---------------------------------------------------------------------------
# polynomials with integer coefficients, ascending order


def poly_trim(c: Sequence[int]) -> tuple[int, ...]:
    c = list(c)
    while len(c) > 1 and c[-1] == 0:
        c.pop()
    return tuple(int(v) for v in c) if c else (0,)


def poly_add(a: Sequence[int], b: Sequence[int]) -> tuple[int, ...]:
    n = max(len(a), len(b))
    return poly_trim([(a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(n)])


def poly_mul(a: Sequence[int], b: Sequence[int]) -> tuple[int, ...]:
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return poly_trim(out)


def poly_scale(a: Sequence[int], k: int) -> tuple[int, ...]:
    return poly_trim([k * v for v in a])


def poly_degree(a: Sequence[int]) -> int:
    a = poly_trim(a)
    return -1 if a == (0,) else len(a) - 1


def _poly_str(c: Sequence[int]) -> str:
    terms = []
    for i in range(len(c) - 1, -1, -1):
        v = c[i]
        if v == 0:
            continue
        mag = abs(v)
        coef = "" if (mag == 1 and i > 0) else str(mag)
        mono = "" if i == 0 else ("x" if i == 1 else f"x^{i}")
        sign = "-" if v < 0 else "+"
        terms.append((sign, coef + mono))
    if not terms:
        return "0"
    s = ("-" if terms[0][0] == "-" else "") + terms[0][1]
    for sign, t in terms[1:]:
        s += f" {sign} {t}"
    return s


_TERM = re.compile(r"([+-]?)\s*(\d*)\s*(x(?:\^(\d+))?)?")


def parse_poly(text: str) -> tuple[int, ...]:
    """Parse a polynomial in x such as ``-3x^6 + 18x^4 - 54x + 57``."""
    s = text.replace(" ", "").replace("\\left", "").replace("\\right", "")
    s = s.replace("{", "").replace("}", "")
    if not s:
        raise ValueError("empty polynomial")
    coeffs: dict[int, int] = {}
    pos = 0
    while pos < len(s):
        m = _TERM.match(s, pos)
        if not m or m.end() == pos:
            raise ValueError(f"cannot parse polynomial {text!r} at {s[pos:]!r}")
        sign, num, xpart, exp = m.groups()
        if not num and not xpart:
            raise ValueError(f"cannot parse polynomial {text!r}")
        c = int(num) if num else 1
        if sign == "-":
            c = -c
        e = 0 if not xpart else (int(exp) if exp else 1)
        coeffs[e] = coeffs.get(e, 0) + c
        pos = m.end()
    deg = max(coeffs)
    return poly_trim([coeffs.get(i, 0) for i in range(deg + 1)])


def parse_equation(text: str) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Split ``y^2 + h(x) y = f(x)`` into ``(f, h)`` coefficient tuples."""
    s = text.replace("$", "").replace("\\left", "").replace("\\right", "")
    s = s.replace("{", "").replace("}", "")
    lhs, rhs = s.split("=")
    f = parse_poly(rhs)
    lhs = lhs.replace(" ", "")
    if not lhs.startswith("y^2"):
        raise ValueError(f"equation must start with y^2: {text!r}")
    rest = lhs[3:]
    if not rest:
        return f, (0,)
    if not rest.startswith("+") or not rest.endswith("y"):
        raise ValueError(f"cannot parse left-hand side of {text!r}")
    hp = rest[1:-1]
    if hp.startswith("(") and hp.endswith(")"):
        hp = hp[1:-1]
    h = parse_poly(hp) if hp else (1,)
    return f, h


# ---------------------------------------------------------------------------
# curve data


@dataclass(frozen=True)
class CurveSpec:
    """One row of the curve table: level, Atkin-Lehner sign, bad-factor lambda, model."""

    level: int
    al_sign: int
    lambda_p: int
    f_coeffs: tuple[int, ...]
    h_coeffs: tuple[int, ...] = (0,)
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "f_coeffs", poly_trim(self.f_coeffs))
        object.__setattr__(self, "h_coeffs", poly_trim(self.h_coeffs))
        if not self.label:
            object.__setattr__(self, "label", str(self.level))
        if self.al_sign not in (1, -1):
            raise ValueError("al_sign must be +1 or -1")
        if not is_prime(self.level):
            raise ValueError(f"level {self.level} is not prime")
        if poly_degree(self.f_coeffs) > 6 or poly_degree(self.h_coeffs) > 3:
            raise ValueError("need deg f <= 6 and deg h <= 3")
        if poly_degree(self.g_coeffs) not in (5, 6):
            raise ValueError("4f + h^2 must have degree 5 or 6")

    @property
    def g_coeffs(self) -> tuple[int, ...]:
        return poly_add(poly_scale(self.f_coeffs, 4), poly_mul(self.h_coeffs, self.h_coeffs))

    def equation(self) -> str:
        h = poly_trim(self.h_coeffs)
        if h == (0,):
            lhs = "y^2"
        elif h == (1,):
            lhs = "y^2 + y"
        else:
            hs = _poly_str(h)
            lhs = f"y^2 + {hs} y" if poly_degree(h) <= 1 and sum(1 for v in h if v) == 1 else f"y^2 + ({hs}) y"
        return f"{lhs} = {_poly_str(self.f_coeffs)}"

    def is_nonsingular(self) -> bool:
        """g = 4f + h^2 squarefree over Q, of degree 5 or 6."""
        g = self.g_coeffs
        return poly_degree(g) in (5, 6) and poly_discriminant(g) != 0

    def with_model(self, f: Sequence[int], h: Sequence[int]) -> "CurveSpec":
        return CurveSpec(self.level, self.al_sign, self.lambda_p, tuple(f), tuple(h), self.label)


def poly_discriminant(c: Sequence[int]) -> int:
    """Discriminant of an integer polynomial via the Sylvester resultant."""
    from fractions import Fraction

    c = poly_trim(c)
    n = len(c) - 1
    if n < 1:
        return 0
    dc = [i * c[i] for i in range(1, n + 1)]
    res = _resultant([Fraction(v) for v in c], [Fraction(v) for v in dc])
    sign = -1 if (n * (n - 1) // 2) % 2 else 1
    val = sign * res / c[-1]
    assert val.denominator == 1
    return int(val)


def _resultant(a, b):
    # Sylvester determinant by fraction-exact Gaussian elimination
    m, n = len(a) - 1, len(b) - 1
    size = m + n
    rows = []
    for i in range(n):
        rows.append([0] * i + list(reversed(a)) + [0] * (size - m - 1 - i))
    for i in range(m):
        rows.append([0] * i + list(reversed(b)) + [0] * (size - n - 1 - i))
    det = 1
    M = [r[:] for r in rows]
    for col in range(size):
        piv = next((r for r in range(col, size) if M[r][col] != 0), None)
        if piv is None:
            return 0
        if piv != col:
            M[col], M[piv] = M[piv], M[col]
            det = -det
        det *= M[col][col]
        for r in range(col + 1, size):
            if M[r][col] != 0:
                fac = M[r][col] / M[col][col]
                M[r] = [x - fac * y for x, y in zip(M[r], M[col])]
    return det


# ---------------------------------------------------------------------------
# primes


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    r = math.isqrt(n)
    for d in range(3, r + 1, 2):
        if n % d == 0:
            return False
    return True


def primes_up_to(n: int) -> np.ndarray:
    if n < 2:
        return np.zeros(0, dtype=np.int64)
    sieve = np.ones(n + 1, dtype=bool)
    sieve[:2] = False
    for i in range(2, math.isqrt(n) + 1):
        if sieve[i]:
            sieve[i * i :: i] = False
    return np.nonzero(sieve)[0].astype(np.int64)


def least_nonresidue(q: int) -> int:
    for d in range(2, q):
        if pow(d, (q - 1) // 2, q) == q - 1:
            return d
    raise AssertionError(f"no quadratic non-residue mod {q}")


# ---------------------------------------------------------------------------
# counting


@dataclass(frozen=True)
class PointCounts:
    q: int
    n1: int
    n2: int | None = None

    def __post_init__(self):
        if not 0 <= self.n1 <= 2 * self.q + 2:
            raise ValueError(f"N1={self.n1} out of range for q={self.q}")
        if self.n2 is not None and not 0 <= self.n2 <= 2 * self.q**2 + 2:
            raise ValueError(f"N2={self.n2} out of range for q={self.q}")


@njit(cache=True)
def _char_sum(g, q):
    """Sum of the quadratic character of g(x) over x in F_q, q an odd prime.

    g holds ascending coefficients already reduced into [0, q).
    """
    chi = np.full(q, -1, dtype=np.int8)
    chi[0] = 0
    s = 0
    for y in range(1, (q + 1) // 2):
        s += 2 * y - 1
        if s >= q:
            s %= q
        chi[s] = 1
    d = g.shape[0] - 1
    # forward differences of g at 0 .. d
    diff = np.zeros(d + 1, dtype=np.int64)
    for x in range(d + 1):
        v = 0
        for i in range(d, -1, -1):
            v = (v * x + g[i]) % q
        diff[x] = v
    for k in range(1, d + 1):
        for i in range(d, k - 1, -1):
            diff[i] = (diff[i] - diff[i - 1]) % q
    # pad to degree 6 so the loop runs on scalars
    d0 = diff[0]
    d1 = diff[1] if d >= 1 else 0
    d2 = diff[2] if d >= 2 else 0
    d3 = diff[3] if d >= 3 else 0
    d4 = diff[4] if d >= 4 else 0
    d5 = diff[5] if d >= 5 else 0
    d6 = diff[6] if d >= 6 else 0
    total = 0
    # branch-free reduction: t < 0 -> add q back
    for x in range(q):
        total += chi[d0]
        t = d0 + d1 - q
        d0 = t + (q & (t >> 63))
        t = d1 + d2 - q
        d1 = t + (q & (t >> 63))
        t = d2 + d3 - q
        d2 = t + (q & (t >> 63))
        t = d3 + d4 - q
        d3 = t + (q & (t >> 63))
        t = d4 + d5 - q
        d4 = t + (q & (t >> 63))
        t = d5 + d6 - q
        d5 = t + (q & (t >> 63))
    return total


def _legendre(a: int, q: int) -> int:
    a %= q
    if a == 0:
        return 0
    return 1 if pow(a, (q - 1) // 2, q) == 1 else -1


def _infinity_odd(g: Sequence[int], q: int, ext: int) -> int:
    g6 = g[6] if len(g) > 6 else 0
    if g6 % q == 0:
        return 1
    if ext == 2:
        return 2
    return 1 + _legendre(g6, q)


def _count_odd_ext1(g: Sequence[int], q: int) -> int:
    gm = np.array([v % q for v in g], dtype=np.int64)
    return q + int(_char_sum(gm, q)) + _infinity_odd(g, q, 1)


def _count_odd_ext2(g: Sequence[int], q: int) -> int:
    # F_{q^2} = F_q[t]/(t^2 - d); z is a square iff its norm a^2 - d b^2 is
    d = least_nonresidue(q)
    a = np.repeat(np.arange(q, dtype=np.int64), q)
    b = np.tile(np.arange(q, dtype=np.int64), q)
    ra = np.zeros_like(a)
    rb = np.zeros_like(b)
    for c in reversed(g):
        ra, rb = (ra * a + d * ((rb * b) % q)) % q, (ra * b + rb * a) % q
        ra = (ra + c) % q
    norm = (ra * ra - d * ((rb * rb) % q)) % q
    chi = np.full(q, -1, dtype=np.int64)
    chi[0] = 0
    chi[(np.arange(1, q, dtype=np.int64) ** 2) % q] = 1
    affine = q * q + int(chi[norm].sum())
    return affine + _infinity_odd(g, q, 2)


# F_4 = {0, 1, w, w+1} encoded as 2-bit integers, w^2 = w + 1
_F4_MUL = np.array([[0, 0, 0, 0], [0, 1, 2, 3], [0, 2, 3, 1], [0, 3, 1, 2]], dtype=np.int64)


def _count_char2(f: Sequence[int], h: Sequence[int], ext: int) -> int:
    size = 2**ext
    elems = range(size)

    def mul(x, y):
        return x & y if ext == 1 else int(_F4_MUL[x, y])

    def ev(poly, x):
        acc = 0
        for c in reversed(poly):
            acc = mul(acc, x) ^ (c & 1)
        return acc

    affine = 0
    for x in elems:
        fx, hx = ev(f, x), ev(h, x)
        for y in elems:
            if mul(y, y) ^ mul(hx, y) == fx:
                affine += 1
    h3 = (h[3] if len(h) > 3 else 0) & 1
    f6 = (f[6] if len(f) > 6 else 0) & 1
    inf = sum(1 for y in elems if mul(y, y) ^ mul(h3, y) == f6)
    return affine + inf


def count_points(curve: CurveSpec, q: int, ext: int = 1) -> int:
    """Points on the projective model of ``curve`` over F_{q^ext}.

    The model is counted as given; at q equal to the level (or any prime where
    the model is singular) the answer describes that singular reduction.
    """
    if ext not in (1, 2):
        raise ValueError("ext must be 1 or 2")
    if not is_prime(q):
        raise ValueError(f"{q} is not prime")
    if q == 2:
        return _count_char2(curve.f_coeffs, curve.h_coeffs, ext)
    g = curve.g_coeffs
    return _count_odd_ext1(g, q) if ext == 1 else _count_odd_ext2(g, q)


def extension_count(pc: PointCounts, ext: int) -> int:
    """#C(F_{q^ext}) from N1 and N2 through the zeta function (good primes only).

    The reciprocal roots of the L-polynomial have power sums s_k with
    N_k = q^k + 1 - s_k; Newton's identities give s_k from s_1 and s_2.
    """
    if pc.n2 is None:
        raise ValueError("extension counts need N2")
    q = pc.q
    s = [4, q + 1 - pc.n1, q * q + 1 - pc.n2]
    e = [1, s[1], (s[1] * s[1] - s[2]) // 2, q * s[1], q * q]
    for k in range(3, ext + 1):
        v = 0
        for i in range(1, min(k, 4) + 1):
            term = e[i] * (s[k - i] if i < k else k)
            v += term if i % 2 else -term
        s.append(v)
    return q**ext + 1 - s[ext]


def hecke_from_counts(pc: PointCounts) -> tuple[int, int | None]:
    """(lambda_q, lambda_{q^2}) from N1, N2; the second is None without N2."""
    q = pc.q
    lam = 1 + q - pc.n1
    if pc.n2 is None:
        return lam, None
    two = pc.n1 * pc.n1 - pc.n2
    if two % 2:
        raise AssertionError(f"N1^2 - N2 odd at q={q}: point count is wrong")
    aq2 = 1 + q + q * q - (1 + q) * pc.n1 + two // 2
    return lam, aq2 - 1


# ---------------------------------------------------------------------------
# models that are smooth at small primes


def model_bad_primes(curve: CurveSpec) -> list[int]:
    """Primes dividing the model discriminant (2 counted when the model is bad there)."""
    g = curve.g_coeffs
    disc = abs(poly_discriminant(g))
    deg = poly_degree(g)
    # the genus-2 discriminant strips 2^12 (sextic) or 2^8 (quintic with unit g5 scaling)
    strip = 12 if deg == 6 else 8
    out = []
    d = disc
    v2 = 0
    while d % 2 == 0:
        d //= 2
        v2 += 1
    if v2 > strip or curve.h_coeffs == (0,) or all(c % 2 == 0 for c in curve.h_coeffs):
        out.append(2)
    p = 3
    while p * p <= d:
        if d % p == 0:
            out.append(p)
            while d % p == 0:
                d //= p
        p += 2
    if d > 1:
        out.append(d)
    return out


def model_at_two(curve: CurveSpec) -> CurveSpec:
    """A model y^2 + H y = F' good at 2 when the given one has even h.

    With h even, Y = y + h/2 gives Y^2 = F := f + h^2/4.  Writing Y = 2 y' + H
    gives y'^2 + H y' = (F - H^2) / 4, an integral model whenever F = H^2 mod 4,
    and H is searched among polynomials with coefficients in 0..3.
    """
    if any(c % 2 for c in curve.h_coeffs):
        return curve
    half = tuple(c // 2 for c in curve.h_coeffs)
    big_f = poly_add(curve.f_coeffs, poly_mul(half, half))
    for hc in itertools.product(range(4), repeat=4):
        H = poly_trim(hc)
        rem = poly_add(big_f, poly_scale(poly_mul(H, H), -1))
        if all(c % 4 == 0 for c in rem):
            cand = curve.with_model(tuple(c // 4 for c in rem), H)
            if 2 not in model_bad_primes(cand):
                return cand
    raise ValueError(f"no model good at 2 found for curve {curve.label}")


# ---------------------------------------------------------------------------
# sweeps and the point-count cache


@dataclass
class CountTable:
    """Point counts keyed by prime, as stored in the CSV cache."""

    counts: dict[int, PointCounts] = field(default_factory=dict)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("q,N1,N2\n")
        for q in sorted(self.counts):
            pc = self.counts[q]
            buf.write(f"{q},{pc.n1},{'' if pc.n2 is None else pc.n2}\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "CountTable":
        reader = csv.DictReader(io.StringIO(text))
        if reader.fieldnames != ["q", "N1", "N2"]:
            raise ValueError("point-count cache must have header q,N1,N2")
        out = {}
        for row in reader:
            q = int(row["q"])
            out[q] = PointCounts(q, int(row["N1"]), int(row["N2"]) if row["N2"] else None)
        return cls(out)

    def save(self, path: Path) -> None:
        Path(path).write_bytes(self.to_csv().encode())

    @classmethod
    def load(cls, path: Path) -> "CountTable":
        return cls.from_csv(Path(path).read_text())


def sweep_counts(
    curve: CurveSpec,
    bound: int,
    n2_bound: int | None = None,
    skip: Iterable[int] = (),
    existing: CountTable | None = None,
) -> CountTable:
    """Count points at every prime q <= bound (N2 only for q <= n2_bound).

    Primes in ``skip`` are left out.  q = 2 uses a model good at 2.
    """
    if n2_bound is None:
        n2_bound = math.isqrt(bound)
    skip = set(skip)
    table = CountTable(dict(existing.counts) if existing else {})
    g = curve.g_coeffs
    for q in primes_up_to(bound).tolist():
        if q in skip:
            continue
        need2 = q <= n2_bound
        old = table.counts.get(q)
        if old is not None and (old.n2 is not None or not need2):
            continue
        if q == 2:
            c2 = model_at_two(curve)
            n1 = count_points(c2, 2, 1)
            n2 = count_points(c2, 2, 2) if need2 else None
        else:
            n1 = old.n1 if old is not None else _count_odd_ext1(g, q)
            n2 = _count_odd_ext2(g, q) if need2 else None
        pc = PointCounts(q, n1, n2)
        if q != curve.level and abs(q + 1 - n1) > 4 * math.sqrt(q):
            raise AssertionError(f"Weil bound fails at q={q} for curve {curve.label}")
        table.counts[q] = pc
    return table
