"""End-to-end check of L(F, 1/2, chi_D) |D| / C_F against A(D)^2 for one level."""

from __future__ import annotations

import json
import logging
import math
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Union

from . import fixtures
from .analytic import (
    _weight_cutoff,
    central_value,
    fit_local_factor,
    functional_equation_residual,
    required_terms,
)
from .curves import CountTable, CurveSpec, PointCounts, model_bad_primes, sweep_counts
from .lseries import (
    EulerFactor,
    LSeriesCoefficients,
    curve_euler_factors,
    dirichlet_expansion,
    fundamental_discriminants,
    kronecker,
    selberg_data,
    twist,
)

log = logging.getLogger(__name__)

DEFAULT_NMAX = 200_000
AUTO_NMAX_CAP = 1_000_000
ZERO_TOL = 1e-3


def cache_dir(path: Union[str, Path, None] = None) -> Path:
    if path is not None:
        d = Path(path)
    else:
        d = Path(os.environ.get("PARASPIN_CACHE", Path.home() / ".cache" / "paraspin"))
    d.mkdir(parents=True, exist_ok=True)
    return d


def _fit_primes(curve: CurveSpec) -> list[int]:
    """Odd primes other than the level where the model is singular."""
    return [q for q in model_bad_primes(curve) if q not in (2, curve.level)]


def _fit_terms(curve: CurveSpec) -> int:
    sd = selberg_data(curve.level, 1, curve.al_sign)
    return int(math.ceil(_weight_cutoff(sd.gamma_kind) * sd.cond_q * 1.2)) + 1


def point_counts(curve: CurveSpec, bound: int, cache: Union[str, Path, None] = None) -> CountTable:
    """Counts at every prime up to ``bound``, extending a CSV cache when given."""
    skip = _fit_primes(curve)
    existing = None
    path = None
    if cache is not None:
        path = cache_dir(cache) / f"counts_{fixtures.level_tag(curve.label or str(curve.level))}.csv"
        if path.exists():
            existing = CountTable.load(path)
    table = sweep_counts(curve, bound, skip=skip, existing=existing)
    if path is not None and (existing is None or table.counts != existing.counts):
        table.save(path)
    return table


@dataclass
class SeriesBuild:
    coeffs: LSeriesCoefficients
    fitted: dict[int, EulerFactor] = field(default_factory=dict)


def build_series(curve: CurveSpec, n_max: int, cache: Union[str, Path, None] = None) -> SeriesBuild:
    """Dirichlet coefficients of the curve's degree-4 series up to n_max.

    Local factors at odd primes where the model is singular are recovered
    from the functional equation.
    """
    fit_primes = _fit_primes(curve)
    bound = max(n_max, _fit_terms(curve)) if fit_primes else n_max
    counts = point_counts(curve, bound, cache)
    placeholder = {q: EulerFactor(q, (1,)) for q in fit_primes}
    factors = curve_euler_factors(counts, curve, bound, extra=placeholder)
    fitted = {}
    for q in fit_primes:
        fit = fit_local_factor(factors, q, selberg_data(curve.level, 1, curve.al_sign))
        log.info("local factor at %d recovered: %s (residual %.1e, next %.1e)", q, fit.factor.coeffs, fit.residual, fit.runner_up)
        factors[q] = fit.factor
        fitted[q] = fit.factor
    return SeriesBuild(dirichlet_expansion(factors, n_max, level=curve.level), fitted)


@dataclass
class ReportRow:
    D: int
    A: Union[int, str, None]
    sign: int
    central_value: float
    normalized: float
    target: Union[int, None]
    abs_err: Union[float, None]
    star: int
    tail_bound: float
    fe_residual: float
    certified: bool
    zero_kind: Union[str, None] = None
    nearest_square: Union[int, None] = None
    printed: Union[str, None] = None


@dataclass
class ConjectureReport:
    level: str
    al_sign: int
    n_max: int
    c_f: float
    normalizing_D: int
    rows: list[ReportRow]
    fitted_factors: dict[int, list[int]] = field(default_factory=dict)

    def row(self, D: int) -> ReportRow:
        for r in self.rows:
            if r.D == D:
                return r
        raise KeyError(D)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["fitted_factors"] = {str(k): v for k, v in sorted(self.fitted_factors.items())}
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=1)

    def to_text(self) -> str:
        lines = [
            f"level {self.level}  eps={self.al_sign:+d}  n_max={self.n_max}  C_F={self.c_f:.11g} (from D={self.normalizing_D})"
        ]
        if self.fitted_factors:
            for q, c in sorted(self.fitted_factors.items()):
                lines.append(f"  local factor at {q} from the functional equation: {c}")
        minus = self.al_sign == -1
        head = f"{'D':>6} {'A(D)':>8} {'L|D|/C_F':>14} {'target':>7} {'|err|':>9} {'printed':>12}  note"
        lines.append(head)
        for r in self.rows:
            a = "" if r.A is None else str(r.A)
            tgt = "" if r.target is None else str(r.target)
            err = "" if r.abs_err is None else f"{r.abs_err:.2e}"
            notes = []
            if not r.certified:
                notes.append(f"tail>{r.tail_bound:.1e}, fe-check {r.fe_residual:.1e}")
            if r.zero_kind:
                notes.append(r.zero_kind)
            if minus and r.nearest_square is not None:
                notes.append(f"nearest square {r.nearest_square}")
            lines.append(
                f"{r.D:>6} {a:>8} {r.normalized:>14.6f} {tgt:>7} {err:>9} {r.printed or '':>12}  {'; '.join(notes)}"
            )
        return "\n".join(lines)


def admissible_discriminants(p: int, al_sign: int, d_min: int) -> list[int]:
    """Fundamental d_min <= D < 0 with p not dividing D and eps (D|p) = +1."""
    return [
        D
        for D in sorted(fundamental_discriminants(d_min, -1), reverse=True)
        if D % p and al_sign * kronecker(D, p) == 1
    ]


def _nearest_square(v: float) -> int:
    r = round(math.sqrt(max(v, 0.0)))
    return r * r


def cmd_verify(
    level,
    d_min: int = -200,
    n_max: Union[int, None] = None,
    tol: float = 1e-3,
    cache: Union[str, Path, None] = None,
) -> ConjectureReport:
    """Compute the normalized twisted central values for one level.

    With ``n_max`` None the default is raised (up to a cap) until the tail
    bound for the largest |D| is below ``tol``; rows still above it are marked.
    """
    key = fixtures.normalize_level(level)
    curve = fixtures.curve(key)
    try:
        table = fixtures.value_table(key)
    except fixtures.FixtureError:
        table = None
    p = curve.level
    Ds = admissible_discriminants(p, curve.al_sign, d_min)
    if not Ds:
        raise ValueError(f"no admissible discriminants in [{d_min}, 0)")
    if n_max is None:
        sd = selberg_data(p, Ds[-1], curve.al_sign)
        # normalized values are about |D| / C_F times L; C_F is of order 10
        need = required_terms(sd.gamma_kind, sd.cond_q, tol * 10 / abs(Ds[-1]))
        n_max = min(max(DEFAULT_NMAX, need), AUTO_NMAX_CAP)
    build = build_series(curve, n_max, cache)
    coeffs = build.coeffs

    raw = {}
    for D in Ds:
        sd = selberg_data(p, D, curve.al_sign)
        tw = twist(coeffs, D)
        res = central_value(tw, sd, strict=False)
        fe = functional_equation_residual(tw, sd)
        raw[D] = (sd.sign, res, fe)

    # normalization row
    A_of = {}
    if table is not None:
        A_of = {r.D: r.A for r in table.rows}
    if curve.al_sign == 1:
        norm_D = next((D for D in Ds if isinstance(A_of.get(D), int) and A_of[D] != 0), None)
        if norm_D is None:
            raise ValueError("no row with a known nonzero A(D) to fix C_F")
        c_f = raw[norm_D][1].value * abs(norm_D) / A_of[norm_D] ** 2
    else:
        norm_D = Ds[0]
        c_f = raw[norm_D][1].value * abs(norm_D)
    if not c_f > 0:
        raise ValueError(f"C_F = {c_f} is not positive")

    rows = []
    for D in Ds:
        sign, res, fe = raw[D]
        normalized = res.value * abs(D) / c_f
        A = A_of.get(D) if curve.al_sign == 1 else None
        target = A * A if isinstance(A, int) else None
        tb = res.tail_bound * abs(D) / c_f
        row = ReportRow(
            D=D,
            A=A,
            sign=sign,
            central_value=res.value,
            normalized=normalized,
            target=target,
            abs_err=abs(normalized - target) if target is not None else None,
            star=1,
            tail_bound=tb,
            fe_residual=fe * abs(D) / c_f,
            certified=tb < tol,
        )
        if table is not None:
            try:
                row.printed = table.row(D).value
            except KeyError:
                pass
        if A == 0 or abs(normalized) < ZERO_TOL:
            if sign == -1:
                row.zero_kind = "sign -1 forces L = 0"
            elif abs(normalized) < ZERO_TOL:
                row.zero_kind = "central vanishing with sign +1"
            else:
                row.zero_kind = "A(D) = 0 but L is not small"
        if curve.al_sign == -1:
            row.nearest_square = _nearest_square(normalized)
        rows.append(row)
    return ConjectureReport(
        level=key,
        al_sign=curve.al_sign,
        n_max=n_max,
        c_f=c_f,
        normalizing_D=norm_D,
        rows=rows,
        fitted_factors={q: list(f.coeffs) for q, f in build.fitted.items()},
    )
