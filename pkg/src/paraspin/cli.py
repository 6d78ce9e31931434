"""Command line interface: ``paraspin <command> [options]``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from fractions import Fraction
from pathlib import Path

from . import fixtures
from .analytic import InsufficientTermsError, central_value
from .curves import is_prime
from .gritsenko import JacobiCoefficientTable, parse_cstar_spec, verify_prop1
from .lseries import LSeriesCoefficients, is_fundamental, selberg_data, twist
from .quadforms import (
    CoverageError,
    FourierCoefficientTable,
    OrbitConstancyError,
    average_AD,
    class_data,
    gamma0p_orbits,
    solvable,
)
from .verify import DEFAULT_NMAX, build_series, cmd_verify, point_counts

EXIT_BAD_INPUT = 2
EXIT_PRECISION = 3
EXIT_FIXTURE = 4

TABLE_LEVELS = (277, 349, 353, 389, 461, 523, 587)


class UsageError(ValueError):
    pass


def _emit(args, record: dict, text: str) -> None:
    if args.json:
        print(json.dumps(record, sort_keys=True))
    else:
        print(text)


def _fraction_str(x: Fraction) -> str:
    return str(x)


def _need(args, name: str):
    val = getattr(args, name)
    if val is None:
        raise UsageError(f"--{name.replace('_', '-')} is required for {args.command}")
    return val


def _prime_level(args) -> int:
    """Integer level for the form-side commands (587+/587- both mean 587)."""
    raw = str(_need(args, "level")).rstrip("+-pm")
    try:
        p = int(raw)
    except ValueError as exc:
        raise UsageError(f"bad level {args.level!r}") from exc
    if not is_prime(p):
        raise UsageError(f"level {p} is not prime")
    return p


def _fundamental(D: int) -> int:
    if D >= 0 or not is_fundamental(D):
        raise UsageError(f"{D} is not a negative fundamental discriminant")
    return D


# ---------------------------------------------------------------------------
# commands


def do_curves(args) -> int:
    for key, c in fixtures.curves().items():
        rec = {
            "level": key,
            "p": c.level,
            "epsilon": c.al_sign,
            "lambda": c.lambda_p,
            "equation": c.equation(),
            "nonsingular": c.is_nonsingular(),
        }
        _emit(args, rec, f"{key:>5}  eps={c.al_sign:+d}  lambda={c.lambda_p:>4}  {c.equation()}")
    return 0


def do_count(args) -> int:
    curve = fixtures.curve(_need(args, "level"))
    bound = args.bound or 100
    table = point_counts(curve, bound, args.cache)
    for q in sorted(q for q in table.counts if q <= bound):
        pc = table.counts[q]
        rec = {"q": q, "N1": pc.n1, "N2": pc.n2}
        _emit(args, rec, f"{q:>8} {pc.n1:>10} {'' if pc.n2 is None else pc.n2:>14}")
    return 0


def do_central(args) -> int:
    key = fixtures.normalize_level(_need(args, "level"))
    D = _fundamental(_need(args, "D"))
    curve = fixtures.curve(key)
    n_max = args.nmax or DEFAULT_NMAX
    if args.coeff_file:
        coeffs = LSeriesCoefficients.from_csv(Path(args.coeff_file).read_text(), level=curve.level)
        coeffs = coeffs.truncated(min(n_max, coeffs.n_max))
    else:
        coeffs = build_series(curve, n_max, args.cache).coeffs
    sd = selberg_data(curve.level, D, curve.al_sign)
    res = central_value(twist(coeffs, D), sd, tol=args.tol)
    rec = {
        "level": key,
        "D": D,
        "sign": res.sign,
        "L": res.value,
        "terms": res.terms_used,
        "tail_bound": res.tail_bound,
    }
    try:
        c_f = float(fixtures.value_table(key).c_f)
        rec["normalized_with_table_C_F"] = res.value * abs(D) / c_f
    except fixtures.FixtureError:
        pass
    text = f"L(F_{key}, 1/2, chi_{D}) = {res.value:.12g}  (sign {res.sign:+d}, {res.terms_used} terms, tail <= {res.tail_bound:.1e})"
    if "normalized_with_table_C_F" in rec:
        text += f"\n|D| L / C_F = {rec['normalized_with_table_C_F']:.6f}"
    _emit(args, rec, text)
    return 0


def do_verify(args) -> int:
    report = cmd_verify(
        _need(args, "level"),
        d_min=args.dmin if args.dmin is not None else -200,
        n_max=args.nmax,
        tol=args.tol,
        cache=args.cache,
    )
    if args.json:
        print(report.to_json())
    else:
        print(report.to_text())
    return 0


def do_classnum(args) -> int:
    D = _need(args, "D")
    if D >= 0:
        raise UsageError("D must be negative")
    cd = class_data(D)
    _emit(args, {"D": D, "h": cd.h, "w": cd.w}, f"h({D}) = {cd.h}, w = {cd.w}")
    return 0


def do_classes(args) -> int:
    p = _prime_level(args)
    D = _fundamental(_need(args, "D"))
    orbits = gamma0p_orbits(D, p)
    for T, eps in orbits.reps:
        rec = {"D": D, "p": p, "a0": T.a0, "b": T.b, "c": T.c, "epsilon": eps}
        _emit(args, rec, f"[{p}*{T.a0}, {T.b}, {T.c}]  eps={eps}")
    if not args.json:
        print(f"sum 1/eps = {orbits.mass()}")
    return 0


def do_lemma_check(args) -> int:
    levels = [_prime_level(args)] if args.level is not None else list(TABLE_LEVELS)
    dmax = args.dmax or 300
    failures = 0
    for p in levels:
        checked = 0
        for D in range(-3, -dmax - 1, -1):
            if not is_fundamental(D) or D % p == 0 or not solvable(D, p):
                continue
            orbits = gamma0p_orbits(D, p)
            cd = class_data(D)
            ok = orbits.mass() == Fraction(cd.h, cd.w) and orbits.gamma0_count == 2 * cd.h
            checked += 1
            if not ok:
                failures += 1
                _emit(
                    args,
                    {"p": p, "D": D, "ok": False, "mass": str(orbits.mass()), "h": cd.h, "w": cd.w},
                    f"FAIL p={p} D={D}: sum 1/eps = {orbits.mass()} vs h/w = {cd.h}/{cd.w}",
                )
        _emit(args, {"p": p, "checked": checked, "ok": failures == 0}, f"p={p}: {checked} discriminants checked")
    return 0 if failures == 0 else 1


def do_avg(args) -> int:
    p = _prime_level(args)
    D = _fundamental(_need(args, "D"))
    path = _need(args, "coeff_file")
    tbl = FourierCoefficientTable.load(Path(path), p)
    A = average_AD(tbl, D, p)
    _emit(args, {"p": p, "D": D, "A": _fraction_str(A)}, f"A({D}) = {A}")
    return 0


def do_grit(args) -> int:
    p = _prime_level(args)
    if args.jacobi:
        jt = JacobiCoefficientTable.load(Path(args.jacobi), p)
    elif args.cstar:
        jt = parse_cstar_spec(args.cstar, p)
    else:
        raise UsageError("grit needs --jacobi FILE or --cstar const:V")
    if args.D is not None:
        Ds = [_fundamental(args.D)]
    else:
        dmax = args.dmax or 200
        Ds = [D for D in range(-3, -dmax, -1) if is_fundamental(D) and solvable(D, p)]
    bad = 0
    for D in Ds:
        lhs, rhs, ok = verify_prop1(jt, D, p)
        bad += not ok
        _emit(
            args,
            {"p": p, "D": D, "A": str(lhs), "rhs": str(rhs), "equal": ok},
            f"D={D}: A(D) = {lhs}, h/w c* = {rhs}  {'ok' if ok else 'MISMATCH'}",
        )
    return 0 if bad == 0 else 1


COMMANDS = {
    "curves": do_curves,
    "count": do_count,
    "central": do_central,
    "verify": do_verify,
    "classnum": do_classnum,
    "classes": do_classes,
    "lemma-check": do_lemma_check,
    "avg": do_avg,
    "grit": do_grit,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="paraspin", description="Twisted central values of paramodular spinor L-series.")
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--level", help="277, 349, 353, 389, 461, 523, 587+ or 587-")
    ap.add_argument("-D", type=int, help="negative fundamental discriminant")
    ap.add_argument("--nmax", type=int, help="number of Dirichlet coefficients")
    ap.add_argument("--tol", type=float, default=1e-3)
    ap.add_argument("--dmin", type=int, help="smallest D for verify (default -200)")
    ap.add_argument("--dmax", type=int, help="largest |D| for lemma-check and grit")
    ap.add_argument("--bound", type=int, help="prime bound for count")
    ap.add_argument("--coeff-file", help="CSV n,a_n for central; a0,b,c,value for avg")
    ap.add_argument("--jacobi", help="CSV n,r,c of Jacobi coefficients")
    ap.add_argument("--cstar", help="synthetic c*: const:V or random:SEED")
    ap.add_argument("--cache", help="directory for cached point counts")
    ap.add_argument("--json", action="store_true", help="machine-readable output")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return COMMANDS[args.command](args)
    except InsufficientTermsError as exc:
        print(f"paraspin: {exc} (try --nmax {exc.required_n_max})", file=sys.stderr)
        return EXIT_PRECISION
    except fixtures.FixtureError as exc:
        print(f"paraspin: {exc}", file=sys.stderr)
        return EXIT_FIXTURE
    except (UsageError, ValueError, KeyError, CoverageError, OrbitConstancyError, FileNotFoundError) as exc:
        print(f"paraspin: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())
