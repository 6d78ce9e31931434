"""Central values by the smoothed approximate functional equation.

For Lambda(s) = Q^s gamma(s) L(s) with Lambda(s) = sign * Lambda(1 - s) the
center is

    L(1/2) = (1 + sign) * sum_n b(n) n^(-1/2) V(n / Q),

V being the inverse Mellin transform of gamma(1/2 + w) / gamma(1/2) divided by
w.  For gamma(s) = Gamma(s + 1/2)^2 this is V(x) = 2 sqrt(x) K_1(2 sqrt(x)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy import integrate, special

from .lseries import EulerFactor, GammaKind, LSeriesCoefficients, SelbergData, dirichlet_expansion

EULER_GAMMA = 0.57721566490153286061


class InsufficientTermsError(RuntimeError):
    """Not enough coefficients for the requested tolerance."""

    def __init__(self, message: str, required_n_max: int):
        super().__init__(message)
        self.required_n_max = required_n_max


# ---------------------------------------------------------------------------
# K_0, K_1


def _k_series(nu: int, x: np.ndarray) -> np.ndarray:
    # ascending series with the logarithmic term; used for x <= 2
    t = x * x / 4.0
    lg = np.log(x / 2.0)
    if nu == 0:
        term = np.ones_like(x)
        harm = 0.0
        i0 = np.zeros_like(x)
        tail = np.zeros_like(x)
        for k in range(0, 40):
            if k > 0:
                term = term * t / (k * k)
                harm += 1.0 / k
            i0 += term
            tail += term * harm
        return -(lg + EULER_GAMMA) * i0 + tail
    # K_1(x) = 1/x + ln(x/2) I_1(x) - (x/4) sum (psi(k+1) + psi(k+2)) t^k / (k! (k+1)!)
    term = np.ones_like(x)  # t^k / (k! (k+1)!)
    i1 = np.zeros_like(x)
    acc = np.zeros_like(x)
    psi_k1 = -EULER_GAMMA  # psi(k+1)
    for k in range(0, 40):
        if k > 0:
            term = term * t / (k * (k + 1))
            psi_k1 += 1.0 / k
        psi_k2 = psi_k1 + 1.0 / (k + 1)
        i1 += term
        acc += (psi_k1 + psi_k2) * term
    return 1.0 / x + lg * (x / 2.0) * i1 - (x / 4.0) * acc


# trapezoid nodes for e^x K_nu(x) = int_0^inf exp(-x (cosh t - 1)) cosh(nu t) dt
_TRAP_H = 0.08
_TRAP_T = np.arange(0.0, 4.4, _TRAP_H)
_TRAP_W = np.full(_TRAP_T.shape, _TRAP_H)
_TRAP_W[0] = _TRAP_H / 2


def _k_scaled_trapezoid(nu: int, x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    cm1 = np.cosh(_TRAP_T) - 1.0
    wt = _TRAP_W * (np.cosh(nu * _TRAP_T) if nu else 1.0)
    step = 8192
    for s in range(0, x.size, step):
        xs = x[s : s + step]
        out[s : s + step] = np.exp(-np.outer(xs, cm1)) @ wt
    return out


def _k_scaled_asymptotic(nu: int, x: np.ndarray) -> np.ndarray:
    # sqrt(pi / 2x) * sum_k a_k(nu) / x^k, truncated at the smallest term (x >= 25)
    mu = 4.0 * nu * nu
    term = np.ones_like(x)
    acc = np.ones_like(x)
    for k in range(1, 40):
        term = term * (mu - (2 * k - 1) ** 2) / (k * 8.0 * x)
        acc += term
    return np.sqrt(np.pi / (2.0 * x)) * acc


def bessel_k(nu: int, x, scaled: bool = False):
    """Modified Bessel K_nu(x) for nu in {0, 1} and x > 0.

    With ``scaled`` the value e^x K_nu(x) is returned, which stays
    representable for large x.
    """
    if nu not in (0, 1):
        raise ValueError("nu must be 0 or 1")
    arr = np.asarray(x, dtype=float)
    scalar = arr.ndim == 0
    xv = np.atleast_1d(arr).ravel()
    if np.any(~(xv > 0)):
        raise ValueError("bessel_k needs x > 0")
    out = np.empty_like(xv)
    small = xv <= 2.0
    large = xv >= 25.0
    mid = ~(small | large)
    if small.any():
        v = _k_series(nu, xv[small])
        out[small] = v * np.exp(xv[small]) if scaled else v
    if mid.any():
        v = _k_scaled_trapezoid(nu, xv[mid])
        out[mid] = v if scaled else v * np.exp(-xv[mid])
    if large.any():
        v = _k_scaled_asymptotic(nu, xv[large])
        out[large] = v if scaled else v * np.exp(-xv[large])
    out = out.reshape(np.atleast_1d(arr).shape)
    return float(out[0]) if scalar else out


# ---------------------------------------------------------------------------
# smoothing weights


def afe_weight(kind: GammaKind, x):
    """V(x) for the given gamma factor; V(0+) = 1 and V decays exponentially."""
    xv = np.asarray(x, dtype=float)
    if np.any(~(xv > 0)):
        raise ValueError("afe_weight needs x > 0")
    if kind is GammaKind.DEGREE4_PARAMODULAR_WT2:
        z = 2.0 * np.sqrt(xv)
        out = z * bessel_k(1, z)
    elif kind is GammaKind.DEGREE2_ELLIPTIC_WT2:
        out = np.exp(-xv)
    elif kind is GammaKind.DIRICHLET_ODD:
        out = special.gammaincc(0.75, xv * xv)
    else:
        raise ValueError(f"unknown gamma kind {kind}")
    return float(out) if np.ndim(out) == 0 else out


def gamma_factor(kind: GammaKind, s: complex) -> complex:
    """gamma(s) for the kind, matching :func:`afe_weight`."""
    import mpmath

    if kind is GammaKind.DEGREE4_PARAMODULAR_WT2:
        return complex(mpmath.gamma(s + 0.5) ** 2)
    if kind is GammaKind.DEGREE2_ELLIPTIC_WT2:
        return complex(mpmath.gamma(s + 0.5))
    if kind is GammaKind.DIRICHLET_ODD:
        return complex(mpmath.gamma((s + 1) / 2))
    raise ValueError(kind)


# coefficient normalization: arithmetic a(n) / n^shift is the analytic b(n) / sqrt(n)
_SHIFT = {
    GammaKind.DEGREE4_PARAMODULAR_WT2: 1.0,
    GammaKind.DEGREE2_ELLIPTIC_WT2: 1.0,
    GammaKind.DIRICHLET_ODD: 0.5,
}
# |a(n)| <= d_k(n) n^(shift - 1/2)
_DIVISOR_K = {
    GammaKind.DEGREE4_PARAMODULAR_WT2: 4,
    GammaKind.DEGREE2_ELLIPTIC_WT2: 2,
    GammaKind.DIRICHLET_ODD: 1,
}


def _weight_cutoff(kind: GammaKind) -> float:
    # x beyond which the weight is below 1e-40
    if kind is GammaKind.DEGREE4_PARAMODULAR_WT2:
        return 2400.0
    if kind is GammaKind.DEGREE2_ELLIPTIC_WT2:
        return 95.0
    return 10.0


def tail_bound(kind: GammaKind, cond_q: float, n_start: int) -> float:
    """Bound on 2 * sum_{n > n_start} |a(n)| n^-shift V(n/Q).

    Uses |a(n)| <= d_k(n) n^(shift-1/2) and sum_{n<=x} d_k(n) <= x (log x + k - 1)^(k-1)/(k-1)!
    with partial summation against the decreasing f(t) = t^(-1/2) V(t/Q).
    """
    k = _DIVISOR_K[kind]
    n0 = max(float(n_start), 1.0)

    def f(t):
        return t**-0.5 * afe_weight(kind, t / cond_q)

    def s_bound(t):
        return t * (math.log(t) + k - 1) ** (k - 1) / math.factorial(k - 1)

    def s_deriv(t):
        L = math.log(t) + k - 1
        d = L ** (k - 1) / math.factorial(k - 1)
        if k >= 2:
            d += L ** (k - 2) / math.factorial(k - 2)
        return d

    f0 = f(n0)
    if f0 == 0.0:
        return 0.0
    # integrate in u = t / n0 - 1 on [0, inf)
    def integrand(u):
        t = n0 * (1.0 + u)
        return s_deriv(t) * f(t) * n0

    cut = _weight_cutoff(kind) * cond_q / n0
    upper = max(cut, 1.0)
    val, _ = integrate.quad(integrand, 0.0, upper, limit=400, epsabs=0.0, epsrel=1e-6)
    return 2.0 * (f0 * s_bound(n0) + val)


def required_terms(kind: GammaKind, cond_q: float, tol: float) -> int:
    """Smallest n (up to a doubling grid refined by bisection) with tail_bound < tol."""
    lo, hi = 1, max(16, int(cond_q))
    while tail_bound(kind, cond_q, hi) >= tol:
        lo, hi = hi, hi * 2
        if hi > 10**10:
            raise InsufficientTermsError("tolerance unreachable", hi)
    while hi - lo > max(1, hi // 200):
        mid = (lo + hi) // 2
        if tail_bound(kind, cond_q, mid) < tol:
            hi = mid
        else:
            lo = mid
    return hi


@dataclass(frozen=True)
class CentralValueResult:
    value: float
    terms_used: int
    tail_bound: float
    sign: int


def central_value(
    coeffs: LSeriesCoefficients,
    sd: SelbergData,
    tol: float = 1e-8,
    strict: bool = True,
) -> CentralValueResult:
    """L(1/2) of an already-twisted series with data ``sd``.

    ``strict`` raises :class:`InsufficientTermsError` when the rigorous tail
    bound is not below ``tol``; otherwise the result carries the bound.
    """
    if sd.sign == -1:
        return CentralValueResult(0.0, 0, 0.0, -1)
    kind = sd.gamma_kind
    stop = int(min(coeffs.n_max, math.ceil(_weight_cutoff(kind) * sd.cond_q)))
    bound = tail_bound(kind, sd.cond_q, stop)
    if bound >= tol and strict:
        need = required_terms(kind, sd.cond_q, tol)
        raise InsufficientTermsError(
            f"tail bound {bound:.3e} >= tol {tol:.1e}; need n_max >= {need}", need
        )
    return CentralValueResult(_balanced_sum(coeffs, sd, stop), stop, bound, 1)


def _balanced_sum(coeffs: LSeriesCoefficients, sd: SelbergData, stop: int) -> float:
    kind = sd.gamma_kind
    n = np.arange(1, stop + 1, dtype=float)
    a = coeffs.a[1 : stop + 1].astype(float)
    nz = a != 0
    terms = np.zeros(stop)
    if nz.any():
        terms[nz] = a[nz] / n[nz] ** _SHIFT[kind] * afe_weight(kind, n[nz] / sd.cond_q)
    return 2.0 * math.fsum(terms)


def split_point_value(coeffs: LSeriesCoefficients, sd: SelbergData, X: float) -> float:
    """L(1/2) with the unbalanced split sum b(n) [V(n X / Q) + sign V(n / (X Q))].

    Equals :func:`central_value` exactly when the functional equation holds,
    so the difference is a check on the Selberg data and coefficients.
    """
    kind = sd.gamma_kind
    stop = int(min(coeffs.n_max, math.ceil(_weight_cutoff(kind) * sd.cond_q * max(X, 1 / X))))
    n = np.arange(1, stop + 1, dtype=float)
    a = coeffs.a[1 : stop + 1].astype(float)
    base = a / n ** _SHIFT[kind]
    w1 = afe_weight(kind, n * X / sd.cond_q)
    w2 = afe_weight(kind, n / (X * sd.cond_q))
    return math.fsum(base * w1) + sd.sign * math.fsum(base * w2)


# ---------------------------------------------------------------------------
# Dirichlet L-values at 0 and 1


def dirichlet_class_number_values(D: int, class_data=None) -> tuple[Fraction, float]:
    """(L(0, chi_D), L(1, chi_D)) = (2h/w, 2 pi h / (w sqrt|D|)) for D < 0."""
    if D >= 0:
        raise ValueError("D must be negative")
    if class_data is None:
        from .quadforms import class_data as _cd

        class_data = _cd(D)
    h, w = class_data.h, class_data.w
    return Fraction(2 * h, w), 2 * math.pi * h / (w * math.sqrt(abs(D)))


# ---------------------------------------------------------------------------
# recovering a local factor from the functional equation


@dataclass(frozen=True)
class LocalFactorFit:
    factor: EulerFactor
    residual: float
    runner_up: float


def functional_equation_residual(coeffs: LSeriesCoefficients, sd: SelbergData, X: float = 1.2) -> float:
    """|balanced AFE value - split-point value|; zero up to rounding iff the data fit."""
    if sd.sign == -1:
        balanced = 0.0
    else:
        stop = int(min(coeffs.n_max, math.ceil(_weight_cutoff(sd.gamma_kind) * sd.cond_q)))
        balanced = _balanced_sum(coeffs, sd, stop)
    return abs(balanced - split_point_value(coeffs, sd, X))


def fit_local_factor(
    factors: dict[int, EulerFactor],
    q: int,
    sd: SelbergData,
    n_max: int | None = None,
    lambda_range: int | None = None,
) -> LocalFactorFit:
    """The degree-4 factor (1, -l, c, -q l, q^2) at q that makes the functional equation hold.

    Used at primes where the given model is singular but the Jacobian is good.
    Raises if the best candidate is not clearly isolated.
    """
    X = 1.2
    if n_max is None:
        n_max = int(math.ceil(_weight_cutoff(sd.gamma_kind) * sd.cond_q * X)) + 1
    lam_max = lambda_range if lambda_range is not None else int(4 * math.sqrt(q))
    scored = []
    for lam in range(-lam_max, lam_max + 1):
        for c2 in range(-6 * q, 6 * q + 1):
            trial = dict(factors)
            trial[q] = EulerFactor(q, (1, -lam, c2, -q * lam, q * q))
            co = dirichlet_expansion(trial, n_max)
            scored.append((functional_equation_residual(co, sd, X), lam, c2))
    scored.sort()
    (best, lam, c2), second = scored[0], scored[1][0]
    if not (best < 1e-10 and second > 1e-6):
        raise ValueError(f"no isolated local factor at q={q}: residuals {best:.2e}, {second:.2e}")
    return LocalFactorFit(EulerFactor(q, (1, -lam, c2, -q * lam, q * q)), best, second)


def dirichlet_value(D: int, s: float) -> float:
    """L(s, chi_D) for negative fundamental D at real s, by the incomplete-gamma expansion.

    Gamma((s+1)/2) L(s) = sum chi(n) [Gamma((s+1)/2, x_n) n^-s
    + (q/pi)^(1/2-s) Gamma((2-s)/2, x_n) n^(s-1)] with x_n = pi n^2 / q.
    """
    from .lseries import character_values, is_fundamental

    if D >= 0 or not is_fundamental(D):
        raise ValueError("need a negative fundamental discriminant")
    q = abs(D)
    n_max = int(math.ceil(math.sqrt(60.0 * q / math.pi))) + 1
    n = np.arange(1, n_max + 1, dtype=float)
    chi = character_values(D, n_max)[1:].astype(float)
    x = math.pi * n * n / q
    a1, a2 = (s + 1) / 2, (2 - s) / 2
    up1 = special.gammaincc(a1, x) * special.gamma(a1)
    up2 = special.gammaincc(a2, x) * special.gamma(a2)
    terms = chi * (up1 * n**-s + (q / math.pi) ** (0.5 - s) * up2 * n ** (s - 1))
    return math.fsum(terms) / special.gamma(a1)
