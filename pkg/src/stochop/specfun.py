"""Airy and Bessel functions, their zeros, and the log-gamma family.

Everything here is self-contained (no special-function library). The
evaluation strategy per function:

* ``airy_ai`` / ``airy_ai_prime``: local Taylor expansions about anchor
  points spaced 0.25 apart on ``[-8, 8]``; the anchor values come from the
  Maclaurin series summed in 50-digit decimal arithmetic, so the float64
  expansions never see the cancellation the raw series suffers. For
  ``|x| > 8`` the standard asymptotic expansions are summed up to their
  smallest term.
* ``bessel_j``: ascending series for ``x <= 13``; Hankel's asymptotic
  expansion beyond that when the order is small compared with ``x``;
  otherwise Gauss-Legendre quadrature of the Schlaefli integral.
* ``log_gamma`` / ``digamma`` / ``trigamma``: upward recurrence to
  ``x >= 10`` then Stirling-type asymptotic series.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from decimal import Decimal, localcontext

import numpy as np

__all__ = [
    "DomainError",
    "ZeroKind",
    "ZeroTable",
    "airy_ai",
    "airy_ai_prime",
    "bessel_j",
    "zeros",
    "airy_zeros",
    "bessel_zeros",
    "log_gamma",
    "digamma",
    "trigamma",
]


class DomainError(ValueError):
    """Argument outside the domain of a function or model."""


# 30-digit values of Ai(0) and Ai'(0).
_AI0 = "0.355028053887817239260063186004"
_AIP0 = "-0.258819403792806798405183560189"

_ANCHOR_STEP = 0.25
_ANCHOR_LIM = 8.0
_TAYLOR_ORDER = 28
_SQRT_PI = math.sqrt(math.pi)


def _airy_maclaurin(x: Decimal) -> tuple[Decimal, Decimal]:
    # y'' = x y  =>  a_{m} = a_{m-3} / (m (m-1))
    a = [Decimal(_AI0), Decimal(_AIP0), Decimal(0)]
    val = a[0] + a[1] * x
    der = a[1]
    xp = x * x  # x^(m-1)
    m = 3
    small = Decimal(10) ** -45
    quiet = 0
    while True:
        coef = a[m - 3] / (m * (m - 1))
        a.append(coef)
        term_d = m * coef * xp
        xp = xp * x
        term_v = coef * xp
        val += term_v
        der += term_d
        if abs(term_v) < small and abs(term_d) < small:
            quiet += 1
            if quiet >= 3:
                break
        else:
            quiet = 0
        m += 1
    return val, der


def _build_anchor_table() -> tuple[np.ndarray, np.ndarray]:
    count = int(round(2 * _ANCHOR_LIM / _ANCHOR_STEP)) + 1
    anchors = -_ANCHOR_LIM + _ANCHOR_STEP * np.arange(count)
    coefs = np.zeros((count, _TAYLOR_ORDER + 1))
    with localcontext() as ctx:
        ctx.prec = 50
        for row, x0 in enumerate(anchors):
            v, d = _airy_maclaurin(Decimal(repr(float(x0))))
            c = coefs[row]
            c[0] = float(v)
            c[1] = float(d)
            c[2] = x0 * c[0] / 2.0
            for k in range(1, _TAYLOR_ORDER - 1):
                c[k + 2] = (x0 * c[k] + c[k - 1]) / ((k + 1) * (k + 2))
    return anchors, coefs


_ANCHORS, _ANCHOR_COEFS = _build_anchor_table()
_ANCHOR_DCOEFS = _ANCHOR_COEFS[:, 1:] * np.arange(1, _TAYLOR_ORDER + 1)


def _airy_uv(kmax: int = 60) -> tuple[np.ndarray, np.ndarray]:
    u = np.ones(kmax)
    for k in range(1, kmax):
        u[k] = u[k - 1] * (6 * k - 5) * (6 * k - 3) * (6 * k - 1) / ((2 * k - 1) * 216 * k)
    v = np.array([1.0] + [-(6 * k + 1) / (6 * k - 1) * u[k] for k in range(1, kmax)])
    return u, v


_AIRY_U, _AIRY_V = _airy_uv()


def _sum_to_smallest(coef: np.ndarray, z: np.ndarray, sign: float, parity: int | None = None):
    """Sum ``sum_k sign^k coef_k z^-k`` elementwise, stopping at the smallest term.

    With ``parity`` set, only terms with ``k % 2 == parity`` are kept and the
    alternation runs over that subsequence.
    """
    total = np.zeros_like(z)
    prev = np.full_like(z, np.inf)
    live = np.ones(z.shape, dtype=bool)
    idx = range(len(coef)) if parity is None else range(parity, len(coef), 2)
    for j, k in enumerate(idx):
        s = sign ** (j if parity is not None else k)
        term = s * coef[k] * z ** (-float(k))
        mag = np.abs(term)
        live &= mag < prev
        total = np.where(live, total + term, total)
        prev = np.where(live, mag, prev)
        if not live.any():
            break
    return total


def _check_finite(x: np.ndarray) -> None:
    if not np.all(np.isfinite(x)):
        raise DomainError("non-finite argument")


def _airy_eval(x, deriv: bool):
    xa = np.asarray(x, dtype=float)
    scalar = xa.ndim == 0
    xa = np.atleast_1d(xa)
    _check_finite(xa)
    out = np.empty_like(xa)

    mid = np.abs(xa) <= _ANCHOR_LIM
    if mid.any():
        xm = xa[mid]
        idx = np.clip(np.rint((xm + _ANCHOR_LIM) / _ANCHOR_STEP).astype(int), 0, len(_ANCHORS) - 1)
        dx = xm - _ANCHORS[idx]
        table = _ANCHOR_DCOEFS if deriv else _ANCHOR_COEFS
        acc = table[idx, -1].copy()
        for k in range(table.shape[1] - 2, -1, -1):
            acc = acc * dx + table[idx, k]
        out[mid] = acc

    pos = xa > _ANCHOR_LIM
    if pos.any():
        z = xa[pos]
        zeta = 2.0 / 3.0 * z**1.5
        if deriv:
            series = _sum_to_smallest(_AIRY_V, zeta, -1.0)
            out[pos] = -(z**0.25) * np.exp(-zeta) / (2 * _SQRT_PI) * series
        else:
            series = _sum_to_smallest(_AIRY_U, zeta, -1.0)
            out[pos] = np.exp(-zeta) / (2 * _SQRT_PI * z**0.25) * series

    neg = xa < -_ANCHOR_LIM
    if neg.any():
        z = -xa[neg]
        zeta = 2.0 / 3.0 * z**1.5
        th = zeta - math.pi / 4
        c, s = np.cos(th), np.sin(th)
        if deriv:
            even = _sum_to_smallest(_AIRY_V, zeta, -1.0, parity=0)
            odd = _sum_to_smallest(_AIRY_V, zeta, -1.0, parity=1)
            out[neg] = z**0.25 / _SQRT_PI * (s * even - c * odd)
        else:
            even = _sum_to_smallest(_AIRY_U, zeta, -1.0, parity=0)
            odd = _sum_to_smallest(_AIRY_U, zeta, -1.0, parity=1)
            out[neg] = (c * even + s * odd) / (_SQRT_PI * z**0.25)

    return float(out[0]) if scalar else out


def airy_ai(x):
    """Airy function Ai(x), the solution of ``f'' = x f`` decaying as x -> +inf.

    Accepts a scalar or an array. Absolute error is below 1e-12 on
    ``|x| <= 20``.
    """
    return _airy_eval(x, deriv=False)


def airy_ai_prime(x):
    """Derivative Ai'(x); same accuracy and conventions as :func:`airy_ai`."""
    return _airy_eval(x, deriv=True)


# ---------------------------------------------------------------------------
# Bessel J
# ---------------------------------------------------------------------------

_SERIES_XMAX = 13.0
_GL_NODES = 1200
_gl_cache: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    if n not in _gl_cache:
        _gl_cache[n] = np.polynomial.legendre.leggauss(n)
    return _gl_cache[n]


def _bessel_series(a: float, x: np.ndarray) -> np.ndarray:
    half = x / 2.0
    q = half * half
    if a == 0.0:
        lead = np.ones_like(x)
    else:
        with np.errstate(divide="ignore", over="ignore"):
            lead = np.exp(a * np.log(half) - log_gamma(a + 1.0))
    term = np.ones_like(x)
    total = np.ones_like(x)
    for k in range(1, 80):
        term = -term * q / (k * (k + a))
        total += term
        if np.all(np.abs(term) <= 1e-17 * np.maximum(np.abs(total), 1e-300)):
            break
    return lead * total


def _hankel_ok(a: float, x: np.ndarray) -> np.ndarray:
    return (x > _SERIES_XMAX) & (a * a <= 0.5 * x)


def _bessel_hankel(a: float, x: np.ndarray) -> np.ndarray:
    mu = 4.0 * a * a
    kmax = 80
    coef = np.ones(kmax)
    for k in range(1, kmax):
        coef[k] = coef[k - 1] * (mu - (2 * k - 1) ** 2) / (k * 8.0)
    p = _sum_to_smallest_signed(coef, x, parity=0)
    q = _sum_to_smallest_signed(coef, x, parity=1)
    w = x - (a / 2.0 + 0.25) * math.pi
    return np.sqrt(2.0 / (math.pi * x)) * (p * np.cos(w) - q * np.sin(w))


def _sum_to_smallest_signed(coef: np.ndarray, x: np.ndarray, parity: int) -> np.ndarray:
    # P = sum (-1)^j c_{2j} x^{-2j};  Q = sum (-1)^j c_{2j+1} x^{-2j-1}
    total = np.zeros_like(x)
    prev = np.full_like(x, np.inf)
    live = np.ones(x.shape, dtype=bool)
    for j, k in enumerate(range(parity, len(coef), 2)):
        term = (-1.0) ** j * coef[k] * x ** (-float(k))
        mag = np.abs(term)
        live &= (mag < prev) | (mag == 0.0)
        total = np.where(live, total + term, total)
        prev = np.where(live, mag, prev)
        if not live.any() or np.all(mag[live] == 0.0):
            break
    return total


def _bessel_integral(a: float, x: np.ndarray) -> np.ndarray:
    # J_a(x) = 1/pi int_0^pi cos(a t - x sin t) dt
    #          - sin(a pi)/pi int_0^inf exp(-x sinh t - a t) dt
    nodes, weights = _gauss_legendre(_GL_NODES)
    t = (nodes + 1.0) * (math.pi / 2.0)
    w = weights * (math.pi / 2.0)
    first = np.cos(a * t[None, :] - x[:, None] * np.sin(t)[None, :]) @ w / math.pi
    s = math.sin(a * math.pi)
    if s == 0.0:
        return first
    # the tail integrand is negligible once x sinh t > 745
    upper = np.arcsinh(745.0 / np.maximum(x, 1e-300)) + 1.0
    n2, w2 = _gauss_legendre(400)
    tt = (n2[None, :] + 1.0) * (upper[:, None] / 2.0)
    ww = w2[None, :] * (upper[:, None] / 2.0)
    second = np.sum(np.exp(-x[:, None] * np.sinh(tt) - a * tt) * ww, axis=1)
    return first - s / math.pi * second


def bessel_j(a: float, x):
    """Bessel function of the first kind J_a(x) for real order ``a > -1``.

    Parameters
    ----------
    a : float
        Order, ``a > -1`` (non-integer orders allowed).
    x : float or array_like
        Argument(s), ``0 <= x <= 500``.

    Returns
    -------
    float or ndarray
        J_a(x), absolute error below 1e-10 for ``x <= 100``.
    """
    a = float(a)
    if not math.isfinite(a) or a <= -1.0:
        raise DomainError(f"Bessel order must exceed -1, got {a}")
    xa = np.asarray(x, dtype=float)
    scalar = xa.ndim == 0
    xa = np.atleast_1d(xa)
    _check_finite(xa)
    if np.any(xa < 0):
        raise DomainError("bessel_j requires x >= 0")
    out = np.empty_like(xa)
    small = xa <= _SERIES_XMAX
    if small.any():
        out[small] = _bessel_series(a, xa[small])
    hank = _hankel_ok(a, xa)
    if hank.any():
        out[hank] = _bessel_hankel(a, xa[hank])
    rest = ~(small | hank)
    if rest.any():
        out[rest] = _bessel_integral(a, xa[rest])
    return float(out[0]) if scalar else out


def _bessel_j_prime(a: float, x):
    # J_a' = (a/x) J_a - J_{a+1}
    return a / x * bessel_j(a, x) - bessel_j(a + 1.0, x)


# ---------------------------------------------------------------------------
# Zeros
# ---------------------------------------------------------------------------


class ZeroKind(enum.Enum):
    AIRY_AI = "AiryAi"
    BESSEL_J = "BesselJ"


@dataclass(frozen=True)
class ZeroTable:
    """First ``len(zeros)`` zeros of Ai or J_order, in increasing order of magnitude."""

    kind: ZeroKind
    zeros: np.ndarray
    precision: float
    order: float | None = None

    def __len__(self) -> int:
        return len(self.zeros)


def _newton(f, fp, x0: np.ndarray, tol: float = 1e-14, maxiter: int = 40) -> np.ndarray:
    # Converged once every step is at roundoff level; near roundoff the steps
    # jitter instead of shrinking, so a looser floor is accepted at the end.
    x = x0.astype(float).copy()
    step = np.full_like(x, np.inf)
    for _ in range(maxiter):
        step = f(x) / fp(x)
        x -= step
        if np.all(np.abs(step) <= tol * np.maximum(1.0, np.abs(x))):
            return x
    if np.all(np.abs(step) <= 1e-11 * np.maximum(1.0, np.abs(x))):
        return x
    raise ArithmeticError("Newton iteration did not converge")


def _bisect_roots(f, lo: np.ndarray, hi: np.ndarray, iters: int = 80) -> np.ndarray:
    flo = f(lo)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        left = np.sign(fm) == np.sign(flo)
        lo = np.where(left, mid, lo)
        flo = np.where(left, fm, flo)
        hi = np.where(left, hi, mid)
    return 0.5 * (lo + hi)


def _alternates(f, z: np.ndarray, first_sign: float, left_end: float) -> bool:
    """True if f has exactly one sign change between each pair of consecutive zeros."""
    if np.any(np.diff(np.abs(z)) <= 0):
        return False
    pts = np.concatenate([[0.5 * (left_end + z[0])], 0.5 * (z[1:] + z[:-1])])
    signs = np.sign(f(pts))
    expected = first_sign * (-1.0) ** np.arange(len(pts))
    return bool(np.all(signs == expected))


def airy_zeros(k: int) -> ZeroTable:
    """The first ``k`` (negative) zeros of Ai."""
    if k < 1 or k > 10_000:
        raise DomainError("need 1 <= k <= 10000")
    t = 3.0 * math.pi / 8.0 * (4.0 * np.arange(1, k + 1) - 1.0)
    guess = -(t ** (2.0 / 3.0)) * (
        1.0 + 5.0 / 48.0 * t**-2 - 5.0 / 36.0 * t**-4 + 77125.0 / 82944.0 * t**-6
    )
    try:
        z = _newton(airy_ai, airy_ai_prime, guess)
        ok = _alternates(airy_ai, z, 1.0, 0.0)
    except ArithmeticError:
        ok = False
    if not ok:
        # bracket each zero halfway to its neighbours' asymptotic positions
        edges = np.concatenate([[0.0], 0.5 * (guess[1:] + guess[:-1]), [guess[-1] - 1.5]])
        z = _bisect_roots(airy_ai, edges[:-1].copy(), edges[1:].copy())
        z = _newton(airy_ai, airy_ai_prime, z)
        if not _alternates(airy_ai, z, 1.0, 0.0):
            raise ArithmeticError("Airy zero bracketing exhausted")
    resid = np.abs(airy_ai(z)) / np.maximum(1.0, np.abs(airy_ai_prime(z)))
    return ZeroTable(ZeroKind.AIRY_AI, z, float(max(resid.max(), 1e-15)))


def bessel_zeros(order: float, k: int) -> ZeroTable:
    """The first ``k`` positive zeros of J_order."""
    a = float(order)
    if a <= -1.0:
        raise DomainError("Bessel order must exceed -1")
    if k < 1 or k > 10_000:
        raise DomainError("need 1 <= k <= 10000")
    f = lambda x: bessel_j(a, x)
    fp = lambda x: _bessel_j_prime(a, x)
    mu = 4.0 * a * a
    b = (np.arange(1, k + 1) + a / 2.0 - 0.25) * math.pi
    e = 8.0 * b
    guess = (
        b
        - (mu - 1.0) / e
        - 4.0 * (mu - 1.0) * (7.0 * mu - 31.0) / (3.0 * e**3)
        - 32.0 * (mu - 1.0) * (83.0 * mu * mu - 982.0 * mu + 3779.0) / (15.0 * e**5)
    )
    ok = False
    # McMahon's expansion is in powers of mu / b; once the order is large
    # compared with the first zero Newton can land on a later zero unnoticed
    if np.all(guess > 0) and mu <= 8.0 * b[0]:
        try:
            z = _newton(f, fp, guess)
            ok = bool(np.all(z > 0)) and _alternates(f, z, 1.0, max(a, 0.0))
        except (ArithmeticError, FloatingPointError):
            ok = False
    if not ok:
        # scan for sign changes; consecutive zeros of J_a are more than 2 apart
        # and the first one lies beyond the order
        lo = max(a, 1e-8)
        top = max(float(guess[-1]) + 2.0 * math.pi, lo + 5.0)
        grid = np.linspace(lo, top, int((top - lo) / 0.05) + 2)
        vals = f(grid)
        change = np.nonzero(vals[1:] * vals[:-1] < 0)[0]
        while len(change) < k:
            top *= 1.5
            grid = np.linspace(lo, top, int((top - lo) / 0.05) + 2)
            vals = f(grid)
            change = np.nonzero(vals[1:] * vals[:-1] < 0)[0]
        change = change[:k]
        # 80 halvings already reach double precision, no Newton polish needed
        z = _bisect_roots(f, grid[change].copy(), grid[change + 1].copy())
        if not _alternates(f, z, 1.0, max(a, 0.0)):
            raise ArithmeticError("Bessel zero bracketing exhausted")
    resid = np.abs(f(z)) / np.maximum(1.0, np.abs(fp(z)))
    return ZeroTable(ZeroKind.BESSEL_J, z, float(max(resid.max(), 1e-15)), order=a)


def zeros(kind: ZeroKind | str, count: int, order: float = 0.0) -> ZeroTable:
    """Dispatch to :func:`airy_zeros` or :func:`bessel_zeros`."""
    kind = ZeroKind(kind) if not isinstance(kind, ZeroKind) else kind
    if kind is ZeroKind.AIRY_AI:
        return airy_zeros(count)
    return bessel_zeros(order, count)


# ---------------------------------------------------------------------------
# log-gamma, digamma, trigamma
# ---------------------------------------------------------------------------

# B_{2k} for k = 1..10
_BERN = [1 / 6, -1 / 30, 1 / 42, -1 / 30, 5 / 66, -691 / 2730, 7 / 6, -3617 / 510, 43867 / 798, -174611 / 330]
_SHIFT = 10.0


def _positive(x: float, name: str) -> float:
    x = float(x)
    if not math.isfinite(x) or x <= 0:
        raise DomainError(f"{name} requires x > 0, got {x}")
    return x


def _log_gamma_scalar(x: float) -> float:
    if x == 1.0 or x == 2.0:
        return 0.0
    shift = 0.0
    while x < _SHIFT:
        shift += math.log(x)
        x += 1.0
    s = (x - 0.5) * math.log(x) - x + 0.5 * math.log(2 * math.pi)
    xp = x
    x2 = x * x
    for k, b in enumerate(_BERN, start=1):
        s += b / (2 * k * (2 * k - 1) * xp)
        xp *= x2
    return s - shift


def log_gamma(x):
    """log Gamma(x) for x > 0 (scalar or array), relative error ~1e-14."""
    xa = np.asarray(x, dtype=float)
    if xa.ndim == 0:
        return _log_gamma_scalar(_positive(xa, "log_gamma"))
    return np.array([_log_gamma_scalar(_positive(v, "log_gamma")) for v in xa.ravel()]).reshape(xa.shape)


def digamma(x: float) -> float:
    """Digamma Gamma'(x)/Gamma(x) for x > 0."""
    x = _positive(x, "digamma")
    acc = 0.0
    while x < _SHIFT:
        acc -= 1.0 / x
        x += 1.0
    s = math.log(x) - 0.5 / x
    x2 = x * x
    xp = x2
    for k, b in enumerate(_BERN, start=1):
        s -= b / (2 * k * xp)
        xp *= x2
    return s + acc


def trigamma(x: float) -> float:
    """Trigamma, the derivative of :func:`digamma`, for x > 0."""
    x = _positive(x, "trigamma")
    acc = 0.0
    while x < _SHIFT:
        acc += 1.0 / (x * x)
        x += 1.0
    s = 1.0 / x + 0.5 / (x * x)
    xp = x**3
    x2 = x * x
    for k, b in enumerate(_BERN, start=1):
        s += b / xp
        xp *= x2
    return s + acc
