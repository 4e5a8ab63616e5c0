"""Tridiagonal, bidiagonal and bidiagonal-block matrix models of the beta-ensembles.

Index conventions follow the standard displays: degrees of freedom decrease
down the diagonal. ``beta = inf`` gives the deterministic zero-temperature
models, whose spectra are zeros of Hermite, Laguerre and Jacobi polynomials.

All samplers take a :class:`~stochop.randsrc.StreamKey` (or a numpy
Generator) and consume the stream in a fixed order, so a key determines the
model completely.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .linalg import Bidiagonal, SymTridiagonal
from .randsrc import generator
from .specfun import DomainError

__all__ = [
    "HermiteModel",
    "LaguerreSquare",
    "LaguerreRect",
    "JacobiModel",
    "parse_beta",
    "sample_hermite",
    "hermite_inf",
    "sample_laguerre_L",
    "laguerre_L_inf",
    "sample_laguerre_M",
    "laguerre_M_inf",
    "sample_jacobi",
    "jacobi_inf",
    "model_from_dict",
]

INF = math.inf


def parse_beta(beta) -> float:
    """Accept a positive float or the strings ``'inf'``/``'infinity'``."""
    if isinstance(beta, str):
        beta = float(beta.strip().lower().replace("infinity", "inf"))
    beta = float(beta)
    if not beta > 0 or math.isnan(beta):
        raise DomainError(f"beta must be positive, got {beta}")
    return beta


def _check_n(n: int) -> int:
    if int(n) != n or n < 1:
        raise DomainError(f"n must be a positive integer, got {n}")
    return int(n)


def _chi_over_root_beta(rng, dof: np.ndarray, beta: float) -> np.ndarray:
    """chi_{dof} / sqrt(beta), or sqrt(dof / beta) in the beta = inf limit."""
    if math.isinf(beta):
        return np.sqrt(dof / 1.0)
    return np.sqrt(rng.gamma(dof / 2.0, 2.0) / beta)


def _encode(x):
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, float) and math.isinf(x):
        return "inf"
    return x


# ---------------------------------------------------------------------------
# Hermite
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HermiteModel:
    """n-by-n beta-Hermite model: symmetric tridiagonal.

    Diagonal ``G_i / sqrt(beta)``, off-diagonal ``chi_{(n-i) beta} / sqrt(2 beta)``.
    """

    n: int
    beta: float
    matrix: SymTridiagonal

    kind = "hermite"

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "n": self.n,
            "beta": _encode(self.beta),
            "diag": _encode(self.matrix.diag),
            "offdiag": _encode(self.matrix.offdiag),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    def to_dense(self) -> np.ndarray:
        return self.matrix.to_dense()


def sample_hermite(key, n: int, beta) -> HermiteModel:
    n = _check_n(n)
    beta = parse_beta(beta)
    if math.isinf(beta):
        return hermite_inf(n)
    rng = generator(key)
    diag = rng.standard_normal(n) / math.sqrt(beta)
    dof = beta * np.arange(n - 1, 0, -1, dtype=float)
    off = np.sqrt(rng.gamma(dof / 2.0, 2.0)) / math.sqrt(2.0 * beta)
    return HermiteModel(n, beta, SymTridiagonal(diag, off))


def hermite_inf(n: int) -> HermiteModel:
    """Zero-temperature Hermite model; eigenvalues are the roots of H_n."""
    n = _check_n(n)
    off = np.sqrt(np.arange(n - 1, 0, -1, dtype=float) / 2.0)
    return HermiteModel(n, INF, SymTridiagonal(np.zeros(n), off))


# ---------------------------------------------------------------------------
# Laguerre
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LaguerreSquare:
    """n-by-n upper bidiagonal beta-Laguerre model L.

    ``L[i,i] = chi_{(a+n+1-i) beta}/sqrt(beta)``, ``L[i,i+1] = chi_{(n-i) beta}/sqrt(beta)``.
    """

    n: int
    beta: float
    a: float
    matrix: Bidiagonal

    kind = "laguerre-l"

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "n": self.n,
            "beta": _encode(self.beta),
            "a": self.a,
            "main": _encode(self.matrix.main),
            "adjacent": _encode(self.matrix.adjacent),
            "orientation": self.matrix.orientation,
            "shape": list(self.matrix.shape),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    def to_dense(self) -> np.ndarray:
        return self.matrix.to_dense()


@dataclass(frozen=True)
class LaguerreRect(LaguerreSquare):
    """(n+1)-by-n lower bidiagonal beta-Laguerre model M.

    ``M[i,i] = chi_{(n+1-i) beta}/sqrt(beta)``, ``M[i+1,i] = chi_{(a+n-i) beta}/sqrt(beta)``.
    """

    kind = "laguerre-m"


def _laguerre_L(rng, n, beta, a):
    i = np.arange(1, n + 1, dtype=float)
    if math.isinf(beta):
        main = np.sqrt(a + n + 1 - i)
        sup = np.sqrt(n - i[:-1])
    else:
        main = _chi_over_root_beta(rng, beta * (a + n + 1 - i), beta)
        sup = _chi_over_root_beta(rng, beta * (n - i[:-1]), beta)
    return Bidiagonal(main, sup, "upper", (n, n))


def sample_laguerre_L(key, n: int, beta, a: float) -> LaguerreSquare:
    n = _check_n(n)
    beta = parse_beta(beta)
    a = float(a)
    if not a > -1:
        raise DomainError(f"Laguerre L needs a > -1, got {a}")
    rng = None if math.isinf(beta) else generator(key)
    return LaguerreSquare(n, beta, a, _laguerre_L(rng, n, beta, a))


def laguerre_L_inf(n: int, a: float) -> LaguerreSquare:
    """Zero-temperature L; squared singular values are the roots of L_n^(a)."""
    return sample_laguerre_L(None, n, INF, a)


def _laguerre_M(rng, n, beta, a):
    i = np.arange(1, n + 1, dtype=float)
    if math.isinf(beta):
        main = np.sqrt(n + 1 - i)
        sub = np.sqrt(a + n - i)
    else:
        main = _chi_over_root_beta(rng, beta * (n + 1 - i), beta)
        sub = _chi_over_root_beta(rng, beta * (a + n - i), beta)
    return Bidiagonal(main, sub, "lower", (n + 1, n))


def sample_laguerre_M(key, n: int, beta, a: float) -> LaguerreRect:
    n = _check_n(n)
    beta = parse_beta(beta)
    a = float(a)
    if math.isinf(beta):
        if not a >= 0:
            raise DomainError(f"Laguerre M needs a >= 0 at beta = inf, got {a}")
    elif not a > 0:
        raise DomainError(f"Laguerre M needs a > 0, got {a}")
    rng = None if math.isinf(beta) else generator(key)
    return LaguerreRect(n, beta, a, _laguerre_M(rng, n, beta, a))


def laguerre_M_inf(n: int, a: float) -> LaguerreRect:
    """Zero-temperature M; its nonzero singular values equal those of L."""
    return sample_laguerre_M(None, n, INF, a)


# ---------------------------------------------------------------------------
# Jacobi
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class JacobiModel:
    """2n-by-2n beta-Jacobi model in bidiagonal block form.

    Stores the cosines and sines of the angles ``theta_1..theta_n`` and
    ``phi_1..phi_{n-1}`` (index i at position i-1). The four n-by-n blocks
    are built on demand; within block row/column ``j`` the angle index is
    ``i = n + 1 - j``.
    """

    n: int
    beta: float
    a: float
    b: float
    c: np.ndarray
    s: np.ndarray
    cp: np.ndarray
    sp: np.ndarray

    kind = "jacobi"

    @property
    def theta(self) -> np.ndarray:
        return np.arctan2(self.s, self.c)

    @property
    def phi(self) -> np.ndarray:
        return np.arctan2(self.sp, self.cp)

    def _ext(self):
        # s'_0 := 1 and s'_n := 1, c'_0 := 0 and c'_n := 0 (phi_0 = phi_n = pi/2)
        spx = np.concatenate([[1.0], self.sp, [1.0]])
        cpx = np.concatenate([[0.0], self.cp, [0.0]])
        return spx, cpx

    def block(self, name: str) -> Bidiagonal:
        """One of ``'B11'``, ``'B12'``, ``'B21'``, ``'B22'`` as a Bidiagonal."""
        n = self.n
        spx, cpx = self._ext()
        i = np.arange(n, 0, -1)  # angle index for block row/column j = 1..n
        c, s = self.c[i - 1], self.s[i - 1]
        if name == "B11":
            main = c * spx[i]
            adj = -s[:-1] * cpx[i[:-1] - 1]
            return Bidiagonal(main, adj, "upper", (n, n))
        if name == "B12":
            main = s * spx[i - 1]
            adj = self.c[i[:-1] - 2] * cpx[i[:-1] - 1]
            return Bidiagonal(main, adj, "lower", (n, n))
        if name == "B21":
            main = -s * spx[i]
            adj = -c[:-1] * cpx[i[:-1] - 1]
            return Bidiagonal(main, adj, "upper", (n, n))
        if name == "B22":
            main = c * spx[i - 1]
            adj = -self.s[i[:-1] - 2] * cpx[i[:-1] - 1]
            return Bidiagonal(main, adj, "lower", (n, n))
        raise DomainError(f"unknown block {name!r}")

    def to_dense(self) -> np.ndarray:
        top = np.hstack([self.block("B11").to_dense(), self.block("B12").to_dense()])
        bot = np.hstack([self.block("B21").to_dense(), self.block("B22").to_dense()])
        return np.vstack([top, bot])

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "n": self.n,
            "beta": _encode(self.beta),
            "a": self.a,
            "b": self.b,
            "cos_theta": _encode(self.c),
            "sin_theta": _encode(self.s),
            "cos_phi": _encode(self.cp),
            "sin_phi": _encode(self.sp),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def _cos_sin_from_gammas(g1: np.ndarray, g2: np.ndarray):
    # cos^2 = g1/(g1+g2) ~ Beta(c, d); sin^2 = g2/(g1+g2) keeps full precision
    tot = g1 + g2
    return np.sqrt(g1 / tot), np.sqrt(g2 / tot)


def _check_ab(a: float, b: float):
    a, b = float(a), float(b)
    if not (a > -1 and b > -1):
        raise DomainError(f"Jacobi needs a, b > -1, got ({a}, {b})")
    return a, b


def sample_jacobi(key, n: int, beta, a: float, b: float) -> JacobiModel:
    n = _check_n(n)
    beta = parse_beta(beta)
    a, b = _check_ab(a, b)
    if math.isinf(beta):
        return jacobi_inf(n, a, b)
    rng = generator(key)
    i = np.arange(1, n + 1, dtype=float)
    g1 = rng.gamma(beta / 2.0 * (a + i))
    g2 = rng.gamma(beta / 2.0 * (b + i))
    c, s = _cos_sin_from_gammas(g1, g2)
    k = i[:-1]
    h1 = rng.gamma(beta / 2.0 * k)
    h2 = rng.gamma(beta / 2.0 * (a + b + 1 + k))
    cp, sp = _cos_sin_from_gammas(h1, h2)
    return JacobiModel(n, beta, a, b, c, s, cp, sp)


def jacobi_angles_inf(n: int, a: float, b: float):
    """Zero-temperature cosines and sines (c, s, c', s')."""
    i = np.arange(1, n + 1, dtype=float)
    c = np.sqrt((a + i) / (a + b + 2 * i))
    s = np.sqrt((b + i) / (a + b + 2 * i))
    k = i[:-1]
    cp = np.sqrt(k / (a + b + 1 + 2 * k))
    sp = np.sqrt((a + b + 1 + k) / (a + b + 1 + 2 * k))
    return c, s, cp, sp


def jacobi_inf(n: int, a: float, b: float) -> JacobiModel:
    """Zero-temperature Jacobi model; squared CS values are Jacobi-polynomial roots on (0,1)."""
    n = _check_n(n)
    a, b = _check_ab(a, b)
    c, s, cp, sp = jacobi_angles_inf(n, a, b)
    return JacobiModel(n, INF, a, b, c, s, cp, sp)


# ---------------------------------------------------------------------------
# deserialization
# ---------------------------------------------------------------------------


def model_from_dict(d: dict):
    """Inverse of ``model.to_dict()``."""
    kind = d["kind"]
    beta = parse_beta(d["beta"])
    if kind == "hermite":
        return HermiteModel(int(d["n"]), beta, SymTridiagonal(np.array(d["diag"]), np.array(d["offdiag"])))
    if kind in ("laguerre-l", "laguerre-m"):
        mat = Bidiagonal(np.array(d["main"]), np.array(d["adjacent"]), d["orientation"], tuple(d["shape"]))
        cls = LaguerreSquare if kind == "laguerre-l" else LaguerreRect
        return cls(int(d["n"]), beta, float(d["a"]), mat)
    if kind == "jacobi":
        return JacobiModel(
            int(d["n"]),
            beta,
            float(d["a"]),
            float(d["b"]),
            np.array(d["cos_theta"]),
            np.array(d["sin_theta"]),
            np.array(d["cos_phi"]),
            np.array(d["sin_phi"]),
        )
    raise DomainError(f"unknown model kind {kind!r}")
