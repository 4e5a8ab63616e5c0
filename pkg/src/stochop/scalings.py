"""Finite-difference building blocks, edge scalings and exact matrix identities.

The soft-edge scalings turn a Hermite or Laguerre model into a (nonsymmetric)
tridiagonal that reads as ``(1/h^2) Delta + diag_{-1}(x) + noise``. The
hard-edge scalings turn Laguerre and Jacobi models into bidiagonals that read
as first-order difference schemes for a Bessel operator. At ``beta = inf``
the noise disappears and only an ``O(h)`` error matrix is left.

Large matrices are never densified: scaled models carry their bands.
Dense realizations exist only for small oracle checks.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np

from .ensembles import (
    HermiteModel,
    JacobiModel,
    LaguerreRect,
    LaguerreSquare,
    hermite_inf,
    jacobi_angles_inf,
    jacobi_inf,
    laguerre_L_inf,
    laguerre_M_inf,
)
from .linalg import Bidiagonal, SymTridiagonal, Tridiagonal
from .specfun import DomainError

__all__ = [
    "FdKind",
    "FdMatrix",
    "nabla",
    "delta",
    "omega",
    "flip",
    "interp",
    "shuffle",
    "ScaleKind",
    "ScaledModel",
    "LogDecomposition",
    "hermite_similarity",
    "hermite_similarity_D",
    "hermite_soft",
    "noise_stats_W",
    "soft_decompose",
    "laguerre_shuffle_embed",
    "shuffle_embed_dense",
    "laguerre_soft",
    "laguerre_hard",
    "jacobi_hard",
    "hard_fd_approx",
    "log_decompose",
    "hard_edge_noise",
    "HardEdgeNoise",
]


# ---------------------------------------------------------------------------
# finite-difference matrices
# ---------------------------------------------------------------------------


class FdKind(enum.Enum):
    GRAD = "grad"
    SECOND_DIFF = "second_diff"
    OMEGA = "omega"
    FLIP = "flip"
    INTERP = "interp"
    SHUFFLE = "shuffle"


@dataclass(frozen=True)
class FdMatrix:
    """A named finite-difference matrix; entries realized on demand."""

    kind: FdKind
    m: int
    n: int
    variant: str = ""

    def dense(self) -> np.ndarray:
        m, n = self.m, self.n
        if self.kind is FdKind.GRAD:
            out = np.zeros((m, n))
            i = np.arange(min(m, n))
            out[i, i] = -1.0
            j = np.arange(min(m, n - 1))
            out[j, j + 1] = 1.0
            return out
        if self.kind is FdKind.SECOND_DIFF:
            return 2 * np.eye(n) - np.eye(n, k=1) - np.eye(n, k=-1)
        if self.kind is FdKind.OMEGA:
            return np.diag((-1.0) ** np.arange(1, n + 1))
        if self.kind is FdKind.FLIP:
            return np.fliplr(np.eye(n))
        if self.kind is FdKind.INTERP:
            return -0.5 * omega(m).dense() @ nabla(m, n).dense() @ omega(n).dense()
        if self.kind is FdKind.SHUFFLE:
            # p_ij = 1 iff j = 2i - 1 or j = 2(i - k), with k the first block size
            k = n // 2 if self.variant == "L" else (n + 1) // 2
            out = np.zeros((n, n))
            for i in range(1, n + 1):
                j = 2 * i - 1 if i <= k else 2 * (i - k)
                out[i - 1, j - 1] = 1.0
            return out
        raise DomainError(f"unknown finite-difference kind {self.kind}")


def nabla(m: int, n: int) -> FdMatrix:
    """m-by-n upper bidiagonal with -1 on the diagonal and 1 above it."""
    return FdMatrix(FdKind.GRAD, m, n)


def delta(n: int) -> FdMatrix:
    """n-by-n second difference (2 on the diagonal, -1 beside it)."""
    return FdMatrix(FdKind.SECOND_DIFF, n, n)


def omega(n: int) -> FdMatrix:
    """diag(-1, 1, -1, ...)."""
    return FdMatrix(FdKind.OMEGA, n, n)


def flip(n: int) -> FdMatrix:
    """Anti-diagonal permutation."""
    return FdMatrix(FdKind.FLIP, n, n)


def interp(m: int, n: int) -> FdMatrix:
    """m-by-n upper bidiagonal with every band entry equal to 1/2."""
    return FdMatrix(FdKind.INTERP, m, n)


def shuffle(n: int, rect: bool = False) -> FdMatrix:
    """Perfect shuffle of size 2n (``rect=False``) or 2n+1 (``rect=True``)."""
    size = 2 * n + 1 if rect else 2 * n
    return FdMatrix(FdKind.SHUFFLE, size, size, "M" if rect else "L")


def delta_tridiag(n: int) -> SymTridiagonal:
    return SymTridiagonal(np.full(n, 2.0), np.full(n - 1, -1.0))


# ---------------------------------------------------------------------------
# scaled models
# ---------------------------------------------------------------------------


class ScaleKind(enum.Enum):
    HERMITE_SOFT = "HermiteSoft"
    LAGUERRE_SOFT_L = "LaguerreSoftL"
    LAGUERRE_SOFT_M = "LaguerreSoftM"
    LAGUERRE_HARD_L = "LaguerreHardL"
    LAGUERRE_HARD_M = "LaguerreHardM"
    JACOBI_HARD = "JacobiHard"

    @property
    def soft(self) -> bool:
        return self.value.startswith(("Hermite", "LaguerreSoft"))


@dataclass(frozen=True)
class ScaledModel:
    """An edge-scaled matrix with its mesh.

    ``grid`` holds the mesh points named in the corresponding difference
    scheme: for soft scalings, the points that appear on the subdiagonal of
    ``diag_{-1}(x)``; for hard scalings, the full interleaved mesh
    ``x_1 .. x_{2n}`` (or ``x_{2n+1}``).
    """

    matrix: Any
    h: float
    grid: np.ndarray
    kind: ScaleKind
    beta: float
    a: Optional[float] = None
    b: Optional[float] = None
    source: Any = field(default=None, repr=False, compare=False)

    @property
    def n(self) -> int:
        return self.source.n

    def smallest(self, k: int = 1) -> np.ndarray:
        """k least eigenvalues (soft) or singular values (hard)."""
        from .linalg import eig_tridiag_nonsym_smallest, sv_bidiag_smallest

        if self.kind.soft:
            return eig_tridiag_nonsym_smallest(self.matrix, k)
        return sv_bidiag_smallest(self.matrix, k)


# -- Hermite ----------------------------------------------------------------


def hermite_similarity(model: HermiteModel) -> Tridiagonal:
    """D H D^{-1} with D_ii = (n/2)^{-(i-1)/2} prod_{k<i} h_{k,k+1}.

    The superdiagonal becomes the constant sqrt(n/2) and the subdiagonal
    h_{i,i+1}^2 / sqrt(n/2); the diagonal is unchanged.
    """
    n = model.n
    if n < 2:
        raise DomainError("hermite_similarity needs n >= 2")
    c = math.sqrt(n / 2.0)
    off = model.matrix.offdiag
    return Tridiagonal(model.matrix.diag.copy(), np.full(n - 1, c), off * off / c)


def hermite_similarity_D(model: HermiteModel) -> np.ndarray:
    """The diagonal of D (small n only; it over/underflows for large n)."""
    n = model.n
    off = model.matrix.offdiag
    logd = np.concatenate([[0.0], np.cumsum(np.log(off) - 0.5 * math.log(n / 2.0))])
    return np.exp(logd)


def hermite_soft(model: HermiteModel) -> ScaledModel:
    """-sqrt(2/h) (D H D^{-1} - sqrt(2) h^{-3/2} I), h = n^{-1/3}.

    At beta = inf this is exactly (1/h^2) Delta + diag_{-1}(x_1..x_{n-1}),
    x_i = h i; the least eigenvalues converge to minus the Airy zeros.
    """
    n = model.n
    if n < 2:
        raise DomainError("hermite_soft needs n >= 2")
    h = n ** (-1.0 / 3.0)
    r = math.sqrt(2.0 / h)
    T = hermite_similarity(model)
    shift = math.sqrt(2.0) * h ** -1.5
    mat = Tridiagonal(-r * (T.diag - shift), -r * T.sup, -r * T.sub)
    grid = h * np.arange(1, n, dtype=float)
    return ScaledModel(mat, h, grid, ScaleKind.HERMITE_SOFT, model.beta, source=model)


def noise_stats_W(model: HermiteModel) -> dict:
    """Noise matrix W with H_soft^beta = H_soft^inf + (2/sqrt(beta)) W.

    Returns the diagonal ``-G_i/sqrt(2h)``, the subdiagonal
    ``-chi~^2_j/sqrt(2h)``, the centred chi-squares
    ``chi~^2_j = (chi^2_{(n-j) beta} - (n-j) beta)/sqrt(2 beta n)``, their
    exact variances ``1 - h^2 x_j`` and the grid ``x_j``.
    """
    beta = model.beta
    if math.isinf(beta):
        raise DomainError("noise_stats_W needs finite beta")
    n = model.n
    h = n ** (-1.0 / 3.0)
    G = model.matrix.diag * math.sqrt(beta)
    chi2 = 2.0 * beta * model.matrix.offdiag**2
    j = np.arange(1, n, dtype=float)
    chit = (chi2 - (n - j) * beta) / math.sqrt(2.0 * beta * n)
    x = h * j
    return {
        "W_diag": -G / math.sqrt(2.0 * h),
        "W_sub": -chit / math.sqrt(2.0 * h),
        "chi_tilde_sq": chit,
        "var_exact": 1.0 - h * h * x,
        "grid": x,
        "h": h,
    }


def soft_decompose(scaled: ScaledModel) -> dict:
    """Split a soft-edge scaled model into classical part, error E and noise.

    Returns a dict with ``classical`` (the Tridiagonal (1/h^2) Delta +
    diag_{-1}(grid)), ``E_sub`` (subdiagonal of the zero-temperature error;
    zero elsewhere by construction) and ``noise`` = scaled - scaled_inf as a
    Tridiagonal. For Hermite, ``noise == (2/sqrt(beta)) W``.
    """
    h = scaled.h
    src = scaled.source
    size = scaled.matrix.n
    if scaled.kind is ScaleKind.HERMITE_SOFT:
        inf = hermite_soft(hermite_inf(src.n))
    elif scaled.kind is ScaleKind.LAGUERRE_SOFT_L:
        inf = laguerre_soft(laguerre_L_inf(src.n, src.a))
    elif scaled.kind is ScaleKind.LAGUERRE_SOFT_M:
        inf = laguerre_soft(laguerre_M_inf(src.n, src.a))
    else:
        raise DomainError("soft_decompose needs a soft-edge model")
    inv = 1.0 / (h * h)
    classical = Tridiagonal(np.full(size, 2 * inv), np.full(size - 1, -inv), -inv + scaled.grid)
    mi = inf.matrix
    E = {
        "diag": mi.diag - classical.diag,
        "sup": mi.sup - classical.sup,
        "sub": mi.sub - classical.sub,
    }
    noise = Tridiagonal(
        scaled.matrix.diag - mi.diag, scaled.matrix.sup - mi.sup, scaled.matrix.sub - mi.sub
    )
    E_sub = E["sub"]
    if scaled.kind is not ScaleKind.HERMITE_SOFT:
        E_sub = _laguerre_soft_error(src.n, src.a, scaled.kind is ScaleKind.LAGUERRE_SOFT_M, h)
    return {"classical": classical, "E": E, "E_sub": E_sub, "noise": noise, "inf": inf}


def _laguerre_soft_error(n: int, a: float, rect: bool, h: float) -> np.ndarray:
    """Subdiagonal of E evaluated from the exact squared entries y_j^2.

    The zero-temperature subdiagonal is -2h y_j^2 and the classical one is
    -1/h^2 + x_j with 1/h^2 = 2nh, so E_j = -h (2 y_j^2 - 2n + j) for L and
    -h (2 y_j^2 - 2n + j - 1) for M (whose grid starts at x_0). Summing the
    integers and ``a`` before multiplying by h makes the cancellation exact.
    """
    # y_j^2 = acoef_j * a + k_j with integer k_j; keep the integer part separate
    i = np.arange(1, n + 1)
    if rect:
        k = np.empty(2 * n, dtype=np.int64)
        k[0::2] = n + 1 - i
        k[1::2] = n - i
        acoef = np.tile([0.0, 1.0], n)
    else:
        k = np.empty(2 * n - 1, dtype=np.int64)
        k[0::2] = n + 1 - i
        k[1::2] = n - i[:-1]
        acoef = np.tile([1.0, 0.0], n)[: 2 * n - 1]
    j = np.arange(1, len(k) + 1)
    offset = j - 1 if rect else j
    integer = (2 * k - 2 * n + offset).astype(float)
    return -h * (2 * a * acoef + integer)


# -- Laguerre soft -------------------------------------------------------------


def laguerre_shuffle_embed(model: LaguerreSquare) -> Tridiagonal:
    """D P^T [[0, L^T], [L, 0]] P D^{-1} (or the M analogue), as bands.

    The shuffled symmetric matrix has zero diagonal and off-diagonal
    ``y = (l11, l12, l22, l23, ...)`` (resp. ``(m11, m21, m22, m32, ...)``);
    the diagonal similarity makes the superdiagonal the constant sqrt(n) and
    the subdiagonal ``y^2 / sqrt(n)``.
    """
    y = model.matrix.golub_kahan()
    c = math.sqrt(model.n)
    size = len(y) + 1
    return Tridiagonal(np.zeros(size), np.full(size - 1, c), y * y / c)


def shuffle_embed_dense(model: LaguerreSquare) -> np.ndarray:
    """Dense D P^T [[..]] P D^{-1} built literally from P and D (small n oracle)."""
    n = model.n
    A = model.to_dense()
    rect = isinstance(model, LaguerreRect)
    if rect:
        # [[0, M], [M^T, 0]], M is (n+1) x n
        X = np.block([[np.zeros((n + 1, n + 1)), A], [A.T, np.zeros((n, n))]])
        adj = lambda k: A[k, k - 1]  # m_{k+1,k}, 1-based k
    else:
        X = np.block([[np.zeros((n, n)), A.T], [A, np.zeros((n, n))]])
        adj = lambda k: A[k - 1, k]  # l_{k,k+1}
    P = shuffle(n, rect).dense()
    size = X.shape[0]
    dvals = np.empty(size)
    for i in range(1, size + 1):
        val = n ** (-(i - 1) / 2.0)
        for k in range(1, i // 2 + 1):
            val *= A[k - 1, k - 1]
        for k in range(1, (i - 1) // 2 + 1):
            val *= adj(k)
        dvals[i - 1] = val
    D = np.diag(dvals)
    return D @ P.T @ X @ P @ np.linalg.inv(D)


def laguerre_soft(model: LaguerreSquare) -> ScaledModel:
    """-sqrt(2/h) (shuffled embedding - sqrt(2) h^{-3/2} I), h = (2n)^{-1/3}.

    At beta = inf this is (1/h^2) Delta + diag_{-1}(grid) + E with E
    nonzero only on the subdiagonal.
    """
    n = model.n
    h = (2.0 * n) ** (-1.0 / 3.0)
    r = math.sqrt(2.0 / h)
    T = laguerre_shuffle_embed(model)
    shift = math.sqrt(2.0) * h ** -1.5
    mat = Tridiagonal(-r * (T.diag - shift), -r * T.sup, -r * T.sub)
    rect = isinstance(model, LaguerreRect)
    if rect:
        grid = h * np.arange(0, 2 * n, dtype=float)
        kind = ScaleKind.LAGUERRE_SOFT_M
    else:
        grid = h * np.arange(1, 2 * n, dtype=float)
        kind = ScaleKind.LAGUERRE_SOFT_L
    return ScaledModel(mat, h, grid, kind, model.beta, a=model.a, source=model)


# -- hard edge -----------------------------------------------------------------


def laguerre_hard(model: LaguerreSquare) -> ScaledModel:
    """Hard-edge scaling of L (n-by-n) or M (n-by-(n+1) after transposition).

    L_hard = sqrt(2/h) F Omega L^T Omega F and
    M_hard = -sqrt(2/h) F Omega M^T Omega F, both upper bidiagonal, with
    h = 1/(2n+a+1). Singular values are those of the model times sqrt(2/h).
    """
    n, a = model.n, model.a
    h = 1.0 / (2 * n + a + 1)
    r = math.sqrt(2.0 / h)
    B = model.matrix
    if isinstance(model, LaguerreRect):
        # diag_p = chi_{(a+p-1) beta}, super_p = -chi_{p beta}  (times r / sqrt(beta))
        mat = Bidiagonal(r * B.adjacent[::-1], -r * B.main[::-1], "upper", (n, n + 1))
        grid = h * (a - 1 + np.arange(1, 2 * n + 2, dtype=float))
        kind = ScaleKind.LAGUERRE_HARD_M
    else:
        # diag_p = chi_{(a+p) beta}, super_p = -chi_{p beta}
        mat = Bidiagonal(r * B.main[::-1], -r * B.adjacent[::-1], "upper", (n, n))
        grid = h * (a + np.arange(1, 2 * n + 1, dtype=float))
        kind = ScaleKind.LAGUERRE_HARD_L
    return ScaledModel(mat, h, grid, kind, model.beta, a=a, source=model)


def jacobi_hard(model: JacobiModel) -> ScaledModel:
    """(1/h) F B22 F with h = 1/(2n+a+b+1): upper bidiagonal.

    Diagonal ``c_i s'_{i-1} / h`` and superdiagonal ``-s_i c'_i / h``.
    """
    n, a, b = model.n, model.a, model.b
    h = 1.0 / (2 * n + a + b + 1)
    spx = np.concatenate([[1.0], model.sp])
    main = model.c * spx[:n] / h
    sup = -model.s[:-1] * model.cp / h
    mat = Bidiagonal(main, sup, "upper", (n, n))
    grid = h * (a + b + np.arange(1, 2 * n + 1, dtype=float))
    return ScaledModel(mat, h, grid, ScaleKind.JACOBI_HARD, model.beta, a=a, b=b, source=model)


def hard_fd_approx(scaled: ScaledModel) -> Bidiagonal:
    """The classical difference-scheme part of a hard-edge scaled model.

    * L: ``-2 diag(sqrt x_{2i}) (1/2h) nabla + a diag(1/sqrt x_{2i}) S``
    * M: ``-2 diag(sqrt x_{2i}) (1/2h) nabla_{n,n+1} + (a-1) diag(1/sqrt x_{2i}) S_{n,n+1}``
    * Jacobi: ``-(1/2h) nabla + (a+1/2) diag(1/x_{2i}) S``

    The error ``scaled.matrix - approx`` is O(h) away from the origin.
    """
    h = scaled.h
    x2 = scaled.grid[1::2][: scaled.matrix.shape[0]]
    rows, cols = scaled.matrix.shape
    nsup = len(scaled.matrix.adjacent)
    if scaled.kind is ScaleKind.JACOBI_HARD:
        cfd = (scaled.a + 0.5) / x2
        main = 1.0 / (2 * h) + 0.5 * cfd
        sup = -1.0 / (2 * h) + 0.5 * cfd[:nsup]
    elif scaled.kind in (ScaleKind.LAGUERRE_HARD_L, ScaleKind.LAGUERRE_HARD_M):
        coef = scaled.a if scaled.kind is ScaleKind.LAGUERRE_HARD_L else scaled.a - 1
        sq = np.sqrt(x2)
        main = sq / h + 0.5 * coef / sq
        sup = (-sq / h + 0.5 * coef / sq)[:nsup]
    else:
        raise DomainError("hard_fd_approx needs a hard-edge model")
    return Bidiagonal(main, sup, "upper", (rows, cols))


# ---------------------------------------------------------------------------
# log decomposition and hard-edge noise
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LogDecomposition:
    """A = e^{D_even} B e^{-D_odd} for upper bidiagonal A, B of equal shape."""

    g: np.ndarray
    d: np.ndarray  # d_1 .. d_{len(g)+1}; the last entry is 0

    @property
    def d_even(self) -> np.ndarray:
        return self.d[1::2]

    @property
    def d_odd(self) -> np.ndarray:
        return self.d[0::2]

    def apply(self, B: Bidiagonal) -> Bidiagonal:
        """Rebuild A from B."""
        rows, cols = B.shape
        de = self.d_even[:rows]
        do = self.d_odd[:cols]
        main = np.exp(de[: B.nsv]) * B.main * np.exp(-do[: B.nsv])
        k = len(B.adjacent)
        adj = np.exp(de[:k]) * B.adjacent * np.exp(-do[1 : k + 1])
        return Bidiagonal(main, adj, "upper", B.shape)


def log_decompose(A: Bidiagonal, B: Bidiagonal) -> LogDecomposition:
    """g and d with A = e^{D_even} B e^{-D_odd}.

    ``g_{2i-1} = -log|a_ii| + log|b_ii|``, ``g_{2i} = log|a_{i,i+1}| - log|b_{i,i+1}|``
    and ``d_i = sum_{k >= i} g_k``. Both matrices must be upper bidiagonal
    of one shape, with matching signs and no zero band entries.
    """
    if A.orientation != "upper" or B.orientation != "upper":
        raise DomainError("log_decompose needs upper bidiagonal matrices")
    if A.shape != B.shape:
        raise DomainError(f"shape mismatch {A.shape} vs {B.shape}")
    for x, y in ((A.main, B.main), (A.adjacent, B.adjacent)):
        if np.any(x == 0) or np.any(y == 0):
            raise DomainError("log_decompose needs nonzero band entries")
        if np.any(np.sign(x) != np.sign(y)):
            raise DomainError("sign patterns differ")
    g = np.empty(A.nsv + len(A.adjacent))
    g[0::2] = -np.log(np.abs(A.main)) + np.log(np.abs(B.main))
    g[1::2] = np.log(np.abs(A.adjacent)) - np.log(np.abs(B.adjacent))
    d = np.concatenate([np.cumsum(g[::-1])[::-1], [0.0]])
    return LogDecomposition(g, d)


@dataclass(frozen=True)
class HardEdgeNoise:
    """White-noise discretization g~ and the psi-discretization e^{d_i}.

    ``exp_d`` is computed from g~ by the theorem's formula (including the
    Jacobi remainder R); ``exp_d_direct`` is exp(d_i) from the
    decomposition itself, so the two agree to rounding.
    """

    g_tilde: np.ndarray
    grid: np.ndarray
    exp_d: np.ndarray
    exp_d_direct: np.ndarray
    remainder: Optional[np.ndarray] = None


def hard_edge_noise(decomp: LogDecomposition, scaled: ScaledModel) -> HardEdgeNoise:
    """g~ and e^{d_i} for a decomposition of a beta-model against its beta = inf twin.

    Laguerre (L or M): ``g~_i = -sqrt(beta x_i / h) g_i`` and
    ``e^{d_i} = exp(-(1/sqrt(beta)) sum_{k>=i} x_k^{-1/2} g~_k sqrt(h))``.

    Jacobi: ``g~_{2i-1} = -sqrt(beta x/(2h)) (1/2) (log tan^2 theta_i - log tan^2 theta~_i)``,
    ``g~_{2i} = +sqrt(beta x/(2h)) (1/2) (log tan^2 phi_i - log tan^2 phi~_i)`` and
    ``e^{d_i} = exp(-sqrt(2/beta) sum_{k>=i} x_k^{-1/2} g~_k sqrt(h) + R_i)``.
    """
    beta = scaled.beta
    if math.isinf(beta):
        m = len(decomp.g)
        return HardEdgeNoise(np.zeros(m), scaled.grid[:m], np.ones(m), np.exp(decomp.d[:m]))
    h = scaled.h
    m = len(decomp.g)
    x = scaled.grid[:m]
    direct = np.exp(decomp.d[:m])
    if scaled.kind in (ScaleKind.LAGUERRE_HARD_L, ScaleKind.LAGUERRE_HARD_M):
        gt = -np.sqrt(beta * x / h) * decomp.g
        terms = x ** -0.5 * gt * math.sqrt(h)
        expd = np.exp(-np.cumsum(terms[::-1])[::-1] / math.sqrt(beta))
        return HardEdgeNoise(gt, x, expd, direct)
    if scaled.kind is ScaleKind.JACOBI_HARD:
        src: JacobiModel = scaled.source
        n = src.n
        cb, sb, cpb, spb = jacobi_angles_inf(n, src.a, src.b)
        ltan = 2.0 * (np.log(src.s) - np.log(src.c)) - 2.0 * (np.log(sb) - np.log(cb))
        ltanp = 2.0 * (np.log(src.sp) - np.log(src.cp)) - 2.0 * (np.log(spb) - np.log(cpb))
        gt = np.empty(m)
        gt[0::2] = -np.sqrt(beta * x[0::2] / (2 * h)) * 0.5 * ltan
        gt[1::2] = np.sqrt(beta * x[1::2] / (2 * h)) * 0.5 * ltanp
        terms = x ** -0.5 * gt * math.sqrt(h)
        tail = np.cumsum(terms[::-1])[::-1]
        dls = np.log(src.s) - np.log(sb)  # log s_k - log s~_k, k = 1..n
        dlsp = np.log(src.sp) - np.log(spb)  # k = 1..n-1
        R = np.empty(m)
        for idx in range(m):
            i = idx + 1
            if i == 1:
                R[idx] = -dls[n - 1]
            elif i % 2 == 1:
                j = (i + 1) // 2
                R[idx] = -dlsp[j - 2] - dls[n - 1]
            else:
                j = i // 2
                R[idx] = dls[j - 1] - dls[n - 1]
        expd = np.exp(-math.sqrt(2.0 / beta) * tail + R)
        return HardEdgeNoise(gt, x, expd, direct, R)
    raise DomainError("hard_edge_noise needs a hard-edge model")
