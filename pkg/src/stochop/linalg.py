"""Spectral kernels for structured matrices.

The workhorse is Sturm-sequence bisection: counting the negative pivots of
``T - x I`` gives the number of eigenvalues below ``x`` in O(n) time and O(1)
extra memory, so the k smallest eigenvalues of a tridiagonal with a million
rows cost O(nk) work. Singular values of a bidiagonal are obtained from the
Golub-Kahan tridiagonal (zero diagonal, off-diagonal interleaving the two
bidiagonal bands); bisection on that matrix determines even tiny singular
values to high relative accuracy.

Dense problems (Rayleigh-Ritz matrices of a few hundred rows) go to LAPACK
through numpy/scipy.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional

import numba
import numpy as np
from scipy.linalg import solve_triangular

from .specfun import DomainError

__all__ = [
    "SymTridiagonal",
    "Tridiagonal",
    "Bidiagonal",
    "eig_tridiag_smallest",
    "eig_tridiag_largest",
    "eig_tridiag_nonsym_smallest",
    "sv_bidiag_smallest",
    "eig_dense_sym",
    "eig_generalized",
    "eigvec_tridiag",
    "eigvec_tridiag_nonsym",
    "svec_bidiag",
]

log = logging.getLogger(__name__)

_EPS = np.finfo(float).eps


# ---------------------------------------------------------------------------
# carriers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SymTridiagonal:
    """Symmetric tridiagonal matrix given by its diagonal and off-diagonal."""

    diag: np.ndarray
    offdiag: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.diag, dtype=float)
        e = np.asarray(self.offdiag, dtype=float)
        if d.ndim != 1 or e.ndim != 1 or len(e) != max(len(d) - 1, 0) or len(d) == 0:
            raise DomainError("SymTridiagonal needs len(offdiag) == len(diag) - 1 >= 0")
        if not (np.all(np.isfinite(d)) and np.all(np.isfinite(e))):
            raise DomainError("SymTridiagonal entries must be finite")
        object.__setattr__(self, "diag", d)
        object.__setattr__(self, "offdiag", e)

    @property
    def n(self) -> int:
        return len(self.diag)

    def to_dense(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.offdiag, 1) + np.diag(self.offdiag, -1)

    def norm(self) -> float:
        """Cheap upper bound on the 2-norm (max absolute row sum)."""
        row = np.abs(self.diag).copy()
        row[:-1] += np.abs(self.offdiag)
        row[1:] += np.abs(self.offdiag)
        return float(row.max())


@dataclass(frozen=True)
class Tridiagonal:
    """General tridiagonal matrix (diagonal, superdiagonal, subdiagonal)."""

    diag: np.ndarray
    sup: np.ndarray
    sub: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.diag, dtype=float)
        u = np.asarray(self.sup, dtype=float)
        l = np.asarray(self.sub, dtype=float)
        if len(u) != len(d) - 1 or len(l) != len(d) - 1:
            raise DomainError("Tridiagonal band lengths inconsistent")
        object.__setattr__(self, "diag", d)
        object.__setattr__(self, "sup", u)
        object.__setattr__(self, "sub", l)

    @property
    def n(self) -> int:
        return len(self.diag)

    def to_dense(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.sup, 1) + np.diag(self.sub, -1)

    def symmetrized(self) -> SymTridiagonal:
        """The similar symmetric tridiagonal; needs sub*sup >= 0 entrywise.

        With G = diag(g), g_{i+1}/g_i = sqrt(sub_i/sup_i), the matrix
        G^{-1} T G is symmetric with off-diagonal sign(sup_i) sqrt(sub_i sup_i).
        """
        prod = self.sub * self.sup
        if np.any(prod < 0):
            raise DomainError("tridiagonal is not symmetrizable (sub*sup < 0)")
        return SymTridiagonal(self.diag, np.copysign(np.sqrt(prod), self.sup))

    def log_scaling(self) -> np.ndarray:
        """log g_i of the diagonal similarity used by :meth:`symmetrized`."""
        with np.errstate(divide="ignore"):
            step = 0.5 * (np.log(np.abs(self.sub)) - np.log(np.abs(self.sup)))
        return np.concatenate([[0.0], np.cumsum(step)])


@dataclass(frozen=True)
class Bidiagonal:
    """Upper or lower bidiagonal matrix of shape (rows, cols), |rows - cols| <= 1.

    ``main[i]`` is entry (i, i). ``adjacent[i]`` is (i, i+1) for ``upper``
    and (i+1, i) for ``lower``; its length is whatever fits in the shape.
    """

    main: np.ndarray
    adjacent: np.ndarray
    orientation: str = "upper"
    shape: Optional[tuple] = None

    def __post_init__(self):
        d = np.asarray(self.main, dtype=float)
        e = np.asarray(self.adjacent, dtype=float)
        if self.orientation not in ("upper", "lower"):
            raise DomainError("orientation must be 'upper' or 'lower'")
        shape = self.shape if self.shape is not None else (len(d), len(d))
        rows, cols = int(shape[0]), int(shape[1])
        if abs(rows - cols) > 1 or len(d) != min(rows, cols) or len(d) == 0:
            raise DomainError(f"inconsistent bidiagonal shape {shape} for main of length {len(d)}")
        if self.orientation == "upper":
            want = min(rows, cols - 1)
        else:
            want = min(rows - 1, cols)
        if len(e) != want:
            raise DomainError(f"adjacent band has length {len(e)}, shape {shape} needs {want}")
        if not (np.all(np.isfinite(d)) and np.all(np.isfinite(e))):
            raise DomainError("Bidiagonal entries must be finite")
        object.__setattr__(self, "main", d)
        object.__setattr__(self, "adjacent", e)
        object.__setattr__(self, "shape", (rows, cols))

    @property
    def nsv(self) -> int:
        return len(self.main)

    def to_dense(self) -> np.ndarray:
        rows, cols = self.shape
        out = np.zeros((rows, cols))
        i = np.arange(len(self.main))
        out[i, i] = self.main
        j = np.arange(len(self.adjacent))
        if self.orientation == "upper":
            out[j, j + 1] = self.adjacent
        else:
            out[j + 1, j] = self.adjacent
        return out

    def transpose(self) -> "Bidiagonal":
        flip = "lower" if self.orientation == "upper" else "upper"
        return Bidiagonal(self.main, self.adjacent, flip, (self.shape[1], self.shape[0]))

    def scaled(self, c: float) -> "Bidiagonal":
        return Bidiagonal(c * self.main, c * self.adjacent, self.orientation, self.shape)

    def golub_kahan(self) -> np.ndarray:
        """Off-diagonal of the zero-diagonal Golub-Kahan tridiagonal.

        Its eigenvalues are +-sigma_i plus one 0 when the length is even.
        The interleaving is (d_1, e_1, d_2, e_2, ...), where a missing last
        ``e`` simply shortens the sequence.
        """
        d, e = self.main, self.adjacent
        seq = np.empty(len(d) + len(e))
        seq[0::2] = d
        seq[1::2] = e
        return seq

    def norm(self) -> float:
        return float(np.abs(self.main).max() + (np.abs(self.adjacent).max() if len(self.adjacent) else 0.0))


# ---------------------------------------------------------------------------
# Sturm bisection kernels
# ---------------------------------------------------------------------------


@numba.njit(cache=True)
def _sturm_count(d, e2, x, pivmin):
    """Number of eigenvalues strictly below x."""
    count = 0
    q = d[0] - x
    if abs(q) < pivmin:
        q = -pivmin
    if q < 0:
        count += 1
    for i in range(1, d.shape[0]):
        q = d[i] - x - e2[i - 1] / q
        if abs(q) < pivmin:
            q = -pivmin
        if q < 0:
            count += 1
    return count


@numba.njit(cache=True)
def _bisect_indices(d, e2, lo, hi, idx, pivmin, abstol):
    """Eigenvalues with (0-based, ascending) indices ``idx``."""
    out = np.empty(idx.shape[0])
    for t in range(idx.shape[0]):
        j = idx[t]
        a = lo
        b = hi
        # reuse the previous root as a lower bound (indices are ascending)
        if t > 0 and idx[t - 1] < j:
            a = max(lo, out[t - 1] - abstol)
        for _ in range(200):
            m = 0.5 * (a + b)
            if m == a or m == b:
                break
            if b - a <= abstol + 2.0 * 2.220446049250313e-16 * max(abs(a), abs(b)):
                break
            if _sturm_count(d, e2, m, pivmin) > j:
                b = m
            else:
                a = m
        out[t] = 0.5 * (a + b)
    return out


def _gershgorin(d: np.ndarray, e: np.ndarray) -> tuple[float, float]:
    r = np.zeros_like(d)
    ae = np.abs(e)
    r[:-1] += ae
    r[1:] += ae
    lo = float(np.min(d - r))
    hi = float(np.max(d + r))
    pad = 4 * _EPS * max(abs(lo), abs(hi), 1e-300) + 1e-300
    return lo - pad, hi + pad


def _eig_indices(d: np.ndarray, e: np.ndarray, idx: np.ndarray, abstol: float = 0.0) -> np.ndarray:
    e2 = e * e
    lo, hi = _gershgorin(d, e)
    scale = max(abs(lo), abs(hi), 1e-300)
    pivmin = max(np.finfo(float).tiny, 1e-300) * max(1.0, float(e2.max()) if len(e2) else 1.0)
    abstol = abstol if abstol > 0 else 2.0 * _EPS * scale
    return _bisect_indices(d, e2, lo, hi, np.asarray(idx, dtype=np.int64), pivmin, abstol)


def _check_k(k: int, n: int) -> None:
    if not (1 <= k <= n):
        raise DomainError(f"k={k} out of range 1..{n}")


def eig_tridiag_smallest(T: SymTridiagonal, k: int) -> np.ndarray:
    """The k smallest eigenvalues of a symmetric tridiagonal, ascending.

    Parameters
    ----------
    T : SymTridiagonal
    k : int
        ``1 <= k <= T.n``.

    Returns
    -------
    ndarray of shape (k,)
    """
    _check_k(k, T.n)
    return _eig_indices(T.diag, T.offdiag, np.arange(k))


def eig_tridiag_largest(T: SymTridiagonal, k: int) -> np.ndarray:
    """The k largest eigenvalues, in descending order."""
    _check_k(k, T.n)
    return _eig_indices(T.diag, T.offdiag, np.arange(T.n - k, T.n))[::-1].copy()


def eig_tridiag_nonsym_smallest(T: Tridiagonal, k: int) -> np.ndarray:
    """k smallest eigenvalues of a symmetrizable (sub*sup >= 0) tridiagonal."""
    return eig_tridiag_smallest(T.symmetrized(), k)


@numba.njit(cache=True)
def _gk_sv_indices(seq2, nsv, extra, k, pivmin):
    # Golub-Kahan matrix: zero diagonal, squared off-diagonal seq2.
    # Eigenvalues below a positive x: (nsv + extra) nonpositive ones plus the
    # singular values below x; so sigma_j is eigenvalue index nsv+extra+j.
    size = seq2.shape[0] + 1
    d = np.zeros(size)
    hi = 0.0
    for i in range(seq2.shape[0]):
        hi = max(hi, np.sqrt(seq2[i]))
    hi = 2.0 * hi * (1.0 + 1e-12) + 1e-300
    out = np.empty(k)
    base = nsv + extra
    for j in range(k):
        a = 0.0
        if j > 0:
            a = out[j - 1] * (1.0 - 8.0 * 2.220446049250313e-16)
        b = hi
        for _ in range(2000):
            m = 0.5 * (a + b)
            if m <= a or m >= b:
                break
            if b - a <= 4.0 * 2.220446049250313e-16 * b:
                break
            # bisect geometrically when the bracket spans many decades
            if a > 0.0 and b > 8.0 * a:
                m = np.sqrt(a * b)
            elif a == 0.0 and b > 1e-280:
                m = b * 0.125 if b > 1e-200 else 0.5 * b
            if _sturm_count(d, seq2, m, pivmin) > base + j:
                b = m
            else:
                a = m
        out[j] = 0.5 * (a + b)
    return out


def sv_bidiag_smallest(B: Bidiagonal, k: int) -> np.ndarray:
    """The k smallest singular values of a bidiagonal, ascending.

    Bisection runs on the Golub-Kahan tridiagonal with relative stopping
    criteria, so small singular values keep high relative accuracy.
    """
    _check_k(k, B.nsv)
    seq = B.golub_kahan()
    size = len(seq) + 1
    extra = size - 2 * B.nsv  # number of structural zero eigenvalues beyond +-sigma pairs
    seq2 = seq * seq
    pivmin = np.finfo(float).tiny * max(1.0, float(seq2.max()))
    return _gk_sv_indices(seq2, B.nsv, extra, k, pivmin)


# ---------------------------------------------------------------------------
# eigenvectors by inverse iteration
# ---------------------------------------------------------------------------


@numba.njit(cache=True)
def _tridiag_solve_pivot(sub, diag, sup, rhs):
    """Solve a general tridiagonal system by Gaussian elimination with partial pivoting."""
    n = diag.shape[0]
    u0 = np.zeros(n)
    u1 = np.zeros(n)
    u2 = np.zeros(n)
    b = rhs.copy()
    tiny = 1e-300
    a = diag[0]  # active row: a at column i, c at column i+1
    c = sup[0] if n > 1 else 0.0
    for i in range(n - 1):
        l = sub[i]
        d = diag[i + 1]
        s = sup[i + 1] if i + 1 < n - 1 else 0.0
        if abs(l) > abs(a):
            u0[i] = l
            u1[i] = d
            u2[i] = s
            f = a / l
            t = b[i]
            b[i] = b[i + 1]
            b[i + 1] = t - f * b[i]
            a = c - f * d
            c = -f * s
        else:
            if a == 0.0:
                a = tiny
            u0[i] = a
            u1[i] = c
            u2[i] = 0.0
            f = l / a
            b[i + 1] -= f * b[i]
            a = d - f * c
            c = s
    u0[n - 1] = a if a != 0.0 else tiny
    x = np.empty(n)
    x[n - 1] = b[n - 1] / u0[n - 1]
    if n > 1:
        x[n - 2] = (b[n - 2] - u1[n - 2] * x[n - 1]) / u0[n - 2]
    for i in range(n - 3, -1, -1):
        x[i] = (b[i] - u1[i] * x[i + 1] - u2[i] * x[i + 2]) / u0[i]
    return x


def _inverse_iteration(T: SymTridiagonal, lam: float, seed: int = 0, maxit: int = 8) -> np.ndarray:
    n = T.n
    if n == 1:
        return np.ones(1)
    scale = max(T.norm(), 1.0)
    # perturb the shift slightly so that T - shift I is not exactly singular
    shift = lam + 4 * _EPS * scale
    diag = T.diag - shift
    rng = np.random.default_rng(seed)
    tol = 1e-8 * scale
    for restart in range(3):
        x = rng.standard_normal(n)
        x /= np.linalg.norm(x)
        for _ in range(maxit):
            y = _tridiag_solve_pivot(T.offdiag, diag, T.offdiag, x)
            nrm = np.linalg.norm(y)
            if not np.isfinite(nrm) or nrm == 0.0:
                break
            x = y / nrm
            res = _tridiag_matvec(T.offdiag, T.diag, T.offdiag, x) - lam * x
            if np.linalg.norm(res) <= tol:
                return _fix_sign(x)
        shift = lam + (restart + 2) * 16 * _EPS * scale
        diag = T.diag - shift
    raise ArithmeticError("inverse iteration did not converge")


def _tridiag_matvec(sub, diag, sup, x):
    y = diag * x
    y[:-1] += sup * x[1:]
    y[1:] += sub * x[:-1]
    return y


def _fix_sign(x: np.ndarray) -> np.ndarray:
    # deterministic sign: first entry of largest magnitude made positive
    j = int(np.argmax(np.abs(x) > 1e-3 * np.abs(x).max()))
    return x if x[j] >= 0 else -x


def eigvec_tridiag(T: SymTridiagonal, lam: float) -> np.ndarray:
    """Unit eigenvector of a symmetric tridiagonal for the computed eigenvalue ``lam``.

    Uses inverse iteration with a pivoted tridiagonal solver, restarting
    from fresh random vectors if the residual does not drop below
    ``1e-8 * ||T||``.
    """
    return _inverse_iteration(T, float(lam))


def eigvec_tridiag_nonsym(T: Tridiagonal, lam: float) -> np.ndarray:
    """Right eigenvector (unit 2-norm) of a symmetrizable tridiagonal.

    The symmetric eigenvector ``w`` maps back through ``v = G w``; ``G`` is
    applied in log space so that scalings spanning many decades stay finite
    wherever the eigenvector itself is representable.
    """
    w = _inverse_iteration(T.symmetrized(), float(lam))
    logg = T.log_scaling()
    with np.errstate(divide="ignore"):
        logv = np.log(np.abs(w)) + logg
    logv -= logv[np.isfinite(logv)].max()
    v = np.sign(w) * np.exp(logv)
    return v / np.linalg.norm(v)


def svec_bidiag(B: Bidiagonal, sigma: float) -> tuple[np.ndarray, np.ndarray]:
    """Right and left singular vectors (v, u) of ``B`` for singular value ``sigma``.

    Obtained from the Golub-Kahan eigenvector: its odd positions (1-based)
    carry the right vector and its even positions the left vector.
    """
    seq = B.golub_kahan()
    gk = SymTridiagonal(np.zeros(len(seq) + 1), seq)
    z = _inverse_iteration(gk, float(sigma))
    # GK ordering is (v_1, u_1, v_2, u_2, ...) for an upper bidiagonal
    first, second = z[0::2], z[1::2]
    if B.orientation == "lower":
        # a lower bidiagonal is the transpose of an upper one
        first, second = second, first
    rows, cols = B.shape
    v = np.zeros(cols)
    u = np.zeros(rows)
    v[: min(cols, len(first))] = first[:cols]
    u[: min(rows, len(second))] = second[:rows]
    nv, nu = np.linalg.norm(v), np.linalg.norm(u)
    return v / nv, u / nu


# ---------------------------------------------------------------------------
# dense problems
# ---------------------------------------------------------------------------


def _check_symmetric(A: np.ndarray, name: str = "matrix") -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DomainError(f"{name} must be square")
    scale = max(np.abs(A).max(), 1.0)
    if np.abs(A - A.T).max() > 1e-12 * scale:
        raise DomainError(f"{name} is not symmetric")
    return 0.5 * (A + A.T)


def eig_dense_sym(A, k: Optional[int] = None, vectors: bool = False):
    """Eigenvalues (ascending) of a dense symmetric matrix, optionally eigenvectors.

    Parameters
    ----------
    A : array_like, shape (m, m)
    k : int, optional
        Return only the ``k`` smallest.
    vectors : bool
        Also return the orthonormal eigenvectors as columns.
    """
    A = _check_symmetric(A)
    m = A.shape[0]
    if k is not None:
        _check_k(k, m)
    if vectors:
        w, V = np.linalg.eigh(A)
        return (w[:k], V[:, :k]) if k is not None else (w, V)
    w = np.linalg.eigvalsh(A)
    return w[:k] if k is not None else w


def _cholesky_jitter(M: np.ndarray) -> np.ndarray:
    dim = M.shape[0]
    budget = 1e-12 * np.trace(M) / dim
    try:
        return np.linalg.cholesky(M)
    except np.linalg.LinAlgError:
        pass
    jitter = budget * 1e-4
    while jitter <= budget:
        try:
            R = np.linalg.cholesky(M + jitter * np.eye(dim))
            log.info("Cholesky needed jitter %.3g", jitter)
            return R
        except np.linalg.LinAlgError:
            jitter *= 10
    raise DomainError("M is not positive definite within the jitter budget")


def eig_generalized(K, M, k: int = 1, vectors: bool = False):
    """Smallest eigenvalue(s) of K c = lambda M c for symmetric K and SPD M.

    ``M = C C^T`` (Cholesky, with at most ``1e-12 * trace(M)/dim`` of diagonal
    jitter), then the symmetric matrix ``C^{-1} K C^{-T}`` is diagonalized.
    """
    K = _check_symmetric(K, "K")
    M = _check_symmetric(M, "M")
    if K.shape != M.shape:
        raise DomainError("K and M differ in shape")
    _check_k(k, K.shape[0])
    C = _cholesky_jitter(M)
    X = solve_triangular(C, K, lower=True)
    A = solve_triangular(C, X.T, lower=True)
    A = 0.5 * (A + A.T)
    if not vectors:
        return np.linalg.eigvalsh(A)[:k]
    w, V = np.linalg.eigh(A)
    c = solve_triangular(C.T, V[:, :k], lower=False)
    return w[:k], c
