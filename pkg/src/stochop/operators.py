"""Stochastic Airy and Bessel operators and their Rayleigh-Ritz discretizations.

The Airy operator ``-d^2/dx^2 + x + (2/sqrt(beta)) B'`` is projected onto the
eigenfunctions of its noiseless part, giving

    K_ij = -zeta_i delta_ij + (2/sqrt(beta)) int v_i v_j dB,

whose least eigenvalue approximates the least eigenvalue of the operator
from above. The Bessel operator in Liouville form,
``-d/dx + (a + 1/2)/x + sqrt(2/beta) x^{-1/2} B'`` on (0, 1), leads to a
generalized problem ``K c = lambda M c`` with

    K_ij = xi_i xi_j int psi^{2 sqrt 2} u_i u_j,   M_ij = int psi^{2 sqrt 2} v_i v_j,

and ``sigma_min = sqrt(lambda_min)``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass
from functools import lru_cache
from typing import Optional, Union

import numpy as np

from .ensembles import parse_beta
from .linalg import eig_dense_sym, eig_generalized
from .randsrc import BrownianPath, StreamKey, brownian_path, zero_path
from .specfun import DomainError, ZeroTable, airy_ai, airy_ai_prime, airy_zeros, bessel_j, bessel_zeros

__all__ = [
    "BoundaryCondition",
    "RayleighRitzConfig",
    "PhiPath",
    "PsiPath",
    "classical_airy_eigs",
    "classical_bessel_svs",
    "airy_basis",
    "bessel_bases",
    "build_airy_K",
    "stochastic_airy_min_eig",
    "phi_path",
    "psi_path",
    "build_bessel_KM",
    "stochastic_bessel_min_sv",
    "airy_formal_residual",
]

SQRT2 = math.sqrt(2.0)


class BoundaryCondition(enum.Enum):
    TYPE_I = "type_i"
    TYPE_II = "type_ii"


@dataclass(frozen=True)
class RayleighRitzConfig:
    """Truncation and quadrature parameters of a Rayleigh-Ritz run.

    Parameters
    ----------
    l : int
        Number of basis functions (size of the truncated K).
    mesh : float
        Uniform quadrature step on ``domain``.
    domain : (float, float)
        Integration interval.
    beta : float
        Inverse temperature; ``inf`` switches the noise off.
    a : float
        Bessel order (Bessel runs only).
    bc : str
        Bessel boundary conditions; only ``"type_i"`` is discretized.
    psi_first_cell : str
        How the singular cell (0, mesh) enters the Ito sum defining psi:
        ``"right"`` evaluates w^{-1/2} at the cell's right endpoint,
        ``"drop"`` leaves the cell out.
    """

    l: int
    mesh: float
    domain: tuple = (0.0, 1.0)
    beta: float = 2.0
    a: float = 0.0
    bc: str = BoundaryCondition.TYPE_I.value
    psi_first_cell: str = "right"

    def __post_init__(self):
        object.__setattr__(self, "beta", parse_beta(self.beta))
        object.__setattr__(self, "domain", (float(self.domain[0]), float(self.domain[1])))
        if int(self.l) != self.l or self.l < 1:
            raise DomainError("basis size l must be a positive integer")
        if not self.mesh > 0:
            raise DomainError("mesh must be positive")
        if not self.domain[1] > self.domain[0]:
            raise DomainError("domain must satisfy right > left")
        if not self.a > -1:
            raise DomainError("Bessel order a must exceed -1")
        BoundaryCondition(self.bc)
        if self.psi_first_cell not in ("right", "drop"):
            raise DomainError("psi_first_cell must be 'right' or 'drop'")

    @classmethod
    def airy(cls, beta=2.0, l: int = 150, mesh: float = 0.05, right: float = 86.9) -> "RayleighRitzConfig":
        """Defaults used for the published Airy histograms."""
        return cls(l=l, mesh=mesh, domain=(0.0, right), beta=beta)

    @classmethod
    def bessel(cls, beta=2.0, a: float = 0.0, l: int = 75, mesh: float = 0.001) -> "RayleighRitzConfig":
        """Defaults used for the published Bessel histograms."""
        return cls(l=l, mesh=mesh, domain=(0.0, 1.0), beta=beta, a=a)

    @property
    def cells(self) -> int:
        left, right = self.domain
        return max(1, int(round((right - left) / self.mesh)))

    @property
    def grid(self) -> np.ndarray:
        return _grid(self.domain[0], self.domain[1], self.cells)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["domain"] = list(self.domain)
        d["beta"] = "inf" if math.isinf(self.beta) else self.beta
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RayleighRitzConfig":
        d = dict(d)
        d["domain"] = tuple(d.get("domain", (0.0, 1.0)))
        return cls(**d)


@lru_cache(maxsize=16)
def _grid(left: float, right: float, cells: int) -> np.ndarray:
    g = np.linspace(left, right, cells + 1)
    g.flags.writeable = False
    return g


def _path_for(key: Optional[StreamKey], config: RayleighRitzConfig) -> BrownianPath:
    if math.isinf(config.beta) or key is None:
        return zero_path(config.grid)
    return brownian_path(key, config.grid)


def _check_path(path: BrownianPath, config: RayleighRitzConfig) -> None:
    g = config.grid
    if len(path.grid) != len(g) or not np.allclose(path.grid, g, rtol=0, atol=1e-12 * max(1.0, g[-1])):
        raise DomainError("path grid does not match the configured mesh and domain")


# ---------------------------------------------------------------------------
# classical spectra
# ---------------------------------------------------------------------------


def classical_airy_eigs(k: int) -> np.ndarray:
    """Least ``k`` eigenvalues of -d^2/dx^2 + x with v(0) = 0: minus the Airy zeros."""
    return -airy_zeros(k).zeros


def classical_bessel_svs(a: float, bc: Union[str, BoundaryCondition], k: int) -> np.ndarray:
    """Least ``k`` singular values of the classical Bessel operator.

    Type (i) boundary conditions give the zeros of J_a, type (ii) the zeros
    of J_{a+1}.
    """
    bc = BoundaryCondition(bc)
    if not a > -1:
        raise DomainError("Bessel order a must exceed -1")
    order = a if bc is BoundaryCondition.TYPE_I else a + 1.0
    return bessel_zeros(order, k).zeros


# ---------------------------------------------------------------------------
# Airy
# ---------------------------------------------------------------------------


def airy_basis(i: int, x_grid, zero_table: Optional[ZeroTable] = None) -> np.ndarray:
    """The i-th (1-based) normalized eigenfunction Ai(x + zeta_i) / Ai'(zeta_i).

    Since int_0^inf Ai(x + zeta)^2 dx = Ai'(zeta)^2 at a zero zeta of Ai, the
    functions are orthonormal on (0, inf) and vanish at the origin.
    """
    if zero_table is None:
        zero_table = airy_zeros(i)
    if not 1 <= i <= len(zero_table):
        raise DomainError(f"basis index {i} outside the zero table")
    z = zero_table.zeros[i - 1]
    x = np.asarray(x_grid, dtype=float)
    return airy_ai(x + z) / airy_ai_prime(z)


@lru_cache(maxsize=8)
def _airy_basis_matrix(l: int, left: float, right: float, cells: int) -> tuple[np.ndarray, np.ndarray]:
    zt = airy_zeros(l)
    x = _grid(left, right, cells)
    arg = x[None, :] + zt.zeros[:, None]
    V = airy_ai(arg.ravel()).reshape(arg.shape) / airy_ai_prime(zt.zeros)[:, None]
    V.flags.writeable = False
    return zt.zeros, V


def build_airy_K(phi_or_path, config: RayleighRitzConfig) -> np.ndarray:
    """The truncated l-by-l Rayleigh-Ritz matrix of the stochastic Airy operator.

    The noiseless part is exactly ``diag(-zeta)``. The stochastic integrals
    int v_i v_j dB are left-point sums on the configured mesh.
    """
    path = phi_or_path.path if isinstance(phi_or_path, PhiPath) else phi_or_path
    _check_path(path, config)
    zeta, V = _airy_basis_matrix(config.l, *config.domain, config.cells)
    K = np.diag(-zeta)
    if math.isinf(config.beta) or path.zero:
        return K
    left = V[:, :-1]
    noise = (left * path.increments) @ left.T
    noise = 0.5 * (noise + noise.T)
    return K + (2.0 / math.sqrt(config.beta)) * noise


def stochastic_airy_min_eig(key: Optional[StreamKey], config: RayleighRitzConfig, k: int = 1):
    """Least eigenvalue (``k=1``, a float) or ``k`` least eigenvalues of the truncated K.

    Rayleigh-Ritz overestimates every eigenvalue, so results carry a small
    positive bias that shrinks as ``l`` grows.
    """
    K = build_airy_K(_path_for(key, config), config)
    if math.isinf(config.beta):
        w = np.sort(np.diag(K))[:k]
    else:
        w = eig_dense_sym(K, k=k)
    return float(w[0]) if k == 1 else w


# ---------------------------------------------------------------------------
# phi and psi
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PhiPath:
    """phi(x) = exp((2/sqrt(beta)) int_0^x B(y) dy) sampled on the path grid."""

    path: BrownianPath
    phi_values: np.ndarray
    beta: float


@dataclass(frozen=True)
class PsiPath:
    """psi(x) = exp(-(1/sqrt(beta)) int_x^1 w^{-1/2} dB(w)) sampled on the path grid."""

    path: BrownianPath
    psi_values: np.ndarray
    beta: float

    @property
    def log_psi(self) -> np.ndarray:
        return np.log(self.psi_values)


def phi_from_path(path: BrownianPath, beta: float) -> PhiPath:
    beta = parse_beta(beta)
    if math.isinf(beta):
        return PhiPath(path, np.ones(len(path.grid)), beta)
    B = path.values
    area = np.concatenate([[0.0], np.cumsum(0.5 * (B[1:] + B[:-1]) * np.diff(path.grid))])
    return PhiPath(path, np.exp(2.0 / math.sqrt(beta) * area), beta)


def _psi_integrand(grid: np.ndarray, first_cell: str) -> np.ndarray:
    # w^{-1/2} at the left end of each cell; the singular first cell uses its
    # right end (or is dropped)
    left = grid[:-1].copy()
    f = np.empty_like(left)
    pos = left > 0
    f[pos] = left[pos] ** -0.5
    if not pos[0]:
        f[0] = grid[1] ** -0.5 if first_cell == "right" else 0.0
    return f


def psi_from_path(path: BrownianPath, beta: float, first_cell: str = "right") -> PsiPath:
    beta = parse_beta(beta)
    if math.isinf(beta):
        return PsiPath(path, np.ones(len(path.grid)), beta)
    terms = _psi_integrand(path.grid, first_cell) * path.increments
    # tail sums  sum_{k >= j} terms_k, with 0 at the right end
    tail = np.concatenate([np.cumsum(terms[::-1])[::-1], [0.0]])
    return PsiPath(path, np.exp(-tail / math.sqrt(beta)), beta)


def phi_path(key: Optional[StreamKey], config: RayleighRitzConfig) -> PhiPath:
    return phi_from_path(_path_for(key, config), config.beta)


def psi_path(key: Optional[StreamKey], config: RayleighRitzConfig) -> PsiPath:
    return psi_from_path(_path_for(key, config), config.beta, config.psi_first_cell)


def psi_log_variance(config: RayleighRitzConfig) -> np.ndarray:
    """Exact variance of log psi at each grid point for the discretized Ito sum."""
    if math.isinf(config.beta):
        return np.zeros(config.cells + 1)
    g = config.grid
    f = _psi_integrand(g, config.psi_first_cell)
    cell = f * f * np.diff(g)
    return np.concatenate([np.cumsum(cell[::-1])[::-1], [0.0]]) / config.beta


# ---------------------------------------------------------------------------
# Bessel
# ---------------------------------------------------------------------------


def _trapezoid_weights(grid: np.ndarray) -> np.ndarray:
    dx = np.diff(grid)
    w = np.zeros(len(grid))
    w[:-1] += 0.5 * dx
    w[1:] += 0.5 * dx
    return w


def _sqrt_x_bessel(order: float, xi: np.ndarray, x: np.ndarray) -> np.ndarray:
    arg = xi[:, None] * x[None, :]
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        vals = np.sqrt(x)[None, :] * bessel_j(order, arg.ravel()).reshape(arg.shape)
    if x[0] == 0.0:
        # sqrt(x) J_order(xi x) ~ x^{order + 1/2}; for order < -1/2 the value
        # at the origin is infinite and the (integrable) endpoint is dropped
        if order > -0.5:
            vals[:, 0] = 0.0
        elif order == -0.5:
            vals[:, 0] = np.sqrt(2.0 / (math.pi * xi))
        else:
            vals[:, 0] = 0.0
    return vals


@lru_cache(maxsize=8)
def _bessel_basis_matrices(a: float, l: int, cells: int):
    x = _grid(0.0, 1.0, cells)
    w = _trapezoid_weights(x)
    xi = bessel_zeros(a, l).zeros
    V = _sqrt_x_bessel(a, xi, x)
    U = _sqrt_x_bessel(a + 1.0, xi, x)
    V /= np.sqrt((V * V) @ w)[:, None]
    U /= np.sqrt((U * U) @ w)[:, None]
    for arr in (xi, V, U, w):
        arr.flags.writeable = False
    return xi, V, U, w


def bessel_bases(config: RayleighRitzConfig):
    """``(xi, V, U, weights)``: zeros of J_a, the normalized sqrt(x) J_a(xi_i x)
    and sqrt(x) J_{a+1}(xi_i x) on the grid, and trapezoid weights.

    Normalization uses the same quadrature as :func:`build_bessel_KM`.
    """
    if config.domain != (0.0, 1.0):
        raise DomainError("the Bessel operator lives on (0, 1)")
    return _bessel_basis_matrices(float(config.a), int(config.l), config.cells)


def build_bessel_KM(psi: PsiPath, config: RayleighRitzConfig) -> tuple[np.ndarray, np.ndarray]:
    """Rayleigh-Ritz pair (K, M) for the Liouville-form stochastic Bessel operator."""
    if BoundaryCondition(config.bc) is not BoundaryCondition.TYPE_I:
        raise DomainError("only type (i) boundary conditions are discretized")
    _check_path(psi.path, config)
    xi, V, U, w = bessel_bases(config)
    weight = w * psi.psi_values ** (2.0 * SQRT2)
    M = (V * weight) @ V.T
    K = np.outer(xi, xi) * ((U * weight) @ U.T)
    return 0.5 * (K + K.T), 0.5 * (M + M.T)


def stochastic_bessel_min_sv(key: Optional[StreamKey], config: RayleighRitzConfig) -> float:
    """sqrt of the least generalized eigenvalue of (K, M)."""
    K, M = build_bessel_KM(psi_path(key, config), config)
    lam = float(eig_generalized(K, M, k=1)[0])
    if lam < 0:
        raise ArithmeticError("negative generalized eigenvalue; mesh too coarse for this path")
    return math.sqrt(lam)


# ---------------------------------------------------------------------------
# formal equivalence of the two forms of the Airy operator
# ---------------------------------------------------------------------------


def airy_formal_residual(x, f, B, beta: float) -> float:
    """Compare the conjugated and white-noise forms of the Airy operator on a smooth path.

    For a smooth (mollified) path ``B`` and test function ``f`` sampled on
    the uniform grid ``x``, evaluates

        phi (A^inf f - (4/sqrt(beta)) B f' - (4/beta) B^2 f)   and
        (A^inf + (2/sqrt(beta)) B') (f phi)

    by centered differences and returns their largest difference on the
    interior points, relative to the largest magnitude of either side.
    """
    x = np.asarray(x, dtype=float)
    f = np.asarray(f, dtype=float)
    B = np.asarray(B, dtype=float)
    beta = parse_beta(beta)
    s = 2.0 / math.sqrt(beta)
    dx = np.diff(x)
    area = np.concatenate([[0.0], np.cumsum(0.5 * (B[1:] + B[:-1]) * dx)])
    phi = np.exp(s * area)

    def d1(u):
        return np.gradient(u, x, edge_order=2)

    fp = d1(f)
    fpp = d1(fp)
    lhs = phi * (-fpp + x * f - 2.0 * s * B * fp - s * s * B * B * f)
    v = f * phi
    rhs = -d1(d1(v)) + x * v + s * d1(B) * v
    inner = slice(4, -4)
    scale = max(np.abs(lhs[inner]).max(), np.abs(rhs[inner]).max(), 1e-300)
    return float(np.abs(lhs[inner] - rhs[inner]).max() / scale)
