"""Smoothness diagnostics for eigenvectors and singular vectors of edge-scaled models.

An eigenfunction of the stochastic Airy operator factors as ``f_k phi`` with
a smooth ``f_k`` and a rough ``phi`` shared by all eigenfunctions, so the
ratio of two eigenvectors of ``H_soft`` should be smoother than either
vector. The same holds for right singular vectors of the hard-edge models,
with ``psi^{sqrt 2}`` as the shared factor.

Roughness is measured on ``log|v|``: the RMS of its order-``k`` differences,
divided by ``h^(k-1)``. Order 2 suits the soft edge (``phi`` is C^{3/2-}),
order 1 the hard edge (``psi`` is C^{1/2-}). Zeros of ``v`` put logarithmic
singularities into ``log|v|``, so points near sign changes and near the ends
of the support are masked before the RMS is taken.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .linalg import eigvec_tridiag_nonsym, svec_bidiag
from .scalings import ScaledModel
from .specfun import DomainError

__all__ = [
    "SmoothnessProfile",
    "SmoothnessReport",
    "smoothness_profile",
    "ratio_vector",
    "smoothness_report",
    "write_profiles_csv",
]

MASK_TOL = 1e-6
NODE_WINDOW = 0.05


@dataclass(frozen=True)
class SmoothnessProfile:
    """log|v| and its centred gradients, with masked entries set to NaN.

    ``grad1`` and ``grad2`` are one and two applications of the centred
    gradient (scaled by 1/h and 1/h^2). ``valid`` flags the difference
    stencils that entered ``roughness``.
    """

    log_abs: np.ndarray
    grad1: np.ndarray
    grad2: np.ndarray
    roughness: float
    order: int
    h: float
    mask: np.ndarray = field(repr=False)
    valid: np.ndarray = field(repr=False)


def _node_mask(v: np.ndarray, mask: np.ndarray, window) -> np.ndarray:
    keep = np.nonzero(~mask)[0]
    lo, hi = keep.min(), keep.max()
    if window is None:
        window = NODE_WINDOW
    if isinstance(window, float):
        w = max(2, int(math.ceil(window * (hi - lo + 1))))
    else:
        w = int(window)
    out = mask.copy()
    if w <= 0:
        return out
    s = np.sign(np.where(mask, 0.0, v))
    nodes = np.nonzero(s[1:] * s[:-1] < 0)[0]
    edges = np.nonzero(mask[1:] != mask[:-1])[0]
    # mask the w points on each side of a node or mask edge (between j and
    # j+1) and of the support ends
    for j in np.concatenate([nodes, edges, [lo - 1, hi]]):
        out[max(0, j - w + 1): j + w + 1] = True
    return out


def smoothness_profile(v, h: float, order: int = 2, mask_tol: float = MASK_TOL,
                       node_window=NODE_WINDOW) -> SmoothnessProfile:
    """Profile and scalar roughness of ``log|v|`` on a mesh of width ``h``.

    Parameters
    ----------
    v : array_like
        The vector; NaN entries count as masked.
    h : float
        Mesh width.
    order : int
        Difference order used for the roughness (1 or 2).
    mask_tol : float
        Entries with ``|v| < mask_tol * max|v|`` are masked.
    node_window : float or int
        Half-width of the masked neighbourhood around sign changes and the
        ends of the support: a float is a fraction of the support length, an
        int a number of points. ``0`` masks nothing extra.
    """
    v = np.asarray(v, dtype=float)
    if v.ndim != 1 or len(v) < order + 1:
        raise DomainError("need a vector longer than the difference order")
    if order not in (1, 2):
        raise DomainError("order must be 1 or 2")
    if not h > 0:
        raise DomainError("mesh width must be positive")
    a = np.abs(v)
    finite = np.isfinite(a)
    if not np.any(finite & (a > 0)):
        raise DomainError("vector has no nonzero entries")
    mask = ~finite | ~(a >= mask_tol * a[finite].max()) | (a == 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        logv = np.where(mask, np.nan, np.log(np.where(mask, 1.0, a)))
    g1 = np.gradient(logv, h)
    g2 = np.gradient(g1, h)
    wide = _node_mask(v, mask, node_window)
    d = np.diff(np.where(mask, 0.0, logv), order)
    valid = np.ones(len(d), dtype=bool)
    for s in range(order + 1):
        valid &= ~wide[s: len(wide) - order + s]
    if not valid.any():
        raise DomainError("every difference stencil is masked")
    rough = float(np.sqrt(np.mean(d[valid] ** 2)) / h ** (order - 1))
    return SmoothnessProfile(logv, g1, g2, rough, order, float(h), mask, valid)


def ratio_vector(v_k, v_l, mask_tol: float = MASK_TOL) -> np.ndarray:
    """Entrywise ``v_k / v_l`` with NaN wherever ``|v_l| < mask_tol * max|v_l|``."""
    v_k = np.asarray(v_k, dtype=float)
    v_l = np.asarray(v_l, dtype=float)
    if v_k.shape != v_l.shape:
        raise DomainError("vectors differ in length")
    a = np.abs(v_l)
    if not np.any(a > 0):
        raise DomainError("denominator vector is zero")
    keep = a >= mask_tol * np.nanmax(a)
    keep &= a > 0
    if not keep.any():
        raise DomainError("every entry of the ratio is masked")
    out = np.full(v_k.shape, np.nan)
    out[keep] = v_k[keep] / v_l[keep]
    return out


@dataclass(frozen=True)
class SmoothnessReport:
    k: int
    l: int
    roughness_k: float
    roughness_l: float
    roughness_ratio: float
    profiles: dict
    degenerate: bool
    note: str = ""

    @property
    def prediction_holds(self) -> Optional[bool]:
        """Ratio rougher than neither vector; None in the noiseless case."""
        if self.degenerate:
            return None
        return self.roughness_ratio < min(self.roughness_k, self.roughness_l)

    @property
    def relative(self) -> float:
        return self.roughness_ratio / min(self.roughness_k, self.roughness_l)


def _vectors(model: ScaledModel, k: int, l: int):
    top = max(k, l)
    vals = model.smallest(top)
    if model.kind.soft:
        get = lambda lam: eigvec_tridiag_nonsym(model.matrix, lam)
    else:
        get = lambda lam: svec_bidiag(model.matrix, lam)[0]
    return get(vals[k - 1]), get(vals[l - 1])


def smoothness_report(model: ScaledModel, k: int = 2, l: int = 1, order: Optional[int] = None,
                      mask_tol: float = MASK_TOL, node_window=NODE_WINDOW) -> SmoothnessReport:
    """Roughness of the k-th and l-th eigenvectors (soft edge) or right singular
    vectors (hard edge) of ``model`` and of their ratio."""
    n = model.matrix.shape[0] if hasattr(model.matrix, "shape") else model.matrix.n
    if not (1 <= k <= n and 1 <= l <= n) or k == l:
        raise DomainError("need distinct 1 <= k, l <= n")
    if order is None:
        order = 2 if model.kind.soft else 1
    vk, vl = _vectors(model, k, l)
    r = ratio_vector(vk, vl, mask_tol)
    kw = dict(order=order, mask_tol=mask_tol, node_window=node_window)
    pk = smoothness_profile(vk, model.h, **kw)
    pl = smoothness_profile(vl, model.h, **kw)
    pr = smoothness_profile(r, model.h, **kw)
    degenerate = math.isinf(model.beta)
    note = "beta = inf: no noise, the ordering is not tested" if degenerate else ""
    return SmoothnessReport(k, l, pk.roughness, pl.roughness, pr.roughness,
                            {"k": pk, "l": pl, "ratio": pr}, degenerate, note)


def write_profiles_csv(report: SmoothnessReport, path) -> Path:
    """One row per vector entry: index, then log|v|, gradient and second gradient
    for the k-th vector, the l-th vector and their ratio (empty when masked)."""
    path = Path(path)
    cols = ["index"]
    for name in ("k", "l", "ratio"):
        cols += [f"log_abs_{name}", f"grad1_{name}", f"grad2_{name}"]
    prof = [report.profiles[n] for n in ("k", "l", "ratio")]
    m = len(prof[0].log_abs)
    fmt = lambda x: "" if not np.isfinite(x) else repr(float(x))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols)
        for i in range(m):
            row = [i]
            for p in prof:
                row += [fmt(p.log_abs[i]), fmt(p.grad1[i]), fmt(p.grad2[i])]
            w.writerow(row)
    return path
