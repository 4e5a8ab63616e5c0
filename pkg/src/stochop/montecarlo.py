"""Reproducible Monte Carlo experiments over matrix models and Rayleigh-Ritz operators.

Sample ``i`` of an experiment with seed ``s`` is drawn from
``StreamKey(s, i)`` and nothing else, so the raw samples do not depend on
how the indices are split across worker processes. BLAS is pinned to one
thread while samples are computed so that floating point summation order is
fixed as well.
"""

from __future__ import annotations

import csv
import enum
import hashlib
import json
import logging
import math
import multiprocessing as mp
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
from threadpoolctl import threadpool_limits

from . import ensembles as ens
from . import scalings as sc
from .linalg import SymTridiagonal, eig_tridiag_largest, sv_bidiag_smallest
from .operators import RayleighRitzConfig, stochastic_airy_min_eig, stochastic_bessel_min_sv
from .randsrc import StreamKey
from .specfun import DomainError

__all__ = [
    "ExperimentKind",
    "Experiment",
    "Histogram",
    "MCResult",
    "MCFailure",
    "run_experiment_once",
    "run_mc",
    "histogram",
    "ks_distance",
    "export",
    "read_raw_csv",
    "read_histogram_csv",
    "read_sidecar",
]

log = logging.getLogger(__name__)

FAILURE_TOLERANCE = 1e-3

SOFT_MODELS = ("hermite", "laguerre-l", "laguerre-m")
HARD_MODELS = ("laguerre-l", "laguerre-m", "jacobi")


class MCFailure(RuntimeError):
    """Too many samples failed (at least 0.1% of the run)."""


class ExperimentKind(enum.Enum):
    SOFT_EDGE = "soft-edge"
    HARD_EDGE = "hard-edge"
    AIRY_RR = "airy-rr"
    BESSEL_RR = "bessel-rr"


def _beta_json(beta: float):
    return "inf" if math.isinf(beta) else beta


@dataclass(frozen=True)
class Experiment:
    """One Monte Carlo experiment.

    Matrix experiments use ``model, n, beta, a, b, k`` and ``path``
    (``"scaled"`` solves the edge-scaled model, ``"direct"`` rescales the
    extreme eigen/singular value of the unscaled model). Rayleigh-Ritz
    experiments use ``rr`` (a :class:`RayleighRitzConfig`) and ``k``.
    """

    kind: ExperimentKind
    samples: int
    seed: int
    model: Optional[str] = None
    n: Optional[int] = None
    beta: float = 2.0
    a: float = 0.0
    b: float = 0.0
    k: int = 1
    path: str = "scaled"
    rr: Optional[RayleighRitzConfig] = None

    def __post_init__(self):
        object.__setattr__(self, "kind", ExperimentKind(self.kind))
        if self.rr is not None:
            object.__setattr__(self, "beta", self.rr.beta)
            object.__setattr__(self, "a", self.rr.a)
        object.__setattr__(self, "beta", ens.parse_beta(self.beta))
        if int(self.samples) != self.samples or self.samples < 1:
            raise DomainError("samples must be a positive integer")
        if int(self.seed) != self.seed or not 0 <= self.seed < 2**64:
            raise DomainError("seed must be a 64-bit non-negative integer")
        if int(self.k) != self.k or self.k < 1:
            raise DomainError("k must be a positive integer")
        if self.path not in ("scaled", "direct"):
            raise DomainError("path must be 'scaled' or 'direct'")
        if self.kind in (ExperimentKind.SOFT_EDGE, ExperimentKind.HARD_EDGE):
            allowed = SOFT_MODELS if self.kind is ExperimentKind.SOFT_EDGE else HARD_MODELS
            if self.model not in allowed:
                raise DomainError(f"{self.kind.value} needs model in {allowed}, got {self.model!r}")
            if self.n is None or int(self.n) != self.n or self.n < 2:
                raise DomainError("matrix experiments need n >= 2")
            if self.k > self.n:
                raise DomainError("k exceeds n")
            if not self.a > -1 or (self.model == "jacobi" and not self.b > -1):
                raise DomainError("model parameters out of range")
            if self.model == "laguerre-m" and not (self.a > 0 or (math.isinf(self.beta) and self.a >= 0)):
                raise DomainError("the rectangular Laguerre model needs a > 0")
        else:
            if self.rr is None:
                raise DomainError("Rayleigh-Ritz experiments need an rr config")
            if self.kind is ExperimentKind.BESSEL_RR and self.k != 1:
                raise DomainError("bessel-rr returns the least singular value only (k = 1)")
            if self.k > self.rr.l:
                raise DomainError("k exceeds the basis size")

    # -- constructors -------------------------------------------------------

    @classmethod
    def soft_edge(cls, model: str, n: int, beta=2.0, k: int = 1, a: float = 0.0,
                  samples: int = 1000, seed: int = 0, path: str = "scaled") -> "Experiment":
        return cls(ExperimentKind.SOFT_EDGE, samples, seed, model=model, n=n, beta=beta, a=a, k=k, path=path)

    @classmethod
    def hard_edge(cls, model: str, n: int, beta=2.0, a: float = 0.0, b: float = 0.0, k: int = 1,
                  samples: int = 1000, seed: int = 0, path: str = "scaled") -> "Experiment":
        return cls(ExperimentKind.HARD_EDGE, samples, seed, model=model, n=n, beta=beta, a=a, b=b, k=k, path=path)

    @classmethod
    def airy_rr(cls, config: RayleighRitzConfig, samples: int = 100_000, seed: int = 0, k: int = 1) -> "Experiment":
        return cls(ExperimentKind.AIRY_RR, samples, seed, k=k, rr=config)

    @classmethod
    def bessel_rr(cls, config: RayleighRitzConfig, samples: int = 10_000, seed: int = 0) -> "Experiment":
        return cls(ExperimentKind.BESSEL_RR, samples, seed, a=config.a, rr=config)

    # -- serialization -------------------------------------------------------

    def to_dict(self) -> dict:
        d = {"kind": self.kind.value, "samples": int(self.samples), "seed": int(self.seed), "k": int(self.k),
             "beta": _beta_json(self.beta)}
        if self.rr is not None:
            d["rr"] = self.rr.to_dict()
        else:
            d.update(model=self.model, n=int(self.n), a=float(self.a), path=self.path)
            if self.model == "jacobi":
                d["b"] = float(self.b)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Experiment":
        d = dict(d)
        if "rr" in d and d["rr"] is not None:
            d["rr"] = RayleighRitzConfig.from_dict(d["rr"])
        return cls(**d)

    def digest(self) -> str:
        """Hash of the configuration without seed and sample count."""
        d = self.to_dict()
        d.pop("seed")
        d.pop("samples")
        blob = json.dumps(d, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


# ---------------------------------------------------------------------------
# single samples
# ---------------------------------------------------------------------------


def _sample_model(exp: Experiment, key: StreamKey):
    m = exp.model
    if m == "hermite":
        return ens.sample_hermite(key, exp.n, exp.beta)
    if m == "laguerre-l":
        return ens.sample_laguerre_L(key, exp.n, exp.beta, exp.a)
    if m == "laguerre-m":
        return ens.sample_laguerre_M(key, exp.n, exp.beta, exp.a)
    return ens.sample_jacobi(key, exp.n, exp.beta, exp.a, exp.b)


def _soft_direct(exp: Experiment, model) -> float:
    n, k = exp.n, exp.k
    if exp.model == "hermite":
        lam = eig_tridiag_largest(model.matrix, k)[k - 1]
        return -math.sqrt(2.0) * n ** (1.0 / 6.0) * (lam - math.sqrt(2.0 * n))
    gk = model.matrix.golub_kahan()
    sig = eig_tridiag_largest(SymTridiagonal(np.zeros(len(gk) + 1), gk), k)[k - 1]
    return -(2.0 ** (2.0 / 3.0)) * n ** (1.0 / 6.0) * (sig - 2.0 * math.sqrt(n))


def _hard_direct(exp: Experiment, model) -> float:
    n, k, a = exp.n, exp.k, exp.a
    if exp.model == "jacobi":
        c = sv_bidiag_smallest(model.block("B11"), k)[k - 1]
        return (2 * n + a + exp.b + 1) * c
    sig = sv_bidiag_smallest(model.matrix, k)[k - 1]
    return math.sqrt(2.0) * math.sqrt(2 * n + a + 1) * sig


def _scaled(exp: Experiment, model) -> sc.ScaledModel:
    if exp.kind is ExperimentKind.SOFT_EDGE:
        return sc.hermite_soft(model) if exp.model == "hermite" else sc.laguerre_soft(model)
    return sc.jacobi_hard(model) if exp.model == "jacobi" else sc.laguerre_hard(model)


def run_experiment_once(exp: Experiment, sample_index: int) -> float:
    """The statistic of sample ``sample_index``; a pure function of (exp, index).

    * soft-edge: k-th least eigenvalue of the soft-edge scaled model
      (equivalently minus the rescaled k-th largest eigenvalue / singular value);
    * hard-edge: k-th least singular value of the hard-edge scaled model;
    * airy-rr: k-th least eigenvalue of the truncated Airy K;
    * bessel-rr: least singular value of the Bessel operator.
    """
    key = StreamKey(int(exp.seed), int(sample_index))
    if exp.kind is ExperimentKind.AIRY_RR:
        w = stochastic_airy_min_eig(key, exp.rr, k=exp.k)
        return float(w) if exp.k == 1 else float(w[exp.k - 1])
    if exp.kind is ExperimentKind.BESSEL_RR:
        return stochastic_bessel_min_sv(key, exp.rr)
    model = _sample_model(exp, key)
    if exp.path == "direct":
        if exp.kind is ExperimentKind.SOFT_EDGE:
            return float(_soft_direct(exp, model))
        return float(_hard_direct(exp, model))
    return float(_scaled(exp, model).smallest(exp.k)[exp.k - 1])


def _run_chunk(exp: Experiment, start: int, stop: int):
    values = np.full(stop - start, np.nan)
    errors = []
    with threadpool_limits(limits=1):
        for i in range(start, stop):
            try:
                values[i - start] = run_experiment_once(exp, i)
            except (ArithmeticError, DomainError, np.linalg.LinAlgError) as err:
                errors.append((i, f"{type(err).__name__}: {err}"))
    return start, values, errors


# ---------------------------------------------------------------------------
# histograms and aggregation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Histogram:
    edges: np.ndarray
    counts: np.ndarray
    n_total: int
    mean: float
    sd: float
    seed: Optional[int] = None
    digest: Optional[str] = None


def histogram(values, bins=None, seed=None, digest=None) -> Histogram:
    """Histogram of the finite entries of ``values``.

    ``bins`` defaults to the Freedman-Diaconis rule. A sample with no spread
    gets one unit-width bin centred on its value.
    """
    x = np.asarray(values, dtype=float)
    x = x[np.isfinite(x)]
    if len(x) == 0:
        raise DomainError("no finite samples to histogram")
    if np.ptp(x) == 0:
        edges = np.array([x[0] - 0.5, x[0] + 0.5])
    else:
        edges = np.histogram_bin_edges(x, bins="fd" if bins is None else bins)
    counts, edges = np.histogram(x, bins=edges)
    sd = float(np.std(x, ddof=1)) if len(x) > 1 else 0.0
    return Histogram(edges, counts.astype(np.int64), int(len(x)), float(np.mean(x)), sd, seed, digest)


@dataclass
class MCResult:
    experiment: Experiment
    values: np.ndarray
    failures: list = field(default_factory=list)
    histogram: Optional[Histogram] = None

    @property
    def finite(self) -> np.ndarray:
        return self.values[np.isfinite(self.values)]


def _chunks(samples: int, workers: int):
    nchunk = max(1, min(samples, 4 * workers))
    bounds = np.linspace(0, samples, nchunk + 1).astype(int)
    return [(int(lo), int(hi)) for lo, hi in zip(bounds[:-1], bounds[1:]) if hi > lo]


def run_mc(exp: Experiment, workers: int = 1, bins=None) -> MCResult:
    """Run every sample of ``exp``; the raw values are independent of ``workers``.

    Failed samples are stored as NaN and listed in ``result.failures``. If
    the failures reach 0.1% of the run, :class:`MCFailure` is raised.
    """
    if workers < 1:
        raise DomainError("workers must be positive")
    values = np.full(exp.samples, np.nan)
    failures = []
    chunks = _chunks(exp.samples, workers)
    if workers == 1:
        outs = [_run_chunk(exp, lo, hi) for lo, hi in chunks]
    else:
        ctx = mp.get_context("spawn")
        with ProcessPoolExecutor(max_workers=workers, mp_context=ctx) as pool:
            futs = [pool.submit(_run_chunk, exp, lo, hi) for lo, hi in chunks]
            outs = [f.result() for f in futs]
    for start, vals, errs in outs:
        values[start:start + len(vals)] = vals
        failures.extend(errs)
    failures.sort()
    if failures:
        log.warning("%d failed samples: %s", len(failures), [i for i, _ in failures][:20])
    if len(failures) >= FAILURE_TOLERANCE * exp.samples:
        raise MCFailure(f"{len(failures)} of {exp.samples} samples failed; first: {failures[0][1]}")
    hist = histogram(values, bins=bins, seed=exp.seed, digest=exp.digest())
    return MCResult(exp, values, failures, hist)


def ks_distance(samples_a, samples_b) -> float:
    """Two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b|."""
    a = np.sort(np.asarray(samples_a, dtype=float).ravel())
    b = np.sort(np.asarray(samples_b, dtype=float).ravel())
    if len(a) == 0 or len(b) == 0:
        raise DomainError("ks_distance needs two nonempty samples")
    pts = np.concatenate([a, b])
    fa = np.searchsorted(a, pts, side="right") / len(a)
    fb = np.searchsorted(b, pts, side="right") / len(b)
    return float(np.max(np.abs(fa - fb)))


# ---------------------------------------------------------------------------
# files
# ---------------------------------------------------------------------------


def _fmt(x: float) -> str:
    return "nan" if not np.isfinite(x) else repr(float(x))


def _stem(result: MCResult) -> str:
    return f"{result.experiment.digest()}_{result.experiment.seed}"


def export(result: MCResult, outdir, formats=("raw", "histogram", "json")) -> dict:
    """Write ``{digest}_{seed}.csv`` (raw), ``.hist.csv`` and ``.json`` into ``outdir``.

    Returns the written paths keyed by format.
    """
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    stem = _stem(result)
    paths = {}
    if "raw" in formats:
        p = outdir / f"{stem}.csv"
        with open(p, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["sample_index", "value"])
            for i, v in enumerate(result.values):
                w.writerow([i, _fmt(v)])
        paths["raw"] = p
    if "histogram" in formats:
        h = result.histogram or histogram(result.values, seed=result.experiment.seed,
                                          digest=result.experiment.digest())
        p = outdir / f"{stem}.hist.csv"
        with open(p, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["bin_left", "bin_right", "count"])
            for lo, hi, c in zip(h.edges[:-1], h.edges[1:], h.counts):
                w.writerow([_fmt(lo), _fmt(hi), int(c)])
        paths["histogram"] = p
    if "json" in formats:
        h = result.histogram
        side = {
            "experiment": result.experiment.to_dict(),
            "digest": result.experiment.digest(),
            "seed": int(result.experiment.seed),
            "n_total": h.n_total if h else None,
            "mean": h.mean if h else None,
            "sd": h.sd if h else None,
            "failures": [[int(i), msg] for i, msg in result.failures],
        }
        p = outdir / f"{stem}.json"
        p.write_text(json.dumps(side, indent=2, sort_keys=True) + "\n")
        paths["json"] = p
    return paths


def read_raw_csv(path) -> np.ndarray:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if rows[0] != ["sample_index", "value"]:
        raise DomainError(f"{path} is not a raw sample file")
    idx = np.array([int(r[0]) for r in rows[1:]])
    vals = np.array([float(r[1]) for r in rows[1:]])
    out = np.full(len(idx), np.nan)
    out[idx] = vals
    return out


def read_histogram_csv(path) -> tuple[np.ndarray, np.ndarray]:
    """``(edges, counts)`` from a histogram file."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if rows[0] != ["bin_left", "bin_right", "count"]:
        raise DomainError(f"{path} is not a histogram file")
    body = rows[1:]
    edges = np.array([float(r[0]) for r in body] + [float(body[-1][1])])
    counts = np.array([int(r[2]) for r in body], dtype=np.int64)
    return edges, counts


def read_sidecar(path) -> tuple[Experiment, dict]:
    d = json.loads(Path(path).read_text())
    return Experiment.from_dict(d["experiment"]), d
