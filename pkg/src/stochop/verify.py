"""Acceptance checks, grouped into suites for ``stochop verify``.

Each check returns a :class:`CheckResult`. Oracle values (Airy and Bessel
zeros, reference means) default to the package's own tables and can be
overridden, which is how the test-suite feeds in independently computed
values.
"""

from __future__ import annotations

import json
import math
import tempfile
import time
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from . import ensembles as ens
from . import scalings as sc
from .linalg import eig_dense_sym
from .montecarlo import Experiment, export, ks_distance, run_mc
from .operators import RayleighRitzConfig, stochastic_airy_min_eig, stochastic_bessel_min_sv
from .randsrc import StreamKey
from .specfun import airy_zeros, bessel_zeros

__all__ = ["CheckResult", "SUITES", "run_suite", "load_reference_means", "CHECKS"]


@dataclass
class CheckResult:
    criterion: int
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0
    values: dict = field(default_factory=dict, repr=False)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] criterion {self.criterion}: {self.name} ({self.seconds:.1f} s) {self.detail}"


def _timed(criterion: int, name: str, limit: float):
    def wrap(fn):
        def run(*args, **kwargs) -> CheckResult:
            t0 = time.perf_counter()
            passed, detail, values = fn(*args, **kwargs)
            dt = time.perf_counter() - t0
            if dt > limit:
                passed = False
                detail += f"; runtime {dt:.1f} s exceeds {limit:.0f} s"
            return CheckResult(criterion, name, bool(passed), detail, dt, values)

        run.__name__ = fn.__name__
        run.__doc__ = fn.__doc__
        return run

    return wrap


def _decreasing(errs) -> bool:
    return all(b < a for a, b in zip(errs[:-1], errs[1:]))


# ---------------------------------------------------------------------------
# 1, 2: zero temperature
# ---------------------------------------------------------------------------


@_timed(1, "zero-temperature soft edge", 60.0)
def soft_edge_zero_temperature(airy_oracle=None, sizes=(1_000, 10_000, 100_000), tol=1e-2):
    """lambda_1..3 of H_soft^inf approach minus the Airy zeros."""
    target = np.asarray(airy_oracle if airy_oracle is not None else -airy_zeros(3).zeros, dtype=float)
    errs = []
    for n in sizes:
        lam = sc.hermite_soft(ens.hermite_inf(n)).smallest(3)
        errs.append(np.abs(lam - target))
    errs = np.array(errs)
    ok_dec = all(_decreasing(errs[:, k]) for k in range(3))
    ok_tol = bool(np.all(errs[-1] <= tol))
    detail = "errors by n: " + "; ".join(
        f"n={n}: " + ", ".join(f"{e:.4g}" for e in row) for n, row in zip(sizes, errs)
    )
    return ok_dec and ok_tol, detail, {"errors": errs.tolist()}


@_timed(2, "zero-temperature hard edge", 60.0)
def hard_edge_zero_temperature(j0=None, j1=None, sizes=(500, 1000, 2000), tol=1e-2):
    """sigma_1 of L_hard^{inf,0}, J_hard^{inf,0,0} and M_hard^{inf,1} approach Bessel zeros."""
    j0 = float(j0 if j0 is not None else bessel_zeros(0.0, 1).zeros[0])
    j1 = float(j1 if j1 is not None else bessel_zeros(1.0, 1).zeros[0])
    cases = {
        "L_hard(a=0)": (lambda n: sc.laguerre_hard(ens.laguerre_L_inf(n, 0.0)), j0),
        "J_hard(a=b=0)": (lambda n: sc.jacobi_hard(ens.jacobi_inf(n, 0.0, 0.0)), j0),
        "M_hard(a=1)": (lambda n: sc.laguerre_hard(ens.laguerre_M_inf(n, 1.0)), j1),
    }
    ok = True
    parts = []
    values = {}
    for name, (build, target) in cases.items():
        errs = [abs(build(n).smallest(1)[0] - target) for n in sizes]
        good = _decreasing(errs) and errs[-1] <= tol
        ok &= good
        parts.append(f"{name}: " + ", ".join(f"{e:.3g}" for e in errs))
        values[name] = errs
    return ok, "; ".join(parts), values


# ---------------------------------------------------------------------------
# 3, 4: exact identities
# ---------------------------------------------------------------------------


@_timed(3, "exact identities", 10.0)
def exact_identities(seed: int = 3):
    """Similarity, shuffle embedding and log decomposition hold to rounding."""
    worst_sim = worst_emb = worst_log = 0.0
    for case in range(100):
        key = StreamKey(seed, case)
        rng = key.generator()
        n = int(rng.integers(2, 13))
        beta = float(rng.choice([0.5, 1.0, 2.0, 4.0, 7.3]))
        a = float(rng.uniform(-0.9, 3.0))
        H = ens.sample_hermite(rng, n, beta)
        ref = eig_dense_sym(H.to_dense())
        sim = np.sort(np.linalg.eigvals(sc.hermite_similarity(H).to_dense()).real)
        worst_sim = max(worst_sim, np.abs(sim - ref).max() / max(1.0, np.abs(ref).max()))
        for model in (ens.sample_laguerre_L(rng, n, beta, a), ens.sample_laguerre_M(rng, n, beta, a + 1.0)):
            sv = np.linalg.svd(model.to_dense(), compute_uv=False)
            ev = np.sort(np.linalg.eigvals(sc.shuffle_embed_dense(model)).real)
            want = np.sort(np.concatenate([sv, -sv] + ([[0.0]] if isinstance(model, ens.LaguerreRect) else [])))
            worst_emb = max(worst_emb, np.abs(ev - want).max() / max(1.0, sv.max()))
        L = ens.sample_laguerre_L(rng, n, beta, a)
        A = sc.laguerre_hard(L).matrix
        B = sc.laguerre_hard(ens.laguerre_L_inf(n, a)).matrix
        rebuilt = sc.log_decompose(A, B).apply(B)
        rel = max(
            np.abs(rebuilt.main - A.main).max() / np.abs(A.main).max(),
            (np.abs(rebuilt.adjacent - A.adjacent).max() / np.abs(A.adjacent).max()) if n > 1 else 0.0,
        )
        worst_log = max(worst_log, rel)
    ok = worst_sim <= 1e-10 and worst_emb <= 1e-9 and worst_log <= 1e-12
    detail = f"similarity {worst_sim:.2e}, embedding {worst_emb:.2e}, log-decomposition {worst_log:.2e}"
    return ok, detail, {"similarity": worst_sim, "embedding": worst_emb, "log": worst_log}


@_timed(4, "zero-temperature error structure", 5.0)
def error_structure(n: int = 200, a_values=(0.0, 0.3, 1.0, 2.5, 0.123456789)):
    """E_L and E_M vanish at a = -1/2 and a = 1/2; otherwise -h(2a +- 1) at alternate rows."""
    ok = True
    notes = []
    EL = sc.soft_decompose(sc.laguerre_soft(ens.laguerre_L_inf(n, -0.5)))["E_sub"]
    EM = sc.soft_decompose(sc.laguerre_soft(ens.laguerre_M_inf(n, 0.5)))["E_sub"]
    ok &= bool(np.all(EL == 0.0)) and bool(np.all(EM == 0.0))
    notes.append(f"max|E_L(-1/2)|={np.abs(EL).max():.1e}, max|E_M(1/2)|={np.abs(EM).max():.1e}")
    for a in a_values:
        sl = sc.laguerre_soft(ens.laguerre_L_inf(n, a))
        el = sc.soft_decompose(sl)["E_sub"]
        want_l = np.zeros_like(el)
        want_l[0::2] = -sl.h * (2 * a + 1)
        sm = sc.laguerre_soft(ens.laguerre_M_inf(n, a))
        em = sc.soft_decompose(sm)["E_sub"]
        want_m = np.zeros_like(em)
        want_m[1::2] = -sm.h * (2 * a - 1)
        good = bool(np.array_equal(el, want_l) and np.array_equal(em, want_m))
        ok &= good
        if not good:
            notes.append(f"a={a}: mismatch {np.abs(el - want_l).max():.1e}/{np.abs(em - want_m).max():.1e}")
    return ok, "; ".join(notes), {}


# ---------------------------------------------------------------------------
# 5: noise statistics
# ---------------------------------------------------------------------------


@_timed(5, "noise statistics", 120.0)
def noise_statistics(seed: int = 5, n_soft: int = 100, draws: int = 100_000,
                     n_hard: int = 500, hard_samples: int = 10_000):
    """Var(chi~^2) = 1 - h^2 x_j; hard-edge g~ has mean ~0 and unit sd away from 0."""
    chit = np.empty((draws, n_soft - 1))
    for s in range(draws):
        chit[s] = sc.noise_stats_W(ens.sample_hermite(StreamKey(seed, s), n_soft, 2.0))["chi_tilde_sq"]
    exact = sc.noise_stats_W(ens.sample_hermite(StreamKey(seed, 0), n_soft, 2.0))["var_exact"]
    var_err = float(np.abs(chit.var(axis=0, ddof=1) - exact).max())

    inf_model = sc.laguerre_hard(ens.laguerre_L_inf(n_hard, 0.0))
    gt = None
    for s in range(hard_samples):
        scaled = sc.laguerre_hard(ens.sample_laguerre_L(StreamKey(seed + 1, s), n_hard, 2.0, 0.0))
        noise = sc.hard_edge_noise(sc.log_decompose(scaled.matrix, inf_model.matrix), scaled)
        if gt is None:
            gt = np.empty((hard_samples, len(noise.g_tilde)))
            rows = noise.grid >= 0.1
        gt[s] = noise.g_tilde
    h = inf_model.h
    sub = gt[:, rows]
    mean_abs = float(np.abs(sub.mean(axis=0)).max())
    pooled_sd = float(math.sqrt(sub.var(axis=0, ddof=1).mean()))
    row_sd = sub.std(axis=0, ddof=1)
    ok = var_err <= 0.02 and mean_abs <= 3 * math.sqrt(h) and abs(pooled_sd - 1.0) <= 5 * h
    detail = (f"max|Var(chi~^2) - (1 - h^2 x)| = {var_err:.4f}; g~: max|mean| = {mean_abs:.4f} "
              f"(bound {3 * math.sqrt(h):.4f}), pooled sd = {pooled_sd:.5f} (1 +- {5 * h:.4f}), "
              f"row sd in [{row_sd.min():.3f}, {row_sd.max():.3f}]")
    return ok, detail, {"var_err": var_err, "mean_abs": mean_abs, "pooled_sd": pooled_sd}


# ---------------------------------------------------------------------------
# 6: beta = inf operators
# ---------------------------------------------------------------------------


@_timed(6, "beta = inf operator reduction", 5.0)
def operator_reduction(airy1=None, j0=None):
    airy1 = float(airy1 if airy1 is not None else -airy_zeros(1).zeros[0])
    j0 = float(j0 if j0 is not None else bessel_zeros(0.0, 1).zeros[0])
    lam = stochastic_airy_min_eig(None, RayleighRitzConfig.airy(beta="inf"))
    sig = stochastic_bessel_min_sv(None, RayleighRitzConfig.bessel(beta="inf", a=0.0))
    ok = abs(lam - airy1) <= 1e-12 * airy1 and abs(sig - j0) <= 1e-3
    return ok, f"Airy lambda_1 = {lam:.10f}; Bessel sigma_1 = {sig:.6f}", {"airy": lam, "bessel": sig}


# ---------------------------------------------------------------------------
# 7: matrix vs operator
# ---------------------------------------------------------------------------


@_timed(7, "matrix / operator consistency", 900.0)
def consistency(samples: int = 2000, seed: int = 7, workers: int = 1, tol: float = 0.10):
    soft = run_mc(Experiment.soft_edge("hermite", 2000, 2.0, samples=samples, seed=seed), workers)
    airy = run_mc(Experiment.airy_rr(RayleighRitzConfig.airy(2.0, l=60, mesh=0.1, right=30.0),
                                     samples=samples, seed=seed + 1), workers)
    hard = run_mc(Experiment.hard_edge("laguerre-l", 1000, 2.0, a=0.0, samples=samples, seed=seed + 2), workers)
    bessel = run_mc(Experiment.bessel_rr(RayleighRitzConfig.bessel(2.0, a=0.0), samples=samples, seed=seed + 3),
                    workers)
    ks_soft = ks_distance(soft.finite, airy.finite)
    ks_hard = ks_distance(hard.finite, bessel.finite)
    detail = (f"KS soft = {ks_soft:.4f} (means {soft.histogram.mean:.3f} vs {airy.histogram.mean:.3f}); "
              f"KS hard = {ks_hard:.4f} (means {hard.histogram.mean:.3f} vs {bessel.histogram.mean:.3f})")
    return ks_soft <= tol and ks_hard <= tol, detail, {"ks_soft": ks_soft, "ks_hard": ks_hard}


# ---------------------------------------------------------------------------
# 8: reproduction of the published histograms
# ---------------------------------------------------------------------------


def load_reference_means() -> dict:
    """Large-run means stored with the package (``data/reference_means.json``)."""
    text = resources.files("stochop").joinpath("data/reference_means.json").read_text()
    return json.loads(text)


def smoke_experiments(samples: int = 1000, seed: int = 0):
    """The small-scale versions of the published runs, keyed like the reference file."""
    out = {}
    for beta in (1, 2, 4):
        out[f"airy-rr/beta={beta}"] = Experiment.airy_rr(RayleighRitzConfig.airy(beta), samples=samples, seed=seed)
        out[f"bessel-rr/beta={beta}"] = Experiment.bessel_rr(RayleighRitzConfig.bessel(beta, a=0.0),
                                                             samples=samples, seed=seed)
    return out


@_timed(8, "published-run reproduction (smoke scale)", 600.0)
def reproduction(samples: int = 1000, seed: int = 0, workers: int = 1, reference: Optional[dict] = None,
                 tol: float = 0.15, outdir=None):
    ref = reference if reference is not None else load_reference_means()
    ok = True
    parts = []
    values = {}
    for name, exp in smoke_experiments(samples, seed).items():
        res = run_mc(exp, workers)
        if outdir is not None:
            export(res, outdir)
        entry = ref[name]
        good = entry["digest"] == exp.digest() and abs(res.histogram.mean - entry["mean"]) <= tol
        good &= res.histogram.n_total == samples and len(res.histogram.counts) > 0
        ok &= good
        parts.append(f"{name}: {res.histogram.mean:.3f} vs {entry['mean']:.3f}")
        values[name] = res.histogram.mean
    return ok, "; ".join(parts), values


# ---------------------------------------------------------------------------
# 9: smoothness
# ---------------------------------------------------------------------------


@_timed(9, "eigenvector-ratio smoothness", 1200.0)
def smoothness(seeds: int = 50, n_hermite: int = 100_000, n_jacobi: int = 10_000, seed: int = 9):
    from .diagnostics import smoothness_report

    soft = hard = 0
    for s in range(seeds):
        H = ens.sample_hermite(StreamKey(seed, s), n_hermite, 2.0)
        soft += bool(smoothness_report(sc.hermite_soft(H), 2, 1).prediction_holds)
        J = ens.sample_jacobi(StreamKey(seed + 1, s), n_jacobi, 2.0, 0.0, 0.0)
        hard += bool(smoothness_report(sc.jacobi_hard(J), 2, 1).prediction_holds)
    ok = soft >= 0.9 * seeds and hard >= 0.9 * seeds
    return ok, f"H_soft {soft}/{seeds}, J_hard {hard}/{seeds}", {"soft": soft, "hard": hard}


# ---------------------------------------------------------------------------
# 10: determinism
# ---------------------------------------------------------------------------


@_timed(10, "worker-count determinism", 120.0)
def determinism(samples: int = 64, seed: int = 10, worker_counts=(1, 4, 8)):
    exps = [
        Experiment.airy_rr(RayleighRitzConfig.airy(2.0, l=40, mesh=0.1, right=30.0), samples=samples, seed=seed),
        Experiment.bessel_rr(RayleighRitzConfig.bessel(2.0, a=0.0, l=20, mesh=0.002), samples=samples, seed=seed),
        Experiment.soft_edge("hermite", 500, 2.0, samples=samples, seed=seed),
        Experiment.hard_edge("jacobi", 300, 1.0, a=0.5, b=1.0, samples=samples, seed=seed),
    ]
    ok = True
    with tempfile.TemporaryDirectory() as tmp:
        for exp in exps:
            blobs = []
            for w in worker_counts:
                paths = export(run_mc(exp, w), Path(tmp) / f"w{w}")
                blobs.append(tuple(Path(p).read_bytes() for p in paths.values()))
            ok &= all(b == blobs[0] for b in blobs)
    return ok, f"{len(exps)} experiments x workers {list(worker_counts)}", {}


CHECKS: dict[int, Callable[..., CheckResult]] = {
    1: soft_edge_zero_temperature,
    2: hard_edge_zero_temperature,
    3: exact_identities,
    4: error_structure,
    5: noise_statistics,
    6: operator_reduction,
    7: consistency,
    8: reproduction,
    9: smoothness,
    10: determinism,
}

SUITES = {
    "zero-temp": (1, 2, 6),
    "identities": (3, 4),
    "noise": (5,),
    "consistency": (7,),
    "reproduction": (8,),
    "smoothness": (9,),
    "determinism": (10,),
    "all": tuple(range(1, 11)),
}


def run_suite(name: str, echo: Optional[Callable[[str], None]] = None) -> list[CheckResult]:
    if name not in SUITES:
        raise KeyError(name)
    out = []
    for c in SUITES[name]:
        r = CHECKS[c]()
        if echo:
            echo(r.line())
        out.append(r)
    return out
