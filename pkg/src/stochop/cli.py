"""Command-line interface: ``stochop {sample,spectrum,mc,verify,diagnose}``.

Exit codes: 0 success, 1 internal failure (or a failed verification),
2 usage error (bad flags or parameters outside a model's domain).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from . import ensembles as ens
from . import scalings as sc
from .linalg import SymTridiagonal, eig_tridiag_smallest, sv_bidiag_smallest
from .montecarlo import Experiment, export, run_mc
from .operators import RayleighRitzConfig
from .randsrc import StreamKey
from .specfun import DomainError

log = logging.getLogger("stochop")

MODELS = ("hermite", "laguerre-l", "laguerre-m", "jacobi")
SCALINGS = ("none", "hermite-soft", "laguerre-soft", "laguerre-hard", "jacobi-hard")
DIAGNOSE_SCALINGS = SCALINGS[1:]

# defaults of the published Rayleigh-Ritz runs
AIRY_DEFAULTS = {"samples": 100_000, "l": 150, "mesh": 0.05, "right": 86.9}
BESSEL_DEFAULTS = {"samples": 10_000, "l": 75, "mesh": 0.001}


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    """Parameters of one invocation; serializes to canonical JSON."""

    command: str
    params: dict = field(default_factory=dict)
    seed: int = 0
    out: Optional[str] = None
    workers: int = 1

    def to_dict(self) -> dict:
        return {"command": self.command, "params": dict(self.params), "seed": self.seed,
                "out": self.out, "workers": self.workers}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        return cls(**json.loads(text))

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------


def _beta(text: str) -> float:
    try:
        return ens.parse_beta(text)
    except (ValueError, DomainError) as err:
        raise argparse.ArgumentTypeError(str(err))


def _emit(text: str, out: Optional[str]) -> None:
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text)


def _build_model(args):
    key = StreamKey(args.seed)
    m = args.model
    if m == "hermite":
        return ens.sample_hermite(key, args.n, args.beta)
    if m == "laguerre-l":
        return ens.sample_laguerre_L(key, args.n, args.beta, args.a)
    if m == "laguerre-m":
        return ens.sample_laguerre_M(key, args.n, args.beta, args.a)
    if m == "jacobi":
        return ens.sample_jacobi(key, args.n, args.beta, args.a, args.b)
    raise UsageError(f"unknown model {m!r}")


def _scaled(model, scaling: str):
    kind = model.kind
    if scaling == "hermite-soft" and kind == "hermite":
        return sc.hermite_soft(model)
    if scaling == "laguerre-soft" and kind in ("laguerre-l", "laguerre-m"):
        return sc.laguerre_soft(model)
    if scaling == "laguerre-hard" and kind in ("laguerre-l", "laguerre-m"):
        return sc.laguerre_hard(model)
    if scaling == "jacobi-hard" and kind == "jacobi":
        return sc.jacobi_hard(model)
    raise UsageError(f"scaling {scaling!r} does not apply to a {kind} model")


def _default_model(scaling: str) -> str:
    return {"hermite-soft": "hermite", "laguerre-soft": "laguerre-l",
            "laguerre-hard": "laguerre-l", "jacobi-hard": "jacobi"}.get(scaling, "hermite")


def _size(model) -> int:
    return model.n


def _unscaled_smallest(model, k: int) -> np.ndarray:
    if model.kind == "hermite":
        return eig_tridiag_smallest(model.matrix, k)
    if model.kind == "jacobi":
        # CS values: singular values of the upper-left block
        return sv_bidiag_smallest(model.block("B11"), k)
    return sv_bidiag_smallest(model.matrix, k)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_sample(args) -> int:
    model = _build_model(args)
    _emit(model.to_json() + "\n", args.out)
    return 0


def cmd_spectrum(args) -> int:
    if args.model_file:
        model = ens.model_from_dict(json.loads(Path(args.model_file).read_text()))
    else:
        if args.n is None:
            raise UsageError("give --n (or --model-file)")
        args.model = args.model or _default_model(args.scaling)
        model = _build_model(args)
    if args.k < 1 or args.k > _size(model):
        raise UsageError(f"k must lie in 1..{_size(model)}")
    if args.scaling == "none":
        vals = _unscaled_smallest(model, args.k)
    else:
        vals = _scaled(model, args.scaling).smallest(args.k)
    lines = ["index,value"] + [f"{i + 1},{float(v)!r}" for i, v in enumerate(vals)]
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def _experiment(args) -> Experiment:
    kind = args.experiment
    if kind == "airy-rr":
        cfg = RayleighRitzConfig.airy(args.beta, l=args.l or AIRY_DEFAULTS["l"],
                                      mesh=args.mesh or AIRY_DEFAULTS["mesh"],
                                      right=args.right or AIRY_DEFAULTS["right"])
        return Experiment.airy_rr(cfg, samples=args.samples or AIRY_DEFAULTS["samples"], seed=args.seed, k=args.k)
    if kind == "bessel-rr":
        if args.k != 1:
            raise UsageError("bessel-rr computes the least singular value only")
        cfg = RayleighRitzConfig.bessel(args.beta, a=args.a, l=args.l or BESSEL_DEFAULTS["l"],
                                        mesh=args.mesh or BESSEL_DEFAULTS["mesh"])
        return Experiment.bessel_rr(cfg, samples=args.samples or BESSEL_DEFAULTS["samples"], seed=args.seed)
    if args.n is None:
        raise UsageError(f"{kind} needs --n")
    samples = args.samples or 1000
    if kind == "soft-edge":
        return Experiment.soft_edge(args.model or "hermite", args.n, args.beta, k=args.k, a=args.a,
                                    samples=samples, seed=args.seed, path=args.path)
    return Experiment.hard_edge(args.model or "laguerre-l", args.n, args.beta, a=args.a, b=args.b, k=args.k,
                                samples=samples, seed=args.seed, path=args.path)


def cmd_mc(args) -> int:
    exp = _experiment(args)
    res = run_mc(exp, workers=args.workers, bins=args.bins)
    paths = export(res, args.out)
    h = res.histogram
    print(f"{exp.kind.value}: {h.n_total} samples, mean {h.mean:.6f}, sd {h.sd:.6f}, "
          f"{len(h.counts)} bins, {len(res.failures)} failures")
    for kind, p in paths.items():
        print(f"{kind}: {p}")
    return 0


def cmd_verify(args) -> int:
    from .verify import run_suite

    results = run_suite(args.suite, echo=print)
    passed = sum(r.passed for r in results)
    print(f"{passed}/{len(results)} checks passed")
    return 0 if passed == len(results) else 1


def cmd_diagnose(args) -> int:
    from .diagnostics import smoothness_report, write_profiles_csv

    args.model = args.model or _default_model(args.scaling)
    model = _build_model(args)
    scaled = _scaled(model, args.scaling)
    size = scaled.matrix.n if hasattr(scaled.matrix, "n") else scaled.matrix.nsv
    if not (1 <= args.k <= size and 1 <= args.l <= size) or args.k == args.l:
        raise UsageError(f"k and l must be distinct and lie in 1..{size}")
    rep = smoothness_report(scaled, args.k, args.l)
    print(f"roughness v_{args.k}: {rep.roughness_k:.6g}")
    print(f"roughness v_{args.l}: {rep.roughness_l:.6g}")
    print(f"roughness ratio: {rep.roughness_ratio:.6g}")
    if rep.degenerate:
        print(f"note: {rep.note}")
    else:
        print(f"ratio smoother than both vectors: {rep.prediction_holds}")
    if args.out:
        print(f"profiles: {write_profiles_csv(rep, args.out)}")
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _common(p: argparse.ArgumentParser, out_help: str = "output file (default stdout)") -> None:
    p.add_argument("--seed", type=int, default=0, help="64-bit seed (default 0)")
    p.add_argument("--out", default=None, help=out_help)
    p.add_argument("--config", default=None, help="JSON file of parameter defaults")
    p.add_argument("--save-config", default=None, help="write the resolved run config as JSON")


def _model_args(p: argparse.ArgumentParser, n_required: bool = False) -> None:
    # a required --n is checked after parsing so that --config can supply it
    p.add_argument("--n", type=int, default=None, help="matrix size" + (" (required)" if n_required else ""))
    p.set_defaults(n_required=n_required)
    p.add_argument("--beta", type=_beta, default=2.0, help="positive real or 'inf' (default 2)")
    p.add_argument("--a", type=float, default=0.0, help="Laguerre/Jacobi parameter a (default 0)")
    p.add_argument("--b", type=float, default=0.0, help="Jacobi parameter b (default 0)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="stochop", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"stochop {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="sample a matrix model and print it as JSON")
    p.add_argument("model", choices=MODELS)
    _model_args(p, n_required=True)
    _common(p)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("spectrum", help="k least eigen/singular values of a (scaled) model")
    p.add_argument("scaling", choices=SCALINGS)
    p.add_argument("--model", choices=MODELS, default=None, help="model (default follows the scaling)")
    p.add_argument("--model-file", default=None, help="JSON written by 'stochop sample'")
    p.add_argument("--k", type=int, default=1)
    _model_args(p)
    _common(p)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("mc", help="Monte Carlo run: raw CSV, histogram CSV and JSON sidecar")
    p.add_argument("experiment", choices=("airy-rr", "bessel-rr", "soft-edge", "hard-edge"))
    p.add_argument("--model", choices=MODELS, default=None)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--samples", type=int, default=None,
                   help="default 100000 (airy-rr), 10000 (bessel-rr), 1000 (matrix runs)")
    p.add_argument("--l", type=int, default=None, help="basis size (default 150 Airy, 75 Bessel)")
    p.add_argument("--mesh", type=float, default=None, help="quadrature step (default 0.05 Airy, 0.001 Bessel)")
    p.add_argument("--right", type=float, default=None, help="Airy domain right end (default 86.9)")
    p.add_argument("--path", choices=("scaled", "direct"), default="scaled")
    p.add_argument("--bins", type=int, default=None, help="histogram bins (default Freedman-Diaconis)")
    p.add_argument("--workers", type=int, default=1)
    _model_args(p)
    _common(p, out_help="output directory (default .)")
    p.set_defaults(func=cmd_mc, out=".")

    p = sub.add_parser("verify", help="run an acceptance suite")
    from .verify import SUITES

    p.add_argument("suite", choices=tuple(SUITES))
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("diagnose", help="eigenvector-ratio smoothness report")
    p.add_argument("scaling", choices=DIAGNOSE_SCALINGS)
    p.add_argument("--model", choices=MODELS, default=None)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--l", type=int, default=1)
    _model_args(p, n_required=True)
    _common(p, out_help="CSV file for the three profiles")
    p.set_defaults(func=cmd_diagnose)
    return parser


def _parse(parser: argparse.ArgumentParser, argv):
    args = parser.parse_args(argv)
    cfg_path = getattr(args, "config", None)
    if cfg_path:
        try:
            cfg = json.loads(Path(cfg_path).read_text())
        except (OSError, ValueError) as err:
            parser.error(f"cannot read --config: {err}")
        if "params" in cfg:  # a saved RunConfig
            flat = dict(cfg["params"])
            flat.update({k: cfg[k] for k in ("seed", "out", "workers") if cfg.get(k) is not None})
            cfg = flat
        if "beta" in cfg:
            cfg["beta"] = ens.parse_beta(cfg["beta"])
        # config values become defaults; explicit flags still win
        sub = parser._subparsers._group_actions[0].choices[args.command]
        sub.set_defaults(**cfg)
        args = parser.parse_args(argv)
    if getattr(args, "n_required", False) and args.n is None:
        parser._subparsers._group_actions[0].choices[args.command].error(
            "the following arguments are required: --n")
    return args


def run_config(args) -> RunConfig:
    skip = {"func", "command", "seed", "out", "workers", "config", "save_config", "verbose", "n_required"}
    params = {k: ("inf" if isinstance(v, float) and math.isinf(v) else v)
              for k, v in sorted(vars(args).items()) if k not in skip}
    return RunConfig(args.command, params, getattr(args, "seed", 0), getattr(args, "out", None),
                     getattr(args, "workers", 1))


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = _parse(parser, argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if getattr(args, "save_config", None):
            Path(args.save_config).write_text(run_config(args).to_json() + "\n")
        return args.func(args)
    except (UsageError, DomainError) as err:
        print(f"stochop {args.command}: error: {err}", file=sys.stderr)
        return 2
    except Exception as err:  # noqa: BLE001 - report and map to exit code 1
        log.debug("internal failure", exc_info=True)
        print(f"stochop {args.command}: internal error: {type(err).__name__}: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
