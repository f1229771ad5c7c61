"""Command-line runner: every experiment as a subcommand with JSON + CSV reports.

Exit codes: 0 when every threshold passes, 2 when a threshold fails, 1 when
the configuration is invalid or an operation's precondition is violated.
Parameter precedence is flags > JSON config file > built-in defaults; the
output directory additionally honours ``TLMAX_OUTPUT_DIR`` between the flag
and the config file.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Callable

import numpy as np

from . import __version__, bumps
from .counterexamples import (ModulatedFamilySpec, SharpnessFamilySpec, bounded_sum_probe,
                              measure_modulated_divergence, measure_sharpness_rates)
from .errors import PreconditionError
from .families import RandomFamilySpec, _rng, random_field
from .lab import (check_cor_maximal2, check_embedding_monotone, check_fefferman_stein,
                  check_franke, check_lemma_pointwise, check_multiplier,
                  check_peetre_majorization, check_thm_maximal1, sweep_sub_inequality)
from .reports import Report, RatioReport, dumps, rows_to_csv
from .sample_grid import BAND_TOL, GridSpec, band_check
from .selftest import run_selftest

ENV_OUTPUT_DIR = "TLMAX_OUTPUT_DIR"
DEFAULT_OUTPUT_DIR = "tlmax-reports"


@dataclass(frozen=True)
class Experiment:
    """Defaults plus a runner taking the merged parameters and a worker count."""

    defaults: dict
    run: Callable[[dict, int], Report]


def _family(cfg: dict) -> RandomFamilySpec:
    return RandomFamilySpec(seed=int(cfg["seed"]), count=int(cfg["trials"]), A=float(cfg["A"]),
                            mu=int(cfg["mu"]), k_max=int(cfg["k_max"]),
                            envelope=cfg["envelope"], exponent=float(cfg["exponent"]))


def _fam(**kw) -> dict:
    base = {"seed": 0, "trials": 20, "A": 2.0, "mu": 0, "k_max": 5,
            "envelope": "flat", "exponent": 0.0}
    base.update(kw)
    return base


def _single(cfg: dict, key: str) -> float:
    v = cfg[key]
    if isinstance(v, (list, tuple)):
        if len(v) != 1:
            raise PreconditionError(f"--{key} takes one value for this experiment, got {v}")
        v = v[0]
    return float(v)


def _branches(name: str, cfg: dict, fn: Callable[[float], RatioReport]) -> RatioReport:
    """Run ``fn`` once per q in ``cfg["q"]`` and pool rows and checks."""
    qs = cfg["q"] if isinstance(cfg["q"], (list, tuple)) else [cfg["q"]]
    out = RatioReport(name, {})
    for q in qs:
        sub = fn(float(q))
        out.params = {k: v for k, v in sub.params.items() if k != "q"} | {"q": list(qs)}
        out.rows += [{"q": float(q), **row} for row in sub.rows]
        for key, chk in sub.checks.items():
            out.checks[f"q={q:g}:{key}"] = chk
        for key, val in sub.extra.items():
            out.extra[f"q={q:g}:{key}"] = val
    return out


def _multiplier(cfg: dict, workers: int) -> RatioReport:
    def one(q):
        alpha = cfg["alpha"]
        if alpha is None:
            alpha = 1.0 / min(1.0, q) - 0.5 + 1.0
        return check_multiplier(_family(cfg), cfg["symbol"], float(alpha), q, L=cfg["L"],
                                N=int(cfg["N"]), workers=workers)
    return _branches("multiplier", cfg, one)


def _franke(cfg: dict, workers: int) -> RatioReport:
    return _branches("franke", cfg, lambda q: check_franke(
        _family(cfg), cfg["p0"], cfg["s0"], q, L=cfg["L"], N=int(cfg["N"]), workers=workers))


def _ladder(K: int) -> tuple:
    out = []
    v = 16
    while v <= K:
        out.append(v)
        v *= 2
    return tuple(out)


def _modulated(cfg: dict, workers: int) -> Report:
    spec = ModulatedFamilySpec(r=float(cfg["r"]), q=_single(cfg, "q"), alpha=cfg["alpha"],
                               K=int(cfg["K"]), ladder=_ladder(int(cfg["K"])),
                               cells=int(cfg["cells"]), eps=float(cfg["eps"]))
    return measure_modulated_divergence(spec, workers=workers)


def _sharpness(cfg: dict, workers: int) -> Report:
    spec = SharpnessFamilySpec(M=int(cfg["M"]), mu=int(cfg["mu"]), q=_single(cfg, "q"),
                               K_cap=cfg["K_cap"], resolution=cfg["resolution"])
    return measure_sharpness_rates(spec, Ns=tuple(cfg["Ns"]), fit_Ns=tuple(cfg["fit_Ns"]),
                                   upper_Ns=tuple(cfg["upper_Ns"]), r_cor=float(cfg["r"]),
                                   workers=workers)


def _bounded_sum(cfg: dict, workers: int) -> Report:
    return bounded_sum_probe(float(cfg["alpha"]), float(cfg["M"]), x_max=float(cfg["x_max"]),
                             points=int(cfg["points"]),
                             contrast_max=float(cfg["contrast_max"]), probe=bool(cfg["probe"]))


def _synth(cfg: dict, workers: int) -> Report:
    grid = GridSpec(1, float(cfg["L"]), int(cfg["N"]))
    k, A = int(cfg["k"]), float(cfg["A"])
    f = random_field(grid, k, A, _rng(int(cfg["seed"]), 0, k), cfg["envelope"],
                     float(cfg["exponent"]))
    frac = band_check(f, f.band)
    rows = [{"x": float(x), "re": float(v.real), "im": float(v.imag)}
            for x, v in zip(grid.coords(), f.values)]
    report = Report("synth", {"L": grid.L, "N": grid.N, "k": k, "A": A}, rows)
    report.extra = {"band_radius": f.band.radius, "out_of_band_fraction": frac,
                    "max_abs": float(np.abs(f.values).max())}
    report.add_check("band_certificate", frac, BAND_TOL, frac <= BAND_TOL)
    return report


VERIFY = {
    "fefferman-stein": Experiment(
        _fam(seed=7, mu=-2, k_max=10) | {"p": 2.0, "q": 2.0, "r": 1.0, "L": 8.0,
                                         "Ns": [256, 512, 1024, 2048, 4096]},
        lambda c, w: check_fefferman_stein(_family(c), float(c["p"]), _single(c, "q"),
                                           float(c["r"]), L=c["L"], Ns=tuple(c["Ns"]),
                                           workers=w)),
    "peetre-majorization": Experiment(
        _fam(seed=5, k_max=8) | {"r": 1.0, "L": 4.0, "oversample": 4},
        lambda c, w: check_peetre_majorization(_family(c), float(c["r"]), L=c["L"],
                                               oversample=int(c["oversample"]), workers=w)),
    "lemma-pointwise": Experiment(
        _fam(seed=5, k_max=8) | {"r": 1.0, "t": 2.0, "L": 4.0, "oversample": 4,
                                 "combine": "sum"},
        lambda c, w: check_lemma_pointwise(_family(c), float(c["r"]), float(c["t"]), L=c["L"],
                                           oversample=int(c["oversample"]),
                                           combine=c["combine"], workers=w)),
    "thm-maximal1": Experiment(
        _fam(seed=6, trials=50) | {"mus": [-2, -1, 0, 1, 2], "r": 1.0, "q": 2.0, "eps": 0.5,
                                   "combine": "sum", "L": 8.0, "N": 2048},
        lambda c, w: check_thm_maximal1(_family(c), tuple(c["mus"]), float(c["r"]),
                                        _single(c, "q"), float(c["eps"]), c["combine"],
                                        L=c["L"], N=int(c["N"]), workers=w)),
    "cor-maximal2": Experiment(
        _fam(seed=6, trials=50) | {"mus": [-2, -1, 0, 1, 2], "r": 1.0, "q": 2.0,
                                   "L": 8.0, "N": 2048},
        lambda c, w: check_cor_maximal2(_family(c), tuple(c["mus"]), float(c["r"]),
                                        _single(c, "q"), L=c["L"], N=int(c["N"]), workers=w)),
    "embedding": Experiment(
        _fam(seed=9, trials=30) | {"q1": 1.0, "q2": 4.0, "sigmas": [1.0, 2.0], "L": 8.0,
                                   "N": 1024},
        lambda c, w: check_embedding_monotone(_family(c), int(c["mu"]), float(c["q1"]),
                                              float(c["q2"]), tuple(c["sigmas"]), L=c["L"],
                                              N=int(c["N"]), workers=w)),
    "franke": Experiment(
        _fam(seed=9, trials=30, k_max=6, envelope="decaying", exponent=0.5)
        | {"p0": 2.0, "s0": 1.0, "q": [1.0, 4.0], "L": 8.0, "N": 1024},
        _franke),
    "sub-inequality": Experiment(
        _fam(seed=11, trials=10, mu=2, k_max=6) | {"q": 2.0, "L": 4.0, "N": 2048},
        lambda c, w: sweep_sub_inequality(_family(c), _single(c, "q"), L=c["L"],
                                          N=int(c["N"]), workers=w)),
    "multiplier": Experiment(
        _fam(seed=10, k_max=6, envelope="decaying", exponent=0.5)
        | {"symbol": "power-imag", "alpha": None, "q": [1.0, 2.0], "L": 8.0, "N": 1024},
        _multiplier),
}

COUNTEREXAMPLES = {
    "modulated": Experiment({"r": 16.0, "q": 4.0, "alpha": None, "K": 512, "cells": 4096,
                             "eps": 0.5}, _modulated),
    "sharpness": Experiment({"M": 3, "mu": 0, "q": 2.0, "r": 1.0, "K_cap": None,
                             "resolution": None, "Ns": list(range(3, 17)),
                             "fit_Ns": list(range(10, 17)), "upper_Ns": [4, 5, 6, 7, 8]},
                            _sharpness),
    "bounded-sum": Experiment({"alpha": 1.0, "M": 2.0, "x_max": 2.0**64, "points": 1024,
                               "contrast_max": 1024.0, "probe": False}, _bounded_sum),
}

SYNTH = Experiment({"seed": 0, "L": 4.0, "N": 256, "k": 3, "A": 2.0, "envelope": "flat",
                    "exponent": 0.0}, _synth)


@lru_cache(maxsize=None)
def _bump_certificates(M: int) -> dict:
    return {"eta_c": bumps.make_eta().certificates["c"],
            "beta_scale": bumps.make_beta(M).certificates["scale"],
            "beta_M": M,
            "C_gamma": bumps.make_gamma().certificates["C_gamma"]}


def _truncation(cfg: dict) -> dict:
    keys = ("mu", "k_max", "mus", "N", "Ns", "K", "K_cap", "fit_Ns", "upper_Ns", "x_max",
            "cells", "k")
    return {k: cfg[k] for k in keys if k in cfg}


def merge_config(defaults: dict, file_cfg: dict, flags: dict) -> dict:
    """Defaults, overridden by config-file entries, overridden by explicit flags."""
    unknown = sorted(set(file_cfg) - set(defaults))
    if unknown:
        raise PreconditionError(f"config keys not used by this experiment: {unknown}")
    out = dict(defaults)
    out.update(file_cfg)
    for k, v in flags.items():
        if v is None:
            continue
        if k not in defaults:
            raise PreconditionError(f"--{k.replace('_', '-')} does not apply to this experiment")
        out[k] = v
    return out


def _load_config(path: str | None) -> tuple[dict, str | None]:
    if path is None:
        return {}, None
    with open(path) as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise PreconditionError(f"config {path} must hold a JSON object")
    out_dir = data.pop("output_dir", None)
    return data, out_dir


def _output_dir(flag: str | None, file_dir: str | None) -> Path:
    return Path(flag or os.environ.get(ENV_OUTPUT_DIR) or file_dir or DEFAULT_OUTPUT_DIR)


def _document(report: Report, command: str, experiment: str, cfg: dict) -> dict:
    doc = report.to_dict()
    doc["config"] = {"command": command, "experiment": experiment, "params": cfg}
    doc["certificates"] = _bump_certificates(int(cfg.get("beta_M", 3)))
    doc["truncation"] = _truncation(cfg)
    doc["version"] = __version__
    return doc


def write_report(doc: dict, rows: list, out_dir: Path, stem: str) -> tuple[Path, Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    jpath, cpath = out_dir / f"{stem}.json", out_dir / f"{stem}.csv"
    jpath.write_text(dumps(doc) + "\n")
    cpath.write_text(rows_to_csv(rows))
    return jpath, cpath


def _summarize(doc: dict, paths) -> None:
    for name, chk in doc["checks"].items():
        status = "PASS" if chk["passed"] else "FAIL"
        value = chk["value"]
        value = float(value) if isinstance(value, (float, np.floating)) else value
        print(f"{status}  {name}: value={value!r} limit={chk['limit']!r}")
    print(f"{'PASS' if doc['passed'] else 'FAIL'}  {doc['name']} -> {', '.join(map(str, paths))}")


def _flag_dict(args: argparse.Namespace, skip: set) -> dict:
    return {k: v for k, v in vars(args).items() if k not in skip}


_GLOBAL = {"command", "check", "family", "config", "output_dir", "workers", "func",
           "name", "inject", "inputs", "output"}


def _run_experiment(command: str, name: str, exp: Experiment, args) -> int:
    file_cfg, file_dir = _load_config(args.config)
    cfg = merge_config(exp.defaults, file_cfg, _flag_dict(args, _GLOBAL))
    workers = args.workers if args.workers is not None else (os.cpu_count() or 1)
    report = exp.run(cfg, max(1, int(workers)))
    stem = name if command != "verify" else f"verify-{name}"
    doc = _document(report, command, name, cfg)
    paths = write_report(doc, report.rows, _output_dir(args.output_dir, file_dir), stem)
    _summarize(doc, paths)
    return 0 if doc["passed"] else 2


def _cmd_verify(args) -> int:
    return _run_experiment("verify", args.check, VERIFY[args.check], args)


def _cmd_counterexample(args) -> int:
    return _run_experiment("counterexample", args.family, COUNTEREXAMPLES[args.family], args)


def _cmd_synth(args) -> int:
    return _run_experiment("synth", "synth", SYNTH, args)


def _cmd_selftest(args) -> int:
    result = run_selftest(seed=args.seed, inject=args.inject)
    doc = {"name": "selftest", "version": __version__, "passed": result["passed"],
           "config": {"command": "selftest", "seed": args.seed, "inject": args.inject},
           "checks": result["checks"], "failed": result["failed"]}
    rows = [{"check": k, **v} for k, v in result["checks"].items()]
    file_dir = _load_config(args.config)[1] if args.config else None
    paths = write_report(doc, rows, _output_dir(args.output_dir, file_dir), "selftest")
    for k, v in result["checks"].items():
        print(f"{'PASS' if v['passed'] else 'FAIL'}  {k}" + (f"  ({v['error']})" if "error" in v else ""))
    if not result["passed"]:
        print(f"selftest failed: {', '.join(result['failed'])}", file=sys.stderr)
        return 2
    print(f"PASS  selftest -> {', '.join(map(str, paths))}")
    return 0


def _cmd_merge(args) -> int:
    docs, rows = [], []
    for path in args.inputs:
        with open(path) as fh:
            doc = json.load(fh)
        docs.append(doc)
        rows += [{"report": doc.get("name", Path(path).stem), **r} for r in doc.get("rows", [])]
    passed = all(d.get("passed", False) for d in docs)
    merged = {"name": "merged", "version": __version__, "passed": passed,
              "reports": [{"name": d.get("name"), "passed": d.get("passed"),
                           "checks": d.get("checks", {}), "config": d.get("config")}
                          for d in docs]}
    out = Path(args.output)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(dumps(merged) + "\n")
    out.with_suffix(".csv").write_text(rows_to_csv(rows))
    for d in merged["reports"]:
        print(f"{'PASS' if d['passed'] else 'FAIL'}  {d['name']}")
    return 0 if passed else 2


def _floats(text: str) -> list:
    return [float(t) for t in text.split(",") if t]


def _ints(text: str) -> list:
    return [int(t) for t in text.split(",") if t]


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON file of parameters (overridden by flags)")
    p.add_argument("--output-dir", help=f"report directory (env {ENV_OUTPUT_DIR})")
    p.add_argument("--workers", type=int, help="process pool size (default: all cores)")


def _family_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int)
    p.add_argument("--trials", type=int, help="random fields per scale")
    p.add_argument("--A", type=float, help="band constant")
    p.add_argument("--mu", type=int, help="coarsest scale")
    p.add_argument("--k-max", type=int, help="finest scale")
    p.add_argument("--envelope", choices=["flat", "decaying"])
    p.add_argument("--exponent", type=float, help="decay exponent of the envelope")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tlmax", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"tlmax {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="synthesize a band-certified random field")
    _common(p)
    for name in ("seed", "N", "k"):
        p.add_argument(f"--{name}", type=int)
    for name in ("L", "A", "exponent"):
        p.add_argument(f"--{name}", type=float)
    p.add_argument("--envelope", choices=["flat", "decaying"])
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("verify", help="ratio experiment for one inequality")
    p.add_argument("check", choices=sorted(VERIFY))
    _common(p)
    _family_flags(p)
    for name in ("p", "r", "t", "eps", "L", "p0", "s0", "q1", "q2", "alpha"):
        p.add_argument(f"--{name}", type=float)
    p.add_argument("--q", type=_floats, help="comma-separated for franke/multiplier")
    p.add_argument("--N", type=int)
    p.add_argument("--Ns", type=_ints)
    p.add_argument("--mus", type=_ints)
    p.add_argument("--sigmas", type=_floats)
    p.add_argument("--oversample", type=int)
    p.add_argument("--combine", choices=["sum", "max"])
    p.add_argument("--symbol", choices=["identity", "power-imag", "sign-like"])
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("counterexample", help="growth measurement for a counterexample family")
    p.add_argument("family", choices=sorted(COUNTEREXAMPLES))
    _common(p)
    for name in ("r", "alpha", "eps", "x_max", "contrast_max", "M"):
        p.add_argument(f"--{name.replace('_', '-')}", dest=name, type=float)
    p.add_argument("--q", type=_floats)
    for name in ("K", "cells", "mu", "K_cap", "resolution", "points"):
        p.add_argument(f"--{name.replace('_', '-')}", dest=name, type=int)
    for name in ("Ns", "fit_Ns", "upper_Ns"):
        p.add_argument(f"--{name.replace('_', '-')}", dest=name, type=_ints)
    p.add_argument("--probe", action="store_const", const=True,
                   help="allow M <= 1/alpha for the bounded sum")
    p.set_defaults(func=_cmd_counterexample)

    p = sub.add_parser("selftest", help="closed-form cases and oracle equivalences")
    _common(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--inject", choices=["mother"], help="deliberately corrupt a component")
    p.set_defaults(func=_cmd_selftest)

    p = sub.add_parser("report", help="report utilities")
    rsub = p.add_subparsers(dest="name", required=True)
    m = rsub.add_parser("merge", help="combine report JSON files")
    m.add_argument("inputs", nargs="+")
    m.add_argument("-o", "--output", default="merged.json")
    m.set_defaults(func=_cmd_merge)
    return parser


def _normalize_bounded_sum(args) -> None:
    # the bounded-sum exponent is real-valued; the sharpness M is an integer
    if getattr(args, "family", None) == "sharpness" and args.M is not None:
        if not float(args.M).is_integer():
            raise PreconditionError(f"M must be an integer for the sharpness family, got {args.M}")
        args.M = int(args.M)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse reports usage errors with status 2, which is reserved for failed thresholds
        return 1 if exc.code == 2 else int(exc.code or 0)
    try:
        _normalize_bounded_sum(args)
        return args.func(args)
    except (PreconditionError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
