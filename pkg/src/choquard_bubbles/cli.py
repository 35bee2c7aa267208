"""Command-line front end: constants, scan, critical-point and verify.

Exit codes: 0 pass, 1 verification failure, 2 configuration error, 3 I/O error,
4 hypothesis not met.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import SCHEMA_HEADER
from .constants import ProblemParams
from .errors import (BudgetExceededError, ChoquardError, ClassificationError, HypothesisError,
                     ParameterError)
from .geometry import LambdaWindow
from .potentials import RadialPotential, gaussian_bump, gaussian_well, potential_from_dict
from .reduced_energy import ReducedModel, default_search_window, find_critical_point
from .suites import SUITES, constants_table, rel_diff, run_suite
from .verify import CHECK_COLUMNS, format_csv

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_IO, EXIT_HYPOTHESIS = 0, 1, 2, 3, 4
THREADS_ENV = "CHOQUARD_THREADS"


class ConfigError(ChoquardError):
    pass


@dataclass
class RunConfig:
    params: ProblemParams
    k: int = 8
    potential: RadialPotential | None = None
    lambda_window: LambdaWindow | None = None
    tol: float = 1e-9
    budget: int = 2_000_000
    seed: int = 0
    output_path: str | None = None
    suite: str | None = None
    case: str = "max"
    grid: tuple = (21, 21)
    alpha_perturbation: float = 0.0
    threads: int = 1
    extra: dict = field(default_factory=dict)


FILE_KEYS = {"N", "mu", "k", "potential", "lambda_window", "tol", "budget", "seed", "out",
             "suite", "case", "grid", "alpha_perturbation"}


def _parse_grid(text) -> tuple:
    if isinstance(text, (list, tuple)) and len(text) == 2:
        vals = tuple(int(v) for v in text)
    else:
        try:
            a, b = str(text).lower().split("x")
            vals = (int(a), int(b))
        except ValueError:
            raise ConfigError(f"grid must look like RxL, got {text!r}") from None
    if min(vals) < 1:
        raise ConfigError("grid sizes must be positive")
    return vals


def _threads() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw is None or raw == "":
        return 1
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"{THREADS_ENV} must be a positive integer") from None
    if n < 1:
        raise ConfigError(f"{THREADS_ENV} must be a positive integer")
    return n


def build_config(args: argparse.Namespace) -> RunConfig:
    """Merge the JSON config file (if any) with flags; flags win."""
    data: dict = {}
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            text = fh.read()
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid config JSON: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
        unknown = set(data) - FILE_KEYS
        if unknown:
            raise ConfigError(f"unknown config keys {sorted(unknown)}")
    flags = {"N": args.N, "mu": args.mu, "k": args.k, "tol": args.tol, "budget": args.budget,
             "seed": args.seed, "out": args.out, "suite": getattr(args, "suite", None),
             "case": getattr(args, "case", None), "grid": getattr(args, "grid", None),
             "alpha_perturbation": getattr(args, "alpha_perturbation", None)}
    if args.potential is not None:
        try:
            flags["potential"] = json.loads(args.potential)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid --potential JSON: {exc}") from None
    for key, val in flags.items():
        if val is not None:
            data[key] = val
    try:
        params = ProblemParams(int(data.get("N", 5)), float(data.get("mu", 4.0)))
        k = data.get("k", 8)
        if int(k) != k or int(k) < 1:
            raise ConfigError("k must be a positive integer")
        pot = data.get("potential")
        pot = potential_from_dict(pot) if pot is not None else None
        win = data.get("lambda_window")
        if win is not None:
            win = LambdaWindow(params.N, float(win["L0"]), float(win["L1"]))
        tol = float(data.get("tol", 1e-9))
        budget = int(data.get("budget", 2_000_000))
        if not tol > 0 or budget < 1:
            raise ConfigError("tol and budget must be positive")
        case = data.get("case") or "max"
        if case not in ("max", "saddle"):
            raise ConfigError("case must be 'max' or 'saddle'")
        return RunConfig(params=params, k=int(k), potential=pot, lambda_window=win, tol=tol,
                         budget=budget, seed=int(data.get("seed", 0)),
                         output_path=data.get("out"), suite=data.get("suite"), case=case,
                         grid=_parse_grid(data.get("grid", (21, 21))),
                         alpha_perturbation=float(data.get("alpha_perturbation", 0.0)),
                         threads=_threads())
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid configuration: {exc}") from None


def _emit(text: str, path: str | None) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


# ---------------------------------------------------------------------------
# commands

def cmd_constants(cfg: RunConfig) -> tuple[str, int]:
    rows = []
    for name, cf, orc in constants_table(cfg.params):
        rows.append((name, cf, orc, rel_diff(cf, orc)))
    return format_csv(("name", "closed_form", "oracle", "rel_diff"), rows), EXIT_OK


def _scan_potential(cfg: RunConfig):
    return cfg.potential if cfg.potential is not None else gaussian_bump(0.0, 1.0, 1.0, 0.2)


def cmd_scan(cfg: RunConfig) -> tuple[str, int]:
    """F on an r x Lambda grid; Lambda spans the window (default Lambda0(r_mid) x [1/2, 2])."""
    if cfg.k < 2:
        raise ConfigError("scan needs k >= 2")
    pot = _scan_potential(cfg)
    exact = ReducedModel(cfg.params, cfg.k, pot, "exact")
    asym = ReducedModel(cfg.params, cfg.k, pot, "asymptotic")
    lo, hi = default_search_window(pot)
    nr, nl = cfg.grid
    rs = np.linspace(lo, hi, nr) if nr > 1 else np.array([0.5 * (lo + hi)])
    if cfg.lambda_window is not None:
        L0, L1 = cfg.lambda_window.L0, cfg.lambda_window.L1
    else:
        Lc = asym.Lambda0(0.5 * (lo + hi))
        L0, L1 = 0.5 * Lc, 2.0 * Lc
    Ls = np.geomspace(L0, L1, nl) if nl > 1 else np.array([np.sqrt(L0 * L1)])
    s = exact.scale
    rows = []
    for r in rs:
        for L in Ls:
            lam = L * s
            rows.append((float(r), float(L), float(lam), float(exact.F(r, lam)),
                         float(asym.F(r, lam)), float(exact.grad(r, lam)[1])))
    cols = ("r", "Lambda", "lambda", "F_exact_sum", "F_asymptotic", "dF_dlambda")
    return format_csv(cols, rows), EXIT_OK


def _json_clean(obj):
    if isinstance(obj, dict):
        return {k: _json_clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if np.isfinite(v) else None
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def cmd_critical_point(cfg: RunConfig) -> tuple[str, int]:
    if cfg.k < 2:
        raise ConfigError("critical-point needs k >= 2")
    pot = cfg.potential
    if pot is None:
        pot = gaussian_bump(0.0, 1.0, 1.0, 0.2) if cfg.case == "max" else \
            gaussian_well(1.0, 0.9, 1.0, 0.2)
    model = ReducedModel(cfg.params, cfg.k, pot)
    cp = find_critical_point(cfg.case, model)
    body = _json_clean(cp.to_dict())
    body["case"] = cfg.case
    body["k"] = cfg.k
    code = EXIT_OK
    if cfg.case == "saddle" and cp.bracket is not None and not cp.bracket.holds:
        code = EXIT_FAIL
    text = SCHEMA_HEADER + "\n" + json.dumps(body, sort_keys=True, indent=2) + "\n"
    return text, code


def cmd_verify(cfg: RunConfig) -> tuple[str, int]:
    if cfg.suite not in SUITES:
        raise ConfigError(f"unknown suite {cfg.suite!r}; choose from {sorted(SUITES)}")
    kw = dict(k=cfg.k, potential=cfg.potential, seed=cfg.seed, tol=cfg.tol,
              alpha_perturbation=cfg.alpha_perturbation)
    if cfg.suite == "slope":
        kw["budget"] = min(cfg.budget, 200_000)
    rows = run_suite(cfg.suite, cfg.params, **kw)
    code = EXIT_OK if all(r.passed for r in rows) else EXIT_FAIL
    return format_csv(CHECK_COLUMNS, [r.as_tuple() for r in rows]), code


COMMANDS = {"constants": cmd_constants, "scan": cmd_scan,
            "critical-point": cmd_critical_point, "verify": cmd_verify}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file; flags override its keys")
    common.add_argument("--N", type=int)
    common.add_argument("--mu", type=float)
    common.add_argument("--k", type=int)
    common.add_argument("--potential", help='inline JSON, e.g. \'{"family": "constant", "a": 1}\'')
    common.add_argument("--tol", type=float)
    common.add_argument("--budget", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--out", help="output path (default stdout)")
    p = argparse.ArgumentParser(prog="choquard-bubbles",
                                description="Multi-bubble reduced energy toolkit")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("constants", parents=[common], help="closed forms against oracles")
    sc = sub.add_parser("scan", parents=[common], help="reduced energy on a grid")
    sc.add_argument("--grid", help="RxL grid size (default 21x21)")
    cp = sub.add_parser("critical-point", parents=[common], help="max or saddle of F")
    cp.add_argument("--case", choices=("max", "saddle"))
    vf = sub.add_parser("verify", parents=[common], help="run a verification suite")
    vf.add_argument("--suite", required=False, choices=sorted(SUITES))
    vf.add_argument("--alpha-perturbation", dest="alpha_perturbation", type=float,
                    help="relative change of alpha (sensitivity runs)")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_CONFIG
    try:
        cfg = build_config(args)
        if args.command == "verify" and cfg.suite is None:
            raise ConfigError("verify needs --suite")
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ConfigError, ParameterError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        text, code = COMMANDS[args.command](cfg)
    except (ConfigError, ParameterError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except HypothesisError as exc:
        print(f"hypothesis not met: {exc}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    except (ClassificationError, BudgetExceededError) as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return EXIT_FAIL
    try:
        _emit(text, cfg.output_path)
    except OSError as exc:
        print(f"error: cannot write output: {exc}", file=sys.stderr)
        return EXIT_IO
    return code


if __name__ == "__main__":
    sys.exit(main())
