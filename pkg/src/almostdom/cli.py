"""Command line interface.

Subcommands: index, test, trim, contour, simulate, coverage. Results go to
standard output as JSON; contour and simulation tables are also written as
CSV. Exit status is 0 on success and 2 on usage or data errors, whatever
the test decides.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .empirical import empirical_quantile
from .inference import test_almost_dominance
from .models import contour_grid, write_contour_csv
from .order_distance import (epsilon_index, minimal_trim_for_order,
                             optimal_ordered_pair)
from .simlab import (read_configs, run_coverage_study, run_rejection_study,
                     write_reports_csv)

SCHEMA_VERSION = "1.0"
SEED_ENV = "ALMOSTDOM_SEED"


class DataError(Exception):
    """Bad input data or arguments; reported with exit status 2."""


def read_column(path) -> np.ndarray:
    """First column of a CSV file as floats; a non-numeric first row is a header."""
    try:
        with open(path, newline="") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror}") from None
    values = []
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        cell = line.split(",")[0].strip().strip('"')
        try:
            v = float(cell)
        except ValueError:
            if not values and lineno == _first_nonblank(lines):
                continue
            raise DataError(f"{path}: line {lineno}: non-numeric value {cell!r}") from None
        if not math.isfinite(v):
            raise DataError(f"{path}: line {lineno}: non-finite value {cell!r}")
        values.append(v)
    if not values:
        raise DataError(f"{path}: empty column")
    return np.array(values)


def _first_nonblank(lines):
    for i, line in enumerate(lines, start=1):
        if line.strip():
            return i
    return 0


def _summary(x) -> dict:
    return {"size": int(x.size), "min": float(x.min()), "max": float(x.max()),
            "mean": float(x.mean())}


def _clean(obj):
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def emit(command, inputs, results, warnings=(), out=None) -> None:
    payload = {"schema_version": SCHEMA_VERSION, "command": command, "inputs": inputs,
               "results": results, "warnings": list(warnings)}
    # json writes floats with repr, which round-trips exactly
    (out or sys.stdout).write(json.dumps(_clean(payload), indent=2, sort_keys=False) + "\n")


def _open_pair(args):
    x = read_column(args.fileX)
    y = read_column(args.fileY)
    return x, y, {"fileX": str(args.fileX), "fileY": str(args.fileY),
                  "X": _summary(x), "Y": _summary(y)}


def cmd_index(args):
    x, y, inputs = _open_pair(args)
    try:
        rep = epsilon_index(empirical_quantile(x), empirical_quantile(y))
    except ValueError as exc:
        raise DataError(str(exc)) from None
    emit("index", inputs, rep.to_dict())


def cmd_test(args):
    x, y, inputs = _open_pair(args)
    for name in ("epsilon0", "alpha"):
        v = getattr(args, name)
        if not 0 < v < 1:
            raise DataError(f"--{name} must lie in (0, 1)")
    inputs.update(epsilon0=args.epsilon0, alpha=args.alpha, method=args.method,
                  bootstrap_B=args.bootstrap_B, seed=args.seed)
    try:
        res = test_almost_dominance(x, y, args.epsilon0, args.alpha, args.method,
                                    seed=args.seed, replicates=args.bootstrap_B)
    except (ValueError, RuntimeError) as exc:
        raise DataError(str(exc)) from None
    warnings = []
    if res.degenerate:
        warnings.append("sigma_hat is zero; decision reduces to epsilon_hat < epsilon0")
    if args.method == "plug-in":
        warnings.append("plug-in variance is not scale invariant; prefer bootstrap or delta")
    emit("test", inputs, res.to_dict(), warnings)


def cmd_trim(args):
    if (args.pi is None) == (not args.solve):
        raise DataError("give exactly one of --pi or --solve")
    x, y, inputs = _open_pair(args)
    qF, qG = empirical_quantile(x), empirical_quantile(y)
    warnings = []
    if args.solve:
        sol = minimal_trim_for_order(qF, qG, tol=args.tol)
        if not sol.finite:
            warnings.append("no trim level below 1 orders the pair")
        inputs["tol"] = args.tol
        results = {"pi": sol.pi, "finite": sol.finite, "distance": sol.distance, "tol": sol.tol}
    else:
        if not 0 <= args.pi < 1:
            raise DataError("--pi must lie in [0, 1)")
        pair = optimal_ordered_pair(qF, qG, args.pi)
        inputs["pi"] = args.pi
        results = {"pi": args.pi, "distance": pair.distance,
                   "lower": pair.lower.to_dict(), "upper": pair.upper.to_dict()}
    emit("trim", inputs, results, warnings)


def _writable(path):
    try:
        with open(path, "a"):
            pass
    except OSError as exc:
        raise DataError(f"cannot write {path}: {exc.strerror}") from None


def cmd_contour(args):
    if args.sigma_range[0] <= 0 or args.sigma_range[1] <= 0:
        raise DataError("--sigma-range must be positive")
    if args.resolution < 1:
        raise DataError("--resolution must be positive")
    _writable(args.output)
    rows = contour_grid(args.mu_range, args.sigma_range, args.resolution, args.method)
    write_contour_csv(rows, args.output)
    eps = rows[:, 2]
    emit("contour", {"mu_range": args.mu_range, "sigma_range": args.sigma_range,
                     "resolution": args.resolution, "method": args.method},
         {"output": str(args.output), "rows": int(rows.shape[0]),
          "epsilon_min": float(np.nanmin(eps)), "epsilon_max": float(np.nanmax(eps))})


def _study(args, kind):
    try:
        configs = read_configs(args.config)
    except OSError as exc:
        raise DataError(f"cannot read {args.config}: {exc.strerror}") from None
    except ValueError as exc:
        raise DataError(f"{args.config}: {exc}") from None
    _writable(args.output)
    runner = run_rejection_study if kind == "simulate" else run_coverage_study
    reports = [runner(cfg, workers=args.workers) for cfg in configs]
    write_reports_csv(reports, args.output)
    emit(kind, {"config": str(args.config), "studies": len(configs)},
         {"output": str(args.output),
          "reports": [{"name": r.config.get("name"), "kind": r.kind, "rate": r.rate,
                       "se": r.binomial_se, "failures": r.failures} for r in reports]})


def cmd_simulate(args):
    _study(args, "simulate")


def cmd_coverage(args):
    _study(args, "coverage")


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise DataError(f"{SEED_ENV} must be an integer") from None


def build_parser(default_seed: int = 0) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="almostdom",
                                description="Almost stochastic dominance via W2 quantile geometry")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def pair(sp):
        sp.add_argument("fileX", help="CSV with the sample from F (first column)")
        sp.add_argument("fileY", help="CSV with the sample from G (first column)")

    sp = sub.add_parser("index", help="violation index of F against G")
    pair(sp)
    sp.set_defaults(func=cmd_index)

    sp = sub.add_parser("test", help="test H0: eps >= eps0 against eps < eps0")
    pair(sp)
    sp.add_argument("--epsilon0", type=float, default=0.05)
    sp.add_argument("--alpha", type=float, default=0.05)
    sp.add_argument("--method", choices=["bootstrap", "plug-in", "delta"], default="bootstrap")
    sp.add_argument("--bootstrap-B", dest="bootstrap_B", type=int, default=500)
    sp.add_argument("--seed", type=int, default=default_seed)
    sp.set_defaults(func=cmd_test)

    sp = sub.add_parser("trim", help="distance of the trimmed pair to the stochastic order")
    pair(sp)
    sp.add_argument("--pi", type=float)
    sp.add_argument("--solve", action="store_true", help="find the minimal trim level")
    sp.add_argument("--tol", type=float, default=1e-6)
    sp.set_defaults(func=cmd_trim)

    sp = sub.add_parser("contour", help="index grid for N(mu, sigma^2) against N(0, 1)")
    sp.add_argument("--mu-range", nargs=2, type=float, default=[0.0, 1.5])
    sp.add_argument("--sigma-range", nargs=2, type=float, default=[0.5, 2.5])
    sp.add_argument("--resolution", type=int, default=50)
    sp.add_argument("--method", choices=["quadrature", "closed-form"], default="quadrature")
    sp.add_argument("--output", "-o", required=True)
    sp.set_defaults(func=cmd_contour)

    for name, fn, text in (("simulate", cmd_simulate, "rejection-rate study"),
                           ("coverage", cmd_coverage, "upper-bound coverage study")):
        sp = sub.add_parser(name, help=text)
        sp.add_argument("config", help="key = value configuration file")
        sp.add_argument("--output", "-o", required=True)
        sp.add_argument("--workers", type=int, default=1)
        sp.set_defaults(func=fn)
    return p


def main(argv=None) -> int:
    try:
        parser = build_parser(_default_seed())
        try:
            args = parser.parse_args(argv)
        except SystemExit as exc:
            return 0 if exc.code == 0 else 2
        args.func(args)
    except DataError as exc:
        print(f"almostdom: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
