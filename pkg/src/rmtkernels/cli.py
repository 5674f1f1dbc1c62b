"""Command-line front end: ``rmt <command> [options]``.

Commands write CSV (default) or JSON to ``--out`` or standard output.
Exit codes are 0 on success, 1 on a numeric failure and 2 on a usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import __version__
from .errors import RMTError, UsageError

SCHEMA = "rmt/1"
COMMANDS = ("density", "phase-space", "kernel", "converge", "sample", "verify")
LIMIT_KINDS = ("sine", "airy", "bessel", "meijer_hard", "mb_hard")
FINITE_KINDS = ("wishart", "product", "mb")
SUITES = ("special", "meijer", "macroscopic", "finite", "limits", "sampling", "harness")


@dataclass(frozen=True)
class RunConfig:
    """A validated command with its parameters.

    ``params`` holds only what determines the numbers; the output path and
    format are kept apart so that they never enter the recorded config.
    """

    command: str
    params: dict = field(default_factory=dict)
    seed: int | None = None
    out: str | None = None
    format: str = "csv"

    def record(self) -> dict:
        rec = {"command": self.command, "version": __version__, **self.params}
        if self.seed is not None:
            rec["seed"] = self.seed
        return rec


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# ---------------------------------------------------------------- argument types

def _grid(text: str) -> tuple[float, float, int]:
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"grid must be lo:hi:n, got {text!r}")
    try:
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid must be lo:hi:n with numeric lo, hi and integer n, got {text!r}")
    if not (math.isfinite(lo) and math.isfinite(hi)) or n < 1 or (n > 1 and not lo < hi):
        raise argparse.ArgumentTypeError(f"grid needs finite lo < hi and n >= 1, got {text!r}")
    return lo, hi, n


def _int_list(text: str) -> tuple[int, ...]:
    try:
        vals = tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated integer list, got {text!r}")
    if not vals:
        raise argparse.ArgumentTypeError("list must not be empty")
    return vals


def _float_list(text: str) -> tuple[float, ...]:
    try:
        vals = tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated number list, got {text!r}")
    if not vals:
        raise argparse.ArgumentTypeError("list must not be empty")
    return vals


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rmt", description="Spectral densities, correlation kernels and their limits.")
    parser.add_argument("--version", action="version", version=f"rmt {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p):
        p.add_argument("--out", help="output file (default: standard output)")
        p.add_argument("--format", choices=("csv", "json"), default="csv")

    p = sub.add_parser("density", help="Marchenko-Pastur density and distribution function")
    p.add_argument("--c", type=float, required=True)
    p.add_argument("--points", type=int, default=200)
    common(p)

    p = sub.add_parser("phase-space", help="boundary p(x) of the classically allowed region")
    p.add_argument("--c", type=float, required=True)
    p.add_argument("--points", type=int, default=200)
    common(p)

    p = sub.add_parser("kernel", help="limiting or finite-N kernel on a square grid")
    p.add_argument("--kind", choices=LIMIT_KINDS + FINITE_KINDS, required=True)
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--theta", type=int, default=1)
    p.add_argument("--nu", type=_float_list)
    p.add_argument("--N", type=int)
    p.add_argument("--T", type=int)
    p.add_argument("--grid", type=_grid, required=True)
    p.add_argument("--order", type=int, default=64)
    common(p)

    p = sub.add_parser("converge", help="finite-N kernel against its microscopic limit")
    p.add_argument("--ensemble", choices=FINITE_KINDS, default="wishart")
    p.add_argument("--regime", choices=("hard", "bulk", "soft"), required=True)
    p.add_argument("--c", type=float, default=0.5)
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--theta", type=int, default=1)
    p.add_argument("--nu", type=_int_list)
    p.add_argument("--x0", type=float)
    p.add_argument("--ladder", type=_int_list, default=(50, 100, 200))
    p.add_argument("--grid", type=_grid)
    p.add_argument("--kappa", type=float, default=1.0)
    p.add_argument("--order", type=int, default=64)
    common(p)

    p = sub.add_parser("sample", help="Monte Carlo eigenvalues")
    p.add_argument("--ensemble", choices=("wishart", "product"), default="wishart")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--T", type=int)
    p.add_argument("--nu", type=_int_list)
    p.add_argument("--draws", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--bins", type=int, default=50)
    p.add_argument("--raw", action="store_true", help="emit every eigenvalue instead of a histogram")
    common(p)

    p = sub.add_parser("verify", help="run invariant suites")
    p.add_argument("--suite", choices=("all",) + SUITES, default="all")
    common(p)
    return parser


# ---------------------------------------------------------------- validation

def _need(cond: bool, message: str) -> None:
    if not cond:
        raise UsageError(message)


def _check_c(c: float) -> None:
    _need(math.isfinite(c) and 0.0 < c <= 1.0, f"--c must lie in (0, 1], got {c}")


def _validate(ns: argparse.Namespace) -> dict:
    cmd = ns.command
    if cmd in ("density", "phase-space"):
        _check_c(ns.c)
        _need(2 <= ns.points <= 10**6, "--points must lie in [2, 1e6]")
        return {"c": ns.c, "points": ns.points}
    if cmd == "kernel":
        lo, hi, n = ns.grid
        _need(n <= 2000, "--grid n must be at most 2000")
        _need(ns.order >= 2, "--order must be at least 2")
        params = {"kind": ns.kind, "grid": [lo, hi, n], "order": ns.order}
        if ns.kind in ("bessel", "wishart"):
            _need(lo >= 0.0, f"--grid must be non-negative for kind {ns.kind}")
        elif ns.kind not in ("sine", "airy"):
            _need(lo > 0.0, f"--grid must be positive for kind {ns.kind}")
        if ns.kind == "bessel":
            _need(ns.alpha >= 0, "--alpha must be >= 0 for the Bessel kernel")
            params["alpha"] = ns.alpha
        elif ns.kind == "meijer_hard":
            _need(ns.nu is not None and 1 <= len(ns.nu) <= 4, "--nu needs 1 to 4 values for meijer_hard")
            params["nu"] = list(ns.nu)
        elif ns.kind in ("mb_hard", "mb"):
            _need(ns.alpha > -1 and ns.theta >= 1, "--alpha must exceed -1 and --theta must be a positive integer")
            params.update(alpha=ns.alpha, theta=ns.theta)
        if ns.kind in FINITE_KINDS:
            _need(ns.N is not None and 1 <= ns.N <= 400, "--N in [1, 400] is required for finite kernels")
            params["N"] = ns.N
        if ns.kind == "wishart":
            _need(ns.T is not None and ns.T >= ns.N, "--T >= N is required for the Wishart kernel")
            params["T"] = ns.T
        if ns.kind == "product":
            _need(ns.nu is not None and all(v >= 0 and v == int(v) for v in ns.nu), "--nu needs non-negative integers")
            _need(ns.N <= 30, "--N must be at most 30 for the product kernel")
            params["nu"] = [int(v) for v in ns.nu]
        return params
    if cmd == "converge":
        ladder = list(ns.ladder)
        _need(len(ladder) >= 2 and all(b > a for a, b in zip(ladder[:-1], ladder[1:])), "--ladder must be strictly increasing")
        _need(ladder[0] >= 1 and ladder[-1] <= 800, "--ladder entries must lie in [1, 800]")
        params = {"ensemble": ns.ensemble, "regime": ns.regime, "ladder": ladder, "kappa": ns.kappa, "order": ns.order}
        _need(math.isfinite(ns.kappa) and ns.kappa > 0, "--kappa must be positive")
        if ns.ensemble == "wishart":
            if ns.regime == "hard":
                _need(ns.alpha >= 0 and ns.alpha == int(ns.alpha), "--alpha must be a non-negative integer")
                params["alpha"] = int(ns.alpha)
            else:
                _check_c(ns.c)
                params["c"] = ns.c
            if ns.regime == "bulk":
                x0 = 1.0 + ns.c if ns.x0 is None else ns.x0
                sc = math.sqrt(ns.c)
                _need((1 - sc) ** 2 < x0 < (1 + sc) ** 2, f"--x0 must lie inside the support, got {x0}")
                params["x0"] = x0
        else:
            _need(ns.regime == "hard", "biorthogonal ensembles support --regime hard only")
            _need(ladder[-1] <= 40, "--ladder entries must be at most 40 for biorthogonal ensembles")
            if ns.ensemble == "product":
                _need(ns.nu is not None and all(v >= 0 for v in ns.nu), "--nu needs non-negative integers")
                params["nu"] = list(ns.nu)
            else:
                _need(ns.alpha > -1 and ns.theta >= 1, "--alpha must exceed -1 and --theta must be a positive integer")
                params.update(alpha=ns.alpha, theta=ns.theta)
        if ns.grid is not None:
            params["grid"] = list(ns.grid)
        return params
    if cmd == "sample":
        _need(1 <= ns.N <= 500, "--N must lie in [1, 500]")
        _need(1 <= ns.draws <= 100000, "--draws must lie in [1, 100000]")
        _need(10 <= ns.bins <= 10000, "--bins must lie in [10, 10000]")
        _need(ns.seed >= 0, "--seed must be non-negative")
        params = {"ensemble": ns.ensemble, "N": ns.N, "draws": ns.draws, "bins": ns.bins, "raw": ns.raw}
        if ns.ensemble == "wishart":
            T = ns.N if ns.T is None else ns.T
            _need(T >= ns.N, "--T must be at least N")
            params["T"] = T
        else:
            _need(ns.N <= 300, "--N must be at most 300 for products")
            _need(ns.nu is not None and 1 <= len(ns.nu) <= 4 and all(v >= 0 for v in ns.nu), "--nu needs 1 to 4 non-negative integers")
            params["nu"] = list(ns.nu)
        return params
    return {"suite": ns.suite}


def parse_args(argv: Sequence[str] | None = None) -> RunConfig:
    """Parse and validate a command line.

    Raises
    ------
    UsageError
        On unknown flags, malformed values or parameters outside the
        preconditions of the library routines.
    """
    ns = build_parser().parse_args(list(sys.argv[1:] if argv is None else argv))
    params = _validate(ns)
    seed = ns.seed if ns.command == "sample" else None
    return RunConfig(ns.command, params, seed, ns.out, ns.format)


# ---------------------------------------------------------------- commands

class Table:
    """Column names and rows, with extra top-level fields for JSON output."""

    def __init__(self, columns: Sequence[str], rows, extra: dict | None = None):
        self.columns = list(columns)
        self.rows = [list(r) for r in rows]
        self.extra = extra or {}


def _linspace(grid) -> np.ndarray:
    lo, hi, n = grid
    return np.linspace(lo, hi, int(n))


def _cmd_density(p: dict) -> Table:
    from .macroscopic import mp_cdf, mp_density, turning_points

    rm, rp = turning_points(p["c"])
    x = rm + (rp - rm) * (np.arange(p["points"]) + 0.5) / p["points"]
    return Table(["x", "density", "cdf"], zip(x, mp_density(p["c"], x), mp_cdf(p["c"], x)), {"support": [rm, rp]})


def _cmd_phase_space(p: dict) -> Table:
    from .macroscopic import effective_potential, phase_space_momentum, turning_points

    rm, rp = turning_points(p["c"])
    x = np.linspace(rm, rp, p["points"])
    mom = phase_space_momentum(p["c"], x)
    v = np.where(x > 0, effective_potential(p["c"], np.where(x > 0, x, 1.0)), np.nan)
    return Table(["x", "p_upper", "p_lower", "potential"], zip(x, mom, -mom, v), {"support": [rm, rp]})


def _kernel_function(p: dict) -> Callable:
    from . import finite, limits
    from .macroscopic import WishartParams

    kind = p["kind"]
    if kind in LIMIT_KINDS:
        spec = limits.LimitKernelSpec(
            kind, alpha=p.get("alpha", 0.0), theta=p.get("theta", 1), nu=tuple(p.get("nu", ())), order=p["order"]
        )
        return spec
    if kind == "wishart":
        wp = WishartParams(p["N"], p["T"])
        return lambda x, y: finite.wishart_kernel(wp, x, y)
    if kind == "product":
        spec = finite.ProductEnsemble(p["N"], tuple(p["nu"]))
    else:
        spec = finite.MuttalibBorodinEnsemble(p["N"], p["alpha"], p["theta"])
    return lambda x, y: finite.kernel(spec, x, y)


def _cmd_kernel(p: dict) -> Table:
    g = _linspace(p["grid"])
    xs, ys = np.meshgrid(g, g, indexing="ij")
    vals = np.asarray(_kernel_function(p)(xs.ravel(), ys.ravel()), dtype=np.float64)
    return Table(["x", "y", "kernel"], zip(xs.ravel(), ys.ravel(), vals))


_DEFAULT_GRIDS = {"hard": (0.25, 3.0, 5), "bulk": (-2.0, 2.0, 5), "soft": (-3.0, 2.0, 5)}


def _cmd_converge(p: dict) -> Table:
    from .finite import MuttalibBorodinEnsemble, ProductEnsemble, WishartEnsemble
    from .harness import converge_to_limit
    from .limits import LimitKernelSpec
    from .macroscopic import ScalingRegime, WishartParams

    regime = p["regime"]
    n0 = p["ladder"][0]
    if p["ensemble"] == "wishart":
        if regime == "hard":
            spec = WishartEnsemble(WishartParams(n0, n0 + p["alpha"]))
            target, reg = LimitKernelSpec.bessel(p["alpha"]), ScalingRegime.hard()
        else:
            spec = WishartEnsemble(WishartParams(n0, int(round(n0 / p["c"]))))
            if regime == "bulk":
                target, reg = LimitKernelSpec.sine(), ScalingRegime.bulk(p["x0"])
            else:
                target, reg = LimitKernelSpec.airy(), ScalingRegime.soft()
    elif p["ensemble"] == "product":
        spec = ProductEnsemble(n0, tuple(p["nu"]))
        target, reg = LimitKernelSpec.meijer_hard(p["nu"], p["order"]), ScalingRegime.hard()
    else:
        spec = MuttalibBorodinEnsemble(n0, p["alpha"], p["theta"])
        target, reg = LimitKernelSpec.mb_hard(p["alpha"], p["theta"], p["order"]), ScalingRegime.hard()
    g = _linspace(p.get("grid", _DEFAULT_GRIDS[regime]))
    pairs = [(a, b) for a in g for b in g]
    report = converge_to_limit(spec, reg, target, p["ladder"], pairs, kappa=p["kappa"])
    rows = zip(report.n_ladder, report.errors, report.diagonal_errors)
    extra = {"regime": report.regime, "target": report.target, "exponent": report.exponent, "scale": report.scale}
    return Table(["N", "error", "diagonal_error"], rows, extra)


def _cmd_sample(p: dict, seed: int) -> Table:
    from .finite import ProductEnsemble
    from .macroscopic import WishartParams, mp_cdf, mp_density
    from .sampling import RngState, empirical_stats, ks_distance, product_eigs, wishart_eigs

    rng = RngState(seed)
    if p["ensemble"] == "wishart":
        wp = WishartParams(p["N"], p["T"])
        batch = wishart_eigs(wp, p["draws"], rng)
        scaled = batch.realizations / wp.T
    else:
        batch = product_eigs(ProductEnsemble(p["N"], tuple(p["nu"])), p["draws"], rng)
        scaled = batch.realizations
    extra = {"rng": batch.seed}
    if p["ensemble"] == "wishart":
        extra["ks_distance"] = ks_distance(np.sort(scaled.ravel()), lambda x: mp_cdf(wp.c, x))
    if p["raw"]:
        rows = ((i, j, v) for i, row in enumerate(batch.realizations) for j, v in enumerate(row))
        return Table(["draw", "index", "eigenvalue"], rows, extra)
    stats = empirical_stats(batch, bins=p["bins"])
    left, right = stats.edges[:-1], stats.edges[1:]
    extra.update(minimum=stats.minimum, maximum=stats.maximum, mean=stats.mean)
    if p["ensemble"] == "wishart":
        # MP prediction for the unscaled eigenvalues lambda = T x
        mid = 0.5 * (left + right)
        theory = mp_density(wp.c, mid / wp.T) / wp.T
        return Table(["bin_left", "bin_right", "density", "mp_density"], zip(left, right, stats.density, theory), extra)
    return Table(["bin_left", "bin_right", "density"], zip(left, right, stats.density), extra)


def _cmd_verify(p: dict) -> Table:
    from .verification import run_suites

    suites = SUITES if p["suite"] == "all" else (p["suite"],)
    results = run_suites(suites)
    rows = [(r.suite, r.name, r.value, r.tolerance, r.passed) for r in results]
    return Table(["suite", "check", "value", "tolerance", "passed"], rows, {"passed": all(r.passed for r in results)})


# ---------------------------------------------------------------- output

def _cell(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _json_value(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else None
    if isinstance(v, dict):
        return {k: _json_value(x) for k, x in v.items()}
    if isinstance(v, (list, tuple, np.ndarray)):
        return [_json_value(x) for x in v]
    return v


def render(config: RunConfig, table: Table) -> str:
    """CSV with a config comment line, or a versioned JSON document."""
    if config.format == "json":
        doc = {
            "schema": SCHEMA,
            "config": _json_value(config.record()),
            **_json_value(table.extra),
            "columns": table.columns,
            "rows": _json_value(table.rows),
        }
        return json.dumps(doc, sort_keys=True, indent=1, allow_nan=False) + "\n"
    buf = io.StringIO()
    buf.write("# " + json.dumps(_json_value(config.record()), sort_keys=True) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(table.columns)
    for row in table.rows:
        writer.writerow([_cell(v) for v in row])
    return buf.getvalue()


def write_atomic(path: str, text: str) -> None:
    """Write to a temporary file in the target directory, then rename over ``path``."""
    target = os.path.abspath(path)
    fd, tmp = tempfile.mkstemp(prefix=".rmt-", dir=os.path.dirname(target))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def execute(config: RunConfig) -> int:
    """Run a validated command and write its output; returns the exit code."""
    try:
        if config.command == "density":
            table = _cmd_density(config.params)
        elif config.command == "phase-space":
            table = _cmd_phase_space(config.params)
        elif config.command == "kernel":
            table = _cmd_kernel(config.params)
        elif config.command == "converge":
            table = _cmd_converge(config.params)
        elif config.command == "sample":
            table = _cmd_sample(config.params, config.seed)
        else:
            table = _cmd_verify(config.params)
    except UsageError:
        raise
    except (RMTError, ArithmeticError, ValueError) as exc:
        print(f"rmt {config.command}: numeric failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    text = render(config, table)
    if config.out:
        write_atomic(config.out, text)
    else:
        sys.stdout.write(text)
    if config.command == "verify" and not table.extra["passed"]:
        failed = [f"{r[0]}.{r[1]}" for r in table.rows if not r[4]]
        print(f"rmt verify: failed checks: {', '.join(failed)}", file=sys.stderr)
        return 1
    return 0


def main(argv: Sequence[str] | None = None) -> int:
    try:
        config = parse_args(argv)
        return execute(config)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
