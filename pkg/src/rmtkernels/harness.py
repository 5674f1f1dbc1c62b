"""Convergence of finite-N kernels to their microscopic limits.

Errors are measured on gauge-invariant quantities: the pair product
K(s, s') K(s', s) and the diagonal K(s, s). Both are unchanged under
K(x, y) -> f(x) K(x, y) / f(y), which is all the limit theorems fix.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.stats import t as student_t

from .errors import DomainError
from .finite import EnsembleSpec, MuttalibBorodinEnsemble, ProductEnsemble, WishartEnsemble, kernel
from .limits import LimitKernelSpec, airy_kernel
from .macroscopic import ScalingRegime, WishartParams, scaling_map
from .sampling import worker_count
from .special import QuadratureRule, gauss_legendre

__all__ = [
    "ConvergenceReport",
    "converge_to_limit",
    "ladder_spec",
    "microscopic_kernel",
    "projection_diagnostics",
    "SoftEdgeCalibration",
    "calibrate_soft_edge",
    "fit_exponent",
]


@dataclass(frozen=True)
class ConvergenceReport:
    """Per-N errors of a rescaled finite kernel against a limit kernel."""

    regime: str
    target: str
    n_ladder: tuple
    errors: tuple
    diagonal_errors: tuple
    exponent: float
    scale: float

    def decreasing(self) -> bool:
        e = self.errors
        return all(b < a for a, b in zip(e[:-1], e[1:]))

    def to_dict(self) -> dict:
        return asdict(self)


def ladder_spec(spec: EnsembleSpec, N: int, regime: ScalingRegime) -> EnsembleSpec:
    """The ensemble at size N with the regime's natural parameter held fixed.

    Wishart: alpha = T - N fixed at the hard edge, c = N / T fixed elsewhere.
    """
    if isinstance(spec, WishartEnsemble):
        p = spec.params
        T = N + p.alpha if regime.kind == "hard" else int(round(N / p.c))
        return WishartEnsemble(WishartParams(N, T))
    if isinstance(spec, ProductEnsemble):
        return ProductEnsemble(N, spec.nu)
    if isinstance(spec, MuttalibBorodinEnsemble):
        return MuttalibBorodinEnsemble(N, spec.alpha, spec.theta)
    raise TypeError(f"unknown ensemble {spec!r}")


def _affine(spec: EnsembleSpec, regime: ScalingRegime) -> tuple[float, float]:
    if isinstance(spec, WishartEnsemble):
        lam0, _ = scaling_map(spec.params, regime, 0.0)
        lam1, jac = scaling_map(spec.params, regime, 1.0)
        return lam0, lam1 - lam0
    if regime.kind != "hard":
        raise DomainError("only the hard edge is defined for biorthogonal ensembles")
    if isinstance(spec, ProductEnsemble):
        return 0.0, 1.0 / spec.N
    return 0.0, spec.N ** (-1.0 / spec.theta)


def microscopic_kernel(spec: EnsembleSpec, regime: ScalingRegime, kappa: float = 1.0) -> Callable:
    """(s, s') -> |J| K_N(lambda(kappa s), lambda(kappa s')) * kappa for the given regime."""
    offset, slope = _affine(spec, regime)
    slope *= kappa

    def k(s, sp):
        lam = offset + slope * np.asarray(s, dtype=np.float64)
        lamp = offset + slope * np.asarray(sp, dtype=np.float64)
        return abs(slope) * np.asarray(kernel(spec, lam, lamp))

    return k


def _scaled_target(target: LimitKernelSpec, scale: float) -> Callable:
    return lambda s, sp: scale * np.asarray(target(scale * np.asarray(s), scale * np.asarray(sp)))


def default_scale(regime: ScalingRegime, target: LimitKernelSpec) -> float:
    """Argument scale of the limit in the regime's variable.

    The Bessel kernel in the sqrt(x) convention is reached at the hard edge
    as 4 K(4s, 4s'); every other pairing is used unscaled.
    """
    return 4.0 if regime.kind == "hard" and target.kind == "bessel" else 1.0


def fit_exponent(ns: Sequence[float], errors: Sequence[float]) -> float:
    """Slope of log(error) against log(N) by least squares."""
    ln, le = np.log(np.asarray(ns, dtype=float)), np.log(np.asarray(errors, dtype=float))
    return float(np.polyfit(ln, le, 1)[0])


def _errors(k: Callable, t: Callable, grid: np.ndarray) -> tuple[float, float]:
    s, sp = grid[:, 0], grid[:, 1]
    pair = np.max(np.abs(k(s, sp) * k(sp, s) - t(s, sp) * t(sp, s)))
    diag_pts = np.unique(grid.ravel())
    diag = np.max(np.abs(k(diag_pts, diag_pts) - t(diag_pts, diag_pts)))
    return float(pair), float(diag)


def converge_to_limit(
    spec: EnsembleSpec,
    regime: ScalingRegime,
    target: LimitKernelSpec,
    n_ladder: Sequence[int],
    grid,
    *,
    scale: float | None = None,
    kappa: float = 1.0,
) -> ConvergenceReport:
    """Rescaled finite kernels along an N-ladder against a limit kernel.

    Parameters
    ----------
    grid : sequence of (s, s') pairs
    scale : float, optional
        Argument scale of the target; see :func:`default_scale`.
    kappa : float
        Extra factor on the microscopic variable (1 uses the map as printed).
    """
    ladder = tuple(int(n) for n in n_ladder)
    if len(ladder) < 2 or any(b <= a for a, b in zip(ladder[:-1], ladder[1:])):
        raise DomainError("N-ladder must be strictly increasing with at least two entries")
    g = np.asarray(grid, dtype=np.float64).reshape(-1, 2)
    scale = default_scale(regime, target) if scale is None else float(scale)
    t = _scaled_target(target, scale)

    def point(n: int) -> tuple[float, float]:
        return _errors(microscopic_kernel(ladder_spec(spec, n, regime), regime, kappa), t, g)

    with ThreadPoolExecutor(max_workers=worker_count(len(ladder))) as pool:
        results = list(pool.map(point, ladder))
    errs = tuple(r[0] for r in results)
    diag = tuple(r[1] for r in results)
    if not all(math.isfinite(e) for e in errs + diag):
        raise DomainError("non-finite kernel values on the grid")
    exponent = fit_exponent(ladder, [max(e, 1e-300) for e in errs])
    label = regime.kind if regime.kind != "bulk" else f"bulk(x0={regime.x0})"
    return ConvergenceReport(label, target.kind, ladder, errs, diag, exponent, scale)


# ---------------------------------------------------------------- projection checks

def projection_diagnostics(
    kernel_fn: Callable,
    domain: tuple[float, float],
    rule: QuadratureRule | None = None,
    *,
    power: float = 1.0,
    points: int = 10,
) -> tuple[float, float]:
    """Reproducing residual and trace of a kernel on a finite interval.

    Nodes are z = a + (b - a) u^power for a Gauss-Legendre rule in u on
    [0, 1]; ``power`` > 1 concentrates them near ``a``. The residual is the
    largest |int K(x, z) K(z, y) dz - K(x, y)| over a points x points grid.
    """
    a, b = map(float, domain)
    rule = rule if rule is not None else gauss_legendre(200)
    u, w = rule.mapped(0.0, 1.0)
    z = a + (b - a) * u**power
    wz = w * (b - a) * power * u ** (power - 1.0)
    xs = a + (b - a) * ((np.arange(points) + 0.5) / points) ** power
    kxz = np.asarray(kernel_fn(xs[:, None], z[None, :]))
    kzy = np.asarray(kernel_fn(z[:, None], xs[None, :]))
    composed = (kxz * wz) @ kzy
    direct = np.asarray(kernel_fn(xs[:, None], xs[None, :]))
    residual = float(np.max(np.abs(composed - direct)))
    trace = float(np.dot(np.asarray(kernel_fn(z, z)), wz))
    return residual, trace


# ---------------------------------------------------------------- soft-edge calibration

@dataclass(frozen=True)
class SoftEdgeCalibration:
    """Fitted factor kappa on the printed soft-edge variable, per ladder point and pooled."""

    kappa: float
    interval: tuple
    per_n: tuple
    spread: float
    flagged: bool

    def to_dict(self) -> dict:
        return asdict(self)


def _soft_grid() -> np.ndarray:
    s = np.linspace(-3.0, 2.0, 6)
    return np.array([(a, b) for a in s for b in s])


def calibrate_soft_edge(
    params: WishartParams,
    n_ladder: Sequence[int],
    *,
    kernel_factory: Callable[[int], Callable] | None = None,
    grid=None,
    sign: int = 1,
) -> SoftEdgeCalibration:
    """Least-squares kappa such that K_N under s -> kappa s best matches the Airy kernel.

    ``kernel_factory(N)`` returns the microscopic kernel (s, s') -> value under
    the printed map; by default the Wishart kernel at c = N / T. Each ladder
    point is fitted separately; the reported interval is a Student-t 95%
    interval over the ladder and ``flagged`` marks |kappa - 1| > 0.2.
    """
    ladder = [int(n) for n in n_ladder]
    if len(ladder) < 3:
        raise DomainError("calibration needs at least three ladder points")
    g = _soft_grid() if grid is None else np.asarray(grid, dtype=np.float64).reshape(-1, 2)
    s, sp = g[:, 0], g[:, 1]
    target = airy_kernel(s, sp)
    regime = ScalingRegime.soft(sign)

    if kernel_factory is None:
        def kernel_factory(n: int) -> Callable:
            return microscopic_kernel(WishartEnsemble(WishartParams(n, int(round(n / params.c)))), regime)

    def fit(n: int) -> float:
        k = kernel_factory(n)

        def loss(logk: float) -> float:
            kap = math.exp(logk)
            return float(np.sum((kap * np.asarray(k(kap * s, kap * sp)) - target) ** 2))

        # coarse scan then a bounded refinement around the best cell
        logs = np.linspace(math.log(0.05), math.log(20.0), 61)
        best = int(np.argmin([loss(v) for v in logs]))
        lo, hi = logs[max(best - 1, 0)], logs[min(best + 1, logs.size - 1)]
        res = minimize_scalar(loss, bounds=(lo, hi), method="bounded", options={"xatol": 1e-10})
        return math.exp(res.x)

    with ThreadPoolExecutor(max_workers=worker_count(len(ladder))) as pool:
        per_n = tuple(pool.map(fit, ladder))
    vals = np.array(per_n)
    kappa = float(vals.mean())
    half = float(student_t.ppf(0.975, vals.size - 1) * vals.std(ddof=1) / math.sqrt(vals.size))
    spread = float((vals.max() - vals.min()) / abs(kappa))
    return SoftEdgeCalibration(kappa, (kappa - half, kappa + half), per_n, spread, abs(kappa - 1.0) > 0.2)
