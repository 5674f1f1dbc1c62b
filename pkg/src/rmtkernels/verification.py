"""Fast invariant suites, one per module, run by ``rmt verify``.

Each check computes a residual against an identity that holds exactly in
exact arithmetic and compares it with a tolerance. The suites take a few
seconds in total; the test-suite covers the same ground in more depth.
"""

from __future__ import annotations

import math
from typing import Callable, Iterable, NamedTuple

import numpy as np

__all__ = ["CheckResult", "run_suites", "SUITE_FUNCTIONS"]


class CheckResult(NamedTuple):
    suite: str
    name: str
    value: float
    tolerance: float
    passed: bool


def _check(suite: str, name: str, value: float, tol: float) -> CheckResult:
    value = float(value)
    return CheckResult(suite, name, value, tol, bool(math.isfinite(value) and value <= tol))


def _special() -> list[CheckResult]:
    from . import _backend
    from .special import airy_ai, bessel_j, gauss_legendre, laguerre_psi_table, log_gamma_complex

    out = []
    x = np.array([0.5, 1.5, 7.25, 30.0])
    lg = np.asarray(log_gamma_complex(x + 0j)).real
    out.append(_check("special", "loggamma_real_axis", np.max(np.abs(lg - [math.lgamma(v) for v in x])), 1e-13))
    z = np.array([0.3 + 2j, 5 - 7j, 20 + 0.5j])
    rec = np.asarray(log_gamma_complex(z + 1)) - np.asarray(log_gamma_complex(z)) - np.log(z)
    out.append(_check("special", "loggamma_recurrence", np.max(np.abs(np.exp(rec) - 1)), 1e-12))
    xs = np.array([0.7, 4.0, 12.0, 35.0])
    a = 1.3
    three = bessel_j(a - 1, xs) + bessel_j(a + 1, xs) - 2 * a / xs * bessel_j(a, xs)
    out.append(_check("special", "bessel_three_term", np.max(np.abs(three)), 1e-12))
    ai, aip = airy_ai(np.array([0.0]))
    out.append(_check("special", "airy_at_zero", abs(ai[0] - 0.35502805388781723926), 1e-14))
    rule = gauss_legendre(20)
    out.append(_check("special", "gauss_legendre_exactness", abs(rule.integrate(lambda t: t**38) - 2 / 39), 1e-14))
    u, w = gauss_legendre(40).composite(np.linspace(0.0, 1.0, 9))
    # x = 80 u^2 clusters nodes at the x^(alpha/2) edge
    psi = laguerre_psi_table(6, 1.5, 80.0 * u**2)
    gram = (psi * (160.0 * u * w)) @ psi.T
    out.append(_check("special", "laguerre_orthonormality", np.max(np.abs(gram - np.eye(6))), 1e-10))
    if len(_backend.available()) > 1:
        t = np.linspace(-3.0, 40.0, 17) + 1.5j
        d = np.asarray(log_gamma_complex(t, backend="compiled")) - np.asarray(log_gamma_complex(t, backend="python"))
        out.append(_check("special", "backend_agreement", np.max(np.abs(d)), 1e-12))
    return out


def _meijer() -> list[CheckResult]:
    from .meijer import MeijerGParams, meijer_g, meijer_identity_suite
    from .special import bessel_j

    out = []
    nu, x = 1.0, 2.0
    g = meijer_g(MeijerGParams.of(1, 0, [], [nu, 0.0]), x, method="contour")
    out.append(_check("meijer", "bessel_identity", abs(g - x ** (nu / 2) * bessel_j(nu, 2 * math.sqrt(x))), 1e-10))
    p = MeijerGParams.of(2, 0, [], [0.31, -0.42, 0.17])
    zs = np.array([0.2, 1.0, 4.0])
    diff = np.asarray(meijer_g(p, zs, method="contour")) - np.asarray(meijer_g(p, zs, method="series"))
    out.append(_check("meijer", "contour_vs_series", np.max(np.abs(diff)), 1e-9))
    rep = meijer_identity_suite(MeijerGParams.of(2, 0, [], [1.0, 0.0, 0.25]), 2.0)
    out.append(_check("meijer", "identity_suite", rep.max(), 1e-5))
    return out


def _macroscopic() -> list[CheckResult]:
    from .macroscopic import WishartParams, bohr_sommerfeld_area, mp_cdf, mp_density, turning_points, wkb_density

    out = []
    c = 0.3
    rm, rp = turning_points(c)
    out.append(_check("macroscopic", "mp_normalization", abs(mp_cdf(c, rp) - 1.0), 1e-10))
    x = np.linspace(rm, rp, 41)[1:-1]
    out.append(_check("macroscopic", "wkb_equals_mp", np.max(np.abs(wkb_density(c, x) - mp_density(c, x))), 1e-12))
    out.append(_check("macroscopic", "bohr_sommerfeld", abs(bohr_sommerfeld_area(WishartParams(100, 200)) - 100), 1.0))
    return out


def _finite() -> list[CheckResult]:
    from .finite import (
        MuttalibBorodinEnsemble,
        biorthogonality_gram,
        hamiltonian_residual_mb,
        hamiltonian_residual_product,
        schrodinger_residual,
        wishart_kernel,
    )
    from .harness import projection_diagnostics
    from .macroscopic import WishartParams

    out = []
    out.append(_check("finite", "product_eigenequation", max(hamiltonian_residual_product(k, (1, 3)) for k in range(7)), 1e-10))
    out.append(_check("finite", "mb_eigenequation", max(hamiltonian_residual_mb(k, 0.5, 2) for k in range(7)), 1e-10))
    out.append(_check("finite", "schrodinger_fd", max(schrodinger_residual(k, 1.0, 2.5) for k in range(4)), 1e-5))
    wp = WishartParams(10, 12)
    res, tr = projection_diagnostics(lambda a, b: wishart_kernel(wp, a, b), (0.0, 100.0), power=2.0)
    out.append(_check("finite", "wishart_reproducing", res, 1e-6))
    out.append(_check("finite", "wishart_trace", abs(tr - 10), 1e-5))
    gram = biorthogonality_gram(MuttalibBorodinEnsemble(4, 0.5, 2))
    out.append(_check("finite", "mb_biorthogonality", np.max(np.abs(gram - np.eye(4))), 1e-6))
    return out


def _limits() -> list[CheckResult]:
    from .limits import airy_kernel, airy_kernel_integral, bessel_kernel, bessel_kernel_integral, meijer_hard_kernel

    out = []
    t = np.linspace(-6.0, 3.0, 5)
    tt, ss = np.meshgrid(t, t + 0.13)
    d = airy_kernel(tt.ravel(), ss.ravel()) - airy_kernel_integral(tt.ravel(), ss.ravel())
    out.append(_check("limits", "airy_dual_forms", np.max(np.abs(d)), 1e-8))
    x = np.linspace(0.5, 20.0, 5)
    xx, yy = np.meshgrid(x, x + 0.21)
    d = bessel_kernel(1.0, xx.ravel(), yy.ravel()) - bessel_kernel_integral(1.0, xx.ravel(), yy.ravel())
    out.append(_check("limits", "bessel_dual_forms", np.max(np.abs(d)), 1e-8))
    nu = 1.0
    x, y = np.array([0.3, 1.1, 2.0]), np.array([0.8, 0.4, 2.5])
    m = meijer_hard_kernel((nu,), x, y)
    b = 4.0 * (y / x) ** (nu / 2) * bessel_kernel(nu, 4 * x, 4 * y)
    out.append(_check("limits", "meijer_m1_reduction", np.max(np.abs(m - b)), 1e-8))
    return out


def _sampling() -> list[CheckResult]:
    from .macroscopic import WishartParams, mp_cdf
    from .sampling import RngState, ks_distance, wishart_eigs

    out = []
    wp = WishartParams(40, 80)
    a = wishart_eigs(wp, 30, RngState(11)).realizations
    b = wishart_eigs(wp, 30, RngState(11)).realizations
    out.append(_check("sampling", "determinism", float(np.any(a != b)), 0.0))
    ks = ks_distance(np.sort(a.ravel()) / wp.T, lambda x: mp_cdf(wp.c, x))
    out.append(_check("sampling", "ks_vs_marchenko_pastur", ks, 0.05))
    return out


def _harness() -> list[CheckResult]:
    from .harness import calibrate_soft_edge, projection_diagnostics
    from .limits import airy_kernel, sine_kernel
    from .macroscopic import WishartParams

    out = []
    cal = calibrate_soft_edge(WishartParams(100, 100), (1, 2, 3), kernel_factory=lambda n: airy_kernel)
    out.append(_check("harness", "soft_edge_self_calibration", abs(cal.kappa - 1.0), 1e-6))
    _, tr = projection_diagnostics(sine_kernel, (-25.0, 25.0))
    out.append(_check("harness", "sine_trace_density", abs(tr - 50.0), 1e-6))
    return out


SUITE_FUNCTIONS: dict[str, Callable[[], list[CheckResult]]] = {
    "special": _special,
    "meijer": _meijer,
    "macroscopic": _macroscopic,
    "finite": _finite,
    "limits": _limits,
    "sampling": _sampling,
    "harness": _harness,
}


def run_suites(names: Iterable[str]) -> list[CheckResult]:
    """Run the named suites in order; an exception inside a suite counts as one failed check."""
    results: list[CheckResult] = []
    for name in names:
        try:
            results.extend(SUITE_FUNCTIONS[name]())
        except Exception as exc:  # a crashing suite must still be reported, not abort the others
            results.append(CheckResult(name, f"error:{type(exc).__name__}", math.nan, 0.0, False))
    return results
