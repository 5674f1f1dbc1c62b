"""Macroscopic Wishart spectrum: Marchenko-Pastur density, classical phase
space, semiclassical area and the affine maps to the microscopic scales."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .special import QuadratureRule, gauss_legendre

__all__ = [
    "WishartParams",
    "ScalingRegime",
    "turning_points",
    "mp_density",
    "mp_cdf",
    "effective_potential",
    "phase_space_momentum",
    "bohr_sommerfeld_area",
    "wkb_density",
    "wkb_turning_points",
    "wkb_t_integral",
    "scaling_map",
    "inverse_scaling_map",
]


@dataclass(frozen=True)
class WishartParams:
    """Complex Wishart ensemble with an N x T Gaussian matrix, T >= N."""

    N: int
    T: int

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise DomainError(f"N must be a positive integer, got {self.N}")
        if int(self.T) != self.T or self.T < self.N:
            raise DomainError(f"T must be an integer >= N, got T={self.T}, N={self.N}")

    @property
    def alpha(self) -> int:
        return self.T - self.N

    @property
    def c(self) -> float:
        return self.N / self.T


def _check_c(c: float) -> float:
    c = float(c)
    if not 0.0 < c <= 1.0:
        raise DomainError(f"c must lie in (0, 1], got {c}")
    return c


def turning_points(c: float) -> tuple[float, float]:
    """Edges (r-, r+) = ((1 - sqrt c)^2, (1 + sqrt c)^2) of the MP support."""
    c = _check_c(c)
    sc = math.sqrt(c)
    return (1.0 - sc) ** 2, (1.0 + sc) ** 2


def _ret(out: np.ndarray, x):
    return float(out) if np.ndim(x) == 0 else out


def mp_density(c: float, x):
    """Marchenko-Pastur density sqrt((r+ - x)(x - r-)) / (2 pi c x), zero off the support."""
    rm, rp = turning_points(c)
    xa = np.asarray(x, dtype=np.float64)
    inside = (xa > rm) & (xa < rp)
    safe = np.where(inside, xa, 1.0)
    out = np.where(inside, np.sqrt(np.abs((rp - safe) * (safe - rm))) / (2.0 * math.pi * c * safe), 0.0)
    return _ret(out, x)


def mp_cdf(c: float, x):
    """Cumulative Marchenko-Pastur distribution in closed form.

    With x = mid - half cos(phi) the density becomes
    (-x + r- + r+ - r- r+ / x) / (2 pi c) d phi, and each term integrates
    exactly; the last one gives the arctangent.
    """
    rm, rp = turning_points(c)
    mid, half = 0.5 * (rp + rm), 0.5 * (rp - rm)
    xa = np.clip(np.asarray(x, dtype=np.float64), rm, rp)
    phi = np.arccos(np.clip((mid - xa) / half, -1.0, 1.0))
    hp = 0.5 * phi
    arc = np.arctan2(math.sqrt(rp) * np.sin(hp), math.sqrt(rm) * np.cos(hp))
    out = (mid * phi + half * np.sin(phi) - 2.0 * math.sqrt(rm * rp) * arc) / (2.0 * math.pi * c)
    return _ret(np.clip(out, 0.0, 1.0), x)


def effective_potential(c: float, x):
    """V_eff(x) = (1 - c)^2 / (4 x^2) - (1 + c) / (2 x)."""
    xa = np.asarray(x, dtype=np.float64)
    if np.any(xa <= 0.0):
        raise DomainError("effective potential requires x > 0")
    out = (1.0 - c) ** 2 / (4.0 * xa * xa) - (1.0 + c) / (2.0 * xa)
    return _ret(out, x)


def phase_space_momentum(c: float, x):
    """Boundary p(x) = sqrt(-1/4 - V_eff(x)) of the classically allowed region.

    The allowed region is V_eff <= -1/4, i.e. r- <= x <= r+; p is zero outside.
    """
    rm, rp = turning_points(c)
    xa = np.asarray(x, dtype=np.float64)
    inside = (xa > rm) & (xa < rp)
    safe = np.where(inside, xa, 1.0)
    v = (1.0 - c) ** 2 / (4.0 * safe * safe) - (1.0 + c) / (2.0 * safe)
    out = np.where(inside, np.sqrt(np.maximum(-0.25 - v, 0.0)), 0.0)
    return _ret(out, x)


def bohr_sommerfeld_area(params: WishartParams, rule: QuadratureRule | None = None) -> float:
    """Phase-space area (T / 2 pi) * closed-orbit integral of p = (T / pi) int p dx.

    Quadrature in the angle variable, which makes the integrand smooth.
    """
    rule = rule if rule is not None else gauss_legendre(64)
    c = params.c
    rm, rp = turning_points(c)
    mid, half = 0.5 * (rp + rm), 0.5 * (rp - rm)
    phi, w = rule.mapped(0.0, math.pi)
    x = mid - half * np.cos(phi)
    # p dx = half^2 sin^2(phi) / (2 x) dphi
    integral = float(np.dot((half * np.sin(phi)) ** 2 / (2.0 * x), w))
    return params.T / math.pi * integral


def wkb_turning_points(c: float, t):
    """Turning points x-(t), x+(t) of the t-resolved semiclassical orbit."""
    c = _check_c(c)
    ta = np.asarray(t, dtype=np.float64)
    root = 2.0 * np.sqrt(np.maximum(c * ta * (1.0 + c * ta - c), 0.0))
    base = 1.0 - c + 2.0 * c * ta
    return _ret(base - root, t), _ret(base + root, t)


def wkb_density(c: float, x):
    """Semiclassical density (C / 2 c x) sqrt((x - r-)(r+ - x)) with C = 1/pi."""
    c = _check_c(c)
    rm, rp = (1.0 - math.sqrt(c)) ** 2, (1.0 + math.sqrt(c)) ** 2
    xa = np.asarray(x, dtype=np.float64)
    inside = (xa > rm) & (xa < rp)
    safe = np.where(inside, xa, 1.0)
    out = np.where(inside, (1.0 / math.pi) / (2.0 * c * safe) * np.sqrt(np.abs((safe - rm) * (rp - safe))), 0.0)
    return _ret(out, x)


def wkb_t_integral(c: float, x: float, *, order: int = 48) -> float:
    """Density at x from the t-integral (1/pi) int_0^1 dt / sqrt(R(t, x)) over R > 0.

    R(t, x) = 2c(1 + 2tx - x) - c^2 - (x - 1)^2 is linear in t and positive
    for t > t*(x). The substitution t = t* + (1 - t*) v^2 removes the
    inverse square-root endpoint singularity.
    """
    c = _check_c(c)
    x = float(x)
    if x <= 0.0:
        return 0.0
    r0 = 2.0 * c * (1.0 - x) - c * c - (x - 1.0) ** 2
    slope = 4.0 * c * x
    tstar = max(-r0 / slope, 0.0)
    if tstar >= 1.0:
        return 0.0
    v, w = gauss_legendre(order).mapped(0.0, 1.0)
    t = tstar + (1.0 - tstar) * v * v
    radicand = r0 + slope * t
    jac = 2.0 * (1.0 - tstar) * v
    return float(np.dot(jac / np.sqrt(radicand), w)) / math.pi


@dataclass(frozen=True)
class ScalingRegime:
    """Microscopic region: 'hard', 'bulk' (centre x0 in units of T) or 'soft' (edge sign +-1)."""

    kind: str
    x0: float | None = None
    sign: int = 1

    def __post_init__(self):
        if self.kind not in ("hard", "bulk", "soft"):
            raise DomainError(f"unknown scaling regime {self.kind!r}")
        if self.kind == "bulk" and self.x0 is None:
            raise DomainError("bulk regime needs a centre x0")
        if self.kind == "soft" and self.sign not in (1, -1):
            raise DomainError("soft-edge sign must be +1 or -1")

    @classmethod
    def hard(cls) -> "ScalingRegime":
        return cls("hard")

    @classmethod
    def bulk(cls, x0: float) -> "ScalingRegime":
        return cls("bulk", x0=float(x0))

    @classmethod
    def soft(cls, sign: int = 1) -> "ScalingRegime":
        return cls("soft", sign=int(sign))


def _affine(params: WishartParams, regime: ScalingRegime) -> tuple[float, float]:
    """Offset and slope of lambda(s) = offset + slope * s."""
    N, T, c = params.N, params.T, params.c
    rm, rp = turning_points(c)
    if regime.kind == "hard":
        return 0.0, T / N**2
    if regime.kind == "bulk":
        x0 = float(regime.x0)
        if not rm < x0 < rp:
            raise DomainError(f"bulk centre x0={x0} outside the support ({rm}, {rp})")
        return T * x0, T / (N * float(mp_density(c, x0)))
    r = rp if regime.sign > 0 else rm
    if r <= 0.0:
        raise DomainError("lower soft edge does not exist at c = 1")
    return T * r, regime.sign * T / (math.sqrt(c) * (r * N) ** (2.0 / 3.0))


def scaling_map(params: WishartParams, regime: ScalingRegime, s):
    """Eigenvalue lambda(s) and Jacobian |d lambda / d s| of the microscopic map.

    hard:  lambda = T s / N^2
    bulk:  lambda = T (x0 + s / (N rho(x0)))
    soft:  lambda = T (r +- s / (sqrt(c) (r N)^{2/3}))
    """
    offset, slope = _affine(params, regime)
    sa = np.asarray(s, dtype=np.float64)
    lam = offset + slope * sa
    return _ret(lam, s), abs(slope)


def inverse_scaling_map(params: WishartParams, regime: ScalingRegime, lam):
    """Microscopic variable s(lambda), inverse of :func:`scaling_map`."""
    offset, slope = _affine(params, regime)
    la = np.asarray(lam, dtype=np.float64)
    return _ret((la - offset) / slope, lam)
