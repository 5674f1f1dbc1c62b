"""Special functions on which every kernel in the package is built.

All functions accept scalars or numpy arrays and return objects of the same
shape (a Python scalar for scalar input).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import _backend
from .errors import DomainError, PoleError

__all__ = [
    "log_gamma_complex",
    "log_gamma_real",
    "gamma_sign_log",
    "rgamma",
    "bessel_j",
    "airy_ai",
    "laguerre_psi",
    "laguerre_psi_table",
    "QuadratureRule",
    "gauss_legendre",
]

_SQRT_PI = math.sqrt(math.pi)
_AI0 = 0.355028053887817239260063186004
_AIP0 = 0.258819403792806798405183560189


def _scalar_or_array(out, template):
    if np.ndim(template) == 0:
        return out.reshape(()).item()
    return out.reshape(np.shape(template))


# ---------------------------------------------------------------- log-gamma

def log_gamma_complex(z, *, backend: str | None = None):
    """Principal branch of log Gamma(z) for complex ``z``.

    Stirling series after an upward recursion shift. The branch cut runs along
    the negative real axis; real negative arguments are taken from the upper
    side.

    Raises
    ------
    PoleError
        If any entry is a non-positive integer.
    """
    arr = np.asarray(z, dtype=np.complex128)
    vals, poles = _backend.get(backend).loggamma_array(arr.ravel())
    if np.any(poles):
        bad = arr.ravel()[np.asarray(poles, dtype=bool)][0]
        raise PoleError(f"log Gamma has a pole at z={bad}")
    return _scalar_or_array(np.asarray(vals), arr)


def gamma_sign_log(x):
    """Return (sign, log|Gamma(x)|) for real ``x``; sign is 0 at the poles."""
    x = np.asarray(x, dtype=np.float64)
    flat = x.ravel()
    vals, poles = _backend.kernels.loggamma_array(flat.astype(np.complex128))
    vals = np.asarray(vals)
    poles = np.asarray(poles, dtype=bool)
    sign = np.where(poles, 0.0, np.where(flat > 0, 1.0, np.sign(np.cos(vals.imag))))
    logabs = np.where(poles, np.inf, vals.real)
    return sign.reshape(x.shape), logabs.reshape(x.shape)


def log_gamma_real(x):
    """log|Gamma(x)| for real ``x`` (``inf`` at the poles)."""
    return gamma_sign_log(x)[1]


def rgamma(x):
    """Reciprocal Gamma function 1/Gamma(x), real argument, zero at the poles."""
    sign, logabs = gamma_sign_log(x)
    with np.errstate(over="ignore"):
        out = sign * np.exp(-logabs)
    return out


# ---------------------------------------------------------------- Bessel J

def _bessel_series(alpha: float, x: np.ndarray) -> np.ndarray:
    h = 0.5 * x
    with np.errstate(divide="ignore"):
        lead = np.exp(alpha * np.log(h) - float(log_gamma_real(alpha + 1.0)))
    term = np.ones_like(x)
    total = np.ones_like(x)
    q = -h * h
    for k in range(1, 80):
        term = term * q / (k * (k + alpha))
        total += term
        if np.all(np.abs(term) <= 1e-17 * np.maximum(np.abs(total), 1e-300)):
            break
    return lead * total


def _bessel_hankel(alpha: float, x: np.ndarray) -> np.ndarray:
    mu = 4.0 * alpha * alpha
    p = np.ones_like(x)
    q = np.zeros_like(x)
    term = np.ones_like(x)
    prev = np.full_like(x, np.inf)
    live = np.ones(x.shape, dtype=bool)
    for k in range(1, 200):
        term = term * (mu - (2 * k - 1) ** 2) / (k * 8.0 * x)
        mag = np.abs(term)
        live &= mag < prev
        if not np.any(live):
            break
        contrib = np.where(live, term, 0.0)
        # a_k / x^k enters P with sign (-1)^(k/2) for even k, Q with (-1)^((k-1)/2) for odd k
        sgn = -1.0 if (k // 2) % 2 else 1.0
        if k % 2 == 0:
            p += sgn * contrib
        else:
            q += sgn * contrib
        prev = mag
        live &= mag > 1e-17
    omega = x - (0.5 * alpha + 0.25) * math.pi
    return np.sqrt(2.0 / (math.pi * x)) * (p * np.cos(omega) - q * np.sin(omega))


def _bessel_miller(alpha: float, x: np.ndarray) -> np.ndarray:
    n = int(math.floor(alpha))
    nu = alpha - n
    top = max(alpha, float(x.max()))
    start = n + int(top - n + 20 + math.sqrt(160.0 * top)) + 2
    if start % 2:
        start += 1
    # coefficients (nu + 2k) Gamma(nu + k) / k! of the Neumann sum for (x/2)^nu
    gnu1 = math.exp(float(log_gamma_real(nu + 1.0)))
    kmax = start // 2
    g = np.empty(kmax + 1)
    g[0] = gnu1
    if kmax >= 1:
        g[1] = gnu1
        for k in range(2, kmax + 1):
            g[k] = g[k - 1] * (nu + k - 1) / k
    coef = np.empty(kmax + 1)
    coef[0] = gnu1
    coef[1:] = (nu + 2.0 * np.arange(1, kmax + 1)) * g[1:]
    jp1 = np.zeros_like(x)
    j = np.full_like(x, 1e-280)
    s = np.zeros_like(x)
    res = np.zeros_like(x)
    for L in range(start, -1, -1):
        if L % 2 == 0:
            s += coef[L // 2] * j
        if L == n:
            res = j.copy()
        if L == 0:
            break
        mu = nu + L
        jm1 = (2.0 * mu / x) * j - jp1
        jp1, j = j, jm1
        big = np.abs(j) > 1e250
        if np.any(big):
            f = np.where(big, 1e-250, 1.0)
            j *= f
            jp1 *= f
            s *= f
            res *= f
    return res * np.exp(nu * np.log(0.5 * x)) / s


def _bessel_nonneg(alpha: float, x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    zero = x == 0.0
    out[zero] = 1.0 if alpha == 0.0 else 0.0
    series = (~zero) & (x <= 10.0)
    hankel = x >= max(30.0, alpha * alpha)
    miller = ~(zero | series | hankel)
    if np.any(series):
        out[series] = _bessel_series(alpha, x[series])
    if np.any(hankel):
        out[hankel] = _bessel_hankel(alpha, x[hankel])
    if np.any(miller):
        out[miller] = _bessel_miller(alpha, x[miller])
    return out


def bessel_j(alpha: float, x):
    """Bessel function of the first kind J_alpha(x) for alpha >= -1 and x >= 0.

    Power series for x <= 10, Miller backward recurrence normalised by the
    Neumann sum for intermediate x, and the Hankel expansion once
    x >= max(30, alpha^2). Absolute accuracy is about 1e-13 up to x = 1e3.
    """
    alpha = float(alpha)
    if alpha < -1.0:
        raise DomainError(f"bessel_j requires alpha >= -1, got {alpha}")
    xa = np.asarray(x, dtype=np.float64)
    if np.any(xa < 0.0):
        raise DomainError("bessel_j requires x >= 0")
    flat = xa.ravel()
    if alpha == -1.0:
        out = -_bessel_nonneg(1.0, flat)
    elif alpha < 0.0:
        out = np.empty_like(flat)
        small = flat <= 10.0
        with np.errstate(divide="ignore"):
            out[small] = np.where(flat[small] == 0.0, np.inf, _bessel_series(alpha, np.where(flat[small] == 0.0, 1.0, flat[small])))
        big = ~small
        if np.any(big):
            xb = flat[big]
            out[big] = 2.0 * (alpha + 1.0) / xb * _bessel_nonneg(alpha + 1.0, xb) - _bessel_nonneg(alpha + 2.0, xb)
    else:
        out = _bessel_nonneg(alpha, flat)
    return _scalar_or_array(out, xa)


# ---------------------------------------------------------------- Airy

def _airy_maclaurin(x: np.ndarray):
    x3 = x ** 3
    f = np.ones_like(x)
    g = x.copy()
    fp = 0.5 * x * x
    gp = np.ones_like(x)
    tf, tg, tfp, tgp = f.copy(), g.copy(), fp.copy(), gp.copy()
    for k in range(1, 60):
        tf = tf * x3 / ((3 * k - 1) * (3 * k))
        tg = tg * x3 / ((3 * k) * (3 * k + 1))
        if k >= 2:
            tfp = tfp * x3 / ((3 * k - 3) * (3 * k - 1))
            fp += tfp
        tgp = tgp * x3 / ((3 * k - 2) * (3 * k))
        f += tf
        g += tg
        gp += tgp
        if np.all(np.abs(tf) + np.abs(tg) + np.abs(tfp) + np.abs(tgp) < 1e-18):
            break
    return _AI0 * f - _AIP0 * g, _AI0 * fp - _AIP0 * gp


@lru_cache(maxsize=1)
def _airy_ray_rule():
    rule = gauss_legendre(64)
    edges = np.linspace(0.0, 7.5, 4)
    nodes = np.concatenate([rule.mapped(a, b)[0] for a, b in zip(edges[:-1], edges[1:])])
    weights = np.concatenate([rule.mapped(a, b)[1] for a, b in zip(edges[:-1], edges[1:])])
    return nodes, weights


def _airy_ray(x: np.ndarray):
    r, w = _airy_ray_rule()
    e1 = np.exp(1j * math.pi / 3.0)
    ph = np.exp(-(r ** 3)[None, :] / 3.0 - x[:, None] * r[None, :] * e1)
    i0 = ph @ w
    i1 = ph @ (w * r)
    ai = (e1 * i0).imag / math.pi
    aip = -(e1 * e1 * i1).imag / math.pi
    return ai, aip


def _airy_uv(nterms: int):
    u = np.empty(nterms)
    u[0] = 1.0
    for k in range(1, nterms):
        u[k] = u[k - 1] * (6 * k - 5) * (6 * k - 3) * (6 * k - 1) / ((2 * k - 1) * 216.0 * k)
    k = np.arange(nterms)
    v = -(6 * k + 1) / (6 * k - 1) * u
    return u, v


_AIRY_U, _AIRY_V = _airy_uv(60)


def _truncated(coeffs: np.ndarray, zeta: float, alternate: bool, parity: int | None):
    """Sum sum_k s_k c_k / zeta^k up to the smallest term (optional parity filter)."""
    tot = 0.0
    best = np.inf
    for k in range(coeffs.size):
        t = coeffs[k] / zeta ** k
        if abs(t) > best:
            break
        best = abs(t)
        if parity is None:
            tot += (-1) ** k * t if alternate else t
        elif k % 2 == parity:
            tot += (-1) ** (k // 2) * t
    return tot


def _airy_asymptotic(x: float):
    ax = abs(x)
    zeta = 2.0 / 3.0 * ax ** 1.5
    if x > 0:
        pre = math.exp(-zeta) / (2.0 * _SQRT_PI)
        ai = pre * ax ** -0.25 * _truncated(_AIRY_U, zeta, True, None)
        aip = -pre * ax ** 0.25 * _truncated(_AIRY_V, zeta, True, None)
        return ai, aip
    th = zeta - 0.25 * math.pi
    c, s = math.cos(th), math.sin(th)
    ue, uo = _truncated(_AIRY_U, zeta, False, 0), _truncated(_AIRY_U, zeta, False, 1)
    ve, vo = _truncated(_AIRY_V, zeta, False, 0), _truncated(_AIRY_V, zeta, False, 1)
    ai = (c * ue + s * uo) / (_SQRT_PI * ax ** 0.25)
    aip = ax ** 0.25 / _SQRT_PI * (s * ve - c * vo)
    return ai, aip


def airy_ai(x):
    """Airy function and its derivative, returned as ``(Ai(x), Ai'(x))``.

    Maclaurin series for |x| <= 2, a steepest-descent ray integral on
    2 < |x| <= 8 and the standard asymptotic expansions beyond.
    """
    xa = np.asarray(x, dtype=np.float64)
    flat = xa.ravel()
    ai = np.empty_like(flat)
    aip = np.empty_like(flat)
    ax = np.abs(flat)
    small = ax <= 2.0
    mid = (ax > 2.0) & (ax <= 8.0)
    large = ax > 8.0
    if np.any(small):
        ai[small], aip[small] = _airy_maclaurin(flat[small])
    if np.any(mid):
        ai[mid], aip[mid] = _airy_ray(flat[mid])
    for i in np.flatnonzero(large):
        ai[i], aip[i] = _airy_asymptotic(float(flat[i]))
    return _scalar_or_array(ai, xa), _scalar_or_array(aip, xa)


# ---------------------------------------------------------------- Laguerre

def laguerre_psi_table(nmax: int, alpha: float, x, *, backend: str | None = None) -> np.ndarray:
    """Orthonormal Laguerre functions psi_0..psi_{nmax-1} evaluated at ``x``.

    psi_k(x) = sqrt(k!/Gamma(k+alpha+1)) x^{alpha/2} e^{-x/2} L_k^alpha(x).

    Returns
    -------
    ndarray of shape ``(nmax,) + x.shape``.

    Raises
    ------
    OverflowError
        If a value exceeds the double range after log-scale renormalisation.
    """
    if nmax < 0 or nmax > 100_001:
        raise DomainError(f"recurrence depth {nmax} outside [0, 100001]")
    alpha = float(alpha)
    if alpha <= -1.0:
        raise DomainError(f"alpha must exceed -1, got {alpha}")
    xa = np.asarray(x, dtype=np.float64)
    if np.any(xa < 0.0):
        raise DomainError("laguerre_psi requires x >= 0")
    lg = float(log_gamma_real(alpha + 1.0))
    table, overflow = _backend.get(backend).laguerre_table(int(nmax), alpha, xa.ravel(), lg)
    if overflow:
        raise OverflowError("Laguerre function exceeds double range")
    return np.asarray(table).reshape((nmax,) + xa.shape)


def laguerre_psi(k: int, alpha: float, x, *, backend: str | None = None):
    """Orthonormal Laguerre function psi_k(x) with weight x^alpha e^{-x}."""
    if k < 0 or k > 100_000:
        raise DomainError(f"index k={k} outside [0, 1e5]")
    xa = np.asarray(x, dtype=np.float64)
    row = laguerre_psi_table(k + 1, alpha, xa, backend=backend)[k]
    return row.item() if np.ndim(xa) == 0 else row


# ---------------------------------------------------------------- quadrature

@dataclass(frozen=True)
class QuadratureRule:
    """Gauss-Legendre nodes and weights on [-1, 1] (read-only arrays)."""

    nodes: np.ndarray
    weights: np.ndarray

    @property
    def order(self) -> int:
        return int(self.nodes.size)

    def mapped(self, a: float, b: float) -> tuple[np.ndarray, np.ndarray]:
        """Nodes and weights affinely mapped to [a, b]."""
        half = 0.5 * (b - a)
        return a + half * (self.nodes + 1.0), half * self.weights

    def composite(self, edges) -> tuple[np.ndarray, np.ndarray]:
        """Nodes and weights of the rule repeated on consecutive panels."""
        edges = np.asarray(edges, dtype=np.float64)
        parts = [self.mapped(a, b) for a, b in zip(edges[:-1], edges[1:])]
        return np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts])

    def integrate(self, f, a: float = -1.0, b: float = 1.0):
        x, w = self.mapped(a, b)
        return np.tensordot(np.asarray(f(x)), w, axes=([-1], [0]))


def _legendre_and_derivative(n: int, x: np.ndarray):
    p0 = np.ones_like(x)
    p1 = x.copy()
    for k in range(2, n + 1):
        p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
    dp = n * (x * p1 - p0) / (x * x - 1.0)
    return p1, dp


@lru_cache(maxsize=64)
def gauss_legendre(order: int) -> QuadratureRule:
    """Gauss-Legendre rule of the given order on [-1, 1].

    Newton iteration on the three-term recurrence, started from Tricomi's
    asymptotic approximation of the roots. Rules are cached.
    """
    order = int(order)
    if order < 1 or order > 10_000:
        raise DomainError(f"quadrature order {order} outside [1, 10000]")
    if order == 1:
        nodes, weights = np.array([0.0]), np.array([2.0])
    else:
        n = order
        half = (n + 1) // 2
        i = np.arange(1, half + 1)
        x = (1.0 - 1.0 / (8.0 * n * n) + 1.0 / (8.0 * n ** 3)) * np.cos(math.pi * (4 * i - 1) / (4 * n + 2))
        for _ in range(100):
            p, dp = _legendre_and_derivative(n, x)
            dx = p / dp
            x = x - dx
            if np.max(np.abs(dx)) < 1e-16:
                break
        p, dp = _legendre_and_derivative(n, x)
        w = 2.0 / ((1.0 - x * x) * dp * dp)
        nodes = np.concatenate([-x, x[::-1][n % 2 :]])
        weights = np.concatenate([w, w[::-1][n % 2 :]])
        if n % 2:
            nodes[half - 1] = 0.0
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return QuadratureRule(nodes, weights)
