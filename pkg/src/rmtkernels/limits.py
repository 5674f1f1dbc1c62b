"""Universal microscopic kernels.

Closed forms for the sine, Airy and Bessel kernels sit next to the integral
(projection) forms they come from: the Bessel and Meijer-G hard-edge kernels
as integrals over s in [0, 1], the Airy kernel as an integral over the
negative half line. The Meijer-G kernels are evaluated by Gauss-Legendre
quadrature with every G-value at the nodes computed once per distinct
argument.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DomainError
from .meijer import MeijerGParams, meijer_g
from .special import airy_ai, bessel_j, gauss_legendre

__all__ = [
    "sine_kernel",
    "airy_kernel",
    "airy_kernel_integral",
    "bessel_kernel",
    "bessel_kernel_integral",
    "meijer_hard_kernel",
    "mb_hard_kernel",
    "mb_hard_kernel_ks",
    "mb_hard_kernel_reindexed",
    "mb_condition_nu",
    "LimitKernelSpec",
]

# relative separation below which a symmetric kernel is taken from its midpoint diagonal
_NEAR = 1e-7


def _pair(t, tp):
    ta, tpa = np.broadcast_arrays(np.asarray(t, dtype=np.float64), np.asarray(tp, dtype=np.float64))
    return ta, tpa, np.ndim(t) == 0 and np.ndim(tp) == 0


def _out(v: np.ndarray, scalar: bool):
    return float(v) if scalar else v


def sine_kernel(t, tp):
    """sin(pi (t' - t)) / (pi (t' - t)), equal to 1 on the diagonal."""
    ta, tpa, scalar = _pair(t, tp)
    return _out(np.sinc(tpa - ta), scalar)


# ---------------------------------------------------------------- Airy

def _airy_diag(t: np.ndarray) -> np.ndarray:
    ai, aip = airy_ai(t)
    return np.asarray(aip) ** 2 - t * np.asarray(ai) ** 2


def airy_kernel(t, tp):
    """(Ai(t') Ai'(t) - Ai'(t') Ai(t)) / (t' - t); Ai'(t)^2 - t Ai(t)^2 on the diagonal."""
    ta, tpa, scalar = _pair(t, tp)
    ta, tpa = ta.ravel(), tpa.ravel()
    d = tpa - ta
    near = np.abs(d) <= _NEAR * np.maximum(1.0, np.abs(ta))
    out = np.empty(ta.shape)
    if np.any(near):
        out[near] = _airy_diag(0.5 * (ta[near] + tpa[near]))
    far = ~near
    if np.any(far):
        a1, d1 = (np.asarray(v) for v in airy_ai(ta[far]))
        a2, d2 = (np.asarray(v) for v in airy_ai(tpa[far]))
        out[far] = (a2 * d1 - d2 * a1) / d[far]
    shape = np.broadcast_shapes(np.shape(t), np.shape(tp))
    return _out(out.reshape(shape), scalar)


def airy_kernel_integral(t, tp, *, order: int = 24, cutoff: float = 30.0):
    """int_{-inf}^0 Ai(t' - z) Ai(t - z) dz, truncated where both arguments exceed ``cutoff``.

    Composite Gauss-Legendre on unit panels follows the oscillations for
    negative arguments; Ai(30) ~ 1e-49 makes the neglected tail irrelevant.
    """
    ta, tpa, scalar = _pair(t, tp)
    shape = ta.shape
    ta, tpa = ta.ravel(), tpa.ravel()
    lo = float(np.min(np.minimum(ta, tpa)))
    span = max(cutoff - lo, 1.0)
    u, w = gauss_legendre(order).composite(np.linspace(0.0, span, int(math.ceil(span)) + 1))
    args = np.unique(np.concatenate([ta, tpa]))
    table = {float(a): np.asarray(airy_ai(a + u)[0]) for a in args}
    out = np.array([np.dot(table[float(a)] * table[float(b)], w) for a, b in zip(ta, tpa)])
    return _out(out.reshape(shape), scalar)


# ---------------------------------------------------------------- Bessel

def _bessel_diag(alpha: float, x: np.ndarray) -> np.ndarray:
    u = np.sqrt(x)
    ja = np.asarray(bessel_j(alpha, u))
    jb = np.asarray(bessel_j(alpha + 1.0, u))
    return 0.25 * (ja * ja + jb * jb - (2.0 * alpha / u) * ja * jb)


def bessel_kernel(alpha: float, x, y):
    """Hard-edge Bessel kernel in Lommel form.

    (J_a(sqrt x) sqrt(y) J_a'(sqrt y) - sqrt(x) J_a'(sqrt x) J_a(sqrt y)) / (2 (x - y)),
    with diagonal (1/4)(J_a^2 - J_{a+1} J_{a-1}) at sqrt(x). Entries with a
    zero argument come from the integral form, which is regular there.
    """
    if alpha < 0:
        raise DomainError("alpha must be non-negative")
    xa, ya, scalar = _pair(x, y)
    shape = xa.shape
    xa, ya = xa.ravel(), ya.ravel()
    if np.any(xa < 0.0) or np.any(ya < 0.0):
        raise DomainError("bessel_kernel requires x, y >= 0")
    out = np.empty(xa.shape)
    edge = (xa == 0.0) | (ya == 0.0)
    if np.any(edge):
        out[edge] = bessel_kernel_integral(alpha, xa[edge], ya[edge])
    d = xa - ya
    near = (np.abs(d) <= _NEAR * np.maximum(xa, ya)) & ~edge
    if np.any(near):
        out[near] = _bessel_diag(alpha, 0.5 * (xa[near] + ya[near]))
    far = ~near & ~edge
    if np.any(far):
        u, v = np.sqrt(xa[far]), np.sqrt(ya[far])
        ju, jv = np.asarray(bessel_j(alpha, u)), np.asarray(bessel_j(alpha, v))
        dju = alpha * ju / u - np.asarray(bessel_j(alpha + 1.0, u))
        djv = alpha * jv / v - np.asarray(bessel_j(alpha + 1.0, v))
        out[far] = (ju * v * djv - u * dju * jv) / (2.0 * d[far])
    return _out(out.reshape(shape), scalar)


def bessel_kernel_integral(alpha: float, x, y, *, order: int = 64):
    """(1/4) int_0^1 J_a(sqrt(x s)) J_a(sqrt(y s)) ds, computed with s = v^2."""
    xa, ya, scalar = _pair(x, y)
    v, w = gauss_legendre(order).mapped(0.0, 1.0)
    fx = np.asarray(bessel_j(alpha, np.sqrt(xa)[..., None] * v))
    fy = np.asarray(bessel_j(alpha, np.sqrt(ya)[..., None] * v))
    out = 0.5 * np.sum(fx * fy * (v * w), axis=-1)
    return _out(out, scalar)


# ---------------------------------------------------------------- Meijer-G hard edge

def _node_table(params: MeijerGParams, s: np.ndarray, arg: np.ndarray) -> np.ndarray:
    """G(params | s_i * a) for every node s_i and every distinct a; shape (len(s),) + arg.shape."""
    uniq, inv = np.unique(arg.ravel(), return_inverse=True)
    vals = meijer_g(params, np.outer(s, uniq))
    return vals[:, inv].reshape((s.size,) + arg.shape)


def _s_integral(p1: MeijerGParams, p2: MeijerGParams, x, y, order: int, power: float):
    """int_0^1 G1(s x) G2(s y) ds via s = v^power and Gauss-Legendre in v."""
    xa, ya, scalar = _pair(x, y)
    if np.any(xa <= 0.0) or np.any(ya <= 0.0):
        raise DomainError("hard-edge kernels require x, y > 0")
    v, w = gauss_legendre(order).mapped(0.0, 1.0)
    s = v**power
    ws = w * power * v ** (power - 1.0)
    g1 = _node_table(p1, s, xa)
    g2 = _node_table(p2, s, ya)
    out = np.tensordot(ws, g1 * g2, axes=(0, 0))
    return _out(out, scalar)


def meijer_hard_kernel(nu: Sequence[float], x, y, order: int = 64):
    """Hard-edge kernel of products of M Ginibre matrices.

    K(x, y) = int_0^1 G^{1,0}_{0,M+1}(-; 0, -nu | s x) G^{M,0}_{0,M+1}(-; nu, 0 | s y) ds.
    """
    nu = [float(v) for v in nu]
    M = len(nu)
    if not 1 <= M <= 4:
        raise DomainError("meijer_hard_kernel supports 1 <= M <= 4")
    p1 = MeijerGParams.of(1, 0, [], [0.0] + [-v for v in nu])
    p2 = MeijerGParams.of(M, 0, [], nu + [0.0])
    return _s_integral(p1, p2, x, y, order, 2.0)


def mb_condition_nu(alpha: float, theta: int) -> tuple[float, ...]:
    """Parameters nu_j of the hard-edge condition -d/dz prod_j (z d/dz + nu_j) <= 1.

    (-1/theta, -2/theta, ..., -(theta-1)/theta, -alpha/theta).
    """
    return tuple(-j / theta for j in range(1, theta)) + (-alpha / theta,)


def _check_mb(alpha: float, theta: int) -> int:
    if int(theta) != theta or not 1 <= theta <= 4:
        raise DomainError("theta must be an integer in [1, 4]")
    if not alpha > -1.0:
        raise DomainError("alpha must exceed -1")
    return int(theta)


def mb_hard_kernel(alpha: float, theta: int, x, y, order: int = 64):
    """Muttalib-Borodin hard-edge kernel as printed, with interchanged arguments.

    int_0^1 G^{1,0}_{0,theta+1}(-; a/theta, 0, 1/theta, ..., (theta-1)/theta | s x)
            G^{theta,0}_{0,theta+1}(-; 0, -1/theta, ..., -(theta-1)/theta, -a/theta | s y) ds

    The integral is the kernel with its arguments swapped, K(y, x).
    """
    th = _check_mb(alpha, theta)
    a = alpha / th
    p1 = MeijerGParams.of(1, 0, [], [a] + [j / th for j in range(th)])
    p2 = MeijerGParams.of(th, 0, [], [-j / th for j in range(th)] + [-a])
    return _s_integral(p1, p2, x, y, order, 2.0 * th)


def mb_hard_kernel_ks(alpha: float, theta: int, x, y, order: int = 64):
    """Gauge form (y/x)^{alpha/theta} times :func:`mb_hard_kernel`."""
    th = _check_mb(alpha, theta)
    xa, ya, scalar = _pair(x, y)
    out = (ya / xa) ** (alpha / th) * np.asarray(mb_hard_kernel(alpha, th, xa, ya, order))
    return _out(out, scalar)


def mb_hard_kernel_reindexed(alpha: float, theta: int, x, y, order: int = 64):
    """The same gauge form written directly as a Meijer-G product.

    int_0^1 G^{1,0}_{0,theta+1}(-; 0, -a/theta, -(a-1)/theta, ..., -(a-theta+1)/theta | s x)
            G^{theta,0}_{0,theta+1}(-; a/theta, (a-1)/theta, ..., (a-theta+1)/theta, 0 | s y) ds
    """
    th = _check_mb(alpha, theta)
    shifts = [(alpha - j) / th for j in range(th)]
    p1 = MeijerGParams.of(1, 0, [], [0.0] + [-v for v in shifts])
    p2 = MeijerGParams.of(th, 0, [], shifts + [0.0])
    return _s_integral(p1, p2, x, y, order, 2.0 * th)


# ---------------------------------------------------------------- specification object

@dataclass(frozen=True)
class LimitKernelSpec:
    """A limiting kernel and its parameters.

    kind is one of 'sine', 'airy', 'bessel', 'meijer_hard', 'mb_hard';
    ``order`` is the Gauss-Legendre order used by integral forms.
    """

    kind: str
    alpha: float = 0.0
    theta: int = 1
    nu: tuple = field(default=())
    order: int = 64

    def __post_init__(self):
        if self.kind not in ("sine", "airy", "bessel", "meijer_hard", "mb_hard"):
            raise DomainError(f"unknown limit kernel {self.kind!r}")
        if self.kind == "bessel" and self.alpha < 0:
            raise DomainError("Bessel kernel needs alpha >= 0")
        if self.kind == "meijer_hard" and not 1 <= len(self.nu) <= 4:
            raise DomainError("Meijer hard kernel needs 1 to 4 nu parameters")
        if self.kind == "mb_hard":
            _check_mb(self.alpha, self.theta)
        object.__setattr__(self, "nu", tuple(float(v) for v in self.nu))

    @classmethod
    def sine(cls) -> "LimitKernelSpec":
        return cls("sine")

    @classmethod
    def airy(cls) -> "LimitKernelSpec":
        return cls("airy")

    @classmethod
    def bessel(cls, alpha: float) -> "LimitKernelSpec":
        return cls("bessel", alpha=float(alpha))

    @classmethod
    def meijer_hard(cls, nu: Sequence[float], order: int = 64) -> "LimitKernelSpec":
        return cls("meijer_hard", nu=tuple(nu), order=order)

    @classmethod
    def mb_hard(cls, alpha: float, theta: int, order: int = 64) -> "LimitKernelSpec":
        return cls("mb_hard", alpha=float(alpha), theta=int(theta), order=order)

    def __call__(self, t, tp):
        if self.kind == "sine":
            return sine_kernel(t, tp)
        if self.kind == "airy":
            return airy_kernel(t, tp)
        if self.kind == "bessel":
            return bessel_kernel(self.alpha, t, tp)
        if self.kind == "meijer_hard":
            return meijer_hard_kernel(self.nu, t, tp, self.order)
        # kernel K(t, t') is the printed integral with swapped arguments
        return mb_hard_kernel(self.alpha, self.theta, tp, t, self.order)
