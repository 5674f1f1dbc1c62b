"""Meijer-G functions on the positive real axis and the Narain transform pair.

Evaluation paths
----------------
* ``bessel``: G^{1,0}_{0,2}(b1, b2 | z) = z^{(b1+b2)/2} J_{b1-b2}(2 sqrt z).
* ``series``: Slater residue sum over the poles of Gamma(b_h - s), h <= m.
  Needs the first m lower parameters to be pairwise non-resonant.
* ``contour``: trapezoid rule on a Mellin-Barnes path. A vertical line is
  used when the integrand decays along it (m + n > (p + q)/2); otherwise a
  hairpin that opens to the right, which is admissible when n = 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, NamedTuple, Sequence

import numpy as np

from . import _backend
from .errors import ContourError, DomainError, NarainConditionError, UnsupportedParamsError
from .special import QuadratureRule, bessel_j, gamma_sign_log

__all__ = [
    "MeijerGParams",
    "meijer_g",
    "select_method",
    "IdentityReport",
    "meijer_identity_suite",
    "NarainPairSpec",
    "TransformResult",
    "narain_forward",
    "narain_inverse",
    "narain_kernels",
]

RESONANCE_TOL = 1e-8
EPS = np.finfo(float).eps
_SERIES_LOSS = 1e-12
_CHUNK = 256


def supported_class(m: int, n: int, p: int, q: int) -> bool:
    """True for the index classes (1,0,0,q), (M,0,0,M+1), (1,0,1,M+1), (M,1,1,M+1)."""
    if m < 1:
        return False
    if (n, p) == (0, 0):
        return m == 1 or q == m + 1
    if (m, n, p) == (1, 0, 1):
        return q >= 2
    if (n, p) == (1, 1):
        return q == m + 1
    return False


@dataclass(frozen=True)
class MeijerGParams:
    """Indices and parameters of G^{m,n}_{p,q}(a; b | z).

    The constructor accepts any sequences for ``a`` and ``b`` and stores
    tuples of floats. Index classes outside the supported whitelist raise
    :class:`UnsupportedParamsError`.
    """

    m: int
    n: int
    p: int
    q: int
    a: tuple = ()
    b: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(float(v) for v in self.a))
        object.__setattr__(self, "b", tuple(float(v) for v in self.b))
        if len(self.a) != self.p or len(self.b) != self.q:
            raise UnsupportedParamsError(
                f"expected {self.p} upper and {self.q} lower parameters, got {len(self.a)} and {len(self.b)}"
            )
        if not (0 <= self.m <= self.q and 0 <= self.n <= self.p):
            raise UnsupportedParamsError(f"indices require m <= q and n <= p, got {(self.m, self.n, self.p, self.q)}")
        if not supported_class(self.m, self.n, self.p, self.q):
            raise UnsupportedParamsError(f"index class {(self.m, self.n, self.p, self.q)} is not supported")
        if not all(math.isfinite(v) for v in self.a + self.b):
            raise UnsupportedParamsError("parameters must be finite")
        lo = max((aj - 1.0 for aj in self.a[: self.n]), default=-math.inf)
        hi = min(self.b[: self.m])
        if lo >= hi:
            raise UnsupportedParamsError("poles of the two Gamma families are not separable by a vertical line")

    @classmethod
    def of(cls, m: int, n: int, a: Sequence[float], b: Sequence[float]) -> "MeijerGParams":
        """Build from parameter lists, inferring p and q."""
        return cls(m, n, len(a), len(b), tuple(a), tuple(b))

    @property
    def indices(self) -> tuple[int, int, int, int]:
        return (self.m, self.n, self.p, self.q)

    @property
    def decay_rate(self) -> float:
        """Exponential decay rate c* = m + n - (p + q)/2 along vertical lines (in units of pi)."""
        return self.m + self.n - 0.5 * (self.p + self.q)

    @property
    def resonant(self) -> bool:
        """True when two of the first m lower parameters differ by an integer (within 1e-8)."""
        bs = self.b[: self.m]
        for i in range(len(bs)):
            for j in range(i + 1, len(bs)):
                d = bs[i] - bs[j]
                if abs(d - round(d)) < RESONANCE_TOL:
                    return True
        return False

    def pole_band(self) -> tuple[float, float]:
        """Open interval of admissible real parts for a vertical contour.

        Gamma factors that cancel between numerator and denominator do not
        restrict the band.
        """
        f = _factors(self)
        return max((-c for c in f.plus), default=-math.inf), min(f.minus)

    def default_sigma(self) -> float:
        lo, hi = self.pole_band()
        if math.isinf(lo):
            return hi - 0.5
        return 0.5 * (lo + hi)

    def shifted(self, alpha: float) -> "MeijerGParams":
        """Parameters of z^alpha G(a; b | z) written as a single G-function."""
        return MeijerGParams(self.m, self.n, self.p, self.q, [v + alpha for v in self.a], [v + alpha for v in self.b])


# ---------------------------------------------------------------- integrand

def _log_gamma_c(s: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    vals, poles = _backend.kernels.loggamma_array(s.ravel())
    return np.asarray(vals).reshape(s.shape), np.asarray(poles, dtype=bool).reshape(s.shape)


class _Factors(NamedTuple):
    """Gamma factors of the Mellin-Barnes integrand after cancelling equal pairs.

    minus: c with Gamma(c - s) in the numerator; plus: c with Gamma(c + s) in
    the numerator; den_minus / den_plus likewise in the denominator.
    """

    minus: tuple
    plus: tuple
    den_minus: tuple
    den_plus: tuple


def _cancel(num: list, den: list) -> tuple[tuple, tuple]:
    num, den = list(num), list(den)
    for v in list(num):
        hit = next((w for w in den if abs(w - v) < 1e-14), None)
        if hit is not None:
            num.remove(v)
            den.remove(hit)
    return tuple(num), tuple(den)


@lru_cache(maxsize=1024)
def _factors(params: MeijerGParams) -> _Factors:
    m, n = params.m, params.n
    minus, den_minus = _cancel(params.b[:m], params.a[n:])
    plus, den_plus = _cancel([1.0 - a for a in params.a[:n]], [1.0 - b for b in params.b[m:]])
    return _Factors(minus, plus, den_minus, den_plus)


def _log_integrand(params: MeijerGParams, s: np.ndarray) -> np.ndarray:
    """log of prod Gamma(b_j - s) prod Gamma(1 - a_j + s) / (prod Gamma(1 - b_j + s) prod Gamma(a_j - s))."""
    s = np.asarray(s, dtype=np.complex128)
    out = np.zeros(s.shape, dtype=np.complex128)
    f = _factors(params)
    for c, sign, numerator in (
        [(c, -1.0, True) for c in f.minus]
        + [(c, 1.0, True) for c in f.plus]
        + [(c, -1.0, False) for c in f.den_minus]
        + [(c, 1.0, False) for c in f.den_plus]
    ):
        v, pole = _log_gamma_c(c + sign * s)
        if numerator:
            if np.any(pole):
                raise ContourError("contour passes through a pole")
            out += v
        else:
            out -= np.where(pole, np.inf, v)
    return out


def _saddle_sigma(params: MeijerGParams, logz: float, hi: float) -> float:
    """Real-axis minimiser of |integrand z^s| for integrands made of Gamma(b - s) only.

    On such a line the modulus peaks at the real axis, so the trapezoid sum
    carries no cancellation even where G is exponentially small.
    """
    offsets = np.concatenate([[0.0], 0.5 * 2.0 ** np.arange(0, 14, 0.25)])
    sig = hi - 0.5 - offsets
    mag = _log_integrand(params, sig.astype(np.complex128)).real + sig * logz
    return float(sig[int(np.argmin(mag))])


# ---------------------------------------------------------------- residue series

def _series_coefficients(params: MeijerGParams, h: int, kmax: int):
    """Signs and log-magnitudes of the residue-series coefficients at s = b_h + k."""
    m, n = params.m, params.n
    bh = params.b[h]
    k = np.arange(kmax, dtype=np.float64)
    sign = np.where(k % 2 == 0, 1.0, -1.0)
    _, lfact = gamma_sign_log(k + 1.0)
    logc = -lfact
    for j, bj in enumerate(params.b):
        if j == h:
            continue
        if j < m:
            sg, lg = gamma_sign_log(bj - bh - k)
            sign = sign * sg
            logc = logc + lg
        else:
            sg, lg = gamma_sign_log(1.0 - bj + bh + k)
            sign = sign * sg
            logc = logc - np.where(sg == 0.0, 0.0, lg)
    for j, aj in enumerate(params.a):
        if j < n:
            sg, lg = gamma_sign_log(1.0 - aj + bh + k)
            sign = sign * sg
            logc = logc + lg
        else:
            sg, lg = gamma_sign_log(aj - bh - k)
            sign = sign * sg
            logc = logc - np.where(sg == 0.0, 0.0, lg)
    return sign, np.where(sign == 0.0, -np.inf, logc)


def _series(params: MeijerGParams, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Residue series; returns values and an absolute round-off estimate per z."""
    zmax = float(z.max())
    logz = np.log(z)
    lzmax = math.log(zmax) if zmax > 0 else -745.0
    total = np.zeros_like(z)
    scale = np.zeros_like(z)
    for h in range(params.m):
        kmax = 64
        while True:
            sign, logc = _series_coefficients(params, h, kmax)
            live = sign != 0.0
            if not np.any(live):
                break
            mag = logc + np.arange(kmax) * lzmax
            peak = mag[live].max()
            last = np.flatnonzero(live)[-1]
            tail_ok = mag[live][-1] < peak - 42.0 and (last < kmax - 8 or np.all(np.diff(mag[-8:]) < 0))
            if tail_ok or not np.any(live[-8:]) or kmax >= 8192:
                break
            kmax *= 2
        idx = np.flatnonzero(live)
        bh = params.b[h]
        for lo in range(0, z.size, _CHUNK):
            lz = logz[lo : lo + _CHUNK]
            with np.errstate(over="ignore", invalid="ignore"):
                ex = logc[idx][None, :] + np.outer(lz, idx) + bh * lz[:, None]
                terms = sign[idx][None, :] * np.exp(ex)
            total[lo : lo + _CHUNK] += terms.sum(axis=1)
            scale[lo : lo + _CHUNK] += np.abs(terms).max(axis=1, initial=0.0) * max(len(idx), 1) ** 0.5
    return total, EPS * scale


# ---------------------------------------------------------------- contours

@dataclass
class _Path:
    """Parametrised path s(t), t >= 0, with s(-t) = conj(s(t))."""

    sigma: float
    kind: str

    def point(self, t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        if self.kind == "vertical":
            return self.sigma + 1j * t, np.full(t.shape, 1j, dtype=np.complex128)
        s = self.sigma + (np.cosh(t) - 1.0) + 1j * t
        ds = np.sinh(t) + 1j
        return s, ds


def _contour_truncation(params: MeijerGParams, path: _Path, logz_range: tuple[float, float], step: float) -> float:
    """Smallest t beyond which the integrand is below 1e-17 of its peak for every z in range."""
    t_cap = 4000.0 if path.kind == "vertical" else 12.0
    block = np.arange(0.0, t_cap + step, step)
    s, ds = path.point(block)
    la = _log_integrand(params, s).real + np.log(np.abs(ds))
    t_end = None
    for lz in logz_range:
        mag = la + s.real * lz
        mag = np.where(np.isnan(mag), -np.inf, mag)
        peak = np.max(mag)
        below = mag < peak - 39.0
        # first index after which every sample stays below the threshold
        tail = np.flatnonzero(~below)
        if tail.size == 0:
            continue
        k = tail[-1] + 1
        if k >= block.size:
            raise ContourError(f"integrand does not decay along the {path.kind} contour before t={t_cap}")
        t_end = max(t_end or 0.0, block[k])
    if t_end is None:
        t_end = step
    return float(t_end) + 2.0 * step


def _contour(params: MeijerGParams, z: np.ndarray, sigma: float | None, tol: float) -> np.ndarray:
    if params.decay_rate > 0:
        kind = "vertical"
    elif params.n == 0:
        kind = "hairpin"
    else:
        raise ContourError("no admissible contour for this parameter set")
    lo, hi = params.pole_band()
    f = _factors(params)
    if sigma is None and kind == "vertical" and not (f.plus or f.den_minus or f.den_plus):
        # one contour per saddle abscissa, shared by all z that select it
        sig = np.array([_saddle_sigma(params, lz, hi) for lz in np.log(z)])
        out = np.empty(z.size)
        for v in np.unique(sig):
            sel = sig == v
            out[sel] = _contour(params, z[sel], float(v), tol)
        return out
    if sigma is None:
        sigma = params.default_sigma()
    elif not lo < sigma < hi:
        raise ContourError(f"sigma={sigma} outside the admissible band ({lo}, {hi})")
    path = _Path(float(sigma), kind)
    logz = np.log(z)
    t_max = _contour_truncation(params, path, (float(logz.min()), float(logz.max())), 0.25)

    # G = (1/pi) Im int_0^inf F(s(t)) s'(t) dt, with F = Gamma ratio * z^s
    def level_sum(t: np.ndarray, weights: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        s, ds = path.point(t)
        log_amp = _log_integrand(params, s) + np.log(ds * weights)
        out = np.zeros(z.size)
        mag = np.zeros(z.size)
        for a in range(0, z.size, _CHUNK):
            lz = logz[a : a + _CHUNK]
            terms = np.exp(np.outer(lz, s) + log_amp[None, :])
            out[a : a + _CHUNK] = terms.sum(axis=1).imag
            mag[a : a + _CHUNK] = np.abs(terms).sum(axis=1)
        return out, mag

    h = 0.25
    n0 = int(math.ceil(t_max / h))
    t = np.arange(n0 + 1) * h
    w = np.ones(n0 + 1)
    w[0] = 0.5
    acc, mag = level_sum(t, w)
    value = h * acc / math.pi
    for _ in range(9):
        h *= 0.5
        t_new = (2 * np.arange(n0) + 1) * h
        n0 *= 2
        new, mag_new = level_sum(t_new, np.ones(n0 // 2))
        acc = acc + new
        mag = mag + mag_new
        refined = h * acc / math.pi
        scale = h * mag / math.pi
        if np.all(np.abs(refined - value) <= tol * np.maximum(scale, 1e-300)):
            return refined
        value = refined
    raise ContourError("trapezoid refinement did not converge")


# ---------------------------------------------------------------- public evaluation

def _bessel_order(params: MeijerGParams) -> float | None:
    if params.indices != (1, 0, 0, 2):
        return None
    order = params.b[0] - params.b[1]
    if order >= -1.0 or abs(order - round(order)) < 1e-14:
        return order
    return None


def select_method(params: MeijerGParams) -> str:
    """Evaluation path used by default: 'bessel', 'series' or 'contour'."""
    if _bessel_order(params) is not None:
        return "bessel"
    if params.resonant:
        return "contour"
    return "series"


def meijer_g(params: MeijerGParams, z, *, method: str = "auto", sigma: float | None = None, tol: float = 1e-13):
    """Meijer G-function G^{m,n}_{p,q}(a; b | z) for real z > 0.

    Parameters
    ----------
    params : MeijerGParams
    z : float or array_like
        Positive arguments, at most 1e6.
    method : {'auto', 'series', 'contour', 'bessel'}
        'auto' uses the closed Bessel form when available, the residue series
        when the parameters are non-resonant and cancellation is mild, and a
        Mellin-Barnes contour otherwise.
    sigma : float, optional
        Abscissa of the vertical contour; must lie inside the pole band.
    tol : float
        Relative convergence target of the trapezoid refinement.

    Raises
    ------
    ContourError
        If the contour tail does not decay or refinement fails.
    """
    za = np.asarray(z, dtype=np.float64)
    flat = za.ravel()
    if np.any(~np.isfinite(flat)) or np.any(flat <= 0.0):
        raise DomainError("meijer_g requires finite z > 0")
    if np.any(flat > 1e6):
        raise DomainError("meijer_g requires z <= 1e6")
    if method == "auto":
        method = select_method(params)
        auto = True
    else:
        auto = False
    if flat.size == 0:
        out = flat.copy()
    elif method == "bessel":
        order = _bessel_order(params)
        if order is None:
            raise UnsupportedParamsError("closed Bessel form needs class (1,0,0,2)")
        if order < -1.0:
            k = int(round(-order))
            jv = (-1.0) ** k * bessel_j(float(k), 2.0 * np.sqrt(flat))
        else:
            jv = bessel_j(order, 2.0 * np.sqrt(flat))
        out = flat ** (0.5 * (params.b[0] + params.b[1])) * jv
    elif method == "series":
        if params.resonant:
            raise UnsupportedParamsError("residue series requires non-resonant lower parameters")
        out, loss = _series(params, flat)
        if auto and params.decay_rate > 0:
            bad = loss > _SERIES_LOSS * np.maximum(1.0, np.abs(out))
            if np.any(bad):
                out[bad] = _contour(params, flat[bad], sigma, tol)
    elif method == "contour":
        out = _contour(params, flat, sigma, tol)
    else:
        raise ValueError(f"unknown method {method!r}")
    if np.ndim(za) == 0:
        return float(out[0])
    return out.reshape(za.shape)


# ---------------------------------------------------------------- identities

class IdentityReport(NamedTuple):
    """Absolute residuals of the contiguous and differential relations at one z.

    ``interchange`` is NaN when b_q - b_1 is not an integer (relation not applicable).
    """

    raise_index: float
    interchange: float
    absorb: float
    ode: float

    def max(self) -> float:
        return max(v for v in self if not math.isnan(v))


def _fornberg(order: int, offsets: np.ndarray) -> np.ndarray:
    """Finite-difference weights at 0 for derivatives 0..order on the given offsets."""
    n = offsets.size
    c = np.zeros((order + 1, n))
    c1 = 1.0
    c4 = offsets[0]
    c[0, 0] = 1.0
    for i in range(1, n):
        mn = min(i, order)
        c2 = 1.0
        c5 = c4
        c4 = offsets[i]
        for j in range(i):
            c3 = offsets[i] - offsets[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[k, i] = c1 * (k * c[k - 1, i - 1] - c5 * c[k, i - 1]) / c2
                c[0, i] = -c1 * c5 * c[0, i - 1] / c2
            for k in range(mn, 0, -1):
                c[k, j] = (c4 * c[k, j] - k * c[k - 1, j]) / c3
            c[0, j] = c4 * c[0, j] / c3
        c1 = c2
    return c


def _theta_derivatives(g: Callable[[np.ndarray], np.ndarray], z: float, order: int) -> np.ndarray:
    """[theta^r g](z) for r = 0..order with theta = z d/dz, by central differences in log z."""
    out = np.empty(order + 1)
    out[0] = float(g(np.array([z]))[0])
    for r in range(1, order + 1):
        h = 0.04 + 0.015 * r
        offs = np.arange(-6, 7) * h
        w = _fornberg(r, offs)[r]
        out[r] = float(w @ g(z * np.exp(offs)))
    return out


def _poly_from_roots(roots: Sequence[float]) -> np.ndarray:
    """Ascending coefficients of prod (theta - root)."""
    coef = np.array([1.0])
    for r in roots:
        coef = np.concatenate([[0.0], coef]) - r * np.concatenate([coef, [0.0]])
    return coef


def meijer_identity_suite(params: MeijerGParams, z: float, *, shift: float = 0.37) -> IdentityReport:
    """Residuals of the standard Meijer-G relations at a single z in (0.1, 10).

    * raise_index: (-theta + b_1) G(b_1, ...) - G(b_1 + 1, ...)
    * interchange: G(..., b_1, ..., b_q) - (-1)^{b_q - b_1} G(..., b_q, ..., b_1)
    * absorb: z^alpha G(a; b) - G(a + alpha; b + alpha)
    * ode: the generalised hypergeometric differential equation
    """
    z = float(z)
    if not 0.1 <= z <= 10.0:
        raise DomainError("identity checks are calibrated for z in [0.1, 10]")
    m, n, p, q = params.indices

    def g_of(pr):
        return lambda x: np.atleast_1d(meijer_g(pr, x))

    order = max(p, q)
    th = _theta_derivatives(g_of(params), z, order)
    g0 = th[0]

    raised = MeijerGParams(m, n, p, q, params.a, (params.b[0] + 1.0,) + params.b[1:])
    raise_res = abs(-th[1] + params.b[0] * g0 - meijer_g(raised, z))

    diff = params.b[-1] - params.b[0]
    if q >= 2 and abs(diff - round(diff)) < 1e-12:
        swapped = list(params.b)
        swapped[0], swapped[-1] = swapped[-1], swapped[0]
        other = MeijerGParams(m, n, p, q, params.a, swapped)
        inter_res = abs(g0 - (-1.0) ** round(diff) * meijer_g(other, z))
    else:
        inter_res = float("nan")

    absorb_res = abs(z ** shift * g0 - meijer_g(params.shifted(shift), z))

    left = _poly_from_roots([aj - 1.0 for aj in params.a])
    right = _poly_from_roots(params.b)
    sgn = (-1.0) ** (p - m - n)
    ode_res = abs(sgn * z * (left @ th[: left.size]) - right @ th[: right.size])
    return IdentityReport(float(raise_res), float(inter_res), float(absorb_res), float(ode_res))


# ---------------------------------------------------------------- Narain pair

@dataclass(frozen=True)
class NarainPairSpec:
    """Kernels k(s, y) and h(y, s) of a Narain transform pair.

    forward:  k(s, y) = 2 gamma (sy)^{gamma - 1/2} G^{m,p}_{p+q,m+n}(a, b; c, d | (sy)^{2 gamma})
    inverse:  h(y, s) = 2 gamma (ys)^{gamma - 1/2} G^{n,q}_{p+q,m+n}(-b, -a; -d, -c | (ys)^{2 gamma})

    Construction checks that the inverse parameters are the negated and
    reordered forward parameters and that sum(a) + sum(b) = sum(c) + sum(d).
    """

    gamma: float
    forward_params: MeijerGParams
    inverse_params: MeijerGParams

    def __post_init__(self):
        if not self.gamma > 0:
            raise NarainConditionError("gamma must be positive")
        a, b, c, d = self.lists
        expected = _inverse_params(a, b, c, d)
        got = self.inverse_params
        if got.indices != expected.indices or not (
            np.allclose(got.a, expected.a, rtol=0, atol=1e-14) and np.allclose(got.b, expected.b, rtol=0, atol=1e-14)
        ):
            raise NarainConditionError("inverse parameters must be the negated, reordered forward parameters")
        imbalance = sum(a) + sum(b) - sum(c) - sum(d)
        if abs(imbalance) > 1e-12:
            raise NarainConditionError(f"parameter sums differ by {imbalance:.3g}; sum(a)+sum(b) must equal sum(c)+sum(d)")

    @classmethod
    def from_lists(cls, gamma: float, a: Sequence[float], b: Sequence[float], c: Sequence[float], d: Sequence[float]):
        """Build the pair from the four parameter lists."""
        forward = MeijerGParams(len(c), len(a), len(a) + len(b), len(c) + len(d), tuple(a) + tuple(b), tuple(c) + tuple(d))
        return cls(float(gamma), forward, _inverse_params(a, b, c, d))

    @property
    def lists(self) -> tuple[tuple, tuple, tuple, tuple]:
        f = self.forward_params
        return f.a[: f.n], f.a[f.n :], f.b[: f.m], f.b[f.m :]


def _inverse_params(a, b, c, d) -> MeijerGParams:
    upper = tuple(-v for v in b) + tuple(-v for v in a)
    lower = tuple(-v for v in d) + tuple(-v for v in c)
    return MeijerGParams(len(d), len(b), len(a) + len(b), len(c) + len(d), upper, lower)


def _narain_kernel(params: MeijerGParams, gamma: float, x: np.ndarray) -> np.ndarray:
    g = meijer_g(params, x ** (2.0 * gamma))
    return 2.0 * gamma * x ** (gamma - 0.5) * g


def narain_kernels(spec: NarainPairSpec, s, y) -> tuple[np.ndarray, np.ndarray]:
    """Values k(s, y) and h(y, s) on the outer grid of ``s`` and ``y``."""
    x = np.multiply.outer(np.asarray(s, float), np.asarray(y, float))
    return _narain_kernel(spec.forward_params, spec.gamma, x), _narain_kernel(spec.inverse_params, spec.gamma, x)


class TransformResult(NamedTuple):
    """Quadrature value and a crude truncation estimate |kernel * f| * radius at the cut."""

    value: np.ndarray | float
    truncation: np.ndarray | float


def _radial_nodes(rule: QuadratureRule, radius: float, panels: int, power: float):
    u, wu = rule.composite(np.linspace(0.0, 1.0, panels + 1))
    y = radius * u ** power
    wy = radius * power * u ** (power - 1.0) * wu
    return y, wy


def _transform(params, gamma, fun, points, rule, radius, panels, power):
    pts = np.asarray(points, dtype=np.float64)
    if np.any(pts <= 0):
        raise DomainError("transform arguments must be positive")
    if not radius > 0:
        raise DomainError("truncation radius must be positive")
    y, wy = _radial_nodes(rule, radius, panels, power)
    fy = np.asarray(fun(y), dtype=np.float64) * np.ones_like(y)
    live = fy != 0.0
    flat = pts.ravel()
    value = np.zeros(flat.size)
    if np.any(live):
        ker = _narain_kernel(params, gamma, np.multiply.outer(flat, y[live]))
        value = ker @ (wy[live] * fy[live])
    f_end = float(np.asarray(fun(np.array([radius])), dtype=np.float64).ravel()[0])
    if f_end != 0.0:
        k_end = _narain_kernel(params, gamma, flat * radius)
        trunc = np.abs(k_end * f_end) * radius
    else:
        trunc = np.zeros(flat.size)
    if np.ndim(pts) == 0:
        return TransformResult(float(value[0]), float(trunc[0]))
    return TransformResult(value.reshape(pts.shape), trunc.reshape(pts.shape))


def narain_forward(
    spec: NarainPairSpec,
    f: Callable[[np.ndarray], np.ndarray],
    s,
    rule: QuadratureRule,
    *,
    radius: float,
    panels: int = 4,
    power: float = 2.0,
) -> TransformResult:
    """g(s) = int_0^R k(s, y) f(y) dy by Gauss-Legendre in u with y = R u^power.

    ``f`` must accept a numpy array. The substitution clusters nodes near
    y = 0 where the kernels carry power-type behaviour.
    """
    return _transform(spec.forward_params, spec.gamma, f, s, rule, radius, panels, power)


def narain_inverse(
    spec: NarainPairSpec,
    g: Callable[[np.ndarray], np.ndarray],
    y,
    rule: QuadratureRule,
    *,
    radius: float,
    panels: int = 4,
    power: float = 2.0,
) -> TransformResult:
    """f(y) = int_0^R h(y, s) g(s) ds; mirror of :func:`narain_forward`."""
    return _transform(spec.inverse_params, spec.gamma, g, y, rule, radius, panels, power)
