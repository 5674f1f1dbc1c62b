"""Finite-N correlation kernels and biorthogonal functions.

Three ensembles are covered: complex Wishart (orthonormal Laguerre
functions), products of M Ginibre matrices (Meijer-G biorthogonal pair) and
the Muttalib-Borodin ensemble with Laguerre weight (Konhauser/Carlitz pair).
Polynomial parts are held as exact rationals where the parameters allow it,
so eigen-equations can be checked at coefficient level without round-off.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence, Union

import numpy as np

from .errors import DomainError
from .macroscopic import WishartParams
from .meijer import MeijerGParams, meijer_g
from .special import gamma_sign_log, gauss_legendre, laguerre_psi_table, log_gamma_real

__all__ = [
    "EnsembleSpec",
    "WishartEnsemble",
    "ProductEnsemble",
    "MuttalibBorodinEnsemble",
    "PolynomialCoeffs",
    "wishart_kernel",
    "schrodinger_residual",
    "product_P_coeffs",
    "product_P",
    "product_Q",
    "product_Q_table",
    "product_kernel",
    "hamiltonian_residual_product",
    "mb_Z_coeffs",
    "mb_P_coeffs",
    "mb_Q",
    "mb_P",
    "mb_kernel",
    "hamiltonian_residual_mb",
    "normalization",
    "biorthogonality_gram",
    "half_line_rule",
    "kernel",
]


# ---------------------------------------------------------------- ensembles

class EnsembleSpec:
    """Common base of the three ensemble descriptions."""

    N: int


@dataclass(frozen=True)
class WishartEnsemble(EnsembleSpec):
    params: WishartParams

    @property
    def N(self) -> int:
        return self.params.N

    @property
    def alpha(self) -> int:
        return self.params.alpha


@dataclass(frozen=True)
class ProductEnsemble(EnsembleSpec):
    """Product of M Ginibre matrices of sizes (N + nu_{k-1}) x (N + nu_k), nu_0 = 0.

    ``nu`` lists nu_1..nu_M; the leading zero is implicit.
    """

    N: int
    nu: tuple[int, ...]

    def __post_init__(self):
        nu = tuple(int(v) for v in self.nu)
        if any(v != w for v, w in zip(nu, self.nu)) or any(v < 0 for v in nu) or not nu:
            raise DomainError(f"nu must be a non-empty list of integers >= 0, got {self.nu}")
        if self.N < 1:
            raise DomainError("N must be positive")
        object.__setattr__(self, "nu", nu)

    @property
    def M(self) -> int:
        return len(self.nu)


@dataclass(frozen=True)
class MuttalibBorodinEnsemble(EnsembleSpec):
    N: int
    alpha: float
    theta: int

    def __post_init__(self):
        if self.N < 1:
            raise DomainError("N must be positive")
        if not self.alpha > -1.0:
            raise DomainError(f"alpha must exceed -1, got {self.alpha}")
        if int(self.theta) != self.theta or self.theta < 1:
            raise DomainError(f"theta must be a positive integer, got {self.theta}")
        object.__setattr__(self, "theta", int(self.theta))


EnsembleSpec.Wishart = WishartEnsemble
EnsembleSpec.Product = ProductEnsemble
EnsembleSpec.MuttalibBorodin = MuttalibBorodinEnsemble

Number = Union[Fraction, float]


@dataclass(frozen=True)
class PolynomialCoeffs:
    """Ascending coefficients of a polynomial in x (``theta == 1``) or in x^theta."""

    coefficients: tuple
    theta: int = 1

    def __post_init__(self):
        if not self.coefficients or self.coefficients[-1] == 0:
            raise DomainError("leading coefficient must be nonzero")

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    @property
    def basis(self) -> str:
        return "x" if self.theta == 1 else "x^theta"

    @property
    def exact(self) -> bool:
        return all(isinstance(c, (Fraction, int)) for c in self.coefficients)

    def as_float(self) -> np.ndarray:
        return np.array([float(c) for c in self.coefficients])

    def __call__(self, x):
        xa = np.asarray(x, dtype=np.float64)
        u = xa**self.theta if self.theta != 1 else xa
        acc = np.zeros_like(u)
        for c in self.as_float()[::-1]:
            acc = acc * u + c
        return float(acc) if np.ndim(x) == 0 else acc


def _to_number(v, exact: bool) -> Number:
    if not exact:
        return float(v)
    return Fraction(v) if not isinstance(v, Fraction) else v


# ---------------------------------------------------------------- Wishart

def wishart_kernel(params: WishartParams, x, y):
    """K_N(x, y) = sum_{l<N} psi_l(x) psi_l(y) with orthonormal Laguerre functions.

    ``x`` and ``y`` broadcast against each other.
    """
    xa, ya = np.broadcast_arrays(np.asarray(x, dtype=np.float64), np.asarray(y, dtype=np.float64))
    px = laguerre_psi_table(params.N, params.alpha, xa.ravel())
    py = laguerre_psi_table(params.N, params.alpha, ya.ravel())
    out = np.einsum("ki,ki->i", px, py).reshape(xa.shape)
    return float(out) if out.ndim == 0 else out


def schrodinger_residual(k: int, alpha: float, x: float) -> float:
    """Residual of psi'' + psi'/x + (1 + 2k + alpha) psi/(2x) - alpha^2 psi/(4x^2) - psi/4.

    Derivatives by five-point central differences.
    """
    if x < 1e-3:
        raise DomainError("x must be at least 1e-3")
    h = min(1e-2 * max(1.0, x), x / 4.0)
    pts = x + h * np.arange(-2, 3)
    f = laguerre_psi_table(k + 1, alpha, pts)[k]
    d1 = (f[0] - 8.0 * f[1] + 8.0 * f[3] - f[4]) / (12.0 * h)
    d2 = (-f[0] + 16.0 * f[1] - 30.0 * f[2] + 16.0 * f[3] - f[4]) / (12.0 * h * h)
    psi = f[2]
    return float(d2 + d1 / x + (1 + 2 * k + alpha) * psi / (2 * x) - alpha**2 * psi / (4 * x * x) - psi / 4.0)


# ---------------------------------------------------------------- products of Ginibre matrices

@lru_cache(maxsize=512)
def product_P_coeffs(k: int, nu: tuple, exact: bool = True) -> PolynomialCoeffs:
    """Monomial coefficients of P_k = G^{1,0}_{1,M+1}(k+1; 0, -nu_M, ..., -nu_1 | x).

    p_j = (-1)^j / (j! (k-j)! prod_i Gamma(1 + nu_i + j)), built by the ratio
    recursion so integer nu stay exact.
    """
    nu = tuple(nu)
    exact = exact and all(float(v).is_integer() for v in nu)
    if exact:
        nu = tuple(int(v) for v in nu)
        p = Fraction(1, math.factorial(k))
        for v in nu:
            p /= math.factorial(v)
    else:
        nu = tuple(float(v) for v in nu)
        p = 1.0 / math.factorial(k)
        for v in nu:
            p *= math.exp(-math.lgamma(1.0 + v))
    coeffs = [p]
    for j in range(k):
        den = (j + 1)
        for v in nu:
            den *= (j + 1 + v)
        p = p * (j - k) / den
        coeffs.append(p)
    return PolynomialCoeffs(tuple(coeffs))


def product_P(k: int, nu: Sequence[int], x):
    """Biorthogonal polynomial P_k of the Ginibre product ensemble."""
    return product_P_coeffs(int(k), tuple(nu))(x)


@lru_cache(maxsize=256)
def _raise_expansion(k: int, top: float) -> tuple:
    """Coefficients e_j with (1 + theta)_k W_0 = sum_j e_j W_j.

    W_j carries the first lower parameter raised by j and theta = x d/dx
    acts as theta W_j = (top + j) W_j - W_{j+1}.
    """
    e = [1]
    for i in range(1, k + 1):
        new = [0] * (len(e) + 1)
        for j, ej in enumerate(e):
            new[j] += (i + top + j) * ej
            new[j + 1] -= ej
        e = new
    return tuple(e)


def product_Q_table(kmax: int, nu: Sequence[int], x) -> np.ndarray:
    """Q_0..Q_{kmax-1} at ``x``; returns an array of shape (kmax,) + x.shape.

    Q_k = G^{M,1}_{1,M+1}(-k; nu_M, ..., nu_1, 0 | x) = (1 + x d/dx)_k W_0 with
    W_0 = G^{M,1}_{1,M+1}(0; nu_M, ..., nu_1, 0 | x). The ladder operator is
    expanded into contiguous functions W_j (first lower parameter raised by
    j), each evaluated on the Mellin-Barnes contour. A direct contour
    integral of Q_k loses all accuracy for k >~ 12 through the polynomial
    factor (1 + s)_k in the integrand; the expansion keeps it bounded.
    """
    nu = tuple(nu)
    xa = np.asarray(x, dtype=np.float64)
    flat = xa.ravel()
    if np.any(flat <= 0.0):
        raise DomainError("product_Q requires x > 0")
    M = len(nu)
    rest = list(nu[-2::-1])
    top = nu[-1]
    w = np.empty((kmax, flat.size))
    for j in range(kmax):
        params = MeijerGParams.of(M, 1, [0.0], [top + j, *rest, 0.0])
        w[j] = meijer_g(params, flat)
    out = np.empty((kmax, flat.size))
    for k in range(kmax):
        e = np.array([float(v) for v in _raise_expansion(k, top)])
        out[k] = e @ w[: k + 1]
    return out.reshape((kmax,) + xa.shape)


def product_Q(k: int, nu: Sequence[int], x):
    """Biorthogonal partner Q_k of the Ginibre product ensemble."""
    out = product_Q_table(int(k) + 1, nu, x)[int(k)]
    return float(out) if np.ndim(x) == 0 else out


def hamiltonian_residual_product(k: int, nu: Sequence[int], exact: bool = True) -> float:
    """max |coefficient of (H_M - k) P_k| with H_M = x d/dx - d/dx prod_i (x d/dx + nu_i).

    On x^j the operator gives j x^j - j prod_i (j + nu_i) x^{j-1}.
    """
    p = product_P_coeffs(int(k), tuple(nu), exact).coefficients
    res = []
    for j in range(len(p)):
        r = j * p[j] - k * p[j]
        if j + 1 < len(p):
            f = j + 1
            for v in nu:
                f *= j + 1 + v
            r -= f * p[j + 1]
        res.append(abs(r))
    return float(max(res))


# ---------------------------------------------------------------- Muttalib-Borodin

def _falling(a: Number, n: int) -> Number:
    out = 1
    for i in range(n):
        out *= a - i
    return out


def _rising(a: Number, n: int) -> Number:
    out = 1
    for i in range(n):
        out *= a + i
    return out


@lru_cache(maxsize=512)
def mb_Z_coeffs(k: int, alpha, theta: int, exact: bool = True) -> PolynomialCoeffs:
    """Z_k = x^{-alpha} e^x Q_k as a polynomial in x^theta, scaled by Gamma(alpha + 1).

    The stored coefficients are z_j = (-1)^j C(k, j) Gamma(alpha+1)/Gamma(j theta + alpha + 1),
    which are rational for rational alpha; :func:`mb_Q` restores the scale.
    """
    a = _to_number(alpha, exact)
    coeffs = []
    for j in range(k + 1):
        coeffs.append((-1) ** j * math.comb(k, j) / _rising(a + 1, j * theta) if exact else
                      (-1) ** j * math.comb(k, j) / float(_rising(a + 1.0, j * theta)))
    return PolynomialCoeffs(tuple(coeffs), theta=theta)


@lru_cache(maxsize=512)
def mb_P_coeffs(k: int, alpha, theta: int, form: str = "carlitz", exact: bool = True) -> PolynomialCoeffs:
    """Monomial coefficients of the Muttalib-Borodin polynomial P_k.

    ``form='carlitz'`` (default):
        P_k = (1/k!) sum_i x^i/i! sum_j (-1)^j C(i,j) ((j + alpha + 1)/theta)_k
    ``form='printed'``:
        the same double sum with Gamma(k + (j+alpha+1)/theta)/Gamma(k) in place
        of the Pochhammer symbol; defined for k >= 1 only and not biorthogonal
        to the Konhauser functions for theta > 1.
    """
    if form == "carlitz":
        a = _to_number(alpha, exact)
        lead = [_rising((j + a + 1) / theta if exact else (j + float(alpha) + 1.0) / theta, k) for j in range(k + 1)]
    elif form == "printed":
        if k < 1:
            raise DomainError("the printed Carlitz form needs k >= 1")
        exact = False
        lead = [math.exp(math.lgamma(k + (j + alpha + 1.0) / theta) - math.lgamma(k)) for j in range(k + 1)]
    else:
        raise ValueError(f"unknown form {form!r}")
    coeffs = []
    for i in range(k + 1):
        acc = sum((-1) ** j * math.comb(i, j) * lead[j] for j in range(i + 1))
        coeffs.append(acc / (math.factorial(k) * math.factorial(i)))
    while len(coeffs) > 1 and coeffs[-1] == 0:
        coeffs.pop()
    return PolynomialCoeffs(tuple(coeffs))


def mb_Q(k: int, alpha: float, theta: int, x):
    """Konhauser function Q_k = x^alpha e^{-x} sum_j (-1)^j C(k,j) x^{j theta}/Gamma(j theta + alpha + 1)."""
    xa = np.asarray(x, dtype=np.float64)
    if np.any(xa < 0.0):
        raise DomainError("mb_Q requires x >= 0")
    z = mb_Z_coeffs(int(k), float(alpha), int(theta), exact=False)(xa)
    with np.errstate(divide="ignore"):
        logw = alpha * np.log(xa) - xa - float(log_gamma_real(alpha + 1.0))
        out = np.where((xa == 0.0) & (alpha == 0.0), z, np.exp(logw) * z)
    return float(out) if np.ndim(x) == 0 else out


def mb_P(k: int, alpha: float, theta: int, x, *, form: str = "carlitz"):
    """Carlitz polynomial P_k (unnormalized; see :func:`normalization`)."""
    return mb_P_coeffs(int(k), float(alpha), int(theta), form, exact=False)(x)


def _poly_mul_x(p: list) -> list:
    return [0] + list(p)


def _poly_d(p: list) -> list:
    return [i * p[i] for i in range(1, len(p))] or [0]


def _poly_add(*ps: list) -> list:
    n = max(len(p) for p in ps)
    return [sum(p[i] for p in ps if i < len(p)) for i in range(n)]


def _poly_scale(p: list, c) -> list:
    return [c * v for v in p]


def mb_operator(p: Sequence, alpha, theta: int) -> list:
    """Apply (d/dx x + alpha - x)[(1 - d/dx)^theta - 1] to ascending coefficients ``p``."""
    p = list(p)
    inner = [0] * len(p)
    deriv = p
    for m in range(1, theta + 1):
        deriv = _poly_d(deriv)
        inner = _poly_add(inner, _poly_scale(deriv, (-1) ** m * math.comb(theta, m)))
    return _poly_add(_poly_d(_poly_mul_x(inner)), _poly_scale(inner, alpha), _poly_scale(_poly_mul_x(inner), -1))


def _konhauser_residual(z: Sequence, k: int, alpha, theta: int) -> list:
    """Residuals, by power x^{alpha + e}, of d^theta(x^{alpha+1} Z') - x^{alpha+1} Z' + theta k x^alpha Z."""
    res: dict[int, Number] = {}
    for j, zj in enumerate(z):
        if j > 0:
            e = j * theta
            coef = zj * j * theta
            res[e - theta] = res.get(e - theta, 0) + coef * _falling(alpha + e, theta)
            res[e] = res.get(e, 0) - coef
        res[j * theta] = res.get(j * theta, 0) + theta * k * zj
    return list(res.values())


def hamiltonian_residual_mb(k: int, alpha, theta: int, exact: bool = True) -> float:
    """max |coefficient residual| of H P_k = theta k P_k and of Konhauser's Z_k equation."""
    a = _to_number(alpha, exact)
    p = mb_P_coeffs(int(k), alpha, int(theta), "carlitz", exact).coefficients
    hp = mb_operator(p, a, theta)
    r1 = [abs(v - theta * k * (p[i] if i < len(p) else 0)) for i, v in enumerate(hp)]
    z = mb_Z_coeffs(int(k), alpha, int(theta), exact).coefficients
    r2 = [abs(v) for v in _konhauser_residual(z, k, a, theta)]
    return float(max(r1 + r2))


# ---------------------------------------------------------------- normalization

@lru_cache(maxsize=256)
def _product_norms(nu: tuple, n: int) -> tuple:
    """g_k = <Q_k | P_k> from the Mellin moments of Q_k.

    int x^i Q_k dx = prod_j Gamma(nu_j + i + 1) (-i)_k, which vanishes for i < k,
    so only the leading coefficient of P_k contributes.
    """
    out = []
    for k in range(n):
        lead = product_P_coeffs(k, nu, True).coefficients[-1]
        mom = (-1) ** k * math.factorial(k)
        if all(float(v).is_integer() for v in nu):
            for v in nu:
                mom *= math.factorial(int(v) + k)
        else:
            mom *= math.exp(sum(math.lgamma(v + k + 1.0) for v in nu))
        out.append(float(lead * mom))
    return tuple(out)


@lru_cache(maxsize=256)
def _mb_norms(alpha: float, theta: int, n: int) -> tuple:
    """g_k = <Q_k | P_k> from int x^{alpha + m} e^{-x} dx = Gamma(alpha + m + 1).

    With the Gamma(alpha + 1) scale of :func:`mb_Z_coeffs` the moments are
    rising factorials, so g_k is rational for rational alpha.
    """
    a = Fraction(alpha)
    out = []
    for k in range(n):
        z = mb_Z_coeffs(k, alpha, theta, True).coefficients
        p = mb_P_coeffs(k, alpha, theta, "carlitz", True).coefficients
        g = sum(zj * pi * _rising(a + 1, j * theta + i) for j, zj in enumerate(z) for i, pi in enumerate(p))
        out.append(float(g))
    return tuple(out)


def normalization(spec: EnsembleSpec) -> np.ndarray:
    """Pair normalizations g_k = int Q_k P_k dx, k < N (ones for Wishart)."""
    if isinstance(spec, WishartEnsemble):
        return np.ones(spec.N)
    if isinstance(spec, ProductEnsemble):
        return np.array(_product_norms(spec.nu, spec.N))
    if isinstance(spec, MuttalibBorodinEnsemble):
        return np.array(_mb_norms(float(spec.alpha), spec.theta, spec.N))
    raise TypeError(f"unknown ensemble {spec!r}")


# ---------------------------------------------------------------- kernels

def _unique_eval(fun, x: np.ndarray) -> np.ndarray:
    """Evaluate a table-valued ``fun`` on the distinct entries of ``x`` only."""
    uniq, inv = np.unique(x.ravel(), return_inverse=True)
    tab = fun(uniq)
    return tab[:, inv].reshape((tab.shape[0],) + x.shape)


def _biorthogonal_kernel(qtab, ptab, g, x, y):
    xa, ya = np.broadcast_arrays(np.asarray(x, dtype=np.float64), np.asarray(y, dtype=np.float64))
    q = _unique_eval(qtab, xa)
    p = _unique_eval(ptab, ya)
    out = np.einsum("k...,k...->...", q / g.reshape((-1,) + (1,) * xa.ndim), p)
    return float(out) if np.ndim(out) == 0 else out


def product_kernel(spec: ProductEnsemble, x, y):
    """K_N(x, y) = sum_{k<N} Q_k(x) P_k(y) / g_k for the Ginibre product ensemble."""
    nu = spec.nu

    def ptab(u):
        return np.stack([product_P_coeffs(k, nu)(u) for k in range(spec.N)])

    return _biorthogonal_kernel(lambda u: product_Q_table(spec.N, nu, u), ptab, normalization(spec), x, y)


def mb_Q_table(n: int, alpha: float, theta: int, x) -> np.ndarray:
    return np.stack([mb_Q(k, alpha, theta, x) for k in range(n)])


def mb_kernel(spec: MuttalibBorodinEnsemble, x, y):
    """K_N(x, y) = sum_{k<N} Q_k(x) P_k(y) / g_k with Konhauser/Carlitz functions."""
    a, th = float(spec.alpha), spec.theta

    def ptab(u):
        return np.stack([mb_P(k, a, th, u) for k in range(spec.N)])

    return _biorthogonal_kernel(lambda u: mb_Q_table(spec.N, a, th, u), ptab, normalization(spec), x, y)


def kernel(spec: EnsembleSpec, x, y):
    """Dispatch to the finite-N kernel of ``spec``."""
    if isinstance(spec, WishartEnsemble):
        return wishart_kernel(spec.params, x, y)
    if isinstance(spec, ProductEnsemble):
        return product_kernel(spec, x, y)
    if isinstance(spec, MuttalibBorodinEnsemble):
        return mb_kernel(spec, x, y)
    raise TypeError(f"unknown ensemble {spec!r}")


# ---------------------------------------------------------------- quadrature on the half line

def half_line_rule(power: float, upper: float, *, order: int = 32, panels: int = 12):
    """Nodes and weights for int_0^inf f(x) dx through x = u^power, u in [0, upper].

    The power smooths algebraic behaviour at the origin; ``upper`` must put
    the integrand's decay below working precision.
    """
    u, w = gauss_legendre(order).composite(np.linspace(0.0, upper, panels + 1))
    return u**power, w * power * u ** (power - 1.0)


def _default_rule(spec: EnsembleSpec):
    if isinstance(spec, ProductEnsemble):
        # Q_k decays like exp(-M x^{1/M})
        return half_line_rule(float(spec.M), 70.0 / spec.M + 8.0 * math.sqrt(spec.N))
    if isinstance(spec, MuttalibBorodinEnsemble):
        return half_line_rule(2.0, math.sqrt(160.0 + 8.0 * spec.N * spec.theta))
    return half_line_rule(2.0, math.sqrt(160.0 + 8.0 * spec.N))


def biorthogonality_gram(spec: EnsembleSpec, size: int | None = None, *, rule=None) -> np.ndarray:
    """Matrix <Q_k | P_l / g_l> by numerical quadrature (orthonormality for Wishart)."""
    n = size if size is not None else spec.N
    x, w = rule if rule is not None else _default_rule(spec)
    if isinstance(spec, WishartEnsemble):
        psi = laguerre_psi_table(n, spec.alpha, x)
        return (psi * w) @ psi.T
    if isinstance(spec, ProductEnsemble):
        q = product_Q_table(n, spec.nu, x)
        p = np.stack([product_P_coeffs(k, spec.nu)(x) for k in range(n)])
        g = np.array(_product_norms(spec.nu, n))
    else:
        q = mb_Q_table(n, float(spec.alpha), spec.theta, x)
        p = np.stack([mb_P(k, float(spec.alpha), spec.theta, x) for k in range(n)])
        g = np.array(_mb_norms(float(spec.alpha), spec.theta, n))
    return (q * w) @ (p / g[:, None]).T
