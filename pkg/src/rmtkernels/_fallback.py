"""Pure numpy implementations of the compiled kernels.

The algorithms mirror ``_core.pyx`` step by step; only the loop structure
differs (vectorised over the independent axis where that is natural).
"""

from __future__ import annotations

import math

import numpy as np

HALF_LOG_2PI = 0.91893853320467274178
STIRLING_RADIUS = 15.0
STIRLING_C = np.array(
    [
        1.0 / 12.0,
        -1.0 / 360.0,
        1.0 / 1260.0,
        -1.0 / 1680.0,
        1.0 / 1188.0,
        -691.0 / 360360.0,
        1.0 / 156.0,
        -3617.0 / 122400.0,
        43867.0 / 244188.0,
        -174611.0 / 125400.0,
    ]
)
EPS = np.finfo(float).eps


def loggamma_array(z):
    """Principal complex log-gamma of an array; returns (values, pole_mask)."""
    z = np.ascontiguousarray(z, dtype=np.complex128).ravel()
    poles = (z.imag == 0.0) & (z.real <= 0.0) & (z.real == np.floor(z.real))
    zz = np.where(poles, 1.0 + 0.0j, z)
    need = (zz.real < 0.0) | (np.abs(zz) < STIRLING_RADIUS)
    shift = np.where(need, np.maximum(np.ceil(STIRLING_RADIUS - zz.real), 0.0), 0.0).astype(np.int64)
    acc = np.zeros_like(zz)
    for k in range(int(shift.max(initial=0))):
        live = shift > k
        acc[live] += np.log(zz[live] + k)
    w = zz + shift
    winv = 1.0 / w
    w2 = winv * winv
    series = np.full_like(w, STIRLING_C[-1])
    for c in STIRLING_C[-2::-1]:
        series = c + w2 * series
    out = (w - 0.5) * np.log(w) - w + HALF_LOG_2PI + winv * series - acc
    out[poles] = np.nan
    return out, poles


def laguerre_table(nmax: int, alpha: float, x, log_gamma_alpha1: float):
    """Orthonormal Laguerre functions psi_k(x), k < nmax, by scaled recurrence."""
    x = np.ascontiguousarray(x, dtype=np.float64).ravel()
    m = x.size
    out = np.zeros((nmax, m))
    zero = x == 0.0
    with np.errstate(divide="ignore"):
        scale = np.where(zero, 0.0, 0.5 * alpha * np.log(np.where(zero, 1.0, x)) - 0.5 * x - 0.5 * log_gamma_alpha1)
    prev = np.zeros(m)
    cur = np.ones(m)
    if alpha > 0.0:
        cur[zero] = 0.0
    overflow = False
    for k in range(nmax):
        mag = np.abs(cur)
        nz = mag > 0.0
        big = np.full(m, -np.inf)
        big[nz] = scale[nz] + np.log(mag[nz])
        if np.any(big > 709.0):
            overflow = True
        with np.errstate(over="ignore"):
            out[k] = np.where(big > -745.0, np.sign(cur) * np.exp(np.minimum(big, 710.0)), 0.0)
        nxt = ((2.0 * k + alpha + 1.0 - x) * cur - math.sqrt(k * (k + alpha)) * prev) / math.sqrt((k + 1.0) * (k + 1.0 + alpha))
        prev, cur = cur, nxt
        mag = np.abs(cur)
        rescale = (mag > 1e150) | ((mag < 1e-150) & (mag > 0.0))
        if np.any(rescale):
            f = mag[rescale]
            prev[rescale] /= f
            cur[rescale] /= f
            scale[rescale] += np.log(f)
    if alpha < 0.0 and np.any(zero):
        out[:, zero] = np.inf
    return out, overflow


def householder_tridiagonal(a):
    """Reduce a complex Hermitian matrix (lower triangle) to real tridiagonal form."""
    a = np.tril(np.array(a, dtype=np.complex128, copy=True))
    a = a + np.tril(a, -1).conj().T
    n = a.shape[0]
    d = np.empty(n)
    e = np.zeros(max(n - 1, 0))
    for i in range(n - 2):
        x = a[i + 1 :, i]
        alpha = x[0]
        xnorm2 = float(np.vdot(x[1:], x[1:]).real)
        d[i] = a[i, i].real
        if xnorm2 == 0.0 and alpha.imag == 0.0:
            e[i] = abs(alpha.real)
            continue
        beta = -math.copysign(math.sqrt(abs(alpha) ** 2 + xnorm2), alpha.real)
        tau = complex((beta - alpha.real) / beta, -alpha.imag / beta)
        v = np.empty(n - i - 1, dtype=np.complex128)
        v[0] = 1.0
        v[1:] = x[1:] / (alpha - beta)
        e[i] = abs(beta)
        sub = a[i + 1 :, i + 1 :]
        w = tau * (sub @ v)
        w += (-0.5 * tau * np.vdot(w, v)) * v
        sub -= np.outer(v, w.conj()) + np.outer(w, v.conj())
        a[i + 1 :, i + 1 :] = sub
    if n >= 2:
        e[n - 2] = abs(a[n - 1, n - 2])
        d[n - 2] = a[n - 2, n - 2].real
    if n >= 1:
        d[n - 1] = a[n - 1, n - 1].real
    return d, e


def tridiagonal_eigenvalues(diag, offdiag, max_iter: int = 60):
    """Eigenvalues of a symmetric tridiagonal matrix by implicit QL with Wilkinson shifts."""
    d = [float(v) for v in diag]
    n = len(d)
    e = [float(v) for v in offdiag][: max(n - 1, 0)] + [0.0]
    failed = False
    for l in range(n):
        it = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= EPS * dd:
                    break
                m += 1
            if m == l:
                break
            if it == max_iter:
                failed = True
                break
            it += 1
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + math.copysign(r, g))
            s = c = 1.0
            p = 0.0
            broke = False
            for i in range(m - 1, l - 1, -1):
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    broke = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
            if broke:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    return np.sort(np.array(d, dtype=np.float64)), failed
