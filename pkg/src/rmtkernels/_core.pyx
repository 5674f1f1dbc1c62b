# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False, nonecheck=False
"""Compiled hot kernels.

Every routine here has a numpy twin in ``_fallback`` with the same signature
and the same algorithm, so either backend can be selected at import time.
"""
import numpy as np

from libc.math cimport log, exp, sqrt, fabs, atan2, hypot, floor, ceil, copysign, NAN, INFINITY

cdef double HALF_LOG_2PI = 0.91893853320467274178
cdef double STIRLING_RADIUS = 15.0
cdef double[10] STIRLING_C = [
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


cdef inline double complex _clog(double complex z) nogil:
    return log(hypot(z.real, z.imag)) + 1j * atan2(z.imag, z.real)


cdef double complex _log_rising(double complex z, int n) nogil:
    """sum_{k<n} log(z + k) from one running product.

    For Im z != 0 every factor turns the product the same way by less than
    pi, so each crossing of the negative real axis adds one turn. Real
    negative factors each contribute +pi, as log(z + k) does once the
    shift has turned a signed zero into +0.
    """
    cdef double complex p = 1.0, q
    cdef double logmag = 0.0, mag, ph
    cdef int k, turns = 0, negatives = 0
    for k in range(n):
        q = p * (z + k)
        if z.imag > 0.0:
            if p.imag >= 0.0 and q.imag < 0.0:
                turns += 1
        elif z.imag < 0.0:
            if p.imag <= 0.0 and q.imag > 0.0:
                turns -= 1
        elif z.real + k < 0.0:
            negatives += 1
        p = q
        mag = fabs(p.real) + fabs(p.imag)
        if mag > 1e150 or mag < 1e-150:
            logmag += log(mag)
            p = p / mag
    if z.imag == 0.0:
        ph = negatives * 3.14159265358979323846
        return logmag + log(fabs(p.real)) + 1j * ph
    ph = atan2(p.imag, p.real) + turns * 6.28318530717958647692
    return logmag + log(hypot(p.real, p.imag)) + 1j * ph


cdef double complex _loggamma(double complex z, int* pole) nogil:
    cdef double complex acc = 0.0, w, winv, w2, series
    cdef int k, n = 0
    cdef double re = z.real
    if z.imag == 0.0 and re <= 0.0 and re == floor(re):
        pole[0] = 1
        return NAN
    if re < 0.0 or hypot(z.real, z.imag) < STIRLING_RADIUS:
        n = <int>ceil(STIRLING_RADIUS - re)
        if n < 0:
            n = 0
    if n > 0:
        acc = _log_rising(z, n)
    w = z + n
    winv = 1.0 / w
    w2 = winv * winv
    series = STIRLING_C[9]
    for k in range(8, -1, -1):
        series = STIRLING_C[k] + w2 * series
    return (w - 0.5) * _clog(w) - w + HALF_LOG_2PI + winv * series - acc


def loggamma_array(z):
    """Principal complex log-gamma of a complex128 array; returns (values, pole_mask)."""
    cdef double complex[::1] zin = np.ascontiguousarray(z, dtype=np.complex128).ravel()
    cdef Py_ssize_t i, m = zin.shape[0]
    out = np.empty(m, dtype=np.complex128)
    poles = np.zeros(m, dtype=np.bool_)
    cdef double complex[::1] o = out
    cdef unsigned char[::1] pmask = poles.view(np.uint8)
    cdef int pole
    with nogil:
        for i in range(m):
            pole = 0
            o[i] = _loggamma(zin[i], &pole)
            pmask[i] = pole
    return out, poles


def laguerre_table(int nmax, double alpha, x, double log_gamma_alpha1):
    """Orthonormal Laguerre functions psi_k(x), k < nmax, by scaled recurrence.

    Returns an array of shape (nmax, len(x)) and a flag set when a value
    would exceed the double range.
    """
    cdef double[::1] xs = np.ascontiguousarray(x, dtype=np.float64).ravel()
    cdef Py_ssize_t m = xs.shape[0], i
    cdef int k
    out = np.zeros((nmax, m), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef double xi, scale, cur, prev, nxt, big, mag
    cdef int overflow = 0
    with nogil:
        for i in range(m):
            xi = xs[i]
            if xi == 0.0:
                if alpha == 0.0:
                    scale = 0.0
                elif alpha > 0.0:
                    continue
                else:
                    for k in range(nmax):
                        o[k, i] = INFINITY
                    continue
            else:
                scale = 0.5 * alpha * log(xi) - 0.5 * xi - 0.5 * log_gamma_alpha1
            prev = 0.0
            cur = 1.0
            for k in range(nmax):
                mag = fabs(cur)
                if mag > 0.0:
                    big = scale + log(mag)
                    if big > 709.0:
                        overflow = 1
                        o[k, i] = copysign(INFINITY, cur)
                    elif big > -745.0:
                        o[k, i] = copysign(exp(big), cur)
                nxt = ((2.0 * k + alpha + 1.0 - xi) * cur - sqrt(k * (k + alpha)) * prev) / sqrt((k + 1.0) * (k + 1.0 + alpha))
                prev = cur
                cur = nxt
                mag = fabs(cur)
                if mag > 1e150 or (mag < 1e-150 and mag > 0.0):
                    big = log(mag)
                    prev = prev / mag
                    cur = cur / mag
                    scale = scale + big
    return out, bool(overflow)


def householder_tridiagonal(a):
    """Reduce a complex Hermitian matrix to real symmetric tridiagonal form.

    Only the lower triangle of ``a`` is referenced. Returns (diagonal,
    |off-diagonal|); a diagonal unitary similarity makes the off-diagonal
    real and non-negative without changing the spectrum.
    """
    # row j of (re, im) holds conj(A[:, j]) so the lower-triangle columns are contiguous
    at = np.asarray(a, dtype=np.complex128).T
    cdef double[:, ::1] re = np.ascontiguousarray(at.real)
    cdef double[:, ::1] im = np.ascontiguousarray(-at.imag)
    cdef Py_ssize_t n = re.shape[0], i, j, r
    d_arr = np.empty(n, dtype=np.float64)
    e_arr = np.zeros(max(n - 1, 0), dtype=np.float64)
    cdef double[::1] d = d_arr
    cdef double[::1] e = e_arr
    cdef double[::1] vr = np.zeros(n)
    cdef double[::1] vi = np.zeros(n)
    cdef double[::1] wr = np.zeros(n)
    cdef double[::1] wi = np.zeros(n)
    cdef double xnorm2, alphr, alphi, beta, taur, taui, sr, si, den
    cdef double t1r, t1i, t2r, t2i, mr, mi, dr, di, ar, ai, ajj
    if n == 0:
        return d_arr, e_arr
    with nogil:
        for i in range(n - 2):
            alphr = re[i, i + 1]
            alphi = -im[i, i + 1]
            xnorm2 = 0.0
            for r in range(i + 2, n):
                xnorm2 = xnorm2 + re[i, r] * re[i, r] + im[i, r] * im[i, r]
            d[i] = re[i, i]
            if xnorm2 == 0.0 and alphi == 0.0:
                e[i] = fabs(alphr)
                continue
            beta = -copysign(sqrt(alphr * alphr + alphi * alphi + xnorm2), alphr)
            taur = (beta - alphr) / beta
            taui = -alphi / beta
            # scal = 1 / (alpha - beta)
            den = (alphr - beta) * (alphr - beta) + alphi * alphi
            sr = (alphr - beta) / den
            si = -alphi / den
            vr[i + 1] = 1.0
            vi[i + 1] = 0.0
            for r in range(i + 2, n):
                # v = scal * conj(m[i, r]) = scal * A[r, i]
                mr = re[i, r]
                mi = -im[i, r]
                vr[r] = sr * mr - si * mi
                vi[r] = sr * mi + si * mr
            e[i] = fabs(beta)
            for r in range(i + 1, n):
                wr[r] = 0.0
                wi[r] = 0.0
            # w = tau * A22 v with A[r, j] = conj(m[j, r]) for r > j
            for j in range(i + 1, n):
                t1r = taur * vr[j] - taui * vi[j]
                t1i = taur * vi[j] + taui * vr[j]
                t2r = 0.0
                t2i = 0.0
                ajj = re[j, j]
                wr[j] = wr[j] + t1r * ajj
                wi[j] = wi[j] + t1i * ajj
                for r in range(j + 1, n):
                    mr = re[j, r]
                    mi = im[j, r]
                    wr[r] = wr[r] + t1r * mr + t1i * mi
                    wi[r] = wi[r] + t1i * mr - t1r * mi
                    t2r = t2r + mr * vr[r] - mi * vi[r]
                    t2i = t2i + mr * vi[r] + mi * vr[r]
                wr[j] = wr[j] + taur * t2r - taui * t2i
                wi[j] = wi[j] + taur * t2i + taui * t2r
            # alpha = -tau/2 * (w^H v)
            dr = 0.0
            di = 0.0
            for r in range(i + 1, n):
                dr = dr + wr[r] * vr[r] + wi[r] * vi[r]
                di = di + wr[r] * vi[r] - wi[r] * vr[r]
            ar = -0.5 * (taur * dr - taui * di)
            ai = -0.5 * (taur * di + taui * dr)
            for r in range(i + 1, n):
                wr[r] = wr[r] + ar * vr[r] - ai * vi[r]
                wi[r] = wi[r] + ar * vi[r] + ai * vr[r]
            # A[r, j] -= v[r] conj(w[j]) + w[r] conj(v[j]); m[j, r] = conj(A[r, j])
            for j in range(i + 1, n):
                t1r = wr[j]
                t1i = -wi[j]
                t2r = vr[j]
                t2i = -vi[j]
                for r in range(j, n):
                    re[j, r] = re[j, r] - (vr[r] * t1r - vi[r] * t1i + wr[r] * t2r - wi[r] * t2i)
                    im[j, r] = im[j, r] + (vr[r] * t1i + vi[r] * t1r + wr[r] * t2i + wi[r] * t2r)
                im[j, j] = 0.0
        if n >= 2:
            e[n - 2] = hypot(re[n - 2, n - 1], im[n - 2, n - 1])
            d[n - 2] = re[n - 2, n - 2]
        d[n - 1] = re[n - 1, n - 1]
    return d_arr, e_arr


def tridiagonal_eigenvalues(diag, offdiag, int max_iter=60):
    """Eigenvalues of a real symmetric tridiagonal matrix by implicit QL with Wilkinson shifts.

    Returns the sorted eigenvalues and a flag that is True when some
    eigenvalue did not converge within ``max_iter`` sweeps.
    """
    d_arr = np.array(diag, dtype=np.float64, copy=True)
    cdef Py_ssize_t n = d_arr.shape[0]
    e_arr = np.zeros(n, dtype=np.float64)
    if n > 1:
        e_arr[: n - 1] = offdiag
    cdef double[::1] d = d_arr
    cdef double[::1] e = e_arr
    cdef Py_ssize_t l, mm, i
    cdef int it, failed = 0, broke
    cdef double dd, g, r, s, c, p, f, b
    with nogil:
        for l in range(n):
            it = 0
            while True:
                mm = l
                while mm < n - 1:
                    dd = fabs(d[mm]) + fabs(d[mm + 1])
                    if fabs(e[mm]) <= 2.220446049250313e-16 * dd:
                        break
                    mm = mm + 1
                if mm == l:
                    break
                if it == max_iter:
                    failed = 1
                    break
                it = it + 1
                g = (d[l + 1] - d[l]) / (2.0 * e[l])
                r = hypot(g, 1.0)
                g = d[mm] - d[l] + e[l] / (g + copysign(r, g))
                s = 1.0
                c = 1.0
                p = 0.0
                broke = 0
                i = mm - 1
                while i >= l:
                    f = s * e[i]
                    b = c * e[i]
                    r = hypot(f, g)
                    e[i + 1] = r
                    if r == 0.0:
                        d[i + 1] = d[i + 1] - p
                        e[mm] = 0.0
                        broke = 1
                        break
                    s = f / r
                    c = g / r
                    g = d[i + 1] - p
                    r = (d[i] - g) * s + 2.0 * c * b
                    p = s * r
                    d[i + 1] = g + p
                    g = c * r - b
                    i = i - 1
                if broke:
                    continue
                d[l] = d[l] - p
                e[l] = g
                e[mm] = 0.0
    d_arr.sort()
    return d_arr, bool(failed)
