# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels for the sequential inner loops.

Every function here has a twin with the same signature in
:mod:`latkpp._fallback`; :mod:`latkpp._kernels` picks one at import.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs, ceil

cnp.import_array()

cdef double RESCALE_AT = 1e250
cdef double RESCALE_BY = 1e-250


def miller_start(long nmax, double t):
    """Starting order for the backward recurrence."""
    cdef long base = nmax
    cdef long tt = <long>ceil(t + 12.0 * sqrt(t + 1.0))
    if tt > base:
        base = tt
    return base + 50


def ive_sequence(long nmax, double t):
    """Return ``exp(-t) * I_n(t)`` for ``n = 0..nmax`` by Miller's algorithm."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.zeros(nmax + 1)
    cdef double[::1] o = out
    if t == 0.0:
        out[0] = 1.0
        return out
    cdef long start = miller_start(nmax, t)
    cdef double y_next = 0.0, y = 1.0, y_prev, total = 0.0
    cdef long k, i
    for k in range(start, 0, -1):
        y_prev = y_next + (2.0 * k / t) * y
        y_next = y
        y = y_prev
        # y now holds the value at order k - 1
        if k - 1 <= nmax:
            o[k - 1] = y
        if k - 1 >= 1:
            total += 2.0 * y
        else:
            total += y
        if fabs(y) > RESCALE_AT:
            y *= RESCALE_BY
            y_next *= RESCALE_BY
            total *= RESCALE_BY
            for i in range(k - 1, nmax + 1):
                o[i] *= RESCALE_BY
    for i in range(nmax + 1):
        o[i] /= total
    return out


def sturm_count(double[::1] diag, double x):
    """Number of eigenvalues below ``x`` of tridiag(1, diag, 1)."""
    cdef Py_ssize_t n = diag.shape[0], i
    cdef long count = 0
    cdef double q = diag[0] - x
    if q == 0.0:
        q = -1e-300
    if q < 0.0:
        count += 1
    for i in range(1, n):
        q = diag[i] - x - 1.0 / q
        if q == 0.0:
            q = -1e-300
        if q < 0.0:
            count += 1
    return count


def sturm_largest(double[::1] diag, double lo, double hi, int maxiter=200):
    """Largest eigenvalue of tridiag(1, diag, 1) by bisection on ``[lo, hi]``."""
    cdef Py_ssize_t n = diag.shape[0]
    cdef double mid
    cdef int it
    for it in range(maxiter):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if sturm_count(diag, mid) >= n:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def power_iterate(double[::1] diag, double shift, double[::1] x0,
                  double rq_tol, double res_tol, long maxiter):
    """Shifted power iteration on tridiag(1, diag, 1) + shift * I.

    Returns ``(rayleigh, vector, iterations, residual)`` with the vector
    sup-normalised.
    """
    cdef Py_ssize_t n = diag.shape[0], i
    cdef cnp.ndarray[cnp.float64_t, ndim=1] xa = np.array(x0, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] ya = np.empty(n)
    cdef double[::1] x = xa
    cdef double[::1] y = ya
    cdef double rq = 0.0, rq_old = 1e300, num, den, m, r, res = 1e300
    cdef long it = 0
    while it < maxiter:
        it += 1
        num = 0.0
        den = 0.0
        m = 0.0
        for i in range(n):
            r = diag[i] * x[i]
            if i > 0:
                r += x[i - 1]
            if i < n - 1:
                r += x[i + 1]
            num += x[i] * r
            den += x[i] * x[i]
            y[i] = r + shift * x[i]
        rq = num / den
        # residual of the current iterate, measured against its own Rayleigh quotient
        res = 0.0
        m = 0.0
        for i in range(n):
            r = y[i] - shift * x[i] - rq * x[i]
            if fabs(r) > res:
                res = fabs(r)
            if fabs(y[i]) > m:
                m = fabs(y[i])
        if fabs(rq - rq_old) < rq_tol and res < res_tol:
            break
        rq_old = rq
        for i in range(n):
            x[i] = y[i] / m
    m = 0.0
    for i in range(n):
        if fabs(x[i]) > m:
            m = fabs(x[i])
    for i in range(n):
        x[i] /= m
    return rq, xa, it, res / m


cdef inline void _rhs(double[::1] u, double[::1] a, double diff, double react,
                      double left, double right, double[::1] out) nogil:
    cdef Py_ssize_t n = u.shape[0], i
    cdef double um, up
    for i in range(n):
        um = u[i - 1] if i > 0 else left
        up = u[i + 1] if i < n - 1 else right
        out[i] = diff * (up - 2.0 * u[i] + um) + (a[i] - react * u[i]) * u[i]


def rk4_lattice(double[::1] u, double[::1] a, double diff, double react,
                double left, double right, double dt, long nsteps):
    """Advance ``du/dt = diff * Lap(u) + (a - react * u) * u`` in place by RK4."""
    cdef Py_ssize_t n = u.shape[0], i
    cdef double[::1] k1 = np.empty(n), k2 = np.empty(n)
    cdef double[::1] k3 = np.empty(n), k4 = np.empty(n), w = np.empty(n)
    cdef long s
    cdef double h2 = 0.5 * dt, h6 = dt / 6.0
    with nogil:
        for s in range(nsteps):
            _rhs(u, a, diff, react, left, right, k1)
            for i in range(n):
                w[i] = u[i] + h2 * k1[i]
            _rhs(w, a, diff, react, left, right, k2)
            for i in range(n):
                w[i] = u[i] + h2 * k2[i]
            _rhs(w, a, diff, react, left, right, k3)
            for i in range(n):
                w[i] = u[i] + dt * k3[i]
            _rhs(w, a, diff, react, left, right, k4)
            for i in range(n):
                u[i] += h6 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
