"""Pure Python / NumPy twins of the compiled kernels in ``_core.pyx``.

Signatures and return conventions match the compiled module exactly.
"""
import math

import numpy as np

RESCALE_AT = 1e250
RESCALE_BY = 1e-250


def miller_start(nmax, t):
    """Starting order for the backward recurrence."""
    return max(int(nmax), int(math.ceil(t + 12.0 * math.sqrt(t + 1.0)))) + 50


def ive_sequence(nmax, t):
    """Return ``exp(-t) * I_n(t)`` for ``n = 0..nmax`` by Miller's algorithm."""
    nmax = int(nmax)
    out = np.zeros(nmax + 1)
    if t == 0.0:
        out[0] = 1.0
        return out
    start = miller_start(nmax, t)
    y_next, y, total = 0.0, 1.0, 0.0
    two_over_t = 2.0 / t
    for k in range(start, 0, -1):
        y_next, y = y, y_next + (two_over_t * k) * y
        if k - 1 <= nmax:
            out[k - 1] = y
        total += 2.0 * y if k > 1 else y
        if abs(y) > RESCALE_AT:
            y *= RESCALE_BY
            y_next *= RESCALE_BY
            total *= RESCALE_BY
            out[k - 1:] *= RESCALE_BY
    return out / total


def sturm_count(diag, x):
    """Number of eigenvalues below ``x`` of tridiag(1, diag, 1)."""
    count = 0
    q = 1.0
    first = True
    for d in diag:
        q = d - x if first else d - x - 1.0 / q
        first = False
        if q == 0.0:
            q = -1e-300
        if q < 0.0:
            count += 1
    return count


def sturm_largest(diag, lo, hi, maxiter=200):
    """Largest eigenvalue of tridiag(1, diag, 1) by bisection on ``[lo, hi]``."""
    diag = [float(d) for d in diag]
    n = len(diag)
    for _ in range(maxiter):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if sturm_count(diag, mid) >= n:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def _tridiag_apply(diag, x):
    y = diag * x
    y[1:] += x[:-1]
    y[:-1] += x[1:]
    return y


def power_iterate(diag, shift, x0, rq_tol, res_tol, maxiter):
    """Shifted power iteration on tridiag(1, diag, 1) + shift * I.

    Returns ``(rayleigh, vector, iterations, residual)`` with the vector
    sup-normalised.
    """
    diag = np.asarray(diag, dtype=float)
    x = np.array(x0, dtype=float)
    rq_old = 1e300
    rq = 0.0
    res = 1e300
    it = 0
    while it < maxiter:
        it += 1
        ax = _tridiag_apply(diag, x)
        rq = float(x @ ax) / float(x @ x)
        res = float(np.max(np.abs(ax - rq * x)))
        if abs(rq - rq_old) < rq_tol and res < res_tol:
            break
        rq_old = rq
        y = ax + shift * x
        x = y / np.max(np.abs(y))
    m = float(np.max(np.abs(x)))
    return rq, x / m, it, res / m


def _rhs(u, a, diff, react, left, right):
    lap = np.empty_like(u)
    lap[1:-1] = u[2:] - 2.0 * u[1:-1] + u[:-2]
    if u.size == 1:
        lap[0] = right - 2.0 * u[0] + left
    else:
        lap[0] = u[1] - 2.0 * u[0] + left
        lap[-1] = right - 2.0 * u[-1] + u[-2]
    return diff * lap + (a - react * u) * u


def rk4_lattice(u, a, diff, react, left, right, dt, nsteps):
    """Advance ``du/dt = diff * Lap(u) + (a - react * u) * u`` in place by RK4."""
    a = np.asarray(a, dtype=float)
    h2 = 0.5 * dt
    for _ in range(int(nsteps)):
        k1 = _rhs(u, a, diff, react, left, right)
        k2 = _rhs(u + h2 * k1, a, diff, react, left, right)
        k3 = _rhs(u + h2 * k2, a, diff, react, left, right)
        k4 = _rhs(u + dt * k3, a, diff, react, left, right)
        u += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
