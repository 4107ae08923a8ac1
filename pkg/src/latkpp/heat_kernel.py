"""Modified Bessel functions, the lattice heat kernel and its estimate function.

``kernel_h(t, j) = e^{-t} I_|j|(t)`` is the transition kernel of the
generator ``(Lf)(j) = f(j) - (f(j+1) + f(j-1)) / 2``. The semigroup of
``u -> u_{j+1} - u_j + u_{j-1}`` is ``(S(t) z)_j = e^t sum_k h_{2t}(j-k) z_k``,
which drives the Duhamel form used by :func:`mild_solution_step`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .dispersion import zeta
from .errors import DomainError, TruncationError
from .medium import MediumProfile, NonlinearityModel
from .state import LatticeState

INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


def ive_table(nmax: int, t: float) -> np.ndarray:
    """``e^{-t} I_n(t)`` for ``n = 0..nmax`` (never overflows)."""
    if t < 0:
        raise DomainError(f"t must be nonnegative, got {t!r}")
    if nmax < 0:
        raise DomainError("nmax must be nonnegative")
    return _kernels.ive_sequence(int(nmax), float(t))


def bessel_ive(order: int, t: float) -> float:
    """Exponentially scaled ``e^{-t} I_order(t)``."""
    if order < 0 or int(order) != order:
        raise DomainError(f"order must be a nonnegative integer, got {order!r}")
    return float(ive_table(int(order), t)[int(order)])


def bessel_i(order: int, t: float) -> float:
    """Modified Bessel function ``I_order(t)`` of integer order.

    Computed as ``exp(t + log(e^{-t} I_order(t)))`` so the only overflow is the
    genuine one (``t`` beyond ~710 returns ``inf``).
    """
    s = bessel_ive(order, t)
    if s == 0.0:
        return 0.0
    try:
        return math.exp(t + math.log(s))
    except OverflowError:
        return math.inf


def log_bessel_i(order: int, t: float) -> float:
    s = bessel_ive(order, t)
    return t + math.log(s) if s > 0 else -math.inf


def bessel_i_series(order: int, t: float, terms: int = 200) -> float:
    """Power series ``sum_k (t/2)^{2k+n} / (k! (k+n)!)``; a cross-check for small ``t``."""
    half = 0.5 * t
    term = half**order / math.factorial(order)
    total = term
    q = half * half
    for k in range(1, terms):
        term *= q / (k * (k + order))
        total += term
        if term < 1e-18 * total:
            break
    return total


def kernel_h(t: float, j: int) -> float:
    """Heat kernel ``h_t(j) = e^{-t} I_|j|(t)`` on the integer lattice."""
    if not t > 0:
        raise DomainError(f"t must be positive, got {t!r}")
    return bessel_ive(abs(int(j)), t)


def kernel_reach(t: float, tail: float = 1e-14) -> int:
    """Smallest ``R`` with two-sided kernel mass beyond ``|j| > R`` below ``tail``."""
    nmax = int(math.ceil(t + 40.0 * math.sqrt(t + 1.0))) + 10
    h = ive_table(nmax, t)
    # tail mass beyond R, two-sided
    rev = np.cumsum(h[::-1])[::-1]
    beyond = 2.0 * np.concatenate([rev[1:], [0.0]])
    idx = np.nonzero(beyond < tail)[0]
    return int(idx[0]) if idx.size else nmax


def kernel_array(t: float, radius: int) -> np.ndarray:
    """``h_t(j)`` for ``j = -radius..radius``."""
    if not t > 0:
        raise DomainError(f"t must be positive, got {t!r}")
    h = ive_table(radius, t)
    return np.concatenate([h[:0:-1], h])


def f_estimate(t: float, j: int) -> float:
    """Two-branch estimate ``F(t, j)`` of the heat kernel.

    ``F(t, 0) = (2 pi)^{-1/2} (1 + t^2)^{-1/4}`` and for ``j != 0``
    ``F(t, j) = (2 pi)^{-1/2} exp(-t + |j| zeta(t/|j|)) (1 + t^2 + j^2)^{-1/4}``.
    """
    if t < 0:
        raise DomainError(f"t must be nonnegative, got {t!r}")
    j = abs(int(j))
    if j == 0:
        return INV_SQRT_2PI / (1.0 + t * t) ** 0.25
    if t == 0.0:
        return 0.0
    return INV_SQRT_2PI * math.exp(-t + j * zeta(t / j)) / (1.0 + t * t + j * j) ** 0.25


def varsigma0(t: float, x: float) -> float:
    """``sqrt(t^2 + x^2) + x log(t / (x + sqrt(t^2 + x^2)))``."""
    r = math.hypot(t, x)
    return r + (x * math.log(t / (x + r)) if x > 0 else 0.0)


def bessel_bound_ratio(x: int, t: float) -> tuple[float, float, float]:
    """``(lower, middle, upper)`` of the two-sided I-Bessel bound.

    ``middle = I_x(t) sqrt(2 pi) (t^2 + x^2)^{1/4} e^{-varsigma0}``; the bound
    states ``e^{-1/(2 rho)} <= middle <= e^{1/(2 rho)}`` with ``rho = sqrt(t^2+x^2)``.
    """
    rho = math.hypot(t, x)
    log_mid = log_bessel_i(x, t) + 0.5 * math.log(2.0 * math.pi) + 0.5 * math.log(rho) - varsigma0(t, x)
    return math.exp(-0.5 / rho), math.exp(log_mid), math.exp(0.5 / rho)


def graph_kernel(t: float, r: int) -> float:
    """Heat kernel of the 2-regular graph ``K(t, r) = e^{-2t} I_r(2t)``."""
    return bessel_ive(abs(int(r)), 2.0 * t)


def graph_kernel_upper(t: float, r: int) -> float:
    """``(2t)^{-1/2} (1 + r / (2t))^{-r/2}``, an upper bound for :func:`graph_kernel`."""
    return (1.0 + r / (2.0 * t)) ** (-0.5 * r) / math.sqrt(2.0 * t)


@dataclass(frozen=True)
class KernelSample:
    t: float
    j: int
    h: float
    f_estimate: float

    @property
    def ratio(self) -> float:
        return self.h / self.f_estimate


def sample_kernel(t: float, j: int) -> KernelSample:
    return KernelSample(t, j, kernel_h(t, j), f_estimate(t, j))


def empirical_epsilon(samples) -> float:
    """Smallest ``eps`` with ``(1-eps) F <= h <= (1+eps) F`` over the samples."""
    return max(abs(s.ratio - 1.0) for s in samples)


# --- Duhamel representation -------------------------------------------------

def _semigroup_kernel(tau: float, radius: int) -> np.ndarray:
    """Convolution weights of ``S(tau)``: ``e^{tau} h_{2 tau}(j) = e^{-tau} I_j(2 tau)``."""
    if tau == 0.0:
        out = np.zeros(2 * radius + 1)
        out[radius] = 1.0
        return out
    return math.exp(tau) * kernel_array(2.0 * tau, radius)


def _ghost_profile(state: LatticeState) -> np.ndarray:
    n = len(state)
    prof = np.full(n, state.right_ghost)
    prof[: (n + 1) // 2] = state.left_ghost
    return prof


def truncation_mass(state: LatticeState, dt: float) -> float:
    """Mass of the deviation from the ghost values that :func:`mild_solution_step` would push outside the window."""
    w = np.abs(state.values - _ghost_profile(state))
    n = w.size
    radius = kernel_reach(2.0 * dt) + n
    kern = _semigroup_kernel(dt, radius)
    total = kern.sum() * w.sum()
    inside = np.convolve(w, kern, mode="full")[radius : radius + n].sum()
    return float(max(total - inside, 0.0))


def _duhamel_march(u0, a, ghosts, dt, m, linear):
    """Trapezoidal Volterra march with ``m`` panels on the ghost-extended grid."""
    n_ext = u0.size
    h = dt / m
    radius = min(kernel_reach(2.0 * dt), n_ext - 1)
    kernels = [_semigroup_kernel(l * h, radius) for l in range(m + 1)]
    left, right, pad = ghosts

    def apply(kern, v):
        # constant ghost extension beyond the padded grid
        ext = np.concatenate([np.full(radius, v[0]), v, np.full(radius, v[-1])])
        return np.convolve(ext, kern, mode="valid")

    def g(u):
        return (1.0 - (a - u)) * u

    def pin(u):
        u[:pad] = left
        u[u.size - pad :] = right
        return u

    us = [u0.copy()]
    gs = [np.zeros(n_ext) if linear else g(u0)]
    for i in range(1, m + 1):
        base = apply(kernels[i], u0)
        if not linear:
            acc = 0.5 * apply(kernels[i], gs[0])
            for k in range(1, i):
                acc += apply(kernels[i - k], gs[k])
            base = base - h * acc
        u = pin(base.copy())
        if not linear:
            for _ in range(100):
                new = pin(base - 0.5 * h * g(u))
                done = np.max(np.abs(new - u)) <= 1e-15 * max(1.0, np.max(np.abs(new)))
                u = new
                if done:
                    break
        us.append(u)
        gs.append(np.zeros(n_ext) if linear else g(u))
    return us[-1]


def mild_solution_step(
    state: LatticeState,
    t_from: float,
    t_to: float,
    medium: MediumProfile,
    model: NonlinearityModel | None = None,
    step: float = 0.025,
    linear: bool = False,
    truncation_tol: float = 1e-10,
) -> LatticeState:
    """Advance ``state`` from ``t_from`` to ``t_to`` through the Duhamel formula.

    The time integral is discretised by the composite trapezoid rule with
    panel width at most ``step`` (<= 0.05) and the results for ``step`` and
    ``step / 2`` are Richardson-combined. ``linear=True`` drops the nonlinear
    term, giving ``S(t_to - t_from) u``. Sites beyond the window are held at
    the state's ghost values.
    """
    if not t_to > t_from:
        raise DomainError("t_to must exceed t_from")
    if not 0 < step <= 0.05:
        raise DomainError("quadrature step must lie in (0, 0.05]")
    if model is not None:
        model.validate(medium)
    dt = t_to - t_from
    leak = truncation_mass(state, dt)
    if leak > truncation_tol:
        raise TruncationError(f"window too narrow: {leak:.3e} of mass leaves the window over dt={dt}")
    pad = kernel_reach(2.0 * dt)
    left, right = state.left_ghost, state.right_ghost
    u0 = np.concatenate([np.full(pad, left), state.values, np.full(pad, right)])
    a = medium.coefficients(state.j_min - pad, state.j_max + pad)
    m = max(1, int(math.ceil(dt / step)))
    coarse = _duhamel_march(u0, a, (left, right, pad), dt, m, linear)
    fine = _duhamel_march(u0, a, (left, right, pad), dt, 2 * m, linear)
    u = (4.0 * fine - coarse) / 3.0
    out = state.copy()
    out.values = u[pad : pad + len(state)]
    out.t = t_to
    return out
