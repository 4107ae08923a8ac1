"""Auxiliary functions of the lattice KPP dispersion relation and its critical constants.

The principal eigenvalue of the homogeneous twisted operator is
``lambda(mu) = e^mu - 1 + e^-mu`` and the associated front speed is
``c(mu) = lambda(mu) / mu``. The minimum of ``c`` is the minimal (spreading)
speed ``c*``; the intersection ``lambda(mu_hat) = lambda`` with the spectral
bound of a perturbed medium gives the maximal speed ``c_hat``.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

from .errors import ConvergenceError, DomainError

ROOT_TOL = 1e-10
MAX_ITER = 200
MU_BRACKET = (1e-6, 10.0)
L0_BRACKET = (0.1, 10.0)


def _check_positive(name, x):
    if not x > 0:
        raise DomainError(f"{name} must be positive, got {x!r}")


def lambda_of_mu(mu: float) -> float:
    """Homogeneous principal eigenvalue ``e^mu - 1 + e^-mu``."""
    _check_positive("mu", mu)
    # 2 cosh(mu) - 1, written to keep full relative accuracy near mu = 0
    return 1.0 + 4.0 * math.sinh(0.5 * mu) ** 2


def dlambda_dmu(mu: float) -> float:
    return 2.0 * math.sinh(mu)


def c_of_mu(mu: float) -> float:
    """Front speed ``lambda(mu) / mu`` attached to decay rate ``mu``."""
    return lambda_of_mu(mu) / mu


def zeta(z: float) -> float:
    """Exponent function of the heat-kernel asymptotics.

    ``sqrt(1 + z^2) + log(z / (1 + sqrt(1 + z^2)))``; strictly increasing on
    ``(0, inf)`` with ``zeta(z) / z -> 1``.
    """
    _check_positive("z", z)
    r = math.hypot(1.0, z)
    return r + math.log(z / (1.0 + r))


def dzeta(z: float) -> float:
    return math.hypot(1.0, z) / z


def g_of_z(z: float, mu: float) -> float:
    """``-1 + 2 (zeta(z) + mu) / z``, maximised at ``z = csch(mu)`` with value ``lambda(mu)``."""
    _check_positive("z", z)
    _check_positive("mu", mu)
    return -1.0 + 2.0 * (zeta(z) + mu) / z


def csch(mu: float) -> float:
    return 1.0 / math.sinh(mu)


def sigma_margin(z: float) -> float:
    """Decay margin ``1 - 2 zeta(z) / z`` used in the tail estimates."""
    return 1.0 - 2.0 * zeta(z) / z


def bracketed_newton(f, fprime, lo, hi, tol=ROOT_TOL, maxiter=MAX_ITER):
    """Root of ``f`` on ``[lo, hi]``: Newton steps kept inside a shrinking bisection bracket.

    Stops when ``|f(x)| <= tol``. Raises :class:`ConvergenceError` otherwise.
    """
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if flo * fhi > 0:
        raise DomainError(f"root not bracketed on [{lo}, {hi}]: f = ({flo}, {fhi})")
    if flo > 0:
        lo, hi = hi, lo  # orient so that f(lo) < 0 < f(hi)
    x = 0.5 * (lo + hi)
    for _ in range(maxiter):
        fx = f(x)
        if abs(fx) <= tol:
            return _polish(f, fprime, x, fx, lo, hi)
        if fx < 0:
            lo = x
        else:
            hi = x
        d = fprime(x)
        step = x - fx / d if d != 0 else None
        if step is None or not (min(lo, hi) < step < max(lo, hi)):
            step = 0.5 * (lo + hi)
        if step == x:
            break
        x = step
    fx = f(x)
    if abs(fx) <= tol:
        return x
    raise ConvergenceError(f"no root to tolerance {tol} after {maxiter} iterations", data={"x": x, "f": fx})


def _polish(f, fprime, x, fx, lo, hi, steps=3):
    """A few extra Newton steps once ``|f| <= tol``, kept only while they shrink ``|f|``."""
    for _ in range(steps):
        d = fprime(x)
        if d == 0 or fx == 0:
            break
        y = x - fx / d
        if not min(lo, hi) <= y <= max(lo, hi):
            break
        fy = f(y)
        if abs(fy) >= abs(fx):
            break
        x, fx = y, fy
    return x


def critical_mu() -> float:
    """Minimiser ``mu*`` of ``c(mu)``: root of ``mu lambda'(mu) - lambda(mu)``."""
    return bracketed_newton(
        lambda m: m * dlambda_dmu(m) - lambda_of_mu(m),
        lambda m: m * 2.0 * math.cosh(m),
        *MU_BRACKET,
    )


def zeta_zero() -> float:
    """The unique zero ``l0`` of :func:`zeta`."""
    return bracketed_newton(zeta, dzeta, *L0_BRACKET)


def mu_hat_of_lambda(lam: float) -> float:
    """Closed-form solution of ``lambda(mu) = lam``: ``arccosh((lam + 1) / 2)``."""
    if lam < 1.0:
        raise DomainError(f"spectral bound must be >= 1, got {lam!r}")
    return math.acosh(0.5 * (lam + 1.0))


def mu_of_speed(c: float, branch: str = "lower") -> float:
    """Decay rate with ``c(mu) = c``.

    ``branch="lower"`` returns the root in ``(0, mu*]`` (the one used for
    front construction), ``"upper"`` the root in ``[mu*, inf)``.
    """
    mu_s = critical_mu()
    c_s = c_of_mu(mu_s)
    if c < c_s - ROOT_TOL:
        raise DomainError(f"speed {c} is below the minimal speed {c_s}")
    if abs(c - c_s) <= ROOT_TOL:
        return mu_s

    def f(m):
        return lambda_of_mu(m) - c * m

    def fp(m):
        return dlambda_dmu(m) - c

    if branch == "lower":
        lo = 1.0 / (2.0 * c)  # lambda(mu) > 1 > c * mu below this point
        lo = min(lo, mu_s * 0.5)
        while f(lo) <= 0:
            lo *= 0.5
        return bracketed_newton(f, fp, lo, mu_s)
    if branch == "upper":
        hi = 2.0 * mu_s
        while f(hi) <= 0:
            hi *= 2.0
        return bracketed_newton(f, fp, mu_s, hi)
    raise DomainError(f"unknown branch {branch!r}")


@dataclass(frozen=True)
class DispersionSummary:
    """Critical constants for a medium with spectral bound ``lambda_hat``.

    When ``lambda_hat == 1`` the maximal speed is unbounded: ``unbounded`` is
    set, ``mu_hat`` is 0 and ``c_hat`` is ``inf``.
    """

    mu_star: float
    c_star: float
    lambda_star: float
    lambda_hat: float
    mu_hat: float
    c_hat: float
    l0: float
    unbounded: bool

    @property
    def window_exists(self) -> bool:
        """True iff ``lambda_hat < lambda*`` (then ``c_hat > c*``)."""
        return self.lambda_hat < self.lambda_star and self.c_hat > self.c_star

    @property
    def mu_hat_exceeds_mu_star(self) -> bool:
        return self.mu_hat > self.mu_star

    def as_dict(self):
        d = asdict(self)
        if self.unbounded:
            d["c_hat"] = "inf"
        return d


def solve_dispersion(lambda_hat: float) -> DispersionSummary:
    """Compute ``mu*, c*, lambda*``, ``mu_hat, c_hat`` and ``l0`` for a spectral bound."""
    if not lambda_hat >= 1.0:
        raise DomainError(f"lambda_hat must be >= 1, got {lambda_hat!r}")
    mu_s = critical_mu()
    lam_s = lambda_of_mu(mu_s)
    c_s = lam_s / mu_s
    l0 = zeta_zero()
    if lambda_hat == 1.0:
        return DispersionSummary(mu_s, c_s, lam_s, 1.0, 0.0, math.inf, l0, True)
    mu_h = mu_hat_of_lambda(lambda_hat)
    return DispersionSummary(mu_s, c_s, lam_s, lambda_hat, mu_h, c_of_mu(mu_h), l0, False)
