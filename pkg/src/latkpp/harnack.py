"""Volume doubling, Poincare and Delta* checks on the integer lattice, plus empirical parabolic Harnack ratios.

The lattice is viewed as the 2-regular graph with unit edge weights and
vertex measure ``m(x) = 2``; balls ``B_r(x)`` contain ``2r + 1`` vertices and
have volume ``2 (2r + 1)``. The heat equation in this normalisation is
``2 u_t = u(x-1) - 2 u(x) + u(x+1)``.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import DomainError

VERTEX_MEASURE = 2.0
POINCARE_C2 = 12.0
DEFAULT_THETA = (1.0, 2.0, 3.0, 4.0)
DEFAULT_ETA = 0.5


@dataclass(frozen=True)
class GraphBallSpec:
    x0: int
    r: int

    def __post_init__(self):
        if self.r < 1 or int(self.r) != self.r:
            raise DomainError(f"radius must be a positive integer, got {self.r!r}")

    @property
    def sites(self) -> np.ndarray:
        return np.arange(self.x0 - self.r, self.x0 + self.r + 1)

    @property
    def volume(self) -> float:
        return VERTEX_MEASURE * (2 * self.r + 1)


def ball_volume(r: int) -> float:
    """``V(B_r) = sum_{x in B_r} m(x) = 2 (2r + 1)``."""
    return VERTEX_MEASURE * (2 * int(r) + 1)


def check_delta_star(alpha: float) -> bool:
    """``mu_xy >= alpha m(x)`` for every edge, i.e. ``1 >= 2 alpha``."""
    if not alpha > 0:
        raise DomainError("alpha must be positive")
    return 1.0 >= alpha * VERTEX_MEASURE


@dataclass(frozen=True)
class DoublingReport:
    holds: bool
    worst_ratio: float
    worst_r: int
    constant: float = 2.0


def check_doubling(r_max: int, constant: float = 2.0) -> DoublingReport:
    """``V(B_{2r}) / V(B_r) = (4r + 1) / (2r + 1) <= constant`` for ``r = 1..r_max``."""
    if r_max < 1:
        raise DomainError("r_max must be at least 1")
    r = np.arange(1, int(r_max) + 1)
    ratios = (4.0 * r + 1.0) / (2.0 * r + 1.0)
    k = int(np.argmax(ratios))
    return DoublingReport(bool(np.all(ratios <= constant)), float(ratios[k]), int(r[k]), constant)


@dataclass(frozen=True)
class PoincareResult:
    lhs: float
    rhs: float
    holds: bool


def check_poincare(v, r: int, constant: float = POINCARE_C2) -> PoincareResult:
    """Strong-form Poincare inequality on one ball.

    ``lhs = sum_x m(x) (v(x) - vbar)^2`` with the ``m``-weighted mean ``vbar``
    and ``rhs = C r^2 sum_{x,y in B_r} mu_xy (v(x) - v(y))^2`` where the
    double sum runs over ordered pairs, so each edge counts twice.
    """
    v = np.asarray(v, dtype=float)
    if v.size != 2 * int(r) + 1:
        raise DomainError(f"expected {2 * r + 1} values on B_{r}, got {v.size}")
    vbar = v.mean()  # m is constant, so the weighted mean is the plain mean
    lhs = float(VERTEX_MEASURE * np.sum((v - vbar) ** 2))
    rhs = float(constant * r * r * 2.0 * np.sum(np.diff(v) ** 2))
    # a tiny slack absorbs rounding when both sides vanish
    return PoincareResult(lhs, rhs, lhs <= rhs * (1 + 1e-12) + 1e-12)


# --- parabolic Harnack --------------------------------------------------------

@dataclass(frozen=True)
class CylinderSpec:
    """Cylinder ``Q = [s, s + theta4 r^2] x B_r(x0)`` with sub-cylinders over ``B_{eta r}``.

    The heat equation is solved on ``B_R(x0)``, ``R = window_factor * r``,
    with the solution held at ``exterior`` outside. The default 0 models
    data of compact support; a positive constant is exact for data that
    equal that constant beyond the window.
    """

    r: int
    x0: int = 0
    eta: float = DEFAULT_ETA
    theta: tuple = DEFAULT_THETA
    s: float = 0.0
    window_factor: int = 3
    dt: float = 0.2
    samples: int = 40
    exterior: float = 0.0

    def __post_init__(self):
        t1, t2, t3, t4 = self.theta
        if not 0 < t1 < t2 < t3 < t4:
            raise DomainError(f"need 0 < theta1 < theta2 < theta3 < theta4, got {self.theta}")
        if not 0 < self.eta < 1:
            raise DomainError("eta must lie in (0, 1)")
        if self.r < 1 or self.window_factor < 1:
            raise DomainError("radius and window factor must be positive")
        if not 0 < self.dt <= 0.2:
            raise DomainError("dt must lie in (0, 0.2]")
        if not self.exterior >= 0:
            raise DomainError("exterior value must be nonnegative")

    @property
    def R(self) -> int:
        return self.window_factor * self.r

    @property
    def window(self) -> np.ndarray:
        return np.arange(self.x0 - self.R, self.x0 + self.R + 1)

    @property
    def inner(self) -> np.ndarray:
        """Boolean mask of ``B_{eta r}(x0)`` inside the window."""
        return np.abs(self.window - self.x0) <= math.floor(self.eta * self.r)

    def times(self, a: float, b: float) -> np.ndarray:
        r2 = self.r * self.r
        return self.s + r2 * np.linspace(a, b, self.samples)


@dataclass
class HarnackReport:
    eta: float
    theta: tuple
    r: int
    ratios: list
    C_empirical: float
    excluded: int = 0
    min_value: float = 0.0
    notes: list = field(default_factory=list)

    def rows(self):
        return [(k, self.r, ratio) for k, ratio in enumerate(self.ratios)]


def heat_evolve(u0, t_span: float, dt: float = 0.2, exterior: float = 0.0) -> np.ndarray:
    """Solve ``2 u_t = Lap u`` on the window (``exterior`` outside) for time ``t_span``."""
    u = np.array(u0, dtype=float)
    if t_span <= 0:
        return u
    n = max(1, int(math.ceil(t_span / dt - 1e-9)))
    _kernels.rk4_lattice(u, np.zeros(u.size), 0.5, 0.0, exterior, exterior, t_span / n, n)
    return u


def _sample_extremes(u0, spec: CylinderSpec):
    t1, t2, t3, t4 = spec.theta
    grid = np.concatenate([spec.times(t1, t2), spec.times(t3, t4)])
    inner = spec.inner
    u = np.array(u0, dtype=float)
    t = 0.0
    sup_minus, inf_plus, min_all = -np.inf, np.inf, float(u.min())
    for k, tk in enumerate(grid):
        u = heat_evolve(u, tk - t, spec.dt, spec.exterior)
        t = tk
        min_all = min(min_all, float(u.min()))
        if k < spec.samples:
            sup_minus = max(sup_minus, float(u[inner].max()))
        else:
            inf_plus = min(inf_plus, float(u[inner].min()))
    return sup_minus, inf_plus, min_all


def harnack_ratio(initial, spec: CylinderSpec) -> HarnackReport:
    """``sup_{Q-} u / inf_{Q+} u`` for the solution started from ``initial`` at time ``s``.

    ``initial`` lives on the window ``B_R(x0)``. A trial whose infimum
    underflows to zero is excluded and counted.
    """
    initial = np.asarray(initial, dtype=float)
    if initial.size != spec.window.size:
        raise DomainError(f"initial data must have {spec.window.size} entries")
    if np.any(initial < 0):
        raise DomainError("initial data must be nonnegative")
    ball = np.abs(spec.window - spec.x0) <= spec.r
    if not np.any(initial[ball] > 0):
        raise DomainError("initial data vanish on B_r")
    sup_m, inf_p, lo = _sample_extremes(initial, spec)
    if not inf_p > 0:
        return HarnackReport(spec.eta, spec.theta, spec.r, [], math.nan, 1, lo, ["infimum underflowed"])
    ratio = sup_m / inf_p
    return HarnackReport(spec.eta, spec.theta, spec.r, [ratio], ratio, 0, lo)


def harnack_trials(initials, spec: CylinderSpec, workers: int = 1) -> HarnackReport:
    """Run :func:`harnack_ratio` on several initial data and keep the largest ratio."""
    initials = list(initials)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(lambda u: harnack_ratio(u, spec), initials))
    else:
        reports = [harnack_ratio(u, spec) for u in initials]
    ratios = [x for rep in reports for x in rep.ratios]
    excluded = sum(rep.excluded for rep in reports)
    C = max(ratios) if ratios else math.nan
    lo = min(rep.min_value for rep in reports)
    return HarnackReport(spec.eta, spec.theta, spec.r, ratios, C, excluded, lo)


def delta_initial(spec: CylinderSpec, height: float = 1.0) -> np.ndarray:
    u = np.zeros(spec.window.size)
    u[spec.R] = height
    return u


def random_initials(spec: CylinderSpec, n: int, rng: np.random.Generator) -> list:
    """Random nonnegative data: sparse nonnegative spikes plus a random smooth bump inside ``B_r``."""
    out = []
    x = spec.window - spec.x0
    for _ in range(n):
        u = np.zeros(x.size)
        inside = np.nonzero(np.abs(x) <= spec.r)[0]
        k = rng.integers(1, 6)
        u[rng.choice(inside, size=k, replace=False)] = rng.uniform(0.1, 1.0, size=k)
        width = rng.uniform(1.0, spec.r)
        u += rng.uniform(0, 1) * np.exp(-0.5 * ((x - rng.uniform(-spec.r, spec.r)) / width) ** 2)
        out.append(u)
    return out
