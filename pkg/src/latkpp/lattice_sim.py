"""Time integration of the lattice KPP equation and the squeezing construction of fronts.

The equation is ``u_j' = u_{j+1} - 2 u_j + u_{j-1} + (a_j - u_j) u_j`` on a
finite window whose outside values are fixed ghost values (see
:class:`~latkpp.state.LatticeState`). A front of speed ``c`` is built as the
limit of solutions started at ``t = -n`` from ``min(ubar, u*)``, where
``ubar = e^{-mu (j - c t)} phi^mu_j`` is a super-solution; each of them stays
above the sub-solution ``ubar - d1 e^{-mu1 (j - c t)} phi^mu1_j``.
"""
from __future__ import annotations

import csv
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .dispersion import c_of_mu, critical_mu, lambda_of_mu, mu_of_speed, solve_dispersion
from .errors import ConstructionError, ConvergenceError, DomainError, IntegratorError
from .medium import MediumProfile, NonlinearityModel
from .spectral import SignFailure, TwistedEigenvector, spectral_bound, twisted_eigenvector
from .state import LatticeState, Trajectory

log = logging.getLogger(__name__)

DT_DEFAULT = 0.05
DT_MAX = 0.2
EDGE_THRESHOLD = 1e-12
EDGE_SITES = 20
SQUEEZE_TOL = 1e-6
CAUCHY_TOL = 1e-6
MAX_SITES = 100_000
TAIL_LOG_DEPTH = 640.0


def _model(model):
    return NonlinearityModel() if model is None else model


def rhs(state: LatticeState, medium: MediumProfile, model: NonlinearityModel | None = None) -> np.ndarray:
    """Right-hand side at every window site, using the ghost values at the ends."""
    model = _model(model)
    u = state.values
    a = medium.coefficients(state.j_min, state.j_max)
    ext = np.concatenate([[state.left_ghost], u, [state.right_ghost]])
    lap = ext[2:] - 2.0 * u + ext[:-2]
    return lap + model.f(a, u) * u


def _check_region(state: LatticeState, upper: float):
    u = state.values
    bad = np.nonzero(~np.isfinite(u) | (u < -1e-10) | (u > upper + 1e-8))[0]
    if bad.size:
        i = int(bad[0])
        raise IntegratorError(
            f"invariant region [0, {upper:.6g}] violated: u = {u[i]!r}",
            index=state.j_min + i,
            time=state.t,
        )


def _maybe_extend(state: LatticeState, max_sites: int):
    if state.right_ghost != 0.0:
        return
    while np.max(np.abs(state.values[-EDGE_SITES:])) > EDGE_THRESHOLD:
        extra = max(100, len(state) // 4)
        if len(state) + extra > max_sites:
            raise IntegratorError("window growth exceeded the site cap", index=state.j_max, time=state.t)
        state.extend_right(extra)


def _region_bound(state, medium, model, upper):
    if upper is not None:
        return upper
    return max(model.level(medium), float(np.max(state.values)), state.left_ghost, state.right_ghost, 1.0)


def _step_count(span: float, dt: float) -> int:
    return max(1, int(math.ceil(span / dt - 1e-9)))


def _run(state, medium, model, n_steps, dt, upper, auto_extend, max_sites, chunk):
    done = 0
    t0 = state.t
    while done < n_steps:
        k = min(chunk, n_steps - done)
        a = medium.coefficients(state.j_min, state.j_max)
        u = np.ascontiguousarray(state.values, dtype=float)
        _kernels.rk4_lattice(u, a, 1.0, model.react, state.left_ghost, state.right_ghost, dt, k)
        state.values = u
        done += k
        state.t = t0 + done * dt
        _check_region(state, upper)
        if auto_extend:
            _maybe_extend(state, max_sites)
    return state


def integrate(
    state: LatticeState,
    dt: float,
    t_end: float,
    medium: MediumProfile,
    model: NonlinearityModel | None = None,
    *,
    auto_extend: bool = True,
    upper: float | None = None,
    max_sites: int = MAX_SITES,
) -> LatticeState:
    """Advance a copy of ``state`` to ``t_end`` with classical RK4.

    ``dt`` is shrunk slightly if needed so that a whole number of steps lands
    on ``t_end``. The window grows to the right whenever the last sites carry
    more than ``1e-12``. Leaving ``0 <= u <= upper`` raises
    :class:`IntegratorError`.
    """
    model = _model(model)
    if not 0 < dt <= DT_MAX:
        raise DomainError(f"dt must lie in (0, {DT_MAX}], got {dt!r}")
    out = state.copy()
    span = t_end - out.t
    if span < 0:
        raise DomainError("t_end lies before the state time")
    upper = _region_bound(out, medium, model, upper)
    if auto_extend:
        _maybe_extend(out, max_sites)
    if span == 0:
        return out
    n = _step_count(span, dt)
    h = span / n
    _run(out, medium, model, n, h, upper, auto_extend, max_sites, chunk=max(1, int(round(1.0 / h))))
    out.t = t_end
    return out


def simulate(
    state: LatticeState,
    t_end: float,
    medium: MediumProfile,
    model: NonlinearityModel | None = None,
    *,
    dt: float = DT_DEFAULT,
    sample_every: float = 0.25,
    auto_extend: bool = True,
    upper: float | None = None,
    max_sites: int = MAX_SITES,
) -> tuple[Trajectory, LatticeState]:
    """Integrate and record snapshots every ``sample_every`` time units (start included)."""
    model = _model(model)
    if not 0 < dt <= DT_MAX:
        raise DomainError(f"dt must lie in (0, {DT_MAX}], got {dt!r}")
    span = t_end - state.t
    n_samples = int(round(span / sample_every))
    if n_samples < 1 or abs(n_samples * sample_every - span) > 1e-9 * max(1.0, span):
        raise DomainError("t_end - t must be a positive multiple of sample_every")
    per = _step_count(sample_every, dt)
    h = sample_every / per
    cur = state.copy()
    upper = _region_bound(cur, medium, model, upper)
    if auto_extend:
        _maybe_extend(cur, max_sites)
    t0 = cur.t
    snaps = [cur.copy()]
    for k in range(1, n_samples + 1):
        _run(cur, medium, model, per, h, upper, auto_extend, max_sites, chunk=per)
        cur.t = t0 + k * sample_every
        snaps.append(cur.copy())
    return Trajectory.from_states(snaps, meta={"dt": h}), cur


# --- stationary state ---------------------------------------------------------

@dataclass(frozen=True)
class StationaryProfile:
    """Positive stationary solution ``u*`` on a window; equal to 1 to tolerance outside."""

    j_min: int
    values: np.ndarray
    residual: float
    edge_deviation: float

    @property
    def j_max(self) -> int:
        return self.j_min + self.values.size - 1

    @property
    def window(self) -> tuple[int, int]:
        return self.j_min, self.j_max

    @property
    def sites(self) -> np.ndarray:
        return np.arange(self.j_min, self.j_max + 1)

    def value(self, j):
        j = np.asarray(j)
        out = np.ones(j.shape, dtype=float)
        inside = (j >= self.j_min) & (j <= self.j_max)
        out[inside] = self.values[j[inside] - self.j_min]
        return out if out.ndim else float(out)

    def on(self, j_min: int, j_max: int) -> np.ndarray:
        return self.value(np.arange(j_min, j_max + 1))

    @property
    def min_value(self) -> float:
        return float(self.values.min())

    @property
    def level(self) -> float:
        """Crossing level ``min_j u*_j / 2`` over the window."""
        return 0.5 * self.min_value


def stationary_solution(
    medium: MediumProfile,
    model: NonlinearityModel | None = None,
    window: tuple[int, int] | None = None,
    *,
    tol: float = 1e-9,
    dt: float = 0.1,
    t_max: float = 1e4,
) -> StationaryProfile:
    """Relax from ``u = 1`` (ghosts held at 1) until the RHS sup-norm is at most ``tol``."""
    model = _model(model)
    N = medium.N
    if window is None:
        window = (-N - 100, N + 100)
    lo, hi = window
    if lo > -N - 100 or hi < N + 100:
        raise DomainError(f"window {window} must contain [{-N - 100}, {N + 100}]")
    state = LatticeState(lo, np.ones(hi - lo + 1), 0.0, "dirichlet_constant", 1.0, 1.0)
    upper = _region_bound(state, medium, model, None)
    per = _step_count(1.0, dt)
    res = float(np.max(np.abs(rhs(state, medium, model))))
    while res > tol:
        if state.t >= t_max:
            raise ConvergenceError(f"stationary relaxation stalled at residual {res:.3e}", data={"t": state.t})
        _run(state, medium, model, per, 1.0 / per, upper, False, MAX_SITES, chunk=per)
        res = float(np.max(np.abs(rhs(state, medium, model))))
    edge = float(max(abs(state.values[0] - 1.0), abs(state.values[-1] - 1.0)))
    return StationaryProfile(lo, state.values.copy(), res, edge)


# --- super- and sub-solutions ----------------------------------------------

def super_solution(mu: float, c: float, phi: TwistedEigenvector, j, t: float, ustar: StationaryProfile | None = None):
    """``ubar_j(t) = e^{-mu (j - c t)} phi_j``; with ``ustar`` returns ``min(ubar, u*)``."""
    j = np.asarray(j)
    with np.errstate(over="ignore"):
        val = np.exp(-mu * (j - c * t)) * phi.value(j)
    if ustar is not None:
        val = np.minimum(val, ustar.value(j))
    return val if np.ndim(val) else float(val)


def check_mu_order(mu: float, mu1: float, mu_star: float | None = None):
    mu_star = critical_mu() if mu_star is None else mu_star
    if not (0 < mu < mu1 < min(2.0 * mu, mu_star)):
        raise DomainError(f"need mu < mu1 < min(2 mu, mu*): mu={mu}, mu1={mu1}, mu*={mu_star}")


def default_mu1(mu: float, mu_star: float | None = None) -> float:
    """Midpoint of the admissible interval ``(mu, min(2 mu, mu*))``."""
    mu_star = critical_mu() if mu_star is None else mu_star
    return mu + 0.5 * (min(2.0 * mu, mu_star) - mu)


def sub_solution(mu, mu1, c, phi_mu, phi_mu1, d1, j, t, clip: bool = False):
    """``e^{-mu x} phi^mu_j - d1 e^{-mu1 x} phi^mu1_j`` with ``x = j - c t``."""
    check_mu_order(mu, mu1)
    j = np.asarray(j)
    x = j - c * t
    with np.errstate(over="ignore", invalid="ignore"):
        val = np.exp(-mu * x) * (phi_mu.value(j) - d1 * np.exp(-(mu1 - mu) * x) * phi_mu1.value(j))
    val = np.where(np.isnan(val), -np.inf, val)
    if clip:
        val = np.maximum(val, 0.0)
    return val if np.ndim(val) else float(val)


def d1_bound(mu, mu1, c, phi_mu, phi_mu1, L: float = 1.0) -> float:
    """Lower bound ``d0`` that ``d1`` must exceed for the sub-solution inequality.

    ``d0 = max(sup phi^mu / inf phi^mu1, L (sup phi^mu)^2 / ((mu1 c - lambda(mu1)) inf phi^mu1))``.
    """
    check_mu_order(mu, mu1)
    gap = mu1 * c - lambda_of_mu(mu1)
    if not gap > 0:
        raise DomainError(f"mu1 c - lambda(mu1) = {gap} must be positive")
    sup_mu = phi_mu.sup()
    inf_mu1 = phi_mu1.inf()
    if not inf_mu1 > 0:
        raise DomainError("phi^mu1 must be bounded away from zero")
    return max(sup_mu / inf_mu1, L * sup_mu**2 / (gap * inf_mu1))


def _defect(vals, dvals_dt, a):
    """``u' - Lap u - (a - u) u`` at interior points of a 3-point-padded array."""
    u = vals[1:-1]
    return dvals_dt - (vals[2:] - 2.0 * u + vals[:-2]) - (a - u) * u


def super_defect(mu, c, phi, medium, j, t):
    """Defect of ``ubar`` at sites ``j`` (array of consecutive ints) and time ``t``; nonnegative in theory."""
    j = np.asarray(j)
    jj = np.arange(j[0] - 1, j[-1] + 2)
    v = super_solution(mu, c, phi, jj, t)
    return _defect(v, mu * c * v[1:-1], medium.coefficients(int(j[0]), int(j[-1])))


def sub_defect(mu, mu1, c, phi_mu, phi_mu1, d1, medium, j, t):
    """Defect of the unclipped sub-solution; nonpositive wherever it is positive."""
    j = np.asarray(j)
    jj = np.arange(j[0] - 1, j[-1] + 2)
    x = jj - c * t
    A = np.exp(-mu * x) * phi_mu.value(jj)
    B = d1 * np.exp(-mu1 * x) * phi_mu1.value(jj)
    dt = (mu * c * A - mu1 * c * B)[1:-1]
    return _defect(A - B, dt, medium.coefficients(int(j[0]), int(j[-1])))


# --- comparison harness -------------------------------------------------------

@dataclass(frozen=True)
class ComparisonReport:
    ordered: bool
    strict: bool
    max_violation: float
    min_gap: float
    times: tuple


def _gap_march(z: LatticeState, w: LatticeState, medium, times, dt):
    """Integrate ``(z, d = w - z)`` jointly; return ``min_j d_j`` at each time in ``times``.

    ``d' = Lap d + (a - 2 z - d) d`` keeps full relative precision where
    ``w - z`` would cancel to zero in floating point.
    """
    a = medium.coefficients(z.j_min, z.j_max)
    zg = (z.left_ghost, z.right_ghost)
    dg = (w.left_ghost - z.left_ghost, w.right_ghost - z.right_ghost)

    def lap(v, g):
        ext = np.concatenate([[g[0]], v, [g[1]]])
        return ext[2:] - 2.0 * v + ext[:-2]

    def f(zv, dv):
        return lap(zv, zg) + (a - zv) * zv, lap(dv, dg) + (a - 2.0 * zv - dv) * dv

    zv, dv = z.values.copy(), w.values - z.values
    t, out = z.t, []
    for target in times:
        n = _step_count(target - t, dt) if target > t else 0
        h = (target - t) / n if n else 0.0
        for _ in range(n):
            k1 = f(zv, dv)
            k2 = f(zv + 0.5 * h * k1[0], dv + 0.5 * h * k1[1])
            k3 = f(zv + 0.5 * h * k2[0], dv + 0.5 * h * k2[1])
            k4 = f(zv + h * k3[0], dv + h * k3[1])
            zv = zv + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0])
            dv = dv + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])
        t = target
        out.append(float(dv.min()))
    return np.array(out)


def comparison_check(
    z: LatticeState,
    w: LatticeState,
    t_end: float,
    medium: MediumProfile,
    model: NonlinearityModel | None = None,
    *,
    dt: float = DT_DEFAULT,
    sample_every: float = 0.5,
    tol: float = 1e-9,
) -> ComparisonReport:
    """Integrate both states and check ``u(t; z) <= u(t; w) + tol`` at every sample.

    Ordering is judged on the two trajectories from :func:`simulate`. The gap
    ``min_j (w - z)`` used for strictness comes from integrating the
    difference directly, since it soon drops below the rounding level of the
    solutions themselves.
    """
    if z.j_min != w.j_min or len(z) != len(w):
        raise DomainError("states must share a window")
    if np.any(z.values > w.values) or z.left_ghost > w.left_ghost or z.right_ghost > w.right_ghost:
        raise DomainError("need z <= w at the start")
    model = _model(model)
    distinct = bool(np.any(z.values != w.values))
    upper = max(_region_bound(z, medium, model, None), _region_bound(w, medium, model, None))
    tz, _ = simulate(z, z.t + t_end, medium, model, dt=dt, sample_every=sample_every, auto_extend=False, upper=upper)
    tw, _ = simulate(w, w.t + t_end, medium, model, dt=dt, sample_every=sample_every, auto_extend=False, upper=upper)
    diff = tw.values - tz.values
    max_violation = float(max(0.0, -diff.min()))
    ordered = max_violation <= tol
    gaps = _gap_march(z, w, medium, tz.times[1:], dt)
    min_gap = float(gaps.min()) if gaps.size else math.inf
    strict = (min_gap > 0.0) if distinct else True
    return ComparisonReport(ordered, strict, max_violation, min_gap, tuple(tz.times.tolist()))


# --- front construction -----------------------------------------------------

@dataclass
class FrontConstruction:
    """Result of the squeezing construction for one speed."""

    c: float
    mu: float
    mu1: float
    d1: float
    d0: float
    phi_mu: TwistedEigenvector
    phi_mu1: TwistedEigenvector
    stationary: StationaryProfile
    medium: MediumProfile
    runs: list  # Trajectory per n = 1..n_max
    t_obs: float
    monotone_violation: float
    squeeze_violation: float
    cauchy_gaps: list  # sup |u^n - u^{n-1}| at t_obs, n = 2..n_max
    tail: dict = field(default_factory=dict)

    @property
    def trajectory(self) -> Trajectory:
        return self.runs[-1]

    @property
    def monotone(self) -> bool:
        return self.monotone_violation <= 1e-9

    @property
    def converged(self) -> bool:
        return bool(self.cauchy_gaps) and self.cauchy_gaps[-1] < CAUCHY_TOL

    def bounds(self, t: float, j=None):
        """``(max(usub, 0), min(ubar, u*), ubar)`` at sample sites and time ``t``."""
        j = self.trajectory.sites if j is None else np.asarray(j)
        ubar = super_solution(self.mu, self.c, self.phi_mu, j, t)
        upper = np.minimum(ubar, self.stationary.value(j))
        lower = sub_solution(self.mu, self.mu1, self.c, self.phi_mu, self.phi_mu1, self.d1, j, t, clip=True)
        return lower, upper, ubar

    def profile(self, t: float | None = None) -> LatticeState:
        traj = self.trajectory
        t = traj.times[-1] if t is None else t
        k = traj.index_of_time(t)
        return LatticeState(traj.j_min, traj.values[k].copy(), float(traj.times[k]), "clamp_zero_both")

    def profile_rows(self, t: float | None = None):
        """Rows ``(j, u, ubar, ubar_clipped, usub)`` of the final (or given-time) profile."""
        st = self.profile(t)
        j = st.sites
        lower, upper, ubar = self.bounds(st.t, j)
        return [(int(a), float(b), float(c), float(d), float(e)) for a, b, c, d, e in zip(j, st.values, ubar, upper, lower)]

    def write_csv(self, path, t: float | None = None, header_comment: str | None = None):
        with open(path, "w", newline="") as fh:
            if header_comment:
                fh.write(f"# {header_comment}\n")
            wr = csv.writer(fh)
            wr.writerow(["j", "u", "ubar", "ubar_clipped", "usub"])
            for row in self.profile_rows(t):
                wr.writerow([row[0]] + [format(float(x), ".17g") for x in row[1:]])


def _twisted_or_fail(medium, mu, what):
    tv = twisted_eigenvector(medium, mu)
    if isinstance(tv, SignFailure):
        raise ConstructionError(f"{what}: twisted eigenvector at mu={mu} loses positivity at j={tv.first_nonpositive}")
    return tv


def front_ingredients(medium, model, c, lambda_hat=None):
    """Decay rates, twisted eigenvectors and ``d1`` for speed ``c``; checks ``c in (c*, c_hat]``."""
    model = _model(model)
    model.validate(medium)
    lam = spectral_bound(medium) if lambda_hat is None else lambda_hat
    summary = solve_dispersion(max(lam, 1.0))
    if not summary.window_exists:
        raise DomainError(f"no admissible speeds: lambda = {lam} is not below lambda* = {summary.lambda_star}")
    if not (summary.c_star < c <= summary.c_hat * (1 + 1e-12)):
        raise DomainError(f"speed {c} is outside (c*, c_hat] = ({summary.c_star}, {summary.c_hat}]")
    mu = mu_of_speed(c, "lower")
    mu = max(mu, summary.mu_hat)
    mu1 = default_mu1(mu, summary.mu_star)
    phi_mu = _twisted_or_fail(medium, mu, "phi^mu")
    phi_mu1 = _twisted_or_fail(medium, mu1, "phi^mu1")
    d0 = d1_bound(mu, mu1, c, phi_mu, phi_mu1, model.L)
    return summary, mu, mu1, phi_mu, phi_mu1, d0


def _front_run(n, c, mu, phi_mu, ustar, medium, model, j_lo, t_obs, dt, sample_every):
    t0 = -float(n)
    # keep the exponential tail down to ~1e-278: a truncated tail would
    # behave like compact data and relax to the minimal speed
    x_hi = TAIL_LOG_DEPTH / mu
    j_hi = max(medium.N + 50, int(math.ceil(c * t0 + x_hi)))
    sites = np.arange(j_lo, j_hi + 1)
    v = super_solution(mu, c, phi_mu, sites, t0, ustar)
    state = LatticeState(j_lo, v, t0, "dirichlet_stationary_left_zero_right", float(ustar.value(j_lo - 1)))
    upper = max(model.level(medium), float(ustar.values.max()))
    traj, _ = simulate(state, t_obs, medium, model, dt=dt, sample_every=sample_every, upper=upper)
    return traj


def _align(a: Trajectory, b: Trajectory):
    """Values of ``a`` and ``b`` on their common times and a common (right-padded) site range."""
    t0 = max(a.times[0], b.times[0])
    ka, kb = a.index_of_time(t0), b.index_of_time(t0)
    va, vb = a.values[ka:], b.values[kb:]
    width = max(va.shape[1], vb.shape[1])
    va = np.pad(va, ((0, 0), (0, width - va.shape[1])))
    vb = np.pad(vb, ((0, 0), (0, width - vb.shape[1])))
    return a.times[ka:], va, vb


def construct_front(
    medium: MediumProfile,
    model: NonlinearityModel | None = None,
    c: float = 2.2,
    n_max: int = 8,
    *,
    t_obs: float = 150.0,
    dt: float = DT_DEFAULT,
    sample_every: float = 0.25,
    d1_factor: float = 1.1,
    workers: int = 1,
    lambda_hat: float | None = None,
) -> FrontConstruction:
    """Approximate the front of speed ``c`` by the squeezing sequence ``u^n``, ``n = 1..n_max``.

    Run ``n`` starts at ``t = -n`` from ``min(ubar, u*)`` and is recorded up to
    ``t_obs``. Raises :class:`ConstructionError` if any sample leaves
    ``[max(usub, 0), min(ubar, u*)]`` by more than ``1e-6``.
    """
    model = _model(model)
    if n_max < 1:
        raise DomainError("n_max must be at least 1")
    summary, mu, mu1, phi_mu, phi_mu1, d0 = front_ingredients(medium, model, c, lambda_hat)
    d1 = d1_factor * d0
    ustar = stationary_solution(medium, model)
    j_lo = -medium.N - 50 - int(math.ceil(c * (n_max + 1)))

    def job(n):
        return _front_run(n, c, mu, phi_mu, ustar, medium, model, j_lo, t_obs, dt, sample_every)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            runs = list(pool.map(job, range(1, n_max + 1)))
    else:
        runs = [job(n) for n in range(1, n_max + 1)]

    fc = FrontConstruction(c, mu, mu1, d1, d0, phi_mu, phi_mu1, ustar, medium, runs, t_obs, 0.0, 0.0, [])
    squeeze = 0.0
    for traj in runs:
        j = traj.sites
        for k, t in enumerate(traj.times):
            lower, upper, _ = fc.bounds(float(t), j)
            u = traj.values[k]
            squeeze = max(squeeze, float(np.max(lower - u)), float(np.max(u - upper)))
    fc.squeeze_violation = squeeze
    if squeeze > SQUEEZE_TOL:
        raise ConstructionError(f"squeeze bounds violated by {squeeze:.3e}")
    mono = 0.0
    for prev, cur in zip(runs[:-1], runs[1:]):
        _, vp, vc = _align(prev, cur)
        mono = max(mono, float(np.max(vc - vp)))
        fc.cauchy_gaps.append(float(np.max(np.abs(vc[-1] - vp[-1]))))
    fc.monotone_violation = mono
    fc.tail = tail_ratio(fc)
    log.info("front c=%.6g mu=%.6g squeeze=%.2e monotone=%.2e", c, mu, squeeze, mono)
    return fc


def tail_ratio(fc: FrontConstruction, xs=(5.0, 10.0, 20.0, 30.0)) -> dict:
    """``u_j / (e^{-mu (j - c t)} phi_j)`` at the final time for sites nearest ``j - c t = x``."""
    st = fc.profile()
    out = {}
    for x in xs:
        j = int(round(x + fc.c * st.t))
        if st.j_min <= j <= st.j_max:
            u = st.value(j)
            if u > 1e-200:
                out[float(x)] = u / float(super_solution(fc.mu, fc.c, fc.phi_mu, j, st.t))
    return out


def approach_minimal_speed(
    medium: MediumProfile,
    model: NonlinearityModel | None = None,
    k: int = 3,
    **kw,
) -> list[FrontConstruction]:
    """Fronts at a decreasing sequence ``c_i`` tending to ``c*`` (halving the distance each time)."""
    lam = spectral_bound(medium)
    summary = solve_dispersion(lam)
    c_top = min(summary.c_hat, summary.c_star + 0.4)
    out = []
    for i in range(1, k + 1):
        ci = summary.c_star + (c_top - summary.c_star) * 2.0**-i
        out.append(construct_front(medium, model, ci, lambda_hat=lam, **kw))
    return out


__all__ = [
    "ComparisonReport",
    "FrontConstruction",
    "StationaryProfile",
    "approach_minimal_speed",
    "c_of_mu",
    "comparison_check",
    "construct_front",
    "d1_bound",
    "default_mu1",
    "front_ingredients",
    "integrate",
    "rhs",
    "simulate",
    "stationary_solution",
    "sub_defect",
    "sub_solution",
    "super_defect",
    "super_solution",
]
