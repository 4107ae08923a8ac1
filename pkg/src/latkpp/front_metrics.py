"""Front diagnostics: crossing times, mean speed, tail exponent and the existence regime.

A site ``j`` is crossed at the first time ``t_j`` where ``u_j`` reaches the
level ``min_j u*_j / 2`` while every site to its right is still below it.
The mean speed is the slope of ``j`` against ``t_j``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .dispersion import DispersionSummary, critical_mu, lambda_of_mu, mu_of_speed, solve_dispersion
from .errors import DomainError
from .lattice_sim import StationaryProfile, simulate, stationary_solution
from .medium import MediumProfile, NonlinearityModel
from .spectral import SignFailure, spectral_bound, twisted_eigenvector
from .state import LatticeState, Trajectory

LAMBDA_ONE_TOL = 1e-6
BOUNDARY_TOL = 1e-4
MIN_CROSSINGS = 10

VERDICTS = (
    "exists_in_interval",
    "nonexistence_lambda",
    "nonexistence_speed_low",
    "nonexistence_speed_high",
    "boundary_unresolved",
)


@dataclass(frozen=True)
class SpeedFit:
    c_est: float
    ci_halfwidth: float
    intercept: float
    rms: float
    n: int


@dataclass(frozen=True)
class TailFit:
    mu_est: float
    intercept: float
    residual: float
    window: tuple


@dataclass
class FrontTrace:
    """Crossings ``(j, t_j)`` at ``level``; ``flagged`` marks an undeveloped or degenerate front.

    ``skipped`` lists sites that reached the level only after a site to their
    right had, so they have no first-passage time (a non-monotone profile,
    typically next to a strong perturbation).
    """

    level: float
    crossings: list
    flagged: bool = False
    reason: str = ""
    speed_fit: SpeedFit | None = None
    tail_fit: TailFit | None = None
    skipped: list = field(default_factory=list)

    @property
    def j(self) -> np.ndarray:
        return np.array([c[0] for c in self.crossings], dtype=int)

    @property
    def t(self) -> np.ndarray:
        return np.array([c[1] for c in self.crossings], dtype=float)

    def __len__(self):
        return len(self.crossings)

    def rows(self):
        return [(int(j), float(t)) for j, t in self.crossings]


def _level_of(profile) -> float:
    if isinstance(profile, StationaryProfile):
        return profile.level
    level = float(profile)
    if not level > 0:
        raise DomainError("crossing level must be positive")
    return level


def extract_crossings(run: Trajectory, profile) -> FrontTrace:
    """First-passage times through the level, linearly interpolated between samples.

    ``profile`` is a :class:`StationaryProfile` (level ``min u* / 2``) or the
    level itself. Sites already at or above the level in the first sample are
    not crossings; sites overtaken from the right are listed in ``skipped``.
    """
    level = _level_of(profile)
    vals = run.values
    times = run.times
    n_sites = vals.shape[1]
    above = vals >= level
    # interpolated first-passage time per site; -inf if above from the start, +inf if never
    tp = np.full(n_sites, np.inf)
    tp[above[0]] = -np.inf
    for i in np.nonzero(~above[0] & above.any(axis=0))[0]:
        k = int(np.argmax(above[:, i]))
        u0, u1 = vals[k - 1, i], vals[k, i]
        tp[i] = times[k - 1] + (level - u0) / (u1 - u0) * (times[k] - times[k - 1])
    # earliest passage strictly to the right of each site
    right_min = np.minimum.accumulate(np.concatenate([tp[::-1], [np.inf]])[:-1])[::-1]
    right_min = np.concatenate([right_min[1:], [np.inf]])
    crossings, skipped = [], []
    for i in np.nonzero(np.isfinite(tp))[0]:
        if tp[i] < right_min[i]:
            crossings.append((run.j_min + int(i), float(tp[i])))
        else:
            # a site further right got there first: no first passage in the strict sense
            skipped.append(run.j_min + int(i))
    if not crossings:
        return FrontTrace(level, [], True, "no crossings", skipped=skipped)
    flagged, reason = False, ""
    ts = np.array([c[1] for c in crossings])
    if np.any(np.diff(ts) <= 0):
        flagged, reason = True, "crossing times are not strictly increasing"
    return FrontTrace(level, crossings, flagged, reason, skipped=skipped)


def fit_mean_speed(trace: FrontTrace, t_window=None, confidence: float = 0.95) -> SpeedFit:
    """Least-squares slope of ``j`` against ``t_j`` over crossings with ``t_j`` in ``t_window``."""
    j, t = trace.j.astype(float), trace.t
    if t_window is not None:
        keep = (t >= t_window[0]) & (t <= t_window[1])
        j, t = j[keep], t[keep]
    if j.size < MIN_CROSSINGS:
        raise DomainError(f"need at least {MIN_CROSSINGS} crossings in the window, got {j.size}")
    res = stats.linregress(t, j)
    fitted = res.intercept + res.slope * t
    rms = float(np.sqrt(np.mean((j - fitted) ** 2)))
    half = float(stats.t.ppf(0.5 + 0.5 * confidence, j.size - 2) * res.stderr)
    fit = SpeedFit(float(res.slope), half, float(res.intercept), rms, int(j.size))
    trace.speed_fit = fit
    return fit


def fit_tail_exponent(state: LatticeState, c: float, fit_range=(10.0, 30.0), floor: float = 1e-14) -> TailFit:
    """Slope of ``-log u_j`` against ``j - c t`` for ``j - c t`` in ``fit_range``."""
    x = state.sites - c * state.t
    keep = (x >= fit_range[0]) & (x <= fit_range[1])
    if np.count_nonzero(keep) < 2:
        raise DomainError("fit range holds fewer than two sites")
    u = state.values[keep]
    if np.any(u <= floor):
        raise DomainError(f"u drops below {floor:g} inside the fit range; shrink the range")
    res = stats.linregress(x[keep], -np.log(u))
    resid = float(np.sqrt(np.mean((-np.log(u) - (res.intercept + res.slope * x[keep])) ** 2)))
    return TailFit(float(res.slope), float(res.intercept), resid, tuple(fit_range))


# --- regime classification --------------------------------------------------

@dataclass(frozen=True)
class RegimeReport:
    lambda_hat: float
    summary: DispersionSummary
    verdict: str
    interval: tuple | None
    query_speed: float | None = None

    def as_dict(self):
        iv = None
        if self.interval is not None:
            iv = [self.interval[0], "inf" if math.isinf(self.interval[1]) else self.interval[1]]
        return {
            "lambda_hat": self.lambda_hat,
            "verdict": self.verdict,
            "interval": iv,
            "query_speed": self.query_speed,
            "summary": self.summary.as_dict(),
        }


def classify_regime(
    medium: MediumProfile,
    model: NonlinearityModel | None = None,
    query_speed: float | None = None,
    *,
    tol: float = 1e-6,
    lambda_hat: float | None = None,
) -> RegimeReport:
    """Existence verdict from the spectral bound ``lambda``.

    ``lambda`` within ``1e-6`` of 1 is taken as exactly 1 (unbounded speed
    interval). Within ``1e-4`` of ``lambda*`` the verdict is
    ``boundary_unresolved``.
    """
    if model is not None:
        model.validate(medium)
    lam = spectral_bound(medium, tol) if lambda_hat is None else float(lambda_hat)
    if abs(lam - 1.0) <= LAMBDA_ONE_TOL:
        lam = 1.0
    summary = solve_dispersion(lam)
    if abs(lam - summary.lambda_star) <= BOUNDARY_TOL:
        return RegimeReport(lam, summary, "boundary_unresolved", None, query_speed)
    if lam > summary.lambda_star:
        return RegimeReport(lam, summary, "nonexistence_lambda", None, query_speed)
    interval = (summary.c_star, summary.c_hat)
    verdict = "exists_in_interval"
    if query_speed is not None:
        if query_speed < summary.c_star:
            verdict = "nonexistence_speed_low"
        elif query_speed > summary.c_hat:
            verdict = "nonexistence_speed_high"
    return RegimeReport(lam, summary, verdict, interval, query_speed)


# --- nonexistence evidence --------------------------------------------------

def spreading_run(
    medium: MediumProfile,
    model: NonlinearityModel | None = None,
    t_end: float = 120.0,
    *,
    dt: float = 0.05,
    sample_every: float = 0.25,
    margin: int = 50,
    ustar: StationaryProfile | None = None,
) -> tuple[Trajectory, StationaryProfile]:
    """Run from step data ``u_j = u*_j`` for ``j <= 0`` and 0 beyond."""
    ustar = stationary_solution(medium, model) if ustar is None else ustar
    j_lo = -medium.N - margin
    sites = np.arange(j_lo, medium.N + margin + 1)
    u0 = np.where(sites <= 0, ustar.value(sites), 0.0)
    state = LatticeState(j_lo, u0, 0.0, "dirichlet_stationary_left_zero_right", float(ustar.value(j_lo - 1)))
    traj, _ = simulate(state, t_end, medium, model, dt=dt, sample_every=sample_every)
    return traj, ustar


@dataclass
class ProbeReport:
    scenario: str
    verdict: str
    consistent: bool
    evidence: dict = field(default_factory=dict)


SCENARIOS = ("lambda_above_critical", "speed_low", "speed_high")


def nonexistence_probe(
    medium: MediumProfile,
    model: NonlinearityModel | None = None,
    scenario: str = "lambda_above_critical",
    query_speed: float | None = None,
    *,
    t_end: float = 100.0,
    mu_grid: int = 12,
) -> ProbeReport:
    """Numerical evidence that no front exists for the scenario.

    ``lambda_above_critical``
        classifier verdict, sign failure of every twisted eigenvector with
        ``mu <= mu*``, and a forward run from step data whose speed locks near
        ``c*`` while ``u_j e^{mu* (|j| - c* t)}`` stays bounded.
    ``speed_low`` / ``speed_high``
        classifier verdict for ``query_speed``; for a high speed also the sign
        failure of the twisted eigenvector at the decay rate of that speed.
    """
    if scenario not in SCENARIOS:
        raise DomainError(f"unknown scenario {scenario!r}")
    report = classify_regime(medium, model, query_speed)
    s = report.summary
    ev: dict = {"lambda_hat": report.lambda_hat, "lambda_star": s.lambda_star, "c_star": s.c_star}

    if scenario == "lambda_above_critical":
        mus = np.linspace(s.mu_star / mu_grid, s.mu_star, mu_grid)
        fails = [isinstance(twisted_eigenvector(medium, float(m)), SignFailure) for m in mus]
        ev["twisted_sign_failures"] = int(sum(fails))
        ev["twisted_probes"] = int(mus.size)
        traj, ustar = spreading_run(medium, model, t_end)
        trace = extract_crossings(traj, ustar)
        fit = fit_mean_speed(trace, (0.4 * t_end, t_end))
        ev["measured_speed"] = fit.c_est
        ev["speed_ci"] = fit.ci_halfwidth
        ev["crossings_flagged"] = trace.flagged
        mu_s, c_s = s.mu_star, s.c_star
        j = traj.sites
        with np.errstate(over="ignore"):
            K = [float(np.max(traj.values[k] * np.exp(mu_s * (np.abs(j) - c_s * t)))) for k, t in enumerate(traj.times) if t > 0]
        ev["K_first_half"] = max(K[: len(K) // 2])
        ev["K_second_half"] = max(K[len(K) // 2 :])
        ev["left_value"] = float(traj.values[-1, 0])
        ev["left_ustar"] = float(ustar.value(traj.j_min))
        consistent = (
            report.verdict == "nonexistence_lambda"
            and all(fails)
            and fit.c_est <= 1.05 * c_s
            and ev["K_second_half"] <= 10.0 * ev["K_first_half"]
        )
        if query_speed is not None:
            ev["query_speed"] = query_speed
            consistent = consistent and fit.c_est < query_speed
        return ProbeReport(scenario, report.verdict, bool(consistent), ev)

    if query_speed is None:
        raise DomainError(f"scenario {scenario!r} needs a query speed")
    ev["query_speed"] = query_speed
    if scenario == "speed_low":
        return ProbeReport(scenario, report.verdict, report.verdict == "nonexistence_speed_low", ev)
    mu_c = mu_of_speed(query_speed, "lower")
    tv = twisted_eigenvector(medium, mu_c)
    ev["mu_of_speed"] = mu_c
    ev["mu_hat"] = s.mu_hat
    ev["twisted_sign_failure"] = isinstance(tv, SignFailure)
    if isinstance(tv, SignFailure):
        ev["first_nonpositive"] = tv.first_nonpositive
    consistent = report.verdict == "nonexistence_speed_high" and mu_c < s.mu_hat and ev["twisted_sign_failure"]
    return ProbeReport(scenario, report.verdict, bool(consistent), ev)


def duality_defect(c_est: float, mu_est: float) -> float:
    """``|c mu - lambda(mu)| / lambda(mu)``: how far a measured pair is from the dispersion relation."""
    lam = lambda_of_mu(mu_est)
    return abs(c_est * mu_est - lam) / lam


def classifier_twisted_consistency(medium: MediumProfile, report: RegimeReport) -> bool:
    """``exists_in_interval`` iff the twisted eigenvector at ``(mu_hat + mu*) / 2`` is positive."""
    mu = 0.5 * (report.summary.mu_hat + critical_mu())
    positive = not isinstance(twisted_eigenvector(medium, mu), SignFailure)
    return positive == (report.verdict == "exists_in_interval")
