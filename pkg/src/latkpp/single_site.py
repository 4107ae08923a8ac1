"""Closed forms for a medium perturbed at one site (``a_j = 1`` for ``j != 0``) and cross-checks.

For ``a0 > 1`` the spectral bound is ``sqrt((1 - a0)^2 + 4) - 1`` and
``mu_hat = log((a0 - 1 + sqrt((1 - a0)^2 + 4)) / 2)``; for ``a0 <= 1`` it is 1
and every speed ``c >= c*`` is admissible. Fronts exist for
``a0 <= e^{mu*} - e^{-mu*} + 1`` only.
"""
from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from .dispersion import c_of_mu, critical_mu, lambda_of_mu
from .errors import DomainError
from .medium import MediumProfile
from .spectral import SignFailure, spectral_bound_details, twisted_eigenvector

BOUNDARY_TOL = 1e-4
REGIMES = ("always_exists_a0_le_1", "window_exists", "no_fronts")


def _check(a0, mu=None):
    if not a0 > 0:
        raise DomainError(f"a0 must be positive, got {a0!r}")
    if mu is not None and not mu > 0:
        raise DomainError(f"mu must be positive, got {mu!r}")


def closed_form_bracket(a0: float, mu: float, j):
    """``1 + (1 - a0) e^{-mu} (1 - e^{2 mu j}) / (1 - e^{-2 mu})`` for ``j < 0`` and 1 for ``j >= 0``.

    This is the twisted eigenvector, normalised to 1 on ``j >= 0``.
    """
    _check(a0, mu)
    j = np.asarray(j, dtype=float)
    neg = (1.0 - a0) * math.exp(-mu) * (-np.expm1(2.0 * mu * np.minimum(j, 0.0))) / (-math.expm1(-2.0 * mu))
    out = np.where(j < 0, 1.0 + neg, 1.0)
    return out if out.ndim else float(out)


def closed_form_phi(a0: float, mu: float, j):
    """Exact eigenfunction ``phi_j = bracket_j e^{-mu j}`` of the single-site example."""
    j = np.asarray(j, dtype=float)
    out = closed_form_bracket(a0, mu, j) * np.exp(-mu * j)
    return out if np.ndim(out) else float(out)


def positivity_threshold(mu: float) -> float:
    """Largest ``a0`` with a positive eigenfunction: ``e^mu - e^{-mu} + 1``."""
    return 2.0 * math.sinh(mu) + 1.0


def first_nonpositive_closed_form(a0: float, mu: float) -> int | None:
    """Largest ``j < 0`` where the closed form is ``<= 0``; None if it stays positive."""
    _check(a0, mu)
    if a0 <= positivity_threshold(mu):
        return None
    # bracket <= 0  <=>  e^{2 mu j} <= 1 - (1 - e^{-2mu}) / ((a0 - 1) e^{-mu})
    rhs = 1.0 - (-math.expm1(-2.0 * mu)) / ((a0 - 1.0) * math.exp(-mu))
    j = math.floor(math.log(rhs) / (2.0 * mu))
    while j < -1 and closed_form_bracket(a0, mu, j + 1) <= 0:
        j += 1
    while closed_form_bracket(a0, mu, j) > 0:
        j -= 1
    return int(min(j, -1))


def lambda_closed_form(a0: float) -> float:
    _check(a0)
    return math.sqrt((1.0 - a0) ** 2 + 4.0) - 1.0 if a0 > 1.0 else 1.0


def mu_hat_closed_form(a0: float) -> float:
    _check(a0)
    if a0 <= 1.0:
        return 0.0
    return math.log((a0 - 1.0 + math.sqrt((1.0 - a0) ** 2 + 4.0)) / 2.0)


def a0_threshold() -> float:
    """``e^{mu*} - e^{-mu*} + 1``: fronts exist iff ``a0`` does not exceed it."""
    return positivity_threshold(critical_mu())


@dataclass(frozen=True)
class SingleSiteSummary:
    a0: float
    lambda_: float
    mu_hat: float
    c_hat: float
    unbounded: bool
    regime: str
    boundary: bool

    @property
    def interval(self):
        if self.regime == "no_fronts":
            return None
        return (c_of_mu(critical_mu()), self.c_hat)

    def expected_verdict(self) -> str:
        if self.boundary:
            return "boundary_unresolved"
        return "nonexistence_lambda" if self.regime == "no_fronts" else "exists_in_interval"

    def as_dict(self):
        d = asdict(self)
        d["lambda"] = d.pop("lambda_")
        if self.unbounded:
            d["c_hat"] = "inf"
        return d


def summarize(a0: float) -> SingleSiteSummary:
    _check(a0)
    lam = lambda_closed_form(a0)
    mu_s = critical_mu()
    lam_s = lambda_of_mu(mu_s)
    boundary = abs(lam - lam_s) <= BOUNDARY_TOL
    if a0 <= 1.0:
        return SingleSiteSummary(a0, 1.0, 0.0, math.inf, True, "always_exists_a0_le_1", False)
    mu_h = mu_hat_closed_form(a0)
    regime = "no_fronts" if a0 > positivity_threshold(mu_s) else "window_exists"
    return SingleSiteSummary(a0, lam, mu_h, c_of_mu(mu_h), False, regime, boundary)


@dataclass(frozen=True)
class CrossValidation:
    a0: float
    mu: float
    M: int
    lambda_gap: float
    phi_gap: float
    positivity_agrees: bool
    verdict: str
    expected_verdict: str

    @property
    def verdict_agrees(self) -> bool:
        return self.verdict == self.expected_verdict

    @property
    def ok(self) -> bool:
        return self.lambda_gap < 1e-6 and self.phi_gap < 1e-6 and self.positivity_agrees and self.verdict_agrees


def cross_validate(a0: float, mu: float, M: int = 128, tol: float = 1e-7) -> CrossValidation:
    """Compare the spectral, twisted-eigenvector and classifier code paths against the closed forms."""
    from .front_metrics import classify_regime  # local: front_metrics depends on the simulator

    _check(a0, mu)
    if M < 32:
        raise DomainError("M must be at least 32")
    medium = MediumProfile.single_site(a0)
    summary = summarize(a0)
    bound = spectral_bound_details(medium, tol, M0=M)
    lam_num = 1.0 if abs(bound.value - 1.0) <= 1e-6 else bound.value
    lambda_gap = abs(lam_num - summary.lambda_)

    tv = twisted_eigenvector(medium, mu)
    closed_pos = first_nonpositive_closed_form(a0, mu) is None
    if isinstance(tv, SignFailure):
        phi_gap = float(np.max(np.abs(tv.values - closed_form_bracket(a0, mu, np.arange(tv.j_min, tv.j_min + tv.values.size)))))
        positivity_agrees = not closed_pos
    else:
        phi_gap = float(np.max(np.abs(tv.values - closed_form_bracket(a0, mu, tv.sites))))
        positivity_agrees = closed_pos
    verdict = classify_regime(medium, lambda_hat=bound.value).verdict
    return CrossValidation(a0, mu, M, lambda_gap, phi_gap, positivity_agrees, verdict, summary.expected_verdict())


def sweep(a0_values, workers: int = 1) -> list[SingleSiteSummary]:
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(summarize, a0_values))
    return [summarize(a) for a in a0_values]


def write_sweep_csv(path, summaries, header_comment: str | None = None):
    with open(path, "w", newline="") as fh:
        if header_comment:
            fh.write(f"# {header_comment}\n")
        wr = csv.writer(fh)
        wr.writerow(["a0", "lambda", "mu_hat", "c_hat", "regime"])
        for s in summaries:
            c_hat = "inf" if s.unbounded else format(s.c_hat, ".17g")
            wr.writerow([format(s.a0, ".17g"), format(s.lambda_, ".17g"), format(s.mu_hat, ".17g"), c_hat, s.regime])
