import math

import numpy as np
import pytest

from latkpp import front_metrics as fm
from latkpp.dispersion import c_of_mu, critical_mu, mu_of_speed, solve_dispersion
from latkpp.errors import DomainError
from latkpp.lattice_sim import construct_front, stationary_solution
from latkpp.medium import MediumProfile
from latkpp.single_site import a0_threshold
from latkpp.state import LatticeState, Trajectory

HOM = MediumProfile.homogeneous()
A2 = MediumProfile.single_site(2.0)
CSTAR = solve_dispersion(1.0).c_star


def _trace(j, t, level=0.5):
    return fm.FrontTrace(level, list(zip(j, t)))


@pytest.fixture(scope="module")
def front_hom():
    return construct_front(HOM, None, 2.2, 8, t_obs=150.0)


@pytest.fixture(scope="module")
def front_a2():
    return construct_front(A2, None, 2.3, 8, t_obs=150.0)


# --- crossings ----------------------------------------------------------------

def test_exact_travelling_wave_crossings():
    c = 2.0
    times = np.arange(0, 40.0001, 0.25)
    sites = np.arange(-20, 100)
    vals = np.array([1.0 / (1.0 + np.exp(sites - c * t - 0.3)) for t in times])
    traj = Trajectory(-20, times, vals)
    tr = fm.extract_crossings(traj, 0.5)
    assert not tr.flagged
    assert np.allclose(np.diff(tr.t), 1.0 / c, atol=1e-12)
    assert np.all(np.diff(tr.j) == 1)


def test_stationary_state_has_no_crossings():
    us = stationary_solution(A2)
    times = np.arange(0, 5.0001, 0.25)
    traj = Trajectory(us.j_min, times, np.tile(us.values, (times.size, 1)))
    tr = fm.extract_crossings(traj, us)
    assert len(tr) == 0 and tr.flagged
    assert tr.level == pytest.approx(0.5 * us.values.min())


def test_overtaken_sites_are_skipped():
    times = np.array([0.0, 1.0, 2.0, 3.0])
    vals = np.array([[0, 0, 0], [0, 0.6, 0], [0.6, 0.7, 0], [0.7, 0.8, 0.6]], dtype=float)
    tr = fm.extract_crossings(Trajectory(0, times, vals), 0.5)
    assert tr.j.tolist() == [1, 2]
    assert tr.skipped == [0]


def test_level_must_be_positive():
    traj = Trajectory(0, np.array([0.0, 1.0]), np.zeros((2, 3)))
    with pytest.raises(DomainError):
        fm.extract_crossings(traj, 0.0)


# --- speed fit ----------------------------------------------------------------

def test_speed_exact_linear():
    j = np.arange(0, 40)
    fit = fm.fit_mean_speed(_trace(j, j / 2.5))
    assert fit.c_est == pytest.approx(2.5, abs=1e-12)
    assert fit.ci_halfwidth < 1e-10


def test_speed_noisy(rng):
    j = np.arange(0, 200)
    t = j / 2.5 + rng.uniform(-0.01, 0.01, j.size)
    fit = fm.fit_mean_speed(_trace(j, t))
    # independent least squares on the same data
    slope = np.polyfit(t, j, 1)[0]
    assert fit.c_est == pytest.approx(slope, rel=1e-12)
    assert abs(fit.c_est - 2.5) <= 0.05
    assert fit.ci_halfwidth > 0


def test_speed_needs_ten_crossings():
    with pytest.raises(DomainError):
        fm.fit_mean_speed(_trace(range(9), np.arange(9) / 2.0))
    with pytest.raises(DomainError):
        fm.fit_mean_speed(_trace(range(30), np.arange(30) / 2.0), (0.0, 3.0))


# --- tail fit -----------------------------------------------------------------

def test_tail_exact_exponential():
    t, c = 3.0, 2.2
    sites = np.arange(-20, 120)
    st = LatticeState(-20, 3.0 * np.exp(-0.7 * (sites - c * t)), t)
    fit = fm.fit_tail_exponent(st, c)
    assert fit.mu_est == pytest.approx(0.7, abs=1e-10)
    assert fit.intercept == pytest.approx(-math.log(3.0), abs=1e-9)


def test_tail_underflow_error():
    sites = np.arange(0, 100)
    st = LatticeState(0, np.exp(-3.0 * sites), 0.0)
    with pytest.raises(DomainError):
        fm.fit_tail_exponent(st, 2.0, (10.0, 30.0))


def test_tail_range_outside_window():
    st = LatticeState(0, np.ones(5), 0.0)
    with pytest.raises(DomainError):
        fm.fit_tail_exponent(st, 2.0, (10.0, 30.0))


# --- measured fronts -----------------------------------------------------------

def test_step_data_spreads_at_minimal_speed():
    traj, us = fm.spreading_run(HOM, None, 120.0)
    tr = fm.extract_crossings(traj, us)
    fit = fm.fit_mean_speed(tr, (60.0, 120.0))
    assert abs(fit.c_est - CSTAR) <= 0.05 * CSTAR


def test_homogeneous_front_speed_and_tail(front_hom):
    tr = fm.extract_crossings(front_hom.trajectory, front_hom.stationary)
    assert not tr.flagged
    fit = fm.fit_mean_speed(tr, (50.0, 150.0))
    assert abs(fit.c_est - 2.2) <= 0.02 * 2.2
    assert fit.rms <= 0.02 * fit.c_est
    tail = fm.fit_tail_exponent(front_hom.profile(), 2.2, (10.0, 30.0))
    assert abs(tail.mu_est - mu_of_speed(2.2)) <= 0.03 * mu_of_speed(2.2)


def test_single_site_front_speed_and_tail(front_a2):
    tr = fm.extract_crossings(front_a2.trajectory, front_a2.stationary)
    assert not tr.flagged
    assert np.all(np.diff(tr.j) > 0) and np.all(np.diff(tr.t) > 0)
    fit = fm.fit_mean_speed(tr, (50.0, 150.0))
    assert 2.25 <= fit.c_est <= 2.35
    tail = fm.fit_tail_exponent(front_a2.profile(), 2.3, (10.0, 30.0))
    assert abs(tail.mu_est - front_a2.mu) <= 0.03 * front_a2.mu
    assert fm.duality_defect(fit.c_est, tail.mu_est) <= 0.05


@pytest.mark.parametrize("medium,c", [(HOM, 2.5), (MediumProfile.single_site(1.5), 2.2), (A2, 2.5)])
def test_speed_exponent_duality(medium, c):
    fc = construct_front(medium, None, c, 4, t_obs=80.0)
    tr = fm.extract_crossings(fc.trajectory, fc.stationary)
    assert not tr.flagged
    fit = fm.fit_mean_speed(tr, (30.0, 80.0))
    tail = fm.fit_tail_exponent(fc.profile(), c, (10.0, 30.0))
    assert fm.duality_defect(fit.c_est, tail.mu_est) <= 0.05


# --- classifier ---------------------------------------------------------------

def test_classify_a08_unbounded():
    rep = fm.classify_regime(MediumProfile.single_site(0.8))
    assert rep.lambda_hat == 1.0
    assert rep.verdict == "exists_in_interval"
    assert rep.interval[0] == pytest.approx(CSTAR) and math.isinf(rep.interval[1])
    assert rep.as_dict()["interval"][1] == "inf"


def test_classify_a2_window():
    rep = fm.classify_regime(A2)
    assert rep.verdict == "exists_in_interval"
    assert rep.interval[0] == pytest.approx(2.073, abs=1e-3)
    assert rep.interval[1] == pytest.approx(2.569, abs=1e-3)


@pytest.mark.parametrize("a0", [3.2, 3.5, 4.0])
def test_classify_no_fronts(a0):
    rep = fm.classify_regime(MediumProfile.single_site(a0))
    assert rep.verdict == "nonexistence_lambda" and rep.interval is None
    assert rep.lambda_hat > rep.summary.lambda_star + fm.BOUNDARY_TOL


def test_classify_boundary():
    rep = fm.classify_regime(MediumProfile.single_site(a0_threshold()))
    assert rep.verdict == "boundary_unresolved"


@pytest.mark.parametrize("c,verdict", [(1.5, "nonexistence_speed_low"), (3.0, "nonexistence_speed_high"), (2.3, "exists_in_interval")])
def test_classify_query_speed(c, verdict):
    assert fm.classify_regime(A2, query_speed=c).verdict == verdict


def test_classify_homogeneous_low_speed():
    assert fm.classify_regime(HOM, query_speed=1.5).verdict == "nonexistence_speed_low"


def test_classifier_invariants_random_media(rng):
    for _ in range(25):
        N = int(rng.integers(0, 4))
        med = MediumProfile.from_values(rng.uniform(0.1, 4.5, 2 * N + 1).tolist())
        rep = fm.classify_regime(med)
        lam, s = rep.lambda_hat, rep.summary
        assert rep.verdict in fm.VERDICTS
        if rep.verdict == "nonexistence_lambda":
            assert lam > s.lambda_star + fm.BOUNDARY_TOL
        if lam > s.lambda_star + fm.BOUNDARY_TOL:
            assert rep.verdict == "nonexistence_lambda"
        if rep.verdict == "exists_in_interval":
            assert 1.0 <= lam < s.lambda_star and s.c_hat > s.c_star
        if rep.verdict != "boundary_unresolved":
            assert fm.classifier_twisted_consistency(med, rep)


# --- nonexistence evidence -----------------------------------------------------

def test_probe_lambda_above_critical():
    rep = fm.nonexistence_probe(MediumProfile.single_site(4.0), None, "lambda_above_critical", 2.3)
    assert rep.verdict == "nonexistence_lambda"
    assert rep.consistent
    ev = rep.evidence
    assert ev["twisted_sign_failures"] == ev["twisted_probes"]
    assert ev["measured_speed"] <= 1.05 * CSTAR
    assert ev["left_value"] == pytest.approx(ev["left_ustar"], rel=1e-6)


def test_probe_speed_low():
    rep = fm.nonexistence_probe(HOM, None, "speed_low", 1.5)
    assert rep.consistent and rep.verdict == "nonexistence_speed_low"


def test_probe_speed_high():
    rep = fm.nonexistence_probe(A2, None, "speed_high", 3.0)
    assert rep.consistent and rep.verdict == "nonexistence_speed_high"
    assert rep.evidence["twisted_sign_failure"]
    assert rep.evidence["mu_of_speed"] < rep.evidence["mu_hat"]


def test_probe_errors():
    with pytest.raises(DomainError):
        fm.nonexistence_probe(A2, None, "nonsense")
    with pytest.raises(DomainError):
        fm.nonexistence_probe(A2, None, "speed_low")


def test_duality_defect_exact_pair():
    for mu in (0.3, 0.6, critical_mu()):
        assert fm.duality_defect(c_of_mu(mu), mu) < 1e-15
