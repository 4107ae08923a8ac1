import math

import numpy as np
import pytest
from scipy.optimize import root

from latkpp import lattice_sim as ls
from latkpp.dispersion import c_of_mu, critical_mu, lambda_of_mu, mu_of_speed
from latkpp.errors import ConstructionError, DomainError, IntegratorError
from latkpp.medium import MediumProfile, NonlinearityModel
from latkpp.spectral import twisted_eigenvector
from latkpp.state import LatticeState, Trajectory

HOM = MediumProfile.homogeneous()
A2 = MediumProfile.single_site(2.0)


@pytest.fixture(scope="module")
def ustar2():
    return ls.stationary_solution(A2)


@pytest.fixture(scope="module")
def front_hom():
    return ls.construct_front(HOM, None, 2.2, 8, t_obs=150.0)


@pytest.fixture(scope="module")
def front_a2():
    return ls.construct_front(A2, None, 2.3, 6, t_obs=100.0)


# --- medium and model ---------------------------------------------------------

def test_model_hypotheses():
    m = NonlinearityModel()
    u = np.linspace(0, 5, 11)
    assert np.all(m.fprime(2.0, u) == -1.0)
    assert m.f(2.0, 0.0) == 2.0
    assert np.all(m.f(2.0, u[u > m.level(A2)]) < 0)
    assert m.validate(A2)
    with pytest.raises(DomainError):
        NonlinearityModel(L0=1.5).validate(A2)
    with pytest.raises(DomainError):
        NonlinearityModel(L=0.5)


def test_medium_rejects_nonpositive():
    with pytest.raises(DomainError):
        MediumProfile.from_values([1.0, 0.0, 1.0])


# --- rhs ----------------------------------------------------------------------

def test_rhs_zero_state():
    st = LatticeState(-10, np.zeros(21))
    assert np.all(ls.rhs(st, A2) == 0.0)


def test_rhs_homogeneous_one():
    st = LatticeState(-10, np.ones(21), boundary_policy="dirichlet_constant", left_ghost=1.0, right_ghost=1.0)
    assert np.all(ls.rhs(st, HOM) == 0.0)


def test_rhs_single_site_one():
    st = LatticeState(-10, np.ones(21), boundary_policy="dirichlet_constant", left_ghost=1.0, right_ghost=1.0)
    r = ls.rhs(st, A2)
    assert r[10] == 1.0 and np.count_nonzero(r) == 1


def test_boundary_policies():
    st = LatticeState(-2, [1.0, 1.0, 1.0, 1.0, 1.0], boundary_policy="dirichlet_stationary_left_zero_right", left_ghost=1.0)
    r = ls.rhs(st, HOM)
    assert r[0] == 0.0 and r[-1] == -1.0
    st = LatticeState(-2, np.ones(5))
    assert st.left_ghost == 0.0 and ls.rhs(st, HOM)[0] == -1.0
    with pytest.raises(DomainError):
        LatticeState(0, [1.0], boundary_policy="periodic")


# --- integrator ---------------------------------------------------------------

def test_stationary_state_is_preserved(ustar2):
    st = LatticeState(ustar2.j_min, ustar2.values.copy(), 0.0, "dirichlet_constant", 1.0, 1.0)
    out = ls.integrate(st, 0.05, 50.0, A2, auto_extend=False)
    assert np.max(np.abs(out.values - ustar2.values)) <= 1e-8


def test_fourth_order_convergence():
    st = LatticeState.from_function(lambda j: 0.9 * math.exp(-j * j / 50.0), -60, 60)
    ref = ls.integrate(st, 0.0125, 5.0, A2, auto_extend=False).values
    e1 = np.max(np.abs(ls.integrate(st, 0.1, 5.0, A2, auto_extend=False).values - ref))
    e2 = np.max(np.abs(ls.integrate(st, 0.05, 5.0, A2, auto_extend=False).values - ref))
    assert 12.0 < e1 / e2 < 20.0


def test_dt_cap():
    st = LatticeState(-5, np.zeros(11))
    with pytest.raises(DomainError):
        ls.integrate(st, 0.25, 1.0, HOM)


def test_invariant_region_violation_reports_index():
    st = LatticeState(-20, np.full(41, 0.4))
    with pytest.raises(IntegratorError) as exc:
        ls.integrate(st, 0.05, 5.0, A2, upper=0.5, auto_extend=False)
    assert exc.value.index is not None and exc.value.time is not None


def test_window_grows_with_front():
    st = LatticeState(-50, np.where(np.arange(-50, 51) <= 0, 1.0, 0.0), 0.0, "dirichlet_stationary_left_zero_right", 1.0)
    out = ls.integrate(st, 0.05, 40.0, HOM)
    assert out.j_max > 50
    assert np.max(out.values[-ls.EDGE_SITES:]) <= ls.EDGE_THRESHOLD


def test_invariant_region_along_trajectory(ustar2):
    st = LatticeState(-150, np.where(np.arange(-150, 151) <= 0, ustar2.value(np.arange(-150, 151)), 0.0),
                      0.0, "dirichlet_stationary_left_zero_right", 1.0)
    traj, _ = ls.simulate(st, 30.0, A2, sample_every=0.5)
    top = max(float(ustar2.values.max()), 1.0)
    assert traj.values.min() >= -1e-12
    assert traj.values.max() <= top + 1e-9


def test_simulate_sampling():
    st = LatticeState(-10, np.zeros(21))
    traj, final = ls.simulate(st, 2.0, HOM, sample_every=0.25, auto_extend=False)
    assert isinstance(traj, Trajectory)
    assert traj.times.size == 9 and traj.stride == pytest.approx(0.25)
    assert final.t == 2.0
    with pytest.raises(DomainError):
        ls.simulate(st, 1.1, HOM, sample_every=0.25)


# --- stationary solution ------------------------------------------------------

def _algebraic_ustar(medium, lo, hi):
    a = medium.coefficients(lo, hi)

    def F(u):
        ext = np.concatenate([[1.0], u, [1.0]])
        return ext[2:] - 2.0 * u + ext[:-2] + (a - u) * u

    sol = root(F, np.ones(hi - lo + 1), method="hybr", tol=1e-14)
    assert sol.success
    return sol.x


def test_stationary_homogeneous():
    us = ls.stationary_solution(HOM)
    assert np.max(np.abs(us.values - 1.0)) <= 1e-9


@pytest.mark.parametrize("a0", [2.0, 0.5])
def test_stationary_single_site_against_root(a0):
    med = MediumProfile.single_site(a0)
    us = ls.stationary_solution(med)
    ref = _algebraic_ustar(med, us.j_min, us.j_max)
    assert np.max(np.abs(us.values - ref)) < 1e-8
    assert us.residual <= 1e-9
    assert us.edge_deviation < 1e-6
    if a0 > 1:
        assert us.value(0) > 1
    else:
        assert 0 < us.value(0) < 1


def test_stationary_window_precondition():
    with pytest.raises(DomainError):
        ls.stationary_solution(A2, window=(-50, 50))


# --- super- and sub-solutions -------------------------------------------------

def test_super_solution_homogeneous_is_exponential():
    phi = twisted_eigenvector(HOM, 0.5)
    j = np.arange(-5, 6)
    assert np.allclose(ls.super_solution(0.5, 2.3, phi, j, 1.0), np.exp(-0.5 * (j - 2.3)), rtol=1e-14)


def test_super_solution_decays_beyond_n():
    phi = twisted_eigenvector(A2, 0.6)
    v = ls.super_solution(0.6, c_of_mu(0.6), phi, np.arange(2, 100), 0.0)
    assert np.all(np.diff(v) < 0) and v[-1] < 1e-20


def test_super_solution_clipped(ustar2):
    phi = twisted_eigenvector(A2, 0.6)
    j = np.arange(-40, 40)
    v = ls.super_solution(0.6, c_of_mu(0.6), phi, j, 0.0, ustar2)
    assert np.all(v <= ustar2.value(j))


@pytest.mark.parametrize("medium,c", [(HOM, 2.2), (A2, 2.3), (A2, 2.5)])
def test_super_defect_nonnegative(rng, medium, c):
    mu = mu_of_speed(c)
    phi = twisted_eigenvector(medium, mu)
    for _ in range(1000 // 20):
        t = rng.uniform(-10, 10)
        j0 = int(math.floor(c * t + rng.uniform(-10, 40)))
        d = ls.super_defect(mu, c, phi, medium, np.arange(j0, j0 + 20), t)
        assert d.min() >= -1e-8


@pytest.mark.parametrize("medium,c", [(HOM, 2.2), (A2, 2.3)])
def test_sub_defect_nonpositive_where_positive(rng, medium, c):
    mu = mu_of_speed(c)
    mu1 = ls.default_mu1(mu)
    p, p1 = twisted_eigenvector(medium, mu), twisted_eigenvector(medium, mu1)
    d1 = 1.1 * ls.d1_bound(mu, mu1, c, p, p1)
    for _ in range(1000 // 20):
        t = rng.uniform(-10, 10)
        j0 = int(math.floor(c * t + rng.uniform(-10, 40)))
        j = np.arange(j0, j0 + 20)
        d = ls.sub_defect(mu, mu1, c, p, p1, d1, medium, j, t)
        val = ls.sub_solution(mu, mu1, c, p, p1, d1, j, t)
        pos = val > 0
        if pos.any():
            assert d[pos].max() <= 1e-8


def test_sub_solution_tail_ratio():
    c = 2.2
    mu = mu_of_speed(c)
    mu1 = ls.default_mu1(mu)
    p, p1 = twisted_eigenvector(HOM, mu), twisted_eigenvector(HOM, mu1)
    d1 = 1.1 * ls.d1_bound(mu, mu1, c, p, p1)
    j = np.array([50, 100, 200])
    sub = ls.sub_solution(mu, mu1, c, p, p1, d1, j, 0.0)
    sup = ls.super_solution(mu, c, p, j, 0.0)
    assert np.all(sub > 0)
    r = sub / sup
    assert np.all(np.diff(r) > 0) and r[-1] > 1 - 1e-8


def test_d1_bound_homogeneous_formula():
    mu, mu1 = 0.5, 0.8
    c = c_of_mu(0.5)
    p, p1 = twisted_eigenvector(HOM, mu), twisted_eigenvector(HOM, mu1)
    expect = max(1.0, 1.0 / (0.8 * c - lambda_of_mu(0.8)))
    assert ls.d1_bound(mu, mu1, c, p, p1) == pytest.approx(expect, rel=1e-12)


def test_mu_ordering_enforced():
    with pytest.raises(DomainError):
        ls.check_mu_order(0.5, 0.4)
    with pytest.raises(DomainError):
        ls.check_mu_order(0.3, 0.7)
    with pytest.raises(DomainError):
        ls.check_mu_order(0.6, critical_mu() + 0.01)
    ls.check_mu_order(0.5, 0.8)


# --- comparison ---------------------------------------------------------------

def _pair(us, zf, wf, zg=0.0, wg=1.0):
    z = LatticeState(us.j_min, zf * us.values, 0.0, "dirichlet_constant", zg, zg)
    w = LatticeState(us.j_min, wf * us.values, 0.0, "dirichlet_constant", wg, wg)
    return z, w


def test_comparison_zero_below_stationary(ustar2):
    rep = ls.comparison_check(*_pair(ustar2, 0.0, 1.0), 50.0, A2)
    assert rep.ordered and rep.strict and rep.max_violation == 0.0


def test_comparison_half_is_strict(ustar2):
    rep = ls.comparison_check(*_pair(ustar2, 0.5, 1.0, 0.5, 1.0), 50.0, A2)
    assert rep.ordered and rep.strict
    assert rep.min_gap > 0 and rep.times[-1] == pytest.approx(50.0)


def test_comparison_rejects_unordered(ustar2):
    w, z = _pair(ustar2, 0.5, 1.0, 0.5, 1.0)
    with pytest.raises(DomainError):
        ls.comparison_check(z, w, 1.0, A2)


def test_comparison_random_pairs(rng):
    for trial in range(100):
        N = int(rng.integers(0, 5))
        med = MediumProfile.from_values(rng.uniform(0.2, 3.0, 2 * N + 1).tolist())
        us = ls.stationary_solution(med)
        lo, hi = -N - 30, N + 30
        top = us.on(lo, hi)
        w = rng.uniform(0, 1, top.size) * top
        z = rng.uniform(0, 1, top.size) * w
        zs = LatticeState(lo, z, 0.0, "clamp_zero_both")
        ws = LatticeState(lo, w, 0.0, "clamp_zero_both")
        rep = ls.comparison_check(zs, ws, 10.0, med, sample_every=1.0)
        assert rep.ordered, (trial, rep.max_violation)
        assert rep.strict, trial


# --- front construction -------------------------------------------------------

def test_front_below_minimal_speed_rejected():
    with pytest.raises(DomainError):
        ls.construct_front(HOM, None, 2.0, 2)


def test_front_above_maximal_speed_rejected():
    with pytest.raises(DomainError):
        ls.construct_front(A2, None, 2.7, 2)


def test_front_no_window_rejected():
    with pytest.raises(DomainError):
        ls.construct_front(MediumProfile.single_site(4.0), None, 2.3, 2)


def test_front_homogeneous(front_hom):
    fc = front_hom
    assert fc.squeeze_violation <= ls.SQUEEZE_TOL
    assert fc.monotone
    assert fc.converged
    assert fc.mu == pytest.approx(mu_of_speed(2.2), rel=1e-12)
    assert fc.mu < fc.mu1 < min(2 * fc.mu, critical_mu())
    assert fc.tail[30.0] == pytest.approx(1.0, abs=1e-3)


def test_front_single_site(front_a2):
    fc = front_a2
    assert fc.squeeze_violation <= ls.SQUEEZE_TOL
    assert fc.monotone and fc.converged
    # near the perturbation the profile carries the phi^mu modulation of the super-solution
    st = fc.profile()
    jf = int(round(fc.c * st.t))
    assert fc.tail[20.0] == pytest.approx(1.0, abs=1e-3)
    assert st.value(jf + 30) / ls.super_solution(fc.mu, fc.c, fc.phi_mu, jf + 30, st.t) == pytest.approx(1.0, abs=1e-3)


def test_front_profile_rows_and_csv(front_a2, tmp_path):
    rows = front_a2.profile_rows()
    j, u, ubar, clipped, usub = map(np.array, zip(*rows))
    assert np.all(usub - 1e-6 <= u) and np.all(u <= clipped + 1e-6)
    assert np.all(clipped <= ubar)
    path = tmp_path / "front.csv"
    front_a2.write_csv(path, header_comment="config_sha256=abc")
    lines = path.read_text().splitlines()
    assert lines[0] == "# config_sha256=abc"
    assert lines[1] == "j,u,ubar,ubar_clipped,usub"
    assert len(lines) == len(rows) + 2
    assert float(lines[2].split(",")[1]) == rows[0][1]


def test_squeezing_sequence_decreases(front_a2):
    fc = front_a2
    for prev, cur in zip(fc.runs[:-1], fc.runs[1:]):
        _, vp, vc = ls._align(prev, cur)
        assert np.max(vc - vp) <= 1e-9


def test_squeeze_failure_is_reported(monkeypatch):
    monkeypatch.setattr(ls, "SQUEEZE_TOL", -1.0)
    with pytest.raises(ConstructionError):
        ls.construct_front(HOM, None, 2.2, 1, t_obs=5.0)


def test_parallel_runs_match_serial():
    a = ls.construct_front(A2, None, 2.4, 3, t_obs=20.0)
    b = ls.construct_front(A2, None, 2.4, 3, t_obs=20.0, workers=3)
    for ra, rb in zip(a.runs, b.runs):
        assert np.array_equal(ra.values, rb.values)


def test_approach_minimal_speed():
    fronts = ls.approach_minimal_speed(HOM, None, k=2, n_max=2, t_obs=20.0)
    cs = [f.c for f in fronts]
    assert all(b < a for a, b in zip(cs, cs[1:]))
    assert all(c > c_of_mu(critical_mu()) for c in cs)
