import math

import mpmath as mp
import numpy as np
import pytest

from latkpp import single_site as ss
from latkpp.dispersion import critical_mu
from latkpp.errors import DomainError
from latkpp.front_metrics import classify_regime
from latkpp.medium import MediumProfile
from latkpp.spectral import SignFailure, spectral_bound, twisted_eigenvector

mp.mp.dps = 40


def test_closed_form_a0_one_is_exponential():
    j = np.arange(-30, 31)
    assert np.allclose(ss.closed_form_phi(1.0, 0.4, j), np.exp(-0.4 * j), rtol=1e-14)


def test_closed_form_example_value():
    v = ss.closed_form_phi(2.0, 0.6, -1)
    assert v == pytest.approx(math.exp(0.6) - 1, rel=1e-14)
    assert v == pytest.approx(0.82212, abs=1e-5)


def test_closed_form_nonpositive_for_small_mu():
    vals = ss.closed_form_phi(2.0, 0.3, np.arange(-50, 0))
    assert np.any(vals <= 0)
    assert ss.positivity_threshold(0.3) == pytest.approx(1.609, abs=1e-3)


def test_closed_form_domain():
    with pytest.raises(DomainError):
        ss.closed_form_phi(2.0, 0.0, 1)
    with pytest.raises(DomainError):
        ss.summarize(0.0)


def test_lambda_closed_form_mpmath():
    for a0 in (1.5, 2.0, 3.0):
        ref = mp.sqrt((1 - mp.mpf(a0)) ** 2 + 4) - 1
        assert ss.lambda_closed_form(a0) == pytest.approx(float(ref), rel=1e-15)


def test_lambda_continuous_increasing():
    a = np.linspace(1.0, 6.0, 500)
    lam = np.array([ss.lambda_closed_form(x) for x in a])
    assert np.all(np.diff(lam) > 0)
    assert ss.lambda_closed_form(1.0 + 1e-9) == pytest.approx(1.0, abs=1e-9)
    assert ss.lambda_closed_form(1.0) == 1.0


def test_summary_a08():
    s = ss.summarize(0.8)
    assert s.regime == "always_exists_a0_le_1"
    assert s.lambda_ == 1.0 and s.unbounded and math.isinf(s.c_hat)
    assert s.interval[0] == pytest.approx(2.073, abs=1e-3) and math.isinf(s.interval[1])
    assert s.as_dict()["c_hat"] == "inf"


def test_summary_a2():
    s = ss.summarize(2.0)
    assert s.regime == "window_exists"
    mu_hat = mp.log((1 + mp.sqrt(5)) / 2)
    c_hat = (mp.e**mu_hat - 1 + mp.e**(-mu_hat)) / mu_hat
    assert s.mu_hat == pytest.approx(float(mu_hat), rel=1e-14)
    assert s.c_hat == pytest.approx(float(c_hat), rel=1e-13)


def test_summary_a35():
    assert ss.summarize(3.5).regime == "no_fronts"


def test_threshold_value():
    mu = critical_mu()
    assert ss.a0_threshold() == pytest.approx(math.exp(mu) - math.exp(-mu) + 1, rel=1e-15)
    assert ss.a0_threshold() == pytest.approx(3.073, abs=1e-3)
    assert ss.summarize(ss.a0_threshold() + 1e-3).regime == "no_fronts"
    assert ss.summarize(ss.a0_threshold() - 1e-3).regime == "window_exists"


def test_cross_validate_example():
    cv = ss.cross_validate(2.0, 0.6, 128)
    assert cv.lambda_gap < 1e-6 and cv.phi_gap < 1e-6
    assert cv.positivity_agrees and cv.verdict_agrees and cv.ok


def test_cross_validate_trivial_a1():
    cv = ss.cross_validate(1.0, 0.5, 64)
    assert cv.ok
    assert cv.verdict == classify_regime(MediumProfile.homogeneous()).verdict


def test_cross_validate_boundary():
    cv = ss.cross_validate(ss.a0_threshold(), 0.6, 64)
    assert cv.verdict == "boundary_unresolved" == cv.expected_verdict


def test_cross_validate_needs_m32():
    with pytest.raises(DomainError):
        ss.cross_validate(2.0, 0.6, 16)


def test_formula_vs_recursion_random(rng):
    for _ in range(20):
        a0 = rng.uniform(0.01, 3.0)
        mu = rng.uniform(ss.mu_hat_closed_form(a0) + 0.01, critical_mu())
        tv = twisted_eigenvector(MediumProfile.single_site(a0), mu)
        ref = ss.closed_form_bracket(a0, mu, tv.sites)
        assert np.max(np.abs(tv.values - ref)) <= 1e-10


def test_positivity_boundary_grid():
    mu = 0.5
    thr = ss.positivity_threshold(mu)
    for a0 in np.linspace(0.2, 2 * thr, 50):
        closed = ss.first_nonpositive_closed_form(a0, mu)
        scan = ss.closed_form_bracket(a0, mu, np.arange(-5000, 0))
        assert (closed is None) == (a0 <= thr)
        assert (closed is None) == bool(np.all(scan > 0) or a0 <= thr)
        rec = twisted_eigenvector(MediumProfile.single_site(a0), mu)
        assert isinstance(rec, SignFailure) == (a0 > thr)
        if closed is not None:
            assert rec.first_nonpositive == closed


def test_spectral_agreement():
    for a0 in (1.5, 2.0, 2.5, 3.0, 3.5):
        assert abs(spectral_bound(MediumProfile.single_site(a0)) - ss.lambda_closed_form(a0)) <= 1e-6


def test_sweep_csv(tmp_path):
    grid = np.linspace(0.5, 4.0, 8).tolist()
    rows = ss.sweep(grid, workers=3)
    assert [r.a0 for r in rows] == grid
    assert rows == ss.sweep(grid)
    path = tmp_path / "sweep.csv"
    ss.write_sweep_csv(path, rows, "config_sha256=x")
    lines = path.read_text().splitlines()
    assert lines[0] == "# config_sha256=x" and lines[1] == "a0,lambda,mu_hat,c_hat,regime"
    assert lines[2].endswith(",inf,always_exists_a0_le_1")
    assert lines[-1].endswith("no_fronts")
