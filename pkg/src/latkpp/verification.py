"""Fast self-checks of the invariants behind every module, used by ``latkpp verify``."""
from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from . import dispersion as disp
from . import harnack as hk
from . import heat_kernel as hkern
from . import single_site as ss
from .front_metrics import classify_regime, extract_crossings, fit_mean_speed, fit_tail_exponent
from .lattice_sim import comparison_check, construct_front, stationary_solution
from .medium import MediumProfile
from .spectral import principal_pair, spectral_bound, sturm_eigenvalue, TruncatedJacobi
from .state import LatticeState


@dataclass(frozen=True)
class CheckResult:
    name: str
    ok: bool
    detail: str
    seconds: float


def _dispersion(rng):
    s = disp.solve_dispersion(1.0)
    mus = rng.uniform(0.05, 5.0, 200)
    gap = max(abs(disp.g_of_z(disp.csch(m), m) - disp.lambda_of_mu(m)) for m in mus)
    ok = (
        abs(s.mu_star - 0.9071) < 1e-3
        and abs(s.c_star - 2.073) < 1e-3
        and abs(s.lambda_star - 1.8808) < 1e-3
        and 0.66 < s.l0 < 0.67
        and gap < 1e-10
    )
    return ok, f"mu*={s.mu_star:.10f} c*={s.c_star:.10f} lambda*={s.lambda_star:.10f} l0={s.l0:.10f} g-gap={gap:.1e}"


def _spectral(rng):
    hom = MediumProfile.homogeneous()
    worst = 0.0
    for M in (2, 8, 32, 64):
        exact = -1.0 + 2.0 * math.cos(math.pi / (2 * M + 2))
        worst = max(worst, abs(principal_pair(hom, M).lambda_M - exact), abs(sturm_eigenvalue(TruncatedJacobi(hom, M)) - exact))
    gaps = [abs(spectral_bound(MediumProfile.single_site(a)) - ss.lambda_closed_form(a)) for a in (1.5, 2.0, 2.5, 3.0)]
    ok = worst < 1e-10 and max(gaps) < 1e-6
    return ok, f"homogeneous gap={worst:.1e} single-site gap={max(gaps):.1e}"


def _twisted(rng):
    worst, agree = 0.0, True
    for _ in range(10):
        a0 = rng.uniform(0.1, 3.0)
        lo = ss.mu_hat_closed_form(a0) + 0.01
        mu = rng.uniform(max(lo, 0.02), disp.critical_mu())
        cv = ss.cross_validate(a0, mu, M=32, tol=1e-6)
        worst = max(worst, cv.phi_gap)
        agree = agree and cv.positivity_agrees
    return worst < 1e-10 and agree, f"max |recursion - closed form| = {worst:.1e}"


def _heat(rng):
    mass = max(abs(hkern.kernel_array(t, hkern.kernel_reach(t)).sum() - 1.0) for t in (0.5, 1.0, 5.0, 20.0))
    k1 = hkern.kernel_array(1.0, 60)
    semi = float(np.max(np.abs(np.convolve(k1, k1)[60:-60] - hkern.kernel_array(2.0, 60))))
    ok_bound = True
    for t in np.linspace(1, 50, 12):
        for x in range(0, int(2 * t) + 1, max(1, int(t) // 3)):
            lo, mid, hi = hkern.bessel_bound_ratio(x, float(t))
            ok_bound &= lo * (1 - 1e-12) <= mid <= hi * (1 + 1e-12)
            ok_bound &= hkern.graph_kernel(float(t), x) <= hkern.graph_kernel_upper(float(t), x) * (1 + 1e-12)
    ok = mass < 1e-10 and semi < 1e-9 and ok_bound
    return ok, f"mass={mass:.1e} semigroup={semi:.1e} bounds={'ok' if ok_bound else 'FAIL'}"


def _duhamel(rng):
    from .lattice_sim import integrate

    hom = MediumProfile.homogeneous()
    st = LatticeState.from_function(lambda j: 0.8 * math.exp(-j * j / 200.0), -100, 100)
    a = hkern.mild_solution_step(st, 0.0, 0.5, hom)
    b = integrate(st, 0.0125, 0.5, hom, auto_extend=False)
    gap = float(np.max(np.abs(a.values - b.values)))
    return gap < 1e-6, f"Duhamel vs RK4 gap={gap:.1e}"


def _comparison(rng):
    med = MediumProfile.single_site(2.0)
    us = stationary_solution(med)
    lo, hi = us.j_min, us.j_max
    w = LatticeState(lo, us.values.copy(), 0.0, "dirichlet_constant", 1.0, 1.0)
    z = LatticeState(lo, 0.5 * us.values, 0.0, "dirichlet_constant", 0.5, 0.5)
    rep = comparison_check(z, w, 20.0, med)
    return rep.ordered and rep.strict, f"max violation={rep.max_violation:.1e} min gap={rep.min_gap:.2e}"


def _fronts(rng):
    out = []
    ok = True
    for med, c in ((MediumProfile.homogeneous(), 2.2), (MediumProfile.single_site(2.0), 2.3)):
        fc = construct_front(med, None, c, 4, t_obs=100.0)
        tr = extract_crossings(fc.trajectory, fc.stationary)
        sp = fit_mean_speed(tr, (40.0, 100.0))
        tf = fit_tail_exponent(fc.profile(), c, (10.0, 30.0))
        ok &= abs(sp.c_est - c) < 0.03 * c and abs(tf.mu_est - fc.mu) < 0.03 * fc.mu and fc.squeeze_violation <= 1e-6
        out.append(f"c={c}: c_est={sp.c_est:.5f} mu_est={tf.mu_est:.5f}/{fc.mu:.5f}")
    return ok, "; ".join(out)


def _regimes(rng):
    rows = {a: classify_regime(MediumProfile.single_site(a)) for a in (0.8, 2.0, 3.5)}
    edge = classify_regime(MediumProfile.single_site(ss.a0_threshold()))
    r2 = rows[2.0]
    ok = (
        rows[0.8].verdict == "exists_in_interval"
        and math.isinf(rows[0.8].interval[1])
        and r2.verdict == "exists_in_interval"
        and abs(r2.interval[0] - 2.073) < 1e-3
        and abs(r2.interval[1] - 2.569) < 1e-3
        and rows[3.5].verdict == "nonexistence_lambda"
        and edge.verdict == "boundary_unresolved"
    )
    return ok, f"a0=2 interval=[{r2.interval[0]:.4f}, {r2.interval[1]:.4f}] boundary verdict={edge.verdict}"


def _harnack(rng):
    poincare = True
    for _ in range(200):
        r = int(rng.integers(1, 51))
        poincare &= hk.check_poincare(rng.normal(size=2 * r + 1), r).holds
    dbl = hk.check_doubling(10_000)
    ratios = []
    for r in (10, 20):
        spec = hk.CylinderSpec(r)
        ratios.append(hk.harnack_ratio(hk.delta_initial(spec), spec).C_empirical)
    ok = poincare and dbl.holds and hk.check_delta_star(0.5) and all(math.isfinite(x) for x in ratios)
    return ok, f"doubling worst={dbl.worst_ratio:.6f} harnack ratios={[round(x, 4) for x in ratios]}"


CHECKS = (
    ("dispersion", _dispersion),
    ("spectral", _spectral),
    ("twisted", _twisted),
    ("heat_kernel", _heat),
    ("duhamel", _duhamel),
    ("comparison", _comparison),
    ("fronts", _fronts),
    ("regimes", _regimes),
    ("harnack", _harnack),
)


def run_checks(seed: int = 0, names=None) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    results = []
    for name, fn in CHECKS:
        if names and name not in names:
            continue
        t0 = time.perf_counter()
        try:
            ok, detail = fn(rng)
        except Exception as exc:  # a crash is a failed check, reported with its message
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        results.append(CheckResult(name, bool(ok), detail, time.perf_counter() - t0))
    return results
