"""Command-line entry point: ``latkpp [flags] <command>``.

Every command reads the YAML experiment file given by ``--config`` (see
:mod:`latkpp.config` for the schema), writes CSV and/or JSON into ``--out``
and prints the JSON report to stdout. CSV files start with a
``# config_sha256=...`` comment line followed by a header row; floats carry 17
significant digits. JSON reports are flat objects with ``schema_version``,
``command`` and ``config_sha256`` fields.

Exit status: 0 on success, 1 when ``verify`` finds a failing check, 2 for an
invalid configuration, 3 for a numerical failure inside a module.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from .config import SCHEMA_VERSION, ExperimentConfig, load_config
from .dispersion import critical_mu, solve_dispersion
from .errors import ConfigError, LatKPPError
from .front_metrics import (
    classifier_twisted_consistency,
    classify_regime,
    duality_defect,
    extract_crossings,
    fit_mean_speed,
    fit_tail_exponent,
)
from .harnack import CylinderSpec, delta_initial, harnack_trials, random_initials
from .lattice_sim import construct_front, simulate, stationary_solution
from .single_site import sweep, write_sweep_csv
from .spectral import SignFailure, principal_pair, spectral_bound, twisted_eigenvector
from .state import LatticeState

log = logging.getLogger("latkpp")

COMMANDS = ("dispersion", "spectrum", "simulate", "front", "classify", "harnack", "example", "verify")


# --- output helpers -----------------------------------------------------------

def fmt(x) -> str:
    """CSV cell: 17 significant digits for floats, ``inf``/``-inf``/``nan`` spelled out."""
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def _json_value(v):
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if math.isfinite(v) else str(v)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.bool_):
        return bool(v)
    if isinstance(v, (list, tuple)):
        return [_json_value(x) for x in v]
    return v


def flatten(d: dict, prefix: str = "") -> dict:
    """Nested mappings become dotted keys; non-finite floats become strings."""
    out = {}
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(flatten(v, key + "."))
        else:
            out[key] = _json_value(v)
    return out


class Writer:
    def __init__(self, cfg: ExperimentConfig, command: str):
        self.cfg = cfg
        self.command = command
        self.sha = cfg.sha256
        self.files: list[str] = []
        os.makedirs(cfg.out_dir, exist_ok=True)

    def _path(self, name):
        path = os.path.join(self.cfg.out_dir, name)
        self.files.append(path)
        return path

    def csv(self, name: str, header, rows):
        if "csv" not in self.cfg.formats:
            return
        with open(self._path(name), "w", newline="") as fh:
            fh.write(f"# config_sha256={self.sha}\n")
            wr = csv.writer(fh, lineterminator="\n")
            wr.writerow(header)
            for row in rows:
                wr.writerow([fmt(x) for x in row])

    def report(self, body: dict) -> dict:
        doc = {"schema_version": SCHEMA_VERSION, "command": self.command, "config_sha256": self.sha}
        doc.update(flatten(body))
        if "json" in self.cfg.formats:
            with open(self._path(f"{self.command}.json"), "w") as fh:
                json.dump(doc, fh, indent=2, sort_keys=True)
                fh.write("\n")
        return doc


# --- commands -----------------------------------------------------------------

def cmd_dispersion(cfg: ExperimentConfig, out: Writer):
    lam = cfg.query["lambda"]
    source = "query"
    if lam is None:
        lam, source = spectral_bound(cfg.medium), "medium"
        if abs(lam - 1.0) <= 1e-6:
            lam = 1.0
    s = solve_dispersion(lam)
    body = s.as_dict()
    body["mu_hat_flag"] = "zero" if s.unbounded else "finite"
    body["window_exists"] = s.window_exists
    body["lambda_source"] = source
    return out.report(body)


def _twisted_mu(cfg, summary):
    if cfg.query["mu"] is not None:
        return cfg.query["mu"]
    if summary.window_exists:
        return 0.5 * (summary.mu_hat + summary.mu_star)
    return 0.5 * summary.mu_star


def cmd_spectrum(cfg: ExperimentConfig, out: Writer):
    med = cfg.medium
    Ms = []
    M = max(8, med.N + 1)
    while M <= cfg.query["M_max"]:
        Ms.append(M)
        M *= 2
    if not Ms:
        raise ConfigError("query.M_max", f"must be at least {max(8, med.N + 1)}")
    with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
        pairs = list(pool.map(lambda m: principal_pair(med, m), Ms))
    out.csv(
        "lambda_M.csv",
        ["M", "lambda_M", "residual", "method", "iterations"],
        [(p.M, p.lambda_M, p.residual, p.method, p.iterations) for p in pairs],
    )
    lam = spectral_bound(med)
    s = solve_dispersion(1.0 if abs(lam - 1.0) <= 1e-6 else lam)
    mu = _twisted_mu(cfg, s)
    tv = twisted_eigenvector(med, mu)
    body = {
        "lambda_hat": lam,
        "lambda_M_last": pairs[-1].lambda_M,
        "monotone": bool(all(b.lambda_M >= a.lambda_M - 1e-12 for a, b in zip(pairs, pairs[1:]))),
        "twisted_mu": mu,
    }
    if isinstance(tv, SignFailure):
        body.update(twisted_status="sign_failure", first_nonpositive=tv.first_nonpositive)
        sites = np.arange(tv.j_min, tv.j_min + tv.values.size)
        vals = tv.values
    else:
        body.update(twisted_status=tv.tail_class, tail_limit=tv.limit, C1=tv.C1, C2=tv.C2)
        sites, vals = tv.sites, tv.values
    out.csv("twisted.csv", ["j", "phi_twisted", "psi"], [(j, v, v * math.exp(-mu * j)) for j, v in zip(sites, vals)])
    return out.report(body)


def _initial_state(cfg: ExperimentConfig, ustar):
    med, sim = cfg.medium, cfg.sim
    lo, hi = sim["window"] or (-med.N - 50, med.N + 50)
    sites = np.arange(lo, hi + 1)
    u0 = np.where(sites <= 0, ustar.value(sites), 0.0)
    policy = sim["boundary_policy"]
    if policy == "clamp_zero_both":
        return LatticeState(lo, u0, 0.0, policy)
    return LatticeState(lo, u0, 0.0, policy, float(ustar.value(lo - 1)), 0.0)


def _snapshot_rows(traj, every: float):
    stride = max(1, int(round(every / traj.stride))) if every else 1
    for k in range(0, traj.times.size, stride):
        t = traj.times[k]
        for j, u in zip(traj.sites, traj.values[k]):
            yield (t, j, u)


def cmd_simulate(cfg: ExperimentConfig, out: Writer):
    ustar = stationary_solution(cfg.medium, cfg.model)
    state = _initial_state(cfg, ustar)
    sim = cfg.sim
    traj, final = simulate(state, sim["t_end"], cfg.medium, cfg.model, dt=sim["dt"], sample_every=sim["sample_stride"])
    trace = extract_crossings(traj, ustar)
    out.csv("profile_final.csv", ["j", "u", "u_star"], [(j, u, ustar.value(int(j))) for j, u in zip(final.sites, final.values)])
    out.csv("profiles.csv", ["t", "j", "u"], _snapshot_rows(traj, 1.0))
    out.csv("crossings.csv", ["j", "t_j"], trace.rows())
    body = {"t_end": final.t, "sites": len(final), "level": trace.level, "crossings": len(trace), "flagged": trace.flagged}
    ta, tb = cfg.query["speed_window"]
    tb = min(tb, final.t)
    try:
        fit = fit_mean_speed(trace, (ta, tb))
        body.update(c_est=fit.c_est, ci_halfwidth=fit.ci_halfwidth, rms=fit.rms)
    except LatKPPError as exc:
        body["speed_fit_error"] = str(exc)
    return out.report(body)


def cmd_front(cfg: ExperimentConfig, out: Writer):
    med, model = cfg.medium, cfg.model
    lam = spectral_bound(med)
    s = solve_dispersion(1.0 if abs(lam - 1.0) <= 1e-6 else lam)
    c = cfg.query["speed"]
    if c is None:
        c = 0.5 * (s.c_star + min(s.c_hat, s.c_star + 0.5))
    sim = cfg.sim
    fc = construct_front(
        med, model, c, sim["n_max"], t_obs=sim["t_end"], dt=sim["dt"], sample_every=sim["sample_stride"],
        workers=cfg.threads, lambda_hat=lam,
    )
    trace = extract_crossings(fc.trajectory, fc.stationary)
    ta, tb = cfg.query["speed_window"]
    fit = fit_mean_speed(trace, (ta, min(tb, fc.t_obs)))
    tail = fit_tail_exponent(fc.profile(), c, cfg.query["tail_range"])
    if "csv" in cfg.formats:
        path = os.path.join(cfg.out_dir, "front_profile.csv")
        out.files.append(path)
        fc.write_csv(path, header_comment=f"config_sha256={out.sha}")
    out.csv("crossings.csv", ["j", "t_j"], trace.rows())
    body = {
        "c": c,
        "mu": fc.mu,
        "mu1": fc.mu1,
        "d1": fc.d1,
        "n_max": len(fc.runs),
        "squeeze_violation": fc.squeeze_violation,
        "monotone_violation": fc.monotone_violation,
        "cauchy_gap": fc.cauchy_gaps[-1] if fc.cauchy_gaps else None,
        "converged": fc.converged,
        "c_est": fit.c_est,
        "ci_halfwidth": fit.ci_halfwidth,
        "mu_est": tail.mu_est,
        "tail_residual": tail.residual,
        "duality_defect": duality_defect(fit.c_est, tail.mu_est),
        "crossings": len(trace),
        "flagged": trace.flagged,
        "tail_ratio": {fmt(k): v for k, v in fc.tail.items()},
    }
    return out.report(body)


def cmd_classify(cfg: ExperimentConfig, out: Writer):
    rep = classify_regime(cfg.medium, cfg.model, cfg.query["speed"])
    body = rep.as_dict()
    iv = body.pop("interval")
    body["interval_lo"], body["interval_hi"] = iv if iv is not None else (None, None)
    body["twisted_consistent"] = classifier_twisted_consistency(cfg.medium, rep)
    return out.report(body)


def cmd_harnack(cfg: ExperimentConfig, out: Writer):
    h = cfg.harnack
    rng = np.random.default_rng(cfg.seed)
    rows, body = [], {}
    for r in h["radii"]:
        spec = CylinderSpec(r, eta=h["eta"], theta=h["theta"])
        initials = [delta_initial(spec)] + random_initials(spec, h["trials"], rng)
        rep = harnack_trials(initials, spec, workers=cfg.threads)
        rows.extend((k, r, ratio) for k, ratio in enumerate(rep.ratios))
        body[f"r{r}"] = {"C_empirical": rep.C_empirical, "delta_ratio": rep.ratios[0] if rep.ratios else None, "excluded": rep.excluded}
    out.csv("harnack.csv", ["trial", "r", "ratio"], rows)
    body.update(eta=h["eta"], theta=list(h["theta"]), trials=h["trials"] + 1)
    return out.report(body)


def cmd_example(cfg: ExperimentConfig, out: Writer):
    start, stop, num = cfg.query["a0_grid"]
    grid = np.linspace(start, stop, num)
    rows = sweep(grid.tolist(), workers=cfg.threads)
    if "csv" in cfg.formats:
        path = os.path.join(cfg.out_dir, "single_site_sweep.csv")
        out.files.append(path)
        write_sweep_csv(path, rows, header_comment=f"config_sha256={out.sha}")
    counts = {}
    for s in rows:
        counts[s.regime] = counts.get(s.regime, 0) + 1
    return out.report({"points": len(rows), "regimes": counts, "mu_star": critical_mu()})


def cmd_verify(cfg: ExperimentConfig, out: Writer):
    from .verification import run_checks

    results = run_checks(cfg.seed)
    for r in results:
        print(f"{'PASS' if r.ok else 'FAIL'} {r.name:12s} {r.seconds:7.2f}s  {r.detail}", file=sys.stderr)
    out.csv("verify.csv", ["check", "ok", "detail"], [(r.name, r.ok, r.detail) for r in results])
    body = {r.name: r.ok for r in results}
    body["all_passed"] = all(r.ok for r in results)
    return out.report(body)


DISPATCH = {
    "dispersion": cmd_dispersion,
    "spectrum": cmd_spectrum,
    "simulate": cmd_simulate,
    "front": cmd_front,
    "classify": cmd_classify,
    "harnack": cmd_harnack,
    "example": cmd_example,
    "verify": cmd_verify,
}


def _u64(text: str) -> int:
    try:
        v = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return v


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", default=argparse.SUPPRESS, help="YAML experiment file")
    common.add_argument("--seed", metavar="U64", type=_u64, default=argparse.SUPPRESS, help="override the config seed")
    common.add_argument("--out", metavar="DIR", default=argparse.SUPPRESS, help="output directory")
    common.add_argument("--threads", metavar="K", type=_positive, default=argparse.SUPPRESS, help="worker threads for sweeps")
    common.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS)

    p = argparse.ArgumentParser(prog="latkpp", description="Lattice KPP fronts in perturbed media.", parents=[common])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")
    helps = {
        "dispersion": "critical constants for the medium (or query.lambda)",
        "spectrum": "truncated eigenvalues and a twisted eigenvector",
        "simulate": "forward run from step data",
        "front": "squeeze construction of a front at query.speed",
        "classify": "existence verdict for the medium",
        "harnack": "empirical parabolic Harnack ratios",
        "example": "single-site sweep over query.a0_grid",
        "verify": "run the invariant checks",
    }
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name])
    return p


def main(argv=None) -> int:
    args = vars(build_parser().parse_args(argv))
    logging.basicConfig(level=logging.INFO if args.get("verbose") else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    command = args["command"]
    try:
        cfg = load_config(args.get("config"), seed=args.get("seed"), threads=args.get("threads"), out=args.get("out"))
    except ConfigError as exc:
        print(f"latkpp: invalid config: {exc}", file=sys.stderr)
        return 2
    try:
        doc = DISPATCH[command](cfg, Writer(cfg, command))
    except ConfigError as exc:
        print(f"latkpp: invalid config: {exc}", file=sys.stderr)
        return 2
    except LatKPPError as exc:
        print(f"latkpp {command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    print(json.dumps(doc, indent=2, sort_keys=True))
    if command == "verify" and not doc["all_passed"]:
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
