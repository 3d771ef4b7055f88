"""Command line driver: run orchestration, sweeps, verification, outputs.

Subcommands: charfunc, workdist, moments, verify, sweep, oracle-compare.
Exit codes: 0 success, 1 a verification check failed its tolerance,
2 usage or configuration errors.

All CSV output is comma separated with a header row; '#' lines are
comments.  Floats are printed with 17 significant digits so files
round-trip exactly.  Runs are deterministic: the same config produces
byte-identical outputs.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace

import numpy as np

from . import workdist as wd
from .charfunc import charfunc_pointlike, charfunc_samples
from .config import RunConfig, load_config
from .errors import (AccuracyError, ConfigError, ConvergenceError, DomainError,
                     ParameterError, SpectrumParseError, TruncationError,
                     WindowError)
from .fockoracle import FockOracle, FockOracleConfig
from .spectra import KIND_CONTINUUM, lapse_rescale
from .wightman import kms_residual, thermal_wightman

# tolerances of the verification suite
VERIFY_TOLS = {
    "kms_residual": 1e-10,
    "charfunc_kms_residual": 1e-10,
    "jarzynski_error": 1e-10,
    "jarzynski_error_atoms": 1e-8,
    "crooks_residual_single": 1e-10,
    "crooks_residual_multi": 1e-8,
    "oracle_max_absdiff": 1e-6,
}


def _fmt(x):
    return f"{x:.17g}"


def _write_csv(path, header, rows, comments=()):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for line in comments:
            fh.write(f"# {line}\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) if isinstance(v, float) else str(v)
                              for v in row) + "\n")


def _mu_grid(cfg):
    n = int(cfg.mu_n)
    return cfg.mu_min + (cfg.mu_max - cfg.mu_min) / n * np.arange(n)


def _outdir(cfg, args):
    out = args.out if args.out is not None else cfg.outdir
    os.makedirs(out, exist_ok=True)
    return out


def _apply_grid_overrides(cfg, args):
    for attr, flag in (("mu_min", "mu_min"), ("mu_max", "mu_max"), ("mu_n", "mu_n")):
        val = getattr(args, flag, None)
        if val is not None:
            setattr(cfg, attr, val)
    if not (cfg.mu_max > cfg.mu_min and cfg.mu_n >= 2):
        raise ConfigError("bad mu grid after flag overrides")


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_charfunc(cfg, args):
    out = _outdir(cfg, args)
    samples = charfunc_samples(cfg.params, cfg.mu_min, cfg.mu_max, cfg.mu_n)
    path = os.path.join(out, "charfunc.csv")
    _write_csv(path, ("mu", "re", "im"),
               ((float(m), float(v.real), float(v.imag))
                for m, v in zip(samples.mu_grid, samples.values)),
               comments=(f"spectrum: {cfg.params.spec.provenance}",
                         f"switching: {cfg.params.switching.declaration()}",
                         f"beta = {_fmt(cfg.params.beta)}",
                         f"lambda = {_fmt(cfg.params.lam)}"))
    print(path)
    return 0


def cmd_workdist(cfg, args):
    out = _outdir(cfg, args)
    params = cfg.params
    if params.spec.kind == KIND_CONTINUUM:
        samples = charfunc_samples(params, cfg.mu_min, cfg.mu_max, cfg.mu_n)
        dens = wd.invert_fft(samples, apodization=cfg.apodization)
        path = os.path.join(out, "density.csv")
        # negativity detector: the Ramsey distribution is a quasiprobability
        # in general; any negative mass is reported, never asserted away
        neg_mass = -float(np.sum(dens.density[dens.density < 0.0])) * dens.dw
        _write_csv(path, ("W", "p_density"),
                   ((float(w), float(d)) for w, d in zip(dens.w_grid, dens.density)),
                   comments=(f"atom_at_zero = {_fmt(dens.atom_at_zero)}",
                             f"imag_residue = {_fmt(dens.imag_residue)}",
                             f"mass_drift = {_fmt(dens.mass_drift)}",
                             f"negative_mass = {_fmt(neg_mass)}",
                             f"beta = {_fmt(dens.beta)}"))
    else:
        dist = wd.atoms_from_spectrum(params, m_max=cfg.m_max,
                                      weight_floor=cfg.weight_floor)
        path = os.path.join(out, "atoms.csv")
        _write_csv(path, ("W", "p"),
                   ((float(w), float(p)) for w, p in zip(dist.w, dist.p)),
                   comments=(f"beta = {_fmt(dist.beta)}",
                             f"pruned_mass = {_fmt(dist.pruned_mass)}",
                             f"min_atom_weight = {_fmt(float(np.min(dist.p)))}"))
    print(path)
    return 0


def cmd_moments(cfg, args):
    out = _outdir(cfg, args)
    params = cfg.params
    report = {
        "mean": wd.mean_work(params),
        "second_moment": wd.second_moment(params),
        "variance": wd.variance(params),
    }
    if params.lam > 0:
        report["fdr_ratio"] = wd.fdr_ratio(params)
    path = os.path.join(out, "moments.json")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(path)
    return 0


def _oracle_config(cfg):
    return FockOracleConfig(spec=cfg.params.spec, cutoff=cfg.oracle_cutoff,
                            beta=cfg.params.beta, lam=cfg.params.lam,
                            switching=cfg.params.switching)


def _oracle_mu_grid(cfg):
    n = int(cfg.oracle_mu_n)
    return -cfg.oracle_mu_max + 2.0 * cfg.oracle_mu_max / n * np.arange(n)


def cmd_verify(cfg, args):
    out = _outdir(cfg, args)
    params = cfg.params
    report = {}
    checks = []  # (name, value, tolerance)

    tau = np.linspace(-cfg.tau_grid_max, cfg.tau_grid_max, int(cfg.tau_grid_n))
    report["kms_residual"] = kms_residual(params.spec, params.beta, tau,
                                          epsilon=cfg.epsilon)
    checks.append(("kms_residual", report["kms_residual"],
                   VERIFY_TOLS["kms_residual"]))

    mu = np.linspace(-50.0, 50.0, 512)
    vals = charfunc_pointlike(params, mu + 0.0j)
    mirrored = charfunc_pointlike(params, -mu + 1j * params.beta)
    report["charfunc_kms_residual"] = float(
        np.max(np.abs(mirrored - vals) / np.abs(vals)))
    checks.append(("charfunc_kms_residual", report["charfunc_kms_residual"],
                   VERIFY_TOLS["charfunc_kms_residual"]))

    report["jarzynski_error"] = float(
        abs(charfunc_pointlike(params, 1j * params.beta) - 1.0))
    checks.append(("jarzynski_error", report["jarzynski_error"],
                   VERIFY_TOLS["jarzynski_error"]))

    report["mean"] = wd.mean_work(params)
    report["second_moment"] = wd.second_moment(params)
    report["variance"] = wd.variance(params)
    if params.lam > 0:
        report["fdr_ratio"] = wd.fdr_ratio(params)

    if params.spec.kind != KIND_CONTINUUM:
        dist = wd.atoms_from_spectrum(params, m_max=cfg.m_max,
                                      weight_floor=cfg.weight_floor)
        if cfg.check_beta is not None:
            # negative-control knob: evaluate the fluctuation checks at a
            # beta different from the generating one; they must then fail
            dist = replace(dist, beta=cfg.check_beta)
        report["pruned_mass"] = dist.pruned_mass
        # quasiprobability watch: negativity is logged, never asserted
        report["min_atom_weight"] = float(np.min(dist.p))
        report["crooks_residual"] = wd.crooks_residual(dist)
        crooks_tol = (VERIFY_TOLS["crooks_residual_single"]
                      if len(params.spec.lines) == 1
                      else VERIFY_TOLS["crooks_residual_multi"])
        checks.append(("crooks_residual", report["crooks_residual"], crooks_tol))
        report["jarzynski_error_atoms"] = float(
            abs(wd.jarzynski_average(dist) - 1.0))
        checks.append(("jarzynski_error_atoms", report["jarzynski_error_atoms"],
                       VERIFY_TOLS["jarzynski_error_atoms"]))

    if cfg.oracle_enabled:
        oracle = FockOracle(_oracle_config(cfg))
        mu_o = _oracle_mu_grid(cfg)
        closed = charfunc_pointlike(params, mu_o + 0.0j)
        measured = oracle.charfunc_grid(mu_o)
        report["oracle_max_absdiff"] = float(np.max(np.abs(measured - closed)))
        checks.append(("oracle_max_absdiff", report["oracle_max_absdiff"],
                       VERIFY_TOLS["oracle_max_absdiff"]))
        report["gibbs_deficit"] = oracle.gibbs_deficit

    if args.wightman_csv:
        eps = cfg.epsilon if cfg.epsilon is not None else 1e-3 * params.beta
        dtau = tau - 1j * eps
        wvals = thermal_wightman(params.spec, params.beta, dtau)
        _write_csv(os.path.join(out, "wightman.csv"),
                   ("dtau_re", "dtau_im", "W_re", "W_im"),
                   ((float(d.real), float(d.imag), float(v.real), float(v.imag))
                    for d, v in zip(dtau, np.atleast_1d(wvals))))

    path = os.path.join(out, "report.json")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(path)

    failures = [(name, value, tol) for name, value, tol in checks if not value <= tol]
    for name, value, tol in failures:
        print(f"FAIL {name}: {value:.6e} > {tol:.0e}", file=sys.stderr)
    return 1 if failures else 0


def _sweep_row(task):
    params, axis, value = task
    if axis == "beta":
        p = replace(params, beta=value)
    elif axis == "lambda":
        p = replace(params, lam=value)
    elif axis == "lapse":
        p = replace(params, spec=lapse_rescale(params.spec, value))
    else:
        raise ConfigError(f"unknown sweep axis {axis!r}")
    jarz = abs(charfunc_pointlike(p, 1j * p.beta) - 1.0)
    return (value, wd.mean_work(p), wd.second_moment(p), wd.variance(p),
            wd.fdr_ratio(p) if p.lam > 0 else math.nan, float(jarz))


def cmd_sweep(cfg, args):
    out = _outdir(cfg, args)
    axis = args.axis
    if axis not in ("beta", "lambda", "lapse"):
        raise ConfigError(f"unknown sweep axis {axis!r}")
    try:
        values = [float(v) for v in args.values.split(",") if v.strip() != ""]
    except ValueError:
        raise ConfigError(f"cannot parse sweep values {args.values!r}") from None
    if not values:
        raise ConfigError("empty sweep value list")

    jobs = args.jobs if args.jobs is not None else _default_jobs(cfg)
    tasks = [(cfg.params, axis, v) for v in values]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_sweep_row, tasks))
    else:
        rows = [_sweep_row(t) for t in tasks]

    path = os.path.join(out, "sweep.csv")
    _write_csv(path, (axis, "mean", "second_moment", "variance",
                      "fdr_ratio", "jarzynski_error"),
               ((float(a), float(b), float(c), float(d), float(e), float(f))
                for a, b, c, d, e, f in rows),
               comments=(f"axis: {axis}",))
    print(path)
    return 0


def cmd_oracle_compare(cfg, args):
    out = _outdir(cfg, args)
    ocfg = _oracle_config(cfg)
    oracle = FockOracle(ocfg)
    bumped = FockOracle(ocfg.with_cutoff_bump())
    mu = _oracle_mu_grid(cfg)
    closed = charfunc_pointlike(cfg.params, mu + 0.0j)
    measured = oracle.charfunc_grid(mu)
    # cutoff certificate at the most demanding (largest |mu|) grid point
    probe = float(mu[np.argmax(np.abs(mu))])
    drift = abs(oracle.charfunc(probe) - bumped.charfunc(probe))
    if drift > 1e-8:
        raise TruncationError(
            f"oracle cutoff not converged (drift {drift:.3e} at mu={probe:g})",
            suggested=tuple(n + 10 for n in ocfg.cutoffs()))
    path = os.path.join(out, "oracle_compare.csv")
    _write_csv(path, ("mu", "closed_re", "closed_im", "oracle_re", "oracle_im",
                      "absdiff"),
               ((float(m), float(c.real), float(c.imag), float(v.real),
                 float(v.imag), float(abs(v - c)))
                for m, c, v in zip(mu, closed, measured)),
               comments=(f"cutoffs: {ocfg.cutoffs()}",
                         f"gibbs_deficit = {_fmt(oracle.gibbs_deficit)}"))
    print(path)
    return 0


# ---------------------------------------------------------------------------
# argument parsing and dispatch
# ---------------------------------------------------------------------------

def _default_jobs(cfg):
    env = os.environ.get("QWORK_JOBS")
    if env is not None:
        try:
            jobs = int(env)
        except ValueError:
            raise ConfigError(f"QWORK_JOBS is not an integer: {env!r}") from None
        if jobs < 1:
            raise ConfigError(f"QWORK_JOBS must be >= 1, got {jobs}")
        return jobs
    return cfg.jobs


def build_parser():
    parser = argparse.ArgumentParser(
        prog="qwork",
        description="Work statistics of thermal scalar fields in static spacetimes")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, grid=True):
        p.add_argument("--config", required=True, help="run configuration file")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--jobs", type=int, default=None,
                       help="worker processes (default: QWORK_JOBS or config)")
        if grid:
            p.add_argument("--mu-min", type=float, default=None)
            p.add_argument("--mu-max", type=float, default=None)
            p.add_argument("--mu-n", type=int, default=None)

    common(sub.add_parser("charfunc", help="sample the characteristic function"))
    common(sub.add_parser("workdist", help="work distribution (atoms or density)"))
    common(sub.add_parser("moments", help="mean, second moment, variance"), grid=False)
    p_verify = sub.add_parser("verify", help="run the verification suite")
    common(p_verify, grid=False)
    p_verify.add_argument("--wightman-csv", action="store_true",
                          help="also dump the Wightman diagnostic CSV")
    p_sweep = sub.add_parser("sweep", help="sweep beta, lambda, or lapse")
    common(p_sweep, grid=False)
    p_sweep.add_argument("--axis", required=True, choices=("beta", "lambda", "lapse"))
    p_sweep.add_argument("--values", required=True,
                         help="comma-separated axis values")
    common(sub.add_parser("oracle-compare",
                          help="closed form vs truncated-Fock oracle"), grid=False)
    return parser


_DISPATCH = {
    "charfunc": cmd_charfunc,
    "workdist": cmd_workdist,
    "moments": cmd_moments,
    "verify": cmd_verify,
    "sweep": cmd_sweep,
    "oracle-compare": cmd_oracle_compare,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config)
        _apply_grid_overrides(cfg, args)
        return _DISPATCH[args.command](cfg, args)
    except (ConfigError, SpectrumParseError, ParameterError, DomainError,
            WindowError, TruncationError, ConvergenceError, AccuracyError,
            OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
