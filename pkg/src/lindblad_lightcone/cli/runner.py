"""Scenario dispatch and deterministic output files."""

from __future__ import annotations

import json
import logging
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from ..cutoffs import ConeFrame, make_cutoff
from ..dynamics import InitialState, evolve, stationary_state
from ..errors import RejectedInputError
from ..lightcone import (
    aligned_s_values,
    conjecture_scan,
    expansion_uniformity,
    random_local_kraus,
    run_lightcone_experiment,
    sample_conjecture_family,
    velocity_operator,
    verify_rme,
)
from ..model import LatticeGeometry, ModelSpec, build_kraus_family, check_assumptions
from ..prng import XorShift64Star
from ..tolerances import TOL
from .config import RunConfig
from .svg import loglog_plot

log = logging.getLogger(__name__)

THREADS_ENV = "LINDBLAD_LIGHTCONE_THREADS"
LEAKAGE_COLUMNS = ("s", "t", "eta", "leakage", "f_expectation")


@dataclass
class RunSummary:
    config: dict
    kappa: float
    hamiltonian_speed: float
    fits: dict
    residuals: dict
    checks: dict
    files: list
    output_dir: str
    wall_clock_seconds: float = 0.0
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def to_dict(self) -> dict:
        # wall-clock time is left out so that summary.json is reproducible byte for byte
        return {
            "config": self.config,
            "kappa": self.kappa,
            "hamiltonian_speed": self.hamiltonian_speed,
            "fits": self.fits,
            "residuals": self.residuals,
            "checks": self.checks,
            "passed": self.passed,
            "files": self.files,
        }


def resolve_threads(requested: int) -> int:
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            value = int(env)
        except ValueError:
            raise RejectedInputError(f"{THREADS_ENV} must be a positive integer, got {env!r}") from None
        if value < 1:
            raise RejectedInputError(f"{THREADS_ENV} must be a positive integer, got {env!r}")
        return value
    return max(1, int(requested))


def build_model(cfg: RunConfig) -> ModelSpec:
    geo = LatticeGeometry(cfg.half_width)
    n = geo.size
    rng = XorShift64Star(cfg.seed)
    form, _, arg = cfg.potential.partition(":")
    if form == "zero":
        pot = np.zeros(n)
    elif form == "constant":
        pot = np.full(n, float(arg))
    elif form == "linear":
        pot = float(arg) * geo.sites.astype(float)
    else:
        pot = rng.uniform(n, -float(arg), float(arg))
    if cfg.kraus == "local_random":
        family = random_local_kraus(geo, cfg.g, rng)
    else:
        family = build_kraus_family(cfg.kraus, cfg.g, geo)
    return ModelSpec(geo, cfg.hopping, cfg.hopping_range, pot, family, cfg.order)


def _num(v) -> str:
    return repr(float(v))


def _csv(header, rows) -> str:
    lines = [",".join(header)]
    lines += [",".join(_num(v) if not isinstance(v, str) else v for v in row) for row in rows]
    return "\n".join(lines) + "\n"


def _clean(obj):
    """JSON-safe copy: non-finite floats become strings, numpy scalars become Python."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    return obj


def _json(obj) -> str:
    return json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n"


def _fit_dict(fit):
    return None if fit is None else fit.to_dict()


# --------------------------------------------------------------------------- scenarios


def _lightcone(cfg, spec, vel, pool):
    f = make_cutoff(cfg.c, cfg.c_prime)
    frame = ConeFrame(cfg.a, cfg.b, min(cfg.s_list))
    report, fit = run_lightcone_experiment(
        spec, frame, f, cfg.s_list, eta_factors=cfg.eta_factors, dt=cfg.dt, backend=cfg.backend, velocity=vel
    )
    rows = [(r.s, r.t, r.eta, r.leakage, r.f_expectation) for r in report.rows]
    files = {"leakage.csv": _csv(LEAKAGE_COLUMNS, rows)}
    front = report.front
    fits = {
        "f_expectation": _fit_dict(fit),
        "leakage": _fit_dict(report.leakage_fit),
        "front": {
            "speed": front.speed,
            "intercept": front.intercept,
            "radii": list(front.radii),
            "crossing_times": list(front.crossing_times),
            "threshold": front.threshold,
        },
    }
    bound = -(cfg.order - 1) + 0.5
    checks = {
        "exponent_bound": bool(report.fitted_exponent <= bound),
        "fit_quality": fit is None or fit.r_squared >= TOL.fit_r_squared,
        "run_valid": report.run_valid,
        "front_speed": bool(not math.isfinite(report.front_speed) or report.front_speed <= TOL.front_speed_factor * vel.kappa),
    }
    residuals = {"fitted_exponent": report.fitted_exponent, "exponent_bound": bound}
    files["plot.svg"] = loglog_plot(
        report.s_values,
        report.f_expectations,
        title="smoothed leakage outside the cone",
        xlabel="s (= t)",
        ylabel="<f_ts>_t",
        fit_slope=None if fit is None else fit.slope,
        fit_intercept=None if fit is None else fit.intercept,
    )
    return files, fits, residuals, checks


def _rme(cfg, spec, vel, pool):
    f = make_cutoff(cfg.c, cfg.c_prime)
    frame = ConeFrame(cfg.a, cfg.b, min(cfg.s_list))
    res = verify_rme(spec, frame, f, cfg.s_list, velocity=vel)
    rows = [
        (s, 0.5 * s, top, r, rem)
        for s, top, r, rem in zip(res.s_values, res.max_eigenvalues, res.residuals, res.remainders)
    ]
    files = {"rme.csv": _csv(("s", "t", "max_eigenvalue", "residual", "remainder"), rows)}
    fits = {"residual": _fit_dict(res.fit), "constant": res.constant, "exact_zero": res.exact_zero}
    checks = {"residual_decay": res.passed}
    files["plot.svg"] = loglog_plot(
        res.s_values,
        res.residuals,
        title="recursive monotonicity residual",
        xlabel="s",
        ylabel="max(lambda_max(Re R(s)), 0)",
        fit_slope=None if res.fit is None else res.fit.slope,
        fit_intercept=None if res.fit is None else res.fit.intercept,
    )
    return files, fits, {"slope": None if res.fit is None else res.fit.slope}, checks


def _expansion(cfg, spec, vel, pool):
    f = make_cutoff(cfg.c, cfg.c_prime)
    orders = list(range(2, cfg.order + 1))
    reports = list(
        pool.map(lambda n: expansion_uniformity(spec.hamiltonian, f, spec.geometry, cfg.offsets, cfg.s_list, n), orders)
    )
    rows, fits, checks = [], {}, {}
    for n, rep in zip(orders, reports):
        checks[f"order_{n}"] = rep.passed
        fits[f"order_{n}"] = {
            "slope_spread": rep.slope_spread,
            "offsets": [
                {"offset": r.offset, "fit": _fit_dict(r.fit), "bound_constant": r.bound_constant, "within_bound": r.within_bound}
                for r in rep.results
            ],
        }
        for r in rep.results:
            rows += [(str(n), r.offset, s, e, b) for s, e, b in zip(r.s_values, r.errors, r.bounds)]
    files = {"expansion.csv": _csv(("order", "offset", "s", "error", "bound"), rows)}
    last = reports[-1].results[0]
    files["plot.svg"] = loglog_plot(
        last.s_values,
        last.errors,
        title=f"commutator expansion error, n = {orders[-1]}",
        xlabel="s",
        ylabel="E(s)",
        fit_slope=None if last.fit is None else last.fit.slope,
        fit_intercept=None if last.fit is None else last.fit.intercept,
    )
    return files, fits, {f"order_{n}": rep.slope_spread for n, rep in zip(orders, reports)}, checks


def _conjecture(cfg, spec, vel, pool):
    kind = cfg.kraus
    specs = sample_conjecture_family(
        cfg.half_width, cfg.trials, cfg.seed, hopping=cfg.hopping, g=cfg.g, kind=kind, order=cfg.order
    )
    tables = list(pool.map(lambda s: conjecture_scan([s]), specs))
    rows = []
    for i, table in enumerate(tables):
        r = table.rows[0]
        rows.append((str(i), r.kappa, r.hamiltonian_speed, r.environment_shift, "1" if r.below else "0"))
    frac = sum(t.rows[0].below for t in tables) / len(tables)
    files = {"conjecture.csv": _csv(("trial", "kappa", "hamiltonian_speed", "environment_shift", "below"), rows)}
    fits = {"fraction_below": frac, "trials": len(tables)}
    return files, fits, {}, {}


def stationary_s_values(cfg: RunConfig) -> tuple:
    """Default grid of the stationary scenario; needs resolved speeds."""
    sites = range(5, cfg.half_width - 6)
    if not sites:
        raise RejectedInputError("the stationary scenario needs half_width >= 12 for its default s_list")
    return tuple(aligned_s_values(cfg.a, cfg.c, sites))


def _stationary(cfg, spec, vel, pool):
    sol = stationary_state(spec)
    st = sol.state
    drift_run = evolve(spec, st, cfg.t_final, cfg.dt, cfg.backend)
    drift = float(np.max(np.abs(drift_run.states[-1].matrix - st.matrix)))
    initial = InitialState.at_site(spec.geometry, cfg.b, stationary=st)
    f = make_cutoff(cfg.c, cfg.c_prime)
    frame = ConeFrame(cfg.a, cfg.b, min(cfg.s_list))
    # the excess leakage fit reads the eta = a + c s column
    factors = tuple(sorted(set(cfg.eta_factors) | {1.0}))
    report, fit = run_lightcone_experiment(
        spec, frame, f, cfg.s_list, initial=initial, eta_factors=factors, dt=cfg.dt,
        backend=cfg.backend, velocity=vel,
    )
    rows = [(r.s, r.t, r.eta, r.leakage, r.f_expectation) for r in report.rows]
    files = {"leakage.csv": _csv(LEAKAGE_COLUMNS, rows)}
    bound = -(cfg.order - 1) + 0.5
    lfit = report.leakage_fit
    checks = {
        "stationary_residual": sol.residual <= TOL.stationary_residual,
        "stationary_drift": drift <= TOL.stationary_drift,
        "excess_exponent": bool(lfit is not None and lfit.slope <= bound),
        "fit_quality": bool(lfit is not None and lfit.r_squared >= TOL.fit_r_squared),
        "run_valid": report.run_valid,
    }
    fits = {
        "excess_leakage": _fit_dict(lfit),
        "excess_f_expectation": _fit_dict(fit),
        "degenerate": sol.degenerate,
    }
    residuals = {
        "stationary_residual": sol.residual,
        "stationary_drift": drift,
        "fitted_exponent": None if lfit is None else lfit.slope,
    }
    fit_s = [r.s for r in report.rows if r.eta == max(1.0, cfg.a + cfg.c * r.s)]
    fit_y = [r.leakage for r in report.rows if r.eta == max(1.0, cfg.a + cfg.c * r.s)]
    files["plot.svg"] = loglog_plot(
        fit_s,
        fit_y,
        title="leakage in excess of the stationary state",
        xlabel="s (= t)",
        ylabel="Tr(chi_eta rho_t) - Tr(chi_eta rho_st), eta = a + c s",
        fit_slope=None if lfit is None else lfit.slope,
        fit_intercept=None if lfit is None else lfit.intercept,
    )
    return files, fits, residuals, checks


_SCENARIOS = {
    "lightcone": _lightcone,
    "rme": _rme,
    "expansion": _expansion,
    "conjecture": _conjecture,
    "stationary": _stationary,
}


def _write_all(outdir: Path, files: dict) -> None:
    outdir.mkdir(parents=True, exist_ok=True)
    written = []
    try:
        for name in sorted(files):
            path = outdir / name
            with open(path, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(files[name])
            written.append(path)
    except BaseException:
        for path in written:
            path.unlink(missing_ok=True)
        raise


def run_scenario(cfg: RunConfig, *, threads: int | None = None, output_dir: str | None = None) -> RunSummary:
    """Run one scenario and write its files.

    Nothing is written unless the whole computation succeeds; a failure
    while writing removes the files already written.
    """
    start = time.perf_counter()
    outdir = Path(output_dir or cfg.output_dir)
    nthreads = resolve_threads(cfg.threads if threads is None else threads)
    spec = build_model(cfg)
    vel = velocity_operator(spec)
    cfg = cfg.resolve_speeds(vel.kappa)
    if cfg.s_list is None:
        cfg = replace(cfg, s_list=stationary_s_values(cfg))
    audit = check_assumptions(spec)
    files = {"audit.json": _json({**audit.to_dict(), "kappa": vel.kappa, "hamiltonian_speed": vel.hamiltonian_speed,
                                  "environment_shift": vel.environment_shift, "order": spec.order})}
    fits, residuals, checks = {}, {}, {"assumptions": audit.passed}
    if cfg.scenario != "audit":
        with ThreadPoolExecutor(max_workers=nthreads) as pool:
            try:
                out, fits, residuals, more = _SCENARIOS[cfg.scenario](cfg, spec, vel, pool)
            except RejectedInputError as exc:
                raise RejectedInputError(f"scenario {cfg.scenario}: {exc}") from exc
        files.update(out)
        checks.update(more)
        files["fits.json"] = _json(fits)
    names = sorted(files) + ["summary.json"]
    summary = RunSummary(
        config=cfg.to_dict(),
        kappa=vel.kappa,
        hamiltonian_speed=vel.hamiltonian_speed,
        fits=fits,
        residuals=residuals,
        checks=checks,
        files=sorted(names),
        output_dir=str(outdir),
    )
    files["summary.json"] = _json(summary.to_dict())
    _write_all(outdir, files)
    summary.wall_clock_seconds = time.perf_counter() - start
    log.info("scenario %s finished in %.2f s", cfg.scenario, summary.wall_clock_seconds)
    return summary
