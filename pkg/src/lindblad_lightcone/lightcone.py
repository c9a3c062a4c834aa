"""Propagation-speed quantities and the numerical experiments built on them.

* :func:`velocity_operator` builds ``gamma = i[H, <x>] + 1/2 sum_j (W_j^H [<x>, W_j] + [W_j^H, <x>] W_j)``
  and its norm ``kappa``.
* :func:`run_lightcone_experiment` measures ``<f_ts>_t`` at ``t = s`` and the
  leakage ``Tr(chi_eta rho_t)`` outside the cone ``a + c s``.
* :func:`verify_basic_equality`, :func:`verify_rme` and
  :func:`verify_commutator_expansion` audit the three analytic ingredients.
* :func:`conjecture_scan` tabulates ``kappa`` against ``||ad_<x>(H)||``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.integrate import simpson

from .cutoffs import (
    ConeFrame,
    SmoothCutoff,
    diagonal_observable,
    eval_derivative,
    plateau_observable,
)
from .dynamics import (
    DensityMatrix,
    EvolutionResult,
    InitialState,
    apply_dual,
    default_rk4_step,
    evolve,
)
from .errors import NumericFailureError, RejectedInputError
from .linalg import as_matrix, hermitian_eigvals, hermitian_part, operator_norm
from .model import (
    KrausFamily,
    LatticeGeometry,
    ModelSpec,
    build_kraus_family,
    iterated_adjoint,
)
from .prng import XorShift64Star
from .tolerances import TOL


# --------------------------------------------------------------------------- velocity


@dataclass(frozen=True, eq=False)
class VelocityReport:
    gamma: np.ndarray
    kappa: float
    hamiltonian_speed: float
    environment_shift: float
    dual_mismatch: float = 0.0


def _environment_velocity(family: KrausFamily, weight: np.ndarray) -> np.ndarray:
    n = weight.size
    d = sp.diags(weight.astype(np.complex128))
    total = sp.csr_matrix((n, n), dtype=np.complex128)
    for w in family.operators:
        wd = w.conj().T
        total = total + wd @ (d @ w - w @ d) + (wd @ d - d @ wd) @ w
    return 0.5 * total.toarray()


def velocity_operator(spec: ModelSpec) -> VelocityReport:
    """``gamma`` term by term, ``kappa = max |eig(gamma)|``.

    The result is checked against ``L'<x>``; a mismatch above ``1e-12``
    (relative) raises :class:`NumericFailureError`.
    """
    geo = spec.geometry
    weight = geo.position_weight
    h = spec.hamiltonian
    ham_part = 1j * (h * weight[None, :] - weight[:, None] * h)
    gamma = ham_part.copy()
    if len(spec.kraus):
        gamma = gamma + _environment_velocity(spec.kraus, weight)
    dual = apply_dual(spec, geo.weight_matrix())
    mismatch = float(np.max(np.abs(gamma - dual))) if gamma.size else 0.0
    scale = max(1.0, float(np.max(np.abs(gamma))))
    if mismatch > TOL.gamma_identity * scale:
        raise NumericFailureError(f"gamma differs from L'<x> by {mismatch:.3e}")
    ev = hermitian_eigvals(hermitian_part(gamma))
    kappa = float(max(abs(ev[0]), abs(ev[-1])))
    hev = hermitian_eigvals(hermitian_part(ham_part))
    ham_speed = float(max(abs(hev[0]), abs(hev[-1])))
    return VelocityReport(gamma, kappa, ham_speed, kappa - ham_speed, mismatch)


# --------------------------------------------------------------------------- leakage and fits


def _diagonal(rho) -> np.ndarray:
    m = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho)
    return np.real(np.diagonal(m))


def leakage(rho, eta: float, geometry: LatticeGeometry) -> float:
    """``Tr(chi_eta rho)``; values in ``[-1e-12, 0)`` are reported as 0."""
    if not eta >= 1:
        raise RejectedInputError(f"eta must be >= 1, got {eta}")
    diag = _diagonal(rho)
    if diag.size != geometry.size:
        raise RejectedInputError(f"state has {diag.size} sites, lattice has {geometry.size}")
    value = float(np.sum(diag[geometry.position_weight >= eta]))
    if -TOL.leakage_dust <= value < 0:
        value = 0.0
    return value


@dataclass(frozen=True)
class ScalingFit:
    """Least-squares line through ``(log x, log y)``."""

    xs: tuple
    ys: tuple
    slope: float
    intercept: float
    r_squared: float

    def predict(self, x) -> np.ndarray:
        return np.exp(self.intercept) * np.asarray(x, dtype=float) ** self.slope

    def to_dict(self) -> dict:
        return {
            "xs": list(self.xs),
            "ys": list(self.ys),
            "slope": self.slope,
            "intercept": self.intercept,
            "r_squared": self.r_squared,
        }


def fit_power_law(xs, ys) -> ScalingFit:
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.shape != ys.shape or xs.size < 2:
        raise RejectedInputError("a power-law fit needs at least two (x, y) pairs")
    if np.any(xs <= 0) or np.any(ys <= 0):
        raise RejectedInputError("a power-law fit needs positive x and y values")
    lx, ly = np.log(xs), np.log(ys)
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 else 1.0 - float(np.sum(resid**2)) / ss_tot
    r2 = min(1.0, max(0.0, r2))
    return ScalingFit(tuple(map(float, xs)), tuple(map(float, ys)), float(slope), float(intercept), r2)


def _fit_positive(xs, ys) -> Optional[ScalingFit]:
    keep = [(x, y) for x, y in zip(xs, ys) if y > TOL.leakage_dust]
    if len(keep) < 2:
        return None
    return fit_power_law(*zip(*keep))


def aligned_s_values(a: float, c: float, sites: Sequence[int]) -> list:
    """Values of ``s`` that put ``eta = a + c s`` halfway between ``<x>`` and ``<x+1>``.

    Leakage through a sharp projector jumps each time ``eta`` passes a
    site weight; sampling at these midpoints keeps the sequence free of
    that sawtooth, which otherwise dominates a power-law fit on small
    lattices.
    """
    if not c > 0:
        raise RejectedInputError(f"cone speed must be positive, got {c}")
    out = []
    for x in sites:
        mid = 0.5 * (math.hypot(1.0, x) + math.hypot(1.0, x + 1))
        s = (mid - a) / c
        if s <= 0:
            raise RejectedInputError(f"site {x} lies inside the cone start a = {a}")
        out.append(round(s, 9))
    return out


# --------------------------------------------------------------------------- light-cone experiment


@dataclass(frozen=True)
class LeakageRow:
    s: float
    t: float
    eta: float
    leakage: float
    f_expectation: float


@dataclass(frozen=True)
class FrontReport:
    radii: tuple
    crossing_times: tuple
    speed: float
    intercept: float
    run_valid: bool
    threshold: float = TOL.front_threshold


@dataclass
class TransportReport:
    s_values: list
    eta_values: list
    leakages: list
    f_expectations: list
    fitted_exponent: float
    front_speed: float
    run_valid: bool
    kappa: float
    rows: list = field(default_factory=list)
    leakage_fit: Optional[ScalingFit] = None
    front: Optional[FrontReport] = None
    evolution: Optional[EvolutionResult] = field(default=None, repr=False)


def _sample_grid(t_final: float, dt: float, extra: Sequence[float]) -> np.ndarray:
    count = max(1, int(math.ceil(t_final / dt - 1e-9)))
    grid = np.concatenate([np.linspace(0.0, t_final, count + 1), np.asarray(extra, dtype=float)])
    grid = np.unique(np.round(grid, 12))
    return grid


def _leakage_profile(diag: np.ndarray, weight: np.ndarray, radii: np.ndarray) -> np.ndarray:
    # Tr(chi_eta rho) for every eta in radii, from one sorted cumulative sum
    order = np.argsort(weight)
    tail = np.cumsum(diag[order][::-1])[::-1]
    idx = np.searchsorted(weight[order], radii, side="left")
    out = np.zeros(radii.size)
    inside = idx < weight.size
    out[inside] = tail[idx[inside]]
    return out


def measure_front(result: EvolutionResult, geometry: LatticeGeometry, baseline=None) -> FrontReport:
    """Threshold-crossing front of the leakage and the boundary-clearance flag.

    For each radius ``<x>``, ``x = 1..M``, the first time the leakage reaches
    ``1e-6`` is located (log-linear interpolation between samples).  The
    front speed is the least-squares slope of radius against crossing time
    over the middle 60% of crossed radii.
    """
    m = geometry.half_width
    weight = geometry.position_weight
    radii = np.sqrt(1.0 + np.arange(1, m + 1, dtype=float) ** 2)
    thr = TOL.front_threshold
    base = np.zeros(radii.size) if baseline is None else _leakage_profile(_diagonal(baseline), weight, radii)
    profiles = np.array([_leakage_profile(_diagonal(s), weight, radii) for s in result.states]) - base
    times = result.times
    crossings = []
    for j, r in enumerate(radii):
        hit = np.nonzero(profiles[:, j] >= thr)[0]
        if hit.size == 0:
            continue
        i = int(hit[0])
        if i == 0:
            crossings.append((r, 0.0))
            continue
        lo, hi = profiles[i - 1, j], profiles[i, j]
        if lo > 0:
            frac = (math.log(thr) - math.log(lo)) / (math.log(hi) - math.log(lo))
        else:
            frac = 1.0
        crossings.append((r, times[i - 1] + frac * (times[i] - times[i - 1])))
    clear_eta = math.sqrt(1.0 + max(m - TOL.boundary_clearance + 1, 1) ** 2)
    edge = np.searchsorted(radii, clear_eta - 1e-12)
    valid = bool(edge >= radii.size or np.all(profiles[:, edge] < thr))
    speed, intercept = float("nan"), float("nan")
    moving = [(r, t) for r, t in crossings if t > 0]
    if len(moving) >= 3:
        k = len(moving)
        cut = int(math.floor(k * (1.0 - TOL.front_fit_fraction) / 2.0))
        middle = moving[cut : k - cut] if k - 2 * cut >= 2 else moving
        rs, ts = np.array(middle).T
        if np.ptp(ts) > 0:
            speed, intercept = (float(v) for v in np.polyfit(ts, rs, 1))
    radii_hit = tuple(float(r) for r, _ in crossings)
    return FrontReport(radii_hit, tuple(float(t) for _, t in crossings), speed, intercept, valid)


def _check_localized(initial: InitialState, geometry: LatticeGeometry, b: float) -> None:
    lam = initial.perturbation
    outside = geometry.position_weight >= b
    if np.any(lam[outside, :] != 0) or np.any(lam[:, outside] != 0):
        raise RejectedInputError(f"initial perturbation violates chi_b lambda = 0 for b = {b}")


def run_lightcone_experiment(
    spec: ModelSpec,
    frame: ConeFrame,
    f: SmoothCutoff,
    s_list: Sequence[float],
    *,
    initial: Optional[InitialState] = None,
    eta_factors: Sequence[float] = (0.5, 0.75, 1.0),
    dt: float = 0.05,
    front_time: Optional[float] = None,
    backend: str = "rk4",
    velocity: Optional[VelocityReport] = None,
) -> tuple:
    """Evolve once and read off ``<f_ts>_t`` and leakage at ``t = s`` for each ``s``.

    Returns ``(TransportReport, ScalingFit or None)``; the fit is of
    ``log <f_ts>_s`` against ``log s`` and is ``None`` when fewer than two
    values rise above ``1e-12``.  When ``initial`` carries a stationary
    part, its own ``<f_ts>`` and leakage are subtracted.  Leakage is
    recorded at ``eta = a + c s * factor`` for every factor.
    """
    geo = spec.geometry
    vel = velocity if velocity is not None else velocity_operator(spec)
    kappa = vel.kappa
    if not f.c > kappa:
        raise RejectedInputError(f"cone speed c = {f.c} must exceed kappa = {kappa:.6g}")
    if not f.c_prime > kappa:
        raise RejectedInputError(f"c' = {f.c_prime} must exceed kappa = {kappa:.6g}")
    s_values = sorted(float(s) for s in s_list)
    if not s_values or s_values[0] <= 0:
        raise RejectedInputError("s_list must contain positive values")
    if initial is None:
        initial = InitialState.at_site(geo, frame.b)
    _check_localized(initial, geo, frame.b)
    t_end = max(s_values[-1], front_time or 0.0)
    grid = _sample_grid(t_end, dt, s_values)
    result = evolve(spec, initial, 0.0, 0.0, backend, times=grid)
    stationary = initial.stationary_part
    index = {round(t, 12): i for i, t in enumerate(result.times)}
    rows, f_vals, leak_fit_vals = [], [], []
    for s in s_values:
        state = result.states[index[round(s, 12)]]
        obs = diagonal_observable(f, 0, frame.at(t=s, s=s), geo)
        fexp = state.expectation(obs)
        if stationary is not None:
            fexp -= stationary.expectation(obs)
        f_vals.append(fexp)
        for factor in eta_factors:
            eta = max(1.0, frame.a + f.c * s * factor)
            leak = leakage(state, eta, geo)
            if stationary is not None:
                leak -= leakage(stationary, eta, geo)
            rows.append(LeakageRow(s, s, eta, leak, fexp))
            if factor == 1.0:
                leak_fit_vals.append(leak)
    fit = _fit_positive(s_values, f_vals)
    leak_fit = _fit_positive(s_values, leak_fit_vals) if leak_fit_vals else None
    front = measure_front(result, geo, baseline=stationary)
    exponent = fit.slope if fit is not None else float("-inf")
    report = TransportReport(
        s_values=s_values,
        eta_values=[r.eta for r in rows],
        leakages=[r.leakage for r in rows],
        f_expectations=f_vals,
        fitted_exponent=exponent,
        front_speed=front.speed,
        run_valid=front.run_valid,
        kappa=kappa,
        rows=rows,
        leakage_fit=leak_fit,
        front=front,
        evolution=result,
    )
    return report, fit


# --------------------------------------------------------------------------- basic equality


def heisenberg_cutoff_derivative(
    spec: ModelSpec, f: SmoothCutoff, frame: ConeFrame, c_prime: Optional[float] = None
) -> np.ndarray:
    """``D f_ts = L' f_ts + d/dt f_ts`` with ``d/dt f_ts = -(c'/s) f'_ts``.

    ``c_prime`` overrides the cone velocity in the time-derivative term only.
    """
    geo = spec.geometry
    cp = f.c_prime if c_prime is None else float(c_prime)
    phi = diagonal_observable(f, 0, frame, geo)
    dphi = -(cp / frame.s) * diagonal_observable(f, 1, frame, geo)
    return apply_dual(spec, phi) + dphi


def _basic_equality_series(spec, frame, f, t_final, dt, initial, step):
    geo = spec.geometry
    if initial is None:
        initial = InitialState.at_site(geo, frame.b)
    if step is None:
        step = default_rk4_step(spec)
    result = evolve(spec, initial, t_final, dt, step=step)
    integrand = np.empty(result.times.size)
    for i, (t, state) in enumerate(zip(result.times, result.states)):
        integrand[i] = state.expectation(heisenberg_cutoff_derivative(spec, f, frame.at(t=float(t))))
    phi_end = diagonal_observable(f, 0, frame.at(t=float(result.times[-1])), geo)
    phi_start = diagonal_observable(f, 0, frame.at(t=0.0), geo)
    lhs = result.states[-1].expectation(phi_end) - result.states[0].expectation(phi_start)
    return result.times, integrand, lhs


def _basic_residual(times, integrand, lhs) -> float:
    if times.size == 1:
        return abs(lhs)
    return abs(lhs - float(simpson(integrand, x=times)))


def verify_basic_equality(
    spec: ModelSpec,
    frame: ConeFrame,
    f: SmoothCutoff,
    t_final: float,
    *,
    initial=None,
    dt: float = 0.05,
    step: Optional[float] = None,
) -> float:
    """``|<Phi_t>_t - <Phi_0>_0 - int_0^t <D Phi_r>_r dr|`` with ``Phi_r = f_rs``.

    The integral is Simpson's rule on the sampling grid of spacing ``dt``.
    """
    return _basic_residual(*_basic_equality_series(spec, frame, f, t_final, dt, initial, step))


@dataclass(frozen=True)
class RefinementCheck:
    coarse: float
    fine: float
    ratio: float
    passed: bool


def basic_equality_refinement(
    spec, frame, f, t_final, dt: float = 0.05, *, initial=None, step=None
) -> RefinementCheck:
    """Residual with quadrature spacing ``dt`` and ``dt/2`` on one trajectory.

    The trajectory is sampled at ``dt/2`` and the coarse rule uses every
    other sample, so the two residuals differ only in quadrature error.
    Passes when the coarse residual is at most ``1e-6`` and halving
    shrinks it at least fourfold.
    """
    times, integrand, lhs = _basic_equality_series(spec, frame, f, t_final, 0.5 * dt, initial, step)
    if (times.size - 1) % 2:
        raise RejectedInputError("t_final / dt must be a whole number for the refinement check")
    fine = _basic_residual(times, integrand, lhs)
    coarse = _basic_residual(times[::2], integrand[::2], lhs)
    ratio = coarse / fine if fine > 0 else float("inf")
    ok = coarse <= TOL.basic_equality and ratio >= TOL.basic_equality_refinement
    return RefinementCheck(coarse, fine, ratio, bool(ok))


# --------------------------------------------------------------------------- recursive monotonicity


@dataclass
class RmeResult:
    s_values: list
    max_eigenvalues: list
    residuals: list
    fit: Optional[ScalingFit]
    constant: float
    remainders: list
    exact_zero: bool
    passed: bool


def rme_operator(spec: ModelSpec, frame: ConeFrame, f: SmoothCutoff, kappa: float) -> np.ndarray:
    """``R = D f_ts - (kappa - c') s^-1 f'_ts``."""
    fprime = diagonal_observable(f, 1, frame, spec.geometry)
    return heisenberg_cutoff_derivative(spec, f, frame) - ((kappa - f.c_prime) / frame.s) * fprime


def _require_on_lattice(geometry: LatticeGeometry, reach: float) -> None:
    edge = float(geometry.position_weight.max())
    if reach >= edge:
        need = int(math.ceil(math.sqrt(max(reach**2 - 1.0, 0.0)))) + 1
        raise RejectedInputError(
            f"cutoff support reaches <x> = {reach:.4g} but the lattice ends at {edge:.4g}; "
            f"use half_width >= {need}"
        )


def verify_rme(
    spec: ModelSpec,
    frame: ConeFrame,
    f: SmoothCutoff,
    s_list: Sequence[float],
    *,
    velocity: Optional[VelocityReport] = None,
    slope_bound: float = -1.5,
) -> RmeResult:
    """Scaling of ``max(lambda_max(Re R(s)), 0)`` at ``t = s/2``.

    The constant ``C`` of the ``C s^-2 v_ts`` correction is estimated as the
    median of ``s^2 * residual``; the remainders after subtracting it (with
    the plateau ``v`` of the cutoff) are reported, not asserted.
    """
    vel = velocity if velocity is not None else velocity_operator(spec)
    kappa = vel.kappa
    if not f.c_prime > kappa:
        raise RejectedInputError(f"c' = {f.c_prime} must exceed kappa = {kappa:.6g}")
    s_values = sorted(float(s) for s in s_list)
    if not s_values or s_values[0] <= 0:
        raise RejectedInputError("s_list must contain positive values")
    # the plateau reaches (r + w)/2 in cone units; it must fit on the lattice
    reach = frame.a + f.c_prime * 0.5 * s_values[-1] + s_values[-1] * 0.5 * (f.right + f.width)
    _require_on_lattice(spec.geometry, reach)
    tops, ops = [], []
    for s in s_values:
        fr = frame.at(t=0.5 * s, s=s)
        r = hermitian_part(rme_operator(spec, fr, f, kappa))
        ops.append((fr, r))
        tops.append(float(hermitian_eigvals(r)[-1]))
    residuals = [max(v, 0.0) for v in tops]
    exact_zero = all(v <= TOL.leakage_dust for v in residuals)
    fit = None if exact_zero else _fit_positive(s_values, residuals)
    scaled = [s * s * v for s, v in zip(s_values, residuals)]
    constant = float(np.median(scaled)) if scaled else 0.0
    remainders = []
    for s, (fr, r) in zip(s_values, ops):
        corr = (constant / (s * s)) * plateau_observable(f, fr, spec.geometry)
        remainders.append(float(hermitian_eigvals(r - corr)[-1]))
    if exact_zero:
        passed = True
    else:
        passed = fit is not None and len(fit.xs) == len(s_values) and fit.slope <= slope_bound
    return RmeResult(s_values, tops, residuals, fit, constant, remainders, exact_zero, bool(passed))


# --------------------------------------------------------------------------- commutator expansion


@dataclass
class ExpansionResult:
    offset: float
    order: int
    s_values: list
    errors: list
    fit: Optional[ScalingFit]
    bounds: list
    bound_constant: float
    within_bound: bool
    exact_zero: bool
    passed: bool


def expansion_error(a_op: np.ndarray, f: SmoothCutoff, geometry: LatticeGeometry, offset: float, s: float, n: int) -> float:
    """``||[A, f(x_s)] - sum_{k<n} (-1)^{k-1} s^-k / k! B_k f^(k)(x_s)||``, ``B_k = ad^k_<x>(A)``."""
    x = (geometry.position_weight - offset) / s
    fx = eval_derivative(f, 0, x)
    lhs = a_op * fx[None, :] - fx[:, None] * a_op
    series = np.zeros_like(lhs)
    for k in range(1, n):
        bk = iterated_adjoint(a_op, geometry, k)
        coef = (-1) ** (k - 1) * s ** (-k) / math.factorial(k)
        series += coef * bk * eval_derivative(f, k, x)[None, :]
    diff = lhs - series
    if not np.any(diff):
        return 0.0
    return operator_norm(diff)


def _schur_bound(m: np.ndarray) -> float:
    a = np.abs(m)
    return float(math.sqrt(np.max(a.sum(axis=0)) * np.max(a.sum(axis=1))))


def _sup_derivative(f: SmoothCutoff, k: int) -> float:
    if k == 0:
        return 1.0
    mu = np.linspace(f.left, f.right, 20001)
    return float(np.max(np.abs(eval_derivative(f, k, mu))))


def verify_commutator_expansion(
    a_op,
    f: SmoothCutoff,
    geometry: LatticeGeometry,
    offset: float,
    s_list: Sequence[float],
    n: int,
    *,
    r_squared_min: float = 0.98,
) -> ExpansionResult:
    """Check that the truncated expansion error scales like ``s^-n``.

    ``bounds`` holds the Taylor-remainder bound
    ``schur(|B_n|) * sup|f^(n)| / n! * s^-n`` (Schur test for the norm,
    padded by 1% for the sampled supremum).
    """
    if int(n) != n or not 1 <= n <= TOL.max_order:
        raise RejectedInputError(f"expansion order n must lie in [1, {TOL.max_order}], got {n}")
    a_op = as_matrix(a_op, "A")
    if a_op.shape[0] != geometry.size:
        raise RejectedInputError(f"A has dimension {a_op.shape[0]}, lattice has {geometry.size} sites")
    s_values = sorted(float(s) for s in s_list)
    if not s_values or s_values[0] <= 0:
        raise RejectedInputError("s_list must contain positive values")
    _require_on_lattice(geometry, offset + s_values[-1] * f.right)
    errors = [expansion_error(a_op, f, geometry, offset, s, n) for s in s_values]
    bn = iterated_adjoint(a_op, geometry, n)
    pref = _schur_bound(bn) * _sup_derivative(f, n) * 1.01 / math.factorial(n)
    bounds = [pref * s ** (-n) for s in s_values]
    within = all(e <= b for e, b in zip(errors, bounds))
    exact_zero = all(e <= TOL.leakage_dust * max(1.0, float(np.max(np.abs(a_op)))) for e in errors)
    fit = None if exact_zero else _fit_positive(s_values, errors)
    bn_norm = operator_norm(bn) if np.any(bn) else 0.0
    constant = max((e * s**n / bn_norm for e, s in zip(errors, s_values)), default=0.0) if bn_norm else 0.0
    if exact_zero:
        passed = True
    else:
        passed = (
            fit is not None
            and len(fit.xs) == len(s_values)
            and fit.slope <= -n + 0.5
            and fit.r_squared >= r_squared_min
            and within
        )
    return ExpansionResult(float(offset), int(n), s_values, errors, fit, bounds, constant, within, exact_zero, bool(passed))


@dataclass
class UniformityReport:
    results: list
    slope_spread: float
    passed: bool


def expansion_uniformity(a_op, f, geometry, offsets, s_list, n, max_spread: float = 0.3) -> UniformityReport:
    results = [verify_commutator_expansion(a_op, f, geometry, a, s_list, n) for a in offsets]
    slopes = [r.fit.slope for r in results if r.fit is not None]
    spread = float(np.ptp(slopes)) if slopes else 0.0
    ok = all(r.passed for r in results) and spread <= max_spread
    return UniformityReport(results, spread, bool(ok))


# --------------------------------------------------------------------------- conjecture scan


@dataclass(frozen=True)
class ConjectureRow:
    index: int
    kind: str
    kappa: float
    hamiltonian_speed: float
    environment_shift: float
    below: bool


@dataclass
class ConjectureTable:
    rows: list
    fraction_below: float

    def to_dict(self) -> dict:
        return {
            "fraction_below": self.fraction_below,
            "rows": [row.__dict__.copy() for row in self.rows],
        }


def conjecture_scan(spec_family: Sequence[ModelSpec]) -> ConjectureTable:
    """Tabulate ``kappa`` against ``||ad_<x>(H)||`` for every model.

    ``below`` marks rows where the environment strictly lowers the speed
    bound (beyond a ``1e-12`` relative margin).  Models without nonzero
    Kraus operators are rejected.
    """
    specs = list(spec_family)
    if not specs:
        raise RejectedInputError("conjecture scan needs at least one model")
    rows = []
    for i, spec in enumerate(specs):
        if len(spec.kraus) == 0 or spec.kraus.is_zero:
            raise RejectedInputError(f"model {i} has no nonzero Kraus operators")
        v = velocity_operator(spec)
        margin = 1e-12 * max(1.0, v.hamiltonian_speed)
        rows.append(
            ConjectureRow(i, spec.kraus.kind, v.kappa, v.hamiltonian_speed, v.environment_shift,
                          bool(v.kappa < v.hamiltonian_speed - margin))
        )
    frac = sum(r.below for r in rows) / len(rows)
    return ConjectureTable(rows, float(frac))


def random_local_kraus(geometry: LatticeGeometry, g: float, rng: XorShift64Star) -> KrausFamily:
    """``W_x = sqrt(g) (alpha |x><x| + beta |x><x+1| + delta |x+1><x|)`` per site.

    ``(alpha, beta, delta)`` is complex Gaussian, normalised to unit length;
    the last site has only its diagonal entry.
    """
    n = geometry.size
    amp = math.sqrt(g)
    ops = []
    for i in range(n):
        c = rng.complex_normal(3)
        c = amp * c / np.linalg.norm(c)
        rows, cols, vals = [i], [i], [c[0]]
        if i + 1 < n:
            rows += [i, i + 1]
            cols += [i + 1, i]
            vals += [c[1], c[2]]
        ops.append(sp.csr_matrix((vals, (rows, cols)), shape=(n, n)))
    return build_kraus_family("custom", g, geometry, ops)


def sample_conjecture_family(
    half_width: int,
    trials: int,
    seed: int = 0,
    *,
    hopping: float = 1.0,
    g: float = 1.0,
    kind: str = "local_random",
    potential_amplitude: float = 1.0,
    order: int = 3,
) -> list:
    """Random models for :func:`conjecture_scan`.

    Potentials are uniform in ``[-amplitude, amplitude]``.  With
    ``kind = "local_random"`` the Kraus family is random and local,
    see :func:`random_local_kraus`.  ``"dephasing"`` and
    ``"directed_jump"`` use the fixed families.
    """
    if int(trials) != trials or trials < 1:
        raise RejectedInputError(f"trials must be a positive integer, got {trials}")
    if not g > 0:
        raise RejectedInputError("the conjecture concerns W_j != 0; g must be positive")
    rng = XorShift64Star(seed)
    geo = LatticeGeometry(half_width)
    n = geo.size
    out = []
    for _ in range(int(trials)):
        pot = rng.uniform(n, -potential_amplitude, potential_amplitude)
        if kind == "local_random":
            family = random_local_kraus(geo, g, rng)
        else:
            family = build_kraus_family(kind, g, geo)
        out.append(ModelSpec(geo, float(hopping), 1, pot, family, order))
    return out
