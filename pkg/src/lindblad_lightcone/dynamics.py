"""Lindblad generator, its dual, time evolution and stationary states.

The generator acts on density matrices as

    L rho = -i [H, rho] + 1/2 sum_j ([W_j, rho W_j^H] + [W_j rho, W_j^H])
          = -i (H_eff rho - rho H_eff^H) + sum_j W_j rho W_j^H

with ``H_eff = H - (i/2) K`` and ``K = sum_j W_j^H W_j``.  Its dual with
respect to ``(A, rho) = Tr(A rho)`` is

    L' A = i (H_eff^H A - A H_eff) + sum_j W_j^H A W_j.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import _jit
from ._jump_kernels import jump_sum_loops, jump_sum_vec
from .errors import NumericFailureError, RejectedInputError
from .linalg import (
    as_matrix,
    hermitian_eigvals,
    hermitian_norm,
    hermitian_part,
    matrix_exp,
    operator_norm,
    unvec,
    vec,
    vectorize_superoperator,
)
from .model import LatticeGeometry, ModelSpec
from .tolerances import TOL

log = logging.getLogger(__name__)

BACKENDS = ("rk4", "superop_exp")

_jump_sum = _jit.select(jump_sum_loops, jump_sum_vec)

# above this many entry pairs per matrix element the sparse-product route is cheaper
_PAIR_DENSITY_LIMIT = 64


class _Generator:
    """Precomputed pieces of ``L`` and ``L'`` for one model."""

    def __init__(self, spec: ModelSpec):
        n = spec.dim
        family = spec.kraus
        k = family.dissipator_sum if len(family) else np.zeros((n, n), dtype=np.complex128)
        self.dim = n
        self.heff = np.ascontiguousarray(spec.hamiltonian - 0.5j * k)
        self.heff_dag = np.ascontiguousarray(self.heff.conj().T)
        self.ops = family.operators
        self.use_pairs = family.pair_count <= _PAIR_DENSITY_LIMIT * n * n
        if self.use_pairs:
            self.pairs = family.entry_pairs
            self.adj_pairs = family.adjoint_entry_pairs
        self.has_jumps = not family.is_zero

    def _jumps(self, x: np.ndarray, adjoint: bool) -> np.ndarray:
        out = np.zeros((self.dim, self.dim), dtype=np.complex128)
        if not self.has_jumps:
            return out
        if self.use_pairs:
            a, b, c, d, coef = self.adj_pairs if adjoint else self.pairs
            return _jump_sum(np.ascontiguousarray(x), a, b, c, d, coef, out)
        for w in self.ops:
            if adjoint:
                out += w.conj().T @ (w.T @ x.T).T
            else:
                out += w @ (w.conj() @ x.T).T
        return out

    def apply(self, rho: np.ndarray) -> np.ndarray:
        out = -1j * (self.heff @ rho - rho @ self.heff_dag)
        out += self._jumps(rho, adjoint=False)
        return out

    def apply_dual(self, a: np.ndarray) -> np.ndarray:
        out = 1j * (self.heff_dag @ a - a @ self.heff)
        out += self._jumps(a, adjoint=True)
        return out


def _generator(spec: ModelSpec) -> _Generator:
    cached = spec.__dict__.get("_generator")
    if cached is None:
        cached = _Generator(spec)
        spec.__dict__["_generator"] = cached
    return cached


def _check_operand(spec: ModelSpec, x, name: str) -> np.ndarray:
    x = np.asarray(x, dtype=np.complex128)
    if x.shape != (spec.dim, spec.dim):
        raise RejectedInputError(f"{name} has shape {x.shape}, model has dim {spec.dim}")
    return x


def apply_generator(spec: ModelSpec, rho) -> np.ndarray:
    """``L rho``."""
    return _generator(spec).apply(_check_operand(spec, rho, "rho"))


def apply_dual(spec: ModelSpec, a) -> np.ndarray:
    """``L' A``, the Heisenberg-picture generator."""
    return _generator(spec).apply_dual(_check_operand(spec, a, "A"))


def heisenberg_derivative(spec: ModelSpec, phi, dphi_dt) -> np.ndarray:
    """``D Phi = L' Phi + d Phi / dt``."""
    dphi_dt = _check_operand(spec, dphi_dt, "dPhi/dt")
    return apply_dual(spec, phi) + dphi_dt


def generator_superoperator(spec: ModelSpec) -> np.ndarray:
    """``L`` as a ``dim**2 x dim**2`` matrix on row-stacked ``vec(rho)``."""
    n = spec.dim
    ident = np.eye(n, dtype=np.complex128)
    gen = _generator(spec)
    sup = -1j * (vectorize_superoperator(gen.heff, ident) - vectorize_superoperator(ident, gen.heff_dag))
    for w in spec.kraus.operators:
        if w.nnz:
            wd = w.toarray()
            sup += vectorize_superoperator(wd, wd.conj().T)
    return sup


# --------------------------------------------------------------------------- states


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian positive semidefinite matrix with its expected trace."""

    matrix: np.ndarray
    trace_target: float
    min_eigenvalue: float = float("nan")

    @classmethod
    def from_matrix(cls, m, trace_target: Optional[float] = None, validate: bool = True) -> "DensityMatrix":
        m = as_matrix(m, "density matrix")
        tr = float(np.trace(m).real)
        target = tr if trace_target is None else float(trace_target)
        min_eig = float("nan")
        if validate:
            scale = max(float(np.linalg.norm(m)), 1e-300)
            skew = float(np.linalg.norm(m - m.conj().T))
            if skew > TOL.density_hermitian * scale:
                raise RejectedInputError(f"density matrix is not Hermitian (||rho - rho^H|| = {skew:.3e})")
            min_eig = float(hermitian_eigvals(hermitian_part(m))[0])
            if min_eig < TOL.density_min_eig:
                raise RejectedInputError(f"density matrix has negative eigenvalue {min_eig:.3e}")
            if abs(tr - target) > TOL.density_trace:
                raise RejectedInputError(f"density matrix trace {tr} differs from target {target}")
        return cls(m, target, min_eig)

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def expectation(self, a) -> float:
        """``Tr(A rho)`` (real part)."""
        return float(np.real(np.sum(np.asarray(a).T * self.matrix)))


@dataclass(frozen=True, eq=False)
class InitialState:
    """``rho_0 = rho_st + lambda`` with ``lambda`` supported where ``<x> < b``."""

    geometry: LatticeGeometry
    perturbation: np.ndarray
    localization_radius: float
    stationary_part: Optional[DensityMatrix] = None

    def __post_init__(self):
        lam = as_matrix(self.perturbation, "perturbation")
        n = self.geometry.size
        if lam.shape != (n, n):
            raise RejectedInputError(f"perturbation has shape {lam.shape}, lattice has {n} sites")
        if not self.localization_radius > 0:
            raise RejectedInputError("localization radius b must be positive")
        outside = self.geometry.position_weight >= self.localization_radius
        if np.any(lam[outside, :] != 0) or np.any(lam[:, outside] != 0):
            raise RejectedInputError(
                f"perturbation is not localized: chi_b lambda != 0 for b = {self.localization_radius}"
            )
        DensityMatrix.from_matrix(lam)
        if self.stationary_part is not None and self.stationary_part.matrix.shape != (n, n):
            raise RejectedInputError("stationary part does not match the lattice")
        object.__setattr__(self, "perturbation", lam)

    @classmethod
    def at_site(cls, geometry: LatticeGeometry, b: float, site: int = 0, stationary=None) -> "InitialState":
        return cls(geometry, geometry.basis_projector(site), b, stationary)

    @property
    def matrix(self) -> np.ndarray:
        if self.stationary_part is None:
            return self.perturbation.copy()
        return self.stationary_part.matrix + self.perturbation


@dataclass
class EvolutionResult:
    times: np.ndarray
    states: list
    trace_drift: float
    min_eig_seen: float
    integrator: str
    step: float
    hermiticity_correction: float
    halvings: int = 0
    corrections: list = field(default_factory=list, repr=False)

    def matrices(self) -> np.ndarray:
        return np.stack([s.matrix for s in self.states])

    def expectations(self, observable) -> np.ndarray:
        """``Tr(A rho_t)`` at every sample; ``observable`` may be a callable of ``t``."""
        out = np.empty(len(self.times))
        for i, (t, s) in enumerate(zip(self.times, self.states)):
            a = observable(t) if callable(observable) else observable
            out[i] = s.expectation(a)
        return out


def default_rk4_step(spec: ModelSpec) -> float:
    cached = spec.__dict__.get("_h_norm")
    if cached is None:
        cached = hermitian_norm(spec.hamiltonian)
        spec.__dict__["_h_norm"] = cached
    return TOL.rk4_step_scale / max(cached, spec.kraus.strength, 1.0)


def _sample_times(t_final: float, dt: float, times) -> np.ndarray:
    if times is not None:
        grid = np.asarray(times, dtype=float)
        if grid.ndim != 1 or grid.size < 1 or grid[0] != 0.0 or np.any(np.diff(grid) <= 0):
            raise RejectedInputError("sample times must start at 0 and increase strictly")
        return grid
    if t_final < 0 or not math.isfinite(t_final):
        raise RejectedInputError(f"t_final must be >= 0, got {t_final}")
    if t_final == 0:
        return np.zeros(1)
    if not dt > 0:
        raise RejectedInputError(f"dt must be > 0, got {dt}")
    count = max(1, int(math.ceil(t_final / dt - 1e-9)))
    return np.linspace(0.0, t_final, count + 1)


def _rk4_run(gen: _Generator, rho0, grid, h, positivity):
    rho = rho0.copy()
    states = [rho.copy()]
    corrections = []
    min_eig = float(hermitian_eigvals(hermitian_part(rho))[0]) if positivity else float("nan")
    tr0 = np.trace(rho).real
    drift = 0.0
    for i in range(1, grid.size):
        span = grid[i] - grid[i - 1]
        m = max(1, int(math.ceil(span / h - 1e-9)))
        hs = span / m
        for _ in range(m):
            k1 = gen.apply(rho)
            k2 = gen.apply(rho + (0.5 * hs) * k1)
            k3 = gen.apply(rho + (0.5 * hs) * k2)
            k4 = gen.apply(rho + hs * k3)
            rho = rho + (hs / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            skew = 0.5 * (rho - rho.conj().T)
            corrections.append(float(np.linalg.norm(skew)))
            rho = rho - skew
        drift = max(drift, abs(np.trace(rho).real - tr0))
        if positivity:
            lo = float(hermitian_eigvals(rho)[0])
            min_eig = min(min_eig, lo)
            if lo < TOL.positivity_abort:
                raise NumericFailureError(
                    f"positivity violated at t = {grid[i]:.4g}: min eigenvalue {lo:.3e}; reduce the step size"
                )
        states.append(rho.copy())
    return states, drift, min_eig, corrections


def _superop_run(spec, rho0, grid, positivity):
    sup = generator_superoperator(spec)
    propagators = {}
    v = vec(rho0).copy()
    states = [rho0.copy()]
    corrections = []
    min_eig = float(hermitian_eigvals(hermitian_part(rho0))[0]) if positivity else float("nan")
    tr0 = np.trace(rho0).real
    drift = 0.0
    for i in range(1, grid.size):
        span = grid[i] - grid[i - 1]
        key = round(span, 12)
        prop = propagators.get(key)
        if prop is None:
            prop = matrix_exp(sup * span)
            propagators[key] = prop
        v = prop @ v
        rho = unvec(v)
        skew = 0.5 * (rho - rho.conj().T)
        corrections.append(float(np.linalg.norm(skew)))
        rho = rho - skew
        v = vec(rho).copy()
        drift = max(drift, abs(np.trace(rho).real - tr0))
        if positivity:
            lo = float(hermitian_eigvals(rho)[0])
            min_eig = min(min_eig, lo)
            if lo < TOL.positivity_abort:
                raise NumericFailureError(f"positivity violated at t = {grid[i]:.4g}: min eigenvalue {lo:.3e}")
        states.append(rho.copy())
    return states, drift, min_eig, corrections


def propagate(
    spec: ModelSpec,
    rho0,
    t_final: float = 0.0,
    dt: float = 0.0,
    backend: str = "rk4",
    *,
    times: Optional[Sequence[float]] = None,
    step: Optional[float] = None,
    positivity: bool = True,
) -> EvolutionResult:
    """Evolve an arbitrary matrix; :func:`evolve` is the validated front end.

    The RK4 step defaults to ``0.01 / max(||H||, g, 1)`` and is halved (at
    most four times) until the trace drift stays below its tolerance.
    Sample intervals are split into equal sub-steps no longer than the step.
    """
    if backend not in BACKENDS:
        raise RejectedInputError(f"unknown backend {backend!r}; expected one of {BACKENDS}")
    rho0 = _check_operand(spec, rho0, "rho0")
    grid = _sample_times(t_final, dt, times)
    gen = _generator(spec)
    if backend == "superop_exp":
        if spec.dim > TOL.superop_max_sites:
            raise RejectedInputError(
                f"superop_exp backend supports at most {TOL.superop_max_sites} sites, model has {spec.dim}"
            )
        states, drift, min_eig, corr = _superop_run(spec, rho0, grid, positivity)
        h = float(np.max(np.diff(grid))) if grid.size > 1 else 0.0
        halvings = 0
        if drift > TOL.trace_drift_superop:
            log.warning("superop_exp trace drift %.3e exceeds %.1e", drift, TOL.trace_drift_superop)
    else:
        h = default_rk4_step(spec) if step is None else float(step)
        halvings = 0
        while True:
            states, drift, min_eig, corr = _rk4_run(gen, rho0, grid, h, positivity)
            if drift <= TOL.trace_drift_rk4 or halvings >= TOL.rk4_max_halvings:
                break
            log.info("trace drift %.3e with step %.3g; halving", drift, h)
            h *= 0.5
            halvings += 1
    worst = max(corr) if corr else 0.0
    log.debug("evolution done: %d samples, max hermiticity correction %.3e", grid.size, worst)
    tr0 = float(np.trace(rho0).real)
    wrapped = [DensityMatrix(s, tr0, float("nan")) for s in states]
    return EvolutionResult(grid, wrapped, float(drift), float(min_eig), backend, float(h), float(worst), halvings, corr)


def evolve(
    spec: ModelSpec,
    initial,
    t_final: float,
    dt: float,
    backend: str = "rk4",
    *,
    times: Optional[Sequence[float]] = None,
    step: Optional[float] = None,
) -> EvolutionResult:
    """Sample ``rho_t = exp(L t) rho_0`` on ``0, dt, 2 dt, ..., t_final``.

    ``initial`` is an :class:`InitialState` or a :class:`DensityMatrix`.
    Raises :class:`NumericFailureError` when a sampled state has an
    eigenvalue below ``-1e-6``.
    """
    if isinstance(initial, InitialState):
        rho0 = initial.matrix
    elif isinstance(initial, DensityMatrix):
        rho0 = initial.matrix
    else:
        raise RejectedInputError("initial must be an InitialState or DensityMatrix")
    return propagate(spec, rho0, t_final, dt, backend, times=times, step=step)


# --------------------------------------------------------------------------- stationary states


@dataclass
class StationarySolution:
    state: DensityMatrix
    residual: float
    singular_values: np.ndarray
    degenerate: bool
    candidates: list


def stationary_state(spec: ModelSpec) -> StationarySolution:
    """Null vector of the vectorised generator, as a unit-trace state.

    When several singular values fall below ``1e-8`` the null space is
    degenerate: every null vector is returned in ``candidates`` and the
    chosen state is the projection of the maximally mixed state onto the
    null space, renormalised.
    """
    n = spec.dim
    sup = generator_superoperator(spec)
    _, sing, vh = np.linalg.svd(sup)
    smallest = sing[-1]
    if smallest > TOL.stationary_fail:
        raise NumericFailureError(f"no stationary state: smallest singular value {smallest:.3e}")
    null_rows = np.flatnonzero(sing < TOL.stationary_degenerate)
    if null_rows.size == 0:
        null_rows = np.array([sing.size - 1])
    basis = vh[null_rows].conj()
    degenerate = null_rows.size > 1
    mixed = vec(np.eye(n, dtype=np.complex128) / n)
    v = basis.T @ (basis.conj() @ mixed)
    if abs(unvec(v).trace()) < 1e-8:
        v = basis[-1]
    rho = unvec(v.copy())
    rho = rho / np.trace(rho)
    rho = hermitian_part(rho)
    rho = rho / np.trace(rho).real
    residual = operator_norm(apply_generator(spec, rho))
    state = DensityMatrix.from_matrix(rho, 1.0)
    candidates = [unvec(b.copy()) for b in basis]
    return StationarySolution(state, residual, np.sort(sing)[:4], degenerate, candidates)
