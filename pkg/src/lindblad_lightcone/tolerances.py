"""Every numerical tolerance used by operations and tests, in one place."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    # linear algebra
    hermitian_input: float = 1e-12
    eig_reconstruction: float = 1e-10
    eig_orthonormality: float = 1e-10
    eig_sweeps_per_dim: int = 64
    norm_agreement: float = 1e-10
    submultiplicative: float = 1e-10
    leibniz: float = 1e-12
    expm_series: float = 1e-9
    expm_commuting: float = 1e-10
    expm_max_norm: float = 1e8
    vec_convention: float = 1e-12

    # model
    adjoint_closed_form: float = 1e-12
    kraus_mixing: float = 1e-12
    max_order: int = 8

    # states and evolution
    density_hermitian: float = 1e-12
    density_min_eig: float = -1e-10
    density_trace: float = 1e-10
    generator_traceless: float = 1e-12
    dual_unital: float = 1e-12
    duality: float = 1e-11
    trace_drift_rk4: float = 1e-8
    trace_drift_superop: float = 1e-10
    positivity_abort: float = -1e-6
    positivity_sampled: float = -1e-8
    hermiticity_correction: float = 1e-9
    rk4_max_halvings: int = 4
    rk4_step_scale: float = 0.01
    superop_max_sites: int = 40
    semigroup: float = 1e-9
    contraction: float = 1e-8
    cross_backend: float = 1e-6
    purity: float = 1e-8

    # stationary states
    stationary_residual: float = 1e-9
    stationary_degenerate: float = 1e-8
    stationary_fail: float = 1e-6
    stationary_drift: float = 1e-7

    # light-cone quantities
    gamma_identity: float = 1e-12
    kappa_eig: float = 1e-10
    leakage_dust: float = 1e-12
    leakage_slack: float = 1e-8
    front_threshold: float = 1e-6
    boundary_clearance: int = 5
    front_fit_fraction: float = 0.6
    front_speed_factor: float = 1.2
    fit_r_squared: float = 0.9
    basic_equality: float = 1e-6
    basic_equality_refinement: float = 4.0
    derivative_fd: float = 1e-6


TOL = Tolerances()
