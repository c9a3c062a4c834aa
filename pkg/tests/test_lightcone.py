import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_state
from lindblad_lightcone.cutoffs import ConeFrame, diagonal_observable, make_cutoff
from lindblad_lightcone.dynamics import DensityMatrix, EvolutionResult, InitialState, apply_dual
from lindblad_lightcone.errors import RejectedInputError
from lindblad_lightcone.linalg import commutator, hermitian_eigvals, hermitian_part, operator_norm
from lindblad_lightcone.lightcone import (
    aligned_s_values,
    basic_equality_refinement,
    conjecture_scan,
    expansion_error,
    expansion_uniformity,
    fit_power_law,
    heisenberg_cutoff_derivative,
    leakage,
    measure_front,
    random_local_kraus,
    rme_operator,
    run_lightcone_experiment,
    sample_conjecture_family,
    velocity_operator,
    verify_basic_equality,
    verify_commutator_expansion,
    verify_rme,
)
from lindblad_lightcone.model import LatticeGeometry, iterated_adjoint_recursive, make_model
from lindblad_lightcone.prng import XorShift64Star
from lindblad_lightcone.tolerances import TOL


class TestVelocity:
    def test_trivial_dephasing(self):
        v = velocity_operator(make_model(5, 0.0, "dephasing", 1.0))
        assert np.all(v.gamma == 0) and v.kappa == 0

    def test_no_environment(self):
        spec = make_model(5, 1.0, "dephasing", 0.0)
        v = velocity_operator(spec)
        w = spec.geometry.weight_matrix()
        assert np.allclose(v.gamma, 1j * commutator(spec.hamiltonian, w), atol=1e-15)
        assert v.environment_shift == 0.0

    def test_three_site_brute_force(self):
        spec = make_model(1, 1.0, "dephasing", 0.0)
        g = 1j * commutator(spec.hamiltonian, spec.geometry.weight_matrix())
        # for this 3x3 antisymmetric-imaginary matrix the spectrum is 0, +-sqrt(2) (sqrt2 - 1)
        expected = math.sqrt(2) * (math.sqrt(2) - 1)
        assert velocity_operator(spec).kappa == pytest.approx(expected, rel=1e-14)
        assert velocity_operator(spec).kappa == pytest.approx(np.linalg.norm(g, 2), rel=1e-14)

    @pytest.mark.parametrize("kind", ["dephasing", "directed_jump"])
    def test_gamma_identity(self, kind):
        spec = make_model(12, 1.0, kind, 0.7, hopping_range=2)
        v = velocity_operator(spec)
        dual = apply_dual(spec, spec.geometry.weight_matrix())
        assert np.linalg.norm(v.gamma - dual, 2) <= TOL.gamma_identity
        assert np.linalg.norm(v.gamma - v.gamma.conj().T) <= 1e-12 * max(1.0, np.linalg.norm(v.gamma))
        assert v.kappa == pytest.approx(operator_norm(v.gamma), abs=TOL.kappa_eig)

    def test_constant_potential_invariance(self):
        spec = make_model(10, 1.0, "directed_jump", 1.0)
        shifted = spec.with_potential(np.full(spec.dim, 3.7))
        a, b = velocity_operator(spec), velocity_operator(shifted)
        assert np.max(np.abs(a.gamma - b.gamma)) <= 1e-12
        assert abs(a.kappa - b.kappa) <= 1e-12

    def test_random_local_family(self):
        geo = LatticeGeometry(8)
        fam = random_local_kraus(geo, 0.5, XorShift64Star(1))
        spec = make_model(8).with_kraus(fam)
        v = velocity_operator(spec)
        assert v.dual_mismatch <= 1e-12 and v.kappa > 0


class TestLeakage:
    def test_inside(self):
        geo = LatticeGeometry(5)
        rho = DensityMatrix.from_matrix(geo.basis_projector(1))
        assert leakage(rho, 2.0, geo) == 0.0

    def test_eta_one_total(self, rng):
        geo = LatticeGeometry(3)
        rho = random_state(rng, 7)
        assert leakage(rho, 1.0, geo) == pytest.approx(np.trace(rho).real, abs=1e-15)

    def test_single_site(self):
        geo = LatticeGeometry(5)
        assert leakage(geo.basis_projector(3), 3.0, geo) == 1.0

    def test_rejects(self):
        geo = LatticeGeometry(2)
        with pytest.raises(RejectedInputError):
            leakage(np.eye(5) / 5, 0.5, geo)
        with pytest.raises(RejectedInputError):
            leakage(np.eye(3) / 3, 1.5, geo)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2**31), st.floats(1, 8), st.floats(1, 8))
    def test_monotone_and_bounded(self, seed, e1, e2):
        geo = LatticeGeometry(7)
        rho = random_state(np.random.default_rng(seed), geo.size)
        lo, hi = sorted((e1, e2))
        assert leakage(rho, hi, geo) <= leakage(rho, lo, geo) + 1e-15
        assert 0 <= leakage(rho, lo, geo) <= 1 + TOL.leakage_slack


class TestFits:
    def test_exact_power_law(self):
        xs = np.array([2.0, 4.0, 8.0, 16.0])
        fit = fit_power_law(xs, 3.0 * xs**-2.5)
        assert fit.slope == pytest.approx(-2.5, abs=1e-12)
        assert fit.intercept == pytest.approx(math.log(3.0), abs=1e-12)
        assert fit.r_squared == pytest.approx(1.0)
        assert np.allclose(fit.predict(xs), 3.0 * xs**-2.5)

    def test_rejects(self):
        with pytest.raises(RejectedInputError):
            fit_power_law([1.0], [1.0])
        with pytest.raises(RejectedInputError):
            fit_power_law([1.0, 2.0], [1.0, 0.0])

    @settings(max_examples=30, deadline=None)
    @given(st.lists(st.floats(1e-6, 1e6), min_size=3, max_size=8, unique=True), st.integers(0, 1000))
    def test_r_squared_range(self, xs, seed):
        ys = np.random.default_rng(seed).uniform(1e-3, 1.0, len(xs))
        fit = fit_power_law(xs, ys)
        assert 0.0 <= fit.r_squared <= 1.0

    def test_aligned_grid(self):
        s = aligned_s_values(2.0, 3.0, range(5, 9))
        for x, sv in zip(range(5, 9), s):
            eta = 2.0 + 3.0 * sv
            assert math.hypot(1, x) < eta < math.hypot(1, x + 1)
        with pytest.raises(RejectedInputError):
            aligned_s_values(10.0, 1.0, [2])


def _walker(m, speed, t_final, dt=0.05):
    """Synthetic run: all mass on site floor(speed * t)."""
    geo = LatticeGeometry(m)
    times = np.round(np.arange(0, t_final + 1e-9, dt), 12)
    states = []
    for t in times:
        x = min(int(math.floor(speed * t)), m)
        states.append(DensityMatrix(geo.basis_projector(x), 1.0))
    return geo, EvolutionResult(times, states, 0.0, 0.0, "rk4", dt, 0.0)


class TestFront:
    def test_known_speed(self):
        geo, res = _walker(40, 2.0, 15.0)
        front = measure_front(res, geo)
        assert front.run_valid
        assert front.speed == pytest.approx(2.0, rel=0.03)

    def test_boundary_flag(self):
        geo, res = _walker(40, 2.0, 19.0)
        assert not measure_front(res, geo).run_valid

    def test_frozen(self):
        geo, res = _walker(10, 0.0, 2.0)
        front = measure_front(res, geo)
        assert front.run_valid and math.isnan(front.speed)


class TestLightconeExperiment:
    def test_frozen_dynamics(self):
        spec = make_model(10, 0.0, "dephasing", 0.0)
        f = make_cutoff(1.5, 1.2)
        # kappa = 0 here, so any positive speeds are admissible
        report, fit = run_lightcone_experiment(spec, ConeFrame(2.0, 1.5, 1.0), f, [1.0, 2.0, 3.0], dt=0.5)
        assert all(v == 0.0 for v in report.leakages)
        assert fit is None and report.fitted_exponent == float("-inf") and report.run_valid

    def test_rejects_slow_cone(self):
        spec = make_model(10, 1.0, "dephasing", 1.0)
        kappa = velocity_operator(spec).kappa
        with pytest.raises(RejectedInputError, match="must exceed kappa"):
            run_lightcone_experiment(spec, ConeFrame(2.0, 1.5, 1.0), make_cutoff(0.9 * kappa, 0.5 * kappa), [1.0])

    def test_rejects_unlocalized(self):
        spec = make_model(10, 1.0, "dephasing", 1.0)
        kappa = velocity_operator(spec).kappa
        init = InitialState.at_site(spec.geometry, 3.0, site=2)
        with pytest.raises(RejectedInputError, match="chi_b"):
            run_lightcone_experiment(spec, ConeFrame(2.0, 1.5, 1.0), make_cutoff(1.5 * kappa, 1.2 * kappa), [1.0],
                                     initial=init)

    def test_rows_and_stationary_subtraction(self):
        spec = make_model(8, 1.0, "dephasing", 1.0)
        kappa = velocity_operator(spec).kappa
        st_ = DensityMatrix.from_matrix(np.eye(spec.dim) / spec.dim)
        init = InitialState.at_site(spec.geometry, 1.5, stationary=st_)
        f = make_cutoff(1.5 * kappa, 1.2 * kappa)
        report, _ = run_lightcone_experiment(spec, ConeFrame(2.0, 1.5, 1.0), f, [0.5, 1.0], initial=init,
                                             eta_factors=(0.5, 1.0), dt=0.25)
        assert len(report.rows) == 4
        # the maximally mixed state is stationary, so the excess is the perturbation alone
        plain, _ = run_lightcone_experiment(spec, ConeFrame(2.0, 1.5, 1.0), f, [0.5, 1.0],
                                            eta_factors=(0.5, 1.0), dt=0.25)
        assert np.allclose(report.leakages, plain.leakages, atol=1e-12)
        assert np.allclose(report.f_expectations, plain.f_expectations, atol=1e-12)


class TestBasicEquality:
    def test_trivial_generator(self):
        spec = make_model(6, 0.0, "dephasing", 0.0)
        f = make_cutoff(1.0, 0.5)
        frame = ConeFrame(2.0, 1.5, 1e6)  # s huge: f_ts is time independent to rounding
        assert verify_basic_equality(spec, frame, f, 2.0, dt=0.25) <= 1e-15

    def test_identity_observable(self):
        # tiny s and a < 1 put every site on the plateau for all t <= 0.5, so f_ts = I
        spec = make_model(6, 1.0, "directed_jump", 1.0)
        f = make_cutoff(1.0, 0.5)
        frame = ConeFrame(0.5, 0.25, 1e-3)
        assert np.all(diagonal_observable(f, 0, frame, spec.geometry) == np.eye(spec.dim))
        res = verify_basic_equality(spec, frame, f, 0.5, dt=0.05, initial=InitialState.at_site(spec.geometry, 1.5))
        assert res <= 1e-14

    @pytest.mark.parametrize("kind", ["dephasing", "directed_jump"])
    def test_small_refinement(self, kind):
        spec = make_model(12, 1.0, kind, 1.0)
        kappa = velocity_operator(spec).kappa
        f = make_cutoff(kappa, 0.5 * kappa)
        chk = basic_equality_refinement(spec, ConeFrame(2.0, 1.5, 10.0), f, 4.0, dt=0.05)
        assert chk.passed, chk

    def test_odd_interval_rejected(self):
        spec = make_model(4, 1.0, "dephasing", 1.0)
        with pytest.raises(RejectedInputError):
            basic_equality_refinement(spec, ConeFrame(2.0, 1.5, 4.0), make_cutoff(2.0, 1.0), 0.15, dt=0.1)


class TestRme:
    def test_exact_zero_trivial(self):
        spec = make_model(40, 0.0, "dephasing", 0.0)
        res = verify_rme(spec, ConeFrame(2.0, 1.5, 1.0), make_cutoff(1.5, 1.2), [2.0, 4.0, 8.0])
        assert res.exact_zero and res.passed and all(v <= 0 for v in res.max_eigenvalues)

    def test_exact_zero_dephasing(self):
        spec = make_model(40, 0.0, "dephasing", 2.0)
        frame = ConeFrame(2.0, 1.5, 4.0, 2.0)
        f = make_cutoff(1.5, 1.2)
        phi = diagonal_observable(f, 0, frame, spec.geometry)
        assert np.all(apply_dual(spec, phi) == 0)
        res = verify_rme(spec, frame, f, [2.0, 4.0, 8.0])
        assert res.exact_zero and res.passed

    def test_operator_definition(self):
        spec = make_model(30, 1.0, "directed_jump", 1.0)
        kappa = velocity_operator(spec).kappa
        f = make_cutoff(1.5 * kappa, 1.2 * kappa)
        frame = ConeFrame(2.0, 1.5, 5.0, 2.5)
        geo = spec.geometry
        phi = diagonal_observable(f, 0, frame, geo)
        fp = diagonal_observable(f, 1, frame, geo)
        expected = apply_dual(spec, phi) - (f.c_prime / 5.0) * fp - ((kappa - f.c_prime) / 5.0) * fp
        assert np.allclose(rme_operator(spec, frame, f, kappa), expected, atol=1e-14)

    def test_c_prime_monotone(self):
        # raising c' in the time-derivative term lowers lambda_max (Weyl, since f' >= 0)
        spec = make_model(40, 1.0, "directed_jump", 1.0)
        kappa = velocity_operator(spec).kappa
        f = make_cutoff(1.5 * kappa, 1.1 * kappa)
        frame = ConeFrame(2.0, 1.5, 8.0, 4.0)
        tops = []
        for cp in (1.1 * kappa, 1.25 * kappa, 1.4 * kappa):
            d = hermitian_part(heisenberg_cutoff_derivative(spec, f, frame, c_prime=cp))
            tops.append(float(hermitian_eigvals(d)[-1]))
        assert tops[0] > tops[1] > tops[2]

    def test_rejects(self):
        spec = make_model(20, 1.0, "dephasing", 1.0)
        kappa = velocity_operator(spec).kappa
        with pytest.raises(RejectedInputError, match="must exceed kappa"):
            verify_rme(spec, ConeFrame(2.0, 1.5, 1.0), make_cutoff(kappa, 0.5 * kappa), [2.0])
        with pytest.raises(RejectedInputError, match="half_width"):
            verify_rme(spec, ConeFrame(2.0, 1.5, 1.0), make_cutoff(1.5 * kappa, 1.2 * kappa), [64.0])


def _literal_expansion_error(a, f, geo, offset, s, n):
    x = (geo.position_weight - offset) / s
    fx = np.diag(f(x)).astype(complex)
    lhs = commutator(a, fx)
    series = np.zeros_like(lhs)
    for k in range(1, n):
        series += (-1) ** (k - 1) * s ** (-k) / math.factorial(k) * iterated_adjoint_recursive(a, geo, k) @ np.diag(f(x, k))
    return np.linalg.norm(lhs - series, 2)


class TestExpansion:
    def test_matches_literal(self):
        spec = make_model(30, 1.0)
        f = make_cutoff(3.0, 1.0)
        for s, n in ((2.0, 2), (4.0, 3), (6.0, 4)):
            got = expansion_error(spec.hamiltonian, f, spec.geometry, 3.3, s, n)
            assert got == pytest.approx(_literal_expansion_error(spec.hamiltonian, f, spec.geometry, 3.3, s, n), rel=1e-9)

    def test_diagonal_operator(self):
        geo = LatticeGeometry(60)
        res = verify_commutator_expansion(np.diag(np.arange(121.0)), make_cutoff(3.0, 1.0), geo, 0.0, [4, 8, 16], 2)
        assert res.exact_zero and res.passed and all(e == 0 for e in res.errors)

    def test_constant_region(self):
        # every site sits where f = 1, so [A, f] and the series vanish
        spec = make_model(10, 1.0)
        f = make_cutoff(3.0, 1.0)
        assert expansion_error(spec.hamiltonian, f, spec.geometry, -100.0, 1.0, 3) == 0.0

    def test_order_two_slope(self):
        spec = make_model(70, 1.0)
        res = verify_commutator_expansion(spec.hamiltonian, make_cutoff(3.0, 1.0), spec.geometry, 0.0,
                                          [4, 8, 16, 32], 2)
        assert res.passed and res.within_bound
        assert res.fit.slope == pytest.approx(-2.0, abs=0.25)

    def test_uniform_in_offset(self):
        spec = make_model(70, 1.0)
        rep = expansion_uniformity(spec.hamiltonian, make_cutoff(3.0, 1.0), spec.geometry, (0.0, 2.5, 5.1),
                                   [4, 8, 16, 32], 3)
        assert rep.passed and rep.slope_spread <= 0.3

    def test_rejects(self):
        spec = make_model(10, 1.0)
        f = make_cutoff(3.0, 1.0)
        with pytest.raises(RejectedInputError):
            verify_commutator_expansion(spec.hamiltonian, f, spec.geometry, 0.0, [4], 0)
        with pytest.raises(RejectedInputError, match="half_width"):
            verify_commutator_expansion(spec.hamiltonian, f, spec.geometry, 0.0, [64], 2)


class TestConjecture:
    def test_dephasing_rows(self):
        specs = sample_conjecture_family(6, 4, seed=3, kind="dephasing")
        table = conjecture_scan(specs)
        for row in table.rows:
            assert row.kappa == pytest.approx(row.hamiltonian_speed, abs=1e-12)
            assert not row.below
        assert table.fraction_below == 0.0

    def test_directed_rows_signed(self):
        table = conjecture_scan(sample_conjecture_family(6, 3, seed=1, kind="directed_jump"))
        for row in table.rows:
            assert row.environment_shift == pytest.approx(row.kappa - row.hamiltonian_speed, abs=1e-15)

    def test_rejects_zero_family(self):
        with pytest.raises(RejectedInputError):
            conjecture_scan([make_model(3, 1.0, "dephasing", 0.0)])
        with pytest.raises(RejectedInputError):
            conjecture_scan([])
        with pytest.raises(RejectedInputError):
            sample_conjecture_family(3, 2, g=0.0)

    def test_seeded_reproducible(self):
        a = conjecture_scan(sample_conjecture_family(5, 3, seed=9)).to_dict()
        b = conjecture_scan(sample_conjecture_family(5, 3, seed=9)).to_dict()
        assert a == b

    def test_local_random_family_shape(self):
        geo = LatticeGeometry(3)
        fam = random_local_kraus(geo, 2.0, XorShift64Star(0))
        assert len(fam) == geo.size
        for i, w in enumerate(fam.dense()):
            assert np.linalg.norm(w) == pytest.approx(math.sqrt(2.0), rel=1e-12) or i == geo.size - 1
            assert np.count_nonzero(np.triu(w, 2)) == 0 and np.count_nonzero(np.tril(w, -2)) == 0
