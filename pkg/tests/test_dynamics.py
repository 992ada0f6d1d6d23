import math

import numpy as np
import pytest

from conftest import random_hermitian, random_point, random_tangent
from contactqm.dynamics import (ContactHamiltonianSpec, GeneralDissipation, LinearDissipation, StepControl,
                                Trajectory, _pack, _real_rhs, contact_field, decay_closed_form, decay_parameters,
                                excited_state, expectation, extended_gradient, gradient_field, hamiltonian_field,
                                integrate, observable_rate)
from contactqm.errors import DimensionMismatch, DomainError, StepFailure
from contactqm.geometry import ScalarField, d_eta, eta, g_ext, j_fs, omega_fs, real_basis, reeb, variance
from contactqm.states import ExtendedState, ProjectiveState, chart_transition, density_matrix, random_state

H_COUPLED = np.array([[4, 1 + 1j], [1 - 1j, 2]])
H_RESONANT = np.array([[3, 1 + 1j], [1 - 1j, 3]])
H_DECAY = np.diag([4.0, 2.0])


def test_spec_validation():
    with pytest.raises(ValueError):
        ContactHamiltonianSpec([[1, 1j], [1j, 1]])
    with pytest.raises(DimensionMismatch):
        ContactHamiltonianSpec([[1.0]])
    with pytest.raises(ValueError):
        ContactHamiltonianSpec(np.eye(2), hbar=0)
    spec = ContactHamiltonianSpec(np.eye(2), LinearDissipation(0.5))
    assert spec.is_linear and spec.gamma == 0.5
    general = ContactHamiltonianSpec(np.eye(2), GeneralDissipation.polynomial([1, 2, 3]))
    assert general.fiber.f(2.0) == 17.0 and general.fiber.df(2.0) == 14.0
    with pytest.raises(AttributeError):
        general.gamma


class TestExpectation:
    def test_examples(self):
        assert expectation(H_COUPLED, ProjectiveState(2, [0])) == pytest.approx(2)
        assert expectation(H_COUPLED, ProjectiveState(2, [1])) == pytest.approx(4)

    def test_dimension(self):
        with pytest.raises(DimensionMismatch):
            expectation(np.eye(3), ProjectiveState(2, [0]))


class TestSymplecticFields:
    def test_riccati_at_origin(self):
        assert hamiltonian_field(H_COUPLED, ProjectiveState(2, [0])).dz == pytest.approx([1 - 1j])

    def test_vanishes_at_critical_points(self):
        for z in ((1 + math.sqrt(3)) * (1 + 1j) / 2, (1 - math.sqrt(3)) * (1 + 1j) / 2):
            assert abs(hamiltonian_field(H_COUPLED, ProjectiveState(2, [z])).dz[0]) < 1e-12

    def test_component_formula(self, rng):
        for _ in range(50):
            n = int(rng.integers(2, 6))
            H = random_hermitian(n, rng)
            s = random_point(n, rng)
            z = s.z
            H1, V, H2 = H[:-1, :-1], H[:-1, -1], H[-1, -1].real
            expected = 1j * (z * np.dot(V.conj(), z) - H1 @ z + H2 * z - V)
            assert np.allclose(hamiltonian_field(H, s).dz, expected, atol=1e-12)

    def test_hamiltonian_condition(self, rng):
        for _ in range(100):
            n = int(rng.integers(2, 5))
            H = random_hermitian(n, rng)
            s = random_point(n, rng)
            X = hamiltonian_field(H, s, 1.4)
            eH = ScalarField.expectation(H)
            for u in real_basis(n - 1):
                assert omega_fs(s, X, u, 1.4) == pytest.approx(eH.differential(s, u), abs=1e-10)

    def test_complex_structure_relation(self, rng):
        for _ in range(200):
            n = int(rng.integers(2, 5))
            H = random_hermitian(n, rng)
            s = random_point(n, rng)
            assert np.allclose(j_fs(s, hamiltonian_field(H, s)).dz, gradient_field(H, s).dz, atol=1e-12)

    def test_extended_gradient_definition(self, rng):
        for _ in range(200):
            n = int(rng.integers(2, 4))
            A = random_hermitian(n, rng)
            c = rng.normal(size=3)
            field = ScalarField.expectation(A) + ScalarField.fiber(lambda S: c[0] * S * S + c[1] * S + c[2],
                                                                   lambda S: 2 * c[0] * S + c[1])
            e = ExtendedState(random_point(n, rng), float(rng.normal()))
            Y = extended_gradient(field, e, 0.8)
            v = random_tangent(n - 1, rng)
            assert g_ext(e, Y, v, 0.8) == pytest.approx(field.differential(e, v), abs=1e-10)

    def test_extended_gradient_basic_field(self, rng):
        A = random_hermitian(3, rng)
        e = ExtendedState(random_point(3, rng))
        Y = extended_gradient(ScalarField.expectation(A), e)
        # the z-part is the Fubini-Study gradient; the S-part comes from the fibre component of the metric
        assert np.allclose(Y.dz, gradient_field(A, e.state).dz, atol=1e-12)


class TestContactField:
    def test_conservative_limit(self, rng):
        for _ in range(100):
            n = int(rng.integers(2, 6))
            H = random_hermitian(n, rng)
            e = ExtendedState(random_state(n, rng, int(rng.integers(1, n + 1))), float(rng.normal()))
            X = contact_field(ContactHamiltonianSpec(H), e)
            assert np.max(np.abs(X.dz - hamiltonian_field(H, e.state).dz)) < 1e-14 * max(1, np.abs(X.dz).max())

    def test_dissipative_qubit_examples(self):
        spec = ContactHamiltonianSpec(H_RESONANT, LinearDissipation(1.0))
        assert contact_field(spec, ExtendedState(ProjectiveState(2, [0]))).dz == pytest.approx([1 - 1j])
        assert abs(contact_field(spec, ExtendedState(ProjectiveState(2, [2 - 2j]))).dz[0]) < 1e-14

    def test_qubit_equation(self, rng):
        H1, H2, V, g = 4.0, 2.0, 1 + 1j, 0.7
        spec = ContactHamiltonianSpec([[H1, V], [np.conj(V), H2]], LinearDissipation(g))
        for _ in range(50):
            z = complex(*rng.normal(size=2))
            e = ExtendedState(ProjectiveState(2, [z]), float(rng.normal()))
            X = contact_field(spec, e)
            dz = 1j * (np.conj(V) * z * z - (H1 - H2) * z - V) - g / 2 * z * (1 + abs(z) ** 2)
            q = abs(z) ** 2
            dS = -spec.value(e) - 0.5 * (1 - q) / (1 + q) * 2 * (np.conj(V) * z).real + q / (1 + q) * (H2 - H1)
            assert X.dz[0] == pytest.approx(dz, abs=1e-12)
            assert X.dS == pytest.approx(dS, abs=1e-12)

    def test_defining_conditions_in_reference_chart(self, rng):
        for _ in range(100):
            n = int(rng.integers(2, 5))
            hbar = float(rng.uniform(0.5, 2))
            spec = ContactHamiltonianSpec(random_hermitian(n, rng), GeneralDissipation.polynomial(rng.normal(size=3)),
                                          hbar)
            e = ExtendedState(random_point(n, rng), float(rng.normal()))
            X = contact_field(spec, e)
            Hc = spec.as_field()
            assert eta(e, X, hbar) == pytest.approx(-spec.value(e), abs=1e-10)
            for u in real_basis(n - 1) + [reeb(e)]:
                rhs = Hc.differential(e, u) - Hc.grad_S(e) * eta(e, u, hbar)
                assert d_eta(e, X, u, hbar) == pytest.approx(-rhs, abs=1e-10)

    def test_pushforward_matches_reference_chart(self, rng):
        # in any chart the field is the image of the chart-n field under the transition map
        for _ in range(100):
            n = int(rng.integers(2, 5))
            spec = ContactHamiltonianSpec(random_hermitian(n, rng), LinearDissipation(float(rng.uniform(0, 2))))
            c = int(rng.integers(1, n))
            s = random_state(n, rng, c)
            e = ExtendedState(s, 0.3)
            ref = ExtendedState(chart_transition(s, n), 0.3)
            Xn = contact_field(spec, ref)
            h = 1e-6

            def to_c(w):
                return chart_transition(ProjectiveState(n, w), c).z
            dz = (to_c(ref.z + h * Xn.dz) - to_c(ref.z - h * Xn.dz)) / (2 * h)
            Xc = contact_field(spec, e)
            scale = max(1.0, np.abs(Xc.dz).max())
            assert np.max(np.abs(Xc.dz - dz)) < 1e-6 * scale
            assert Xc.dS == pytest.approx(Xn.dS, abs=1e-10 * max(1, abs(Xn.dS)))

    def test_fast_rhs_matches_contact_field(self, rng):
        for _ in range(100):
            n = int(rng.integers(2, 5))
            spec = ContactHamiltonianSpec(random_hermitian(n, rng), GeneralDissipation.polynomial([0.1, -1, 0.2]))
            c = int(rng.integers(1, n + 1))
            e = ExtendedState(random_state(n, rng, c), float(rng.normal()))
            assert np.allclose(_real_rhs(spec, c)(0.0, _pack(e)), contact_field(spec, e).to_real(),
                               rtol=1e-13, atol=1e-13)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            contact_field(ContactHamiltonianSpec(np.eye(3)), ExtendedState(ProjectiveState(2, [0])))


class TestDecayClosedForm:
    def test_energy_and_population(self):
        for t in (0.0, 0.5, 3.0):
            s = decay_closed_form(4, 2, 1, 1e-3, 0.3, t)
            x = math.exp(-(t + 2e-3))
            assert expectation(H_DECAY, s) == pytest.approx(2 + 2 * x, rel=1e-13)
            assert 1 / (1 + s.norm_sq) * s.norm_sq == pytest.approx(x, rel=1e-12)

    def test_long_time_limit(self):
        assert abs(decay_closed_form(4, 2, 1, 1e-3, 0, 60).z[0]) < 1e-12

    def test_domain(self):
        with pytest.raises(DomainError):
            decay_closed_form(4, 2, 1, 0.0, 0.0, 0.0)

    def test_parameters_roundtrip(self):
        z0 = decay_closed_form(4, 2, 1, 0.2, 0.7, 0.0).z[0]
        k, p = decay_parameters(z0)
        assert k == pytest.approx(0.2) and p == pytest.approx(0.7)
        with pytest.raises(DomainError):
            decay_parameters(0)

    def test_excited_state(self):
        e = excited_state(2, 0.2, 0.7)
        assert e.state.isclose(decay_closed_form(4, 2, 1, 0.2, 0.7, 0.0))
        assert excited_state(3, 0.0).state == ProjectiveState(1, [0, 0])
        with pytest.raises(DomainError):
            excited_state(2, -1)


class TestIntegrate:
    def test_decay_oracle(self):
        spec = ContactHamiltonianSpec(H_DECAY, LinearDissipation(1.0))
        ts = np.linspace(0, 10, 101)
        traj = integrate(spec, excited_state(2, 1e-3), (0, 10), t_eval=ts)
        assert isinstance(traj, Trajectory) and len(traj) == ts.size
        assert traj.chart_switch_events and traj.chart_switch_events[0][1:] == (1, 2)
        for t, e in zip(ts, traj.states):
            exact = decay_closed_form(4, 2, 1, 1e-3, 0, t).z[0]
            assert abs(chart_transition(e.state, 2).z[0] - exact) <= 1e-8 * abs(exact)

    def test_energy_conservation(self):
        spec = ContactHamiltonianSpec(H_COUPLED)
        traj = integrate(spec, ExtendedState(ProjectiveState(2, [0.5])), (0, 20), t_eval=np.linspace(0, 20, 201))
        eH = [expectation(H_COUPLED, e.state) for e in traj.states]
        assert max(abs(x - eH[0]) for x in eH) < 1e-9

    def test_saddle_is_left(self):
        spec = ContactHamiltonianSpec(H_RESONANT, LinearDissipation(1.0))
        traj = integrate(spec, ExtendedState(ProjectiveState(2, [2 - 2j + 1e-4])), (0, 5))
        assert abs(chart_transition(traj.states[-1].state, 2).z[0] - (2 - 2j)) > 0.5

    def test_steps_and_dense_output(self):
        spec = ContactHamiltonianSpec(H_RESONANT, LinearDissipation(1.0))
        traj = integrate(spec, ExtendedState(ProjectiveState(2, [-1.5 + 1.5j])), (0, 3))
        assert np.all(np.diff(traj.times) > 0)
        assert traj.times[0] == 0 and traj.times[-1] == 3
        mid = traj.state_at(1.234)
        assert np.all(np.isfinite(mid.z))
        with pytest.raises(ValueError):
            traj.state_at(4.0)

    def test_purity_along_flow(self, rng):
        for _ in range(5):
            n = int(rng.integers(2, 5))
            spec = ContactHamiltonianSpec(random_hermitian(n, rng), LinearDissipation(float(rng.uniform(0, 2))))
            traj = integrate(spec, ExtendedState(random_point(n, rng)), (0, 5), t_eval=np.linspace(0, 5, 51))
            for rho in traj.density_matrices():
                assert abs(np.trace(rho) - 1) < 1e-12
                assert np.linalg.norm(rho @ rho - rho) < 1e-8

    def test_large_start_switches_chart_first(self):
        spec = ContactHamiltonianSpec(H_COUPLED)
        traj = integrate(spec, ExtendedState(ProjectiveState(2, [1e6])), (0, 1))
        assert traj.states[0].chart == 1

    def test_bad_arguments(self):
        spec = ContactHamiltonianSpec(H_COUPLED)
        e0 = ExtendedState(ProjectiveState(2, [0.5]))
        with pytest.raises(ValueError):
            integrate(spec, e0, (1, 0))
        with pytest.raises(ValueError):
            integrate(spec, e0, (0, 1), t_eval=[0.5, 0.2])
        with pytest.raises(DimensionMismatch):
            integrate(spec, ExtendedState(ProjectiveState(3, [0, 0])), (0, 1))

    def test_step_failure_reports_last_state(self):
        # with H = 1 and f(S) = S^2 the fibre equation is dS/dt = -1 - S^2, which blows up in finite time
        spec = ContactHamiltonianSpec(np.eye(2), GeneralDissipation.polynomial([0, 0, 1]))
        with pytest.raises(StepFailure) as info:
            integrate(spec, ExtendedState(ProjectiveState(2, [0.3]), 1.0), (0, 10))
        assert info.value.t is not None and 0 < info.value.t < 10
        assert info.value.state is not None


class TestObservableRate:
    def test_energy_conserved_without_dissipation(self, rng):
        H = random_hermitian(3, rng)
        spec = ContactHamiltonianSpec(H)
        for _ in range(20):
            assert observable_rate(H, spec, ExtendedState(random_point(3, rng))) == pytest.approx(0, abs=1e-12)

    def test_population_decay_rate(self, rng):
        spec = ContactHamiltonianSpec(H_DECAY, LinearDissipation(1.3))
        P = np.diag([1.0, 0.0])
        for _ in range(20):
            e = ExtendedState(random_point(2, rng))
            p = expectation(P, e.state)
            assert observable_rate(P, spec, e) == pytest.approx(-1.3 * p, abs=1e-12)

    def test_rate_outside_reference_chart(self):
        spec = ContactHamiltonianSpec(H_DECAY, LinearDissipation(1.0))
        e = excited_state(2, 0.0)
        # exactly at the excited level the reference chart is unavailable; the rate is finite
        rate = observable_rate(np.diag([1.0, 0.0]), spec, ExtendedState(ProjectiveState(1, [0.1])))
        assert np.isfinite(rate) and e.chart == 1

    def test_matches_finite_differences(self, rng):
        for _ in range(20):
            n = int(rng.integers(2, 4))
            spec = ContactHamiltonianSpec(random_hermitian(n, rng), LinearDissipation(float(rng.uniform(0, 2))))
            A = random_hermitian(n, rng)
            traj = integrate(spec, ExtendedState(random_point(n, rng)), (0, 1), StepControl(rtol=1e-12, atol=1e-13))
            t, h = 0.5, 1e-4
            fd = (expectation(A, traj.state_at(t + h).state) - expectation(A, traj.state_at(t - h).state)) / (2 * h)
            assert observable_rate(A, spec, traj.state_at(t)) == pytest.approx(fd, abs=1e-6)


def test_uncertainty_expression_same_in_both_regimes(rng):
    # the variance of H is the same function of z with and without dissipation
    for _ in range(20):
        z = complex(*rng.normal(size=2))
        s = ProjectiveState(2, [z])
        assert variance(H_RESONANT, s) == pytest.approx(
            abs((1 + 1j) * np.conj(z) ** 2 - (1 - 1j)) ** 2 / (1 + abs(z) ** 2) ** 2, rel=1e-12)


def test_density_from_trajectory_is_hermitian(rng):
    spec = ContactHamiltonianSpec(H_RESONANT, LinearDissipation(1.0))
    traj = integrate(spec, ExtendedState(ProjectiveState(2, [0.1])), (0, 1), t_eval=[0, 0.5, 1])
    for e in traj.states:
        rho = density_matrix(e.state)
        assert np.allclose(rho, rho.conj().T)
