import math

import numpy as np
import pytest

from contactqm.analysis import (CriticalPoint, QubitField, classify_bifurcation,
                                classify_eigenvalues, conservative_critical_points, degenerate_critical_points,
                                dissipative_critical_points, dissipative_eigenvalues, numeric_jacobian,
                                phase_portrait, real_jacobian, trajectory_observables, uncertainty_peak)
from contactqm.dynamics import ContactHamiltonianSpec, GeneralDissipation, LinearDissipation, excited_state, integrate
from contactqm.errors import DegenerateV, DimensionMismatch, UnsupportedScenario
from contactqm.states import ExtendedState, ProjectiveState

V = 1 + 1j


class TestClassification:
    @pytest.mark.parametrize("eigs, kind", [
        ((1j, -1j), "center"),
        ((-1 + 2j, -1 - 2j), "stable focus"),
        ((1 + 2j, 1 - 2j), "unstable focus"),
        ((-1, -3), "stable node"),
        ((2, 1), "unstable node"),
        ((-1, 2), "saddle"),
        ((0, -1), "non-hyperbolic"),
        ((0, 0), "non-hyperbolic"),
        ((1e-12 + 1j, 1e-12 - 1j), "center"),
    ])
    def test_planar_types(self, eigs, kind):
        assert classify_eigenvalues(eigs) == kind

    def test_real_jacobian_matches_numeric(self, rng):
        q = QubitField(4, 2, 0.5 - 0.2j, 0.8)
        for _ in range(20):
            z = complex(*rng.normal(size=2))
            assert np.allclose(real_jacobian(*q.wirtinger(z)), numeric_jacobian(q.rhs, z), atol=1e-7)

    def test_north_chart_wirtinger(self, rng):
        q = QubitField(4, 2, 0.5 - 0.2j, 0.0)
        for _ in range(10):
            z = complex(*rng.normal(size=2))
            assert np.allclose(q.jacobian(z, 1), numeric_jacobian(lambda w: q.rhs(w, 1), z), atol=1e-7)

    def test_bad_chart(self):
        with pytest.raises(ValueError):
            QubitField(1, 0, 1).rhs(0.1, 3)


class TestQubitField:
    def test_from_spec(self):
        spec = ContactHamiltonianSpec([[3, V], [np.conj(V), 3]], LinearDissipation(1.0))
        q = QubitField.from_spec(spec)
        assert (q.H1, q.H2, q.V, q.gamma) == (3, 3, V, 1.0)
        assert np.allclose(q.spec.H, spec.H)
        with pytest.raises(DimensionMismatch):
            QubitField.from_spec(ContactHamiltonianSpec(np.eye(3)))
        with pytest.raises(UnsupportedScenario):
            QubitField.from_spec(ContactHamiltonianSpec(np.eye(2), GeneralDissipation.polynomial([0, -1])))

    def test_pole(self):
        assert QubitField(3, 3, V, 0.0).pole_point() is None
        node = QubitField(3, 3, V, 1.0).pole_point()
        assert node.classification == "unstable node" and node.chart == 1
        assert QubitField(4, 2, V, 1.0).pole_point().classification == "unstable focus"


class TestConservative:
    def test_conservative_roots_are_centers(self):
        pts = conservative_critical_points(4, 2, V)
        s = math.sqrt(3)
        assert pts[0].z == pytest.approx((1 + s) * V / 2)
        assert pts[1].z == pytest.approx((1 - s) * V / 2)
        for p in pts:
            assert p.classification == "center"
            assert max(abs(ev.real) for ev in p.eigenvalues) < 1e-10
            assert abs(QubitField(4, 2, V).rhs(p.z)) < 1e-12

    def test_eigenvalues_are_level_spacing(self):
        # linearized frequency is the splitting sqrt((H1 - H2)^2 + 4|V|^2)
        for p in conservative_critical_points(4, 2, V):
            assert sorted(abs(ev.imag) for ev in p.eigenvalues) == pytest.approx([math.sqrt(12)] * 2)

    def test_degenerate(self):
        with pytest.raises(DegenerateV) as info:
            conservative_critical_points(4, 2, 0)
        labels = [p.label for p in info.value.points]
        assert labels == ["south pole", "north pole"]
        assert all(p.classification == "center" for p in info.value.points)
        with pytest.raises(DegenerateV) as info:
            conservative_critical_points(3, 3, 0)
        assert info.value.points == []
        with pytest.raises(DegenerateV):
            degenerate_critical_points(1, 1)


class TestDissipative:
    def test_regimes(self):
        report = classify_bifurcation(V, 1.0)
        assert (report.regime, report.sub_case) == ("iii", "foci")
        assert report.delta_minus == pytest.approx(7.0)
        assert classify_bifurcation(V, 2 * math.sqrt(2)).regime == "ii"
        assert classify_bifurcation(V, 3.0).regime == "i"
        assert classify_bifurcation(V, 2.7).sub_case == "nodes"

    @pytest.mark.parametrize("gamma, count", [(1.0, 3), (2 * math.sqrt(2), 2), (3.0, 1)])
    def test_counts_and_roots(self, gamma, count):
        pts = dissipative_critical_points(3, 3, V, gamma)
        assert len(pts) == count
        q = QubitField(3, 3, V, gamma)
        for p in pts:
            assert abs(q.rhs(p.z)) < 1e-12

    @pytest.mark.parametrize("gamma", [1.0, 2.0, 2 * math.sqrt(2), 3.0, 5.0])
    def test_closed_form_eigenvalues_match_jacobian(self, gamma):
        q = QubitField(3, 3, V, gamma)
        for p in dissipative_critical_points(3, 3, V, gamma):
            numeric = q.linearize(p.z).eigenvalues
            assert np.allclose(sorted(p.eigenvalues, key=lambda c: (c.real, c.imag)), numeric, atol=1e-8)

    def test_dissipative_values(self):
        z1, z2, z3 = dissipative_critical_points(3, 3, V, 1.0)
        assert z3.z == pytest.approx(2 - 2j)
        assert z3.classification == "saddle"
        assert sorted(ev.real for ev in z3.eigenvalues) == pytest.approx([-4.5, 3.5])
        for p in (z1, z2):
            assert p.classification == "stable focus"
            assert p.eigenvalues[0] == pytest.approx(complex(-0.5, -math.sqrt(6.75)))

    def test_regime_two_is_non_hyperbolic(self):
        pts = dissipative_critical_points(3, 3, V, 2 * math.sqrt(2))
        assert pts[0].label == "z12"
        assert pts[0].classification == "non-hyperbolic"
        assert sorted(ev.real for ev in pts[0].eigenvalues) == pytest.approx([-2 * math.sqrt(2), 0], abs=1e-12)

    def test_eigenvalue_dict(self):
        assert set(dissipative_eigenvalues(V, 3.0)) == {"z3"}
        assert set(dissipative_eigenvalues(V, 1.0)) == {"z12", "z3"}

    def test_errors(self):
        with pytest.raises(UnsupportedScenario):
            dissipative_critical_points(4, 2, V, 1.0)
        with pytest.raises(DegenerateV):
            dissipative_critical_points(3, 3, 0, 1.0)
        with pytest.raises(ValueError):
            dissipative_critical_points(3, 3, V, 0.0)


class TestPhasePortrait:
    def test_conservative_census(self):
        portrait = phase_portrait(QubitField(4, 2, V), (-3, 3, -3, 3), (31, 31))
        assert portrait.census() == {"center": 2}
        zs = sorted((p.z for p in portrait.critical_points), key=lambda z: z.real)
        s = math.sqrt(3)
        assert zs[0] == pytest.approx((1 - s) * V / 2, abs=1e-10)
        assert zs[1] == pytest.approx((1 + s) * V / 2, abs=1e-10)

    def test_dissipative_census(self):
        portrait = phase_portrait(QubitField(3, 3, V, 1.0), (-3, 3, -3, 3), (41, 41))
        assert portrait.census() == {"stable focus": 2, "saddle": 1, "unstable node": 1}
        pole = [p for p in portrait.critical_points if p.label == "north pole"]
        assert len(pole) == 1 and pole[0].bloch.x3 == pytest.approx(1)

    def test_sample_layout(self):
        portrait = phase_portrait(QubitField(4, 2, V), (-1, 1, -1, 1), (5, 4), streamline_seeds=4,
                                  streamline_time=0.5)
        assert portrait.x.size == 2 * 5 * 4
        assert set(portrait.chart) == {1, 2}
        assert np.allclose(np.linalg.norm(portrait.bloch, axis=1), 1)
        assert len(portrait.streamlines) == 4

    def test_bad_window(self):
        with pytest.raises(ValueError):
            phase_portrait(QubitField(4, 2, V), (1, -1, -1, 1), (5, 5))
        with pytest.raises(ValueError):
            phase_portrait(QubitField(4, 2, V), (-1, 1, -1, 1), (1, 5))

    def test_accepts_spec(self):
        spec = ContactHamiltonianSpec([[4, V], [np.conj(V), 2]])
        assert phase_portrait(spec, grid=(11, 11)).census() == {"center": 2}


class TestObservables:
    def test_decay_table(self):
        spec = ContactHamiltonianSpec(np.diag([4.0, 2.0]), LinearDissipation(1.0))
        ts = np.linspace(0, 10, 41)
        table = trajectory_observables(integrate(spec, excited_state(2, 1e-3), (0, 10), t_eval=ts), spec.H)
        x = np.exp(-ts - 2e-3)
        assert np.allclose(table.e_H, 2 + 2 * x, atol=1e-8)
        assert np.allclose(table.P, x, atol=1e-8)
        assert np.allclose(table.var_H, 4 * x * (1 - x), atol=1e-8)
        assert np.allclose(table.bloch[:, 2], 2 * x - 1, atol=1e-8)
        assert table.chart[0] == 1 and table.chart[-1] == 2

    def test_reference_level(self):
        spec = ContactHamiltonianSpec(np.diag([4.0, 2.0]), LinearDissipation(1.0))
        traj = integrate(spec, excited_state(2, 1e-3), (0, 1), t_eval=[0, 1])
        t1, t2 = trajectory_observables(traj, spec.H, 1), trajectory_observables(traj, spec.H, 2)
        assert np.allclose(t1.P + t2.P, 1)

    def test_qutrit_has_no_bloch_point(self):
        spec = ContactHamiltonianSpec(np.diag([1.0, 2.0, 3.0]))
        traj = integrate(spec, ExtendedState(ProjectiveState(3, [0.1, 0.2])), (0, 1), t_eval=[0, 1])
        assert np.isnan(trajectory_observables(traj, spec.H).bloch).all()

    def test_uncertainty_peak(self):
        spec = ContactHamiltonianSpec(np.diag([4.0, 2.0]), LinearDissipation(1.0))
        traj = integrate(spec, excited_state(2, 1e-3), (0, 10), t_eval=np.linspace(0, 10, 101))
        t, v = uncertainty_peak(traj, spec.H)
        assert t == pytest.approx(math.log(2) - 2e-3, abs=1e-4)
        assert v == pytest.approx(1, abs=1e-6)


def test_critical_point_bloch():
    assert CriticalPoint(0j, (1j, -1j), "center").bloch.x3 == pytest.approx(-1)
    assert CriticalPoint(0j, (1j, -1j), "center", chart=1).bloch.x3 == pytest.approx(1)
