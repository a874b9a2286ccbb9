import numpy as np
import pytest
from numpy.testing import assert_allclose

from core.exceptions import NegativeRate
from core.linalg import DensityMatrix
from models.generators import generator_appendix
from schemas.physics import IntegratorConfig, WernerParams, XInitial
from services.analytic_service import (
    f1_closed_form,
    f1_correlations,
    f1_stationary,
    f1_trajectory,
    f2_correlations,
    f2_stationary,
    f2_stationary_x,
    f2_trajectory,
)
from services.discord_service import classical_correlation, quantum_discord
from services.dynamics_service import integrate, stationary_from

X_ENTRIES = ((0, 0), (1, 1), (2, 2), (1, 2), (2, 1), (3, 3))


class TestF1:
    @pytest.mark.parametrize("a", [0.0, 0.5, 1.0])
    def test_starts_at_werner(self, waveguide_rates, a):
        m = f1_trajectory(WernerParams(a=a), waveguide_rates.xi, 0.0).matrix()
        assert_allclose(m, DensityMatrix.werner(a).data, atol=1e-14)

    @pytest.mark.parametrize("a", [0.0, 1.0])
    def test_matches_integration(self, waveguide_rates, a):
        trajectory = integrate(
            DensityMatrix.werner(a),
            generator_appendix(waveguide_rates.xi, -1.0),
            IntegratorConfig(dt=1e-3, t_max=3.0, record_stride=250),
        )
        entries = f1_trajectory(WernerParams(a=a), waveguide_rates.xi, trajectory.times)
        for k, state in enumerate(trajectory.states):
            reference = entries.matrix(k)
            for i, j in X_ENTRIES:
                assert_allclose(state[i, j], reference[i, j], atol=1e-6)

    def test_large_time_does_not_overflow(self, waveguide_rates):
        entries = f1_trajectory(WernerParams(a=0.5), waveguide_rates.xi, np.array([1e3, 1e5]))
        assert np.all(np.isfinite(entries.rho11))
        assert_allclose(entries.matrix(1), f1_stationary(WernerParams(a=0.5)).data, atol=1e-12)

    def test_stationary_is_pure_ground_state_for_bell_input(self):
        assert_allclose(f1_stationary(WernerParams(a=1.0)).data, DensityMatrix.basis_projector(4).data, atol=1e-15)

    def test_stationary_independent_of_xi(self):
        rho = f1_stationary(WernerParams(a=0.3))
        for xi in (0.5, 1.0, 2.0):
            reached = stationary_from(DensityMatrix.werner(0.3), generator_appendix(xi, -1.0)).state
            assert_allclose(reached.data, rho.data, atol=1e-6)

    def test_general_x_initial_state(self):
        x0 = XInitial(rho11=0.1, rho22=0.3, rho33=0.2, rho44=0.4, rho23=0.1)
        expected = stationary_from(x0.to_density_matrix(), generator_appendix(0.5, -1.0)).state
        assert_allclose(f1_stationary(x0).data, expected.data, atol=1e-6)

    def test_closed_form_total_matches_numeric(self):
        for a in (0.0, 0.3, 0.7, 0.95):
            result = f1_correlations(WernerParams(a=a))
            assert_allclose(result.total, result.numeric.total, atol=1e-9)
            assert result.numeric.classical >= result.classical - 1e-8

    def test_bell_input_loses_all_discord(self):
        assert_allclose(f1_closed_form(1.0).discord, 0.0, atol=1e-9)
        assert_allclose(f1_correlations(WernerParams(a=1.0)).numeric.discord, 0.0, atol=1e-9)

    def test_mixed_input_keeps_discord(self):
        assert_allclose(f1_correlations(WernerParams(a=0.0)).numeric.discord, 0.216, atol=0.01)

    def test_discord_decreases_with_weight(self):
        values = [f1_correlations(WernerParams(a=a)).numeric.discord for a in np.linspace(0.0, 1.0, 11)]
        assert all(b <= a + 1e-9 for a, b in zip(values, values[1:]))


class TestF2:
    @pytest.mark.parametrize("a", [0.0, 0.5, 1.0])
    def test_starts_at_werner(self, waveguide_rates, a):
        m = f2_trajectory(WernerParams(a=a), waveguide_rates.xi, 0.0).matrix()
        assert_allclose(m, DensityMatrix.werner(a).data, atol=1e-12)

    @pytest.mark.parametrize("a", [0.0, 0.5, 1.0])
    def test_matches_integration(self, waveguide_rates, a):
        trajectory = integrate(
            DensityMatrix.werner(a),
            generator_appendix(waveguide_rates.xi, 1.0),
            IntegratorConfig(dt=1e-3, t_max=3.0, record_stride=250),
        )
        entries = f2_trajectory(WernerParams(a=a), waveguide_rates.xi, trajectory.times)
        assert_allclose(trajectory.states, np.array([entries.matrix(k) for k in range(len(trajectory))]), atol=1e-6)

    def test_approaches_stationary_matrix(self, waveguide_rates):
        late = f2_trajectory(WernerParams(a=0.5), waveguide_rates.xi, 60.0).matrix()
        assert_allclose(late, f2_stationary(WernerParams(a=0.5), waveguide_rates.xi).data, atol=1e-10)

    def test_general_initial_state_reduces_to_werner(self, waveguide_rates):
        for a in (0.0, 0.4, 1.0):
            assert_allclose(
                f2_stationary_x(XInitial.from_werner(a), waveguide_rates.xi).data,
                f2_stationary(WernerParams(a=a), waveguide_rates.xi).data,
                atol=1e-12,
            )

    def test_general_x_initial_state(self, waveguide_rates):
        x0 = XInitial(rho11=0.1, rho22=0.3, rho33=0.2, rho44=0.4, rho23=0.1)
        expected = stationary_from(x0.to_density_matrix(), generator_appendix(waveguide_rates.xi, 1.0)).state
        assert_allclose(f2_stationary_x(x0, waveguide_rates.xi).data, expected.data, atol=1e-6)

    def test_steady_discord_of_bell_input(self, waveguide_rates):
        assert_allclose(quantum_discord(f2_stationary(WernerParams(a=1.0), waveguide_rates.xi)).discord, 0.38, atol=0.01)

    def test_small_decay_rate_enhances_discord(self):
        assert_allclose(quantum_discord(f2_stationary(WernerParams(a=1.0), 1e-3)).discord, 0.42, atol=0.01)

    def test_closed_form_total_matches_numeric(self, waveguide_rates):
        for a in (0.0, 0.3, 0.7, 1.0):
            result = f2_correlations(WernerParams(a=a), waveguide_rates.xi)
            assert_allclose(result.total, result.numeric.total, atol=1e-9)
            assert result.numeric.classical >= result.classical - 1e-8

    def test_turning_point(self, waveguide_rates):
        grid = np.linspace(0.0, 1.0, 101)
        classical = [classical_correlation(f2_stationary(WernerParams(a=a), waveguide_rates.xi))[0] for a in grid]
        turning = grid[int(np.argmin(classical[1:-1])) + 1]
        assert_allclose(turning, 0.77, atol=0.02)

    def test_discord_increases_with_weight(self, waveguide_rates):
        values = [f2_correlations(WernerParams(a=a), waveguide_rates.xi).numeric.discord for a in np.linspace(0.0, 1.0, 11)]
        assert all(b >= a - 1e-9 for a, b in zip(values, values[1:]))

    def test_negative_rate(self):
        with pytest.raises(NegativeRate):
            f2_trajectory(WernerParams(a=0.5), -0.1, 1.0)

    def test_negative_time(self, waveguide_rates):
        with pytest.raises(ValueError):
            f2_trajectory(WernerParams(a=0.5), waveguide_rates.xi, -1.0)

    def test_correlations_json(self, waveguide_rates):
        assert '"scheme": "F2"' in f2_correlations(WernerParams(a=0.5), waveguide_rates.xi).to_json()
