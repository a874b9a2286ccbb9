import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from core.exceptions import NegativeRate, NonPositiveLength, NotXState
from core.linalg import DensityMatrix
from models.generators import (
    AppendixGenerator,
    FullGenerator,
    build_generator,
    generator_appendix,
    unvec,
    vec,
)
from models.operators import (
    DARK_STATE,
    dark_population,
    driving_hamiltonian,
    feedback_operator,
    jump_operator,
)
from models.waveguide import Rates, derive_rates
from schemas.physics import AppendixVariant, FeedbackSpec, GeneratorMode, WaveguideParams


def _random_hermitian(rng: np.random.Generator) -> np.ndarray:
    b = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    return 0.5 * (b + b.conj().T)


class TestRates:
    def test_default_geometry(self, waveguide_rates):
        expected = 0.9 * math.exp(-525e-9 / (2 * 1.7e-6)) * math.sqrt(0.5)
        assert_allclose(waveguide_rates.xi, expected)
        assert_allclose(waveguide_rates.xi, 0.5453, atol=1e-4)
        assert_allclose(waveguide_rates.gamma, waveguide_rates.xi / 2)
        assert waveguide_rates.omega0 == waveguide_rates.gamma

    def test_zero_separation_allowed(self):
        rates = derive_rates(WaveguideParams.from_settings(separation=0.0))
        assert_allclose(rates.xi, 0.9 * math.sqrt(0.5))
        assert_allclose(rates.gamma, 0.9 * math.sqrt(0.5) / 2)

    def test_negative_separation(self):
        with pytest.raises(NonPositiveLength):
            derive_rates(WaveguideParams.from_settings(separation=-1e-9))

    def test_non_positive_propagation_length(self):
        with pytest.raises(NonPositiveLength):
            derive_rates(WaveguideParams.from_settings(propagation_length=0.0))

    def test_negative_cosine_is_negative_rate(self):
        with pytest.raises(NegativeRate):
            derive_rates(WaveguideParams.from_settings(cos_krd=-0.5))

    def test_rates_validation(self):
        with pytest.raises(NegativeRate):
            Rates(xi=-0.1, gamma=0.0, omega0=0.0)
        with pytest.raises(NegativeRate):
            Rates(xi=math.nan, gamma=0.0, omega0=0.0)

    def test_from_xi(self):
        rates = Rates.from_xi(0.4, delta=0.1)
        assert rates.gamma == rates.omega0 == 0.2
        assert_allclose(rates.level_shift, 0.3)


class TestOperators:
    def test_dark_state_is_annihilated(self):
        assert_allclose(jump_operator(0.7) @ DARK_STATE, 0.0, atol=1e-14)

    def test_jump_operator_rejects_negative_rate(self):
        with pytest.raises(NegativeRate):
            jump_operator(-1.0)

    def test_hamiltonian_and_feedback_are_hermitian(self, waveguide_rates):
        h = driving_hamiltonian(waveguide_rates)
        assert_allclose(h, h.conj().T)
        for mu in (-1.0, 0.3, 1.0):
            f = feedback_operator(mu)
            assert_allclose(f, f.conj().T)

    def test_feedback_block_structure(self):
        # mu - 1 couples |1> to |2>,|3>; -(mu + 1) couples |4> to |2>,|3>
        f = feedback_operator(0.5)
        assert_allclose([f[0, 1], f[0, 2]], [-0.5, -0.5])
        assert_allclose([f[3, 1], f[3, 2]], [-1.5, -1.5])
        assert_allclose([f[0, 3], f[1, 2]], [0.0, 0.0])

    def test_feedback_range(self):
        with pytest.raises(ValueError):
            feedback_operator(1.5)

    def test_dark_population_of_werner(self):
        for a in (0.0, 0.4, 1.0):
            assert_allclose(dark_population(DensityMatrix.werner(a)), (1 - a) / 4, atol=1e-14)


class TestFullGenerator:
    @pytest.mark.parametrize("feedback", [FeedbackSpec.disabled(), FeedbackSpec(mu=-1.0), FeedbackSpec(mu=0.3), FeedbackSpec(mu=1.0)])
    def test_trace_and_hermiticity_preserved(self, waveguide_rates, feedback):
        generator = FullGenerator(waveguide_rates, feedback)
        rng = np.random.default_rng(3)
        for _ in range(5):
            d = generator(_random_hermitian(rng))
            assert_allclose(np.trace(d), 0.0, atol=1e-12)
            assert_allclose(d, d.conj().T, atol=1e-12)

    def test_superoperator_matches_action(self, waveguide_rates):
        generator = FullGenerator(waveguide_rates, FeedbackSpec(mu=0.5))
        rng = np.random.default_rng(5)
        m = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        assert_allclose(unvec(generator.superoperator() @ vec(m)), generator(m), atol=1e-12)

    def test_dark_population_conserved(self, waveguide_rates):
        for feedback in (FeedbackSpec.disabled(), FeedbackSpec(mu=-1.0), FeedbackSpec(mu=1.0)):
            d = FullGenerator(waveguide_rates, feedback)(DensityMatrix.werner(0.3).data)
            assert_allclose(dark_population(d), 0.0, atol=1e-12)


class TestAppendixGenerator:
    @pytest.mark.parametrize("mu", [-1.0, -0.4, 0.0, 0.6, 1.0])
    def test_matches_full_generator_on_x_states(self, random_x_states, mu):
        xi = 0.545337
        full = FullGenerator(Rates.from_xi(xi), FeedbackSpec(mu=mu))
        appendix = generator_appendix(xi, mu)
        for rho in random_x_states(5):
            assert_allclose(appendix(rho.data), full(rho.data), atol=1e-12)

    def test_feedback_disabled_matches_plain_decay(self, random_x_states):
        xi = 0.3
        full = FullGenerator(Rates.from_xi(xi), FeedbackSpec.disabled())
        appendix = AppendixGenerator(xi, 0.0, feedback_enabled=False)
        for rho in random_x_states(5, seed=11):
            assert_allclose(appendix(rho.data), full(rho.data), atol=1e-12)

    def test_superoperator_restricted_to_x_sector(self):
        generator = generator_appendix(0.5, 1.0)
        full = FullGenerator(Rates.from_xi(0.5), FeedbackSpec(mu=1.0))
        support = generator.support
        assert_allclose(
            generator.superoperator()[np.ix_(support, support)],
            full.superoperator()[np.ix_(support, support)],
            atol=1e-12,
        )

    def test_rejects_non_x_state(self):
        m = np.eye(4, dtype=complex) / 4
        m[0, 1] = m[1, 0] = 0.05
        with pytest.raises(NotXState):
            generator_appendix(0.5, 1.0)(m)

    def test_printed_variant_leaks_trace(self):
        generator = generator_appendix(0.5, -1.0, variant=AppendixVariant.PRINTED)
        d = generator(DensityMatrix.werner(0.5).data)
        assert abs(np.trace(d)) > 1e-3

    def test_printed_ground_equation_under_f1(self, random_x_states):
        # mu = -1: d rho11 = -2(xi + 4) rho11 - 2 (rho22 + rho33 + rho23 + rho32)
        xi = 0.545337
        generator = generator_appendix(xi, -1.0, variant=AppendixVariant.PRINTED)
        for rho in random_x_states(5, real=True, seed=17):
            v = AppendixGenerator.components(rho.data)
            block = v[1] + v[2] + v[3] + v[4]
            assert_allclose(generator.rhs(v)[0], -2.0 * (xi + 4.0) * v[0] - 2.0 * block, atol=1e-12)

    def test_trace_preserving_ground_equation_under_f1(self, random_x_states):
        xi = 0.545337
        generator = generator_appendix(xi, -1.0)
        for rho in random_x_states(5, real=True, seed=17):
            v = AppendixGenerator.components(rho.data)
            block = v[1] + v[2] + v[3] + v[4]
            assert_allclose(generator.rhs(v)[0], -2.0 * (xi + 4.0) * v[0] + 4.0 * block, atol=1e-12)

    def test_rejects_negative_rate(self):
        with pytest.raises(NegativeRate):
            AppendixGenerator(-0.1, 1.0)


class TestBuildGenerator:
    def test_dispatch(self, waveguide_rates):
        assert isinstance(build_generator(GeneratorMode.FULL, waveguide_rates, FeedbackSpec(mu=1.0)), FullGenerator)
        appendix = build_generator(GeneratorMode.APPENDIX, waveguide_rates, FeedbackSpec.disabled())
        assert isinstance(appendix, AppendixGenerator)
        assert not appendix.feedback.enabled
