"""Domain-model tests: states, observables, detection models, effects and the
overall/conditional probability rules.

Derived expectations are frozen from independent arithmetic (outer products,
explicit effect assembly) rather than from the code under test.
"""

import numpy as np
import pytest

from esrsim import (
    ConstantDetection,
    DimensionMismatchError,
    Effect,
    EventContainsNoRegistrationError,
    ExpectationDetection,
    GeneralizedObservable,
    NotNormalizedError,
    ProbabilityRangeError,
    PureState,
    QuantumObservable,
    conditional_probability,
    detection_probability,
    effect,
    overall_probability,
    overall_probability_density,
    pv_projector,
    to_density,
    verify_pov_axioms,
)
from esrsim.model import clamp_probability
from helpers import (
    random_event,
    random_generalized,
    random_state,
    sigma_z_scenario,
)


class TestPureState:
    def test_rejects_unnormalized(self):
        with pytest.raises(NotNormalizedError):
            PureState(np.array([1.0, 1.0]))

    def test_normalized_constructor(self):
        psi = PureState.normalized([3.0, 4.0])
        np.testing.assert_allclose(psi.amplitudes, [0.6, 0.8])

    def test_amplitudes_frozen(self):
        psi = PureState(np.array([1.0, 0.0]))
        with pytest.raises(ValueError):
            psi.amplitudes[0] = 0.0


class TestToDensity:
    def test_basis_state(self):
        w = to_density(PureState(np.array([1.0, 0.0])))
        np.testing.assert_allclose(w.matrix, np.diag([1.0, 0.0]))

    def test_superposition(self):
        psi = PureState(np.array([1.0, 1.0]) / np.sqrt(2.0))
        np.testing.assert_allclose(to_density(psi).matrix,
                                   np.full((2, 2), 0.5), atol=1e-12)

    def test_trace_and_idempotency_random(self):
        rng = np.random.default_rng(21)
        for dim in (2, 3, 6):
            w = to_density(random_state(rng, dim)).matrix
            assert abs(np.trace(w).real - 1.0) < 1e-12
            np.testing.assert_allclose(w @ w, w, atol=1e-10)


class TestPvProjector:
    def test_full_spectrum_gives_identity(self):
        obs = QuantumObservable.from_matrix(np.diag([1.0, -1.0]))
        np.testing.assert_allclose(pv_projector(obs, obs.eigenvalues), np.eye(2),
                                   atol=1e-12)

    def test_empty_event_gives_zero(self):
        obs = QuantumObservable.from_matrix(np.diag([1.0, -1.0]))
        np.testing.assert_allclose(pv_projector(obs, ()), np.zeros((2, 2)))

    def test_plus_one_eigenspace(self):
        m = np.diag([1.0, -1.0])
        obs = QuantumObservable.from_matrix(m)
        p = pv_projector(obs, (1.0,))
        np.testing.assert_allclose(p @ m, 1.0 * p, atol=1e-12)
        np.testing.assert_allclose(p, np.diag([1.0, 0.0]), atol=1e-12)

    def test_stray_values_contribute_nothing(self):
        obs = QuantumObservable.from_matrix(np.diag([1.0, -1.0]))
        np.testing.assert_allclose(pv_projector(obs, (7.5, 1.0)),
                                   pv_projector(obs, (1.0,)))


class TestDetectionProbability:
    def test_constant(self):
        gobs, psi = sigma_z_scenario(0.8)
        assert detection_probability(gobs, psi) == 0.8

    def test_expectation_valued_basis_state(self):
        detection = ExpectationDetection(np.diag([0.2, 0.6]))
        gobs = GeneralizedObservable.from_matrix(np.diag([1.0, -1.0]), detection, a0=0.0)
        psi = PureState(np.array([1.0, 0.0]))
        assert abs(detection_probability(gobs, psi) - 0.2) < 1e-12

    def test_rayleigh_bounds(self):
        rng = np.random.default_rng(33)
        b = np.diag([0.2, 0.6, 0.9])
        detection = ExpectationDetection(b)
        gobs = GeneralizedObservable.from_matrix(np.diag([1.0, 2.0, 3.0]), detection, a0=0.0)
        for _ in range(25):
            p = detection_probability(gobs, random_state(rng, 3))
            assert 0.2 - 1e-12 <= p <= 0.9 + 1e-12

    def test_dimension_mismatch(self):
        gobs, _ = sigma_z_scenario()
        with pytest.raises(DimensionMismatchError):
            detection_probability(gobs, PureState(np.array([1.0, 0.0, 0.0])))

    def test_constant_validation(self):
        with pytest.raises(ValueError):
            ConstantDetection(1.5)

    def test_expectation_spectrum_validation(self):
        with pytest.raises(ValueError):
            ExpectationDetection(np.diag([0.5, 1.2]))


class TestConditionalProbability:
    def test_full_spectrum(self):
        gobs, psi = sigma_z_scenario(0.8)
        assert abs(conditional_probability(gobs, psi, (1.0, -1.0)) - 1.0) < 1e-12

    def test_born_rule_half(self):
        gobs, psi = sigma_z_scenario(0.8)
        assert abs(conditional_probability(gobs, psi, (1.0,)) - 0.5) < 1e-12

    def test_rejects_no_registration(self):
        gobs, psi = sigma_z_scenario(0.8, a0=0.0)
        with pytest.raises(EventContainsNoRegistrationError):
            conditional_probability(gobs, psi, (0.0, 1.0))

    def test_additive_over_disjoint_partitions(self):
        rng = np.random.default_rng(17)
        for _ in range(20):
            gobs = random_generalized(rng, 4)
            psi = random_state(rng, 4)
            eigs = gobs.base.eigenvalues
            labels = rng.integers(0, 2, size=eigs.size).astype(bool)
            total = (conditional_probability(gobs, psi, eigs[labels])
                     + conditional_probability(gobs, psi, eigs[~labels]))
            assert abs(total - conditional_probability(gobs, psi, eigs)) < 1e-12


class TestEffect:
    def test_full_outcome_set_is_identity(self):
        gobs, psi = sigma_z_scenario(0.8)
        np.testing.assert_allclose(effect(gobs, psi, gobs.outcomes).operator,
                                   np.eye(2), atol=1e-12)

    def test_detected_event(self):
        gobs, psi = sigma_z_scenario(0.75, a0=0.0)
        np.testing.assert_allclose(effect(gobs, psi, (1.0,)).operator,
                                   0.75 * np.diag([1.0, 0.0]), atol=1e-12)

    def test_no_registration_event(self):
        gobs, psi = sigma_z_scenario(0.75, a0=0.0)
        np.testing.assert_allclose(effect(gobs, psi, (0.0,)).operator,
                                   0.25 * np.eye(2), atol=1e-12)

    def test_mixed_event_assembly(self):
        # independent assembly: (1 - p) I + p P(event minus a0)
        gobs, psi = sigma_z_scenario(0.6, a0=0.0)
        expected = 0.4 * np.eye(2) + 0.6 * np.diag([1.0, 0.0])
        np.testing.assert_allclose(effect(gobs, psi, (0.0, 1.0)).operator,
                                   expected, atol=1e-12)

    def test_effect_bounds_random(self):
        rng = np.random.default_rng(29)
        for _ in range(30):
            gobs = random_generalized(rng, int(rng.integers(2, 6)))
            psi = random_state(rng, gobs.dim)
            t = effect(gobs, psi, random_event(rng, gobs)).operator
            eigs = np.linalg.eigvalsh(t)
            assert eigs[0] >= -1e-10 and eigs[-1] <= 1.0 + 1e-10

    def test_constructor_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            Effect(np.diag([0.5, 1.5]))


class TestOverallProbability:
    def test_detected_probability(self):
        gobs, psi = sigma_z_scenario(0.8)
        assert abs(overall_probability(gobs, psi, (1.0,)) - 0.4) < 1e-12

    def test_no_registration_probability(self):
        gobs, psi = sigma_z_scenario(0.8, a0=0.0)
        assert abs(overall_probability(gobs, psi, (0.0,)) - 0.2) < 1e-12

    def test_total_probability(self):
        gobs, psi = sigma_z_scenario(0.8)
        assert abs(overall_probability(gobs, psi, gobs.outcomes) - 1.0) < 1e-12

    def test_empty_event(self):
        gobs, psi = sigma_z_scenario(0.8)
        assert overall_probability_density(gobs, psi, ()) == 0.0

    def test_full_detection_makes_a0_impossible(self):
        gobs, psi = sigma_z_scenario(1.0, a0=0.0)
        assert overall_probability_density(gobs, psi, (0.0,)) == 0.0

    def test_vector_and_trace_forms_agree(self):
        rng = np.random.default_rng(41)
        for _ in range(200):
            dim = int(rng.integers(2, 7))
            gobs = random_generalized(rng, dim)
            psi = random_state(rng, dim)
            event = random_event(rng, gobs)
            a = overall_probability(gobs, psi, event)
            b = overall_probability_density(gobs, psi, event)
            assert abs(a - b) < 1e-12

    def test_factorization_for_detected_events(self):
        rng = np.random.default_rng(43)
        for _ in range(50):
            dim = int(rng.integers(2, 7))
            gobs = random_generalized(rng, dim)
            psi = random_state(rng, dim)
            event = random_event(rng, gobs, allow_a0=False)
            combined = overall_probability(gobs, psi, event)
            split = (detection_probability(gobs, psi)
                     * conditional_probability(gobs, psi, event))
            assert abs(combined - split) < 1e-12

    def test_monotone_in_events(self):
        rng = np.random.default_rng(47)
        for _ in range(30):
            gobs = random_generalized(rng, 4)
            psi = random_state(rng, 4)
            smaller = random_event(rng, gobs)
            larger = frozenset(smaller) | random_event(rng, gobs)
            assert (overall_probability(gobs, psi, smaller)
                    <= overall_probability(gobs, psi, larger) + 1e-12)

    def test_qm_recovery_at_full_detection(self):
        rng = np.random.default_rng(53)
        for _ in range(30):
            dim = int(rng.integers(2, 6))
            gobs = random_generalized(rng, dim, detection=ConstantDetection(1.0))
            psi = random_state(rng, dim)
            event = random_event(rng, gobs)
            detected_part = frozenset(event) - {gobs.a0}
            assert abs(overall_probability(gobs, psi, event)
                       - conditional_probability(gobs, psi, detected_part)) < 1e-12


class TestClamping:
    def test_clamps_roundoff(self):
        assert clamp_probability(1.0 + 1e-12) == 1.0
        assert clamp_probability(-1e-12) == 0.0

    def test_rejects_logic_errors(self):
        with pytest.raises(ProbabilityRangeError):
            clamp_probability(1.1)


class TestGeneralizedObservable:
    def test_default_a0_below_spectrum(self):
        gobs = GeneralizedObservable.from_matrix(np.diag([1.0, -1.0]),
                                                 ConstantDetection(0.5))
        assert gobs.a0 == -2.0
        np.testing.assert_allclose(gobs.outcomes, [-2.0, -1.0, 1.0])

    def test_rejects_a0_clash(self):
        with pytest.raises(ValueError):
            GeneralizedObservable.from_matrix(np.diag([1.0, -1.0]),
                                              ConstantDetection(0.5), a0=1.0)


class TestPovAxioms:
    def test_random_scenarios_within_tolerance(self):
        rng = np.random.default_rng(59)
        for _ in range(20):
            dim = int(rng.integers(2, 7))
            gobs = random_generalized(rng, dim, degenerate=bool(rng.integers(0, 2)))
            psi = random_state(rng, dim)
            report = verify_pov_axioms(gobs, psi, partition_trials=20)
            assert report.max_deviation <= 1e-10

    def test_projective_limit_is_exact(self):
        rng = np.random.default_rng(61)
        gobs = random_generalized(rng, 3, detection=ConstantDetection(1.0))
        psi = random_state(rng, 3)
        report = verify_pov_axioms(gobs, psi, partition_trials=20)
        assert report.max_deviation <= 1e-12

    def test_never_detect_limit(self):
        gobs, psi = sigma_z_scenario(0.0, a0=0.0)
        np.testing.assert_allclose(effect(gobs, psi, (0.0,)).operator, np.eye(2))
        np.testing.assert_allclose(effect(gobs, psi, (1.0,)).operator, np.zeros((2, 2)))
        report = verify_pov_axioms(gobs, psi, partition_trials=20)
        assert report.max_deviation <= 1e-12

    def test_partition_sums_to_one(self):
        rng = np.random.default_rng(67)
        for _ in range(20):
            gobs = random_generalized(rng, 4)
            psi = random_state(rng, 4)
            outcomes = gobs.outcomes
            labels = rng.integers(0, 3, size=outcomes.size)
            total = sum(overall_probability(gobs, psi, outcomes[labels == g])
                        for g in range(3))
            assert abs(total - 1.0) <= 1e-10

    def test_commutativity_of_effects(self):
        rng = np.random.default_rng(71)
        for _ in range(20):
            gobs = random_generalized(rng, 5)
            psi = random_state(rng, 5)
            x = effect(gobs, psi, random_event(rng, gobs)).operator
            y = effect(gobs, psi, random_event(rng, gobs)).operator
            assert np.linalg.norm(x @ y - y @ x) <= 1e-10
