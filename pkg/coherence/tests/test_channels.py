import numpy as np
from django.test import SimpleTestCase

from coherence.channels import (
    IncoherentChannel,
    apply,
    c2c_check,
    random_incoherent_channel,
    selective_outcomes,
    validate,
)
from coherence.exceptions import DimensionError, InvalidChannelError, ProbabilityError
from coherence.linalg import DensityMatrix, dephase, is_incoherent, random_density
from coherence.measures import c_h, c_l1

HADAMARD = np.array([[1, 1], [1, -1]]) / np.sqrt(2)


class ChannelTests(SimpleTestCase):
    def test_dephasing_channel(self):
        rho = random_density(3, 'mixed', seed=0)
        np.testing.assert_allclose(apply(IncoherentChannel.dephasing(3), rho).matrix, dephase(rho), atol=1e-12)

    def test_identity_channel(self):
        rho = random_density(2, 'mixed', seed=1)
        np.testing.assert_allclose(apply(IncoherentChannel.identity(2), rho).matrix, rho.matrix, atol=1e-12)

    def test_hadamard_is_not_incoherent(self):
        check = validate(IncoherentChannel((HADAMARD,)))
        self.assertTrue(check.complete)
        self.assertFalse(check.incoherent)
        with self.assertRaises(InvalidChannelError):
            apply(IncoherentChannel((HADAMARD,)), np.eye(2) / 2)

    def test_incomplete_channel(self):
        check = validate(IncoherentChannel((np.diag([1.0, 0.5]),)))
        self.assertFalse(check.complete)
        self.assertIn('completeness', check.diagnostics[0])

    def test_shape_checks(self):
        with self.assertRaises(DimensionError):
            IncoherentChannel(())
        with self.assertRaises(DimensionError):
            IncoherentChannel((np.eye(2), np.eye(3)))
        with self.assertRaises(DimensionError):
            apply(IncoherentChannel.identity(3), np.eye(2) / 2)

    def test_random_channels_are_valid(self):
        for seed in range(20):
            for amplitudes in ('complex', 'real'):
                ch = random_incoherent_channel(2 + seed % 4, seed=seed, amplitudes=amplitudes)
                check = validate(ch)
                self.assertTrue(check, msg=check.diagnostics)

    def test_selective_outcomes_average_to_the_channel(self):
        rho = random_density(3, 'mixed', seed=2)
        ch = random_incoherent_channel(3, seed=3)
        outcomes = selective_outcomes(ch, rho)
        self.assertAlmostEqual(sum(o.probability for o in outcomes), 1.0)
        average = sum(o.probability * o.state.matrix for o in outcomes)
        np.testing.assert_allclose(average, apply(ch, rho).matrix, atol=1e-12)


class MonotonicityTests(SimpleTestCase):
    def test_real_amplitude_channels_do_not_increase_the_measure(self):
        for seed in range(30):
            rho = random_density(2 + seed % 3, 'mixed', seed)
            ch = random_incoherent_channel(rho.dim, seed=seed, amplitudes='real')
            self.assertLessEqual(c_h(apply(ch, rho)), c_h(rho) + 1e-9)
            outcomes = selective_outcomes(ch, rho)
            self.assertLessEqual(sum(o.probability * c_h(o.state) for o in outcomes), c_h(rho) + 1e-9)

    def test_complex_phase_can_increase_the_measure(self):
        plus = DensityMatrix.from_vector([1, 1])
        rotated = apply(IncoherentChannel.diagonal_unitary([0, np.pi / 4]), plus)
        self.assertAlmostEqual(c_h(rotated), np.sqrt(2))

    def test_flagged_ensemble_of_a_selective_operation(self):
        rho = random_density(3, 'mixed', seed=4)
        outcomes = selective_outcomes(random_incoherent_channel(3, seed=5, amplitudes='real'), rho)
        check = c2c_check([(o.probability, o.state) for o in outcomes], reference=rho)
        self.assertTrue(check.holds)
        self.assertAlmostEqual(check.rhs, sum(o.probability * c_h(o.state) for o in outcomes))

    def test_probabilities_must_sum_to_one(self):
        with self.assertRaises(ProbabilityError):
            c2c_check([(0.5, np.eye(2) / 2), (0.6, np.eye(2) / 2)])

    def test_incoherent_states_stay_incoherent(self):
        rng = np.random.default_rng(6)
        for seed in range(20):
            d = 2 + seed % 4
            delta = np.diag(rng.dirichlet(np.ones(d)))
            for amplitudes in ('complex', 'real'):
                out = apply(random_incoherent_channel(d, seed=seed, amplitudes=amplitudes), delta)
                self.assertTrue(is_incoherent(out, tol=1e-12))

    def test_l1_measure_passes_the_same_sweeps(self):
        for seed in range(20):
            rho = random_density(2 + seed % 3, 'mixed', seed)
            ch = random_incoherent_channel(rho.dim, seed=seed, amplitudes='real')
            self.assertLessEqual(c_l1(apply(ch, rho)), c_l1(rho) + 1e-9)
            outcomes = selective_outcomes(ch, rho)
            check = c2c_check([(o.probability, o.state) for o in outcomes], reference=rho, measure=c_l1)
            self.assertTrue(check.holds)
            self.assertAlmostEqual(check.rhs, sum(o.probability * c_l1(o.state) for o in outcomes))
