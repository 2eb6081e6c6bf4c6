import numpy as np
from django.test import SimpleTestCase

from coherence.exceptions import DimensionError, StatisticsError
from coherence.linalg import DensityMatrix, random_density, trace_distance
from coherence.tomography import (
    POLARIZATION,
    StokesRecord,
    coherence_decision,
    expand,
    measure_all,
    measure_generator,
    reconstruct,
    records_table,
    stokes_decision,
    stokes_means,
    stokes_reconstruct,
    stokes_simulate,
    su_basis,
    z_threshold,
)

PLUS = DensityMatrix.from_vector([1, 1])


class BasisTests(SimpleTestCase):
    def test_size_and_order(self):
        basis = su_basis(3)
        self.assertEqual(len(basis), 8)
        self.assertEqual([g.label for g in basis.offdiag[:2]], [(0, 1, 'R'), (0, 1, 'I')])
        self.assertEqual([g.label for g in basis.diag], [('D', 1), ('D', 2)])
        self.assertEqual(basis.index_of((1, 2, 'I')), 5)

    def test_orthonormal_and_traceless(self):
        basis = su_basis(4)
        stack = np.array([g.operator.matrix for g in basis.generators])
        gram = np.einsum('aij,bji->ab', stack, stack).real
        np.testing.assert_allclose(gram, np.eye(len(basis)) / 2, atol=1e-12)
        np.testing.assert_allclose(np.trace(stack, axis1=1, axis2=2), 0, atol=1e-12)

    def test_expansion_reads_entries(self):
        rho = random_density(3, 'mixed', seed=0)
        r = expand(rho, su_basis(3))
        self.assertAlmostEqual(r[0], rho.matrix[0, 1].real)
        self.assertAlmostEqual(r[1], rho.matrix[0, 1].imag)

    def test_dimension_limits(self):
        with self.assertRaises(DimensionError):
            su_basis(1)
        with self.assertRaises(DimensionError):
            su_basis(33)


class QuditTomographyTests(SimpleTestCase):
    def test_expectation_mode_is_exact(self):
        for d in (2, 3, 4, 8):
            rho = random_density(d, 'mixed', seed=d)
            basis = su_basis(d)
            estimate = reconstruct(d, measure_all(rho, basis, 1, expectation=True), basis)
            self.assertLess(np.linalg.norm(estimate.state.matrix - rho.matrix), 1e-10)
            self.assertFalse(estimate.projected)

    def test_sampled_reconstruction(self):
        rho = random_density(3, 'mixed', seed=1)
        basis = su_basis(3)
        estimate = reconstruct(3, measure_all(rho, basis, 200_000, seed=2), basis)
        self.assertLess(trace_distance(estimate.state, rho), 0.02)

    def test_same_seed_same_records(self):
        basis = su_basis(2)
        a = measure_all(PLUS, basis, 100, seed=3)
        b = measure_all(PLUS, basis, 100, seed=3)
        self.assertEqual([r.counts for r in a], [r.counts for r in b])

    def test_missing_records(self):
        basis = su_basis(2)
        with self.assertRaises(DimensionError):
            reconstruct(2, measure_all(PLUS, basis, 10)[:2], basis)

    def test_stderr_is_positive_for_a_deterministic_outcome(self):
        record = measure_generator(np.diag([1.0, 0.0]), su_basis(2), 2, 50, seed=0)
        self.assertEqual(record.estimate, 0.5)
        self.assertGreater(record.stderr, 0)

    def test_stderr_shrinks_as_inverse_root_of_shots(self):
        rho = random_density(3, 'mixed', seed=5)
        basis = su_basis(3)
        errors = [measure_generator(rho, basis, 1, shots, seed=6).stderr for shots in (1_000, 10_000, 100_000)]
        for coarse, fine in zip(errors, errors[1:]):
            self.assertTrue(np.sqrt(10) / 3 <= coarse / fine <= 3 * np.sqrt(10), msg=errors)

    def test_decision(self):
        basis = su_basis(3)
        diagonal = measure_all(np.diag([0.5, 0.3, 0.2]), basis, 1, expectation=True)
        self.assertFalse(coherence_decision(diagonal).coherent)
        coherent = coherence_decision(measure_all(PLUS, su_basis(2), 10_000, seed=4))
        self.assertTrue(coherent.coherent)
        self.assertEqual(coherent.witness_label, (0, 1, 'R'))

    def test_threshold(self):
        self.assertAlmostEqual(z_threshold(0.05, 1), 1.959963984540054)
        self.assertGreater(z_threshold(0.05, 10), z_threshold(0.05, 1))
        with self.assertRaises(ValueError):
            z_threshold(1.5, 1)

    def test_records_table(self):
        header, rows = records_table(measure_all(PLUS, su_basis(2), 1, expectation=True))
        self.assertEqual(header, ['index', 'label', 'estimate', 'stderr'])
        self.assertEqual(rows[0][:2], [0, '0:1:R'])
        self.assertEqual(rows[2][1], 'D:1')
        self.assertAlmostEqual(rows[0][2], 0.5)


class StokesTests(SimpleTestCase):
    def test_horizontal_light_is_plus(self):
        np.testing.assert_allclose(np.outer(POLARIZATION['H'], POLARIZATION['H'].conj()), PLUS.matrix)
        n0, n1, n2, n3 = stokes_means(PLUS)
        self.assertAlmostEqual(n0, 0.5)
        self.assertAlmostEqual(n1, 1.0)
        self.assertAlmostEqual(n2, 0.5)
        self.assertAlmostEqual(n3, 0.5)

    def test_expectation_round_trip(self):
        for seed in range(5):
            rho = random_density(2, 'mixed', seed)
            estimate = stokes_reconstruct(stokes_simulate(rho, 1.0, expectation=True))
            self.assertLess(trace_distance(estimate.state, rho), 1e-10)

    def test_sampled_round_trip(self):
        rho = random_density(2, 'mixed', seed=8)
        record = stokes_simulate(rho, 1_000_000, seed=9)
        self.assertLess(trace_distance(stokes_reconstruct(record).state, rho), 0.01)

    def test_decision(self):
        self.assertTrue(stokes_decision(stokes_simulate(PLUS, 1.0, expectation=True)).coherent)
        self.assertFalse(stokes_decision(stokes_simulate(np.eye(2) / 2, 1.0, expectation=True)).coherent)

    def test_qubits_only(self):
        with self.assertRaises(DimensionError):
            stokes_simulate(np.eye(3) / 3, 100)

    def test_empty_reference_intensity(self):
        with self.assertRaises(StatisticsError):
            stokes_reconstruct(StokesRecord(0, 1, 1, 1, N=1))

    def test_stokes_matches_generator_reconstruction(self):
        basis = su_basis(2)
        for seed in range(5):
            rho = random_density(2, 'mixed', seed)
            stokes = stokes_reconstruct(stokes_simulate(rho, 1.0, expectation=True))
            generators = reconstruct(2, measure_all(rho, basis, 1, expectation=True), basis)
            np.testing.assert_allclose(stokes.state.matrix, generators.state.matrix, atol=1e-10)

    def test_frobenius_error_scales_with_photon_number(self):
        rho = DensityMatrix(np.array([[0.5, 0.1], [0.1, 0.5]]))
        N = 1_000_000
        errors = [np.linalg.norm(stokes_reconstruct(stokes_simulate(rho, N, seed=s)).raw.matrix - rho.matrix)
                  for s in range(200)]
        self.assertTrue(0.3 <= np.median(errors) * np.sqrt(N) <= 3, msg=np.median(errors))

    def test_negative_counts_are_rejected(self):
        with self.assertRaises(StatisticsError):
            StokesRecord(10, -1, 5, 5, N=20)
        with self.assertRaises(StatisticsError):
            StokesRecord(10, 5, 5, float('nan'), N=20)
        with self.assertRaises(StatisticsError):
            StokesRecord(10, 5.5, 5, 5, N=20)
        with self.assertRaises(StatisticsError):
            StokesRecord(10, 5, 5, 5, N=0)
        self.assertEqual(StokesRecord(0.5, 0.25, 0.5, 0.5, N=1, expectation=True).n1, 0.25)


class DecisionStatisticsTests(SimpleTestCase):
    def test_power_on_the_plus_state(self):
        basis = su_basis(2)
        hits = 0
        for s in range(1000):
            decision = coherence_decision(measure_all(PLUS, basis, 10_000, seed=s), alpha=1e-3)
            hits += decision.coherent and decision.witness_label == (0, 1, 'R')
        self.assertGreaterEqual(hits, 990)

    def test_false_positive_rate_on_the_maximally_mixed_state(self):
        basis = su_basis(2)
        mixed = np.eye(2) / 2
        alarms = sum(coherence_decision(measure_all(mixed, basis, 10_000, seed=s), alpha=1e-3).coherent
                     for s in range(10_000))
        self.assertLessEqual(alarms, 2 * 1e-3 * 10_000)
