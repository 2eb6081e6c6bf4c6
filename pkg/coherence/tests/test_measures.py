import numpy as np
from django.test import SimpleTestCase

from coherence.exceptions import (
    DimensionError,
    IncoherentInputError,
    InvalidBoundWitnessError,
    NonConvergenceError,
)
from coherence.linalg import DensityMatrix, random_density
from coherence.measures import c_h, c_l1, ratio_check, roc, roc_lower_bound, verify_theorem4
from coherence.tomography import PAULI
from coherence.witness import construct_witness

PLUS = DensityMatrix.from_vector([1, 1])
TILTED = np.array([[0.5, (1 + 1j) / 4], [(1 - 1j) / 4, 0.5]])


def _grid_robustness(rho, step=1e-3, span=1.5):
    """min sum(d) - 1 over diag(d) >= rho on a grid of (d0, d1), d2 fixed by the Schur complement."""
    m = rho.matrix
    a, e = np.meshgrid(np.arange(step, span, step), np.arange(step, span, step), indexing='ij')
    b, c0, c1 = -m[0, 1], -m[0, 2], -m[1, 2]
    det = a * e - abs(b) ** 2
    with np.errstate(divide='ignore', invalid='ignore'):
        schur = (e * abs(c0) ** 2 + a * abs(c1) ** 2 - 2 * np.real(np.conj(c0) * b * c1)) / det
    return float(np.min(np.where(det > 0, a + e + schur, np.inf)))


class MeasureTests(SimpleTestCase):
    def test_plus_state(self):
        self.assertAlmostEqual(c_h(PLUS), 1.0)
        self.assertAlmostEqual(c_l1(PLUS), 1.0)

    def test_complex_entry(self):
        self.assertAlmostEqual(c_h(TILTED), 1.0)
        self.assertAlmostEqual(c_l1(TILTED), np.sqrt(2) / 2)

    def test_incoherent_state_is_zero(self):
        self.assertEqual(c_h(np.diag([0.2, 0.3, 0.5])), 0.0)
        self.assertEqual(c_l1(np.diag([0.2, 0.3, 0.5])), 0.0)

    def test_ratio_chain_on_random_states(self):
        for seed in range(30):
            check = ratio_check(random_density(2 + seed % 6, 'mixed', seed))
            self.assertTrue(check, msg=f'seed {seed}: {check}')

    def test_real_states_saturate_the_upper_bound(self):
        rng = np.random.default_rng(0)
        g = rng.standard_normal((4, 4))
        rho = g @ g.T / np.trace(g @ g.T)
        self.assertAlmostEqual(c_h(rho), c_l1(rho), delta=1e-12)


class RobustnessTests(SimpleTestCase):
    def test_plus_state(self):
        self.assertAlmostEqual(roc(PLUS).value, 1.0, delta=1e-6)

    def test_qubits_match_closed_form(self):
        for seed in range(25):
            rho = random_density(2, 'mixed', seed)
            self.assertAlmostEqual(roc(rho).value, 2 * abs(rho.matrix[0, 1]), delta=1e-6)

    def test_pure_states_match_l1(self):
        for seed in range(5):
            rho = random_density(3, 'pure', seed)
            self.assertAlmostEqual(roc(rho).value, c_l1(rho), delta=1e-6)

    def test_incoherent_state(self):
        solution = roc(np.diag([0.6, 0.4]))
        self.assertEqual(solution.value, 0.0)
        self.assertIsNone(solution.tau)
        self.assertIsNone(solution.dual_witness)

    def test_certificates_in_three_dimensions(self):
        for seed in range(10):
            rho = random_density(3, 'mixed', seed)
            solution = roc(rho)
            self.assertGreaterEqual(solution.primal_gap, -1e-9)
            self.assertLessEqual(solution.dual_gap, 1e-4)
            self.assertTrue(solution.dual_witness.optimal)
            self.assertLessEqual(solution.lower_bound, solution.value + 1e-9)
            self.assertAlmostEqual(float(np.trace(solution.tau.matrix).real), 1.0)

    def test_matches_grid_over_diagonal_covers(self):
        for seed in range(3):
            rho = random_density(3, 'mixed', seed)
            value = roc(rho).value
            grid = _grid_robustness(rho)
            self.assertLessEqual(value, grid + 1e-6)
            self.assertLessEqual(grid - value, 1e-4)

    def test_dual_witness_saturates_the_bound(self):
        self.assertAlmostEqual(roc_lower_bound(PLUS, roc(PLUS).dual_witness), 1.0, delta=1e-6)
        for seed in range(5):
            rho = random_density(3, 'mixed', seed)
            solution = roc(rho)
            self.assertAlmostEqual(roc_lower_bound(rho, solution.dual_witness), solution.value, delta=1e-4)

    def test_witness_bounds_stay_below_robustness(self):
        rho = random_density(3, 'mixed', seed=11)
        w = construct_witness(rho).matrix
        w = w / np.linalg.eigvalsh(w)[-1]
        self.assertLessEqual(roc_lower_bound(rho, w), roc(rho).value + 1e-9)
        self.assertEqual(roc_lower_bound(np.diag([0.5, 0.5]), PAULI['x']), 0.0)

    def test_bound_witness_constraints(self):
        with self.assertRaises(InvalidBoundWitnessError):
            roc_lower_bound(PLUS, 2 * PAULI['x'])
        with self.assertRaises(InvalidBoundWitnessError):
            roc_lower_bound(PLUS, np.diag([-0.5, 0.5]))

    def test_dimension_cap(self):
        with self.assertRaises(DimensionError):
            roc(np.eye(33) / 33)

    def test_cut_budget(self):
        with self.assertRaises(NonConvergenceError) as ctx:
            roc(random_density(4, 'mixed', seed=1), max_cuts=4)
        self.assertIsNotNone(ctx.exception.lower)
        self.assertGreaterEqual(ctx.exception.upper, ctx.exception.lower)


class RobustnessSplitTests(SimpleTestCase):
    def test_residual_is_small(self):
        for seed in range(10):
            check = verify_theorem4(random_density(2 + seed % 3, 'mixed', seed))
            self.assertLessEqual(check.residual, 1e-6)

    def test_tau_bound_is_reported_not_enforced(self):
        check = verify_theorem4(TILTED)
        self.assertAlmostEqual(check.c_h_tau, np.sqrt(2), delta=1e-6)
        self.assertFalse(check.tau_bound_holds)

    def test_incoherent_input(self):
        with self.assertRaises(IncoherentInputError):
            verify_theorem4(np.diag([0.5, 0.5]))
