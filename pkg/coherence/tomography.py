"""Simulated tomography: SU(d) generator basis, Stokes protocol, generator counts.

Normalization. Generators satisfy tr(lambda_a lambda_b) = delta_ab / 2, so a state
reconstructs as

    rho = I/d + sum_j 2 r_j lambda_j,   r_j = tr(rho lambda_j).

The off-diagonal generators are the witnesses W^R_lm, W^I_lm; the diagonal family is
D_k = (sum_{l<k} |l><l| - k |k><k|) / sqrt(2 k (k + 1)), k = 1 .. d-1.

Qubit reference basis. The four-intensity protocol reads consistently with the
Stokes inversion only when the reference basis is the circular one, |0> = |R>,
|1> = |L>. The other polarizations follow from |H> = (|R> + |L>)/sqrt(2) and
|D> = (|H> - |V>)/sqrt(2), which is (|R> + i|L>)/sqrt(2) up to a global phase.
Then S1/S0 = <sigma_x>, S2/S0 = <sigma_y>, S3/S0 = <sigma_z>.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.stats import norm

from .exceptions import DimensionError, InvalidStateError, StatisticsError
from .linalg import DEFAULT_TOL, DensityMatrix, HermitianOperator, SeedLike, as_density, project_to_density
from .witness import generator_matrix, offdiagonal_pairs

logger = logging.getLogger(__name__)

BASIS_MAX_DIM = 32

_R = np.array([1, 0], dtype=np.complex128)
_L = np.array([0, 1], dtype=np.complex128)
_H = (_R + _L) / np.sqrt(2)
_V = 1j * (_R - _L) / np.sqrt(2)
POLARIZATION = {
    'R': _R,
    'L': _L,
    'H': _H,
    'V': _V,
    'D': (_H - _V) / np.sqrt(2),
    'A': (_H + _V) / np.sqrt(2),
}

PAULI = {
    'x': np.array([[0, 1], [1, 0]], dtype=np.complex128),
    'y': np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    'z': np.array([[1, 0], [0, -1]], dtype=np.complex128),
}


@dataclass(frozen=True, eq=False)
class Generator:
    index: int
    label: tuple
    operator: HermitianOperator

    @property
    def offdiagonal(self) -> bool:
        return self.label[0] != 'D'


@dataclass(frozen=True, eq=False)
class GeneratorBasis:
    """The d^2 - 1 generators: off-diagonal pairs first (R before I), then D_1 .. D_{d-1}.

    Labels are (l, m, 'R'|'I') for off-diagonal generators and ('D', k) for the
    diagonal family; `index_map` maps labels to flat indices.
    """
    dim: int
    generators: tuple
    index_map: dict

    @property
    def offdiag(self) -> tuple:
        return tuple(g for g in self.generators if g.offdiagonal)

    @property
    def diag(self) -> tuple:
        return tuple(g for g in self.generators if not g.offdiagonal)

    def __len__(self):
        return len(self.generators)

    def __getitem__(self, index) -> Generator:
        return self.generators[index]

    def index_of(self, label) -> int:
        return self.index_map[tuple(label)]


def _diagonal_generator(d: int, k: int) -> np.ndarray:
    entries = np.zeros(d)
    entries[:k] = 1
    entries[k] = -k
    return np.diag(entries / np.sqrt(2 * k * (k + 1))).astype(np.complex128)


def su_basis(d: int) -> GeneratorBasis:
    if not 2 <= d <= BASIS_MAX_DIM:
        raise DimensionError(f'generator basis needs 2 <= d <= {BASIS_MAX_DIM}, got {d}')
    labels = [*offdiagonal_pairs(d), *(('D', k) for k in range(1, d))]
    generators = []
    for index, label in enumerate(labels):
        matrix = _diagonal_generator(d, label[1]) if label[0] == 'D' else generator_matrix(d, *label)
        generators.append(Generator(index, label, HermitianOperator(matrix)))
    return GeneratorBasis(d, tuple(generators), {label: i for i, label in enumerate(labels)})


def expand(rho, basis: GeneratorBasis) -> np.ndarray:
    """Coefficients r_j = tr(rho lambda_j)."""
    m = np.asarray(getattr(rho, 'matrix', rho), dtype=np.complex128)
    stack = np.array([g.operator.matrix for g in basis.generators])
    return np.einsum('jab,ba->j', stack, m).real


@dataclass(frozen=True)
class TomographyEstimate:
    raw: HermitianOperator
    state: DensityMatrix
    projected: bool


def _estimate(raw: np.ndarray, tol: float) -> TomographyEstimate:
    raw_op = HermitianOperator(raw, tol=tol)
    try:
        return TomographyEstimate(raw_op, DensityMatrix(raw_op.matrix, tol=tol), False)
    except InvalidStateError:
        logger.debug('linear inversion left the state space; projecting')
        return TomographyEstimate(raw_op, project_to_density(raw_op.matrix, tol), True)


# Stokes protocol

@dataclass(frozen=True)
class StokesRecord:
    """Photon counts of the four intensity measurements.

    Counts are integers for sampled records and Born means for expectation-mode
    records.
    """
    n0: float
    n1: float
    n2: float
    n3: float
    N: float
    expectation: bool = False

    def __post_init__(self):
        counts = np.array([self.n0, self.n1, self.n2, self.n3], dtype=float)
        if not np.all(np.isfinite(counts)) or np.any(counts < 0):
            raise StatisticsError(f'photon counts must be nonnegative, got {counts.tolist()}')
        if not self.expectation and np.any(counts != np.round(counts)):
            raise StatisticsError(f'sampled photon counts must be integers, got {counts.tolist()}')
        if not self.N > 0:
            raise StatisticsError(f'N must be positive, got {self.N!r}')

    @property
    def stokes(self) -> tuple[float, float, float, float]:
        return 2 * self.n0, 2 * (self.n1 - self.n0), 2 * (self.n2 - self.n0), 2 * (self.n3 - self.n0)


def _projector_mean(rho: np.ndarray, name: str) -> float:
    v = POLARIZATION[name]
    return float(np.vdot(v, rho @ v).real)


def stokes_means(rho) -> tuple[float, float, float, float]:
    """Expected counts per unit N: n0 = 1/2, n1 = <H|rho|H>, n2 = <D|rho|D>, n3 = <R|rho|R>."""
    rho = as_density(rho)
    if rho.dim != 2:
        raise DimensionError(f'the Stokes protocol needs a qubit, got d = {rho.dim}')
    m = rho.matrix
    return 0.5 * float(np.trace(m).real), _projector_mean(m, 'H'), _projector_mean(m, 'D'), _projector_mean(m, 'R')


def stokes_simulate(rho, N: float, seed: SeedLike = 0, expectation: bool = False) -> StokesRecord:
    """Poisson photon counts with the protocol's means; exact means when `expectation`."""
    if N <= 0:
        raise ValueError('N must be positive')
    means = np.clip(np.array(stokes_means(rho)) * N, 0, None)
    if expectation:
        return StokesRecord(*means.tolist(), N=N, expectation=True)
    counts = np.random.default_rng(seed).poisson(means)
    return StokesRecord(*(int(c) for c in counts), N=N)


def stokes_reconstruct(rec: StokesRecord, tol: float = DEFAULT_TOL) -> TomographyEstimate:
    """rho = (1/2) sum_k (S_k / S_0) sigma_k, projected into the state space if needed."""
    if rec.n0 <= 0:
        raise StatisticsError('n0 = 0: the Stokes parameters cannot be normalized')
    s0, s1, s2, s3 = rec.stokes
    raw = 0.5 * (np.eye(2) + (s1 * PAULI['x'] + s2 * PAULI['y'] + s3 * PAULI['z']) / s0)
    return _estimate(raw, tol)


# Generator protocol

@dataclass(frozen=True)
class CountRecord:
    """Outcome histogram of one projective generator measurement.

    `estimate` is the empirical mean eigenvalue. `stderr` uses the outcome
    histogram with one pseudo-count per distinct eigenvalue, which keeps it
    positive even when every shot lands on the same outcome. Expectation-mode
    records carry the exact mean and stderr 0.
    """
    index: int
    label: tuple
    shots: int
    eigenvalues: tuple
    counts: tuple
    estimate: float
    stderr: float
    expectation: bool = False

    @property
    def offdiagonal(self) -> bool:
        return self.label[0] != 'D'


def _outcomes(operator: HermitianOperator, rho: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Distinct eigenvalues of the generator and their Born probabilities."""
    w, v = np.linalg.eigh(operator.matrix)
    probs = np.einsum('ak,ab,bk->k', v.conj(), rho, v).real
    levels, inverse = np.unique(np.round(w, 12), return_inverse=True)
    grouped = np.zeros(len(levels))
    np.add.at(grouped, inverse, probs)
    grouped = np.clip(grouped, 0, None)
    return levels, grouped / grouped.sum()


def measure_generator(rho, basis: GeneratorBasis, j: int, shots: int, seed: SeedLike = 0,
                      expectation: bool = False) -> CountRecord:
    rho = as_density(rho)
    if not 0 <= j < len(basis):
        raise DimensionError(f'generator index {j} out of range for d = {basis.dim}')
    if rho.dim != basis.dim:
        raise DimensionError(f'basis is for d = {basis.dim}, state has d = {rho.dim}')
    if shots < 1:
        raise ValueError('shots must be at least 1')
    generator = basis[j]
    levels, probs = _outcomes(generator.operator, rho.matrix)
    if expectation:
        exact = float(np.einsum('ab,ba->', generator.operator.matrix, rho.matrix).real)
        return CountRecord(j, generator.label, shots, tuple(levels), tuple(probs * shots), exact, 0.0, True)
    counts = np.random.default_rng(seed).multinomial(shots, probs)
    estimate = float(counts @ levels / shots)
    smoothed = (counts + 1) / (shots + len(levels))
    spread = float(smoothed @ (levels - smoothed @ levels) ** 2)
    return CountRecord(j, generator.label, shots, tuple(levels), tuple(int(c) for c in counts),
                       estimate, float(np.sqrt(spread / shots)))


def measure_all(rho, basis: GeneratorBasis, shots: int, seed: SeedLike = 0,
                expectation: bool = False) -> list[CountRecord]:
    seeds = np.random.default_rng(seed).integers(0, 2**63 - 1, size=len(basis))
    return [measure_generator(rho, basis, j, shots, int(seeds[j]), expectation) for j in range(len(basis))]


def reconstruct(d: int, records: Sequence[CountRecord], basis: GeneratorBasis,
                tol: float = DEFAULT_TOL) -> TomographyEstimate:
    """rho = I/d + sum_j 2 r_j lambda_j from one record per generator."""
    if basis.dim != d:
        raise DimensionError(f'basis is for d = {basis.dim}, asked for d = {d}')
    by_index = {r.index: r for r in records}
    missing = sorted(set(range(len(basis))) - set(by_index))
    if missing:
        raise DimensionError(f'missing records for generators {missing}')
    raw = np.eye(d, dtype=np.complex128) / d
    for g in basis.generators:
        raw += 2 * by_index[g.index].estimate * g.operator.matrix
    return _estimate(raw, tol)


@dataclass(frozen=True)
class CoherenceDecision:
    coherent: bool
    witness_index: int | None
    witness_label: tuple | None
    threshold: float
    z_scores: dict = field(default_factory=dict)


def z_threshold(alpha: float, tests: int) -> float:
    """Two-sided normal quantile with Bonferroni correction over `tests`."""
    if not 0 < alpha < 1:
        raise ValueError('alpha must lie in (0, 1)')
    return float(norm.ppf(1 - alpha / (2 * max(tests, 1))))


def z_score(record: CountRecord, tol: float = DEFAULT_TOL) -> float:
    if record.expectation:
        return float('inf') if abs(record.estimate) > tol else 0.0
    if record.stderr <= 0:
        raise StatisticsError(f'record {record.index} has zero standard error in sampled mode')
    return abs(record.estimate) / record.stderr


def coherence_decision(records: Sequence[CountRecord], alpha: float = 1e-3,
                       tol: float = DEFAULT_TOL) -> CoherenceDecision:
    """Coherent iff some off-diagonal generator mean is significantly nonzero.

    Diagonal-family records are ignored: they carry no information on coherence.
    """
    tested = [r for r in records if r.offdiagonal]
    threshold = z_threshold(alpha, len(tested))
    scores = {r.index: z_score(r, tol) for r in tested}
    significant = [r for r in tested if scores[r.index] > threshold]
    if not significant:
        return CoherenceDecision(False, None, None, threshold, scores)
    best = max(significant, key=lambda r: scores[r.index])
    return CoherenceDecision(True, best.index, best.label, threshold, scores)


def stokes_decision(rec: StokesRecord, alpha: float = 1e-3, tol: float = DEFAULT_TOL) -> CoherenceDecision:
    """Coherence verdict from the S1 and S2 intensities.

    S1/S0 = n1/n0 - 1 = 2 Re rho_01 and S2/S0 = n2/n0 - 1 = -2 Im rho_01. The
    Poisson delta-method variance uses one pseudo-count per intensity, as in
    `CountRecord`.
    """
    if rec.n0 <= 0:
        raise StatisticsError('n0 = 0: the Stokes parameters cannot be normalized')
    threshold = z_threshold(alpha, 2)
    scores = {}
    for index, n in enumerate((rec.n1, rec.n2)):
        ratio = n / rec.n0 - 1
        if rec.expectation:
            scores[index] = float('inf') if abs(ratio) > tol else 0.0
        else:
            spread = (n + 1) / rec.n0 ** 2 + (n + 1) ** 2 / rec.n0 ** 3
            scores[index] = abs(ratio) / np.sqrt(spread)
    labels = {0: (0, 1, 'R'), 1: (0, 1, 'I')}
    significant = [j for j, z in scores.items() if z > threshold]
    if not significant:
        return CoherenceDecision(False, None, None, threshold, scores)
    best = max(significant, key=scores.get)
    return CoherenceDecision(True, best, labels[best], threshold, scores)


def records_table(records: Sequence[CountRecord]) -> tuple[list[str], list[list]]:
    """Header and one row per record, labels joined with ':'."""
    rows = [[r.index, ':'.join(str(x) for x in r.label), r.estimate, r.stderr] for r in records]
    return ['index', 'label', 'estimate', 'stderr'], rows
