"""Dense complex matrix substrate shared by every other module.

Matrices are plain ``complex128`` numpy arrays. ``HermitianOperator`` and
``DensityMatrix`` wrap one with its tolerance and check their invariants once,
at construction; the stored array is read-only afterwards.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Literal, Union

import numpy as np
import scipy.linalg

from .exceptions import DimensionError, InvalidStateError, NonHermitianError

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-9
MAX_DIM = 64

SeedLike = Union[int, np.random.Generator, None]
StateKind = Literal['pure', 'mixed']


def as_matrix(a) -> np.ndarray:
    """Copy `a` (array, nested list or operator) into a square complex128 array."""
    m = np.array(getattr(a, 'matrix', a), dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise DimensionError(f'expected a square matrix, got shape {m.shape}')
    if m.shape[0] > MAX_DIM:
        raise DimensionError(f'dimension {m.shape[0]} exceeds the cap of {MAX_DIM}')
    return m


def hermiticity_error(m: np.ndarray) -> float:
    return float(np.max(np.abs(m - m.conj().T)))


def _check_same_dim(a: np.ndarray, b: np.ndarray):
    if a.shape != b.shape:
        raise DimensionError(f'dimension mismatch: {a.shape[0]} vs {b.shape[0]}')


@dataclass(frozen=True, eq=False)
class HermitianOperator:
    matrix: np.ndarray
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        if self.tol < 0:
            raise ValueError('tol must be nonnegative')
        m = as_matrix(self.matrix)
        skew = hermiticity_error(m)
        if skew > self.tol:
            raise NonHermitianError(f'matrix is not Hermitian (max |A - A^dag| = {skew:.3e})')
        # Exact for Hermitian input; removes rounding skew otherwise.
        m = (m + m.conj().T) / 2
        m.setflags(write=False)
        object.__setattr__(self, 'matrix', m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def diagonal(self) -> np.ndarray:
        return self.matrix.diagonal().real.copy()

    def __repr__(self):
        return f'{type(self).__name__}(dim={self.dim}, tol={self.tol:g})'


@dataclass(frozen=True, eq=False, repr=False)
class DensityMatrix(HermitianOperator):
    """Hermitian, positive semidefinite, unit trace, all within `tol`."""

    def __post_init__(self):
        try:
            super().__post_init__()
        except NonHermitianError as exc:
            raise InvalidStateError(str(exc)) from exc
        trace = float(np.trace(self.matrix).real)
        if abs(trace - 1) > self.tol:
            raise InvalidStateError(f'trace is {trace!r}, expected 1')
        lowest = float(np.linalg.eigvalsh(self.matrix)[0])
        if lowest < -self.tol:
            raise InvalidStateError(f'matrix is not positive semidefinite (lambda_min = {lowest:.3e})')

    @classmethod
    def from_vector(cls, psi, tol: float = DEFAULT_TOL) -> 'DensityMatrix':
        v = np.asarray(psi, dtype=np.complex128).ravel()
        norm = np.linalg.norm(v)
        if norm == 0:
            raise InvalidStateError('zero vector has no state')
        v = v / norm
        return cls(np.outer(v, v.conj()), tol=tol)

    @property
    def is_coherent(self) -> bool:
        return not is_incoherent(self.matrix, self.tol)


def as_density(rho, tol: float = DEFAULT_TOL) -> DensityMatrix:
    if isinstance(rho, DensityMatrix):
        return rho
    return DensityMatrix(as_matrix(rho), tol=getattr(rho, 'tol', tol))


def as_hermitian(a, tol: float = DEFAULT_TOL) -> HermitianOperator:
    if isinstance(a, HermitianOperator):
        return a
    return HermitianOperator(as_matrix(a), tol=tol)


def dephase(a) -> np.ndarray:
    """Delta(A): keep the diagonal, zero everything else."""
    m = as_matrix(a)
    return np.diag(np.diag(m))


def off_diagonal(a) -> np.ndarray:
    m = as_matrix(a)
    np.fill_diagonal(m, 0)
    return m


def max_offdiagonal(a) -> float:
    return float(np.max(np.abs(off_diagonal(a))))


def is_incoherent(a, tol: float = DEFAULT_TOL) -> bool:
    return max_offdiagonal(a) <= tol


def trace_product(a, b, tol: float = DEFAULT_TOL) -> float:
    """tr(AB) for Hermitian A, B; the imaginary residue must stay within `tol`."""
    ma, mb = as_matrix(a), as_matrix(b)
    _check_same_dim(ma, mb)
    raw = np.einsum('ij,ji->', ma, mb)
    if abs(raw.imag) > tol:
        raise NonHermitianError(f'tr(AB) has imaginary part {raw.imag:.3e}; inputs are not Hermitian')
    return float(raw.real)


def _hermitian_array(a, tol: float) -> np.ndarray:
    return as_hermitian(a, tol).matrix


def min_eigenpair(a, tol: float = DEFAULT_TOL) -> tuple[float, np.ndarray]:
    """Lowest eigenvalue of a Hermitian matrix and a unit eigenvector for it."""
    m = _hermitian_array(a, tol)
    w, v = scipy.linalg.eigh(m, subset_by_index=[0, 0])
    return float(w[0]), v[:, 0]


def min_eigenvalue(a, tol: float = DEFAULT_TOL) -> float:
    return min_eigenpair(a, tol)[0]


def max_eigenvalue(a, tol: float = DEFAULT_TOL) -> float:
    m = _hermitian_array(a, tol)
    return float(scipy.linalg.eigvalsh(m, subset_by_index=[m.shape[0] - 1, m.shape[0] - 1])[0])


def h_norm(a) -> float:
    """Holographic pseudo-norm: sum of |Re a_lm| plus sum of |Im a_lm| over all entries.

    Triangle inequality and submultiplicativity hold. Homogeneity holds only for
    real or purely imaginary scalars: ||(1+i)A||_h can reach 2||A||_h, not
    sqrt(2)||A||_h.
    """
    m = as_matrix(a)
    return float(np.abs(m.real).sum() + np.abs(m.imag).sum())


def trace_distance(a, b) -> float:
    ma, mb = as_matrix(a), as_matrix(b)
    _check_same_dim(ma, mb)
    diff = ma - mb
    diff = (diff + diff.conj().T) / 2
    return float(0.5 * np.abs(np.linalg.eigvalsh(diff)).sum())


def project_to_density(a, tol: float = DEFAULT_TOL) -> DensityMatrix:
    """Nearest-cone fix-up: clip negative eigenvalues, renormalize the trace."""
    m = as_matrix(a)
    m = (m + m.conj().T) / 2
    w, v = np.linalg.eigh(m)
    clipped = np.clip(w, 0, None)
    total = clipped.sum()
    if total <= 0:
        raise InvalidStateError('no positive spectrum left to project onto')
    if np.any(w < 0):
        logger.debug('projection clipped %d negative eigenvalue(s), lowest %.3e', int(np.sum(w < 0)), w[0])
    return DensityMatrix((v * (clipped / total)) @ v.conj().T, tol=tol)


def _rng(seed: SeedLike) -> np.random.Generator:
    return np.random.default_rng(seed)


def random_complex_matrix(d: int, seed: SeedLike = None, size: int | None = None) -> np.ndarray:
    """Matrix (or stack of `size` matrices) with i.i.d. standard normal real and imaginary parts."""
    rng = _rng(seed)
    shape = (d, d) if size is None else (size, d, d)
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def random_hermitian(d: int, seed: SeedLike = None) -> HermitianOperator:
    g = random_complex_matrix(d, seed)
    return HermitianOperator((g + g.conj().T) / 2)


def random_density_batch(d: int, n: int, kind: StateKind = 'mixed', seed: SeedLike = None) -> np.ndarray:
    """`n` random states as an (n, d, d) array, without per-state validation."""
    rng = _rng(seed)
    if kind == 'pure':
        psi = rng.standard_normal((n, d)) + 1j * rng.standard_normal((n, d))
        psi /= np.linalg.norm(psi, axis=1, keepdims=True)
        return np.einsum('ni,nj->nij', psi, psi.conj())
    if kind == 'mixed':
        g = random_complex_matrix(d, rng, size=n)
        rho = g @ np.conj(np.swapaxes(g, 1, 2))
        return rho / np.trace(rho, axis1=1, axis2=2).real[:, None, None]
    raise ValueError(f"unknown state kind {kind!r}; expected 'pure' or 'mixed'")


def random_density(d: int, kind: StateKind = 'mixed', seed: SeedLike = 0, tol: float = DEFAULT_TOL) -> DensityMatrix:
    """Random state: Haar-style pure state, or G G^dag / tr(G G^dag) for a Ginibre G.

    The same seed always reproduces the same matrix bit for bit.
    """
    if d < 2:
        raise DimensionError(f'random states need d >= 2, got {d}')
    if d > MAX_DIM:
        raise DimensionError(f'dimension {d} exceeds the cap of {MAX_DIM}')
    return DensityMatrix(random_density_batch(d, 1, kind, seed)[0], tol=tol)
