"""Incoherent channels in Kraus form and their selective outcomes.

A Kraus operator maps incoherent states to incoherent states exactly when each
of its columns has at most one nonzero entry. Channels here are square
(d_in = d_out).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Literal, Sequence

import numpy as np
import scipy.linalg

from .exceptions import DimensionError, InvalidChannelError, ProbabilityError
from .linalg import DEFAULT_TOL, MAX_DIM, DensityMatrix, SeedLike, as_density, as_matrix
from .measures import c_h

logger = logging.getLogger(__name__)

AmplitudeKind = Literal['complex', 'real']


@dataclass(frozen=True, eq=False)
class IncoherentChannel:
    kraus: tuple
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        if len(self.kraus) == 0:
            raise DimensionError('a channel needs at least one Kraus operator')
        ops = []
        for k in self.kraus:
            op = np.array(k, dtype=np.complex128)
            if op.ndim != 2:
                raise DimensionError(f'Kraus operator must be a matrix, got shape {op.shape}')
            op.setflags(write=False)
            ops.append(op)
        shapes = {op.shape for op in ops}
        if len(shapes) != 1:
            raise DimensionError(f'Kraus operators have inconsistent shapes {sorted(shapes)}')
        rows, cols = ops[0].shape
        if rows != cols:
            raise DimensionError(f'only square channels are supported, got {rows}x{cols}')
        object.__setattr__(self, 'kraus', tuple(ops))

    @property
    def dim(self) -> int:
        return self.kraus[0].shape[1]

    @classmethod
    def identity(cls, d: int) -> 'IncoherentChannel':
        return cls((np.eye(d),))

    @classmethod
    def dephasing(cls, d: int) -> 'IncoherentChannel':
        """Complete dephasing, Kraus operators |i><i|."""
        return cls(tuple(np.diag(np.eye(d)[i]) for i in range(d)))

    @classmethod
    def diagonal_unitary(cls, phases: Sequence[float]) -> 'IncoherentChannel':
        return cls((np.diag(np.exp(1j * np.asarray(phases, dtype=float))),))


@dataclass(frozen=True)
class ChannelCheck:
    valid: bool
    complete: bool
    incoherent: bool
    completeness_error: float
    diagnostics: list = field(default_factory=list)

    def __bool__(self):
        return bool(self.valid)


def validate(ch: IncoherentChannel) -> ChannelCheck:
    diagnostics = []
    total = sum(k.conj().T @ k for k in ch.kraus)
    error = float(np.max(np.abs(total - np.eye(ch.dim))))
    complete = error <= ch.tol
    if not complete:
        diagnostics.append(f'completeness: max |sum K^dag K - I| = {error:.3e}')
    incoherent = True
    for n, k in enumerate(ch.kraus):
        support = np.sum(np.abs(k) > ch.tol, axis=0)
        for col in np.flatnonzero(support > 1):
            incoherent = False
            diagnostics.append(f'Kraus {n}, column {col}: {support[col]} nonzero entries')
    return ChannelCheck(complete and incoherent, complete, incoherent, error, diagnostics)


def _require_valid(ch: IncoherentChannel, rho: DensityMatrix):
    check = validate(ch)
    if not check:
        raise InvalidChannelError('; '.join(check.diagnostics))
    if rho.dim != ch.dim:
        raise DimensionError(f'channel acts on d = {ch.dim}, state has d = {rho.dim}')


def apply(ch: IncoherentChannel, rho) -> DensityMatrix:
    """Phi(rho) = sum_n K_n rho K_n^dag."""
    rho = as_density(rho)
    _require_valid(ch, rho)
    out = sum(k @ rho.matrix @ k.conj().T for k in ch.kraus)
    return DensityMatrix(out, tol=max(rho.tol, ch.tol))


@dataclass(frozen=True)
class Outcome:
    probability: float
    state: DensityMatrix


def selective_outcomes(ch: IncoherentChannel, rho) -> list[Outcome]:
    """(p_n, rho_n) for each Kraus operator; outcomes with p_n <= tol are dropped."""
    rho = as_density(rho)
    _require_valid(ch, rho)
    tol = max(rho.tol, ch.tol)
    outcomes = []
    for k in ch.kraus:
        branch = k @ rho.matrix @ k.conj().T
        p = float(np.trace(branch).real)
        if p > tol:
            outcomes.append(Outcome(p, DensityMatrix(branch / p, tol=tol)))
    return outcomes


def random_incoherent_channel(d: int, n_kraus: int | None = None, seed: SeedLike = 0,
                              amplitudes: AmplitudeKind = 'complex') -> IncoherentChannel:
    """Random incoherent channel with exact completeness.

    Each Kraus operator sends its active columns to distinct rows through a
    random permutation; a column of K_n is active with probability 1/2. The
    amplitudes (complex normal, or real normal) are then rescaled column by
    column so that sum_n K_n^dag K_n = I. A map that sends two active columns
    of the same operator to one row would put off-diagonal terms into
    K_n^dag K_n that column scaling cannot cancel, so such maps are not drawn.
    """
    if d < 2 or d > MAX_DIM:
        raise DimensionError(f'channel dimension must be in [2, {MAX_DIM}], got {d}')
    n_kraus = d if n_kraus is None else n_kraus
    if n_kraus < 1:
        raise DimensionError('n_kraus must be at least 1')
    rng = np.random.default_rng(seed)
    active = rng.random((n_kraus, d)) < 0.5
    active[0, ~active.any(axis=0)] = True
    amp = rng.standard_normal((n_kraus, d))
    if amplitudes == 'complex':
        amp = amp + 1j * rng.standard_normal((n_kraus, d))
    elif amplitudes != 'real':
        raise ValueError(f"amplitudes must be 'complex' or 'real', got {amplitudes!r}")
    amp = np.where(active, amp, 0)
    amp = amp / np.sqrt(np.sum(np.abs(amp) ** 2, axis=0))
    kraus = []
    for n in range(n_kraus):
        rows = rng.permutation(d)
        k = np.zeros((d, d), dtype=np.complex128)
        k[rows, np.arange(d)] = amp[n]
        kraus.append(k)
    return IncoherentChannel(tuple(kraus))


@dataclass(frozen=True)
class C2cCheck:
    holds: bool
    lhs: float
    rhs: float


def c2c_check(parts: Sequence[tuple[float, object]], reference=None, tol: float = DEFAULT_TOL,
              measure: Callable[[object], float] = c_h) -> C2cCheck:
    """C_h(rho) >= C_h(sum_i p_i |i><i| (x) rho_i).

    The flagged state is block diagonal, and ||(|i><i| (x) M)||_h = ||M||_h, so
    its measure is sum_i p_i C_h(rho_i). `reference` is the state the parts came
    from (e.g. the pre-measurement state of a selective incoherent operation);
    without it rho = sum_i p_i rho_i. `measure` defaults to C_h; any measure that
    is additive over diagonal blocks (C_l1 is) can be checked the same way.
    """
    probs = np.array([float(p) for p, _ in parts])
    if np.any(probs < -tol) or abs(probs.sum() - 1) > 1e-9:
        raise ProbabilityError(f'probabilities must be nonnegative and sum to 1, got sum {probs.sum()!r}')
    states = [as_density(s).matrix for _, s in parts]
    if len({s.shape for s in states}) != 1:
        raise DimensionError('all parts need the same dimension')
    if reference is None:
        reference = sum(p * s for p, s in zip(probs, states))
    flagged = scipy.linalg.block_diag(*[p * s for p, s in zip(probs, states)])
    lhs, rhs = measure(reference), measure(flagged)
    return C2cCheck(lhs >= rhs - tol, lhs, rhs)
