"""Coherence witnesses: validity, optimality, construction and the finer-than order.

A witness W has tr(W delta) >= 0 on every incoherent state delta (equivalently, a
nonnegative diagonal) and tr(W rho) < 0 on at least one state (equivalently,
lambda_min(W) < 0). A witness is optimal exactly when its diagonal vanishes.

Generator witnesses follow the convention

    W^R_lm = (|l><m| + |m><l|) / 2,   W^I_lm = i (|l><m| - |m><l|) / 2,   l < m,

so that tr(W^R_lm rho) = Re rho_lm and tr(W^I_lm rho) = Im rho_lm. For d = 2 this
makes W^R_01 = sigma_x / 2 and W^I_01 = -sigma_y / 2.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .exceptions import (
    DimensionError,
    EmptyDetectionSetError,
    IncoherentInputError,
    InvalidWitnessError,
    NotFinerError,
)
from .linalg import (
    DEFAULT_TOL,
    HermitianOperator,
    SeedLike,
    as_density,
    as_hermitian,
    as_matrix,
    dephase,
    is_incoherent,
    min_eigenvalue,
    random_complex_matrix,
    random_density_batch,
    trace_product,
)

logger = logging.getLogger(__name__)

GeneratorKind = Literal['R', 'I']

# is_finer search settings
EPSILON_XATOL = 1e-8
PSD_MARGIN = 1e-9
EQUAL_TOL = 1e-9


@dataclass(frozen=True)
class WitnessCheck:
    witness: bool
    diagonal_ok: bool
    detects: bool
    normalized: bool
    min_eigenvalue: float
    min_diagonal: float
    trace: float
    reason: str

    def __bool__(self):
        return bool(self.witness)


def is_witness(w, tol: float = DEFAULT_TOL) -> WitnessCheck:
    """Check conditions (i) and (ii); report, never require, tr(W) = 1."""
    op = as_hermitian(w, tol)
    diag = op.diagonal
    lowest = min_eigenvalue(op, tol)
    diagonal_ok = bool(diag.min() >= -tol)
    detects = bool(lowest < -tol)
    trace = float(diag.sum())
    problems = []
    if not diagonal_ok:
        problems.append(f'negative diagonal entry {diag.min():.3e}: fails on an incoherent state')
    if not detects:
        problems.append(f'positive semidefinite (lambda_min = {lowest:.3e}): detects nothing')
    return WitnessCheck(
        witness=diagonal_ok and detects,
        diagonal_ok=diagonal_ok,
        detects=detects,
        normalized=abs(trace - 1) <= tol,
        min_eigenvalue=lowest,
        min_diagonal=float(diag.min()),
        trace=trace,
        reason='; '.join(problems) or 'ok',
    )


@dataclass(frozen=True, eq=False, repr=False)
class Witness(HermitianOperator):
    """A Hermitian operator that passed `is_witness` at construction."""

    def __post_init__(self):
        super().__post_init__()
        check = is_witness(self.matrix, self.tol)
        if not check:
            raise InvalidWitnessError(check.reason)
        object.__setattr__(self, '_check', check)

    @property
    def check(self) -> WitnessCheck:
        return self._check

    @property
    def optimal(self) -> bool:
        return bool(np.all(np.abs(self.diagonal) <= self.tol))


def as_witness(w, tol: float = DEFAULT_TOL) -> Witness:
    if isinstance(w, Witness):
        return w
    return Witness(as_matrix(w), tol=getattr(w, 'tol', tol))


def is_optimal(w, tol: float | None = None) -> bool:
    """A witness is optimal iff every diagonal entry vanishes."""
    w = as_witness(w, DEFAULT_TOL if tol is None else tol)
    tol = w.tol if tol is None else tol
    return bool(np.all(np.abs(w.diagonal) <= tol))


def detects(w, rho, stringent: bool = False, tol: float = DEFAULT_TOL) -> bool:
    """Whether `w` detects `rho`: tr(W rho) < -tol, or |tr(W rho)| > tol when stringent."""
    value = trace_product(w, rho, tol)
    return abs(value) > tol if stringent else value < -tol


def construct_witness(rho, tol: float | None = None) -> Witness:
    """W_rho = -rho + Delta(rho), an optimal witness with tr(W_rho rho) < 0."""
    rho = as_density(rho)
    tol = rho.tol if tol is None else tol
    if is_incoherent(rho.matrix, tol):
        raise IncoherentInputError('state is incoherent; -rho + Delta(rho) vanishes')
    m = dephase(rho) - rho.matrix
    np.fill_diagonal(m, 0)
    return Witness(m, tol=tol)


def generator_matrix(d: int, l: int, m: int, kind: GeneratorKind) -> np.ndarray:
    if not 0 <= l < m < d:
        raise DimensionError(f'generator indices need 0 <= l < m < d, got l={l}, m={m}, d={d}')
    g = np.zeros((d, d), dtype=np.complex128)
    if kind == 'R':
        g[l, m] = g[m, l] = 0.5
    elif kind == 'I':
        g[l, m] = 0.5j
        g[m, l] = -0.5j
    else:
        raise ValueError(f"generator kind must be 'R' or 'I', got {kind!r}")
    return g


def generator_witness(d: int, l: int, m: int, kind: GeneratorKind) -> Witness:
    return Witness(generator_matrix(d, l, m, kind))


def offdiagonal_pairs(d: int) -> list[tuple[int, int, str]]:
    """Canonical order of the off-diagonal generators: (l, m) lexicographic, R before I."""
    return [(l, m, kind) for l in range(d) for m in range(l + 1, d) for kind in ('R', 'I')]


@dataclass(frozen=True)
class UnifiedWitness:
    witness: Witness
    detector: Witness
    expectation: float
    coefficients: dict


def unified_witness(rho, tol: float | None = None) -> UnifiedWitness:
    """W^U with coefficients 2 sign(Re rho_lm), 2 sign(Im rho_lm) over pairs l < m.

    tr(W^U rho) equals the holographic measure; `detector` is -W^U, which has a
    negative expectation on rho.
    """
    rho = as_density(rho)
    tol = rho.tol if tol is None else tol
    d = rho.dim
    total = np.zeros((d, d), dtype=np.complex128)
    coefficients = {}
    for l, m, kind in offdiagonal_pairs(d):
        part = rho.matrix[l, m].real if kind == 'R' else rho.matrix[l, m].imag
        p = 0.0 if abs(part) <= tol else 2.0 * np.sign(part)
        coefficients[(l, m, kind)] = p
        if p:
            total += p * generator_matrix(d, l, m, kind)
    if not np.any(total):
        raise IncoherentInputError('state has no off-diagonal component above tolerance')
    witness = Witness(total, tol=tol)
    return UnifiedWitness(
        witness=witness,
        detector=Witness(-total, tol=tol),
        expectation=trace_product(witness, rho, tol),
        coefficients=coefficients,
    )


def qubit_optimal_witness(theta: float) -> Witness:
    """cos(theta) sigma_x + sin(theta) sigma_y; every optimal qubit witness is a positive multiple."""
    off = np.cos(theta) - 1j * np.sin(theta)
    return Witness(np.array([[0, off], [np.conj(off), 0]]))


def best_qubit_witness(rho) -> tuple[float, Witness, float]:
    """The theta minimizing tr(W_theta rho), the witness, and the value -2|rho_01|."""
    rho = as_density(rho)
    if rho.dim != 2:
        raise DimensionError('qubit witness family needs d = 2')
    theta = float(np.mod(np.pi - np.angle(rho.matrix[0, 1]), 2 * np.pi))
    w = qubit_optimal_witness(theta)
    return theta, w, trace_product(w, rho)


def random_witness(d: int, seed: SeedLike = 0, optimal: bool = False, tol: float = DEFAULT_TOL) -> Witness:
    """Random valid witness; strictly positive diagonal unless `optimal`.

    The diagonal stays below |lambda_min| of the off-diagonal part, so by Weyl's
    inequality the result still has a negative eigenvalue.
    """
    rng = np.random.default_rng(seed)
    g = random_complex_matrix(d, rng)
    off = (g + g.conj().T) / 2
    np.fill_diagonal(off, 0)
    off /= np.linalg.norm(off, 2)
    if not optimal:
        depth = -min_eigenvalue(off)
        off += np.diag(depth * rng.uniform(0.05, 0.95, d))
    return Witness(off, tol=tol)


@dataclass(frozen=True)
class FinerReport:
    """Outcome of testing W1 = (1 - epsilon) W2 + epsilon P with P >= 0.

    `epsilon` is the most robust feasible value (largest lambda_min of the
    residual) when that maximum lies inside the interval; when the residual is
    already positive at epsilon = 0 it is the interval midpoint, so P stays
    bounded. `feasible_interval` is the full feasible range. `positive_part` is
    absent when epsilon = 0 (W1 = W2). `witness_margin` is lambda_min(P), 0 when
    P is absent.
    """
    finer: bool
    epsilon: float
    positive_part: HermitianOperator | None
    xi_lower: float
    witness_margin: float
    feasible_interval: tuple[float, float] | None


def is_finer(w1, w2, tol: float = DEFAULT_TOL) -> FinerReport:
    """Decide whether W2 is finer than W1 (detects every state W1 detects).

    M(epsilon) = (W1 - W2) + epsilon W2 is affine, so lambda_min(M) is concave and
    the feasible epsilons form an interval: maximize lambda_min by a bounded
    golden-section/Brent search, then bracket the interval ends by root finding.
    """
    w1, w2 = as_witness(w1, tol), as_witness(w2, tol)
    if w1.dim != w2.dim:
        raise DimensionError(f'dimension mismatch: {w1.dim} vs {w2.dim}')
    a, b = w1.matrix, w2.matrix
    if np.max(np.abs(a - b)) <= EQUAL_TOL:
        return FinerReport(True, 0.0, None, 1.0, 0.0, (0.0, 0.0))

    diff = a - b

    def margin(eps):
        return float(np.linalg.eigvalsh(diff + eps * b)[0])

    search = minimize_scalar(lambda eps: -margin(eps), bounds=(0.0, 1.0), method='bounded',
                             options={'xatol': EPSILON_XATOL})
    eps_star = float(search.x)
    best = margin(eps_star)
    logger.debug('is_finer: max lambda_min %.3e at epsilon %.6f', best, eps_star)
    if best < -PSD_MARGIN:
        return FinerReport(False, eps_star, None, float('nan'), best, None)

    if best <= 0:
        lo = hi = eps_star
    else:
        lo = 0.0 if margin(0.0) >= 0 else brentq(margin, 0.0, eps_star, xtol=1e-12)
        hi = 1.0 if margin(1.0) >= 0 else brentq(margin, eps_star, 1.0, xtol=1e-12)
        if lo == 0.0:
            # W1 - W2 >= 0: the maximum hugs epsilon = 0 where P = M / epsilon diverges
            eps_star = hi / 2
    p = (a - (1 - eps_star) * b) / eps_star
    p = (p + p.conj().T) / 2
    positive = HermitianOperator(p, tol=tol)
    return FinerReport(
        finer=True,
        epsilon=eps_star,
        positive_part=positive,
        xi_lower=1.0 / (1.0 - hi) if hi < 1 else float('inf'),
        witness_margin=min_eigenvalue(positive, tol),
        feasible_interval=(float(lo), float(hi)),
    )


def _expectations(w: np.ndarray, states: np.ndarray) -> np.ndarray:
    return np.einsum('ij,nji->n', w, states).real


def estimate_xi(w1, w2, samples: int = 20_000, seed: SeedLike = 0, tol: float = DEFAULT_TOL,
                refine_steps: int = 200) -> float:
    """Upper estimate of xi = inf |tr(W2 rho) / tr(W1 rho)| over states detected by W1.

    Rejection sampling (half pure, half mixed states) finds a starting point;
    convex-combination descent toward random pure states then lowers the ratio.
    For a finer pair the result is at least 1 - tol.
    """
    w1, w2 = as_witness(w1, tol), as_witness(w2, tol)
    if not is_finer(w1, w2, tol).finer:
        raise NotFinerError('estimate_xi needs W2 finer than W1')
    a, b = w1.matrix, w2.matrix
    d = w1.dim
    rng = np.random.default_rng(seed)
    half = max(samples // 2, 1)
    states = np.concatenate([
        random_density_batch(d, half, 'pure', rng),
        random_density_batch(d, max(samples - half, 1), 'mixed', rng),
    ])
    t1, t2 = _expectations(a, states), _expectations(b, states)
    detected = np.flatnonzero(t1 < -tol)
    if detected.size == 0:
        raise EmptyDetectionSetError(f'no sampled state detected by W1 in {samples} draws')
    ratios = np.abs(t2[detected] / t1[detected])
    k = int(np.argmin(ratios))
    best, best_state = float(ratios[k]), states[detected[k]]
    logger.debug('estimate_xi: %d of %d samples detected, start ratio %.6f', detected.size, len(states), best)

    step = 0.5
    for _ in range(refine_steps):
        if step < 1e-6:
            break
        targets = random_density_batch(d, 32, 'pure', rng)
        candidates = (1 - step) * best_state + step * targets
        c1, c2 = _expectations(a, candidates), _expectations(b, candidates)
        ok = c1 < -tol
        if ok.any():
            r = np.where(ok, np.abs(c2 / np.where(ok, c1, -1.0)), np.inf)
            j = int(np.argmin(r))
            if r[j] < best:
                best, best_state = float(r[j]), candidates[j]
                continue
        step *= 0.5
    return best
