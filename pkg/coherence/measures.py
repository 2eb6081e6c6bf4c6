"""Coherence measures: holographic C_h, l1 norm C_l1, robustness of coherence C_R.

C_R is solved in its diagonal-cover form

    C_R(rho) = min { sum_i d_i - 1 : diag(d) - rho >= 0 },

which is the mixing form rho = (1 + s) delta - s tau with D = (1 + s) delta. The semidefinite
constraint is imposed lazily by eigenvector cuts v^dag diag(d) v >= v^dag rho v
over a small linear program. The LP multipliers mu_k of the active cuts give
Y = sum_k mu_k v_k v_k^dag with unit diagonal and Y >= 0, and W* = I - Y is the
zero-diagonal witness that saturates max{0, -tr(W rho)} <= C_R(rho).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .exceptions import (
    DimensionError,
    IncoherentInputError,
    InvalidBoundWitnessError,
    InvalidWitnessError,
    NonConvergenceError,
)
from .linalg import (
    DEFAULT_TOL,
    DensityMatrix,
    as_density,
    as_hermitian,
    h_norm,
    is_incoherent,
    max_eigenvalue,
    min_eigenvalue,
    off_diagonal,
    trace_product,
)
from .witness import Witness, unified_witness

logger = logging.getLogger(__name__)

ROC_MAX_DIM = 32
ROC_MAX_CUTS = 10_000
CUT_TOL = 1e-9
DUAL_GAP_TOL = 1e-6
TAU_THRESHOLD = 1e-9
DUPLICATE_COSINE = 1 - 1e-10
LP_OPTIONS = {
    'primal_feasibility_tolerance': 1e-10,
    'dual_feasibility_tolerance': 1e-10,
}


def c_h(rho) -> float:
    """Holographic measure: h-norm of the off-diagonal part of rho."""
    return h_norm(off_diagonal(as_density(rho)))


def c_l1(rho) -> float:
    return float(np.abs(off_diagonal(as_density(rho))).sum())


@dataclass(frozen=True)
class RatioCheck:
    c_h: float
    c_l1: float
    upper_holds: bool
    lower_holds: bool
    upper_slack: float
    lower_slack: float

    def __bool__(self):
        return bool(self.upper_holds and self.lower_holds)


def ratio_check(rho, tol: float = DEFAULT_TOL) -> RatioCheck:
    """The chain C_h >= C_l1 >= (sqrt(2)/2) C_h."""
    h, l1 = c_h(rho), c_l1(rho)
    upper = h - l1
    lower = l1 - np.sqrt(2) / 2 * h
    return RatioCheck(h, l1, upper >= -tol, lower >= -tol, float(upper), float(lower))


@dataclass(frozen=True)
class RobustnessSolution:
    """Optimal cover D = diag(incoherent_cover) >= rho with value s = sum(D) - 1.

    primal_gap is lambda_min(D - rho) (nonnegative for a feasible cover);
    dual_gap is s - max{0, -tr(W* rho)}.
    """
    value: float
    incoherent_cover: np.ndarray
    tau: DensityMatrix | None
    dual_witness: Witness | None
    primal_gap: float
    dual_gap: float
    iterations: int
    lower_bound: float


class _CutPool:
    def __init__(self, d):
        self.vectors = [np.eye(d, dtype=np.complex128)[i] for i in range(d)]

    def add(self, v) -> bool:
        v = v / np.linalg.norm(v)
        for u in self.vectors:
            if abs(np.vdot(u, v)) > DUPLICATE_COSINE:
                return False
        self.vectors.append(v)
        return True

    def __len__(self):
        return len(self.vectors)


def _solve_lp(pool: _CutPool, rho: np.ndarray):
    v = np.array(pool.vectors)
    weights = np.abs(v) ** 2
    rhs = np.einsum('ki,ij,kj->k', v.conj(), rho, v).real
    res = linprog(
        np.ones(rho.shape[0]),
        A_ub=-weights,
        b_ub=-rhs,
        bounds=[(None, None)] * rho.shape[0],
        method='highs-ds',
        options=LP_OPTIONS,
    )
    if res.status != 0:
        raise NonConvergenceError(f'cover LP failed: {res.message}')
    return res, v


def _dual_witness(rho: DensityMatrix, vectors: np.ndarray, marginals: np.ndarray, tol: float) -> Witness | None:
    mu = np.clip(-np.asarray(marginals), 0, None)
    y = np.einsum('k,ki,kj->ij', mu, vectors, vectors.conj())
    if np.max(np.abs(y.diagonal().real - 1)) > DUAL_GAP_TOL:
        return None
    w = np.eye(rho.dim) - y
    np.fill_diagonal(w, 0)
    w = (w + w.conj().T) / 2
    top = max_eigenvalue(w, tol)
    if top > 1:
        w /= top
    try:
        return Witness(w, tol=tol)
    except InvalidWitnessError:
        return None


def _fallback_witness(rho: DensityMatrix, tol: float) -> Witness:
    detector = unified_witness(rho, tol).detector.matrix
    return Witness(detector / max_eigenvalue(detector, tol), tol=tol)


def roc(rho, tol: float | None = None, max_cuts: int = ROC_MAX_CUTS) -> RobustnessSolution:
    """Robustness of coherence by eigenvector cutting planes.

    Each round solves the LP over the current cuts, then adds every eigenvector
    of diag(d) - rho with eigenvalue below -1e-9. The returned cover is shifted
    by the last |lambda_min| so that it is feasible; the LP value is a lower bound.
    """
    rho = as_density(rho)
    tol = rho.tol if tol is None else tol
    d = rho.dim
    if d > ROC_MAX_DIM:
        raise DimensionError(f'robustness solver is capped at d = {ROC_MAX_DIM}, got {d}')
    m = rho.matrix
    diag = rho.diagonal
    if is_incoherent(m, tol):
        return RobustnessSolution(0.0, diag, None, None, min_eigenvalue(np.diag(diag) - m, tol), 0.0, 0, 0.0)

    pool = _CutPool(d)
    iterations = 0
    while True:
        iterations += 1
        res, vectors = _solve_lp(pool, m)
        x = res.x
        w, v = np.linalg.eigh(np.diag(x) - m)
        lowest = float(w[0])
        if lowest >= -CUT_TOL:
            break
        added = sum(pool.add(v[:, k]) for k in np.flatnonzero(w < -CUT_TOL))
        if not added:
            logger.info('roc: cut pool stalled at lambda_min %.3e after %d rounds', lowest, iterations)
            break
        if len(pool) > max_cuts:
            lower = float(res.fun) - 1
            raise NonConvergenceError(
                f'no convergence within {max_cuts} cuts',
                lower=lower, upper=lower + d * -lowest, iterations=iterations,
            )
    logger.debug('roc: %d rounds, %d cuts, lambda_min %.3e', iterations, len(pool), lowest)

    cover = x + max(0.0, -lowest)
    value = max(float(cover.sum()) - 1, 0.0)
    residual = np.diag(cover) - m
    tau = DensityMatrix(residual / value, tol=max(tol, 1e-8)) if value > TAU_THRESHOLD else None

    witness = _dual_witness(rho, vectors, res.ineqlin.marginals, tol)
    if witness is None:
        logger.warning('roc: dual extraction was rank deficient; using the scaled unified witness')
        witness = _fallback_witness(rho, tol)
    dual_value = max(0.0, -trace_product(witness, rho, tol))
    dual_gap = value - dual_value
    if dual_gap > DUAL_GAP_TOL:
        logger.warning('roc: dual gap %.3e above %.0e', dual_gap, DUAL_GAP_TOL)
    return RobustnessSolution(
        value=value,
        incoherent_cover=cover,
        tau=tau,
        dual_witness=witness,
        primal_gap=float(np.linalg.eigvalsh(residual)[0]),
        dual_gap=float(dual_gap),
        iterations=iterations,
        lower_bound=float(res.fun) - 1,
    )


def roc_lower_bound(rho, w, tol: float = DEFAULT_TOL) -> float:
    """max{0, -tr(W rho)} for any W with Delta(W) >= 0 and W <= I."""
    op = as_hermitian(w, tol)
    if op.diagonal.min() < -tol:
        raise InvalidBoundWitnessError('bound witness needs a nonnegative diagonal')
    top = max_eigenvalue(op, tol)
    if top > 1 + tol:
        raise InvalidBoundWitnessError(f'bound witness needs W <= I, lambda_max = {top:.6g}')
    return max(0.0, -trace_product(op, as_density(rho), tol))


@dataclass(frozen=True)
class Theorem4Check:
    """|C_h(rho) - s C_h(tau)| and whether C_h(tau) <= 1 + 1e-6 (reported, not enforced)."""
    residual: float
    c_h_rho: float
    c_h_tau: float
    tau_bound_holds: bool
    solution: RobustnessSolution


def verify_theorem4(rho, tol: float | None = None, solution: RobustnessSolution | None = None) -> Theorem4Check:
    rho = as_density(rho)
    tol = rho.tol if tol is None else tol
    if is_incoherent(rho.matrix, tol):
        raise IncoherentInputError('the robustness split needs a coherent state (tau is undefined otherwise)')
    solution = solution or roc(rho, tol)
    if solution.tau is None:
        raise IncoherentInputError('robustness is below threshold; tau is undefined')
    h_rho, h_tau = c_h(rho), c_h(solution.tau)
    tau_ok = h_tau <= 1 + 1e-6
    if not tau_ok:
        logger.info('robustness split: C_h(tau) = %.6f exceeds 1', h_tau)
    return Theorem4Check(abs(h_rho - solution.value * h_tau), h_rho, h_tau, tau_ok, solution)
