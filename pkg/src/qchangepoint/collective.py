"""Collective-measurement figures of merit.

Prior-weighted Gram matrix, the trace-square-root lower/upper bounds on the
optimal identification probability, the square-root-measurement value, the
closed-form large-n asymptote, and a monotone fixed-point solver that plays
the role of an exact optimizer at desk scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import DegenerateEnsembleError
from .gram import jacobi_eigensolve, solve_spectrum, sqrt_gram
from .special import elliptic_k

__all__ = [
    "WeightedGram",
    "PovmSolverResult",
    "CollectiveSummary",
    "weighted_gram",
    "success_lower_bound",
    "success_upper_bound",
    "srm_success",
    "asymptotic_pmax",
    "embed_states",
    "optimal_povm_fixed_point",
    "collective_summary",
]

_PRIOR_TOL = 1e-12
_RANK_TOL = 1e-12


@dataclass(frozen=True)
class WeightedGram:
    """Prior-weighted Gram matrix W_ij = sqrt(p_i p_j) G_ij and derived data.

    q is the probability vector diag(sqrt(W))/tr(sqrt(W)); lambda_max the
    largest eigenvalue of W.  rank_deficient flags a numerically singular W
    (some prior zero, or overlaps collapsing the span).
    """

    n: int
    matrix: np.ndarray
    sqrt_matrix: np.ndarray
    q: np.ndarray
    lambda_max: float
    rank_deficient: bool

    @property
    def sqrt_trace(self) -> float:
        return float(np.trace(self.sqrt_matrix))


@dataclass(frozen=True)
class PovmSolverResult:
    """Outcome of the fixed-point POVM iteration."""

    success_probability: float
    povm: np.ndarray  # shape (n, n, n); povm[k] is the element for guess k
    iterations: int
    residual: float
    converged: bool


@dataclass(frozen=True)
class CollectiveSummary:
    """All collective figures of merit at one (n, c) point, uniform priors."""

    n: int
    c: float
    lower_bound: float
    srm: float
    fixed_point_opt: float
    upper_bound: float
    asymptotic: float


def weighted_gram(gram: np.ndarray, priors: np.ndarray) -> WeightedGram:
    """Weight the Gram matrix by priors and take its square root.

    The square root comes from the cyclic Jacobi eigensolver; eigenvalues
    below 1e-12 of the largest are clamped to zero and flag rank deficiency.
    """
    gram = np.asarray(gram, dtype=float)
    priors = np.asarray(priors, dtype=float)
    n = gram.shape[0]
    if priors.shape != (n,):
        raise ValueError(f"priors shape {priors.shape} does not match n={n}")
    if np.any(priors < 0.0) or abs(priors.sum() - 1.0) > _PRIOR_TOL:
        raise ValueError("priors must be nonnegative and sum to 1")
    root_p = np.sqrt(priors)
    w = root_p[:, np.newaxis] * gram * root_p[np.newaxis, :]
    eigenvalues, eigenvectors = jacobi_eigensolve(w)
    lam_max = float(eigenvalues[-1])
    rank_deficient = bool(eigenvalues[0] <= _RANK_TOL * max(lam_max, 1.0))
    clamped = np.clip(eigenvalues, 0.0, None)
    sqrt_w = eigenvectors @ (np.sqrt(clamped)[:, np.newaxis] * eigenvectors.T)
    sqrt_w = 0.5 * (sqrt_w + sqrt_w.T)
    diag = np.diag(sqrt_w)
    return WeightedGram(
        n=n,
        matrix=w,
        sqrt_matrix=sqrt_w,
        q=diag / diag.sum(),
        lambda_max=lam_max,
        rank_deficient=rank_deficient,
    )


def success_lower_bound(weighted: WeightedGram) -> float:
    """(tr sqrt(W))^2 / n: achievable, hence a lower bound on the optimum."""
    return weighted.sqrt_trace**2 / weighted.n


def success_upper_bound(weighted: WeightedGram) -> float:
    """Lower bound plus sqrt(n lambda_max) * l1-distance of q from uniform."""
    deviation = float(np.abs(weighted.q - 1.0 / weighted.n).sum())
    return success_lower_bound(weighted) + math.sqrt(weighted.n * weighted.lambda_max) * deviation


def srm_success(weighted: WeightedGram) -> float:
    """Success probability of the square root measurement: sum_k (sqrt W)_kk^2."""
    return float((np.diag(weighted.sqrt_matrix) ** 2).sum())


def asymptotic_pmax(c: float) -> float:
    """Large-n optimal identification probability 4(1-c^2)/pi^2 * K(c^2)^2.

    Returns 1 at c=0 (orthogonal states) and 0 for c >= 1, where the states
    become indistinguishable and the success probability vanishes as 1/n.
    """
    if c < 0.0:
        raise ValueError(f"overlap c must be >= 0, got {c}")
    if c >= 1.0:
        return 0.0
    k = elliptic_k(c * c)
    return 4.0 * (1.0 - c * c) / math.pi**2 * k * k


def embed_states(gram: np.ndarray) -> np.ndarray:
    """Coordinates of the source states in an orthonormal basis of their span.

    Returns sqrt(G); column k is the k-th state, so pairwise inner products
    reproduce the Gram matrix exactly.
    """
    gram = np.asarray(gram, dtype=float)
    eigenvalues, eigenvectors = jacobi_eigensolve(gram)
    if eigenvalues[0] <= _RANK_TOL * max(float(eigenvalues[-1]), 1.0):
        raise DegenerateEnsembleError(
            f"Gram matrix is rank deficient (min eigenvalue {eigenvalues[0]:.3e})"
        )
    root = eigenvectors @ (np.sqrt(eigenvalues)[:, np.newaxis] * eigenvectors.T)
    return 0.5 * (root + root.T)


def _success_probability(states: np.ndarray, priors: np.ndarray, povm_vecs: np.ndarray) -> float:
    overlaps = np.einsum("ik,ik->k", states, povm_vecs)
    return float((priors * overlaps**2).sum())


def optimal_povm_fixed_point(
    states: np.ndarray,
    priors: np.ndarray,
    tol: float = 1e-10,
    max_iter: int = 10_000,
) -> PovmSolverResult:
    """Monotone fixed-point iteration for the minimum-error POVM.

    Seeds with the square root measurement, then repeatedly conjugates each
    element by the inverse square root of sum_j p_j <psi_j|E_j|psi_j>
    |psi_j><psi_j|, the classical steering map whose fixed points satisfy the
    optimality conditions.  The success probability never decreases; the loop
    stops once the per-iteration gain drops below tol.
    """
    if tol <= 0.0:
        raise ValueError(f"tol must be > 0, got {tol}")
    states = np.asarray(states, dtype=float)
    priors = np.asarray(priors, dtype=float)
    n = states.shape[1]
    if np.any(priors < 0.0) or abs(priors.sum() - 1.0) > _PRIOR_TOL:
        raise ValueError("priors must be nonnegative and sum to 1")

    def inv_sqrt(op: np.ndarray) -> np.ndarray:
        # aggregate operator is only supported on the span of the states;
        # pseudo-invert anything below 1e-12 of the top eigenvalue
        vals, vecs = np.linalg.eigh(op)
        cut = 1e-12 * max(float(vals[-1]), 0.0)
        inv_root = np.where(vals > cut, 1.0 / np.sqrt(np.clip(vals, cut, None)), 0.0)
        return vecs @ (inv_root[:, np.newaxis] * vecs.T)

    # square root measurement: E_k = S^{-1/2} p_k |psi_k><psi_k| S^{-1/2},
    # kept in rank-one form E_k = g_k g_k^T throughout
    aggregate = (states * priors) @ states.T
    povm_vecs = inv_sqrt(aggregate) @ (states * np.sqrt(priors))
    success = _success_probability(states, priors, povm_vecs)
    best_vecs, best_success = povm_vecs, success

    iterations = 0
    residual = math.inf
    converged = False
    for iterations in range(1, max_iter + 1):
        weights = priors * np.einsum("ik,ik->k", states, povm_vecs) ** 2
        aggregate = (states * weights) @ states.T
        new_vecs = (inv_sqrt(aggregate) @ states) * np.sqrt(weights)
        new_success = _success_probability(states, priors, new_vecs)
        gain = new_success - success
        povm_vecs, success = new_vecs, new_success
        if success > best_success:
            best_vecs, best_success = povm_vecs, success
        residual = abs(gain)
        if gain < tol:
            converged = gain > -1e-12
            break
    if not converged:
        povm_vecs, success = best_vecs, best_success

    povm = np.einsum("ik,jk->kij", povm_vecs, povm_vecs)
    return PovmSolverResult(
        success_probability=success,
        povm=povm,
        iterations=iterations,
        residual=abs(residual),
        converged=converged,
    )


def collective_summary(
    n: int,
    c: float,
    tol: float = 1e-10,
    max_iter: int = 10_000,
) -> CollectiveSummary:
    """All collective figures at one (n, c) point under uniform priors.

    Goes through the closed-form spectrum, so W = G/n quantities come out of
    the Chebyshev-root eigendecomposition rather than the Jacobi oracle.
    """
    spectrum = solve_spectrum(n, c)
    root = sqrt_gram(spectrum)
    lower = (root.trace / n) ** 2
    srm = float((root.diag**2).sum()) / n
    q = root.diag / root.trace
    lam_max_w = float(spectrum.lambdas.max()) / n
    upper = lower + math.sqrt(n * lam_max_w) * float(np.abs(q - 1.0 / n).sum())
    result = optimal_povm_fixed_point(
        root.matrix, np.full(n, 1.0 / n), tol=tol, max_iter=max_iter
    )
    return CollectiveSummary(
        n=n,
        c=c,
        lower_bound=lower,
        srm=srm,
        fixed_point_opt=result.success_probability,
        upper_bound=upper,
        asymptotic=asymptotic_pmax(c),
    )
