"""Gram matrix of the source states and its exact spectral structure.

The n source states (change at position k) have pairwise overlaps c^{|i-j|},
a symmetric Toeplitz Gram matrix whose inverse is tridiagonal up to two
corner corrections.  Eigenvalue angles are the zeros of the boundary
polynomial, located here by sign-change bracketing and bisection; a
hand-rolled cyclic Jacobi eigensolver serves as the independent oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .exceptions import DegenerateEnsembleError, SpectralFailureError
from .special import elliptic_k, phase_amplitude

__all__ = [
    "GramSpectrum",
    "SqrtGram",
    "build_gram",
    "gram_inverse",
    "solve_spectrum",
    "sqrt_gram",
    "jacobi_eigensolve",
    "sqrt_trace_limit",
    "diag_deviation_asymptotic",
    "integral_i_r",
]

_THETA_TOL = 1e-13
_MAX_REFINEMENTS = 12
_JACOBI_OFF_TOL = 1e-12
_JACOBI_MAX_SWEEPS = 60


@dataclass(frozen=True)
class GramSpectrum:
    """Exact eigendecomposition of the n x n Gram matrix.

    thetas are sorted ascending, so lambdas come out descending; eigvecs
    holds the normalized eigenvectors as columns, matching the theta order.
    """

    n: int
    c: float
    thetas: np.ndarray
    lambdas: np.ndarray
    eigvecs: np.ndarray


@dataclass(frozen=True)
class SqrtGram:
    """Matrix square root of the Gram matrix with its diagonal and trace."""

    matrix: np.ndarray
    diag: np.ndarray
    trace: float


def _check_overlap(c: float) -> None:
    if c < 0.0:
        raise ValueError(f"overlap c must be >= 0, got {c}")
    if c >= 1.0:
        raise DegenerateEnsembleError(
            f"overlap c must be < 1 for linearly independent states, got {c}"
        )


def build_gram(n: int, c: float, include_no_change: bool = False) -> np.ndarray:
    """Toeplitz Gram matrix G_ij = c^{|i-j|} of the n source states.

    With include_no_change=True the no-mutation hypothesis (all particles in
    the default state) is appended; it behaves exactly like a change at
    position n+1, so the matrix is the same Toeplitz form one size larger.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    _check_overlap(c)
    size = n + 1 if include_no_change else n
    idx = np.arange(size)
    return c ** np.abs(np.subtract.outer(idx, idx)).astype(float)


def gram_inverse(n: int, c: float) -> np.ndarray:
    """Closed-form inverse of the Gram matrix.

    G^{-1} = (1+c^2)/(1-c^2) I - c/(1-c^2) H where H has unit first
    off-diagonals and corner entries c at (1,1) and (n,n).
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    _check_overlap(c)
    h = np.zeros((n, n))
    off = np.arange(n - 1)
    h[off, off + 1] = 1.0
    h[off + 1, off] = 1.0
    h[0, 0] += c
    h[n - 1, n - 1] += c
    return ((1.0 + c * c) * np.eye(n) - c * h) / (1.0 - c * c)


def _bracket_roots(n: int, c: float) -> list[tuple[float, float]]:
    """Bracket the n zeros of the boundary polynomial on (0, pi).

    The polynomial at x = cos(theta) equals A(theta) sin(n theta + delta)
    with A > 0, so sign changes of sin(n theta + delta) locate the zeros.
    The grid starts at 4n+1 points and doubles locally until n sign changes
    are found.
    """

    def sign_fn(theta: float) -> float:
        _, delta = phase_amplitude(theta, c)
        return math.sin(n * theta + delta)

    lo_edge = 1e-12
    hi_edge = math.pi - 1e-12
    points = 4 * n + 1
    found = 0
    for _ in range(_MAX_REFINEMENTS + 1):
        grid = np.linspace(lo_edge, hi_edge, points)
        # a value of exactly 0.0 counts as positive so a root sitting on a
        # grid point yields one bracket, not two
        signs = [sign_fn(t) >= 0.0 for t in grid]
        brackets = [
            (grid[i], grid[i + 1])
            for i in range(points - 1)
            if signs[i] != signs[i + 1]
        ]
        found = len(brackets)
        if found >= n:
            return brackets[:n]
        points = 2 * (points - 1) + 1
    raise SpectralFailureError(
        f"found {found} of {n} eigenvalue angles for c={c} "
        f"after {_MAX_REFINEMENTS} grid refinements"
    )


def solve_spectrum(n: int, c: float) -> GramSpectrum:
    """Eigendecomposition of the Gram matrix from the boundary polynomial.

    The n angles theta_l are bisected to 1e-13; eigenvalues follow as
    (1-c^2)/(1-2c cos(theta_l)+c^2) and eigenvector components as
    [sin(j theta_l) - c sin((j-1) theta_l)] / sin(theta_l), normalized by
    their explicitly summed Euclidean norm.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    _check_overlap(c)
    j = np.arange(1, n + 1)
    if c == 0.0:
        thetas = j * math.pi / (n + 1.0)
        vecs = np.sin(np.outer(j, thetas))
        vecs /= np.linalg.norm(vecs, axis=0)
        return GramSpectrum(n=n, c=0.0, thetas=thetas, lambdas=np.ones(n), eigvecs=vecs)

    def sign_fn(theta: float) -> float:
        _, delta = phase_amplitude(theta, c)
        return math.sin(n * theta + delta)

    thetas = np.empty(n)
    for l, (lo, hi) in enumerate(_bracket_roots(n, c)):
        sign_lo = sign_fn(lo) >= 0.0
        while hi - lo > _THETA_TOL:
            mid = 0.5 * (lo + hi)
            f_mid = sign_fn(mid)
            if f_mid == 0.0:
                lo = hi = mid
            elif (f_mid >= 0.0) == sign_lo:
                lo = mid
            else:
                hi = mid
        thetas[l] = 0.5 * (lo + hi)

    lambdas = (1.0 - c * c) / (1.0 - 2.0 * c * np.cos(thetas) + c * c)
    jt = np.outer(j, thetas)
    vecs = (np.sin(jt) - c * np.sin(jt - thetas[np.newaxis, :])) / np.sin(thetas)
    vecs /= np.linalg.norm(vecs, axis=0)
    return GramSpectrum(n=n, c=c, thetas=thetas, lambdas=lambdas, eigvecs=vecs)


def sqrt_gram(spectrum: GramSpectrum) -> SqrtGram:
    """Matrix square root synthesized from the spectral decomposition."""
    root = spectrum.eigvecs @ (np.sqrt(spectrum.lambdas)[:, np.newaxis] * spectrum.eigvecs.T)
    root = 0.5 * (root + root.T)
    return SqrtGram(matrix=root, diag=np.diag(root).copy(), trace=float(np.sqrt(spectrum.lambdas).sum()))


def jacobi_eigensolve(matrix: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Classical cyclic Jacobi diagonalization of a real symmetric matrix.

    Independent oracle for the closed-form spectrum: sweeps of plane
    rotations until the off-diagonal Frobenius norm falls below 1e-12.
    Returns eigenvalues ascending and the matching eigenvectors as columns.
    """
    a = np.asarray(matrix, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    scale = np.abs(a).max() if a.size else 0.0
    if not np.allclose(a, a.T, atol=1e-12 * max(scale, 1.0), rtol=0.0):
        raise ValueError("matrix is not symmetric")
    n = a.shape[0]
    if n == 1:
        return a[0, :1].copy(), np.ones((1, 1))
    a = 0.5 * (a + a.T)
    vecs = np.eye(n)
    skip_tol = 1e-16 * max(scale, 1.0)
    for _ in range(_JACOBI_MAX_SWEEPS):
        off = math.sqrt(2.0 * (np.triu(a, 1) ** 2).sum())
        if off < _JACOBI_OFF_TOL:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= skip_tol:
                    continue
                tau = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, tau) / (abs(tau) + math.hypot(1.0, tau))
                cos_r = 1.0 / math.hypot(1.0, t)
                sin_r = t * cos_r
                col_p = a[:, p].copy()
                col_q = a[:, q].copy()
                a[:, p] = cos_r * col_p - sin_r * col_q
                a[:, q] = sin_r * col_p + cos_r * col_q
                row_p = a[p, :].copy()
                row_q = a[q, :].copy()
                a[p, :] = cos_r * row_p - sin_r * row_q
                a[q, :] = sin_r * row_p + cos_r * row_q
                a[p, q] = 0.0
                a[q, p] = 0.0
                vec_p = vecs[:, p].copy()
                vec_q = vecs[:, q].copy()
                vecs[:, p] = cos_r * vec_p - sin_r * vec_q
                vecs[:, q] = sin_r * vec_p + cos_r * vec_q
    else:
        raise SpectralFailureError(
            f"Jacobi sweeps did not reach off-diagonal norm {_JACOBI_OFF_TOL} "
            f"within {_JACOBI_MAX_SWEEPS} sweeps"
        )
    eigenvalues = np.diag(a).copy()
    order = np.argsort(eigenvalues)
    return eigenvalues[order], vecs[:, order]


def sqrt_trace_limit(c: float) -> float:
    """Limit of tr(sqrt(G))/n for n -> infinity: (2 sqrt(1-c^2)/pi) K(c^2)."""
    _check_overlap(c)
    return 2.0 * math.sqrt(1.0 - c * c) / math.pi * elliptic_k(c * c)


def diag_deviation_asymptotic(k: int, c: float) -> float:
    """Large-n deviation of (sqrt(G))_kk from its limit value.

    Equals c^{2k} / (4 (1-c^2) sqrt(2 pi k^3)); decays exponentially in k.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    _check_overlap(c)
    return c ** (2 * k) / (4.0 * (1.0 - c * c) * math.sqrt(2.0 * math.pi * k**3))


def integral_i_r(r: int, c: float, mode: str = "exact") -> float:
    """Oscillatory integral of cos(r theta)/(1-2c cos(theta)+c^2)^{3/2} on (0, pi).

    mode="exact" uses adaptive quadrature with the oscillatory cosine weight;
    mode="asymptotic" evaluates the large-r form 2 c^r sqrt(pi r)/(1-c^2)^{3/2}.
    """
    if r < 1:
        raise ValueError(f"r must be >= 1, got {r}")
    _check_overlap(c)
    if mode == "asymptotic":
        return 2.0 * c**r * math.sqrt(math.pi * r) / (1.0 - c * c) ** 1.5
    if mode != "exact":
        raise ValueError(f"mode must be 'exact' or 'asymptotic', got {mode!r}")
    value, _ = quad(
        lambda t: (1.0 - 2.0 * c * math.cos(t) + c * c) ** -1.5,
        0.0,
        math.pi,
        weight="cos",
        wvar=r,
        epsabs=1e-13,
        epsrel=1e-12,
        limit=200,
    )
    return value
