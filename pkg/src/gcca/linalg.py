"""Dense/sparse linear-algebra kernels: truncated SVD, rank, nullspaces, angles.

Every subspace in this package is carried as a plain ``ndarray`` whose
columns are orthonormal (``basis.T @ basis == I``).
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import svds

from .errors import ConvergenceError, DimensionError


@dataclass
class SvdResult:
    """Leading singular triplets, ``A ~= U @ diag(s) @ V.T``."""

    U: np.ndarray
    s: np.ndarray
    V: np.ndarray

    def reconstruct(self):
        return (self.U * self.s) @ self.V.T


def check_finite(A, name="matrix"):
    data = A.data if sp.issparse(A) else np.asarray(A)
    if not np.all(np.isfinite(data)):
        raise ValueError(f"{name} has non-finite entries")


def sparse_from_triplets(rows, cols, triplets):
    """Build a canonical CSR matrix from ``(i, j, value)`` triplets.

    Repeated ``(i, j)`` pairs are summed, so the result holds each
    position at most once.
    """
    triplets = list(triplets)
    if triplets:
        i, j, v = (np.asarray(t) for t in zip(*triplets))
    else:
        i = j = np.zeros(0, dtype=int)
        v = np.zeros(0)
    if i.size and (i.min() < 0 or i.max() >= rows or j.min() < 0 or j.max() >= cols):
        raise DimensionError(f"triplet index outside a {rows}x{cols} matrix")
    A = sp.coo_matrix((v.astype(float), (i, j)), shape=(rows, cols)).tocsr()
    A.sum_duplicates()
    check_finite(A)
    return A


def _residuals(A, res):
    AV = A @ res.V
    return np.linalg.norm(AV - res.U * res.s, axis=0)


def truncated_svd(A, k, tol=1e-10, maxiter=None):
    """The ``k`` dominant singular triplets of a dense or sparse matrix.

    Dense input goes through a full thin SVD and is truncated. Sparse input
    uses ARPACK's implicitly restarted Lanczos iteration and the relative
    residual ``||A v_i - s_i u_i|| / s_1`` is checked against ``tol``.

    Raises
    ------
    DimensionError
        ``k`` outside ``[1, min(A.shape)]``.
    ConvergenceError
        The sparse path missed the residual contract; ``.residual`` holds
        the worst relative residual reached.
    """
    m, n = A.shape
    if not 1 <= k <= min(m, n):
        raise DimensionError(f"k={k} outside [1, {min(m, n)}] for a {m}x{n} matrix")
    if tol <= 0:
        raise ValueError("tol must be positive")
    check_finite(A)

    if not sp.issparse(A) or k >= min(m, n) - 1:
        dense = A.toarray() if sp.issparse(A) else np.asarray(A, dtype=float)
        U, s, Vt = np.linalg.svd(dense, full_matrices=False)
        return SvdResult(U[:, :k], s[:k], Vt[:k].T)

    A = A.tocsr().astype(float)
    worst = np.inf
    # ARPACK stops on its own eigenvalue tolerance; widen the Krylov space
    # once if the triplet residuals do not meet ours.
    for ncv in (None, min(min(m, n), max(4 * k + 1, 40))):
        try:
            U, s, Vt = svds(A, k=k, ncv=ncv, tol=tol * 1e-2, maxiter=maxiter,
                            solver="arpack", random_state=0)
        except Exception as exc:  # ArpackNoConvergence and friends
            last = exc
            continue
        order = np.argsort(s)[::-1]
        res = SvdResult(U[:, order], s[order], Vt[order].T)
        scale = res.s[0] if res.s[0] > 0 else 1.0
        worst = float(np.max(_residuals(A, res)) / scale)
        if worst <= tol:
            return res
    if np.isinf(worst):
        raise ConvergenceError(f"sparse SVD failed: {last}", residual=worst)
    raise ConvergenceError(
        f"sparse SVD residual {worst:.3e} above tol {tol:.1e}", residual=worst)


def singular_values(A):
    A = A.toarray() if sp.issparse(A) else np.asarray(A, dtype=float)
    if A.size == 0:
        return np.zeros(0)
    return np.linalg.svd(A, compute_uv=False)


def rank_threshold(s, shape):
    """Relative rank cutoff ``max(m, n) * eps * s_1``."""
    s1 = s[0] if len(s) else 0.0
    return max(shape) * np.finfo(float).eps * s1


def numeric_rank(A, tol=None):
    """Number of singular values above a threshold.

    ``tol=None`` selects the relative policy ``max(m, n) * eps * s_1``;
    a number is used as an absolute threshold.
    """
    check_finite(A)
    s = singular_values(A)
    thresh = rank_threshold(s, A.shape) if tol is None else tol
    return int(np.sum(s > thresh))


def full_spectrum(A):
    """Singular values of ``A`` padded with zeros to length ``cols``."""
    s = singular_values(A)
    return np.concatenate([s, np.zeros(A.shape[1] - len(s))])


def gap_ratio(spectrum, d):
    """``s[-d] / s[-d-1]``: largest kept over smallest discarded value.

    Values near 0 mean a clean d-dimensional (near-)nullspace. If the
    discarded value is itself at rounding level the split is meaningless and
    1.0 is returned.
    """
    spectrum = np.asarray(spectrum)
    if d >= len(spectrum):
        return 0.0
    kept, dropped = spectrum[-d], spectrum[-d - 1]
    floor = len(spectrum) * np.finfo(float).eps * spectrum[0] * 10
    if dropped <= floor:
        return 1.0
    return float(kept / dropped)


def nullspace_basis(A, d, full_output=False):
    """Orthonormal basis of the ``d`` right singular vectors of smallest sigma.

    This is a fixed-width rule, not a thresholded kernel: the caller says how
    many directions to keep and can read the spectrum to judge whether the
    split is clean.

    Parameters
    ----------
    A : ndarray, (m, n)
    d : int
        Basis width, ``1 <= d <= n``.
    full_output : bool
        Also return the length-``n`` singular spectrum (zero padded when
        ``m < n``).
    """
    A = A.toarray() if sp.issparse(A) else np.asarray(A, dtype=float)
    m, n = A.shape
    if not 1 <= d <= n:
        raise DimensionError(f"nullspace width {d} outside [1, {n}]")
    check_finite(A)
    if m > n:
        # Tall: an R factor has the same singular values and right vectors.
        A = np.linalg.qr(A, mode="r")
    _, s, Vt = np.linalg.svd(A, full_matrices=True)
    spectrum = np.concatenate([s, np.zeros(n - len(s))])
    basis = Vt[n - d:].T
    if full_output:
        return basis, spectrum
    return basis


def orth(A, rank=None):
    """Orthonormal basis for ``range(A)``; numeric rank unless ``rank`` given."""
    A = A.toarray() if sp.issparse(A) else np.asarray(A, dtype=float)
    U, s, _ = np.linalg.svd(A, full_matrices=False)
    if rank is None:
        rank = int(np.sum(s > rank_threshold(s, A.shape)))
    return U[:, :rank]


def _check_pair(B1, B2, same_dim):
    B1 = np.atleast_2d(np.asarray(B1, dtype=float).T).T
    B2 = np.atleast_2d(np.asarray(B2, dtype=float).T).T
    if B1.shape[0] != B2.shape[0]:
        raise DimensionError(f"ambient dims differ: {B1.shape[0]} vs {B2.shape[0]}")
    if same_dim and B1.shape[1] != B2.shape[1]:
        raise DimensionError(f"subspace dims differ: {B1.shape[1]} vs {B2.shape[1]}")
    return B1, B2


def subspace_angle(B1, B2):
    """``||P1 - P2||_2`` for two equal-dimension orthonormal bases.

    Equals the sine of the largest principal angle. Evaluated as the
    spectral norm of ``(I - P1) B2``, which stays accurate for tiny angles.
    """
    B1, B2 = _check_pair(B1, B2, same_dim=True)
    if B1.shape[1] == 0:
        return 0.0
    resid = B2 - B1 @ (B1.T @ B2)
    return float(min(1.0, np.linalg.norm(resid, 2)))


def principal_angles(B1, B2):
    """Principal angles (radians, ascending) between two orthonormal bases."""
    B1, B2 = _check_pair(B1, B2, same_dim=False)
    cos = np.linalg.svd(B1.T @ B2, compute_uv=False)
    return np.sort(np.arccos(np.clip(cos, -1.0, 1.0)))
