"""Reference solvers: two-view CCA and the exact MAXVAR solution."""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import DimensionError, RankError
from .linalg import numeric_rank, orth, truncated_svd


@dataclass
class CcaResult:
    Q1: np.ndarray
    Q2: np.ndarray
    correlations: np.ndarray
    M_hat: np.ndarray


@dataclass
class MaxvarResult:
    M_hat: np.ndarray
    Q: list
    eigenvalues: np.ndarray


def _range_svd(X, rank):
    """Rank-``rank`` SVD of a view; ``None`` means its numeric rank."""
    if rank is None:
        rank = numeric_rank(X.toarray() if sp.issparse(X) else X)
    if rank < 1:
        raise RankError("view has rank 0")
    return truncated_svd(X, rank)


def cca_two_view(X1, X2, R, signal_ranks=None):
    """Classical CCA through the SVD of ``U_1^T U_2``.

    ``U_n`` is an orthonormal basis of the rank-``signal_ranks[n]`` part of
    ``X_n`` (numeric rank when omitted). The singular values of ``U_1^T U_2``
    are the canonical correlations and the maps satisfy
    ``(X_n Q_n)^T (X_n Q_n) = I_R`` whenever ``X_n`` has exactly that rank.
    """
    if X1.shape[0] != X2.shape[0]:
        raise DimensionError(f"row counts differ: {X1.shape[0]} vs {X2.shape[0]}")
    ranks = signal_ranks or (None, None)
    f1, f2 = _range_svd(X1, ranks[0]), _range_svd(X2, ranks[1])
    if R > min(len(f1.s), len(f2.s)):
        raise RankError(f"R={R} exceeds view ranks {len(f1.s)}, {len(f2.s)}")
    A, rho, Bt = np.linalg.svd(f1.U.T @ f2.U)
    A, B = A[:, :R], Bt[:R].T
    Q1 = f1.V @ (A / f1.s[:, None])
    Q2 = f2.V @ (B / f2.s[:, None])
    # The canonical variates of both views; their average spans the estimate.
    Z = f1.U @ A + f2.U @ B
    return CcaResult(Q1, Q2, rho[:R], orth(Z, rank=R))


def maxvar(views, R, signal_ranks=None, whitening="signal"):
    """Exact MAXVAR: top-R eigenvectors of ``sum_n U_n U_n^T``.

    Parameters
    ----------
    views : ViewSet or list of arrays
    R : int
    signal_ranks : list of int, optional
        Rank at which each view's range basis is truncated. Defaults to the
        view set's signal ranks under ``whitening="signal"``.
    whitening : {"signal", "full"}
        ``"full"`` uses every direction of each view, ``min(I, K_n)`` of
        them, which is the classical formulation that assumes full-rank views.
    """
    X = list(getattr(views, "X", views))
    if whitening == "full":
        ranks = [min(x.shape) for x in X]
    elif whitening == "signal":
        ranks = signal_ranks if signal_ranks is not None else getattr(views, "signal_rank", None)
        if ranks is None:
            raise ValueError("signal whitening needs signal_ranks")
    else:
        raise ValueError(f"unknown whitening {whitening!r}")
    if len(ranks) != len(X):
        raise DimensionError(f"{len(ranks)} ranks for {len(X)} views")
    if any(R > r for r in ranks):
        raise RankError(f"R={R} exceeds a view rank {ranks}")
    fits = [truncated_svd(x, r) for x, r in zip(X, ranks)]
    # sum U_n U_n^T = B B^T with B = [U_1, ..., U_N]; use the thin SVD of B.
    W, s, _ = np.linalg.svd(np.hstack([f.U for f in fits]), full_matrices=False)
    M_hat = W[:, :R]
    Q = [f.V @ ((f.U.T @ M_hat) / f.s[:, None]) for f in fits]
    return MaxvarResult(M_hat, Q, s ** 2)
