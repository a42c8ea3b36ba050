"""Algebraic checks of when the common subspace is identifiable.

Ranks are decided by :func:`gcca.linalg.numeric_rank` with the relative
policy; "full column rank" means rank equal to the column count.
"""

import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .errors import DimensionError
from .linalg import numeric_rank, rank_threshold, singular_values


@dataclass
class GammaMatrix:
    matrix: np.ndarray
    N: int
    I: int
    R: int
    L: tuple

    @property
    def shape(self):
        return self.matrix.shape


@dataclass
class Theorem1Result:
    z_dim: int
    holds: bool
    s_ranks: list = field(default_factory=list)


@dataclass
class Theorem2Result:
    gamma_rank: int
    gamma_full_rank: bool
    s_ranks: list
    holds: bool
    gamma_margin: float = float("nan")
    s_margins: list = field(default_factory=list)


@dataclass
class NecessaryResult:
    row_bound_ok: bool
    col_bounds_ok: list
    min_rows: int
    max_common_dim: int

    @property
    def holds(self):
        return self.row_bound_ok and all(ok is not False for ok in self.col_bounds_ok)


def _as_list(C):
    # A 1-D entry is a single column.
    return [np.asarray(c, dtype=float).reshape(len(c), -1) for c in C]


def _check_rows(M, C):
    I = M.shape[0]
    for n, c in enumerate(C):
        if c.shape[0] != I:
            raise DimensionError(f"C^({n + 1}) has {c.shape[0]} rows, M has {I}")
    if len(C) < 2:
        raise DimensionError("need at least two views")
    return I


def _normalize_columns(A):
    norms = np.linalg.norm(A, axis=0)
    norms[norms == 0] = 1.0
    return A / norms


def _margin(A):
    """Smallest nonzero-needed singular value over the rank threshold."""
    s = singular_values(A)
    if A.shape[1] == 0:
        return math.inf
    if len(s) < A.shape[1]:
        return 0.0
    thresh = rank_threshold(s, A.shape)
    return float(s[-1] / thresh) if thresh > 0 else 0.0


def build_gamma(M, C):
    """Staircase matrix whose full column rank certifies identifiability.

    Row block ``j`` (views 2..N) is ``C_1`` in the leading slot and
    ``[-M, -C_j]`` in slot j; shape ``(N-1) I x ((N-1) R + sum L_n)``.
    """
    M = np.asarray(M, dtype=float)
    C = _as_list(C)
    I = _check_rows(M, C)
    N, R = len(C), M.shape[1]
    L = tuple(c.shape[1] for c in C)
    widths = [L[0]] + [R + l for l in L[1:]]
    off = np.concatenate([[0], np.cumsum(widths)]).astype(int)
    G = np.zeros(((N - 1) * I, off[-1]))
    for j in range(1, N):
        rows = slice((j - 1) * I, j * I)
        G[rows, :L[0]] = C[0]
        G[rows, off[j]:off[j] + R] = -M
        G[rows, off[j] + R:off[j + 1]] = -C[j]
    return GammaMatrix(G, N, I, R, L)


def stacked_difference(views):
    """Block rows ``[X_1, 0, .., -X_j, .., 0]`` for j = 2..N."""
    views = [np.asarray(v, dtype=float) for v in views]
    if len(views) < 2:
        raise DimensionError("need at least two views")
    I = views[0].shape[0]
    for n, v in enumerate(views):
        if v.shape[0] != I:
            raise DimensionError(f"view {n + 1} has {v.shape[0]} rows, view 1 has {I}")
    widths = [v.shape[1] for v in views]
    off = np.concatenate([[0], np.cumsum(widths)]).astype(int)
    G = np.zeros(((len(views) - 1) * I, off[-1]))
    for j in range(1, len(views)):
        rows = slice((j - 1) * I, j * I)
        G[rows, :widths[0]] = views[0]
        G[rows, off[j]:off[j + 1]] = -views[j]
    return G


def intersection_dim(views):
    """``dim(cap_n range(X_n)) = sum_n rank(X_n) - rank(stacked_difference)``."""
    views = [np.asarray(v.toarray() if hasattr(v, "toarray") else v, dtype=float) for v in views]
    G = stacked_difference(views)
    return sum(numeric_rank(v) for v in views) - numeric_rank(G)


def pairwise_kernel_system(M, C):
    """One row block per pair ``a < b``: ``[M, C_a]`` in slot a, ``-[M, C_b]`` in slot b."""
    M = np.asarray(M, dtype=float)
    C = _as_list(C)
    I = _check_rows(M, C)
    blocks = [np.hstack([M, c]) for c in C]
    widths = [b.shape[1] for b in blocks]
    off = np.concatenate([[0], np.cumsum(widths)]).astype(int)
    pairs = list(combinations(range(len(C)), 2))
    A = np.zeros((len(pairs) * I, off[-1]))
    for p, (a, b) in enumerate(pairs):
        rows = slice(p * I, (p + 1) * I)
        A[rows, off[a]:off[a + 1]] = blocks[a]
        A[rows, off[b]:off[b + 1]] = -blocks[b]
    return A


def _s_ranks(S):
    S = [np.asarray(s, dtype=float) for s in S]
    return [numeric_rank(s) for s in S], [numeric_rank(s) == s.shape[1] for s in S], S


def check_theorem1(M, C, S, R=None):
    """Joint-kernel test: nullity of the pairwise system equals R and every
    ``S_n`` has full column rank.

    Columns are scaled to unit norm before the rank decision, so the verdict
    does not depend on factor scaling.
    """
    M = np.asarray(M, dtype=float)
    R = M.shape[1] if R is None else R
    C = _as_list(C)
    if len(S) != len(C):
        raise DimensionError(f"{len(S)} loading matrices for {len(C)} views")
    for n, (s, c) in enumerate(zip(S, C)):
        if np.shape(s)[1] != M.shape[1] + c.shape[1]:
            raise DimensionError(f"S^({n + 1}) has {np.shape(s)[1]} columns, expected {M.shape[1] + c.shape[1]}")
    A = _normalize_columns(pairwise_kernel_system(M, C))
    z_dim = A.shape[1] - numeric_rank(A)
    ranks, full, _ = _s_ranks(S)
    return Theorem1Result(z_dim=z_dim, holds=(z_dim == R and all(full)), s_ranks=ranks)


def check_theorem2(M, C, S):
    """Full column rank of the staircase matrix and of every ``S_n``."""
    M = np.asarray(M, dtype=float)
    C = _as_list(C)
    if len(S) != len(C):
        raise DimensionError(f"{len(S)} loading matrices for {len(C)} views")
    for n, (s, c) in enumerate(zip(S, C)):
        if np.shape(s)[1] != M.shape[1] + c.shape[1]:
            raise DimensionError(f"S^({n + 1}) has {np.shape(s)[1]} columns, expected {M.shape[1] + c.shape[1]}")
    G = _normalize_columns(build_gamma(M, C).matrix)
    g_rank = numeric_rank(G)
    g_full = g_rank == G.shape[1]
    ranks, full, S = _s_ranks(S)
    return Theorem2Result(
        gamma_rank=g_rank,
        gamma_full_rank=g_full,
        s_ranks=ranks,
        holds=g_full and all(full),
        gamma_margin=_margin(G),
        s_margins=[_margin(s) for s in S],
    )


def min_rows_required(R, L):
    """Smallest I with ``R + sum(L) / (N - 1) <= I``."""
    N = len(L)
    return R + -(-sum(L) // (N - 1))


def max_common_dim(I, L):
    """Largest R with ``R + sum(L) / (N - 1) <= I`` (may be < 1)."""
    N = len(L)
    return I - -(-sum(L) // (N - 1))


def check_necessary(dims):
    """Counting conditions implied by the staircase rank condition.

    ``row_bound_ok`` iff ``R + sum(L)/(N-1) <= I`` (evaluated in integers);
    ``col_bounds_ok[n]`` iff ``R + L_n <= K_n``, or ``None`` when K is unknown.
    """
    N, R, L = dims.N, dims.R, dims.L
    row_ok = (N - 1) * R + sum(L) <= (N - 1) * dims.I
    if dims.K is None:
        cols = [None] * N
    else:
        cols = [R + l <= k for l, k in zip(L, dims.K)]
    return NecessaryResult(row_ok, cols, min_rows_required(R, L), max_common_dim(dims.I, L))


def certificate_factors(I, R, L):
    """Zero-one factors ``M, [C_1, C_2, C_3]`` for ``I = R + 3L/2``, L even.

    ``C_1`` is the first L unit vectors and ``M`` the next R. ``C_2`` and
    ``C_3`` place identity blocks on rows L/2..L (resp. 0..L/2) and on the last
    L/2 rows, so that the staircase matrix is square and nonsingular.
    """
    if L < 0 or L % 2 or R < 1 or 2 * I != 2 * R + 3 * L:
        raise DimensionError(f"need even L >= 0 and I = R + 3L/2; got I={I}, R={R}, L={L}")
    h = L // 2
    E = np.eye(I)
    C1 = E[:, :L]
    M = E[:, L:L + R]
    C2 = np.zeros((I, L))
    C2[h:L, h:L] = np.eye(h)
    C2[L + R:, :h] = np.eye(h)
    C3 = np.zeros((I, L))
    C3[:h, h:L] = np.eye(h)
    C3[L + R:, :h] = np.eye(h)
    return M, [C1, C2, C3]


def certificate_gamma3(I, R, L):
    """Staircase matrix of :func:`certificate_factors`, checked nonsingular."""
    M, C = certificate_factors(I, R, L)
    gamma = build_gamma(M, C)
    rank = numeric_rank(gamma.matrix)
    if rank != gamma.matrix.shape[1]:
        raise RuntimeError(f"certificate has rank {rank} < {gamma.matrix.shape[1]}")
    return gamma


@dataclass
class IdentifiabilityReport:
    necessary: NecessaryResult
    theorem1: Theorem1Result = None
    theorem2: Theorem2Result = None
    intersection_dim: int = None

    def to_dict(self):
        from dataclasses import asdict

        out = {"necessary": asdict(self.necessary)}
        out["necessary"]["holds"] = self.necessary.holds
        if self.theorem1 is not None:
            out["theorem1"] = asdict(self.theorem1)
        if self.theorem2 is not None:
            out["theorem2"] = asdict(self.theorem2)
        if self.intersection_dim is not None:
            out["intersection_dim"] = self.intersection_dim
        return out
