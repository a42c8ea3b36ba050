"""Generative multi-view model ``X_n = [M, C_n] S_n^T`` and noise injection."""

import math
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse as sp

from .errors import DegenerateSampleError, DimensionError, SignalPowerError
from .linalg import numeric_rank

MAX_RETRIES = 8


@dataclass(frozen=True)
class ModelDims:
    """Sizes of the model.

    Attributes
    ----------
    I : int
        Number of entities (rows of every view).
    R : int
        Dimension of the common subspace.
    L : tuple of int
        Individual dimensions ``L_n``, one per view.
    K : tuple of int or None
        Feature dimensions ``K_n``. ``None`` lets :func:`synthesize` derive
        them from the generation mode.
    """

    I: int
    R: int
    L: tuple
    K: tuple = None

    def __post_init__(self):
        object.__setattr__(self, "L", tuple(int(v) for v in self.L))
        if self.K is not None:
            object.__setattr__(self, "K", tuple(int(v) for v in self.K))
        if self.N < 2:
            raise DimensionError("need at least two views")
        if self.R < 1 or self.I < 1:
            raise DimensionError("R and I must be positive")
        if min(self.L) < 0:
            raise DimensionError("individual dimensions must be non-negative")
        if self.K is not None:
            if len(self.K) != self.N:
                raise DimensionError(f"{len(self.K)} feature dims for {self.N} views")
            if min(self.K) < 1:
                raise DimensionError("feature dimensions must be positive")

    @classmethod
    def uniform(cls, I, R, L, N, K=None):
        return cls(I, R, (L,) * N, None if K is None else (K,) * N)

    @property
    def N(self):
        return len(self.L)

    @property
    def signal_ranks(self):
        return tuple(self.R + l for l in self.L)

    def subset(self, n):
        """Dims of the first ``n`` views."""
        return ModelDims(self.I, self.R, self.L[:n], None if self.K is None else self.K[:n])


@dataclass
class GccaModel:
    """Ground-truth factors; ``S[n]`` is ``K_n x (R + L_n)``."""

    dims: ModelDims
    M: np.ndarray
    C: list
    S: list

    def view(self, n):
        return np.hstack([self.M, self.C[n]]) @ self.S[n].T

    def views(self):
        return ViewSet(self.dims, [self.view(n) for n in range(self.dims.N)])


@dataclass
class ViewSet:
    """Observed views, each ``I x K_n`` (dense ndarray or scipy sparse)."""

    dims: ModelDims
    X: list
    signal_rank: list = None

    def __post_init__(self):
        if self.signal_rank is None:
            self.signal_rank = list(self.dims.signal_ranks)
        if len(self.X) != self.dims.N:
            raise DimensionError(f"{len(self.X)} views for N={self.dims.N}")
        for n, X in enumerate(self.X):
            if X.shape[0] != self.dims.I:
                raise DimensionError(f"view {n + 1} has {X.shape[0]} rows, expected {self.dims.I}")
            if self.dims.K is not None and X.shape[1] != self.dims.K[n]:
                raise DimensionError(f"view {n + 1} has {X.shape[1]} columns, expected {self.dims.K[n]}")

    def __len__(self):
        return len(self.X)

    def subset(self, n):
        return ViewSet(self.dims.subset(n), self.X[:n], self.signal_rank[:n])


@dataclass
class NoiseRecord:
    W: list
    target_snr_db: float
    seed: int


def _rng(seed, *key):
    # One independent PCG64 stream per (seed, key...) so each factor can be
    # regenerated on its own.
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, *key])))


def resolve_feature_dims(dims, mode="full_rank", k_factor=2.0):
    """Feature dims implied by the generation mode.

    ``full_rank`` keeps ``dims.K`` when given (each ``K_n >= R + L_n``) and
    otherwise uses ``K_n = R + L_n``. ``low_rank`` sets
    ``K_n = ceil(k_factor * (R + L_n))``.
    """
    ranks = dims.signal_ranks
    if mode == "full_rank":
        K = dims.K if dims.K is not None else ranks
        if any(k < r for k, r in zip(K, ranks)):
            raise DimensionError("full_rank mode needs K_n >= R + L_n")
    elif mode == "low_rank":
        if not k_factor > 1:
            raise DimensionError("low_rank mode needs k_factor > 1")
        K = tuple(math.ceil(k_factor * r) for r in ranks)
        if dims.K is not None and tuple(dims.K) != K:
            raise DimensionError(f"low_rank mode implies K={K}, got {dims.K}")
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return replace(dims, K=tuple(K))


def synthesize(dims, seed, mode="full_rank", k_factor=2.0):
    """Draw Gaussian factors and form noiseless views.

    ``M``, every ``C_n`` and every ``S_n`` have i.i.d. standard normal
    entries. Samples where some ``[M, C_n]`` or ``S_n`` is rank deficient
    (a probability-zero event) are redrawn from a derived seed.

    Returns
    -------
    model : GccaModel
    views : ViewSet
    """
    dims = resolve_feature_dims(dims, mode, k_factor)
    if any(r > dims.I for r in dims.signal_ranks):
        raise DimensionError("R + L_n exceeds I; [M, C_n] cannot have full column rank")
    for attempt in range(MAX_RETRIES):
        M = _rng(seed, attempt, 0).standard_normal((dims.I, dims.R))
        C = [_rng(seed, attempt, 1, n).standard_normal((dims.I, l)) for n, l in enumerate(dims.L)]
        S = [_rng(seed, attempt, 2, n).standard_normal((k, r))
             for n, (k, r) in enumerate(zip(dims.K, dims.signal_ranks))]
        model = GccaModel(dims, M, C, S)
        if _full_rank(model):
            return model, model.views()
    raise DegenerateSampleError(f"rank-deficient factors after {MAX_RETRIES} draws")


def _full_rank(model):
    for n, r in enumerate(model.dims.signal_ranks):
        if numeric_rank(np.hstack([model.M, model.C[n]])) != r:
            return False
        if numeric_rank(model.S[n]) != r:
            return False
    return True


def _fro(X):
    return sp.linalg.norm(X, "fro") if sp.issparse(X) else np.linalg.norm(X, "fro")


def measure_snr(signal, noise):
    """``20 log10(sum_n ||X_n||_F / sum_n ||W_n||_F)`` in dB; ``inf`` for zero noise."""
    X = signal.X if isinstance(signal, ViewSet) else signal
    if len(X) != len(noise):
        raise DimensionError("signal and noise view counts differ")
    for n, (x, w) in enumerate(zip(X, noise)):
        if x.shape != w.shape:
            raise DimensionError(f"view {n + 1}: noise shape {w.shape} != {x.shape}")
    sig = sum(_fro(x) for x in X)
    nse = sum(_fro(w) for w in noise)
    if nse == 0:
        return math.inf
    if sig == 0:
        return -math.inf
    return 20 * math.log10(sig / nse)


def add_noise(views, snr_db, seed):
    """Add white Gaussian noise at an aggregate SNR.

    All noise matrices share one scale factor, chosen so that
    ``measure_snr(views, W) == snr_db`` up to rounding.
    """
    if not math.isfinite(snr_db):
        raise ValueError("snr_db must be finite; use the noiseless views directly")
    sig = sum(_fro(x) for x in views.X)
    if sig == 0:
        raise SignalPowerError("all views are zero")
    W = [_rng(seed, 3, n).standard_normal(x.shape) for n, x in enumerate(views.X)]
    scale = sig / sum(np.linalg.norm(w, "fro") for w in W) * 10 ** (-snr_db / 20)
    W = [scale * w for w in W]
    B = [(x.toarray() if sp.issparse(x) else x) + w for x, w in zip(views.X, W)]
    noisy = ViewSet(views.dims, B, list(views.signal_rank))
    return noisy, NoiseRecord(W, float(snr_db), seed)


@dataclass
class Reductions:
    dropped_M: list = field(default_factory=list)
    dropped_C: dict = field(default_factory=dict)

    @property
    def count(self):
        return len(self.dropped_M) + sum(len(v) for v in self.dropped_C.values())


def _coeffs(B, c, tol):
    """Least-squares coefficients of ``c`` in ``range(B)``, or None if outside."""
    if B.shape[1] == 0:
        return None if np.linalg.norm(c) > 0 else np.zeros(0)
    beta, *_ = np.linalg.lstsq(B, c, rcond=None)
    if np.linalg.norm(B @ beta - c) <= tol * max(np.linalg.norm(c), np.finfo(float).tiny):
        return beta
    return None


def canonicalize_factors(model, tol=1e-10):
    """Rewrite the factors so that every ``[M, C_n]`` has full column rank.

    Columns are scanned in ascending order. A column of ``M`` that is a
    combination of earlier kept ``M`` columns is dropped and its loading row
    folded into those columns' loadings in every ``S_n``. Then, per view, a
    column of ``C_n`` lying in the span of ``M`` and the earlier kept
    ``C_n`` columns is dropped the same way. Views are unchanged up to
    rounding.

    Returns
    -------
    model : GccaModel
    reductions : Reductions
        Indices (0-based, into the input factors) of dropped columns.
    """
    dims = model.dims
    red = Reductions()
    # S columns are the loadings of [M, C_n]; work on copies.
    S = [s.astype(float).copy() for s in model.S]

    keep_m = []
    for j in range(dims.R):
        beta = _coeffs(model.M[:, keep_m], model.M[:, j], tol) if keep_m else (
            None if np.linalg.norm(model.M[:, j]) > 0 else np.zeros(0))
        if beta is None:
            keep_m.append(j)
            continue
        red.dropped_M.append(j)
        for s in S:
            s[:, keep_m] += np.outer(s[:, j], beta)
    if not keep_m:
        # An all-zero M has no basis; keep one column so R stays >= 1.
        keep_m = [0]
        red.dropped_M.remove(0)
    M = model.M[:, keep_m]

    C_out, S_out, L_out = [], [], []
    for n in range(dims.N):
        s = S[n]
        C = model.C[n]
        cols = [*keep_m]
        keep_c = []
        for t in range(C.shape[1]):
            B = np.hstack([M, C[:, keep_c]])
            beta = _coeffs(B, C[:, t], tol)
            if beta is None:
                keep_c.append(t)
                continue
            red.dropped_C.setdefault(n, []).append(t)
            target = cols + [dims.R + q for q in keep_c]
            s[:, target] += np.outer(s[:, dims.R + t], beta)
        C_out.append(C[:, keep_c])
        S_out.append(s[:, cols + [dims.R + q for q in keep_c]])
        L_out.append(len(keep_c))

    if red.count == 0:
        return model, red
    new_dims = ModelDims(dims.I, len(keep_m), tuple(L_out), dims.K)
    return GccaModel(new_dims, M, C_out, S_out), red
