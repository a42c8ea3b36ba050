"""Range-subspace intersection for GCCA (RACING).

Step 1 takes a rank-(R + L_n) truncated SVD of every view. Step 2 stacks
one row block ``[.. U_a .. -U_b ..]`` per view pair into ``theta`` and keeps
its R trailing right singular vectors ``phi``; each slice ``phi_n`` gives
coefficients with ``U_a phi_a == U_b phi_b`` for all pairs. Step 3 merges the
N per-view estimates ``U_n phi_n`` with one more SVD.
"""

import warnings
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np
import scipy.sparse as sp

from .errors import DimensionError, IllPosedWarning
from .linalg import gap_ratio, nullspace_basis, truncated_svd

ILL_POSED_GAP = 0.5


@dataclass
class RacingConfig:
    """Inputs besides the views.

    ``q_form`` picks the projection maps: ``"inverse"`` returns
    ``Q_n = V_n diag(s_n)^-1 phi_n`` so that ``X_n Q_n = U_n phi_n`` lies in
    the common subspace; ``"literal"`` returns ``V_n phi_n``.
    ``theta_solver`` is ``"dense"`` (QR + SVD of the stacked system) or
    ``"gram"`` (SVD of ``[U_1, ..., U_N]``, which shares right singular
    vectors with theta and never forms it).
    """

    R: int
    L: list
    svd_tol: float = 1e-10
    report_spectra: bool = True
    q_form: str = "inverse"
    normalize_q: bool = False
    theta_solver: str = "dense"

    @property
    def signal_ranks(self):
        return [self.R + l for l in self.L]

    def validate(self, shapes):
        if self.R < 1:
            raise DimensionError("R must be >= 1")
        if len(self.L) != len(shapes):
            raise DimensionError(f"{len(self.L)} individual dims for {len(shapes)} views")
        if len(shapes) < 2:
            raise DimensionError("need at least two views")
        I = shapes[0][0]
        for n, ((rows, cols), r) in enumerate(zip(shapes, self.signal_ranks)):
            if rows != I:
                raise DimensionError(f"view {n + 1} has {rows} rows, view 1 has {I}")
            if r > min(rows, cols):
                raise DimensionError(
                    f"view {n + 1}: signal rank {r} exceeds min(I, K_n) = {min(rows, cols)}")


@dataclass
class RacingResult:
    M_hat: np.ndarray
    Q: list
    theta_spectrum: np.ndarray = None
    view_spectra: list = None
    gap_ratio: float = float("nan")
    warnings: list = field(default_factory=list)

    @property
    def ill_posed(self):
        return any("ill-posed" in w for w in self.warnings)


def slot_offsets(widths):
    """Column offset of each view's slot: ``sum(widths[:n])``."""
    return np.concatenate([[0], np.cumsum(widths)]).astype(int)


def assemble_theta(bases, R=None, L=None, sparse=False):
    """Stack the pairwise difference system over all pairs ``a < b``.

    Row block for ``(a, b)`` (lexicographic order) holds ``+U_a`` in slot a and
    ``-U_b`` in slot b. Slot n has width ``U_n.shape[1]``, which must equal
    ``R + L[n]`` when ``R`` and ``L`` are given.
    """
    if len(bases) < 2:
        raise DimensionError("need at least two bases")
    I = bases[0].shape[0]
    widths = [U.shape[1] for U in bases]
    for n, U in enumerate(bases):
        if U.shape[0] != I:
            raise DimensionError(f"basis {n + 1} has ambient dim {U.shape[0]}, expected {I}")
    if R is not None:
        expect = [R + l for l in L]
        if widths != expect:
            raise DimensionError(f"basis widths {widths} != R + L_n = {expect}")
    off = slot_offsets(widths)
    pairs = list(combinations(range(len(bases)), 2))
    if sparse:
        blocks = [[None] * len(bases) for _ in pairs]
        for p, (a, b) in enumerate(pairs):
            blocks[p][a] = sp.csr_matrix(bases[a])
            blocks[p][b] = sp.csr_matrix(-bases[b])
        for n in range(len(bases)):
            if all(row[n] is None for row in blocks):
                blocks[0][n] = sp.csr_matrix((I, widths[n]))
        return sp.bmat(blocks, format="csr")
    theta = np.zeros((len(pairs) * I, off[-1]))
    for p, (a, b) in enumerate(pairs):
        rows = slice(p * I, (p + 1) * I)
        theta[rows, off[a]:off[a + 1]] = bases[a]
        theta[rows, off[b]:off[b + 1]] = -bases[b]
    return theta


def _theta_nullspace(bases, R, solver):
    if solver == "dense":
        return nullspace_basis(assemble_theta(bases), R, full_output=True)
    if solver == "gram":
        # theta^T theta = N*I - B^T B with B = [U_1, ..., U_N].
        N = len(bases)
        B = np.hstack(bases)
        _, s, Vt = np.linalg.svd(B, full_matrices=True)
        s = np.concatenate([s, np.zeros(B.shape[1] - len(s))])
        spectrum = np.sqrt(np.clip(N - s ** 2, 0, None))[::-1]
        return Vt[:R].T, spectrum
    raise ValueError(f"unknown theta solver {solver!r}")


def racing(views, config, warn=True):
    """Recover the common subspace of N views.

    Parameters
    ----------
    views : ViewSet or list of arrays
        Dense or scipy sparse ``I x K_n`` matrices.
    config : RacingConfig
    warn : bool
        Also raise :class:`IllPosedWarning` through :mod:`warnings`. The
        message is always recorded on the result.

    Returns
    -------
    RacingResult
        ``M_hat`` is ``I x R`` orthonormal. ``gap_ratio`` near 0 means the
        pairwise system had a clean R-dimensional nullspace; at or above 0.5
        the instance is flagged ill-posed (warning on the result and through
        :mod:`warnings`).
    """
    X = list(getattr(views, "X", views))
    config.validate([x.shape for x in X])
    R = config.R

    svds = [truncated_svd(x, r, tol=config.svd_tol) for x, r in zip(X, config.signal_ranks)]
    bases = [s.U for s in svds]

    phi, spectrum = _theta_nullspace(bases, R, config.theta_solver)
    gap = gap_ratio(spectrum, R)

    off = slot_offsets(config.signal_ranks)
    blocks = [phi[off[n]:off[n + 1]] for n in range(len(X))]
    G = np.hstack([U @ b for U, b in zip(bases, blocks)])
    M_hat = np.linalg.svd(G, full_matrices=False)[0][:, :R]

    Q = []
    for res, b in zip(svds, blocks):
        if config.q_form == "inverse":
            q = res.V @ (b / res.s[:, None])
        elif config.q_form == "literal":
            q = res.V @ b
        else:
            raise ValueError(f"unknown q_form {config.q_form!r}")
        Q.append(q)
    if config.normalize_q:
        Q = [q / np.linalg.norm(x @ q, axis=0) for x, q in zip(X, Q)]

    notes = []
    if gap >= ILL_POSED_GAP:
        msg = (f"ill-posed: theta gap ratio {gap:.3g} >= {ILL_POSED_GAP}; "
               f"no clear {R}-dimensional common subspace")
        notes.append(msg)
        if warn:
            warnings.warn(msg, IllPosedWarning, stacklevel=2)

    return RacingResult(
        M_hat=M_hat,
        Q=Q,
        theta_spectrum=spectrum if config.report_spectra else None,
        view_spectra=[s.s for s in svds] if config.report_spectra else None,
        gap_ratio=gap,
        warnings=notes,
    )


def estimate_common_dim(theta_spectrum, tol=1e-10):
    """Number of trailing singular values at or below ``tol * s_1``."""
    s = np.asarray(theta_spectrum, dtype=float)
    if s.size == 0:
        raise ValueError("empty spectrum")
    return int(np.sum(s <= tol * s.max()))
