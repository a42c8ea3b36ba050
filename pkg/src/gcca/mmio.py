"""Matrix Market files and on-disk model/factor layouts."""

import json
from pathlib import Path

import numpy as np
import scipy.sparse as sp
from scipy.io import mmread, mmwrite

PRECISION = 17


def write_matrix(path, A):
    """Dense arrays go out in ``array`` format, sparse in ``coordinate``."""
    path = Path(path)
    if sp.issparse(A):
        mmwrite(path, sp.coo_matrix(A), precision=PRECISION)
    else:
        mmwrite(path, np.asarray(A, dtype=float), precision=PRECISION)
    return path


def read_matrix(path):
    """Load a Matrix Market file: ndarray for ``array``, CSR for ``coordinate``."""
    A = mmread(str(path))
    if sp.issparse(A):
        return sp.csr_matrix(A, dtype=float)
    return np.asarray(A, dtype=float)


def write_factors(out_dir, M, C, S=None):
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_matrix(out_dir / "M.mtx", M)
    for n, c in enumerate(C, 1):
        write_matrix(out_dir / f"C_{n}.mtx", c)
    for n, s in enumerate(S or [], 1):
        write_matrix(out_dir / f"S_{n}.mtx", s)


def read_factors(in_dir):
    """Read ``M.mtx``, ``C_1.mtx``.. and, when present, ``S_1.mtx``..

    Returns ``(M, C, S)`` with ``S`` empty if no loading files exist.
    """
    in_dir = Path(in_dir)
    M = read_matrix(in_dir / "M.mtx")
    C, S = [], []
    n = 1
    while (in_dir / f"C_{n}.mtx").exists():
        C.append(read_matrix(in_dir / f"C_{n}.mtx"))
        if (in_dir / f"S_{n}.mtx").exists():
            S.append(read_matrix(in_dir / f"S_{n}.mtx"))
        n += 1
    if not C:
        raise FileNotFoundError(f"no C_1.mtx in {in_dir}")
    if S and len(S) != len(C):
        raise FileNotFoundError(f"{len(S)} S files for {len(C)} C files in {in_dir}")
    return M, C, S


def write_json(path, obj):
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True, default=_jsonable) + "\n")


def _jsonable(x):
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    raise TypeError(f"cannot serialize {type(x).__name__}")
