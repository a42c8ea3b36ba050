"""Monte-Carlo SNR sweeps over synthetic multi-view models.

Every cell ``(method, n_views, snr_db, trial)`` draws its model from
``derive_seed(base_seed, trial)`` and its noise from
``derive_seed(base_seed, trial, snr_index)``. Noise is added to all N views
and methods see the first ``n_views`` of them, so methods and view subsets in
one trial share the exact same data.
"""

import csv
import json
import math
import re
import statistics
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .baselines import cca_two_view, maxvar
from .errors import DimensionError
from .linalg import orth, subspace_angle
from .model import ModelDims, add_noise, synthesize
from .racing import RacingConfig, racing

METHODS = ("racing", "maxvar", "maxvar_full", "cca2")
CSV_COLUMNS = ("method", "n_views", "snr_db", "trial", "angle", "runtime_ms", "gap_ratio", "warnings")
PLOT_COLUMNS = ("method", "n_views", "snr_db", "count", "mean_angle", "median_angle", "std_angle")


class ConfigError(ValueError):
    """Schema violation in an experiment config; message names the field."""


class ParseError(ValueError):
    """Malformed results CSV; message names the row."""


def derive_seed(base_seed, *key):
    """Mix ``base_seed`` with integer keys through ``numpy.random.SeedSequence``.

    Returns the first 32-bit word of the sequence state, which is stable
    across platforms and numpy versions.
    """
    ss = np.random.SeedSequence([int(base_seed), *map(int, key)])
    return int(ss.generate_state(1, dtype=np.uint32)[0])


def _parse_mode(raw, k_factor):
    if isinstance(raw, dict):
        if list(raw) != ["low_rank"]:
            raise ConfigError(f"field 'mode': expected 'full_rank' or {{'low_rank': k}}, got {raw!r}")
        return "low_rank", float(raw["low_rank"])
    if not isinstance(raw, str):
        raise ConfigError(f"field 'mode': expected a string, got {raw!r}")
    m = re.fullmatch(r"low_rank(?:\(([\d.]+)\))?", raw)
    if m:
        return "low_rank", float(m.group(1)) if m.group(1) else float(k_factor)
    if raw == "full_rank":
        return "full_rank", float(k_factor)
    raise ConfigError(f"field 'mode': unknown mode {raw!r}")


def _per_view(value, N, name):
    if value is None:
        return None
    if isinstance(value, int):
        return (value,) * N
    if isinstance(value, list) and all(isinstance(v, int) for v in value):
        if len(value) != N:
            raise ConfigError(f"field 'dims.{name}': {len(value)} entries for N={N}")
        return tuple(value)
    raise ConfigError(f"field 'dims.{name}': expected an int or a list of ints, got {value!r}")


@dataclass
class ExperimentConfig:
    dims: ModelDims
    mode: str = "full_rank"
    k_factor: float = 2.0
    snr_grid_db: list = field(default_factory=lambda: [0.0, 10.0, 20.0, 30.0])
    trials: int = 10
    methods: list = field(default_factory=lambda: ["racing"])
    view_subsets: list = field(default_factory=lambda: [2])
    base_seed: int = 0

    def __post_init__(self):
        if self.trials < 1:
            raise ConfigError("field 'trials': must be >= 1")
        for m in self.methods:
            if m not in METHODS:
                raise ConfigError(f"field 'methods': unknown method {m!r}; choose from {METHODS}")
        for n in self.view_subsets:
            if not 2 <= n <= self.dims.N:
                raise ConfigError(f"field 'view_subsets': {n} not in [2, N={self.dims.N}]")
        if "cca2" in self.methods and 2 not in self.view_subsets:
            raise ConfigError("field 'methods': cca2 needs view subset 2")
        if not self.snr_grid_db:
            raise ConfigError("field 'snr_grid_db': empty")
        for s in self.snr_grid_db:
            if not math.isfinite(s):
                raise ConfigError(f"field 'snr_grid_db': non-finite value {s}")

    @classmethod
    def from_dict(cls, raw):
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        known = {"dims", "mode", "k_factor", "snr_grid_db", "trials", "methods",
                 "view_subsets", "base_seed"}
        extra = set(raw) - known
        if extra:
            raise ConfigError(f"unknown field(s) {sorted(extra)}")
        if "dims" not in raw:
            raise ConfigError("field 'dims': missing")
        d = raw["dims"]
        if not isinstance(d, dict):
            raise ConfigError("field 'dims': expected an object")
        for key in ("I", "R", "L"):
            if key not in d:
                raise ConfigError(f"field 'dims.{key}': missing")
        N = d.get("N", len(d["L"]) if isinstance(d["L"], list) else None)
        if not isinstance(N, int):
            raise ConfigError("field 'dims.N': missing (needed when L is a single number)")
        for key in ("I", "R"):
            if not isinstance(d[key], int):
                raise ConfigError(f"field 'dims.{key}': expected an int, got {d[key]!r}")
        try:
            dims = ModelDims(d["I"], d["R"], _per_view(d["L"], N, "L"), _per_view(d.get("K"), N, "K"))
        except DimensionError as exc:
            raise ConfigError(f"field 'dims': {exc}") from exc
        mode, k_factor = _parse_mode(raw.get("mode", "full_rank"), raw.get("k_factor", 2.0))
        kwargs = {k: raw[k] for k in ("snr_grid_db", "trials", "methods", "view_subsets", "base_seed")
                  if k in raw}
        for key in ("trials", "base_seed"):
            if key in kwargs and not isinstance(kwargs[key], int):
                raise ConfigError(f"field '{key}': expected an int")
        for key in ("snr_grid_db", "methods", "view_subsets"):
            if key in kwargs and not isinstance(kwargs[key], list):
                raise ConfigError(f"field '{key}': expected a list")
        if "snr_grid_db" in kwargs:
            kwargs["snr_grid_db"] = [float(s) for s in kwargs["snr_grid_db"]]
        return cls(dims=dims, mode=mode, k_factor=k_factor, **kwargs)

    @classmethod
    def from_json(cls, path):
        try:
            raw = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: line {exc.lineno}: {exc.msg}") from exc
        return cls.from_dict(raw)

    def to_dict(self):
        d = {"I": self.dims.I, "R": self.dims.R, "L": list(self.dims.L), "N": self.dims.N}
        if self.dims.K is not None:
            d["K"] = list(self.dims.K)
        return {"dims": d, "mode": self.mode, "k_factor": self.k_factor,
                "snr_grid_db": list(self.snr_grid_db), "trials": self.trials,
                "methods": list(self.methods), "view_subsets": list(self.view_subsets),
                "base_seed": self.base_seed}


@dataclass
class ResultRow:
    method: str
    n_views: int
    snr_db: float
    trial: int
    angle: float
    runtime_ms: float
    gap_ratio: float = float("nan")
    warnings: list = field(default_factory=list)

    def validate(self):
        if not (math.isnan(self.angle) or 0.0 <= self.angle <= 1.0):
            raise ValueError(f"angle {self.angle} outside [0, 1]")
        if self.runtime_ms < 0:
            raise ValueError("negative runtime")

    def to_csv(self):
        return [self.method, self.n_views, repr(float(self.snr_db)), self.trial,
                _fmt(self.angle), f"{self.runtime_ms:.3f}", _fmt(self.gap_ratio),
                ";".join(self.warnings)]


def _fmt(x):
    return "" if math.isnan(x) else repr(float(x))


def run_method(method, views, R):
    """Run one method on a view set; returns ``(M_hat, gap_ratio, warnings)``."""
    if method == "racing":
        res = racing(views, RacingConfig(R, [r - R for r in views.signal_rank]), warn=False)
        return res.M_hat, res.gap_ratio, res.warnings
    if method == "maxvar":
        return maxvar(views, R, whitening="signal").M_hat, float("nan"), []
    if method == "maxvar_full":
        return maxvar(views, R, whitening="full").M_hat, float("nan"), []
    if method == "cca2":
        if len(views) != 2:
            raise ValueError("cca2 takes exactly two views")
        res = cca_two_view(views.X[0], views.X[1], R, signal_ranks=views.signal_rank)
        return res.M_hat, float("nan"), []
    raise ValueError(f"unknown method {method!r}")


def _trial_rows(config, trial):
    dims = config.dims
    model, views = synthesize(dims, derive_seed(config.base_seed, trial),
                              mode=config.mode, k_factor=config.k_factor)
    truth = orth(model.M)
    rows = []
    for s_idx, snr in enumerate(config.snr_grid_db):
        noisy, _ = add_noise(views, snr, derive_seed(config.base_seed, trial, s_idx))
        for method in config.methods:
            for n in config.view_subsets:
                if method == "cca2" and n != 2:
                    continue
                t0 = time.perf_counter()
                try:
                    M_hat, gap, notes = run_method(method, noisy.subset(n), dims.R)
                    angle = subspace_angle(M_hat, truth)
                except Exception as exc:  # a failed cell must not stop the sweep
                    angle, gap, notes = float("nan"), float("nan"), [f"error: {exc}"]
                ms = (time.perf_counter() - t0) * 1e3
                rows.append(ResultRow(method, n, snr, trial, angle, ms, gap, list(notes)))
    return rows


def row_key(row):
    return (METHODS.index(row.method), row.n_views, row.snr_db, row.trial)


def sweep(config, threads=1):
    """All result rows of a config, in canonical (method, n_views, snr, trial) order."""
    if threads == 0:
        import os

        threads = os.cpu_count() or 1
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            parts = list(pool.map(lambda t: _trial_rows(config, t), range(config.trials)))
    else:
        parts = [_trial_rows(config, t) for t in range(config.trials)]
    rows = [r for part in parts for r in part]
    rows.sort(key=row_key)
    return rows


def write_rows(path, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for row in rows:
            row.validate()
            w.writerow(row.to_csv())


def read_rows(path):
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            return rows
        if tuple(header) != CSV_COLUMNS:
            raise ParseError(f"row 1: expected header {','.join(CSV_COLUMNS)}")
        for lineno, rec in enumerate(reader, start=2):
            if len(rec) != len(CSV_COLUMNS):
                raise ParseError(f"row {lineno}: expected {len(CSV_COLUMNS)} fields, got {len(rec)}")
            try:
                row = ResultRow(
                    method=rec[0], n_views=int(rec[1]), snr_db=float(rec[2]), trial=int(rec[3]),
                    angle=float(rec[4]) if rec[4] else float("nan"),
                    runtime_ms=float(rec[5]),
                    gap_ratio=float(rec[6]) if rec[6] else float("nan"),
                    warnings=rec[7].split(";") if rec[7] else [],
                )
            except ValueError as exc:
                raise ParseError(f"row {lineno}: {exc}") from exc
            rows.append(row)
    return rows


def aggregate(rows):
    """Mean/median/population-std of finite angles per (method, n_views, snr)."""
    groups = {}
    for r in rows:
        groups.setdefault((r.method, r.n_views, r.snr_db), []).append(r.angle)
    out = []
    for (method, n, snr), angles in sorted(groups.items()):
        vals = [a for a in angles if not math.isnan(a)]
        if vals:
            stats = (statistics.fmean(vals), statistics.median(vals), statistics.pstdev(vals))
        else:
            stats = (float("nan"),) * 3
        out.append({"method": method, "n_views": n, "snr_db": snr, "count": len(vals),
                    "mean_angle": stats[0], "median_angle": stats[1], "std_angle": stats[2]})
    return out


def write_plotdata(path, groups):
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=PLOT_COLUMNS, lineterminator="\n")
        w.writeheader()
        for g in groups:
            w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in g.items()})


def medians(rows):
    """``{(method, n_views, snr_db): median angle}`` for quick checks."""
    return {(g["method"], g["n_views"], g["snr_db"]): g["median_angle"] for g in aggregate(rows)}
