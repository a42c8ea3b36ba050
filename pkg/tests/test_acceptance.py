"""Acceptance criteria, one test each; every test prints a PASS/FAIL line."""

import json
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from gcca.baselines import cca_two_view, maxvar
from gcca.experiment import ExperimentConfig, medians, sweep
from gcca.identifiability import (certificate_gamma3, check_necessary, check_theorem2,
                                  intersection_dim)
from gcca.linalg import numeric_rank, orth, subspace_angle
from gcca.model import ModelDims, synthesize
from gcca.racing import RacingConfig, racing

from conftest import ACCEPTANCE_LINES, pairwise_intersection_dim

ROOT = Path(__file__).resolve().parents[1]


def report(n, ok, detail):
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'} ({detail})"
    ACCEPTANCE_LINES.append(line)
    print("\n" + line)
    assert ok, detail


def load_config(name, **overrides):
    raw = json.loads((ROOT / "configs" / name).read_text())
    raw.update(overrides)
    return ExperimentConfig.from_dict(raw)


def gaussian_views(rng, I, R, L, N):
    M = rng.standard_normal((I, R))
    C = [rng.standard_normal((I, L)) for _ in range(N)]
    S = [rng.standard_normal((R + L, R + L)) for _ in range(N)]
    return M, C, S, [np.hstack([M, c]) @ s.T for c, s in zip(C, S)]


def test_c1_exact_noiseless_recovery():
    dims = ModelDims.uniform(60, 5, 20, 3, K=25)
    worst, slowest = 0.0, 0.0
    for seed in range(20):
        model, views = synthesize(dims, seed)
        t0 = time.perf_counter()
        res = racing(views, RacingConfig(5, [20] * 3))
        slowest = max(slowest, time.perf_counter() - t0)
        worst = max(worst, subspace_angle(res.M_hat, orth(model.M)))
    report(1, worst <= 1e-8 and slowest < 1.0, f"max angle {worst:.2e}, max runtime {slowest:.3f} s")


def test_c2_certificate():
    g = certificate_gamma3(22, 10, 8)
    rank = numeric_rank(g.matrix)
    report(2, g.shape == (44, 44) and rank == 44, f"shape {g.shape}, rank {rank}")


def test_c3_intersection_dim_matches_oracle():
    rng = np.random.default_rng(3)
    t0 = time.perf_counter()
    mismatches = 0
    for _ in range(100):
        I = int(rng.integers(4, 31))
        N = int(rng.integers(2, 5))
        R = int(rng.integers(0, I // 3 + 1))
        M = rng.standard_normal((I, R))
        views = []
        for _ in range(N):
            L = int(rng.integers(0, max(1, (I - R) // 2) + 1))
            C = rng.standard_normal((I, L))
            # Occasionally plant extra overlap between views.
            if L and views and rng.random() < 0.3:
                C[:, 0] = views[-1][:, -1]
            K = R + L + int(rng.integers(0, 3))
            views.append(np.hstack([M, C]) @ rng.standard_normal((K, R + L)).T)
        if intersection_dim(views) != pairwise_intersection_dim(views):
            mismatches += 1
    elapsed = time.perf_counter() - t0
    report(3, mismatches == 0 and elapsed < 10, f"{mismatches} mismatches, {elapsed:.2f} s")


def test_c4_boundary_arithmetic():
    got = [check_necessary(ModelDims.uniform(1000, 100, 100, N)).min_rows for N in (2, 3, 5)]
    passing = [R for R in range(1, 120) if check_necessary(ModelDims.uniform(200, R, 100, 5)).holds]
    ok = got == [300, 250, 225] and passing == list(range(1, 76))
    report(4, ok, f"min rows {got}, passing R up to {max(passing)}")


def test_c5_gcca_vs_cca_gap():
    I, R, L = 250, 100, 100
    good3, bad2 = 0, 0
    for seed in range(20):
        rng = np.random.default_rng(seed)
        M, C, S, views = gaussian_views(rng, I, R, L, 3)
        t2 = check_theorem2(M, C, S)
        res = racing(views, RacingConfig(R, [L] * 3), warn=False)
        if t2.holds and subspace_angle(res.M_hat, orth(M)) <= 1e-6:
            good3 += 1
        t2_two = check_theorem2(M, C[:2], S[:2])
        if intersection_dim(views[:2]) > R and not t2_two.holds:
            bad2 += 1
    report(5, good3 >= 19 and bad2 == 20, f"N=3 ok {good3}/20, N=2 unidentifiable {bad2}/20")


@pytest.fixture(scope="module")
def fig1_medians():
    config = load_config("fig1_desk.json", snr_grid_db=[10, 20, 30], methods=["racing", "maxvar"])
    t0 = time.perf_counter()
    rows = sweep(config)
    return medians(rows), time.perf_counter() - t0


def test_c6_fig1_trend(fig1_medians):
    med, elapsed = fig1_medians
    six20, two20, six30 = med["racing", 6, 20.0], med["racing", 2, 20.0], med["racing", 6, 30.0]
    ok = six20 <= 0.5 and two20 >= 0.9 and six30 <= 0.2 and elapsed < 300
    report(6, ok, f"20 dB: 6 views {six20:.3f}, 2 views {two20:.3f}; 30 dB: 6 views {six30:.3f}; "
                  f"{elapsed:.0f} s")


def test_c7_fig2_trend():
    config = load_config("fig2_lowrank.json", snr_grid_db=[20])
    med = medians(sweep(config))
    rac, full, sig = med["racing", 6, 20.0], med["maxvar_full", 6, 20.0], med["maxvar", 6, 20.0]
    ok = rac <= 0.5 and full >= 0.8 and abs(sig - rac) <= 0.1
    report(7, ok, f"racing {rac:.3f}, maxvar full {full:.3f}, maxvar signal {sig:.3f}")


def test_c8_baseline_parity(fig1_medians):
    med, _ = fig1_medians
    gaps = {snr: abs(med["racing", 6, snr] - med["maxvar", 6, snr]) for snr in (10.0, 20.0, 30.0)}
    report(8, max(gaps.values()) <= 0.1, "median gaps " + ", ".join(f"{k:g} dB {v:.3f}" for k, v in gaps.items()))


def test_c9_two_view_cca():
    worst_rho, worst_angle, worst_white = 0.0, 0.0, 0.0
    for seed in range(20):
        model, views = synthesize(ModelDims.uniform(60, 5, 20, 2), seed)
        res = cca_two_view(views.X[0], views.X[1], 5, signal_ranks=views.signal_rank)
        worst_rho = max(worst_rho, np.max(np.abs(res.correlations - 1)))
        worst_angle = max(worst_angle, subspace_angle(res.M_hat, orth(model.M)))
        for X, Q in ((views.X[0], res.Q1), (views.X[1], res.Q2)):
            Z = X @ Q
            worst_white = max(worst_white, np.linalg.norm(Z.T @ Z - np.eye(5), 2))
    ok = worst_rho <= 1e-8 and worst_angle <= 1e-6 and worst_white <= 1e-8
    report(9, ok, f"|rho - 1| {worst_rho:.1e}, angle {worst_angle:.1e}, whitening {worst_white:.1e}")


def test_c10_property_suites():
    suites = ["test_linalg.py", "test_model.py", "test_racing.py", "test_identifiability.py",
              "test_baselines.py", "test_cli.py"]
    cmd = [sys.executable, "-m", "pytest", "-q", "-m", "not slow", "-p", "no:cacheprovider",
           *[str(ROOT / "tests" / s) for s in suites]]
    proc = subprocess.run(cmd, cwd=ROOT, capture_output=True, text=True)
    tail = proc.stdout.strip().splitlines()[-1] if proc.stdout.strip() else proc.stderr[-200:]
    report(10, proc.returncode == 0, tail)
