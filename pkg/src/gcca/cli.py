"""Command-line entry point: ``gcca {synth,run,sweep,check,plotdata}``.

Computational warnings (an ill-posed pairwise system) are reported in the
outputs and never change the exit status; I/O, schema and dimension errors
exit with status 1, usage errors with status 2.
"""

import argparse
import sys
import time
from pathlib import Path

import numpy as np

from . import mmio
from .baselines import cca_two_view, maxvar
from .errors import DimensionError, RankError
from .experiment import (ConfigError, ExperimentConfig, ParseError, aggregate, derive_seed,
                         read_rows, sweep, write_plotdata, write_rows)
from .identifiability import (IdentifiabilityReport, certificate_factors, check_necessary,
                              check_theorem1, check_theorem2, intersection_dim)
from .linalg import subspace_angle
from .model import ModelDims, ViewSet, add_noise, resolve_feature_dims, synthesize
from .racing import RacingConfig, racing


def _int_list(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def cmd_synth(args):
    config = ExperimentConfig.from_json(args.config)
    base_seed = config.base_seed if args.seed is None else args.seed
    seed = derive_seed(base_seed, args.trial)
    model, views = synthesize(config.dims, seed, mode=config.mode, k_factor=config.k_factor)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.snr is not None:
        views, _ = add_noise(views, args.snr, derive_seed(base_seed, args.trial, 0))
    files = []
    for n, x in enumerate(views.X, 1):
        files.append(mmio.write_matrix(out / f"view_{n}.mtx", x).name)
    mmio.write_factors(out, model.M, model.C, model.S)
    manifest = {
        "dims": {"I": model.dims.I, "R": model.dims.R, "L": list(model.dims.L),
                 "K": list(model.dims.K), "N": model.dims.N},
        "mode": config.mode,
        "k_factor": config.k_factor,
        "base_seed": base_seed,
        "trial": args.trial,
        "model_seed": seed,
        "snr_db": args.snr,
        "views": files,
    }
    mmio.write_json(out / "manifest.json", manifest)
    print(f"wrote {len(files)} views of shape "
          f"{', '.join(f'{model.dims.I}x{k}' for k in model.dims.K)} to {out}")
    return 0


def _load_views(paths):
    views = []
    for n, p in enumerate(paths, 1):
        try:
            views.append(mmio.read_matrix(p))
        except (OSError, ValueError) as exc:
            raise OSError(f"view {n} ({p}): {exc}") from exc
    I = views[0].shape[0]
    for n, v in enumerate(views, 1):
        if v.shape[0] != I:
            raise DimensionError(f"view {n} has {v.shape[0]} rows, view 1 has {I}")
    return views


def _extra_ranks(args, N):
    L = args.extra_ranks
    if L is None:
        raise DimensionError("--extra-ranks is required")
    if len(L) == 1:
        L = L * N
    if len(L) != N:
        raise DimensionError(f"{len(L)} extra ranks for {N} views")
    return L


def cmd_run(args, parser):
    if args.method == "cca2" and len(args.views) != 2:
        parser.error(f"method cca2 takes exactly 2 views, got {len(args.views)}")
    X = _load_views(args.views)
    R = args.rank
    L = _extra_ranks(args, len(X))
    dims = ModelDims(X[0].shape[0], R, tuple(L), tuple(x.shape[1] for x in X))
    views = ViewSet(dims, X)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    t0 = time.perf_counter()
    summary = {"method": args.method, "R": R, "L": L, "warnings": []}
    if args.method == "racing":
        cfg = RacingConfig(R, L, theta_solver=args.theta_solver)
        res = racing(views, cfg, warn=False)
        M_hat, Q = res.M_hat, res.Q
        summary.update(gap_ratio=res.gap_ratio, theta_spectrum=res.theta_spectrum,
                       view_spectra=res.view_spectra, warnings=res.warnings)
    elif args.method == "maxvar":
        res = maxvar(views, R, whitening=args.whitening)
        M_hat, Q = res.M_hat, res.Q
        summary.update(eigenvalues=res.eigenvalues, whitening=args.whitening)
    else:
        res = cca_two_view(X[0], X[1], R, signal_ranks=views.signal_rank)
        M_hat, Q = res.M_hat, [res.Q1, res.Q2]
        summary.update(correlations=res.correlations)
    summary["runtime_ms"] = (time.perf_counter() - t0) * 1e3

    mmio.write_matrix(out / "M_hat.mtx", M_hat)
    for n, q in enumerate(Q, 1):
        mmio.write_matrix(out / f"Q_{n}.mtx", q)
    if args.reference:
        from .linalg import orth

        summary["angle"] = subspace_angle(M_hat, orth(mmio.read_matrix(args.reference)))
    mmio.write_json(out / "summary.json", summary)
    for w in summary["warnings"]:
        print(f"warning: {w}", file=sys.stderr)
    print(f"{args.method}: wrote M_hat and {len(Q)} projection maps to {out}")
    return 0


def cmd_sweep(args):
    config = ExperimentConfig.from_json(args.config)
    if args.seed is not None:
        config.base_seed = args.seed
    rows = sweep(config, threads=args.threads)
    write_rows(args.out, rows)
    failed = sum(1 for r in rows if any(w.startswith("error") for w in r.warnings))
    print(f"wrote {len(rows)} rows to {args.out}" + (f" ({failed} failed cells)" if failed else ""))
    return 0


def _report_text(report, source):
    nec = report.necessary
    lines = [f"identifiability report ({source})",
             f"  necessary row bound: {'pass' if nec.row_bound_ok else 'FAIL'}"
             f" (needs I >= {nec.min_rows}; largest admissible R = {nec.max_common_dim})"]
    cols = ", ".join("unknown (no K_n)" if ok is None else ("pass" if ok else "FAIL") for ok in nec.col_bounds_ok)
    lines.append(f"  necessary column bounds: {cols}")
    if report.theorem1 is not None:
        t1 = report.theorem1
        lines.append(f"  joint kernel dimension: {t1.z_dim} -> theorem 1 {'pass' if t1.holds else 'FAIL'}")
    if report.theorem2 is not None:
        t2 = report.theorem2
        lines.append(f"  staircase rank: {t2.gamma_rank} (full: {t2.gamma_full_rank}),"
                     f" loading ranks {t2.s_ranks} -> theorem 2 {'pass' if t2.holds else 'FAIL'}")
    if report.intersection_dim is not None:
        lines.append(f"  intersection dimension of view ranges: {report.intersection_dim}")
    return "\n".join(lines) + "\n"


def cmd_check(args):
    M = C = S = None
    X = None
    if args.certificate:
        I, R, L = args.certificate
        M, C = certificate_factors(I, R, L)
        S = [np.eye(R + L) for _ in C]
        source = f"certificate I={I}, R={R}, L={L}"
    elif args.factors:
        M, C, S = mmio.read_factors(args.factors)
        source = f"factors in {args.factors}"
    if args.views:
        X = _load_views(args.views)
        source = "views" if M is None else source + " + views"

    if M is not None:
        K = tuple(s.shape[0] for s in S) if S else None
        dims = ModelDims(M.shape[0], M.shape[1], tuple(c.shape[1] for c in C), K)
        if not S:
            # Without loadings only the staircase part of the checks is meaningful.
            S = [np.eye(dims.R + l) for l in dims.L]
    elif args.config:
        cfg = ExperimentConfig.from_json(args.config)
        dims = resolve_feature_dims(cfg.dims, cfg.mode, cfg.k_factor)
        source = f"config {args.config}"
    elif X is not None:
        if args.rank is None:
            raise DimensionError("--rank is required with --views")
        dims = ModelDims(X[0].shape[0], args.rank, tuple(_extra_ranks(args, len(X))),
                         tuple(x.shape[1] for x in X))
    else:
        if args.rows is None or args.rank is None or args.extra_ranks is None:
            raise DimensionError("give --factors, --views, --config, --certificate or --rows/--rank/--extra-ranks")
        N = args.views_count or len(args.extra_ranks)
        L = _extra_ranks(args, N)
        K = None
        if args.cols:
            K = tuple(args.cols * N if len(args.cols) == 1 else args.cols)
        dims = ModelDims(args.rows, args.rank, tuple(L), K)
        source = "dimensions"

    report = IdentifiabilityReport(necessary=check_necessary(dims))
    if M is not None:
        report.theorem1 = check_theorem1(M, C, S)
        report.theorem2 = check_theorem2(M, C, S)
        if X is None:
            X = [np.hstack([M, c]) @ s.T for c, s in zip(C, S)]
    if X is not None:
        report.intersection_dim = intersection_dim(X)

    text = _report_text(report, source)
    print(text, end="")
    if args.out:
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        payload = report.to_dict()
        payload["dims"] = {"I": dims.I, "R": dims.R, "L": list(dims.L),
                           "K": None if dims.K is None else list(dims.K), "N": dims.N}
        mmio.write_json(out, payload)
        out.with_suffix(".txt").write_text(text)
    return 0


def cmd_plotdata(args):
    rows = read_rows(args.input)
    write_plotdata(args.out, aggregate(rows))
    print(f"aggregated {len(rows)} rows into {args.out}")
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="gcca", description="GCCA by range-subspace intersection")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("synth", help="generate a synthetic model and write its views")
    s.add_argument("--config", required=True)
    s.add_argument("--out", required=True, help="output directory")
    s.add_argument("--seed", type=int, help="override the config's base_seed")
    s.add_argument("--trial", type=int, default=0, help="trial index mixed into the seed")
    s.add_argument("--snr", type=float, help="add noise at this SNR (dB)")

    r = sub.add_parser("run", help="run a method on view files")
    r.add_argument("views", nargs="+", help="Matrix Market view files")
    r.add_argument("--rank", type=int, required=True, help="common dimension R")
    r.add_argument("--extra-ranks", type=_int_list, required=True,
                   help="individual dimensions L1,L2,... (one value applies to all views)")
    r.add_argument("--method", choices=["racing", "maxvar", "cca2"], default="racing")
    r.add_argument("--whitening", choices=["signal", "full"], default="signal",
                   help="maxvar range truncation")
    r.add_argument("--theta-solver", choices=["dense", "gram"], default="dense")
    r.add_argument("--reference", help="ground-truth M (.mtx); adds the angle to the summary")
    r.add_argument("--out", required=True, help="output directory")
    r.add_argument("--threads", type=int, default=0, help="accepted for symmetry; unused")

    w = sub.add_parser("sweep", help="Monte-Carlo SNR sweep to CSV")
    w.add_argument("--config", required=True)
    w.add_argument("--out", required=True, help="output CSV")
    w.add_argument("--seed", type=int, help="override the config's base_seed")
    w.add_argument("--threads", type=int, default=1, help="worker threads (0 = auto)")

    c = sub.add_parser("check", help="identifiability report")
    c.add_argument("--config")
    c.add_argument("--views", nargs="+")
    c.add_argument("--factors", help="directory with M.mtx, C_n.mtx and optional S_n.mtx")
    c.add_argument("--certificate", type=_int_list, metavar="I,R,L",
                   help="check the zero-one certificate factors")
    c.add_argument("--rows", type=int, help="I, for a dimensions-only check")
    c.add_argument("--cols", type=_int_list, help="K_n values")
    c.add_argument("--views-count", type=int, help="N when --extra-ranks is a single value")
    c.add_argument("--rank", type=int)
    c.add_argument("--extra-ranks", type=_int_list)
    c.add_argument("--out", help="JSON report path; a .txt copy is written next to it")

    d = sub.add_parser("plotdata", help="aggregate sweep CSV per (method, n_views, snr)")
    d.add_argument("input", help="sweep CSV")
    d.add_argument("--out", required=True)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "check" and args.certificate is not None and len(args.certificate) != 3:
        parser.error("--certificate takes I,R,L")
    try:
        if args.command == "run":
            return cmd_run(args, parser)
        return {"synth": cmd_synth, "sweep": cmd_sweep, "check": cmd_check,
                "plotdata": cmd_plotdata}[args.command](args)
    except (ConfigError, ParseError, DimensionError, RankError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
