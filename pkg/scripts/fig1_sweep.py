"""Angle vs SNR for 2 and 6 full-rank views (RACING, MAXVAR, two-view CCA).

    python3 scripts/fig1_sweep.py --out results/fig1
"""

import argparse
from pathlib import Path

from gcca.experiment import ExperimentConfig, aggregate, sweep, write_plotdata, write_rows

ROOT = Path(__file__).resolve().parents[1]


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--config", default=ROOT / "configs" / "fig1_desk.json", type=Path)
    p.add_argument("--out", default=ROOT / "results" / "fig1", type=Path)
    p.add_argument("--trials", type=int, help="override the trial count")
    p.add_argument("--threads", type=int, default=1)
    args = p.parse_args()

    config = ExperimentConfig.from_json(args.config)
    if args.trials:
        config.trials = args.trials
    args.out.mkdir(parents=True, exist_ok=True)
    rows = sweep(config, threads=args.threads)
    write_rows(args.out / "sweep.csv", rows)
    groups = aggregate(rows)
    write_plotdata(args.out / "plotdata.csv", groups)
    for g in groups:
        print(f"{g['method']:>8} N={g['n_views']} {g['snr_db']:>5g} dB  median {g['median_angle']:.3f}")


if __name__ == "__main__":
    main()
