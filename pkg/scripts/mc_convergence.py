"""Monte Carlo against the closed-form total time at each nesting level."""

import argparse
import time

from pmerepeater import analytics
from pmerepeater.sim import SimConfig, convergence_report


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--max-level", type=int, default=3)
    ap.add_argument("--trials", type=int, default=100_000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--tau", type=float, default=None, help="memory coherence time in seconds")
    args = ap.parse_args()

    print("n  level  mc_mean[s]     analytic[s]    ratio   within")
    for n in range(args.max_level + 1):
        cfg = SimConfig(
            analytics.paper_params().at_level(n),
            trials=args.trials,
            seed=args.seed,
            workers=args.workers,
            memory_coherence_time=args.tau,
        )
        t0 = time.perf_counter()
        rep = convergence_report(cfg)
        row = rep.rows[-1]
        print(f"{n:<2} {row.level:<6} {row.mc_mean:<14.6g} {row.analytic:<14.6g} {row.ratio:<7.3f} {row.within}"
              f"   ({time.perf_counter() - t0:.1f} s)")


if __name__ == "__main__":
    main()
