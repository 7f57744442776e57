"""Total time versus nesting level at fixed total distance, as CSV."""

import argparse
import csv
import sys

from pmerepeater import analytics


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--distances", default="1000,2500,5000", help="comma-separated L_n values in km")
    ap.add_argument("--levels", default="1..10", help="inclusive range lo..hi")
    args = ap.parse_args()
    lo, hi = (int(x) for x in args.levels.split(".."))
    writer = csv.writer(sys.stdout)
    writer.writerow(["L_n", "n", "L0", "T_tot", "delta_F", "best"])
    for L_n in (float(x) for x in args.distances.split(",")):
        rows = analytics.sweep(analytics.paper_params().replace(L_n=L_n), "n", range(lo, hi + 1))
        best = min(rows, key=lambda r: r.breakdown.T_tot).value
        for r in rows:
            writer.writerow([L_n, r.value, r.params.L0, r.breakdown.T_tot, r.breakdown.delta_F, int(r.value == best)])


if __name__ == "__main__":
    main()
