"""Catching sensitivity sweep: planning success rate versus initial speed,
speed uncertainty, and the tilt slew bound."""

import argparse
import csv
import os
import time

from cageintime.oracle import sensitivity_sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--v0", type=float, nargs="+", default=[0.8])
    ap.add_argument("--dv0", type=float, nargs="+",
                    default=[0.025, 0.05, 0.1, 0.15, 0.2])
    ap.add_argument("--beta", type=float, nargs="+", default=[0.0, 1.0, 5.0, 25.0])
    ap.add_argument("--trials", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="out/sweep.csv")
    args = ap.parse_args()

    t0 = time.time()
    rows = sensitivity_sweep(args.v0, args.dv0, args.beta,
                             trials=args.trials, seed=args.seed)
    for r in rows:
        print(f"v0={r['v0']:.2f} dv0={r['dv0']:.3f} beta={r['beta_max']:5.1f} "
              f"-> {r['success_rate']:.2f}")
    print(f"sweep finished in {time.time() - t0:.0f} s")

    os.makedirs(os.path.dirname(args.out) or ".", exist_ok=True)
    with open(args.out, "w", newline="") as fh:
        wr = csv.DictWriter(fh, fieldnames=["v0", "dv0", "beta_max", "success_rate"])
        wr.writeheader()
        wr.writerows(rows)
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
