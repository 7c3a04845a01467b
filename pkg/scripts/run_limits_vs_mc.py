"""Compare Monte Carlo relative variance of ridgelet1 with its theoretical limit.

Runs Setting 1 (identity idiosyncratic covariance, one factor) at several
gamma = N/T with T fixed and prints the mean RV next to the limit.
"""

import argparse
import math

from ridgelet.dgp import build_setting1
from ridgelet.experiments import ReplicationJob, regime_of, run_replications, summarize
from ridgelet.rmt import rv_limit


def main():
    ap = argparse.ArgumentParser(description="ridgelet1 RV against its limit")
    ap.add_argument("--t", type=int, default=200)
    ap.add_argument("--gammas", default="0.25,0.5,2,4")
    ap.add_argument("--reps", type=int, default=50)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    print("gamma      N    mean_rv    limit")
    for g in (float(x) for x in args.gammas.split(",")):
        n = int(round(g * args.t))
        spec = build_setting1(n, r=1, seed=args.seed)
        runs = run_replications(spec, ReplicationJob(args.t, ("ridgelet1",)), args.reps, args.seed)
        rv = summarize(runs, ("ridgelet1",))["ridgelet1"]["rv_mean"]
        lim = rv_limit(regime_of(g), g) if not math.isinf(g) else 1.0
        print(f"{g:5.2f} {n:6d} {rv:10.4f} {lim:8.4f}")


if __name__ == "__main__":
    main()
