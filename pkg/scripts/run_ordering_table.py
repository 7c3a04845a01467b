"""Mean relative risk of every feasible method on a grid of (N, T).

Prints a table in the spirit of a simulation results table; the numbers
depend on the chosen DGP constants, so only the ordering is meaningful.
"""

import argparse

from ridgelet.dgp import build_setting2
from ridgelet.experiments import ReplicationJob, simulate_table

METHODS = ("ridgelet1", "ridgelet2", "ls", "equal", "ridgeless")


def main():
    ap = argparse.ArgumentParser(description="relative risk ordering table")
    ap.add_argument("--n", default="200,400,800")
    ap.add_argument("--t", default="22,44")
    ap.add_argument("--reps", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--dist", default="gaussian", choices=("gaussian", "student_t5"))
    args = ap.parse_args()

    ns = [int(x) for x in args.n.split(",")]
    ts = [int(x) for x in args.t.split(",")]
    job = ReplicationJob(ts[0], METHODS, dist=args.dist)
    rows, _ = simulate_table(lambda n: build_setting2(n, r=1, seed=args.seed), ns, ts, job, args.reps, args.seed)
    print(f"{'N':>5} {'T':>4} " + " ".join(f"{m:>10}" for m in METHODS))
    for n in ns:
        for t in ts:
            cells = {r["method"]: r["rr_mean"] for r in rows if r["N"] == n and r["T"] == t}
            print(f"{n:5d} {t:4d} " + " ".join(f"{cells[m]:10.4f}" for m in METHODS))


if __name__ == "__main__":
    main()
