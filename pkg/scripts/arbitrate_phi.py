"""Monte Carlo arbitration of the two readings of Phi in the PRA1 bound.

    python scripts/arbitrate_phi.py --paths 100000 --dt 1e-4 --out results/arbitration.csv
"""

import argparse
import csv
import time

import numpy as np

from blowup import FunctionSpec, ProblemSpec
from blowup.stochastic import arbitrate_pra1, bound_pra1, maintenance_time, mc_explosion


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--alpha", type=float, default=1.0)
    ap.add_argument("--a0", type=float, default=1.0)
    ap.add_argument("--x0", type=float, default=1.0)
    ap.add_argument("--paths", type=int, default=10_000)
    ap.add_argument("--dt", type=float, default=1e-4)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", default=None, help="CSV with one row per (t, convention)")
    args = ap.parse_args()

    p = ProblemSpec(args.x0, FunctionSpec.constant(args.a0), FunctionSpec.power(1.0, 1.0 + args.alpha))
    start = time.perf_counter()
    dist = mc_explosion(p, args.paths, dt=args.dt, base_seed=args.seed, workers=args.workers)
    ts = np.linspace(0.1, 0.9, 9) * dist.T
    report = arbitrate_pra1(p, dist, ts)
    print(f"{dist.n} paths in {time.perf_counter() - start:.1f}s, T={dist.T:.6g}, "
          f"{int(dist.censored.sum())} censored")

    print(f"{'t/T':>5} {'empirical':>10} {'3 SE':>9} {'centered':>9} {'cdf':>9}")
    for i, t in enumerate(ts):
        rep_c, rep_d = report["centered"], report["cdf"]
        flag = "".join(c[0] if not report[c]["ok"][i] else "." for c in report)
        print(f"{t / dist.T:5.1f} {rep_c['empirical'][i]:10.5f} {3 * rep_c['se'][i]:9.2e} "
              f"{rep_c['bound'][i]:9.5f} {rep_d['bound'][i]:9.5f}  {flag}")
    for conv, rep in report.items():
        print(f"{conv}: valid={rep['valid']}")

    t_m = maintenance_time(p, 0.95, "cdf")
    print(f"maintenance time (cdf, q=0.95): {t_m:.6f}, bound there {bound_pra1(p, t_m, conv='cdf'):.9f}")

    if args.out:
        with open(args.out, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "empirical", "se", "bound", "ok", "convention"])
            for conv, rep in report.items():
                for row in zip(rep["t"], rep["empirical"], rep["se"], rep["bound"], rep["ok"]):
                    w.writerow([*row, conv])


if __name__ == "__main__":
    main()
