"""Which upper estimate of P(T_e <= t) is smaller on the power-law instance: the AFE curve or the Atilde one.

    python scripts/paris_table.py --convention cdf --out results/paris_comparison.csv
"""

import argparse
import csv
from collections import Counter

from blowup.paris import comparison_table


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--convention", choices=["centered", "cdf"], default="cdf")
    ap.add_argument("--out", default=None)
    args = ap.parse_args()

    rows = comparison_table(conv=args.convention)
    print(f"{'alpha':>5} {'a0':>5} {'x0':>5} {'t/T':>5} {'afe':>12} {'prop2':>12}  smaller")
    for alpha, a0, x0, f, afe, p2, which in rows:
        print(f"{alpha:5g} {a0:5g} {x0:5g} {f:5.1f} {afe:12.6g} {p2:12.6g}  {which}")
    print(dict(Counter(row[-1] for row in rows)))

    if args.out:
        with open(args.out, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["alpha", "a0", "x0", "t_over_T", "afe", "prop2", "smaller"])
            w.writerows(rows)


if __name__ == "__main__":
    main()
