"""Path-wise check of the EPA and sub-multiplicative bounds on sampled Brownian paths.

    python scripts/mc_sandwich.py --paths 1000 --dt 1e-4
"""

import argparse

import numpy as np

from blowup import FunctionSpec, ProblemSpec
from blowup.bounds import epa_lower, prop2_lower, submult_constant
from blowup.stochastic import mc_explosion, sample_path


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--alpha", type=float, default=1.0)
    ap.add_argument("--a0", type=float, default=1.0)
    ap.add_argument("--x0", type=float, default=1.0)
    ap.add_argument("--paths", type=int, default=1000)
    ap.add_argument("--dt", type=float, default=1e-4)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    p = ProblemSpec(args.x0, FunctionSpec.constant(args.a0), FunctionSpec.power(1.0, 1.0 + args.alpha))
    dist = mc_explosion(p, args.paths, dt=args.dt, base_seed=args.seed)
    c = submult_constant(p.b)
    alive = ~dist.censored
    width = dist.t_hi - dist.t_lo
    epa = np.array([epa_lower(p, g) for g in dist.ghat_T])
    sub = np.array([
        prop2_lower(p.with_noise(FunctionSpec.abs_brownian(sample_path(dist.horizon, dist.dt, int(s)))), c)
        for s in dist.seeds])
    t = dist.times
    print(f"T={dist.T:.6g}, {int(alive.sum())}/{dist.n} paths exploded before the horizon")
    print(f"EPA violations:    {int(np.sum(alive & ((t < epa - width) | (t > dist.T + width))))}")
    print(f"Atilde-bound violations: {int(np.sum(alive & (t + width < sub)))}")
    print(f"EPA tighter on {int(np.sum(epa > sub))} paths, sub-multiplicative on {int(np.sum(sub > epa))}")
    print(f"mean gap to T_e: EPA {np.mean((t - epa)[alive]):.4f}, sub-multiplicative {np.mean((t - sub)[alive]):.4f}")


if __name__ == "__main__":
    main()
