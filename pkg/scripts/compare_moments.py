"""Mean position from three routes: closed form, simulation, and the exact
Markov chain on (velocity sign, Erlang phase).

The chain route needs no density at all, so it arbitrates between the other
two. Also prints the L1 histogram distance used in the acceptance suite.
"""

import argparse

import numpy as np
from scipy.integrate import quad
from scipy.linalg import expm

from erltel.closed_form import ModelParams, atom_mass, density
from erltel.monte_carlo import SimConfig, estimate_histogram, make_rng, simulate_positions
from erltel.quadrature import integrate_support
from erltel.suite import l1_distance


def chain_mean(params, t):
    n = 2 * params.m
    q = np.zeros((n, n))
    for i in range(n):
        q[i, (i + 1) % n] = params.lam
        q[i, i] = -params.lam
    sign = np.repeat([1.0, -1.0], params.m)
    return params.v * quad(lambda s: expm(q * s)[0] @ sign, 0, t, epsabs=1e-13)[0]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--t", type=float, nargs="+", default=[0.5, 1.0, 2.0, 4.0])
    ap.add_argument("--samples", type=int, default=2_000_000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    print("m      t   chain_mean  closed_mean   sim_mean  sim_se     L1(100 bins)")
    for m in (1, 2):
        p = ModelParams(m)
        for t in args.t:
            cont, _ = integrate_support(lambda x: x * density(p, t, x).continuous, p.v * t)
            closed = cont + p.v * t * atom_mass(p, t)
            pos, _ = simulate_positions(p, t, args.samples, make_rng(args.seed))
            hist = estimate_histogram(SimConfig(p, t, args.samples, args.seed, 100))
            print(f"{m}  {t:5.2f}  {chain_mean(p, t):10.6f}  {closed:10.6f}  {pos.mean():10.6f}"
                  f"  {pos.std() / np.sqrt(pos.size):.1e}  {l1_distance(hist, p, t):.4f}")


if __name__ == "__main__":
    main()
