"""Write closed-form density profiles for m = 1, 2 over several times as CSV."""

import argparse
import csv
import sys

import numpy as np

from erltel.closed_form import ModelParams, atom_mass, density


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--lambda", dest="lam", type=float, default=1.0)
    ap.add_argument("--v", type=float, default=1.0)
    ap.add_argument("--t", type=float, nargs="+", default=[0.5, 1.0, 2.0, 5.0])
    ap.add_argument("--points", type=int, default=201)
    args = ap.parse_args(argv)

    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["m", "t", "x", "f_c", "atom_mass"])
    for m in (1, 2):
        p = ModelParams(m, args.lam, args.v)
        for t in args.t:
            atom = atom_mass(p, t)
            for x in np.linspace(-p.v * t, p.v * t, args.points):
                w.writerow([m, t, f"{x:.9g}", f"{density(p, t, x).continuous:.9g}", f"{atom:.9g}"])


if __name__ == "__main__":
    main()
