"""Finite-difference residual and observed order versus step size.

Fourth-order composed stencils divide by h^4 (h^8 for the squared wave
operator), so at small h roundoff takes over; this sweep shows where.
"""

import argparse

from erltel.pde_verify import GridSpec, field_fc, field_gc, residual_grid

FIELDS = {
    "eq11": lambda: field_gc(1),
    "eq12": lambda: field_fc(1),
    "eq14": lambda: field_gc(2),
    "eq1_m2": lambda: field_fc(2),
}


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--operator", choices=sorted(FIELDS), default="eq14")
    ap.add_argument("--order", type=int, choices=(2, 4), default=4)
    ap.add_argument("--t-range", type=float, nargs=2, default=(2.0, 3.0))
    ap.add_argument("--y-fraction", type=float, default=0.5)
    ap.add_argument("--h", type=float, nargs="+", default=[0.16, 0.12, 0.1, 0.08, 0.04, 0.02])
    args = ap.parse_args(argv)

    field = FIELDS[args.operator]()
    print("h        max_abs      order_est")
    for h in args.h:
        grid = GridSpec(tuple(args.t_range), args.y_fraction, h, args.order)
        rep = residual_grid(field, args.operator, grid)
        print(f"{h:<8g} {rep.max_abs:<12.3e} {rep.convergence_order_est:.3f}")


if __name__ == "__main__":
    main()
