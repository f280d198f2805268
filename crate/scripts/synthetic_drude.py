#!/usr/bin/env python3
"""Write a Drude-model n,k table in the casimir CSV schema.

    synthetic_drude.py --wp 12.5 --gamma 0.063 --lo 0.04 --hi 1e4 --points 400 > al.csv
"""
import argparse
import cmath
import math
import sys


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--wp", type=float, required=True, help="plasma frequency, eV")
    ap.add_argument("--gamma", type=float, required=True, help="relaxation frequency, eV")
    ap.add_argument("--lo", type=float, required=True, help="lowest photon energy, eV")
    ap.add_argument("--hi", type=float, required=True, help="highest photon energy, eV")
    ap.add_argument("--points", type=int, default=400)
    ap.add_argument("--name", default="synthetic Drude metal")
    args = ap.parse_args()

    out = sys.stdout
    out.write(f"# {args.name}: wp = {args.wp} eV, gamma = {args.gamma} eV\n")
    out.write("energy_eV,n,k\n")
    step = math.log(args.hi / args.lo) / (args.points - 1)
    for i in range(args.points):
        w = args.lo * math.exp(step * i)
        eps = 1 - args.wp**2 / (w * (w + 1j * args.gamma))
        root = cmath.sqrt(eps)
        out.write(f"{w:.10g},{abs(root.real):.10g},{abs(root.imag):.10g}\n")


if __name__ == "__main__":
    main()
