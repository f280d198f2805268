#!/usr/bin/env python3
"""Convert an n,k table given against wavelength into the casimir CSV schema.

Input: CSV or whitespace-separated rows `wavelength,n,k`; lines that do not
start with a number are skipped. Output: `energy_eV,n,k`, sorted by energy.

    convert_nk.py --unit um Al_nk.csv > al.csv
"""
import argparse
import re
import sys

HC_EV_NM = 1239.841984  # h*c in eV*nm
SCALE_TO_NM = {"nm": 1.0, "um": 1e3, "m": 1e9}


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("source", help="input file, or - for stdin")
    ap.add_argument("--unit", choices=sorted(SCALE_TO_NM), default="um", help="wavelength unit of the input")
    ap.add_argument("--name", default=None, help="comment written at the top of the output")
    args = ap.parse_args()

    stream = sys.stdin if args.source == "-" else open(args.source, encoding="utf-8")
    rows = {}
    for line in stream:
        fields = [f for f in re.split(r"[,\s]+", line.strip()) if f]
        if len(fields) < 3:
            continue
        try:
            wl, n, k = (float(f) for f in fields[:3])
        except ValueError:
            continue
        if wl <= 0 or n < 0 or k < 0:
            sys.exit(f"invalid row: {line.strip()}")
        energy = HC_EV_NM / (wl * SCALE_TO_NM[args.unit])
        rows[energy] = (n, k)

    out = sys.stdout
    if args.name:
        out.write(f"# {args.name}\n")
    out.write("energy_eV,n,k\n")
    for energy in sorted(rows):
        n, k = rows[energy]
        out.write(f"{energy:.10g},{n:.10g},{k:.10g}\n")


if __name__ == "__main__":
    main()
