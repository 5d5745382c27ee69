#!/usr/bin/env python3
"""Reproduce the invariant-edge classification tables and print them."""

import argparse

from conedge import classify as cl


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--quaternionic-n", type=int, default=2)
    ap.add_argument("--low-n", type=int, default=3)
    ap.add_argument("--samples", type=int, default=100)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rep = cl.full_classification(args.quaternionic_n, args.low_n,
                                      samples=args.samples, seed=args.seed)
    print(cl.format_catalog_table(rep))
    print()
    print("entry counts:", rep["counts"])
    print(rep["note"])


if __name__ == "__main__":
    main()
