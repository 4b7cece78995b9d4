"""Run the safety/liveness fault matrix for k = 1 and 2 and print the tables."""

import argparse
import time

from interchain import matrix


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--ks", default="1,2")
    ap.add_argument("--seeds", type=int, default=3, help="seeds per liveness cell")
    args = ap.parse_args()
    for k in (int(x) for x in args.ks.split(",")):
        start = time.perf_counter()
        rows = matrix.safety_matrix(k)
        for delay in (None, 0):
            rows += matrix.liveness_matrix(k, relay_delay=delay, seeds=range(args.seeds))
        print(f"== k={k} ({time.perf_counter() - start:.2f}s)")
        print(matrix.format_table(rows))
        print()


if __name__ == "__main__":
    main()
