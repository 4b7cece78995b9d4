"""Print the upper-boundary property points for 1..4 chains with timing and marker counts."""

import time
from collections import Counter

from interchain.boundary import enumerate_upper_boundary, marker


def main() -> None:
    for k in range(1, 5):
        start = time.perf_counter()
        tuples = enumerate_upper_boundary(k)
        took = time.perf_counter() - start
        counts = Counter(marker(t) for t in tuples)
        print(f"chains={k}: {len(tuples)} points in {took:.2f}s {dict(sorted(counts.items()))}")
        if k <= 3:
            for t in tuples:
                print(f"  {t.to_text()}  {marker(t)}")


if __name__ == "__main__":
    main()
