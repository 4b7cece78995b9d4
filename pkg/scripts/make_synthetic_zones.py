"""Write the deterministic 43-zone synthetic zone graph (total cap 9.1e9 USD)."""

import argparse
import json
from pathlib import Path

from interchain.mesh import synthetic_zones, zone_graph_to_dict


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--zones", type=int, default=43)
    ap.add_argument("--total", type=float, default=9.1e9)
    ap.add_argument("--out", default=str(Path(__file__).resolve().parent.parent / "data" / "zones_synthetic43.json"))
    args = ap.parse_args()
    g = synthetic_zones(args.zones, args.total)
    Path(args.out).write_text(json.dumps(zone_graph_to_dict(g), indent=1) + "\n")
    print(f"wrote {args.out}: {len(g.caps)} zones, {len(g.channels)} channels, total cap {g.total_cap():.6g}")


if __name__ == "__main__":
    main()
