"""Regenerate the example scenario files in data/scenarios/."""

import json
from pathlib import Path

from interchain.sim import scenarios as S
from interchain.sim.scenario import scenario_to_dict

OUT = Path(__file__).resolve().parent.parent / "data" / "scenarios"


def main() -> None:
    OUT.mkdir(parents=True, exist_ok=True)
    files = {
        "honest_k1.json": S.honest(1),
        "split_brain_consumer.json": S.safety_cell(1, {0}),
        "split_brain_all.json": S.safety_cell(1, {0, 1}),
        "provider_stalled.json": S.liveness_cell(1, {1}).scenario,
        "data_withholding.json": S.data_withholding(True),
    }
    for name, sc in files.items():
        (OUT / name).write_text(json.dumps(scenario_to_dict(sc), indent=1) + "\n")
        print(OUT / name)


if __name__ == "__main__":
    main()
