"""Regenerate data/oracles.json from the independent reference computations."""
import json
import pathlib

from oracles import all_values

if __name__ == "__main__":
    out = pathlib.Path(__file__).with_name("data") / "oracles.json"
    out.write_text(json.dumps(all_values(), indent=2, sort_keys=True) + "\n")
    print(out)
