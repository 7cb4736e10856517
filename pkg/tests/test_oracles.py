"""The frozen reference file must still match the independent computations."""
import json
import math
import pathlib

from oracles import all_values


def _close(a, b):
    if isinstance(a, dict):
        return a.keys() == b.keys() and all(_close(a[k], b[k]) for k in a)
    if isinstance(a, list):
        return len(a) == len(b) and all(_close(x, y) for x, y in zip(a, b))
    return math.isclose(a, b, rel_tol=1e-9, abs_tol=1e-12)


def test_frozen_values_reproduce():
    frozen = json.loads((pathlib.Path(__file__).parent / "data" / "oracles.json").read_text())
    assert _close(frozen, all_values())


def test_equator_oracle_matches_closed_form(oracle):
    for key, R in (("e", math.e), ("e_2pi", math.exp(2 * math.pi)), ("16", 16.0)):
        assert math.isclose(oracle["equator_length"][key], 2 * math.pi**2 / math.log(R), rel_tol=1e-12)
