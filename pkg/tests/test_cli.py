import json
import subprocess
import sys

import pytest

from caradomains.cli import clean, dumps, parse_m, run
from caradomains.domains import annulus, unit_disc
from caradomains.meshcurve import disc_instance


def _write(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


@pytest.fixture
def disc_file(tmp_path):
    return _write(tmp_path / "disc.json", unit_disc().to_json())


@pytest.fixture
def annulus_file(tmp_path):
    return _write(tmp_path / "ann.json", annulus(1.0, 9.0).to_json())


def _report(path):
    with open(path) as fh:
        return json.load(fh)


def test_parse_m_forms():
    assert parse_m("3:40") == [3, 6, 12, 24, 40]
    assert parse_m("3:40", (4, None)) == [4, 8, 16, 32, 40]
    assert parse_m("1:10:3") == [1, 4, 7, 10]
    assert parse_m("5,2,2,9") == [2, 5, 9]
    assert parse_m("7") == [7]
    assert parse_m("1,50", (1, 30)) == [1]
    with pytest.raises(ValueError):
        parse_m("9:3")
    with pytest.raises(ValueError):
        parse_m("1,2", (4, None))


def test_clean_handles_special_values():
    import numpy as np
    out = clean({"a": np.float64(1.5), "b": complex(1, 2), "c": float("inf"), "d": np.int64(3),
                 "e": np.array([1.0, float("nan")])})
    assert out == {"a": 1.5, "b": [1.0, 2.0], "c": "inf", "d": 3, "e": [1.0, "nan"]}
    assert dumps({"b": 1, "a": 2}).index('"a"') < dumps({"b": 1, "a": 2}).index('"b"')


def test_validate_ok_and_manifest(disc_file, tmp_path):
    out = str(tmp_path / "v.json")
    assert run(["validate", "--domain", disc_file, "--out", out]) == 0
    rep = _report(out)
    man = rep["manifest"]
    assert man["tool"] == "caradomains" and man["command"] == "validate"
    assert man["inputs"][0]["path"] == disc_file
    assert len(man["inputs"][0]["sha256"]) == 64
    assert "time" not in json.dumps(man).lower()


def test_schema_error_pointer_on_stderr(tmp_path, capsys):
    bad = _write(tmp_path / "bad.json", {"basepoint": [0, 0], "components": [{"type": "disc", "center": [0]}]})
    assert run(["validate", "--domain", bad]) == 1
    err = capsys.readouterr().err
    assert "schema error at /components/0" in err


def test_missing_file_is_error(tmp_path, capsys):
    assert run(["validate", "--domain", str(tmp_path / "nope.json")]) == 1
    assert "error" in capsys.readouterr().err


def test_bound_disc(disc_file, tmp_path):
    out = str(tmp_path / "b.json")
    assert run(["bound", "--domain", disc_file, "--out", out]) == 0
    res = _report(out)["result"]
    assert res["L"]["upper"] == 0 and res["D"]["upper"] == 0


def test_meridians_annulus(annulus_file, tmp_path):
    out = str(tmp_path / "m.json")
    assert run(["meridians", "--domain", annulus_file, "--seeds", "1", "--out", out]) == 0
    assert _report(out)["status"] == "ok"


def test_converge_constant_family_and_csv(tmp_path):
    out, csv = str(tmp_path / "c.json"), str(tmp_path / "c.csv")
    assert run(["classify", "--family", "concentric_annulus", "--m", "1,2,4", "--out", out, "--csv", csv]) == 0
    rep = _report(out)
    assert rep["manifest"]["knobs"]["sample"] == [1, 2, 4]
    rows = open(csv).read().splitlines()
    assert len(rows) == 4
    assert rows[0].startswith("m,")


def test_meshcurve_cli(tmp_path):
    inst = _write(tmp_path / "inst.json", disc_instance().to_json())
    out = str(tmp_path / "mc.json")
    assert run(["meshcurve", "--instance", inst, "--out", out]) == 0
    res = _report(out)["result"]
    assert res["windings_ok"] is True
    assert run(["meshcurve", "--instance", inst, "--R", "2", "--out", out]) == 1


def test_between_exact(tmp_path, oracle):
    inner = _write(tmp_path / "u.json", {"basepoint": [0.5, 0], "components": [
        {"type": "disc_complement", "center": [0.5, 0], "radius": 0.5}]})
    outer = _write(tmp_path / "v.json", {"basepoint": [0, 0], "components": [
        {"type": "disc_complement", "center": [0, 0], "radius": 4.0}]})
    out = str(tmp_path / "a.json")
    assert run(["between", "--domain", inner, "--domain", outer, "--out", out]) == 0
    mod = _report(out)["result"]["annulus"]["modulus"]
    assert mod["lower"] == pytest.approx(oracle["ring_modulus_half_in_4"], rel=1e-10)


def test_reports_byte_identical(annulus_file, tmp_path):
    a, b = str(tmp_path / "a.json"), str(tmp_path / "b.json")
    sa, sb = str(tmp_path / "a.svg"), str(tmp_path / "b.svg")
    for out, svg in ((a, sa), (b, sb)):
        assert run(["bound", "--domain", annulus_file, "--out", out, "--svg", svg]) == 0
    assert open(a, "rb").read() == open(b, "rb").read()
    assert open(sa, "rb").read() == open(sb, "rb").read()


def test_module_entry_point(disc_file):
    proc = subprocess.run([sys.executable, "-m", "caradomains", "validate", "--domain", disc_file],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["status"] == "ok"
