import csv
import json
import math

import jsonschema
import pytest

from latflow import cli


def run_cli(args):
    return cli.main(args)


def read_json(path):
    with open(path, encoding="utf-8") as f:
        return json.load(f)


def test_classify_rational_certificate(tmp_path):
    out = tmp_path / "r"
    code = run_cli(["classify", "1/2", "1/3", "--mode", "rational",
                    "--q-max", "100", "--out", str(out)])
    assert code == 0
    doc = read_json(str(out) + ".json")
    jsonschema.validate(doc, cli.REPORT_SCHEMA)
    assert doc["summary"]["rational_certificate"] == [2, 3, 6]
    assert "rational-certificate" in doc["flags"]
    # config echo is embedded verbatim
    assert doc["config"]["subcommand"] == "classify"
    assert doc["config"]["q-max"] == 100


def test_classify_origin(tmp_path):
    out = tmp_path / "o"
    code = run_cli(["classify", "0", "0", "--mode", "rational", "--q-max", "10",
                    "--out", str(out)])
    assert code == 0
    doc = read_json(str(out) + ".json")
    assert doc["summary"]["rational_certificate"] == [0, 0, 1]
    # every q is a witness at C = 1
    assert doc["summary"]["w2_witnesses"] == 10


def test_classify_liouville_builtin(tmp_path):
    out = tmp_path / "l"
    code = run_cli(["classify", "liouville:4", "liouville:4", "--mode", "rational",
                    "--q-max", "1000000", "--C-list", "1,1e-3,1e-6",
                    "--out", str(out)])
    assert code == 0
    doc = read_json(str(out) + ".json")
    rows = doc["summary"]["w2inf_profile"]
    assert [r["found"] for r in rows] == [True, True, True]
    assert [r["min_witness_q"] for r in rows] == [1, 10 ** 6, 10 ** 6]


def test_classify_parse_error_exit_2():
    assert run_cli(["classify", "nonsense", "0"]) == 2
    assert run_cli(["classify", "sqrt2", "0", "--mode", "rational"]) == 2


def test_usage_error_exit_2(capsys):
    assert run_cli(["no-such-command"]) == 2
    capsys.readouterr()


def test_equidist_n_zero_exit_2():
    assert run_cli(["equidist", "sqrt2", "sqrt3", "--t-list", "1", "--N", "0"]) == 2


def test_orbit_rational_minima(tmp_path):
    out = tmp_path / "orb"
    code = run_cli(["orbit", "1/2", "1/3", "--mode", "rational",
                    "--t-grid", "0:8:1", "--N", "20", "--out", str(out)])
    assert code == 0
    doc = read_json(str(out) + ".json")
    assert doc["samples"][0]["min_value"] == 1.0  # t = 0: integer coordinates
    for row in doc["samples"][1:]:  # from t = 1 on, the witness dominates
        assert row["min_value"] == pytest.approx(6 * math.exp(-row["t"]), abs=1e-9)
    # CSV written with fixed documented columns
    with open(str(out) + ".csv", encoding="utf-8") as f:
        rows = list(csv.reader(f))
    assert rows[0] == ["t", "min_value", "min_vector", "below_cap", "escape_fraction"]
    assert len(rows) == 1 + 9


def test_orbit_single_point_grid(tmp_path):
    out = tmp_path / "one"
    code = run_cli(["orbit", "sqrt2", "sqrt3", "--t-grid", "2",
                    "--N", "5", "--R-cap", "8", "--out", str(out)])
    assert code == 0
    doc = read_json(str(out) + ".json")
    assert len(doc["samples"]) == 1


def test_density_rational_flags(tmp_path):
    out = tmp_path / "den"
    code = run_cli(["density", "1/2", "1/3", "--mode", "rational",
                    "--R", "2", "--T", "20", "--q-max", "3000", "--out", str(out)])
    assert code == 0
    doc = read_json(str(out) + ".json")
    assert "rational-hit" in doc["flags"]
    assert doc["summary"]["union_density"] > 0.9
    assert doc["summary"]["direct_density"] > 0.9


def test_dirichlet_rational_candidate_improvable(tmp_path):
    out = tmp_path / "dir"
    code = run_cli(["dirichlet", "1/2", "1/3", "--mode", "rational",
                    "--s", "1/3", "--delta", "0.5", "--t-max", "5",
                    "--out", str(out)])
    assert code == 0
    doc = read_json(str(out) + ".json")
    assert doc["summary"]["verdict"].startswith("candidate improvable")
    jsonschema.validate(doc, cli.REPORT_SCHEMA)


def test_budget_error_exit_3():
    code = run_cli(["orbit", "liouville:4", "liouville:4", "--mode", "rational",
                    "--t-grid", "13.8", "--R-cap", "2", "--N", "1",
                    "--budget", "100"])
    assert code == 3


def test_precision_error_exit_4():
    # f64 inputs with q_max beyond the trusted envelope
    code = run_cli(["classify", "0.3", "0.7", "--q-max", str(2 ** 21)])
    assert code == 4


def test_equidist_report_round_trip(tmp_path):
    out1 = tmp_path / "eq1"
    out2 = tmp_path / "eq2"
    args = ["equidist", "sqrt2", "sqrt3", "--t-list", "2", "--N", "25",
            "--radii", "1.0", "--seed", "5"]
    assert run_cli(args + ["--out", str(out1)]) == 0
    assert run_cli(args + ["--out", str(out2)]) == 0
    d1 = read_json(str(out1) + ".json")
    d2 = read_json(str(out2) + ".json")
    d1["config"].pop("out")
    d2["config"].pop("out")
    assert d1 == d2  # same config + seed => identical report


def test_json_is_lf_and_utf8(tmp_path):
    out = tmp_path / "enc"
    assert run_cli(["classify", "1/2", "1/3", "--mode", "rational",
                    "--q-max", "20", "--out", str(out)]) == 0
    raw = (str(out) + ".json").encode()  # path round-trip sanity
    with open(str(out) + ".json", "rb") as f:
        blob = f.read()
    assert b"\r\n" not in blob
    blob.decode("utf-8")


def test_schema_export_is_json_roundtrippable():
    schema = cli.report_schema()
    assert schema == cli.REPORT_SCHEMA
    assert schema is not cli.REPORT_SCHEMA
