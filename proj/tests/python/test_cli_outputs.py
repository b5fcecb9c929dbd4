import csv
import io
import json

import jsonschema

from conftest import ROOT


def validate(schema, name, doc):
    s, registry = schema(name)
    jsonschema.Draft202012Validator(s, registry=registry).validate(doc)


def test_game_csv(run, schema, tmp_path):
    out = tmp_path / "game.csv"
    run("game", "--profile", "production", "--seed", 3, "--trials", 4000, "--n-sweep", "1,4", "--out", out)
    rows = list(csv.DictReader(io.StringIO(out.read_text())))
    assert [int(r["n"]) for r in rows] == [1, 4]
    for r in rows:
        doc = {"n": int(r["n"]), "trials": int(r["trials"])}
        doc.update({k: float(r[k]) for k in ("advantage", "std_err", "analytic")})
        validate(schema, "advantage_row.schema.json", doc)
        assert abs(doc["advantage"] - doc["analytic"]) <= 4 * doc["std_err"]


def test_fp_rate_json(run, schema, tmp_path):
    out = tmp_path / "fp.json"
    run("fp-rate", "--profile", "toy", "--seed", 1, "--trials", 20000, "--out", out)
    doc = json.loads(out.read_text())
    validate(schema, "rate.schema.json", doc)
    assert doc["model"] == 2**-6


def test_layout_override(run, tmp_path):
    out = tmp_path / "fp.json"
    run("fp-rate", "--profile", "toy", "--seed", 1, "--trials", 20000, "--m-d", 1, "--m-t", 6, "--out", out)
    doc = json.loads(out.read_text())
    assert doc["m_d"] == 1
    assert abs(doc["measured"]["rate"] - 2**-3) < 0.02
    bad = run("fp-rate", "--profile", "toy", "--seed", 1, "--m-d", 5, check=False)
    assert bad.returncode == 2


def test_simulate_outputs(run, schema, tmp_path):
    run("simulate", ROOT / "tests/data/scenario_small.json", "--out", tmp_path)
    summary = json.loads((tmp_path / "summary.json").read_text())
    validate(schema, "scenario_summary.schema.json", summary)
    assert len(summary["events"]) == 2
    for line in (tmp_path / "events.ndjson").read_text().splitlines():
        validate(schema, "event.schema.json", json.loads(line))
    frames = (tmp_path / "transcript.ndjson").read_text().splitlines()
    assert len(frames) == summary["frames"]
    for line in frames:
        validate(schema, "frame.schema.json", json.loads(line))


def test_shipped_params(run, schema):
    for name in ("toy", "production"):
        path = ROOT / "params" / f"{name}.json"
        validate(schema, "profile.schema.json", json.loads(path.read_text()))
        assert run("validate-params", "--profile", path).returncode == 0


def test_exit_codes(run, schema, tmp_path):
    doc = json.loads((ROOT / "params/toy.json").read_text())
    doc["b"] = str(int(doc["b"]) + 1)
    tampered = tmp_path / "bad.json"
    tampered.write_text(json.dumps(doc))
    r = run("validate-params", "--profile", tampered, check=False)
    assert r.returncode == 4
    validate(schema, "error.schema.json", json.loads(r.stderr))

    assert run("game", "--trials", 2000, check=False).returncode == 2  # no seed
    assert run("enroll-server", "--store", tmp_path / "none", "--name", "x", check=False).returncode == 5

    store = tmp_path / "store"
    run("keygen", "--store", store, "--profile", "toy", "--seed", 1)
    run("enroll-server", "--store", store, "--name", "bank", "--seed", 2)
    dup = run("enroll-server", "--store", store, "--name", "bank", "--seed", 3, check=False)
    assert dup.returncode == 3
    (store / "dcp.json").write_text((store / "dcp.json").read_text().replace("bank", "bonk"))
    assert run("enroll-server", "--store", store, "--name", "shop", "--seed", 4, check=False).returncode == 5


def test_send_distress(run, tmp_path):
    store = tmp_path / "store"
    run("keygen", "--store", store, "--profile", "production", "--seed", 1)
    run("enroll-server", "--store", store, "--name", "bank", "--seed", 2)
    run("enroll-user", "--store", store, "--name", "alice", "--password", "pw", "--seed", 3)
    for i in range(2):
        out = json.loads(run("send-distress", "--store", store, "--user", "alice", "--server", "bank").stdout)
        assert out["forwarded"] and out["confirmed"] and out["rejected"] is None
        assert len((store / "events.ndjson").read_text().splitlines()) == i + 1


def test_config_file_and_flag_precedence(run, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"profile": "toy", "seed": 5, "trials": 3000, "n_sweep": "1"}))
    a = run("game", "--config", cfg).stdout
    b = run("game", "--config", cfg, "--seed", 5).stdout
    c = run("game", "--config", cfg, "--seed", 6).stdout
    assert a == b != c
    assert a.splitlines()[1].startswith("1,3000,")
