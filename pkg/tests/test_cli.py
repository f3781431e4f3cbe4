import json

import pytest

from rolefidelity.classifier import ClassifierVerdict, text_digest
from rolefidelity.cli import main
from rolefidelity.model import Role, data_path
from rolefidelity.report import parse_dsv


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_metrics_fixture(capsys):
    code, out, _ = run(capsys, "metrics", "--input", "fixture:phase3", "--filter", "role=charitable")
    assert code == 0 and "10%" in out and "1.360" in out


def test_metrics_dsv(capsys):
    code, out, _ = run(capsys, "metrics", "--input", "fixture:phase3", "--format", "dsv")
    rows = parse_dsv(out)
    assert code == 0 and rows[0]["n"] == "450"


def test_compare(capsys):
    code, out, _ = run(capsys, "compare", "fixture:mistral_en_gemini", "fixture:mistral_de_gemini", "--format", "dsv")
    assert code == 0 and "0.807" in out and "n.s." in out


def test_breakdown(capsys):
    code, out, _ = run(capsys, "breakdown", "--input", "fixture:claude_en_floor", "--by", "logos")
    assert code == 0 and "0%" in out


@pytest.mark.parametrize("argv,code", [
    (["metrics", "--input", "fixture:nope"], 2),
    (["metrics", "--input", "/does/not/exist.jsonl"], 2),
    (["metrics", "--input", "fixture:phase3", "--filter", "role=charitable", "--filter", "lang=de"], 3),
    (["metrics", "--input", "fixture:phase3", "--filter", "bogus"], 2),
    (["reproduce", "table99"], 2),
    (["no-such-command"], 2),
])
def test_exit_codes(capsys, argv, code):
    assert run(capsys, *argv)[0] == code


def test_malformed_record_is_input_error(capsys, tmp_path):
    p = tmp_path / "bad.jsonl"
    p.write_text('{"statement_id": "A01"}\n')
    code, _, err = run(capsys, "metrics", "--input", str(p))
    assert code == 2 and "error" in err


def test_simulate_deterministic(capsys, tmp_path):
    a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    assert run(capsys, "simulate", "-n", "30", "--seed", "7", "--out", str(a))[0] == 0
    assert run(capsys, "simulate", "-n", "30", "--seed", "7", "--out", str(b))[0] == 0
    assert a.read_bytes() == b.read_bytes() and len(a.read_text().splitlines()) == 150
    code, out, _ = run(capsys, "metrics", "--input", str(a))
    assert code == 0


def test_simulate_bad_profile(capsys, tmp_path):
    p = tmp_path / "profile.json"
    p.write_text('{"name": "x", "levels": "oops"}')
    assert run(capsys, "simulate", "--profile", str(p))[0] == 2


def test_reproduce(capsys, tmp_path):
    code, out, _ = run(capsys, "reproduce", "table1", "--out-dir", str(tmp_path))
    assert code == 0 and "PASS table1" in out
    assert (tmp_path / "verdicts.txt").exists()
    code, out, _ = run(capsys, "reproduce", "table5-mistral")
    assert code == 0 and "PASS" in out


def test_classify_stub(capsys, tmp_path):
    texts = tmp_path / "texts.jsonl"
    texts.write_text("".join(json.dumps({"id": f"t{i}", "text": f"reasoning {i}"}) + "\n" for i in range(20)))
    out_file = tmp_path / "verdicts.jsonl"
    code, out, _ = run(capsys, "classify", "--input", str(texts), "--stub", "--out", str(out_file))
    assert code == 0 and "20" in out
    records = [json.loads(line) for line in out_file.read_text().splitlines()]
    assert len(records) == 20 and records[0]["id"] == "t0"


def test_classify_stub_table(capsys, tmp_path):
    texts = tmp_path / "texts.jsonl"
    texts.write_text(json.dumps({"text": "known"}) + "\n")
    table = tmp_path / "table.jsonl"
    v = ClassifierVerdict.for_role(Role.CRITICAL, reasoning="r")
    table.write_text(json.dumps({"digest": text_digest("known"), **v.to_dict()}) + "\n")
    code, out, _ = run(capsys, "classify", "--input", str(texts), "--stub", str(table))
    assert code == 0 and "CRITICAL" in out


def test_classify_needs_key(capsys, tmp_path, monkeypatch):
    monkeypatch.delenv("ROLEFIDELITY_API_KEY", raising=False)
    texts = tmp_path / "texts.jsonl"
    texts.write_text(json.dumps({"text": "x"}) + "\n")
    assert run(capsys, "classify", "--input", str(texts))[0] == 4


def test_consolidate(capsys, tmp_path):
    out_file = tmp_path / "reports.jsonl"
    code, out, _ = run(capsys, "consolidate", "--input", str(data_path("factcheck", "de_runs.jsonl")),
                       "--out", str(out_file), "--format", "dsv")
    assert code == 0
    assert len(parse_dsv(out)) == 60 == len(out_file.read_text().splitlines())
