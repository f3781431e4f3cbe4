import json

import pytest

from rolefidelity.model import (
    Category,
    Cohort,
    DimensionScores,
    Language,
    Role,
    SchemaError,
    StatementRef,
    category_of,
    load_cohort,
    load_statement_catalog,
    ordinal_to_role,
    parse_run_record,
    role_to_ordinal,
    serialize_run_record,
    write_cohort,
)

from .conftest import BAL, CHAR, CRIT, make_record

GOOD = {
    "statement_id": "B07",
    "language": "de",
    "true_role": "CHARITABLE",
    "predicted_role": "BALANCED",
    "run_index": 3,
    "logos": -1,
    "ethos": 1,
    "pathos": 0,
    "advocate_model": "claude-sonnet-4.6",
    "fc_provider": "perplexity",
    "prompt_version": "symmetric",
}


def test_role_ordinals_round_trip():
    assert [role_to_ordinal(r) for r in (CRIT, BAL, CHAR)] == [-1, 0, 1]
    for v in (-1, 0, 1):
        assert role_to_ordinal(ordinal_to_role(v)) == v
    with pytest.raises(ValueError):
        ordinal_to_role(2)
    assert CRIT < BAL < CHAR


def test_category_from_id():
    assert category_of("A07") is Category.A
    assert category_of("C10") is Category.C
    for bad in ("D01", "A", "07", "A0", ""):
        with pytest.raises(SchemaError):
            category_of(bad)


def test_catalog_ids():
    assert StatementRef("A10", Language.EN).is_catalog_id
    assert not StatementRef("A0011", Language.EN).is_catalog_id


def test_parse_valid_line():
    r = parse_run_record(json.dumps(GOOD))
    assert r.statement == StatementRef("B07", Language.DE)
    assert r.statement.category is Category.B
    assert r.distance == -1 and not r.correct
    assert r.scores == DimensionScores(-1, 1, 0)


@pytest.mark.parametrize("field", ["statement_id", "language", "true_role", "predicted_role", "run_index",
                                   "advocate_model", "fc_provider", "prompt_version"])
def test_missing_required_field(field):
    obj = dict(GOOD)
    del obj[field]
    with pytest.raises(SchemaError) as exc:
        parse_run_record(json.dumps(obj), line_no=7)
    assert exc.value.field == field and exc.value.line_no == 7


@pytest.mark.parametrize("field,value", [
    ("true_role", "NEUTRAL"), ("language", "fr"), ("logos", 3), ("ethos", 1.5),
    ("run_index", 0), ("statement_id", "Z01"), ("fc_provider", "bing"),
])
def test_bad_values(field, value):
    obj = dict(GOOD, **{field: value})
    with pytest.raises(SchemaError) as exc:
        parse_run_record(json.dumps(obj))
    assert exc.value.field == field


def test_partial_scores_rejected():
    obj = dict(GOOD)
    del obj["pathos"]
    with pytest.raises(SchemaError) as exc:
        parse_run_record(json.dumps(obj))
    assert exc.value.field == "pathos"


def test_not_json():
    with pytest.raises(SchemaError):
        parse_run_record("{not json")
    with pytest.raises(SchemaError):
        parse_run_record("[1, 2]")


def test_serialize_round_trip():
    r = parse_run_record(json.dumps(GOOD))
    line = serialize_run_record(r)
    assert parse_run_record(line) == r
    assert serialize_run_record(parse_run_record(line)) == line


def test_unscored_record_round_trip():
    r = make_record(BAL)
    assert r.scores is None
    assert "logos" not in serialize_run_record(r)
    assert parse_run_record(serialize_run_record(r)) == r


def test_load_strict_and_lenient(tmp_path):
    p = tmp_path / "c.jsonl"
    lines = [json.dumps(GOOD), "garbage", json.dumps(dict(GOOD, run_index=4)), ""]
    p.write_text("\n".join(lines), encoding="utf-8")
    with pytest.raises(SchemaError) as exc:
        load_cohort(p)
    assert exc.value.line_no == 2
    c = load_cohort(p, strict=False)
    assert len(c) == 2 and c.skipped == 1


def test_load_missing_file(tmp_path):
    with pytest.raises(SchemaError):
        load_cohort(tmp_path / "absent.jsonl")


def test_load_filter_and_order(tmp_path):
    records = [make_record(CHAR, run=i) for i in (3, 1, 2)] + [make_record(CRIT, CRIT, sid="C02")]
    p = tmp_path / "c.jsonl"
    write_cohort(records, p)
    c = load_cohort(p, lambda r: r.true_role is CHAR)
    assert [r.run_index for r in c] == [3, 1, 2]


def test_duplicate_identities():
    a = make_record(CHAR)
    c = Cohort((a, make_record(BAL), make_record(CHAR, run=2)))
    assert c.duplicate_identities() == [a.identity]


def test_statement_catalog():
    cat = load_statement_catalog()
    assert len(cat) == 60
    ids = {(e.ref.language.value, e.ref.id) for e in cat}
    assert ("en", "A01") in ids and ("de", "C10") in ids
    assert all(e.text.strip() for e in cat)
    assert cat.get("B03", "en").category is Category.B


def test_role_enum_values():
    assert Role("CHARITABLE") is CHAR
