import pytest
from hypothesis import given
from hypothesis import strategies as st

from rolefidelity.report import (
    Column,
    ReportTable,
    fmt_metric,
    fmt_pct,
    fmt_pp,
    fmt_pvalue,
    fmt_signed,
    parse_dsv,
    parse_pct,
)


@pytest.mark.parametrize("value,text", [(0.285, "29%"), (0.7916, "79%"), (0.005, "1%"), (1.0, "100%"), (0.0, "0%")])
def test_pct(value, text):
    assert fmt_pct(value) == text


@pytest.mark.parametrize("value,text", [(0.4375, "0.438"), (0.2225, "0.223"), (1.36, "1.360"), (-0.0001, "0.000")])
def test_metric(value, text):
    assert fmt_metric(value) == text


def test_signed_and_pp():
    assert fmt_signed(0.24) == "+0.240"
    assert fmt_signed(-1.36) == "-1.360"
    assert fmt_signed(-0.0002) == "+0.000"
    assert fmt_pp(28.4) == "+28pp" and fmt_pp(-3.5) == "-4pp"


@pytest.mark.parametrize("p,text", [(0.0004, "<0.001"), (0.001, "0.001"), (0.8065, "0.807"), (1.0, "1.000")])
def test_pvalue(p, text):
    assert fmt_pvalue(p) == text


def test_unknown_kind_rejected():
    with pytest.raises(ValueError):
        Column("x", "money")


def _table():
    t = ReportTable("Demo", [Column("Cohort"), Column("n", "int"), Column("Acc", "pct"), Column("EDD", "metric"),
                             Column("RDI", "metric")])
    t.add_row("Mistral EN", 144, 96 / 144, 0.4375, None)
    t.add_row("Claude, DE", 150, 0.5, 0.1, 0.6)
    return t


def test_render_text_alignment():
    lines = _table().render_text().splitlines()
    assert lines[0] == "Demo"
    header, row = lines[2], lines[4]
    assert header.index("Acc") + 3 == row.index("67%") + 3
    assert "n/a" in lines[4]


def test_dsv_round_trip():
    t = _table()
    rows = parse_dsv(t.render_dsv())
    assert [r["Cohort"] for r in rows] == ["Mistral EN", "Claude, DE"]
    assert parse_pct(rows[0]["Acc"]) == pytest.approx(96 / 144, abs=0.005)
    assert float(rows[0]["EDD"]) == pytest.approx(0.4375, abs=5e-4 + 1e-9)
    assert rows[0]["RDI"] == "n/a"


def test_row_length_checked():
    with pytest.raises(ValueError):
        _table().add_row("x", 1)


def test_render_unknown_format():
    with pytest.raises(ValueError):
        _table().render("html")


@given(st.floats(0, 1, allow_nan=False))
def test_pct_within_half_point(x):
    assert abs(parse_pct(fmt_pct(x)) - x) <= 0.005 + 1e-12
