import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rolefidelity.consensus import (
    ClaimItem,
    ConsolidatedReport,
    FactCheckRun,
    consolidate,
    consolidate_file,
    contradiction_stats,
    match_claims,
    normalize,
    token_similarity,
)
from rolefidelity.model import FcProvider, Language, SchemaError, data_path

GEM = FcProvider("gemini")


def runs_with(contradictions_by_run, sid="A01", lang=Language.EN):
    return [
        FactCheckRun(sid, GEM, i, contradictions=tuple(ClaimItem(t) for t in contradictions_by_run.get(i, ())), language=lang)
        for i in range(1, 6)
    ]


def test_verbatim_claim_in_two_runs_kept():
    rep = consolidate(runs_with({2: ["The budget doubled in 2020."], 5: ["The budget doubled in 2020."]}))
    assert [(c.text, c.support) for c in rep.contradictions] == [("The budget doubled in 2020.", 2)]


def test_single_run_claim_dropped():
    rep = consolidate(runs_with({3: ["Only one run says this."]}))
    assert rep.contradictions == () and rep.contradiction_count == 0


def test_empty_runs_give_empty_report():
    rep = consolidate(runs_with({}))
    assert rep.facts == rep.contradictions == rep.missing_context == ()


def test_case_and_whitespace_variants_match():
    rep = consolidate(runs_with({1: ["Unemployment  ROSE sharply!"], 4: ["unemployment rose sharply"]}))
    assert rep.contradictions[0].support == 2
    assert rep.contradictions[0].text == "Unemployment  ROSE sharply!"


def test_normalize():
    assert normalize("  Hello,   World!\n«Quote»  ") == "hello world quote"
    assert normalize("") == ""


def test_similarity_threshold():
    a = ClaimItem("alpha beta gamma delta epsilon")
    b = ClaimItem("alpha beta gamma delta zeta")
    assert token_similarity(a, b) == pytest.approx(0.8)
    assert match_claims(a, b)
    assert not match_claims(a, ClaimItem("alpha beta gamma eta zeta"))
    assert not match_claims(ClaimItem("tax cuts"), ClaimItem("health spending"))
    assert match_claims(ClaimItem("the tax cut"), ClaimItem("tax cut"), stopwords=frozenset({"the"}))


def test_transitive_grouping_counts_runs():
    a = "alpha beta gamma delta epsilon"
    b = "alpha beta gamma delta zeta"  # matches a
    c = "alpha beta gamma eta zeta"  # matches b, not a
    rep = consolidate(runs_with({1: [a], 2: [b], 3: [c]}))
    assert len(rep.contradictions) == 1 and rep.contradictions[0].support == 3


def test_support_counts_distinct_runs():
    rep = consolidate(runs_with({1: ["same claim", "Same claim."]}))
    assert rep.contradictions == ()


def test_mixed_support_set():
    rep = consolidate(runs_with({
        1: ["claim five", "claim three", "claim two"],
        2: ["claim five", "claim three", "claim two"],
        3: ["claim five", "claim three", "claim one"],
        4: ["claim five"],
        5: ["claim five"],
    }))
    assert [(c.text, c.support) for c in rep.contradictions] == [("claim five", 5), ("claim three", 3), ("claim two", 2)]


def test_validation_errors():
    with pytest.raises(ValueError):
        consolidate(runs_with({})[:4])
    mixed = runs_with({})
    mixed[4] = FactCheckRun("B02", GEM, 5)
    with pytest.raises(ValueError):
        consolidate(mixed)
    dup = runs_with({})
    dup[4] = FactCheckRun("A01", GEM, 4)
    with pytest.raises(ValueError):
        consolidate(dup)
    with pytest.raises(SchemaError):
        FactCheckRun("A01", GEM, 6)


def test_custom_matcher():
    rep = consolidate(runs_with({1: ["x"], 2: ["y"]}), matcher=lambda a, b: True)
    assert rep.contradictions[0].support == 2


words = st.sampled_from(["tax", "rate", "rose", "fell", "jobs", "debt", "the", "growth"])
claims = st.lists(words, min_size=1, max_size=5).map(" ".join)
run_lists = st.lists(st.lists(claims, max_size=4), min_size=5, max_size=5)


def _build(lists, order):
    return [FactCheckRun("A01", GEM, i + 1, contradictions=tuple(ClaimItem(t) for t in lists[i])) for i in order]


@settings(max_examples=150)
@given(run_lists, st.permutations(range(5)))
def test_permutation_invariance(lists, order):
    assert consolidate(_build(lists, range(5))) == consolidate(_build(lists, order))


@settings(max_examples=150)
@given(run_lists, claims, st.integers(0, 4))
def test_adding_a_claim_never_removes_groups(lists, extra, run):
    before = consolidate(_build(lists, range(5)))
    grown = [list(x) for x in lists]
    grown[run].append(extra)
    after = consolidate(_build(grown, range(5)))
    # every previously supported claim text still belongs to some kept group
    kept_after = {t for c in after.contradictions for t in c.members}
    assert all(set(c.members) <= kept_after for c in before.contradictions)


@given(run_lists)
def test_support_bounds(lists):
    for c in consolidate(_build(lists, range(5))).contradictions:
        assert 2 <= c.support <= 5


@given(st.text(max_size=50))
def test_normalize_idempotent(text):
    assert normalize(normalize(text)) == normalize(text)


def test_contradiction_stats_fixture():
    reports = consolidate_file(data_path("factcheck", "de_runs.jsonl"))
    stats = contradiction_stats(reports)
    assert stats[(FcProvider("gemini"), Language.DE)] == pytest.approx(1.3, abs=0.05)
    assert stats[(FcProvider("perplexity"), Language.DE)] == pytest.approx(2.5, abs=0.05)


def test_contradiction_stats_small():
    rep = consolidate(runs_with({1: ["a b"], 2: ["a b"]}))
    assert contradiction_stats([rep]) == {(GEM, Language.EN): 1.0}
    empty = ConsolidatedReport("B01", GEM)
    assert contradiction_stats([rep, empty]) == {(GEM, Language.EN): 0.5}
    with pytest.raises(ValueError):
        contradiction_stats([])


def test_file_schema_errors(tmp_path):
    p = tmp_path / "bad.jsonl"
    p.write_text('{"statement_id": "A01", "provider": "gemini", "run_index": 1, "kind": "opinion", "text": "x"}\n')
    with pytest.raises(SchemaError):
        consolidate_file(p)
    p.write_text('{"statement_id": "A01", "provider": "gemini", "run_index": 9, "kind": "fact", "text": "x"}\n')
    with pytest.raises(SchemaError):
        consolidate_file(p)
