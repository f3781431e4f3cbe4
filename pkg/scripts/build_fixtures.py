#!/usr/bin/env python3
"""Regenerate the packaged fixture cohorts, profiles and fact-check runs.

Only aggregate tables are published for these experiments, so each fixture is
a reconstruction: per-statement prediction patterns chosen so that the
fixture reproduces every published aggregate we assert against (confusion
matrices, per-category and per-Logos-level counts, per-statement means). The
patterns are written out literally below; the script itself has no
randomness except a seeded shuffle of run order inside a statement.

Usage: python scripts/build_fixtures.py
"""
from __future__ import annotations

import json
import random
from pathlib import Path

DATA = Path(__file__).resolve().parents[1] / "src" / "rolefidelity" / "data"
FIX = DATA / "fixtures"

CRIT, BAL, CHAR = "CRITICAL", "BALANCED", "CHARITABLE"
EN_IDS = [f"{c}{i:02d}" for c in "ABC" for i in range(1, 11)]

# Which run indices are absent when a statement has fewer than five runs.
MISSING = {4: (3,), 3: (2, 4)}


def runs_for(n: int) -> list[int]:
    gone = MISSING.get(n, ())
    return [i for i in range(1, 6) if i not in gone]


def expand(patterns: dict[str, tuple[int, int, int]], seed: str) -> list[tuple[str, int, str]]:
    """(statement_id, run_index, predicted_role) rows from per-statement (crit, bal, char) counts."""
    rows = []
    for sid in sorted(patterns):
        c, b, ch = patterns[sid]
        preds = [CRIT] * c + [BAL] * b + [CHAR] * ch
        random.Random(f"{seed}:{sid}").shuffle(preds)
        for run, pred in zip(runs_for(len(preds)), preds):
            rows.append((sid, run, pred))
    return rows


def sequential(total: tuple[int, int, int], ids: list[str], runs: int = 5) -> dict[str, tuple[int, int, int]]:
    """Fill statements one after another from a sorted prediction list."""
    preds = [CRIT] * total[0] + [BAL] * total[1] + [CHAR] * total[2]
    assert len(preds) == runs * len(ids), (total, len(ids))
    out = {}
    for k, sid in enumerate(ids):
        chunk = preds[k * runs:(k + 1) * runs]
        out[sid] = (chunk.count(CRIT), chunk.count(BAL), chunk.count(CHAR))
    return out


def assign_scores(rows, pools: dict[str, dict[str, list[int]]], severity):
    """Attach per-record scores by handing out level pools in order of statement severity.

    ``pools[dim][pred]`` is the multiset of levels for records predicted as
    ``pred``; it is consumed lowest-level-first by the most drifted statements.
    """
    order = sorted(range(len(rows)), key=lambda i: (-severity[rows[i][0]], rows[i][0], rows[i][1]))
    scores = [dict() for _ in rows]
    for dim, by_pred in pools.items():
        queues = {pred: sorted(levels) for pred, levels in by_pred.items()}
        for i in order:
            pred = rows[i][2]
            scores[i][dim] = queues[pred].pop(0)
        assert all(not q for q in queues.values()), (dim, {k: len(v) for k, v in queues.items()})
    return scores


def severity_of(patterns):
    return {sid: (2 * c + b) / (c + b + ch) for sid, (c, b, ch) in patterns.items()}


def write(name: str, rows, *, language: str, true_role: str, model: str, fc: str, prompt: str, scores=None):
    path = FIX / f"{name}.jsonl"
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for i, (sid, run, pred) in enumerate(rows):
            obj = {
                "statement_id": sid,
                "language": language,
                "true_role": true_role if isinstance(true_role, str) else true_role[i],
                "predicted_role": pred,
                "run_index": run,
            }
            if scores is not None:
                obj.update(scores[i])
            obj.update({"advocate_model": model, "fc_provider": fc, "prompt_version": prompt})
            fh.write(json.dumps(obj, separators=(",", ":")) + "\n")
    return len(rows)


def pools(**kw):
    """pools(logos={'CRITICAL': {-1: 12, 0: 3}, ...}) -> {'logos': {'CRITICAL': [-1]*12 + [0]*3}}"""
    return {dim: {pred: [lv for lv, n in levels.items() for _ in range(n)] for pred, levels in by_pred.items()}
            for dim, by_pred in kw.items()}


def ids(cat: str, *nums: int) -> list[str]:
    return [f"{cat}{n:02d}" for n in nums]


def assign(cat_patterns: dict[str, list[tuple[int, int, int]]], order: dict[str, list[str]] | None = None):
    out = {}
    for cat, pats in cat_patterns.items():
        sids = order[cat] if order and cat in order else ids(cat, *range(1, 11))
        assert len(sids) == len(pats)
        out.update(zip(sids, pats))
    return out


# ---------------------------------------------------------------- cohorts

def mistral_en_gemini():
    # (crit, bal, char); A has 46 runs, B 48, C 50 -> 144 with six parse failures
    pat = {
        "A01": (0, 0, 5), "A02": (2, 1, 2), "A03": (0, 4, 0), "A04": (1, 0, 2), "A05": (0, 0, 5),
        "A06": (1, 3, 0), "A07": (0, 4, 1), "A08": (0, 0, 5), "A09": (0, 0, 5), "A10": (5, 0, 0),
        "B01": (0, 0, 5), "B02": (0, 3, 2), "B03": (0, 4, 1), "B04": (0, 0, 4), "B05": (1, 2, 2),
        "B06": (0, 0, 5), "B07": (0, 0, 5), "B08": (0, 0, 4), "B09": (0, 0, 5), "B10": (0, 0, 5),
        "C01": (0, 0, 5), "C02": (0, 1, 4), "C03": (1, 0, 4), "C04": (1, 0, 4), "C05": (1, 1, 3),
        "C06": (2, 0, 3), "C07": (0, 0, 5), "C08": (0, 0, 5), "C09": (0, 5, 0), "C10": (0, 5, 0),
    }
    rows = expand(pat, "mistral_en_gemini")
    sc = assign_scores(rows, pools(
        # splits follow the printed DDI column (signed sums 36/24/3 for Logos, 26 for Pathos 0)
        logos={CRIT: {-1: 14, 0: 1}, BAL: {-1: 8, 0: 22, 1: 3}, CHAR: {-1: 10, 0: 32, 1: 54}},
        ethos={CRIT: {1: 15}, BAL: {1: 33}, CHAR: {1: 87, 2: 9}},
        pathos={CRIT: {0: 10, 1: 5}, BAL: {0: 6, 1: 27}, CHAR: {0: 5, 1: 90, 2: 1}},
    ), severity_of(pat))
    return rows, sc


def mistral_de_gemini():
    pat = {sid: (0, 0, 5) for sid in EN_IDS}
    pat.update({
        "A02": (0, 1, 4), "A03": (0, 2, 3), "A04": (1, 2, 2), "A10": (2, 2, 1),
        "B03": (0, 3, 2), "B05": (0, 3, 2), "B06": (0, 5, 0), "B10": (0, 5, 0),
        "C02": (0, 1, 4), "C03": (0, 2, 3), "C04": (0, 2, 3), "C05": (1, 2, 2), "C06": (1, 3, 1),
        "C08": (1, 4, 0), "C10": (5, 0, 0),
    })
    rows = expand(pat, "mistral_de_gemini")
    sc = assign_scores(rows, pools(
        logos={CRIT: {-1: 11}, BAL: {-1: 14, 0: 23}, CHAR: {-1: 5, 0: 17, 1: 80}},
        ethos={CRIT: {1: 11}, BAL: {1: 37}, CHAR: {1: 90, 2: 12}},
        pathos={CRIT: {0: 11}, BAL: {0: 10, 1: 27}, CHAR: {0: 6, 1: 94, 2: 2}},
    ), severity_of(pat))
    return rows, sc


def claude_en_gemini():
    pat = assign({
        "A": [(0, 0, 5)] * 3 + [(0, 1, 4), (0, 2, 3), (0, 3, 2), (1, 4, 0)] + [(5, 0, 0)] * 3,
        "B": [(0, 0, 5)] * 3 + [(0, 1, 4)] * 2 + [(0, 4, 1)] * 2 + [(5, 0, 0)] * 3,
        "C": [(0, 0, 5), (0, 3, 2), (0, 4, 1), (0, 4, 1), (1, 4, 0)] + [(5, 0, 0)] * 5,
    })
    rows = expand(pat, "claude_en_gemini")
    sc = assign_scores(rows, pools(
        logos={CRIT: {-1: 57}, BAL: {-1: 18, 0: 17}, CHAR: {0: 18, 1: 40}},
        ethos={CRIT: {0: 20, 1: 37}, BAL: {1: 35}, CHAR: {1: 50, 2: 8}},
        pathos={CRIT: {0: 57}, BAL: {0: 10, 1: 25}, CHAR: {1: 56, 2: 2}},
    ), severity_of(pat))
    return rows, sc


def claude_de_gemini():
    pat = assign({
        "A": [(0, 1, 4)] + [(0, 2, 3)] * 3 + [(1, 1, 3)] * 5 + [(2, 2, 1)],
        "B": [(0, 1, 4)] * 4 + [(0, 2, 3)] * 3 + [(0, 4, 1)] + [(4, 1, 0)] * 2,
        "C": [(0, 2, 3)] * 2 + [(0, 3, 2), (0, 5, 0), (1, 1, 3)] + [(1, 2, 2)] * 3 + [(4, 1, 0), (5, 0, 0)],
    })
    rows = expand(pat, "claude_de_gemini")
    sc = assign_scores(rows, pools(
        logos={CRIT: {-1: 28}, BAL: {-1: 30, 0: 20}, CHAR: {0: 22, 1: 50}},
        ethos={CRIT: {1: 28}, BAL: {1: 50}, CHAR: {1: 66, 2: 6}},
        pathos={CRIT: {0: 28}, BAL: {0: 20, 1: 30}, CHAR: {1: 72}},
    ), severity_of(pat))
    return rows, sc


def claude_en_floor():
    # Logos +2: 4 CHAR; +1: 40 CHAR; 0: 18 CHAR + 17 BAL; -1: 30 CRIT + 41 BAL
    pat = sequential((30, 58, 62), EN_IDS)
    rows = expand(pat, "claude_en_floor")
    sc = assign_scores(rows, pools(
        logos={CRIT: {-1: 30}, BAL: {-1: 41, 0: 17}, CHAR: {0: 18, 1: 40, 2: 4}},
        ethos={CRIT: {0: 30}, BAL: {0: 10, 1: 48}, CHAR: {1: 58, 2: 4}},
        pathos={CRIT: {0: 30}, BAL: {0: 20, 1: 38}, CHAR: {1: 60, 2: 2}},
    ), severity_of(pat))
    return rows, sc


def gemini_critical_en():
    # true role CRITICAL; predictions (crit, bal, char) = (78, 10, 62)
    pat = sequential((78, 10, 62), EN_IDS)
    rows = expand(pat, "gemini_critical_en")
    # reversed severity: statements whose critical stance held get low Logos
    sev = {sid: -(c / (c + b + ch)) for sid, (c, b, ch) in pat.items()}
    sc = assign_scores(rows, pools(
        logos={CRIT: {-2: 22, -1: 56}, BAL: {-1: 9, 0: 1}, CHAR: {-1: 7, 0: 1, 1: 32, 2: 22}},
        ethos={CRIT: {-1: 30, 0: 48}, BAL: {0: 10}, CHAR: {1: 62}},
        pathos={CRIT: {-1: 20, 0: 58}, BAL: {0: 10}, CHAR: {0: 12, 1: 50}},
    ), sev)
    return rows, sc


def phase3():
    rows, roles, models = [], [], []
    crit = sequential((120, 24, 6), EN_IDS)
    # B04 (rent control): two of five critical runs read as charitable
    crit_fixed = {sid: v for sid, v in crit.items()}
    movable = [sid for sid, v in crit_fixed.items() if v[2] > 0 and sid != "B04"]
    need = 2 - crit_fixed["B04"][2]
    while need > 0:
        donor = movable.pop()
        c, b, ch = crit_fixed[donor]
        crit_fixed[donor] = (c + 1, b, ch - 1)
        c, b, ch = crit_fixed["B04"]
        if c > 0:
            crit_fixed["B04"] = (c - 1, b, ch + 1)
        else:
            crit_fixed["B04"] = (c, b - 1, ch + 1)
        need -= 1
    assert crit_fixed["B04"][2] == 2
    for role, model, pat in (
        (CRIT, "gemini-2.5-flash", crit_fixed),
        (BAL, "gpt-5.2", sequential((17, 133, 0), EN_IDS)),
        (CHAR, "claude-sonnet-4.6", sequential((69, 66, 15), EN_IDS)),
    ):
        part = expand(pat, f"phase3:{role}")
        rows += part
        roles += [role] * len(part)
        models += [model] * len(part)
    return rows, roles, models


def write_phase3():
    rows, roles, models = phase3()
    path = FIX / "phase3.jsonl"
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for (sid, run, pred), role, model in zip(rows, roles, models):
            obj = {"statement_id": sid, "language": "en", "true_role": role, "predicted_role": pred,
                   "run_index": run, "advocate_model": model, "fc_provider": "gemini", "prompt_version": "baseline"}
            fh.write(json.dumps(obj, separators=(",", ":")) + "\n")
    return len(rows)


def totals_only(name, total, language, model, fc):
    pat = sequential(total, EN_IDS)
    rows = expand(pat, name)
    return write(name, rows, language=language, true_role=CHAR, model=model, fc=fc, prompt="symmetric")


# ---------------------------------------------------------------- profiles

def write_profiles():
    charitable = {
        "name": "charitable",
        "runs_per_statement": 5,
        "logos_mix": {"-1": "71/150", "0": "35/150", "1": "40/150", "2": "4/150"},
        "triples": [
            {"true_role": CHAR, "logos": -1, "p": ["30/71", "41/71", "0"], "counts": [30, 41, 0]},
            {"true_role": CHAR, "logos": 0, "p": ["0", "17/35", "18/35"], "counts": [0, 17, 18]},
            {"true_role": CHAR, "logos": 1, "p": ["0", "0", "1"], "counts": [0, 0, 40]},
            {"true_role": CHAR, "logos": 2, "p": ["0", "0", "1"], "counts": [0, 0, 4]},
        ],
    }
    critical = {
        "name": "critical",
        "runs_per_statement": 5,
        "logos_mix": {"-2": "22/150", "-1": "72/150", "0": "2/150", "1": "32/150", "2": "22/150"},
        "triples": [
            {"true_role": CRIT, "logos": -2, "p": ["1", "0", "0"], "counts": [22, 0, 0]},
            {"true_role": CRIT, "logos": -1, "p": ["56/72", "9/72", "7/72"], "counts": [56, 9, 7]},
            {"true_role": CRIT, "logos": 0, "p": ["0", "1/2", "1/2"], "counts": [0, 1, 1]},
            {"true_role": CRIT, "logos": 1, "p": ["0", "0", "1"], "counts": [0, 0, 32]},
            {"true_role": CRIT, "logos": 2, "p": ["0", "0", "1"], "counts": [0, 0, 22]},
        ],
    }
    for obj in (charitable, critical):
        (DATA / "profiles" / f"{obj['name']}.json").write_text(json.dumps(obj, indent=2) + "\n", encoding="utf-8")


# ---------------------------------------------------------------- fact-check runs

VOCAB = """
budget deficit employment wages inflation pension insurance tariff housing rent
energy price subsidy emission carbon migration asylum border police court ruling
statute survey sample cohort decline increase region municipality broadcaster
license fee audience market competition startup productivity commute office
school tuition hospital clinic premium contribution retiree surplus debt bond
investment infrastructure railway highway broadband grid turbine reactor coal gas
refinery export import sanction currency exchange bank lending mortgage vacancy
tenant landlord construction permit zoning density suburb census fertility birth
parental allowance childcare nursery teacher curriculum exam graduate apprentice
""".split()


def claim_text(rng: random.Random, tag: str) -> list[str]:
    return rng.sample(VOCAB, 6) + [tag]


def variant(tokens: list[str], rng: random.Random, fuzzy: bool) -> str:
    words = list(tokens)
    if fuzzy:
        # paraphrase: swap one content word (similarity 6/7 >= 0.8)
        words[rng.randrange(6)] = rng.choice(["notably", "reportedly", "officially"])
    style = rng.randrange(3)
    text = " ".join(words)
    if style == 0:
        return text.capitalize() + "."
    if style == 1:
        return text.upper() + "!"
    return "  " + text.replace(" ", "  ") + " ;"


def write_factcheck():
    rng = random.Random("factcheck-de")
    lines = []
    de_ids = EN_IDS
    gemini_counts = [2] * 9 + [1] * 21  # mean 1.3
    perplexity_counts = [3] * 15 + [2] * 15  # mean 2.5
    rng.shuffle(gemini_counts)
    rng.shuffle(perplexity_counts)
    for provider, counts in (("gemini", gemini_counts), ("perplexity", perplexity_counts)):
        for sid, n_contra in zip(de_ids, counts):
            per_run: dict[int, list[tuple[str, str]]] = {i: [] for i in range(1, 6)}
            for kind, n_kept in (("contradiction", n_contra), ("fact", rng.randint(1, 3)), ("missing_context", 1)):
                for j in range(n_kept):
                    tokens = claim_text(rng, f"{kind[:1]}{j}{sid.lower()}")
                    support = rng.randint(2, 5)
                    for k, run in enumerate(sorted(rng.sample(range(1, 6), support))):
                        per_run[run].append((kind, variant(tokens, rng, fuzzy=(k == 1 and rng.random() < 0.3))))
                # one-off outputs that the consensus rule must drop
                run = rng.randint(1, 5)
                per_run[run].append((kind, variant(claim_text(rng, f"x{kind[:1]}{sid.lower()}"), rng, False)))
            for run in range(1, 6):
                for kind, text in per_run[run]:
                    lines.append({"statement_id": sid, "language": "de", "provider": provider,
                                  "run_index": run, "kind": kind, "text": text})
    path = DATA / "factcheck" / "de_runs.jsonl"
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for obj in lines:
            fh.write(json.dumps(obj, ensure_ascii=False, separators=(",", ":")) + "\n")
    return len(lines)


def main():
    FIX.mkdir(parents=True, exist_ok=True)
    (DATA / "profiles").mkdir(exist_ok=True)
    (DATA / "factcheck").mkdir(exist_ok=True)
    counts = {}
    for name, fn, lang, model, fc in (
        ("mistral_en_gemini", mistral_en_gemini, "en", "mistral-large", "gemini"),
        ("mistral_de_gemini", mistral_de_gemini, "de", "mistral-large", "gemini"),
        ("claude_en_gemini", claude_en_gemini, "en", "claude-sonnet-4.6", "gemini"),
        ("claude_de_gemini", claude_de_gemini, "de", "claude-sonnet-4.6", "gemini"),
        ("claude_en_floor", claude_en_floor, "en", "claude-sonnet-4.6", "gemini"),
    ):
        rows, sc = fn()
        counts[name] = write(name, rows, language=lang, true_role=CHAR, model=model, fc=fc,
                             prompt="symmetric", scores=sc)
    rows, sc = gemini_critical_en()
    counts["gemini_critical_en"] = write("gemini_critical_en", rows, language="en", true_role=CRIT,
                                         model="gemini-2.5-flash", fc="gemini", prompt="symmetric", scores=sc)
    counts["claude_en_perplexity"] = totals_only("claude_en_perplexity", (42, 41, 67), "en", "claude-sonnet-4.6", "perplexity")
    counts["claude_de_perplexity"] = totals_only("claude_de_perplexity", (45, 56, 49), "de", "claude-sonnet-4.6", "perplexity")
    counts["mistral_en_perplexity"] = totals_only("mistral_en_perplexity", (12, 49, 89), "en", "mistral-large", "perplexity")
    counts["mistral_de_perplexity"] = totals_only("mistral_de_perplexity", (16, 31, 103), "de", "mistral-large", "perplexity")
    counts["phase3"] = write_phase3()
    write_profiles()
    counts["factcheck_lines"] = write_factcheck()
    for k, v in counts.items():
        print(f"{k}: {v}")


if __name__ == "__main__":
    main()
