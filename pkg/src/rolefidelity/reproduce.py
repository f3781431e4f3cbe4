"""Rebuild the published tables from the shipped fixtures and check them.

Each builder returns a :class:`ReportTable` plus the :class:`Check` list
comparing recomputed values with the published ones. A check marked as a
known deviation is reported but does not fail its table; the reason is
printed next to it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Callable

from .analysis import breakdown, compare_cohorts, two_proportion_z
from .consensus import consolidate_file, contradiction_stats
from .metrics import metrics_summary
from .model import Cohort, FcProvider, Language, Role, data_path, load_cohort
from .report import Column, ReportTable, fmt_metric

PCT_TOL = 0.005  # half a displayed percentage point
METRIC_TOL = 5e-4
P_TOL = 5e-4
Z_TOL = 0.005

FIXTURES = {
    "phase3": "phase3.jsonl",
    "claude_en_floor": "claude_en_floor.jsonl",
    "gemini_critical_en": "gemini_critical_en.jsonl",
    "claude_en_gemini": "claude_en_gemini.jsonl",
    "claude_en_perplexity": "claude_en_perplexity.jsonl",
    "claude_de_gemini": "claude_de_gemini.jsonl",
    "claude_de_perplexity": "claude_de_perplexity.jsonl",
    "mistral_en_gemini": "mistral_en_gemini.jsonl",
    "mistral_en_perplexity": "mistral_en_perplexity.jsonl",
    "mistral_de_gemini": "mistral_de_gemini.jsonl",
    "mistral_de_perplexity": "mistral_de_perplexity.jsonl",
}


def fixture_path(name: str) -> Path:
    if name not in FIXTURES:
        raise KeyError(name)
    return data_path("fixtures", FIXTURES[name])


@lru_cache(maxsize=None)
def fixture(name: str) -> Cohort:
    return load_cohort(fixture_path(name), label=name)


@dataclass(frozen=True)
class Check:
    label: str
    value: float
    expected: float
    tol: float
    known_deviation: str = ""

    @property
    def ok(self) -> bool:
        # slack for values sitting exactly on a rounding boundary (0.4375 vs 0.438)
        return abs(self.value - self.expected) <= self.tol + 1e-9

    @property
    def counts(self) -> bool:
        """Whether this check decides the table verdict."""
        return not self.known_deviation

    def describe(self) -> str:
        status = "ok" if self.ok else ("known deviation" if self.known_deviation else "MISMATCH")
        line = f"{self.label}: got {self.value:.6g}, expected {self.expected:.6g} (tol {self.tol:g}) {status}"
        if self.known_deviation and not self.ok:
            line += f" - {self.known_deviation}"
        return line


@dataclass(frozen=True)
class UpperCheck(Check):
    """Passes when value < expected (used for '<0.001' cells)."""

    @property
    def ok(self) -> bool:
        return self.value < self.expected


@dataclass
class TableResult:
    name: str
    table: ReportTable
    checks: list[Check]

    @property
    def passed(self) -> bool:
        return all(c.ok for c in self.checks if c.counts)

    def verdict_line(self) -> str:
        scored = [c for c in self.checks if c.counts]
        good = sum(c.ok for c in scored)
        tag = "PASS" if self.passed else "FAIL"
        extra = sum(1 for c in self.checks if not c.counts and not c.ok)
        note = f", {extra} known deviation(s)" if extra else ""
        return f"{tag} {self.name} ({good}/{len(scored)} checks{note})"


def _pct_checks(checks: list[Check], label: str, acc: float, expected_pct: float) -> None:
    checks.append(Check(f"{label} accuracy", acc, expected_pct / 100.0, PCT_TOL))


# --- tables ------------------------------------------------------------------

SUMMARY_COLS = [
    Column("Role"), Column("Correct", "int"), Column("Total", "int"), Column("Accuracy", "pct"),
    Column("EDD", "metric"), Column("EDD SD", "metric"), Column("DDI", "signed"),
]

TABLE1 = {
    # role: (correct, total, accuracy, edd, ddi)
    Role.CRITICAL: (120, 150, 0.800, 0.240, 0.240),
    Role.BALANCED: (133, 150, 0.887, 0.113, -0.113),
    Role.CHARITABLE: (15, 150, 0.100, 1.360, -1.360),
    None: (268, 450, 0.596, 0.571, -0.411),
}


def table1() -> TableResult:
    cohort = fixture("phase3")
    t = ReportTable("Classifier accuracy by assigned role (Phase 3 matrix)", SUMMARY_COLS)
    checks: list[Check] = []
    for role, (k, n, acc, e, d) in TABLE1.items():
        sub = cohort if role is None else cohort.select(lambda r, role=role: r.true_role is role)
        s = metrics_summary(sub)
        name = "Overall" if role is None else role.value.capitalize()
        t.add_row(name, s.correct, s.n, s.accuracy, s.edd_mean, s.edd_sd_obs, s.ddi)
        checks += [
            Check(f"{name} correct", s.correct, k, 0),
            Check(f"{name} total", s.n, n, 0),
            Check(f"{name} accuracy", s.accuracy, acc, METRIC_TOL),
            Check(f"{name} EDD", s.edd_mean, e, METRIC_TOL),
            Check(f"{name} DDI", s.ddi, d, METRIC_TOL),
        ]
    return TableResult("table1", t, checks)


LOGOS_COLS = [
    Column("Logos"), Column("Correct", "int"), Column("Total", "int"),
    Column("Accuracy", "pct"), Column("EDD", "metric"), Column("EDD SD", "metric"), Column("DDI", "signed"),
]

TABLE2 = {2: (4, 4, 0.0), 1: (40, 40, 0.0), 0: (18, 35, 0.494), -1: (0, 71, 1.423)}


def _level(k: int) -> str:
    return f"{k:+d}" if k else "0"


def table2() -> TableResult:
    b = breakdown(fixture("claude_en_floor"), "logos")
    t = ReportTable("Charitable accuracy by Logos score (Claude EN, symmetric prompt)", LOGOS_COLS)
    checks: list[Check] = []
    for level, (k, n, e) in TABLE2.items():
        s = b.groups[level]
        t.add_row(_level(level), s.correct, s.n, s.accuracy, s.edd_mean, s.edd_sd_obs, s.ddi)
        lab = f"Logos {_level(level)}"
        checks += [Check(f"{lab} correct", s.correct, k, 0), Check(f"{lab} total", s.n, n, 0)]
        if level == 0:
            # 17/35 and 18/35 give 0.486 and 0.514; neither prints as 0.494
            checks.append(Check(f"{lab} EDD", s.edd_mean, e, METRIC_TOL,
                                "0.494 is not attainable with 35 records and 18 correct"))
        else:
            checks.append(Check(f"{lab} EDD", s.edd_mean, e, 0.001 if level == -1 else METRIC_TOL))
    return TableResult("table2", t, checks)


TABLE3_CHAR = {-1: (75, 0, -1.760), 0: (35, 51, -0.486), 1: (40, 100, 0.0)}
TABLE3_CRIT = {-2: (22, 100, 0.0), -1: (72, 78, 0.319), 0: (2, 0, 1.5), 1: (32, 0, 2.0), 2: (22, 0, 2.0)}


def table3() -> TableResult:
    cols = [Column("Role"), Column("Logos"), Column("n", "int"), Column("Accuracy", "pct"), Column("DDI", "signed")]
    t = ReportTable("Logos profiles for the charitable and critical roles", cols)
    checks: list[Check] = []
    for role, fx, expected in (("Charitable", "claude_en_gemini", TABLE3_CHAR),
                               ("Critical", "gemini_critical_en", TABLE3_CRIT)):
        b = breakdown(fixture(fx), "logos")
        for level, (n, acc, d) in expected.items():
            s = b.groups[level]
            t.add_row(role, _level(level), s.n, s.accuracy, s.ddi)
            lab = f"{role} Logos {_level(level)}"
            checks.append(Check(f"{lab} n", s.n, n, 0))
            _pct_checks(checks, lab, s.accuracy, acc)
            checks.append(Check(f"{lab} DDI", s.ddi, d, METRIC_TOL))
    return TableResult("table3", t, checks)


CONFIGS = [("Claude", "claude"), ("Mistral", "mistral")]
SETTINGS = [("EN", "en", "G", "gemini"), ("EN", "en", "P", "perplexity"),
            ("DE", "de", "G", "gemini"), ("DE", "de", "P", "perplexity")]

TABLE4 = {  # (lang, fc): (delta pp, p or None for "<0.001")
    ("en", "gemini"): (28, None),
    ("en", "perplexity"): (15, 0.011),
    ("de", "gemini"): (20, None),
    ("de", "perplexity"): (36, None),
}


def table4() -> TableResult:
    cols = [Column("Lang"), Column("FC"), Column("Claude Acc", "pct"), Column("Mistral Acc", "pct"),
            Column("Delta", "pp"), Column("z", "z"), Column("p", "p"), Column("Sig")]
    t = ReportTable("Claude vs Mistral accuracy (two-sided two-proportion z-test)", cols)
    checks: list[Check] = []
    for (lang, fc), (delta, p) in TABLE4.items():
        r = compare_cohorts(fixture(f"claude_{lang}_{fc}"), fixture(f"mistral_{lang}_{fc}"))
        t.add_row(lang.upper(), fc.capitalize(), r.p1, r.p2, r.delta_pp, r.z, r.p_value, r.label)
        lab = f"{lang.upper()}+{fc[0].upper()}"
        checks.append(Check(f"{lab} delta pp", r.delta_pp, delta, 0.5))
        if p is None:
            checks.append(UpperCheck(f"{lab} p", r.p_value, 0.001, 0))
        else:
            checks.append(Check(f"{lab} p", r.p_value, p, P_TOL))
    return TableResult("table4", t, checks)


TABLE5 = {  # (model, lang, fc): (n, acc %, edd, rdi, ers)
    ("claude", "en", "gemini"): (150, 39, 0.993, 0.810, 1.075),
    ("claude", "en", "perplexity"): (150, 45, 0.833, 0.753, 1.071),
    ("claude", "de", "gemini"): (150, 48, 0.707, 0.679, 1.032),
    ("claude", "de", "perplexity"): (150, 33, 0.973, 0.723, 1.095),
    ("mistral", "en", "gemini"): (144, 67, 0.438, 0.656, 0.844),
    ("mistral", "en", "perplexity"): (150, 59, 0.487, 0.598, 0.877),
    ("mistral", "de", "gemini"): (150, 68, 0.393, 0.615, 0.799),
    ("mistral", "de", "perplexity"): (150, 69, 0.420, 0.670, 0.823),
}


def _table5(models: tuple[str, ...], name: str) -> TableResult:
    cols = [Column("Model"), Column("Config"), Column("n", "int"), Column("Acc", "pct"), Column("EDD", "metric"),
            Column("EDD SD", "metric"), Column("DDI", "signed"), Column("RDI", "metric"), Column("ERS", "metric")]
    t = ReportTable("Role fidelity across configurations (pooled estimators)", cols)
    checks: list[Check] = []
    for (model, lang, fc), (n, acc, e, rd, ers) in TABLE5.items():
        if model not in models:
            continue
        s = metrics_summary(fixture(f"{model}_{lang}_{fc}"))
        config = f"{lang.upper()} + {fc[0].upper()}"
        t.add_row(model.capitalize(), config, s.n, s.accuracy, s.edd_mean, s.edd_sd_obs, s.ddi, s.rdi, s.ers_pooled)
        lab = f"{model.capitalize()} {config}"
        checks.append(Check(f"{lab} n", s.n, n, 0))
        _pct_checks(checks, lab, s.accuracy, acc)
        checks += [
            Check(f"{lab} EDD", s.edd_mean, e, METRIC_TOL),
            Check(f"{lab} DDI", s.ddi, -e, METRIC_TOL),
            Check(f"{lab} RDI", s.rdi if s.rdi is not None else math.nan, rd, METRIC_TOL),
            Check(f"{lab} ERS", s.ers_pooled, ers, METRIC_TOL),
        ]
    t.footnotes.append("EN + G Mistral: 144 of 150 runs (6 classifier parse failures).")
    return TableResult(name, t, checks)


def table5() -> TableResult:
    return _table5(("claude", "mistral"), "table5")


def table5_mistral() -> TableResult:
    return _table5(("mistral",), "table5-mistral")


TABLE6 = {  # language: (correct, n, rdi, edd per statement, ers per statement, logos -1 acc %)
    "en": (96, 144, 0.656, 0.444, 0.270, 31),
    "de": (102, 150, 0.615, 0.393, 0.299, 17),
}


def table6() -> TableResult:
    cols = [Column("Metric"), Column("English", "metric"), Column("German", "metric"), Column("Delta", "signed")]
    t = ReportTable("Language robustness, Mistral charitable advocate (per-statement estimators)", cols)
    checks: list[Check] = []
    s = {lang: metrics_summary(fixture(f"mistral_{lang}_gemini")) for lang in TABLE6}
    floor = {lang: breakdown(fixture(f"mistral_{lang}_gemini"), "logos").groups[-1].accuracy for lang in TABLE6}
    rows = [
        ("Accuracy", s["en"].accuracy, s["de"].accuracy),
        ("RDI", s["en"].rdi, s["de"].rdi),
        ("EDD", s["en"].edd_stmt_mean, s["de"].edd_stmt_mean),
        ("DDI", s["en"].ddi_stmt_mean, s["de"].ddi_stmt_mean),
        ("ERS", s["en"].ers_stmt_mean, s["de"].ers_stmt_mean),
        ("Logos -1 accuracy", floor["en"], floor["de"]),
    ]
    for label, en, de in rows:
        t.add_row(label, en, de, de - en)
    for lang, (k, n, rd, e, ers, fl) in TABLE6.items():
        L = lang.upper()
        checks += [
            Check(f"{L} correct", s[lang].correct, k, 0),
            Check(f"{L} n", s[lang].n, n, 0),
            Check(f"{L} RDI", s[lang].rdi, rd, METRIC_TOL),
            Check(f"{L} EDD (per statement)", s[lang].edd_stmt_mean, e, METRIC_TOL),
            Check(f"{L} DDI (per statement)", s[lang].ddi_stmt_mean, -e, METRIC_TOL),
            Check(f"{L} ERS (per statement)", s[lang].ers_stmt_mean, ers, METRIC_TOL),
        ]
        _pct_checks(checks, f"{L} Logos -1", floor[lang], fl)
    z = compare_cohorts(fixture("mistral_en_gemini"), fixture("mistral_de_gemini"))
    t.footnotes.append(f"Accuracy EN vs DE: z = {z.z:+.2f}, p = {fmt_metric(z.p_value)} ({z.label})")
    checks += [Check("accuracy |z|", abs(z.z), 0.24, 0.01), Check("accuracy p", z.p_value, 0.807, 0.002)]
    return TableResult("table6", t, checks)


TABLE7 = {  # (model, lang): (delta pp, z, p)
    ("claude", "en"): (6, -1.05, 0.292),
    ("claude", "de"): (-15, 2.71, 0.007),
    ("mistral", "en"): (-7, 1.30, 0.193),
    ("mistral", "de"): (1, -0.12, 0.901),
}


def table7() -> TableResult:
    cols = [Column("Model"), Column("Lang"), Column("Gemini Acc", "pct"), Column("Perplexity Acc", "pct"),
            Column("Delta", "pp"), Column("z", "z"), Column("p", "p"), Column("Sig")]
    t = ReportTable("Fact-check provider comparison (two-sided two-proportion z-test)", cols)
    checks: list[Check] = []
    for (model, lang), (delta, z, p) in TABLE7.items():
        r = compare_cohorts(fixture(f"{model}_{lang}_gemini"), fixture(f"{model}_{lang}_perplexity"))
        t.add_row(model.capitalize(), lang.upper(), r.p1, r.p2, r.delta_pp, r.z, r.p_value, r.label)
        lab = f"{model.capitalize()} {lang.upper()}"
        checks += [
            Check(f"{lab} delta pp", r.delta_pp, delta, 0.5),
            Check(f"{lab} z", r.z, z, Z_TOL),
            Check(f"{lab} p", r.p_value, p, P_TOL),
        ]
    alt = two_proportion_z(72, 150, 50, 150)
    t.footnotes.append(f"Claude DE with 50/150 Perplexity successes would give z = {alt.z:.2f}.")
    return TableResult("table7", t, checks)


CATEGORY = {  # (fixture, label): {cat: (n, acc %, edd per statement, ers per statement)}
    ("mistral_en_gemini", "Mistral EN"): {
        "A": (46, 54, 0.672, 0.275), "B": (48, 79, 0.220, 0.223), "C": (50, 66, 0.440, 0.312),
        "All": (144, 67, 0.444, 0.270)},
    ("mistral_de_gemini", "Mistral DE"): {
        "A": (50, 80, 0.260, 0.328), "B": (50, 68, 0.320, 0.135), "C": (50, 56, 0.600, 0.435),
        "All": (150, 68, 0.393, 0.299)},
    ("claude_en_gemini", "Claude EN"): {
        "A": (50, 48, 0.840, 0.235), "B": (50, 50, 0.800, 0.200), "C": (50, 18, 1.340, 0.217),
        "All": (150, 39, 0.993, 0.217)},
    ("claude_de_gemini", "Claude DE"): {
        "A": (50, 58, 0.560, 0.832), "B": (50, 52, 0.640, 0.552), "C": (50, 34, 0.920, 0.664),
        "All": (150, 48, 0.707, 0.683)},
}

# With ten 5-run statements the per-statement entropy can only take the values
# 0, 0.5004, 0.6730, 0.9503 and 1.0549; no mix of ten of them has a mean
# within 5e-4 of these printed cells.
_CATEGORY_UNATTAINABLE = {("Claude DE", "A"), ("Claude DE", "C")}


def category() -> TableResult:
    cols = [Column("Config"), Column("Cat"), Column("n", "int"), Column("Acc", "pct"), Column("EDD", "metric"),
            Column("EDD SD", "metric"), Column("DDI", "signed"), Column("ERS", "metric"), Column("ERS SD", "metric")]
    t = ReportTable("Category-level role fidelity (per-statement EDD/DDI/ERS)", cols)
    checks: list[Check] = []
    for (fx, label), expected in CATEGORY.items():
        cohort = fixture(fx)
        groups = dict(breakdown(cohort, "category").groups)
        groups["All"] = metrics_summary(cohort)
        for cat, (n, acc, e, ers) in expected.items():
            s = groups[cat]
            t.add_row(label, cat, s.n, s.accuracy, s.edd_stmt_mean, s.edd_sd_stmt, s.ddi_stmt_mean,
                      s.ers_stmt_mean, s.ers_stmt_sd)
            lab = f"{label} {cat}"
            checks.append(Check(f"{lab} n", s.n, n, 0))
            _pct_checks(checks, lab, s.accuracy, acc)
            checks.append(Check(f"{lab} EDD", s.edd_stmt_mean, e, METRIC_TOL))
            known = "not attainable with ten 5-run statements" if (label, cat) in _CATEGORY_UNATTAINABLE else ""
            checks.append(Check(f"{lab} ERS", s.ers_stmt_mean, ers, METRIC_TOL, known))
    return TableResult("category", t, checks)


DIMENSION = {  # (dimension, level): (n, acc %, ddi)
    ("logos", -1): (32, 31, -1.125),
    ("logos", 0): (55, 58, -0.436),
    ("logos", 1): (57, 95, -0.053),
    ("ethos", 1): (135, 64, -0.467),
    ("ethos", 2): (9, 100, 0.0),
    ("pathos", 0): (21, 24, -1.238),
    ("pathos", 1): (121, 74, -0.298),
    ("pathos", 2): (1, 100, 0.0),
}

_PATHOS_GAP = "printed Pathos counts sum to 143 of 144 records; the unassigned record is placed at +1"


def dimension() -> TableResult:
    cols = [Column("Dimension"), Column("Score"), Column("n", "int"), Column("Acc", "pct"),
            Column("EDD", "metric"), Column("EDD SD", "metric"), Column("DDI", "signed")]
    t = ReportTable("Dimension-level role fidelity, Mistral EN charitable advocate", cols)
    checks: list[Check] = []
    cohort = fixture("mistral_en_gemini")
    cache = {d: breakdown(cohort, d) for d in ("logos", "ethos", "pathos")}
    for (dim, level), (n, acc, d) in DIMENSION.items():
        s = cache[dim].groups[level]
        t.add_row(dim.capitalize(), _level(level), s.n, s.accuracy, s.edd_mean, s.edd_sd_obs, s.ddi)
        lab = f"{dim.capitalize()} {_level(level)}"
        known = _PATHOS_GAP if (dim, level) == ("pathos", 1) else ""
        checks.append(Check(f"{lab} n", s.n, n, 0, known))
        _pct_checks(checks, lab, s.accuracy, acc)
        checks.append(Check(f"{lab} DDI", s.ddi, d, METRIC_TOL, known))
    t.footnotes.append("For a charitable-only cohort EDD = |DDI|; DDI is the checked column.")
    return TableResult("dimension", t, checks)


CONSENSUS = {FcProvider.GEMINI: 1.3, FcProvider.PERPLEXITY: 2.5}


def consensus() -> TableResult:
    cols = [Column("Provider"), Column("Lang"), Column("Statements", "int"), Column("Mean contradictions", "metric")]
    t = ReportTable("Consolidated contradictions per statement (2/5 consensus)", cols)
    reports = consolidate_file(data_path("factcheck", "de_runs.jsonl"))
    stats = contradiction_stats(reports)
    checks: list[Check] = []
    for (provider, lang), mean in stats.items():
        n = sum(1 for r in reports if (r.provider, r.language) == (provider, lang))
        t.add_row(provider.value.capitalize(), lang.value.upper(), n, mean)
        if lang is Language.DE and provider in CONSENSUS:
            checks.append(Check(f"{provider.value} DE mean contradictions", mean, CONSENSUS[provider], 0.05))
    return TableResult("consensus", t, checks)


TABLES: dict[str, Callable[[], TableResult]] = {
    "table1": table1,
    "table2": table2,
    "table3": table3,
    "table4": table4,
    "table5": table5,
    "table5-mistral": table5_mistral,
    "table6": table6,
    "table7": table7,
    "category": category,
    "dimension": dimension,
    "table8": dimension,
    "consensus": consensus,
}

ALL = ("table1", "table2", "table3", "table4", "table5", "table6", "table7", "category", "dimension", "consensus")


def reproduce(name: str) -> list[TableResult]:
    if name == "all":
        return [TABLES[n]() for n in ALL]
    if name not in TABLES:
        raise KeyError(name)
    return [TABLES[name]()]
