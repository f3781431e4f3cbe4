"""Consolidation of repeated fact-check runs under a k-of-n support rule.

Claims from different runs are grouped when they match (equal normalized
text, or token-set overlap at or above a threshold); groups are the
transitive closure of pairwise matches. A group's support is the number of
distinct runs contributing to it.
"""
from __future__ import annotations

import json
import math
import re
import unicodedata
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Mapping, Sequence

from .model import FcProvider, Language, SchemaError

KINDS = ("facts", "contradictions", "missing_context")
_KIND_ALIASES = {"fact": "facts", "contradiction": "contradictions", "missing_context": "missing_context"}
DEFAULT_THRESHOLD = 0.8
DEFAULT_MIN_SUPPORT = 2
DEFAULT_RUNS = 5

_WS = re.compile(r"\s+")


def normalize(text: str) -> str:
    """Lowercase, replace Unicode punctuation with spaces, collapse whitespace."""
    chars = (" " if unicodedata.category(ch).startswith("P") else ch for ch in text.lower())
    return _WS.sub(" ", "".join(chars)).strip()


@dataclass(frozen=True)
class ClaimItem:
    text: str

    @property
    def normalized_key(self) -> str:
        return normalize(self.text)

    def tokens(self, stopwords: frozenset[str] = frozenset()) -> frozenset[str]:
        return frozenset(t for t in self.normalized_key.split() if t not in stopwords)


def token_similarity(a: ClaimItem, b: ClaimItem, stopwords: frozenset[str] = frozenset()) -> float:
    """Shared tokens over the larger token set; 0 when either side has no tokens."""
    ta, tb = a.tokens(stopwords), b.tokens(stopwords)
    if not ta or not tb:
        return 0.0
    return len(ta & tb) / max(len(ta), len(tb))


def match_claims(
    a: ClaimItem,
    b: ClaimItem,
    threshold: float = DEFAULT_THRESHOLD,
    stopwords: frozenset[str] = frozenset(),
) -> bool:
    if a.normalized_key == b.normalized_key:
        return True
    return token_similarity(a, b, stopwords) >= threshold


@dataclass(frozen=True)
class FactCheckRun:
    statement_id: str
    provider: FcProvider
    run_index: int
    facts: tuple[ClaimItem, ...] = ()
    contradictions: tuple[ClaimItem, ...] = ()
    missing_context: tuple[ClaimItem, ...] = ()
    language: Language = Language.EN

    def __post_init__(self) -> None:
        if not 1 <= self.run_index <= DEFAULT_RUNS:
            raise SchemaError(f"run_index {self.run_index} outside [1, {DEFAULT_RUNS}]", field="run_index")

    def items(self, kind: str) -> tuple[ClaimItem, ...]:
        return getattr(self, kind)


@dataclass(frozen=True)
class SupportedClaim:
    item: ClaimItem
    support: int
    members: tuple[str, ...] = ()

    @property
    def text(self) -> str:
        return self.item.text


@dataclass(frozen=True)
class ConsolidatedReport:
    statement_id: str
    provider: FcProvider
    language: Language = Language.EN
    facts: tuple[SupportedClaim, ...] = ()
    contradictions: tuple[SupportedClaim, ...] = ()
    missing_context: tuple[SupportedClaim, ...] = ()

    @property
    def contradiction_count(self) -> int:
        return len(self.contradictions)

    def items(self, kind: str) -> tuple[SupportedClaim, ...]:
        return getattr(self, kind)

    def to_dict(self) -> dict:
        out: dict = {
            "statement_id": self.statement_id,
            "provider": self.provider.value,
            "language": self.language.value,
            "contradiction_count": self.contradiction_count,
        }
        for kind in KINDS:
            out[kind] = [{"text": c.text, "support": c.support} for c in self.items(kind)]
        return out


Matcher = Callable[[ClaimItem, ClaimItem], bool]


def _groups(entries: Sequence[tuple[int, ClaimItem]], matcher: Matcher) -> list[list[int]]:
    parent = list(range(len(entries)))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(len(entries)):
        for j in range(i + 1, len(entries)):
            if find(i) != find(j) and matcher(entries[i][1], entries[j][1]):
                parent[find(i)] = find(j)
    groups: dict[int, list[int]] = defaultdict(list)
    for i in range(len(entries)):
        groups[find(i)].append(i)
    return list(groups.values())


def consolidate(
    runs: Sequence[FactCheckRun],
    *,
    threshold: float = DEFAULT_THRESHOLD,
    min_support: int = DEFAULT_MIN_SUPPORT,
    n_runs: int = DEFAULT_RUNS,
    stopwords: Iterable[str] = (),
    matcher: Matcher | None = None,
) -> ConsolidatedReport:
    """Keep claim groups supported by at least ``min_support`` of ``n_runs`` runs.

    ``matcher`` replaces the token-set rule (e.g. with an LLM-backed judge);
    it must be symmetric. Output order does not depend on run order.
    """
    if len(runs) != n_runs:
        raise ValueError(f"expected exactly {n_runs} runs, got {len(runs)}")
    first = runs[0]
    for r in runs:
        if (r.statement_id, r.provider, r.language) != (first.statement_id, first.provider, first.language):
            raise ValueError("runs mix statements, providers or languages")
    if len({r.run_index for r in runs}) != n_runs:
        raise ValueError("run indices must be distinct")
    stop = frozenset(normalize(w) for w in stopwords)
    match = matcher or (lambda a, b: match_claims(a, b, threshold, stop))

    kept: dict[str, tuple[SupportedClaim, ...]] = {}
    for kind in KINDS:
        # canonical entry order so grouping and representatives are order-free
        entries = sorted(
            ((r.run_index, item) for r in runs for item in r.items(kind)),
            key=lambda e: (e[1].normalized_key, e[1].text, e[0]),
        )
        claims = []
        for members in _groups(entries, match):
            support = len({entries[i][0] for i in members})
            if support < min_support:
                continue
            texts = sorted({entries[i][1].text for i in members})
            rep = min(texts, key=lambda t: (-len(t), t))
            claims.append(SupportedClaim(ClaimItem(rep), support, tuple(texts)))
        claims.sort(key=lambda c: (-c.support, c.item.normalized_key, c.text))
        kept[kind] = tuple(claims)
    return ConsolidatedReport(first.statement_id, first.provider, first.language, **kept)


def contradiction_stats(reports: Iterable[ConsolidatedReport]) -> dict[tuple[FcProvider, Language], float]:
    """Mean consolidated contradictions per statement, by (provider, language)."""
    counts: dict[tuple[FcProvider, Language], list[int]] = defaultdict(list)
    for rep in reports:
        counts[(rep.provider, rep.language)].append(rep.contradiction_count)
    if not counts:
        raise ValueError("no reports")
    return {k: math.fsum(v) / len(v) for k, v in sorted(counts.items(), key=lambda kv: (kv[0][0].value, kv[0][1].value))}


# --- file format ---------------------------------------------------------------


def parse_claim_line(line: str, line_no: int | None = None) -> dict:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"not JSON: {exc.msg}", line_no=line_no) from None
    if not isinstance(obj, dict):
        raise SchemaError("line is not an object", line_no=line_no)
    for name in ("statement_id", "provider", "run_index", "kind", "text"):
        if name not in obj:
            raise SchemaError(f"missing field {name!r}", field=name, line_no=line_no)
    if obj["kind"] not in _KIND_ALIASES:
        raise SchemaError(f"unknown kind {obj['kind']!r}", field="kind", line_no=line_no)
    try:
        FcProvider(obj["provider"])
        Language(obj.get("language", "en"))
    except ValueError as exc:
        raise SchemaError(str(exc), line_no=line_no) from None
    if not isinstance(obj["run_index"], int) or isinstance(obj["run_index"], bool):
        raise SchemaError("run_index must be an integer", field="run_index", line_no=line_no)
    if not isinstance(obj["text"], str):
        raise SchemaError("text must be a string", field="text", line_no=line_no)
    return obj


def group_runs(lines: Iterable[Mapping], n_runs: int = DEFAULT_RUNS) -> dict[tuple[str, str, str], list[FactCheckRun]]:
    """Assemble claim lines into runs keyed by (statement_id, provider, language).

    Runs with no lines are materialized empty so every key has ``n_runs`` runs.
    """
    buckets: dict[tuple[str, str, str], dict[int, dict[str, list[ClaimItem]]]] = defaultdict(dict)
    for obj in lines:
        key = (obj["statement_id"], obj["provider"], obj.get("language", "en"))
        run = buckets[key].setdefault(obj["run_index"], {k: [] for k in KINDS})
        run[_KIND_ALIASES[obj["kind"]]].append(ClaimItem(obj["text"]))
    out = {}
    for (sid, provider, lang), by_run in sorted(buckets.items()):
        runs = []
        for idx in range(1, n_runs + 1):
            kinds = by_run.get(idx, {k: [] for k in KINDS})
            runs.append(FactCheckRun(sid, FcProvider(provider), idx, language=Language(lang),
                                     **{k: tuple(v) for k, v in kinds.items()}))
        extra = set(by_run) - set(range(1, n_runs + 1))
        if extra:
            raise SchemaError(f"{sid}/{provider}: run_index {sorted(extra)} outside [1, {n_runs}]", field="run_index")
        out[(sid, provider, lang)] = runs
    return out


def load_factcheck_runs(path: str | Path, n_runs: int = DEFAULT_RUNS) -> dict[tuple[str, str, str], list[FactCheckRun]]:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc.strerror or exc}") from exc
    lines = [parse_claim_line(line, i) for i, line in enumerate(text.splitlines(), 1) if line.strip()]
    return group_runs(lines, n_runs)


def consolidate_file(path: str | Path, **kwargs) -> list[ConsolidatedReport]:
    return [consolidate(runs, **kwargs) for runs in load_factcheck_runs(path).values()]
