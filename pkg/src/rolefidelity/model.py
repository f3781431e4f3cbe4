"""Domain types and line-oriented record ingestion.

One :class:`RunRecord` is a single advocate evaluation of one statement in one
run. Records are stored one JSON object per line; see :func:`parse_run_record`
for the field schema.
"""
from __future__ import annotations

import enum
import json
import logging
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Callable, Iterable, Iterator

log = logging.getLogger(__name__)


class SchemaError(ValueError):
    """A record or file does not match the documented schema."""

    def __init__(self, message: str, *, field: str | None = None, line_no: int | None = None):
        self.field = field
        self.line_no = line_no
        where = []
        if line_no is not None:
            where.append(f"line {line_no}")
        if field is not None:
            where.append(f"field {field!r}")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)


class Role(enum.Enum):
    CRITICAL = "CRITICAL"
    BALANCED = "BALANCED"
    CHARITABLE = "CHARITABLE"

    @property
    def ordinal(self) -> int:
        return _ORDINAL[self]

    def __lt__(self, other: Role) -> bool:
        if not isinstance(other, Role):
            return NotImplemented
        return self.ordinal < other.ordinal


_ORDINAL = {Role.CRITICAL: -1, Role.BALANCED: 0, Role.CHARITABLE: 1}
_FROM_ORDINAL = {v: k for k, v in _ORDINAL.items()}

# Column order used by confusion matrices and probability triples.
ROLES: tuple[Role, ...] = (Role.CRITICAL, Role.BALANCED, Role.CHARITABLE)


def role_to_ordinal(role: Role) -> int:
    return _ORDINAL[role]


def ordinal_to_role(value: int) -> Role:
    try:
        return _FROM_ORDINAL[value]
    except KeyError:
        raise ValueError(f"no role has ordinal {value!r}") from None


class Category(enum.Enum):
    A = "A"  # economic and social policy
    B = "B"  # contested empirical evidence
    C = "C"  # ideologically charged positions


class Language(enum.Enum):
    EN = "en"
    DE = "de"


class FcProvider(enum.Enum):
    GEMINI = "gemini"
    PERPLEXITY = "perplexity"
    NONE = "none"


class PromptVersion(enum.Enum):
    BASELINE = "baseline"
    SYMMETRIC = "symmetric"


class Confidence(enum.Enum):
    HIGH = "high"
    MEDIUM = "medium"
    LOW = "low"


_STATEMENT_ID = re.compile(r"^([A-Za-z])(\d+)$")


def category_of(statement_id: str) -> Category:
    """Category encoded by the leading letter of a statement id ("A07" -> A)."""
    m = _STATEMENT_ID.match(statement_id or "")
    if not m or int(m.group(2)) < 1:
        raise SchemaError(f"malformed statement id {statement_id!r}", field="statement_id")
    try:
        return Category(m.group(1))
    except ValueError:
        raise SchemaError(
            f"statement id {statement_id!r} has category letter outside A/B/C",
            field="statement_id",
        ) from None


@dataclass(frozen=True, slots=True)
class StatementRef:
    id: str
    language: Language

    @property
    def category(self) -> Category:
        return category_of(self.id)

    @property
    def number(self) -> int:
        return int(self.id[1:])

    @property
    def is_catalog_id(self) -> bool:
        """True for the ids of the shipped 30+30 statement catalog (letter + 1..10)."""
        return 1 <= self.number <= 10


@dataclass(frozen=True, slots=True)
class DimensionScores:
    logos: int
    ethos: int
    pathos: int

    def __post_init__(self) -> None:
        for name in ("logos", "ethos", "pathos"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int):
                raise SchemaError(f"score must be an integer, got {value!r}", field=name)
            if not -2 <= value <= 2:
                raise SchemaError(f"score {value} outside [-2, +2]", field=name)

    def get(self, dimension: str) -> int:
        return getattr(self, dimension.lower())


@dataclass(frozen=True, slots=True)
class RunRecord:
    statement: StatementRef
    true_role: Role
    predicted_role: Role
    run_index: int
    advocate_model: str
    fc_provider: FcProvider
    prompt_version: PromptVersion
    scores: DimensionScores | None = None
    confidence: Confidence | None = None
    reasoning_text: str | None = None

    @property
    def distance(self) -> int:
        """Signed ordinal distance, predicted minus assigned."""
        return self.predicted_role.ordinal - self.true_role.ordinal

    @property
    def correct(self) -> bool:
        return self.predicted_role is self.true_role

    @property
    def statement_key(self) -> tuple[str, str, str]:
        """Groups the runs of one statement under one assigned role."""
        return (self.statement.language.value, self.statement.id, self.true_role.value)

    @property
    def identity(self) -> tuple:
        return (
            self.statement,
            self.true_role,
            self.advocate_model,
            self.fc_provider,
            self.prompt_version,
            self.run_index,
        )


@dataclass(frozen=True)
class Cohort:
    records: tuple[RunRecord, ...]
    label: str = ""
    skipped: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "records", tuple(self.records))

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator[RunRecord]:
        return iter(self.records)

    def __bool__(self) -> bool:
        return bool(self.records)

    def select(self, predicate: Callable[[RunRecord], bool], label: str | None = None) -> Cohort:
        return Cohort(
            tuple(r for r in self.records if predicate(r)),
            label=self.label if label is None else label,
        )

    def duplicate_identities(self) -> list[tuple]:
        seen: set[tuple] = set()
        dupes = []
        for r in self.records:
            if r.identity in seen:
                dupes.append(r.identity)
            seen.add(r.identity)
        return dupes


# --- line format -----------------------------------------------------------

REQUIRED_FIELDS = (
    "statement_id",
    "language",
    "true_role",
    "predicted_role",
    "run_index",
    "advocate_model",
    "fc_provider",
    "prompt_version",
)


def _enum_field(enum_cls: type[enum.Enum], obj: dict, name: str, line_no: int | None):
    raw = obj[name]
    try:
        return enum_cls(raw)
    except ValueError:
        allowed = "|".join(str(m.value) for m in enum_cls)
        raise SchemaError(f"unknown literal {raw!r} (expected {allowed})", field=name, line_no=line_no) from None


def record_from_dict(obj: dict[str, Any], line_no: int | None = None) -> RunRecord:
    for name in REQUIRED_FIELDS:
        if obj.get(name) is None:
            raise SchemaError("missing required field", field=name, line_no=line_no)

    sid = obj["statement_id"]
    if not isinstance(sid, str):
        raise SchemaError(f"expected text, got {sid!r}", field="statement_id", line_no=line_no)
    try:
        category_of(sid)
    except SchemaError as exc:
        raise SchemaError(str(exc), field="statement_id", line_no=line_no) from None

    run_index = obj["run_index"]
    if isinstance(run_index, bool) or not isinstance(run_index, int) or run_index < 1:
        raise SchemaError(f"run_index must be an integer >= 1, got {run_index!r}", field="run_index", line_no=line_no)

    present = [k for k in ("logos", "ethos", "pathos") if obj.get(k) is not None]
    scores = None
    if present:
        if len(present) != 3:
            missing = next(k for k in ("logos", "ethos", "pathos") if k not in present)
            raise SchemaError("dimension scores must be all present or all absent", field=missing, line_no=line_no)
        try:
            scores = DimensionScores(obj["logos"], obj["ethos"], obj["pathos"])
        except SchemaError as exc:
            raise SchemaError(str(exc).split(": ", 1)[-1], field=exc.field, line_no=line_no) from None

    model = obj["advocate_model"]
    if not isinstance(model, str):
        raise SchemaError(f"expected text, got {model!r}", field="advocate_model", line_no=line_no)

    confidence = None
    if obj.get("confidence") is not None:
        confidence = _enum_field(Confidence, obj, "confidence", line_no)
    reasoning = obj.get("reasoning_text")
    if reasoning is not None and not isinstance(reasoning, str):
        raise SchemaError("expected text", field="reasoning_text", line_no=line_no)

    return RunRecord(
        statement=StatementRef(sid, _enum_field(Language, obj, "language", line_no)),
        true_role=_enum_field(Role, obj, "true_role", line_no),
        predicted_role=_enum_field(Role, obj, "predicted_role", line_no),
        run_index=run_index,
        advocate_model=model,
        fc_provider=_enum_field(FcProvider, obj, "fc_provider", line_no),
        prompt_version=_enum_field(PromptVersion, obj, "prompt_version", line_no),
        scores=scores,
        confidence=confidence,
        reasoning_text=reasoning,
    )


def parse_run_record(line: str, line_no: int | None = None) -> RunRecord:
    """Parse one record line.

    Required fields: ``statement_id``, ``language`` (en|de), ``true_role`` and
    ``predicted_role`` (CRITICAL|BALANCED|CHARITABLE), ``run_index``,
    ``advocate_model``, ``fc_provider`` (gemini|perplexity|none) and
    ``prompt_version`` (baseline|symmetric). Optional: ``logos``/``ethos``/
    ``pathos`` (all three or none), ``confidence`` (high|medium|low) and
    ``reasoning_text``. Unknown fields are ignored.
    """
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"not a JSON object ({exc.msg})", line_no=line_no) from None
    if not isinstance(obj, dict):
        raise SchemaError("not a JSON object", line_no=line_no)
    return record_from_dict(obj, line_no)


def record_to_dict(record: RunRecord) -> dict[str, Any]:
    out: dict[str, Any] = {
        "statement_id": record.statement.id,
        "language": record.statement.language.value,
        "true_role": record.true_role.value,
        "predicted_role": record.predicted_role.value,
        "run_index": record.run_index,
    }
    if record.scores is not None:
        out["logos"] = record.scores.logos
        out["ethos"] = record.scores.ethos
        out["pathos"] = record.scores.pathos
    out["advocate_model"] = record.advocate_model
    out["fc_provider"] = record.fc_provider.value
    out["prompt_version"] = record.prompt_version.value
    if record.confidence is not None:
        out["confidence"] = record.confidence.value
    if record.reasoning_text is not None:
        out["reasoning_text"] = record.reasoning_text
    return out


def serialize_run_record(record: RunRecord) -> str:
    return json.dumps(record_to_dict(record), ensure_ascii=False, separators=(",", ":"))


def write_cohort(records: Iterable[RunRecord], path: str | Path) -> int:
    n = 0
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for record in records:
            fh.write(serialize_run_record(record))
            fh.write("\n")
            n += 1
    return n


def iter_cohort_lines(lines: Iterable[str], *, strict: bool = True) -> Iterator[RunRecord | SchemaError]:
    for line_no, line in enumerate(lines, 1):
        if not line.strip():
            continue
        try:
            yield parse_run_record(line, line_no)
        except SchemaError as exc:
            if strict:
                raise
            yield exc


def load_cohort(
    path: str | Path,
    filter: Callable[[RunRecord], bool] | None = None,
    *,
    strict: bool = True,
    label: str | None = None,
) -> Cohort:
    """Read a record file in file order.

    In strict mode (the default) the first malformed line raises
    :class:`SchemaError`; in lenient mode malformed lines are skipped and
    counted in ``Cohort.skipped``.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc.strerror or exc}") from exc

    records = []
    skipped = 0
    for item in iter_cohort_lines(text.splitlines(), strict=strict):
        if isinstance(item, SchemaError):
            skipped += 1
            log.warning("skipping malformed record: %s", item)
            continue
        if filter is None or filter(item):
            records.append(item)
    if skipped:
        log.warning("%s: skipped %d malformed line(s)", path, skipped)
    return Cohort(tuple(records), label=label if label is not None else path.stem, skipped=skipped)


# --- packaged assets ---------------------------------------------------------


def data_path(*parts: str) -> Path:
    return Path(str(resources.files("rolefidelity").joinpath("data", *parts)))


@dataclass(frozen=True)
class CatalogEntry:
    ref: StatementRef
    text: str

    @property
    def category(self) -> Category:
        return self.ref.category


@dataclass(frozen=True)
class StatementCatalog:
    entries: dict[tuple[str, str], CatalogEntry] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[CatalogEntry]:
        return iter(self.entries.values())

    def get(self, statement_id: str, language: Language | str) -> CatalogEntry:
        lang = language.value if isinstance(language, Language) else language
        return self.entries[(lang, statement_id)]

    def text_for(self, ref: StatementRef) -> str:
        return self.get(ref.id, ref.language).text


def load_statement_catalog(path: str | Path | None = None) -> StatementCatalog:
    path = Path(path) if path is not None else data_path("statements.jsonl")
    entries = {}
    for line_no, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        obj = json.loads(line)
        ref = StatementRef(obj["id"], Language(obj["language"]))
        if obj.get("category") and Category(obj["category"]) is not ref.category:
            raise SchemaError(f"category {obj['category']!r} disagrees with id {ref.id!r}", field="category", line_no=line_no)
        entries[(ref.language.value, ref.id)] = CatalogEntry(ref, obj["text"])
    return StatementCatalog(entries)
