"""Epistemic-stance classifier harness: prompt, verdict parsing, offline stub, batching."""
from __future__ import annotations

import hashlib
import json
import logging
import re
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Mapping, Sequence

from .model import Confidence, Language, Role, data_path
from .providers import ProviderClient, ProviderError, ProviderRequest

log = logging.getLogger(__name__)

OPEN_MARK = "<<<REASONING_TEXT"
CLOSE_MARK = "REASONING_TEXT>>>"


class VerdictError(ValueError):
    """The classifier's answer could not be turned into a valid verdict.

    ``kind`` is one of ``no_object``, ``invalid_field``,
    ``unknown_classification`` or ``inconsistent_flags``.
    """

    def __init__(self, kind: str, message: str):
        super().__init__(message)
        self.kind = kind


@dataclass(frozen=True)
class ClassifierVerdict:
    classification: Role
    confidence: Confidence
    legitimizes: bool
    delegitimizes: bool
    neutral: bool
    reasoning: str

    def __post_init__(self) -> None:
        check_flags(self.classification, self.legitimizes, self.delegitimizes, self.neutral)

    def to_dict(self) -> dict:
        return {
            "classification": self.classification.value,
            "confidence": self.confidence.value,
            "legitimizes": self.legitimizes,
            "delegitimizes": self.delegitimizes,
            "neutral": self.neutral,
            "reasoning": self.reasoning,
        }

    @classmethod
    def for_role(cls, role: Role, confidence: Confidence = Confidence.HIGH, reasoning: str = "") -> ClassifierVerdict:
        return cls(role, confidence, *FLAG_PATTERNS[role], reasoning or f"Text reads as {role.value.lower()}.")


# (legitimizes, delegitimizes, neutral) allowed for each classification
FLAG_PATTERNS: dict[Role, tuple[bool, bool, bool]] = {
    Role.CHARITABLE: (True, False, False),
    Role.CRITICAL: (False, True, False),
    Role.BALANCED: (False, False, True),
}


def check_flags(role: Role, legitimizes: bool, delegitimizes: bool, neutral: bool) -> None:
    if (legitimizes, delegitimizes, neutral) != FLAG_PATTERNS[role]:
        raise VerdictError(
            "inconsistent_flags",
            f"{role.value} contradicts flags legitimizes={legitimizes}, "
            f"delegitimizes={delegitimizes}, neutral={neutral}",
        )


def serialize_verdict(verdict: ClassifierVerdict) -> str:
    return json.dumps(verdict.to_dict(), ensure_ascii=False)


# --- prompt ------------------------------------------------------------------


@lru_cache(maxsize=None)
def _template(language: str) -> str:
    return data_path("prompts", f"classifier_{language}.txt").read_text(encoding="utf-8")


def escape_block(text: str) -> str:
    """Break up marker sequences so embedded text cannot close the data block."""
    while "<<<" in text or ">>>" in text:
        text = text.replace("<<<", "< <<").replace(">>>", ">> >")
    return text


def build_classifier_prompt(reasoning_text: str, language: Language | str = Language.EN) -> str:
    if not reasoning_text or not reasoning_text.strip():
        raise ValueError("reasoning_text is empty")
    lang = language.value if isinstance(language, Language) else Language(language).value
    return _template(lang).format(reasoning_text=escape_block(reasoning_text))


def extract_block(prompt: str) -> str:
    """The embedded (escaped) reasoning text of a classifier prompt."""
    # the markers are also named in the instructions, so anchor on whole lines
    start = prompt.index("\n" + OPEN_MARK + "\n") + len(OPEN_MARK) + 2
    end = prompt.index("\n" + CLOSE_MARK + "\n", start)
    return prompt[start:end]


# --- parsing -----------------------------------------------------------------

_DECODER = json.JSONDecoder()


def _first_object(raw: str) -> dict:
    for m in re.finditer(r"\{", raw):
        try:
            obj, _ = _DECODER.raw_decode(raw, m.start())
        except json.JSONDecodeError:
            continue
        if isinstance(obj, dict):
            return obj
    raise VerdictError("no_object", "no JSON object found in classifier response")


def _flag(obj: dict, name: str) -> bool:
    value = obj.get(name)
    if isinstance(value, bool):
        return value
    if isinstance(value, str) and value.strip().lower() in ("true", "false"):
        return value.strip().lower() == "true"
    raise VerdictError("invalid_field", f"field {name!r} must be a boolean, got {value!r}")


def parse_verdict(raw: str) -> ClassifierVerdict:
    """Extract and validate the first JSON object in ``raw``; surrounding prose is ignored."""
    obj = _first_object(raw or "")
    label = obj.get("classification")
    if not isinstance(label, str):
        raise VerdictError("invalid_field", "missing classification")
    try:
        role = Role(label.strip().upper())
    except ValueError:
        raise VerdictError("unknown_classification", f"unknown classification {label!r}") from None
    conf_raw = obj.get("confidence")
    try:
        confidence = Confidence(str(conf_raw).strip().lower())
    except ValueError:
        raise VerdictError("invalid_field", f"bad confidence {conf_raw!r}") from None
    reasoning = obj.get("reasoning", "")
    if not isinstance(reasoning, str):
        raise VerdictError("invalid_field", "reasoning must be text")
    flags = (_flag(obj, "legitimizes"), _flag(obj, "delegitimizes"), _flag(obj, "neutral"))
    check_flags(role, *flags)
    return ClassifierVerdict(role, confidence, *flags, reasoning.strip())


# --- offline stub ------------------------------------------------------------


def text_digest(text: str) -> str:
    """Lookup key for stub tables: SHA-256 of the text as embedded in the prompt."""
    return hashlib.sha256(escape_block(text).encode("utf-8")).hexdigest()


class StubLookupError(KeyError):
    pass


def stub_classifier(
    text: str,
    table: Mapping[str, ClassifierVerdict],
    default: Role | None = None,
) -> ClassifierVerdict:
    """Deterministic verdict from a digest-keyed table, falling back to ``default``."""
    return _stub_by_digest(text_digest(text), table, default)


def _stub_by_digest(digest: str, table: Mapping[str, ClassifierVerdict], default: Role | None) -> ClassifierVerdict:
    verdict = table.get(digest)
    if verdict is not None:
        return verdict
    if default is None:
        raise StubLookupError(f"no stub verdict for digest {digest[:12]}")
    return ClassifierVerdict.for_role(default, Confidence.LOW, "Default stub verdict.")


def load_stub_table(path) -> dict[str, ClassifierVerdict]:
    """Stub table file: JSON lines with ``digest`` (or ``text``) plus verdict fields."""
    table = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            obj = json.loads(line)
            digest = obj.get("digest") or text_digest(obj["text"])
            table[digest] = parse_verdict(json.dumps(obj))
    return table


class StubProvider:
    """Provider that answers classifier prompts from a stub table.

    ``failure_rate`` makes a deterministic subset of texts (chosen by digest)
    answer with unparsable prose, to exercise failure accounting.
    """

    def __init__(
        self,
        table: Mapping[str, ClassifierVerdict] | None = None,
        default: Role | None = Role.BALANCED,
        failure_rate: float = 0.0,
    ):
        self.table = dict(table or {})
        self.default = default
        self.failure_rate = failure_rate
        self.calls = 0

    def fails(self, digest: str) -> bool:
        return int(digest[:8], 16) / 0x100000000 < self.failure_rate

    def complete(self, request: ProviderRequest) -> str:
        self.calls += 1
        digest = hashlib.sha256(extract_block(request.prompt).encode("utf-8")).hexdigest()
        if self.fails(digest):
            return "I am unable to classify this text."
        try:
            return serialize_verdict(_stub_by_digest(digest, self.table, self.default))
        except StubLookupError as exc:
            raise ProviderError(exc.args[0], retryable=False, kind="lookup") from None


# --- batch -------------------------------------------------------------------


@dataclass(frozen=True)
class RetryPolicy:
    """Same prompt is re-sent up to ``max_attempts`` times; delays grow geometrically."""

    max_attempts: int = 3
    initial_delay: float = 0.0
    backoff: float = 2.0
    retry_on_parse_error: bool = True

    def delay(self, attempt: int) -> float:
        return self.initial_delay * (self.backoff ** (attempt - 1))


@dataclass
class BatchItem:
    index: int
    verdict: ClassifierVerdict | None
    attempts: int
    error_kind: str | None = None
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.verdict is not None

    @property
    def retries(self) -> int:
        return self.attempts - 1


@dataclass
class BatchResult:
    items: list[BatchItem] = field(default_factory=list)

    @property
    def requests(self) -> int:
        return sum(i.attempts for i in self.items)

    @property
    def retries(self) -> int:
        return sum(i.retries for i in self.items)

    @property
    def failures(self) -> list[BatchItem]:
        return [i for i in self.items if not i.ok]

    @property
    def verdicts(self) -> list[ClassifierVerdict | None]:
        return [i.verdict for i in self.items]


def classify_one(
    index: int,
    text: str,
    provider: ProviderClient,
    policy: RetryPolicy,
    language: Language | str = Language.EN,
    *,
    temperature: float = 0.1,
    timeout: float = 60.0,
    sleep: Callable[[float], None] = time.sleep,
) -> BatchItem:
    try:
        prompt = build_classifier_prompt(text, language)
    except ValueError as exc:
        return BatchItem(index, None, 0, "invalid_input", str(exc))
    request = ProviderRequest(prompt, temperature, policy.max_attempts, timeout)
    kind, message = "no_attempt", ""
    for attempt in range(1, policy.max_attempts + 1):
        try:
            return BatchItem(index, parse_verdict(provider.complete(request)), attempt)
        except ProviderError as exc:
            kind, message = exc.kind, str(exc)
            if not exc.retryable:
                return BatchItem(index, None, attempt, kind, message)
        except VerdictError as exc:
            kind, message = exc.kind, str(exc)
            if not policy.retry_on_parse_error:
                return BatchItem(index, None, attempt, kind, message)
        log.debug("item %d attempt %d failed: %s", index, attempt, message)
        if attempt < policy.max_attempts:
            sleep(policy.delay(attempt))
    return BatchItem(index, None, policy.max_attempts, kind, message)


def classify_batch(
    texts: Sequence[str],
    provider: ProviderClient,
    policy: RetryPolicy | None = None,
    languages: Sequence[Language | str] | Language | str = Language.EN,
    *,
    parallelism: int = 1,
    temperature: float = 0.1,
    sleep: Callable[[float], None] = time.sleep,
) -> BatchResult:
    """Classify every text; failures are recorded per item and never abort the batch.

    Results are in input order regardless of completion order.
    """
    policy = policy or RetryPolicy()
    if isinstance(languages, (Language, str)):
        languages = [languages] * len(texts)
    if len(languages) != len(texts):
        raise ValueError("languages must match texts in length")

    def work(i: int) -> BatchItem:
        return classify_one(i, texts[i], provider, policy, languages[i], temperature=temperature, sleep=sleep)

    if parallelism <= 1:
        items = [work(i) for i in range(len(texts))]
    else:
        with ThreadPoolExecutor(max_workers=parallelism) as pool:
            items = list(pool.map(work, range(len(texts))))
    return BatchResult(items)
