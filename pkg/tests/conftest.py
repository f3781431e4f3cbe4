from __future__ import annotations

import pytest

from rolefidelity.model import (
    Cohort,
    DimensionScores,
    FcProvider,
    Language,
    PromptVersion,
    Role,
    RunRecord,
    StatementRef,
)

CRIT, BAL, CHAR = Role.CRITICAL, Role.BALANCED, Role.CHARITABLE


def make_record(
    pred: Role,
    true: Role = CHAR,
    sid: str = "A01",
    run: int = 1,
    lang: str = "en",
    scores: tuple[int, int, int] | None = None,
    model: str = "mistral-large",
    fc: str = "gemini",
) -> RunRecord:
    return RunRecord(
        statement=StatementRef(sid, Language(lang)),
        true_role=true,
        predicted_role=pred,
        run_index=run,
        advocate_model=model,
        fc_provider=FcProvider(fc),
        prompt_version=PromptVersion.SYMMETRIC,
        scores=DimensionScores(*scores) if scores else None,
    )


def cohort_from_counts(rows: dict[Role, tuple[int, int, int]], runs: int = 5) -> Cohort:
    """Records realizing a confusion matrix, ``runs`` consecutive records per statement."""
    records = []
    for true, counts in rows.items():
        preds = [p for p, n in zip((CRIT, BAL, CHAR), counts) for _ in range(n)]
        for i, pred in enumerate(preds):
            sid = f"{'ABC'[(i // runs) % 3]}{i // runs + 1:02d}"
            records.append(make_record(pred, true, sid=sid, run=i % runs + 1))
    return Cohort(tuple(records), label="matrix")


@pytest.fixture
def record():
    return make_record
