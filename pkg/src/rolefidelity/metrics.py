"""Role drift metrics over a cohort of run records.

All distances live on the ordinal role scale CRITICAL=-1, BALANCED=0,
CHARITABLE=+1. Standard deviations are population SDs unless ``sample=True``.

Two estimator families coexist:

* pooled: every record weighs the same (``edd_mean``, ``ddi``, ``ers_pooled``);
* per statement: the metric is computed over the runs of each statement first
  and then averaged across statements (``*_stmt_*`` fields). The two agree
  whenever every statement has the same number of runs.
"""
from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

from .model import ROLES, Cohort, Role, RunRecord

LN3 = math.log(3.0)


class MetricError(ValueError):
    pass


class EmptyCohortError(MetricError):
    pass


class RoleMismatchError(MetricError):
    """A metric was applied to a cohort it is not defined for."""


@dataclass(frozen=True)
class ConfusionMatrix:
    """3x3 counts indexed (true role, predicted role) in CRITICAL, BALANCED, CHARITABLE order."""

    counts: tuple[tuple[int, int, int], tuple[int, int, int], tuple[int, int, int]]

    def __post_init__(self) -> None:
        rows = tuple(tuple(int(c) for c in row) for row in self.counts)
        if len(rows) != 3 or any(len(row) != 3 for row in rows):
            raise MetricError("confusion matrix must be 3x3")
        if any(c < 0 for row in rows for c in row):
            raise MetricError("confusion matrix cells must be non-negative")
        object.__setattr__(self, "counts", rows)

    @classmethod
    def from_rows(cls, rows: dict[Role, Sequence[int]]) -> ConfusionMatrix:
        return cls(tuple(tuple(rows.get(role, (0, 0, 0))) for role in ROLES))  # type: ignore[arg-type]

    @property
    def total(self) -> int:
        return sum(sum(row) for row in self.counts)

    def row(self, role: Role) -> tuple[int, int, int]:
        return self.counts[ROLES.index(role)]

    def cell(self, true_role: Role, predicted_role: Role) -> int:
        return self.row(true_role)[ROLES.index(predicted_role)]

    def row_total(self, role: Role) -> int:
        return sum(self.row(role))

    def populated_roles(self) -> list[Role]:
        return [role for role in ROLES if self.row_total(role) > 0]


def _require(cohort: Cohort | Sequence[RunRecord]) -> Sequence[RunRecord]:
    records = cohort.records if isinstance(cohort, Cohort) else cohort
    if not records:
        raise EmptyCohortError("metric requires a non-empty cohort")
    return records


def confusion_matrix(cohort: Cohort | Sequence[RunRecord]) -> ConfusionMatrix:
    records = _require(cohort)
    cells = [[0, 0, 0] for _ in ROLES]
    for r in records:
        cells[ROLES.index(r.true_role)][ROLES.index(r.predicted_role)] += 1
    return ConfusionMatrix(tuple(tuple(row) for row in cells))  # type: ignore[arg-type]


def accuracy(matrix: ConfusionMatrix, role: Role | None = None) -> float:
    """Diagonal share of one row, or of the whole matrix when ``role`` is None."""
    if role is None:
        total = matrix.total
        if total == 0:
            raise EmptyCohortError("empty confusion matrix")
        return sum(matrix.counts[i][i] for i in range(3)) / total
    total = matrix.row_total(role)
    if total == 0:
        raise EmptyCohortError(f"no records with true role {role.value}")
    return matrix.cell(role, role) / total


def rdi(matrix: ConfusionMatrix) -> float | None:
    """Role Drift Index of a charitable-only matrix; None when nothing was misclassified."""
    for role in (Role.CRITICAL, Role.BALANCED):
        if matrix.row_total(role):
            raise RoleMismatchError(
                f"RDI is defined for charitable ground truth only; found {role.value} rows"
            )
    n_critical, n_balanced, _ = matrix.row(Role.CHARITABLE)
    n_wrong = n_critical + n_balanced
    if n_wrong == 0:
        return None
    return (n_critical * 2 + n_balanced * 1) / (n_wrong * 2)


def _pstdev(values: Sequence[float], sample: bool = False) -> float:
    n = len(values)
    if n == 0:
        return 0.0
    if sample:
        if n < 2:
            return 0.0
        denom = n - 1
    else:
        denom = n
    mean = math.fsum(values) / n
    return math.sqrt(math.fsum((v - mean) ** 2 for v in values) / denom)


def _mean(values: Sequence[float]) -> float:
    return math.fsum(values) / len(values)


def group_by_statement(records: Iterable[RunRecord]) -> dict[tuple[str, str, str], list[RunRecord]]:
    groups: dict[tuple[str, str, str], list[RunRecord]] = defaultdict(list)
    for r in records:
        groups[r.statement_key].append(r)
    return dict(sorted(groups.items()))


class EddResult(NamedTuple):
    mean: float
    sd_obs: float
    sd_stmt: float


def edd(cohort: Cohort | Sequence[RunRecord], *, sample: bool = False) -> EddResult:
    """Expected drift distance: mean absolute ordinal distance.

    ``sd_obs`` is the SD over per-record distances, ``sd_stmt`` the SD over
    per-statement mean distances.
    """
    records = _require(cohort)
    dists = [abs(r.distance) for r in records]
    per_stmt = [_mean([abs(r.distance) for r in g]) for g in group_by_statement(records).values()]
    return EddResult(_mean(dists), _pstdev(dists, sample), _pstdev(per_stmt, sample))


def ddi(cohort: Cohort | Sequence[RunRecord]) -> float:
    """Directional drift index: mean signed distance; negative means drift toward CRITICAL."""
    records = _require(cohort)
    return _mean([r.distance for r in records])


def entropy(counts: Sequence[float]) -> float:
    """Shannon entropy (natural log) of a count or probability vector, with 0 ln 0 = 0."""
    if any(c < 0 for c in counts):
        raise MetricError("distribution has negative mass")
    total = math.fsum(counts)
    if total <= 0:
        raise EmptyCohortError("entropy of an empty distribution")
    h = -math.fsum((c / total) * math.log(c / total) for c in counts if c > 0)
    # clamp rounding noise so the documented [0, ln 3] bounds hold exactly
    return min(max(h, 0.0), math.log(len(counts))) if len(counts) > 1 else 0.0


def ers_pooled(distribution: Sequence[float] | ConfusionMatrix, role: Role | None = None) -> float:
    """Entropy-based role stability of one prediction distribution.

    Accepts a (critical, balanced, charitable) vector of counts or
    probabilities, or a confusion matrix plus the ground-truth ``role`` whose
    row to use (the only populated row when ``role`` is omitted).
    """
    if isinstance(distribution, ConfusionMatrix):
        if role is None:
            populated = distribution.populated_roles()
            if len(populated) != 1:
                raise RoleMismatchError("pass role= for a matrix with several populated rows")
            role = populated[0]
        distribution = distribution.row(role)
    return entropy(distribution)


def _prediction_counts(records: Iterable[RunRecord]) -> tuple[int, int, int]:
    counts = [0, 0, 0]
    for r in records:
        counts[ROLES.index(r.predicted_role)] += 1
    return tuple(counts)  # type: ignore[return-value]


class StatementSpread(NamedTuple):
    mean: float
    sd: float


def ers_per_statement(cohort: Cohort | Sequence[RunRecord], *, sample: bool = False) -> StatementSpread:
    """ERS of each statement's runs, then mean and SD across statements."""
    records = _require(cohort)
    values = [entropy(_prediction_counts(g)) for g in group_by_statement(records).values()]
    return StatementSpread(_mean(values), _pstdev(values, sample))


@dataclass(frozen=True)
class StatementLevel:
    """Per-statement means of accuracy, absolute and signed distance, and ERS."""

    n_statements: int
    accuracy_mean: float
    accuracy_sd: float
    edd_mean: float
    edd_sd: float
    ddi_mean: float
    ddi_sd: float
    ers_mean: float
    ers_sd: float


def statement_level(cohort: Cohort | Sequence[RunRecord], *, sample: bool = False) -> StatementLevel:
    records = _require(cohort)
    acc, absd, signed, ers = [], [], [], []
    for g in group_by_statement(records).values():
        acc.append(_mean([1.0 if r.correct else 0.0 for r in g]))
        absd.append(_mean([abs(r.distance) for r in g]))
        signed.append(_mean([r.distance for r in g]))
        ers.append(entropy(_prediction_counts(g)))
    return StatementLevel(
        len(acc),
        _mean(acc), _pstdev(acc, sample),
        _mean(absd), _pstdev(absd, sample),
        _mean(signed), _pstdev(signed, sample),
        _mean(ers), _pstdev(ers, sample),
    )


@dataclass(frozen=True)
class MetricsSummary:
    n: int
    correct: int
    accuracy: float
    rdi: float | None
    rdi_note: str
    edd_mean: float
    edd_sd_obs: float
    edd_sd_stmt: float
    ddi: float
    ddi_sd_obs: float
    ers_pooled: float
    ers_stmt_mean: float
    ers_stmt_sd: float
    n_statements: int
    accuracy_stmt_mean: float
    edd_stmt_mean: float
    ddi_stmt_mean: float
    ddi_sd_stmt: float

    @property
    def rdi_defined(self) -> bool:
        return self.rdi is not None


def metrics_summary(cohort: Cohort | Sequence[RunRecord], *, sample: bool = False) -> MetricsSummary:
    """Bundle accuracy, RDI, EDD, DDI and both ERS estimators for a cohort.

    For cohorts mixing several ground-truth roles ``ers_pooled`` is the
    size-weighted mean of the per-role entropies and RDI is left undefined.
    """
    records = _require(cohort)
    matrix = confusion_matrix(records)
    roles = matrix.populated_roles()

    if roles == [Role.CHARITABLE]:
        value = rdi(matrix)
        note = "" if value is not None else "no misclassified records"
    else:
        value, note = None, "cohort is not all-charitable ground truth"

    if len(roles) == 1:
        ers_p = ers_pooled(matrix.row(roles[0]))
    else:
        ers_p = math.fsum(matrix.row_total(r) * ers_pooled(matrix.row(r)) for r in roles) / matrix.total

    e = edd(records, sample=sample)
    stmt = statement_level(records, sample=sample)
    signed = [r.distance for r in records]
    correct = sum(matrix.counts[i][i] for i in range(3))
    return MetricsSummary(
        n=len(records),
        correct=correct,
        accuracy=correct / len(records),
        rdi=value,
        rdi_note=note,
        edd_mean=e.mean,
        edd_sd_obs=e.sd_obs,
        edd_sd_stmt=e.sd_stmt,
        ddi=_mean(signed),
        ddi_sd_obs=_pstdev(signed, sample),
        ers_pooled=ers_p,
        ers_stmt_mean=stmt.ers_mean,
        ers_stmt_sd=stmt.ers_sd,
        n_statements=stmt.n_statements,
        accuracy_stmt_mean=stmt.accuracy_mean,
        edd_stmt_mean=stmt.edd_mean,
        ddi_stmt_mean=stmt.ddi_mean,
        ddi_sd_stmt=stmt.ddi_sd,
    )
