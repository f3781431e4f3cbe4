"""Grouped breakdowns and two-proportion comparisons between cohorts."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, fields
from typing import Callable, Hashable, Iterable, Sequence

from .metrics import EmptyCohortError, MetricsSummary, metrics_summary
from .model import (
    Category,
    Cohort,
    FcProvider,
    Language,
    PromptVersion,
    Role,
    RunRecord,
    SchemaError,
)

DIMENSIONS = ("logos", "ethos", "pathos")

# Numerical Recipes `erfcc` (Chebyshev fit to erfc; fractional error < 1.2e-7
# everywhere). Only exp() and arithmetic are used so p-values do not depend on
# the platform's libm erf implementation.
_ERFC_COEFFS = (
    -1.26551223,
    1.00002368,
    0.37409196,
    0.09678418,
    -0.18628806,
    0.27886807,
    -1.13520398,
    1.48851587,
    -0.82215223,
    0.17087277,
)


def erfc(x: float) -> float:
    z = abs(x)
    t = 1.0 / (1.0 + 0.5 * z)
    poly = 0.0
    for c in reversed(_ERFC_COEFFS):
        poly = poly * t + c
    ans = t * math.exp(-z * z + poly)
    return ans if x >= 0.0 else 2.0 - ans


_SQRT2 = math.sqrt(2.0)


def normal_cdf(x: float) -> float:
    """Standard normal CDF, absolute error below 1e-7."""
    return 0.5 * erfc(-x / _SQRT2)


def normal_sf2(z: float) -> float:
    """Two-sided tail probability 2 * (1 - Phi(|z|)), evaluated without cancellation."""
    return min(1.0, erfc(abs(z) / _SQRT2))


# --- filters -----------------------------------------------------------------

_FILTER_PARSERS: dict[str, Callable[[str], object]] = {
    "language": lambda v: Language(v.lower()),
    "category": lambda v: Category(v.upper()),
    "advocate_model": str,
    "fc_provider": lambda v: FcProvider(v.lower()),
    "prompt_version": lambda v: PromptVersion(v.lower()),
    "true_role": lambda v: Role(v.upper()),
    "logos": int,
    "run_index": int,
}

_FILTER_ALIASES = {"role": "true_role", "model": "advocate_model", "fc": "fc_provider", "prompt": "prompt_version", "lang": "language"}


@dataclass(frozen=True)
class CohortFilter:
    """Conjunction of optional equality constraints; the empty filter selects everything."""

    language: Language | None = None
    category: Category | None = None
    advocate_model: str | None = None
    fc_provider: FcProvider | None = None
    prompt_version: PromptVersion | None = None
    true_role: Role | None = None
    logos: int | None = None
    run_index: int | None = None

    def __call__(self, r: RunRecord) -> bool:
        if self.language is not None and r.statement.language is not self.language:
            return False
        if self.category is not None and r.statement.category is not self.category:
            return False
        if self.advocate_model is not None and r.advocate_model != self.advocate_model:
            return False
        if self.fc_provider is not None and r.fc_provider is not self.fc_provider:
            return False
        if self.prompt_version is not None and r.prompt_version is not self.prompt_version:
            return False
        if self.true_role is not None and r.true_role is not self.true_role:
            return False
        if self.logos is not None and (r.scores is None or r.scores.logos != self.logos):
            return False
        if self.run_index is not None and r.run_index != self.run_index:
            return False
        return True

    @property
    def is_empty(self) -> bool:
        return all(getattr(self, f.name) is None for f in fields(self))

    def apply(self, cohort: Cohort) -> Cohort:
        return cohort.select(self)

    @classmethod
    def parse(cls, items: Iterable[str]) -> CohortFilter:
        """Build a filter from ``key=value`` strings (e.g. ``role=charitable``)."""
        kwargs: dict[str, object] = {}
        for item in items:
            key, sep, value = item.partition("=")
            key = _FILTER_ALIASES.get(key.strip(), key.strip())
            if not sep or key not in _FILTER_PARSERS:
                raise SchemaError(f"bad filter {item!r}; keys: {', '.join(sorted(_FILTER_PARSERS))}", field="filter")
            try:
                kwargs[key] = _FILTER_PARSERS[key](value.strip())
            except ValueError:
                raise SchemaError(f"bad value in filter {item!r}", field=key) from None
        return cls(**kwargs)  # type: ignore[arg-type]


# --- breakdowns --------------------------------------------------------------


@dataclass(frozen=True)
class Breakdown:
    axis: str
    groups: dict[Hashable, MetricsSummary]
    excluded_unscored: int = 0

    @property
    def n(self) -> int:
        return sum(s.n for s in self.groups.values())


def _breakdown(
    cohort: Cohort | Sequence[RunRecord],
    axis: str,
    key: Callable[[RunRecord], Hashable | None],
) -> Breakdown:
    records = cohort.records if isinstance(cohort, Cohort) else tuple(cohort)
    groups: dict[Hashable, list[RunRecord]] = {}
    excluded = 0
    for r in records:
        k = key(r)
        if k is None:
            excluded += 1
            continue
        groups.setdefault(k, []).append(r)
    if not groups:
        raise EmptyCohortError(f"no records to group by {axis}" + (f" ({excluded} unscored)" if excluded else ""))
    return Breakdown(axis, {k: metrics_summary(groups[k]) for k in sorted(groups)}, excluded)


def breakdown_by_dimension(cohort: Cohort | Sequence[RunRecord], dimension: str) -> Breakdown:
    """One summary per observed score of ``dimension``; unscored records are counted, not grouped."""
    dim = dimension.lower()
    if dim not in DIMENSIONS:
        raise ValueError(f"unknown dimension {dimension!r}")
    return _breakdown(cohort, dim, lambda r: None if r.scores is None else r.scores.get(dim))


def breakdown_by_logos(cohort: Cohort | Sequence[RunRecord]) -> Breakdown:
    return breakdown_by_dimension(cohort, "logos")


def breakdown_by_category(cohort: Cohort | Sequence[RunRecord]) -> Breakdown:
    return _breakdown(cohort, "category", lambda r: r.statement.category.value)


def breakdown(cohort: Cohort | Sequence[RunRecord], axis: str) -> Breakdown:
    if axis == "category":
        return breakdown_by_category(cohort)
    return breakdown_by_dimension(cohort, axis)


# --- two-proportion z-test ---------------------------------------------------


@dataclass(frozen=True)
class ZTestResult:
    k1: int
    n1: int
    k2: int
    n2: int
    p1: float
    p2: float
    z: float
    p_value: float
    degenerate: bool = False

    @property
    def delta_pp(self) -> float:
        """Second proportion minus first, in percentage points (one decimal)."""
        return round((self.p2 - self.p1) * 100.0, 1)

    def significant_at(self, alpha: float = 0.05) -> bool:
        return self.p_value < alpha

    @property
    def label(self) -> str:
        return significance_label(self.p_value)


def significance_label(p_value: float) -> str:
    if p_value >= 0.10:
        return "n.s."
    if p_value >= 0.05:
        return "marginal"
    return "sig."


def two_proportion_z(k1: int, n1: int, k2: int, n2: int) -> ZTestResult:
    """Pooled-variance two-sided z-test of k1/n1 against k2/n2.

    ``z`` is positive when the first proportion is larger. When the pooled
    proportion is 0 or 1 both samples are identical and the test has no
    variance; the result is then z = 0, p = 1 with ``degenerate=True``.
    """
    for name, k, n in (("1", k1, n1), ("2", k2, n2)):
        if n <= 0:
            raise ValueError(f"n{name} must be positive")
        if not 0 <= k <= n:
            raise ValueError(f"k{name} must lie in [0, n{name}]")
    p1, p2 = k1 / n1, k2 / n2
    pooled = (k1 + k2) / (n1 + n2)
    if pooled in (0.0, 1.0):
        warnings.warn("pooled proportion is 0 or 1; z-test is degenerate", RuntimeWarning, stacklevel=2)
        return ZTestResult(k1, n1, k2, n2, p1, p2, 0.0, 1.0, degenerate=True)
    se = math.sqrt(pooled * (1.0 - pooled) * (1.0 / n1 + 1.0 / n2))
    z = (p1 - p2) / se
    if k1 * n2 == k2 * n1:
        z = 0.0
    return ZTestResult(k1, n1, k2, n2, p1, p2, z, normal_sf2(z))


def compare_cohorts(a: Cohort | Sequence[RunRecord], b: Cohort | Sequence[RunRecord]) -> ZTestResult:
    """Compare role accuracy (share of correctly held roles) between two cohorts."""
    ra = a.records if isinstance(a, Cohort) else a
    rb = b.records if isinstance(b, Cohort) else b
    if not ra or not rb:
        raise EmptyCohortError("both cohorts must be non-empty")
    return two_proportion_z(sum(r.correct for r in ra), len(ra), sum(r.correct for r in rb), len(rb))
