"""Synthetic cohorts from Logos-conditioned role-drift profiles.

A profile gives, for each (assigned role, Logos level), the probability of the
classifier reporting CRITICAL, BALANCED or CHARITABLE, plus a mix over Logos
levels. Simulation draws one Logos level per synthetic statement and then
``runs_per_statement`` independent predictions from that level's triple.

Randomness comes from numpy's PCG64 generator seeded with the 64-bit seed; a
given (profile, n_statements, seed) always yields the same cohort.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Mapping

import numpy as np

from .metrics import EmptyCohortError
from .model import (
    ROLES,
    Cohort,
    DimensionScores,
    FcProvider,
    Language,
    PromptVersion,
    Role,
    RunRecord,
    SchemaError,
    StatementRef,
    data_path,
)

LOGOS_LEVELS = (-2, -1, 0, 1, 2)
_TOL = 1e-9
_CATEGORIES = ("A", "B", "C")


@dataclass(frozen=True)
class EroProfile:
    triples: Mapping[tuple[Role, int], tuple[float, float, float]]
    logos_mix: Mapping[int, float]
    runs_per_statement: int = 5
    counts: Mapping[tuple[Role, int], tuple[int, int, int]] = field(default_factory=dict)
    name: str = ""

    def __post_init__(self) -> None:
        for (role, level), triple in self.triples.items():
            if level not in LOGOS_LEVELS:
                raise SchemaError(f"Logos level {level} outside [-2, +2]", field="triples")
            if len(triple) != 3 or any(p < 0 for p in triple) or abs(math.fsum(triple) - 1.0) > _TOL:
                raise SchemaError(f"triple for ({role.value}, {level}) is not a distribution: {triple}", field="triples")
        mix_total = math.fsum(self.logos_mix.values())
        if any(p < 0 for p in self.logos_mix.values()) or abs(mix_total - 1.0) > _TOL:
            raise SchemaError("logos_mix must be a probability distribution", field="logos_mix")
        for level, p in self.logos_mix.items():
            if level not in LOGOS_LEVELS:
                raise SchemaError(f"Logos level {level} outside [-2, +2]", field="logos_mix")
            if p > 0 and not any((role, level) in self.triples for role in self.roles):
                raise SchemaError(f"logos_mix puts mass on level {level} with no triple", field="logos_mix")
        if self.runs_per_statement < 1:
            raise SchemaError("runs_per_statement must be >= 1", field="runs_per_statement")

    @property
    def roles(self) -> list[Role]:
        present = {role for role, _ in self.triples}
        return [r for r in ROLES if r in present]

    def triple(self, role: Role, level: int) -> tuple[float, float, float]:
        return self.triples[(role, level)]

    def with_mix(self, logos_mix: Mapping[int, float]) -> EroProfile:
        return EroProfile(dict(self.triples), dict(logos_mix), self.runs_per_statement, {}, self.name)

    def with_runs(self, runs_per_statement: int) -> EroProfile:
        return EroProfile(dict(self.triples), dict(self.logos_mix), runs_per_statement, dict(self.counts), self.name)

    def expected_distance(self, role: Role, level: int) -> tuple[float, float]:
        """Expected (absolute, signed) ordinal distance of one prediction."""
        triple = self.triple(role, level)
        absolute = math.fsum(p * abs(pred.ordinal - role.ordinal) for p, pred in zip(triple, ROLES))
        signed = math.fsum(p * (pred.ordinal - role.ordinal) for p, pred in zip(triple, ROLES))
        return absolute, signed

    # -- file format --

    def to_dict(self) -> dict:
        out = {
            "name": self.name,
            "runs_per_statement": self.runs_per_statement,
            "logos_mix": {str(k): v for k, v in sorted(self.logos_mix.items())},
            "triples": [],
        }
        for (role, level) in sorted(self.triples, key=lambda k: (k[0].ordinal, k[1])):
            entry = {"true_role": role.value, "logos": level, "p": list(self.triples[(role, level)])}
            if (role, level) in self.counts:
                entry["counts"] = list(self.counts[(role, level)])
            out["triples"].append(entry)
        return out

    @classmethod
    def from_dict(cls, obj: dict) -> EroProfile:
        try:
            triples = {}
            counts = {}
            for entry in obj["triples"]:
                key = (Role(entry["true_role"]), int(entry["logos"]))
                if key in triples:
                    raise SchemaError(f"duplicate triple for {key[0].value} at {key[1]}", field="triples")
                triples[key] = _parse_triple(entry["p"])
                if "counts" in entry:
                    counts[key] = tuple(int(c) for c in entry["counts"])
            mix = {int(k): _parse_prob(v) for k, v in obj["logos_mix"].items()}
            runs = int(obj.get("runs_per_statement", 5))
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, SchemaError):
                raise
            raise SchemaError(f"malformed profile: {exc}") from None
        return cls(triples, mix, runs, counts, str(obj.get("name", "")))

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


def _parse_prob(value) -> float:
    # "30/71" style fractions keep reconstructed splits exact in the asset files
    if isinstance(value, str):
        return float(Fraction(value))
    return float(value)


def _parse_triple(values) -> tuple[float, float, float]:
    triple = tuple(_parse_prob(v) for v in values)
    if len(triple) != 3:
        raise SchemaError("triple must have three entries", field="triples")
    return triple  # type: ignore[return-value]


def load_profile(path: str | Path) -> EroProfile:
    path = Path(path)
    try:
        obj = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc.strerror or exc}") from exc
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not JSON ({exc.msg})") from None
    if not isinstance(obj, dict):
        raise SchemaError(f"{path}: profile must be a JSON object")
    return EroProfile.from_dict(obj)


def paper_profile_charitable() -> EroProfile:
    """Charitable-role profile reconstructed from the published Logos breakdown."""
    return load_profile(data_path("profiles", "charitable.json"))


def paper_profile_critical() -> EroProfile:
    """Critical-role profile reconstructed from the published Logos/DDI breakdown."""
    return load_profile(data_path("profiles", "critical.json"))


def simulate_cohort(profile: EroProfile, n_statements: int, seed: int, *, label: str = "sim") -> Cohort:
    """Draw a synthetic cohort.

    Statement ids are ``<category><serial>`` with the category assigned
    round-robin (A, B, C, A, ...). Every record carries ``advocate_model="sim"``
    and ``fc_provider="none"``; Ethos and Pathos are fixed at 0.
    """
    if n_statements < 1:
        raise EmptyCohortError("n_statements must be >= 1")
    rng = np.random.Generator(np.random.PCG64(np.uint64(seed & 0xFFFFFFFFFFFFFFFF)))
    levels = np.array([lv for lv in LOGOS_LEVELS if profile.logos_mix.get(lv, 0.0) > 0], dtype=np.int64)
    probs = np.array([profile.logos_mix[lv] for lv in levels], dtype=np.float64)
    probs = probs / probs.sum()
    runs = profile.runs_per_statement
    width = max(4, len(str(n_statements)))

    records: list[RunRecord] = []
    for role in profile.roles:
        stmt_levels = levels[rng.choice(len(levels), size=n_statements, p=probs)]
        draws = rng.random((n_statements, runs))
        # cumulative thresholds per statement from its level's triple
        cum = np.zeros((n_statements, 2))
        for lv in levels:
            mask = stmt_levels == lv
            if not mask.any():
                continue
            triple = profile.triples.get((role, int(lv)))
            if triple is None:
                raise SchemaError(f"profile lacks a triple for ({role.value}, {int(lv)})", field="triples")
            cum[mask] = (triple[0], triple[0] + triple[1])
        pred_idx = (draws >= cum[:, :1]).astype(np.int64) + (draws >= cum[:, 1:]).astype(np.int64)

        for i in range(n_statements):
            ref = StatementRef(f"{_CATEGORIES[i % 3]}{i + 1:0{width}d}", Language.EN)
            scores = DimensionScores(int(stmt_levels[i]), 0, 0)
            row = pred_idx[i]
            for j in range(runs):
                records.append(
                    RunRecord(
                        statement=ref,
                        true_role=role,
                        predicted_role=ROLES[row[j]],
                        run_index=j + 1,
                        advocate_model="sim",
                        fc_provider=FcProvider.NONE,
                        prompt_version=PromptVersion.SYMMETRIC,
                        scores=scores,
                    )
                )
    return Cohort(tuple(records), label=label)


def estimate_profile(cohort: Cohort, *, runs_per_statement: int | None = None) -> EroProfile:
    """Empirical triples per (assigned role, Logos level); unobserved levels are omitted."""
    counts: dict[tuple[Role, int], list[int]] = {}
    level_counts: dict[int, int] = {}
    for r in cohort:
        if r.scores is None:
            continue
        key = (r.true_role, r.scores.logos)
        counts.setdefault(key, [0, 0, 0])[ROLES.index(r.predicted_role)] += 1
        level_counts[r.scores.logos] = level_counts.get(r.scores.logos, 0) + 1
    if not counts:
        raise EmptyCohortError("cohort has no scored records")
    triples = {k: tuple(c / sum(v) for c in v) for k, v in counts.items()}
    total = sum(level_counts.values())
    mix = {lv: n / total for lv, n in sorted(level_counts.items())}
    if runs_per_statement is None:
        per_stmt: dict[tuple, int] = {}
        for r in cohort:
            per_stmt[r.statement_key] = per_stmt.get(r.statement_key, 0) + 1
        runs_per_statement = max(1, round(sum(per_stmt.values()) / len(per_stmt)))
    return EroProfile(
        triples,  # type: ignore[arg-type]
        mix,
        runs_per_statement,
        {k: tuple(v) for k, v in counts.items()},  # type: ignore[misc]
        name=f"estimated:{cohort.label}",
    )
