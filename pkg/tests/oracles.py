"""Term-by-term reference evaluations of the drift metrics.

Written directly from the definitions with exact fractions and no shared
code with the package, so they serve as independent oracles.
"""
from __future__ import annotations

import math
from collections import Counter
from fractions import Fraction

SCALE = {"CRITICAL": -1, "BALANCED": 0, "CHARITABLE": 1}


def pairs_of(records):
    return [(r.true_role.value, r.predicted_role.value) for r in records]


def oracle_edd(pairs) -> Fraction:
    total = Fraction(0)
    for true, pred in pairs:
        total += abs(SCALE[pred] - SCALE[true])
    return total / len(pairs)


def oracle_ddi(pairs) -> Fraction:
    total = Fraction(0)
    for true, pred in pairs:
        total += SCALE[pred] - SCALE[true]
    return total / len(pairs)


def oracle_rdi(pairs):
    """Charitable-only pairs; None when no output left the charitable role."""
    n_crit = sum(1 for _, p in pairs if p == "CRITICAL")
    n_bal = sum(1 for _, p in pairs if p == "BALANCED")
    if n_crit + n_bal == 0:
        return None
    return Fraction(2 * n_crit + 1 * n_bal, 2 * (n_crit + n_bal))


def oracle_ers(predictions) -> float:
    counts = Counter(predictions)
    n = len(predictions)
    h = 0.0
    for role in ("CRITICAL", "BALANCED", "CHARITABLE"):
        p = counts.get(role, 0) / n
        if p > 0:
            h -= p * math.log(p)
    return h


def oracle_accuracy(pairs) -> Fraction:
    return Fraction(sum(1 for t, p in pairs if t == p), len(pairs))
