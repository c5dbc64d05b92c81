"""Significance tests and effect size for comparing system configurations.

Mann-Whitney U compares score distributions (e.g. per-task AP@K); McNemar
compares paired binary outcomes (e.g. per-task Hit@K); Cliff's delta reports
the effect size. Small samples get exact p-values, large ones the usual
approximations.
"""

from __future__ import annotations

import math
from itertools import combinations
from typing import Sequence

SIGNIFICANCE_LEVEL = 0.05

# Total sample size at or below which Mann-Whitney enumerates exactly.
_EXACT_MWU_LIMIT = 20
# Discordant-pair count below which McNemar uses the exact binomial.
_EXACT_MCNEMAR_LIMIT = 25


def _midranks(values: Sequence[float]) -> list[float]:
    """Ranks 1..n with ties sharing their average rank."""
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        mid = (i + j) / 2 + 1
        for pos in range(i, j + 1):
            ranks[order[pos]] = mid
        i = j + 1
    return ranks


def _normal_sf_two_sided(z: float) -> float:
    return math.erfc(abs(z) / math.sqrt(2.0))


def mann_whitney_u(a: Sequence[float], b: Sequence[float]) -> tuple[float, float]:
    """(U of the first sample, two-sided p).

    U comes from midrank sums. For n+m <= 20 the p-value enumerates every
    assignment of pooled ranks (doubled smaller tail, capped at 1); larger
    samples use the normal approximation with tie correction and no
    continuity correction. Fully degenerate input (one shared value) gives
    p = 1.0.
    """
    n, m = len(a), len(b)
    if n < 1 or m < 1:
        raise ValueError("both samples must be non-empty")
    pooled = list(a) + list(b)
    ranks = _midranks(pooled)
    u = sum(ranks[:n]) - n * (n + 1) / 2

    if len(set(pooled)) == 1:
        return u, 1.0

    total_n = n + m
    if total_n <= _EXACT_MWU_LIMIT:
        le = ge = 0
        count = 0
        offset = n * (n + 1) / 2
        for combo in combinations(ranks, n):
            u_perm = sum(combo) - offset
            count += 1
            if u_perm <= u:
                le += 1
            if u_perm >= u:
                ge += 1
        p = min(1.0, 2.0 * min(le, ge) / count)
        return u, p

    tie_counts: dict[float, int] = {}
    for value in pooled:
        tie_counts[value] = tie_counts.get(value, 0) + 1
    tie_term = sum(t**3 - t for t in tie_counts.values())
    mu = n * m / 2
    sigma_sq = n * m / 12 * ((total_n + 1) - tie_term / (total_n * (total_n - 1)))
    if sigma_sq <= 0:
        return u, 1.0
    z = (u - mu) / math.sqrt(sigma_sq)
    return u, _normal_sf_two_sided(z)


def mcnemar(paired: Sequence[tuple[bool, bool]]) -> tuple[float, float]:
    """(statistic, two-sided p) for paired binary outcomes.

    With discordant counts b (only the first system succeeds) and c (only
    the second): exact binomial when b + c < 25 (statistic = min(b, c)),
    otherwise the continuity-corrected chi-squared (|b-c| - 1)^2 / (b + c).
    No discordant pairs at all gives p = 1.0 by convention.
    """
    b = sum(1 for first, second in paired if first and not second)
    c = sum(1 for first, second in paired if second and not first)
    total = b + c
    if total == 0:
        return 0.0, 1.0
    if total < _EXACT_MCNEMAR_LIMIT:
        k = max(b, c)
        tail = sum(math.comb(total, i) for i in range(k, total + 1)) / 2.0**total
        return float(min(b, c)), min(1.0, 2.0 * tail)
    statistic = (abs(b - c) - 1) ** 2 / total
    return statistic, _normal_sf_two_sided(math.sqrt(statistic))


def discordant_counts(paired: Sequence[tuple[bool, bool]]) -> tuple[int, int]:
    b = sum(1 for first, second in paired if first and not second)
    c = sum(1 for first, second in paired if second and not first)
    return b, c


_DELTA_THRESHOLDS = ((0.147, "negligible"), (0.33, "small"), (0.474, "medium"))


def cliffs_delta(a: Sequence[float], b: Sequence[float]) -> tuple[float, str]:
    """(delta, magnitude) where delta = (#{a_i > b_j} - #{a_i < b_j}) / (n*m)."""
    if not a or not b:
        raise ValueError("both samples must be non-empty")
    greater = sum(1 for x in a for y in b if x > y)
    lesser = sum(1 for x in a for y in b if x < y)
    delta = (greater - lesser) / (len(a) * len(b))
    magnitude = "large"
    for threshold, name in _DELTA_THRESHOLDS:
        if abs(delta) < threshold:
            magnitude = name
            break
    return delta, magnitude
