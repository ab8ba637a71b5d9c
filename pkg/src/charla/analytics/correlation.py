"""Pearson correlations between features and against the screening outcome."""

from __future__ import annotations

import math

STRONG_THRESHOLD = 0.4
MODERATE_THRESHOLD = 0.3
WEAK_THRESHOLD = 0.2


def pearson(xs: list[float], ys: list[float]) -> float | None:
    """Sample correlation; None when either side has zero variance."""
    if len(xs) != len(ys):
        raise ValueError("series length mismatch")
    n = len(xs)
    if n < 2:
        return None
    mean_x = sum(xs) / n
    mean_y = sum(ys) / n
    dx = [x - mean_x for x in xs]
    dy = [y - mean_y for y in ys]
    var_x = sum(d * d for d in dx)
    var_y = sum(d * d for d in dy)
    if var_x == 0.0 or var_y == 0.0:
        return None
    return sum(a * b for a, b in zip(dx, dy)) / math.sqrt(var_x * var_y)


def correlation_matrix(
    columns: dict[str, list[float]]
) -> dict[str, dict[str, float | None]]:
    """Full symmetric matrix; each unordered pair is computed once and
    mirrored, so matrix[a][b] is matrix[b][a] exactly."""
    names = list(columns)
    matrix: dict[str, dict[str, float | None]] = {name: {} for name in names}
    for i, a in enumerate(names):
        matrix[a][a] = 1.0 if pearson(columns[a], columns[a]) is not None else None
        for b in names[i + 1:]:
            r = pearson(columns[a], columns[b])
            matrix[a][b] = r
            matrix[b][a] = r
    return matrix


def band(r: float) -> str:
    magnitude = abs(r)
    if magnitude > STRONG_THRESHOLD:
        return "strong"
    if magnitude > MODERATE_THRESHOLD:
        return "moderate"
    if magnitude > WEAK_THRESHOLD:
        return "weak"
    return "negligible"


def criterion_correlations(
    columns: dict[str, list[float]], criterion: list[float]
) -> list[dict]:
    """Features ranked by |r| against the screening criterion, with bands."""
    if len(set(criterion)) < 2:
        raise ValueError("criterion needs both classes present")
    rows = []
    for name, values in columns.items():
        r = pearson(values, criterion)
        if r is None:
            continue
        rows.append({"feature": name, "r": r, "band": band(r)})
    rows.sort(key=lambda row: (-abs(row["r"]), row["feature"]))
    return rows
