"""Spearman rank correlation and the derived distance / similarity matrices.

The three transforms chain together: rank correlation rho in [-1, 1], then
distance d = sqrt(2 * (1 - rho)) in [0, 2], then similarity exp(-d) in
[exp(-2), 1].  Each step is exposed separately so intermediate matrices can
be exported and audited.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .dataset import FeatureTable
from .errors import TooFewRows

CORRELATION_MODES = ("tie_aware", "literal_formula")


@dataclass(frozen=True)
class CorrelationMatrix:
    feature_names: tuple[str, ...]
    values: np.ndarray
    n_instances: int
    mode: str = "tie_aware"
    # (feature, reason) for columns whose correlations were forced to 0
    warnings: tuple[tuple[str, str], ...] = field(default=())


@dataclass(frozen=True)
class DistanceMatrix:
    feature_names: tuple[str, ...]
    values: np.ndarray


@dataclass(frozen=True)
class SimilarityMatrix:
    feature_names: tuple[str, ...]
    values: np.ndarray


def rank_transform(column) -> np.ndarray:
    """Fractional ranks (1-based); tied values share the average rank.

    The ranks of an n-element column always sum to n*(n+1)/2 exactly: tie
    averages are midpoints of integer runs, which are exact in binary.
    """
    col = np.asarray(column, dtype=np.float64)
    if col.size == 0:
        raise TooFewRows("cannot rank an empty column")
    order = np.argsort(col, kind="stable")
    ranks = np.empty(col.size, dtype=np.float64)
    i = 0
    while i < col.size:
        j = i
        while j + 1 < col.size and col[order[j + 1]] == col[order[i]]:
            j += 1
        # positions i..j hold ranks i+1..j+1; ties get the run average
        ranks[order[i : j + 1]] = (i + j + 2) / 2.0
        i = j + 1
    return ranks


def spearman_matrix(table: FeatureTable, mode: str = "tie_aware") -> CorrelationMatrix:
    """Feature-by-feature Spearman correlation matrix.

    tie_aware (default) computes the Pearson correlation of tie-averaged
    ranks, the standard tie-corrected Spearman.  literal_formula applies the
    classical 1 - 6*sum(d^2) / (n*(n^2-1)) to the same ranks; the two agree
    when no ties are present.  Constant columns cannot be rank-correlated:
    their off-diagonal entries are set to 0 and the column is recorded in
    ``warnings`` instead of being dropped, so the feature set stays stable
    across data partitions.
    """
    if mode not in CORRELATION_MODES:
        raise ValueError(f"mode must be one of {CORRELATION_MODES}, got {mode!r}")
    n = table.n_rows
    k = table.n_features
    if n < 2:
        raise TooFewRows(f"need at least 2 rows to correlate, got {n}")
    if k < 2:
        raise ValueError(f"need at least 2 features to correlate, got {k}")

    ranks = np.column_stack(
        [rank_transform(table.rows[:, j]) for j in range(k)]
    )
    centered = ranks - ranks.mean(axis=0)
    # fixed per-pair summation order keeps results reproducible
    sum_sq = np.array([float(np.dot(centered[:, j], centered[:, j])) for j in range(k)])
    degenerate = sum_sq <= 0.0

    values = np.eye(k, dtype=np.float64)
    for i in range(k):
        for j in range(i + 1, k):
            if degenerate[i] or degenerate[j]:
                rho = 0.0
            elif mode == "tie_aware":
                rho = float(np.dot(centered[:, i], centered[:, j])) / math.sqrt(
                    sum_sq[i] * sum_sq[j]
                )
            else:
                diff = ranks[:, i] - ranks[:, j]
                rho = 1.0 - 6.0 * float(np.dot(diff, diff)) / (n * (n * n - 1.0))
            values[i, j] = values[j, i] = min(1.0, max(-1.0, rho))

    warnings = tuple(
        (table.feature_names[j], "constant column, correlations set to 0")
        for j in range(k)
        if degenerate[j]
    )
    values.flags.writeable = False
    return CorrelationMatrix(
        feature_names=table.feature_names,
        values=values,
        n_instances=n,
        mode=mode,
        warnings=warnings,
    )


def to_distance(corr: CorrelationMatrix) -> DistanceMatrix:
    """d = sqrt(2 * (1 - rho)) elementwise; float-error radicands clamp to 0."""
    values = np.sqrt(np.maximum(2.0 * (1.0 - corr.values), 0.0))
    values.flags.writeable = False
    return DistanceMatrix(feature_names=corr.feature_names, values=values)


def to_similarity(dist: DistanceMatrix) -> SimilarityMatrix:
    """s = exp(-d) elementwise, mapping d in [0, 2] onto [exp(-2), 1]."""
    values = np.exp(-dist.values)
    values.flags.writeable = False
    return SimilarityMatrix(feature_names=dist.feature_names, values=values)


def write_matrix_csv(
    names: tuple[str, ...], values: np.ndarray, path: str | Path
) -> None:
    """Export a named square matrix with full-precision (repr) floats."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([""] + list(names))
        for name, row in zip(names, values):
            writer.writerow([name] + [repr(float(v)) for v in row])
