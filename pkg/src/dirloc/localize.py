"""Spectrum-based localization over optimizer-function coverage.

Two views of the same spectra: the set-algebra suspicious set (intersection
of failing coverage minus union of passing coverage) and an Ochiai ranking of
every entity.  Ranks are 1-based; tied scores all receive the worst rank of
their tie block, so Top-n claims never benefit from ties.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional


class GroundTruthNotCovered(Exception):
    """The ground-truth entity appears in no coverage set; its rank is
    undefined and the bug counts as not localized at every n."""


@dataclass(frozen=True)
class SpectrumMatrix:
    entities: tuple[str, ...]
    failing_coverage: tuple[frozenset, ...]
    passing_coverage: tuple[frozenset, ...]

    def __post_init__(self):
        if not self.failing_coverage:
            raise ValueError("at least one failing coverage set is required")
        universe = set(self.entities)
        for cov in self.failing_coverage + self.passing_coverage:
            if not cov <= universe:
                raise ValueError(f"coverage mentions unknown entities: {cov - universe}")


@dataclass(frozen=True)
class SuspiciousnessReport:
    ranked: tuple  # (entity, score, rank), sorted by score descending
    suspicious_set: frozenset
    ground_truth: Optional[str] = None
    ground_truth_rank: Optional[int] = None

    def to_json(self) -> dict:
        return {
            "ranked": [{"entity": e, "score": s, "rank": r}
                       for e, s, r in self.ranked],
            "suspicious_set": sorted(self.suspicious_set),
            "ground_truth": self.ground_truth,
            "ground_truth_rank": self.ground_truth_rank,
        }


def suspicious_set(matrix: SpectrumMatrix) -> frozenset:
    """Entities common to every failing run and absent from every passing
    run."""
    inter = set(matrix.failing_coverage[0])
    for cov in matrix.failing_coverage[1:]:
        inter &= cov
    for cov in matrix.passing_coverage:
        inter -= cov
    return frozenset(inter)


def ochiai(ef: int, nf: int, ep: int) -> float:
    """ef / sqrt((ef + nf) * (ef + ep)), with 0 when ef is 0."""
    if ef < 0 or nf < 0 or ep < 0:
        raise ValueError("counts must be non-negative")
    if ef == 0:
        return 0.0
    return ef / math.sqrt((ef + nf) * (ef + ep))


def rank(matrix: SpectrumMatrix,
         ground_truth: Optional[str] = None) -> SuspiciousnessReport:
    """Score every entity, sort descending, and assign worst-of-tie ranks."""
    total_failing = len(matrix.failing_coverage)
    scored = []
    for entity in matrix.entities:
        ef = sum(1 for cov in matrix.failing_coverage if entity in cov)
        ep = sum(1 for cov in matrix.passing_coverage if entity in cov)
        scored.append((entity, ochiai(ef, total_failing - ef, ep)))
    scored.sort(key=lambda t: (-t[1], t[0]))

    ranked = []
    pos = 0
    while pos < len(scored):
        end = pos
        while end + 1 < len(scored) and scored[end + 1][1] == scored[pos][1]:
            end += 1
        block_rank = end + 1  # worst position of the tie block, 1-based
        for k in range(pos, end + 1):
            ranked.append((scored[k][0], scored[k][1], block_rank))
        pos = end + 1

    gt_rank = None
    if ground_truth is not None:
        covered = any(ground_truth in cov for cov in
                      matrix.failing_coverage + matrix.passing_coverage)
        if covered:
            gt_rank = next(r for e, _, r in ranked if e == ground_truth)
    return SuspiciousnessReport(tuple(ranked), suspicious_set(matrix),
                                ground_truth, gt_rank)


def top_n(report: SuspiciousnessReport, n: int) -> bool:
    """True iff the ground truth ranks within the first n positions."""
    if report.ground_truth is None:
        raise ValueError("report carries no ground truth")
    if report.ground_truth_rank is None:
        raise GroundTruthNotCovered(report.ground_truth)
    return report.ground_truth_rank <= n


def median_rank(ranks) -> int:
    """Middle value of exactly three rank positions."""
    values = list(ranks)
    if len(values) != 3:
        raise ValueError("median_rank expects exactly 3 values")
    return sorted(values)[1]
