"""Structural comparison of trees: global sequence alignment over pre-order
node-label streams, diff against the seed, and Jaccard similarity.

Replacement-only mutants keep the seed's shape, so the gap-free alignment
reduces to a positional diff; gaps only appear when comparing trees of
different shapes (e.g. reparsed sources where a negative literal became a
unary node).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .minilang import AstNode, node_label, walk


@dataclass(frozen=True)
class AlignmentParams:
    match_score: int = 2
    mismatch_penalty: int = -1
    gap_penalty: int = -2

    def __post_init__(self):
        if self.match_score <= self.mismatch_penalty:
            raise ValueError("match_score must exceed mismatch_penalty")
        if self.gap_penalty >= 0:
            raise ValueError("gap_penalty must be negative")


DEFAULT_PARAMS = AlignmentParams()


@dataclass(frozen=True)
class DiffResult:
    """Ids in the seed tree that align against a differing or gap column."""

    differing_seed_ids: frozenset


def serialize(tree: AstNode) -> list[tuple[int, tuple]]:
    """Pre-order sequence of (node id, label); length equals tree size."""
    return [(n.id, node_label(n)) for n in walk(tree)]


def align(a: list, b: list, params: AlignmentParams = DEFAULT_PARAMS):
    """Global alignment of two label sequences.

    Returns (score, pairs) where pairs is a list of (i, j) index pairs into
    a and b, with None marking a gap.  Traceback ties prefer diagonal, then
    up (consume a), then left (consume b).
    """
    la, lb = len(a), len(b)
    gap = params.gap_penalty
    # score[i][j]: best score aligning a[:i] with b[:j]
    score = [[0] * (lb + 1) for _ in range(la + 1)]
    for i in range(1, la + 1):
        score[i][0] = i * gap
    for j in range(1, lb + 1):
        score[0][j] = j * gap
    for i in range(1, la + 1):
        row = score[i]
        prev = score[i - 1]
        ai = a[i - 1]
        for j in range(1, lb + 1):
            sub = params.match_score if ai == b[j - 1] else params.mismatch_penalty
            row[j] = max(prev[j - 1] + sub, prev[j] + gap, row[j - 1] + gap)
    pairs = []
    i, j = la, lb
    while i > 0 or j > 0:
        if i > 0 and j > 0:
            sub = params.match_score if a[i - 1] == b[j - 1] else params.mismatch_penalty
            if score[i][j] == score[i - 1][j - 1] + sub:
                pairs.append((i - 1, j - 1))
                i -= 1
                j -= 1
                continue
        if i > 0 and score[i][j] == score[i - 1][j] + gap:
            pairs.append((i - 1, None))
            i -= 1
            continue
        pairs.append((None, j - 1))
        j -= 1
    pairs.reverse()
    return score[la][lb], pairs


def ast_diff(seed: AstNode, other: AstNode,
             params: AlignmentParams = DEFAULT_PARAMS) -> DiffResult:
    """Seed node ids whose alignment column differs from `other`."""
    sa = serialize(seed)
    sb = serialize(other)
    labels_a = [lab for _, lab in sa]
    labels_b = [lab for _, lab in sb]
    _, pairs = align(labels_a, labels_b, params)
    differing = set()
    for i, j in pairs:
        if i is None:
            continue
        if j is None or labels_a[i] != labels_b[j]:
            differing.add(sa[i][0])
    return DiffResult(frozenset(differing))


def union_diff(seed: AstNode, others: list[AstNode],
               params: AlignmentParams = DEFAULT_PARAMS) -> frozenset:
    """Union of per-tree diffs against the seed."""
    out: set = set()
    for tree in others:
        out |= ast_diff(seed, tree, params).differing_seed_ids
    return frozenset(out)


def jaccard(t0: AstNode, ti: AstNode) -> Fraction:
    """|Nodes(t0) ∩ Nodes(ti)| / |Nodes(t0) ∪ Nodes(ti)| over (id, label)
    pairs; exact rational in [0, 1]."""
    a = {(n.id, node_label(n)) for n in walk(t0)}
    b = {(n.id, node_label(n)) for n in walk(ti)}
    union = len(a | b)
    if union == 0:
        return Fraction(1)
    return Fraction(len(a & b), union)
