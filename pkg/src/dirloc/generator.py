"""Directed test-program generation.

Four stages: undirected generation tries to mutate every node of the seed
once; target identification diffs the passing mutants against the seed to
find the nodes whose mutation defuses the bug; directed generation then
produces passing programs (one target node mutated per copy, cycling through
targets) and failing programs (every mutable non-target node mutated per
copy); similarity selection keeps the N/2 passing programs closest to the
seed and the N/2 failing programs furthest from it.

Directed candidates are oracle-confirmed before being pooled: a candidate
meant to pass that still fails (or vice versa) is discarded rather than
poisoning the spectra.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from fractions import Fraction

from .alignment import AlignmentParams, DEFAULT_PARAMS, ast_diff, jaccard, union_diff
from .interp import DEFAULT_BUDGET
from .jitfix import BugId
from .minilang import AstNode, Program, parse, print_program, size, structural_key
from .mutation import DEFAULT_RULES, RuleTable, derive_rng, mutable_ids, mutate
from .oracle import FAIL, PASS, classify


class NoPassingFound(Exception):
    """No undirected mutant passed, so no target node is identifiable."""


class InsufficientCandidates(Exception):
    def __init__(self, wanted: int, count: int, which: str):
        super().__init__(f"needed {wanted} {which} candidates, found {count}")
        self.wanted = wanted
        self.count = count
        self.which = which


@dataclass(frozen=True)
class GenerationConfig:
    n: int
    rng_seed: int
    max_attempts: int = 0  # 0 means 20 * n
    budget: int = DEFAULT_BUDGET

    def __post_init__(self):
        if self.n < 2 or self.n % 2 != 0:
            raise ValueError("N must be an even integer >= 2")
        if self.max_attempts == 0:
            object.__setattr__(self, "max_attempts", 20 * self.n)


@dataclass
class PipelineReport:
    bug: str
    n: int
    rng_seed: int
    seed_size: int
    undirected_size: int = 0
    targets: list = field(default_factory=list)
    passing_pool: int = 0
    failing_pool: int = 0
    passing_attempts: int = 0
    failing_attempts: int = 0
    selected_passing: int = 0
    selected_failing: int = 0
    verdict_counts: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return dict(self.__dict__)


def _source_of(ast: AstNode) -> str:
    return print_program(ast)


def _confirm(ast: AstNode, bug: BugId, budget: int) -> str:
    return classify(Program("candidate", _source_of(ast)), bug, budget).verdict


def undirected(seed_ast: AstNode, rng_seed: int,
               rules: RuleTable = DEFAULT_RULES) -> list[AstNode]:
    """One mutation attempt per node; copies identical to the seed (immutable
    nodes) are dropped, and duplicates are removed."""
    seen = {structural_key(seed_ast)}
    out = []
    for i in range(1, size(seed_ast) + 1):
        mutant = mutate(seed_ast, i, derive_rng(rng_seed, "undirected", i), rules)
        key = structural_key(mutant)
        if key in seen:
            continue
        seen.add(key)
        out.append(mutant)
    return out


def targets_from_passing(seed_ast: AstNode, passing: list[AstNode],
                         params: AlignmentParams = DEFAULT_PARAMS) -> frozenset:
    """Union of the per-mutant diffs: the seed node ids to mutate."""
    return union_diff(seed_ast, passing, params)


def identify_targets(seed_ast: AstNode, pool: list[AstNode], bug: BugId,
                     budget: int = DEFAULT_BUDGET,
                     params: AlignmentParams = DEFAULT_PARAMS) -> frozenset:
    """Classify the undirected pool and diff the passing mutants."""
    passing = [ast for ast in pool if _confirm(ast, bug, budget) == PASS]
    if not passing:
        raise NoPassingFound(f"no passing mutant among {len(pool)} candidates")
    return targets_from_passing(seed_ast, passing, params)


def generate_passings(n: int, seed_ast: AstNode, targets: frozenset,
                      rng_seed: int, bug: BugId,
                      budget: int = DEFAULT_BUDGET,
                      max_attempts: int = 0,
                      rules: RuleTable = DEFAULT_RULES,
                      strict: bool = True,
                      params: AlignmentParams = DEFAULT_PARAMS):
    """Oracle-confirmed passing programs, one target node mutated per copy.

    Each accepted candidate's printed source must re-parse to a tree whose
    diff against the seed is exactly the mutated target (negative replacement
    values can print to forms that blur the single-node diff; those are
    discarded).  Returns (candidates, attempts used).  With strict=True (the
    contract), fewer than n confirmed candidates raises
    InsufficientCandidates.
    """
    if not targets:
        raise ValueError("targets must be nonempty")
    if max_attempts == 0:
        max_attempts = 20 * n
    order = sorted(targets)
    seen = {structural_key(seed_ast)}
    out: list[AstNode] = []
    next_target = 0
    attempts = 0
    while len(out) < n and attempts < max_attempts:
        target_id = order[next_target % len(order)]
        next_target += 1
        attempts += 1
        mutant = mutate(seed_ast, target_id,
                        derive_rng(rng_seed, "passing", attempts, target_id), rules)
        key = structural_key(mutant)
        if key in seen:
            continue
        seen.add(key)
        if _confirm(mutant, bug, budget) != PASS:
            continue
        reparsed = parse(_source_of(mutant))
        if ast_diff(seed_ast, reparsed, params).differing_seed_ids != {target_id}:
            continue
        out.append(mutant)
    if strict and len(out) < n:
        raise InsufficientCandidates(n, len(out), "passing")
    return out, attempts


def generate_fails(n: int, seed_ast: AstNode, targets: frozenset,
                   rng_seed: int, bug: BugId,
                   budget: int = DEFAULT_BUDGET,
                   max_attempts: int = 0,
                   rules: RuleTable = DEFAULT_RULES,
                   strict: bool = True):
    """Oracle-confirmed failing programs; every mutable node outside the
    target set is mutated in each copy, with fresh replacement choices per
    iteration."""
    if max_attempts == 0:
        max_attempts = 20 * n
    non_targets = [i for i in mutable_ids(seed_ast, rules) if i not in targets]
    seen: set = set()
    out: list[AstNode] = []
    attempts = 0
    while len(out) < n and attempts < max_attempts:
        attempts += 1
        mutant = seed_ast
        for node_id in non_targets:
            mutant = mutate(mutant, node_id,
                            derive_rng(rng_seed, "failing", attempts, node_id), rules)
        key = structural_key(mutant)
        if key in seen:
            continue
        seen.add(key)
        if _confirm(mutant, bug, budget) == FAIL:
            out.append(mutant)
    if strict and len(out) < n:
        raise InsufficientCandidates(n, len(out), "failing")
    return out, attempts


def _source_hash(source: str) -> str:
    return hashlib.sha256(source.encode()).hexdigest()


def select(passings: list[AstNode], fails: list[AstNode], seed_ast: AstNode,
           n: int):
    """Keep the n/2 passing programs most similar to the seed and the n/2
    failing programs least similar; ties break on the printed-source hash."""
    half = n // 2
    if len(passings) < half:
        raise InsufficientCandidates(half, len(passings), "passing")
    if len(fails) < half:
        raise InsufficientCandidates(half, len(fails), "failing")

    def keyed(pool):
        return [(jaccard(seed_ast, ast), _source_of(ast)) for ast in pool]

    passing_sorted = sorted(keyed(passings),
                            key=lambda t: (-t[0], _source_hash(t[1])))
    failing_sorted = sorted(keyed(fails),
                            key=lambda t: (t[0], _source_hash(t[1])))
    selected_pass = [Program(f"pass_{i:03d}", src)
                     for i, (_, src) in enumerate(passing_sorted[:half])]
    selected_fail = [Program(f"fail_{i:03d}", src)
                     for i, (_, src) in enumerate(failing_sorted[:half])]
    return selected_pass, selected_fail


def run_pipeline(seed: Program, n: int, bug: BugId, rng_seed: int,
                 budget: int = DEFAULT_BUDGET,
                 max_attempts: int = 0,
                 rules: RuleTable = DEFAULT_RULES,
                 params: AlignmentParams = DEFAULT_PARAMS):
    """End-to-end generation: undirected pool, target identification,
    directed generation of n candidates per side, and N/2+N/2 selection.

    Directed generation is allowed to fall short of n as long as each pool
    still covers the n/2 the selection stage needs; a shorter pool raises
    InsufficientCandidates.  Returns (programs including the seed, report).
    """
    config = GenerationConfig(n, rng_seed, max_attempts, budget)
    seed_verdict = classify(seed, bug, budget).verdict
    if seed_verdict != FAIL:
        raise ValueError(
            f"seed must fail under bug {bug.id}, but verdict was {seed_verdict}")
    seed_ast = parse(seed.source)
    report = PipelineReport(bug=bug.id, n=n, rng_seed=rng_seed,
                            seed_size=size(seed_ast))

    pool = undirected(seed_ast, rng_seed, rules)
    report.undirected_size = len(pool)
    targets = identify_targets(seed_ast, pool, bug, budget, params)
    report.targets = sorted(targets)

    passings, pass_attempts = generate_passings(
        n, seed_ast, targets, rng_seed, bug, budget,
        config.max_attempts, rules, strict=False)
    fails, fail_attempts = generate_fails(
        n, seed_ast, targets, rng_seed, bug, budget,
        config.max_attempts, rules, strict=False)
    report.passing_pool = len(passings)
    report.failing_pool = len(fails)
    report.passing_attempts = pass_attempts
    report.failing_attempts = fail_attempts

    selected_pass, selected_fail = select(passings, fails, seed_ast, n)
    report.selected_passing = len(selected_pass)
    report.selected_failing = len(selected_fail)

    programs = [Program("seed", seed.source)] + selected_pass + selected_fail
    counts: dict[str, int] = {}
    for program in programs:
        verdict = classify(program, bug, budget).verdict
        counts[verdict] = counts.get(verdict, 0) + 1
    report.verdict_counts = counts
    return programs, report
