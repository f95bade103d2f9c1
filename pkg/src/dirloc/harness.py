"""Experiment driver: count sweeps, strategy comparisons, and report files.

Three baseline generators ride along with the directed pipeline:
  random        unguided mutation, 1-5 random nodes per program
  single-failing  the seed is the only failing input; passing programs come
                  from single value-node mutations
  same-mutation   both pools mutate only the identified target nodes

Per run, coverage spectra come from the optimized mode with the bug active;
failed generation is recorded (worst-possible rank) rather than fatal.
"""

from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .generator import (InsufficientCandidates, NoPassingFound, generate_fails,
                        generate_passings, identify_targets, run_pipeline,
                        undirected)
from .interp import DEFAULT_BUDGET
from .jitfix import BugId, ENTITY_NAMES, get_bug, trace_for_source
from .localize import SpectrumMatrix, median_rank, rank, suspicious_set
from .minilang import Program, get_node, parse, print_program, structural_key
from .mutation import DEFAULT_RULES, derive_rng, mutable_ids, mutate
from .oracle import FAIL, INVALID, PASS, classify

STRATEGIES = ("directed", "random", "single-failing", "same-mutation")

TOP_N_LEVELS = (1, 5, 10, 20)

_NOT_LOCALIZED = len(ENTITY_NAMES) + 1  # sentinel rank for failed/uncovered runs


@dataclass
class ExperimentResult:
    bug: str
    strategy: str
    m_passing: int
    n_failing: int
    suspicious_count: int
    eliminated_proportion: float
    top_n_flags: dict
    median_rank: int
    runs: list = field(default_factory=list)

    def to_json(self) -> dict:
        return dict(self.__dict__)


def _classify_and_trace(args):
    source, bug_id, budget = args
    bug = get_bug(bug_id)
    verdict = classify(Program("p", source), bug, budget).verdict
    if verdict == INVALID:
        return verdict, frozenset()
    trace = trace_for_source(source, bug, budget)
    return verdict, frozenset(trace.executed_entities)


def pmap(fn, items, jobs: int = 1):
    """Order-preserving map, optionally over a process pool; results do not
    depend on the job count."""
    if jobs <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def spectrum_from_programs(programs: list[Program], bug: BugId,
                           budget: int = DEFAULT_BUDGET,
                           jobs: int = 1) -> SpectrumMatrix:
    """Classify every program and collect optimized-mode coverage; invalid
    programs are dropped."""
    results = pmap(_classify_and_trace,
                   [(p.source, bug.id, budget) for p in programs], jobs)
    failing, passing = [], []
    for verdict, cov in results:
        if verdict == FAIL:
            failing.append(cov)
        elif verdict == PASS:
            passing.append(cov)
    return SpectrumMatrix(ENTITY_NAMES, tuple(failing), tuple(passing))


def seed_entities(bug: BugId, budget: int = DEFAULT_BUDGET) -> frozenset:
    """Entities covered by the seed's own failing run."""
    return frozenset(trace_for_source(bug.seed_program.source, bug, budget)
                     .executed_entities)


# ---------------------------------------------------------------------------
# Strategy generators
# ---------------------------------------------------------------------------

def directed_programs(bug: BugId, n: int, rng_seed: int,
                      budget: int = DEFAULT_BUDGET) -> list[Program]:
    programs, _ = run_pipeline(bug.seed_program, n, bug, rng_seed, budget)
    return programs


def random_programs(bug: BugId, n: int, rng_seed: int,
                    budget: int = DEFAULT_BUDGET) -> list[Program]:
    """Seed plus n distinct valid programs, each built by mutating 1-5
    uniformly chosen nodes."""
    seed_ast = parse(bug.seed_program.source)
    ids = mutable_ids(seed_ast)
    seen = {structural_key(seed_ast)}
    out = [Program("seed", bug.seed_program.source)]
    attempts = 0
    max_attempts = 20 * n
    while len(out) - 1 < n and attempts < max_attempts:
        attempts += 1
        picker = derive_rng(rng_seed, "rand-pick", attempts)
        k = picker.randint(1, 5)
        mutant = seed_ast
        for step in range(k):
            node_id = picker.choice(ids)
            mutant = mutate(mutant, node_id,
                            derive_rng(rng_seed, "rand-val", attempts, step))
        key = structural_key(mutant)
        if key in seen:
            continue
        seen.add(key)
        source = print_program(mutant)
        if classify(Program("r", source), bug, budget).verdict != INVALID:
            out.append(Program(f"rand_{len(out) - 1:03d}", source))
    return out


def single_failing_programs(bug: BugId, n: int, rng_seed: int,
                            budget: int = DEFAULT_BUDGET) -> list[Program]:
    """Seed as the only failing input plus up to n oracle-confirmed passing
    programs from single value-node mutations."""
    seed_ast = parse(bug.seed_program.source)
    value_ids = [i for i in mutable_ids(seed_ast)
                 if _is_value_node(seed_ast, i)]
    out = [Program("seed", bug.seed_program.source)]
    seen = {structural_key(seed_ast)}
    attempts = 0
    max_attempts = 20 * n
    while len(out) - 1 < n and attempts < max_attempts and value_ids:
        attempts += 1
        picker = derive_rng(rng_seed, "value-pick", attempts)
        node_id = picker.choice(value_ids)
        mutant = mutate(seed_ast, node_id,
                        derive_rng(rng_seed, "value-mut", attempts, node_id))
        key = structural_key(mutant)
        if key in seen:
            continue
        seen.add(key)
        source = print_program(mutant)
        if classify(Program("v", source), bug, budget).verdict == PASS:
            out.append(Program(f"val_{len(out) - 1:03d}", source))
    return out


def _is_value_node(root, node_id: int) -> bool:
    return get_node(root, node_id).kind in ("NumberLit", "StringLit", "BoolLit")


def same_mutation_programs(bug: BugId, n: int, rng_seed: int,
                           budget: int = DEFAULT_BUDGET) -> list[Program]:
    """Both pools from target-node mutation only: n/2 passing and up to n/2
    failing (target mutation rarely keeps a program failing, so the failing
    side may fall short; that shortfall is the point of this baseline)."""
    seed_ast = parse(bug.seed_program.source)
    pool = undirected(seed_ast, rng_seed)
    targets = identify_targets(seed_ast, pool, bug, budget)
    order = sorted(targets)
    half = n // 2
    passing: list[Program] = []
    failing: list[Program] = []
    seen = {structural_key(seed_ast)}
    attempts = 0
    max_attempts = 20 * n
    next_target = 0
    while (len(passing) < half or len(failing) < half) and attempts < max_attempts:
        target_id = order[next_target % len(order)]
        next_target += 1
        attempts += 1
        mutant = mutate(seed_ast, target_id,
                        derive_rng(rng_seed, "same-mut", attempts, target_id))
        key = structural_key(mutant)
        if key in seen:
            continue
        seen.add(key)
        source = print_program(mutant)
        verdict = classify(Program("s", source), bug, budget).verdict
        if verdict == PASS and len(passing) < half:
            passing.append(Program(f"pass_{len(passing):03d}", source))
        elif verdict == FAIL and len(failing) < half:
            failing.append(Program(f"fail_{len(failing):03d}", source))
    return [Program("seed", bug.seed_program.source)] + passing + failing


_STRATEGY_FN = {
    "directed": directed_programs,
    "random": random_programs,
    "single-failing": single_failing_programs,
    "same-mutation": same_mutation_programs,
}


# ---------------------------------------------------------------------------
# Experiments
# ---------------------------------------------------------------------------

def evaluate_run(bug: BugId, strategy: str, n: int, rng_seed: int,
                 budget: int = DEFAULT_BUDGET, jobs: int = 1) -> dict:
    """One generation + localization run; failures are recorded with the
    worst possible rank instead of raising."""
    base = seed_entities(bug, budget)
    try:
        programs = _STRATEGY_FN[strategy](bug, n, rng_seed, budget)
        matrix = spectrum_from_programs(programs, bug, budget, jobs)
        report = rank(matrix, bug.ground_truth_function)
        susp = suspicious_set(matrix) & base
        gt_rank = report.ground_truth_rank
        return {
            "rng_seed": rng_seed,
            "status": "ok",
            "m_passing": len(matrix.passing_coverage),
            "n_failing": len(matrix.failing_coverage),
            "suspicious_count": len(susp),
            "eliminated_proportion": (len(base) - len(susp)) / len(base),
            "rank": gt_rank if gt_rank is not None else _NOT_LOCALIZED,
            "covered": gt_rank is not None,
        }
    except (NoPassingFound, InsufficientCandidates) as e:
        return {
            "rng_seed": rng_seed,
            "status": f"generation-failed: {e}",
            "m_passing": 0,
            "n_failing": 1,
            "suspicious_count": len(base),
            "eliminated_proportion": 0.0,
            "rank": _NOT_LOCALIZED,
            "covered": False,
        }


def compare_strategies(bugs: list[BugId], n: int, rng_seeds,
                       strategies=STRATEGIES,
                       budget: int = DEFAULT_BUDGET,
                       jobs: int = 1) -> list[ExperimentResult]:
    """Run every (bug, strategy) three times and aggregate by the median-rank
    protocol."""
    rng_seeds = list(rng_seeds)
    if len(rng_seeds) != 3:
        raise ValueError("exactly 3 rng seeds are required")
    results = []
    for bug in bugs:
        for strategy in strategies:
            runs = [evaluate_run(bug, strategy, n, s, budget, jobs)
                    for s in rng_seeds]
            med = median_rank([r["rank"] for r in runs])
            rep = next(r for r in runs if r["rank"] == med)
            med_elim = sorted(r["eliminated_proportion"] for r in runs)[1]
            results.append(ExperimentResult(
                bug=bug.id,
                strategy=strategy,
                m_passing=rep["m_passing"],
                n_failing=rep["n_failing"],
                suspicious_count=rep["suspicious_count"],
                eliminated_proportion=med_elim,
                top_n_flags={k: med <= k for k in TOP_N_LEVELS},
                median_rank=med,
                runs=runs,
            ))
    return results


def sweep_counts(bug: BugId, m_values=(5, 10, 15), n_max: int = 15,
                 rng_seed: int = 1, budget: int = DEFAULT_BUDGET) -> list[dict]:
    """Suspicious-set size as a function of m passing and n failing inputs.

    Candidate prefixes follow generation order (target cycling), so the
    failing sets are nested in n and the counts are non-increasing by set
    algebra.  Cells the pools cannot fill are absent (value None).
    """
    seed_ast = parse(bug.seed_program.source)
    base = seed_entities(bug, budget)
    pool = undirected(seed_ast, rng_seed)
    targets = identify_targets(seed_ast, pool, bug, budget)
    passing, _ = generate_passings(max(m_values), seed_ast, targets, rng_seed,
                                   bug, budget, strict=False)
    failing, _ = generate_fails(n_max - 1, seed_ast, targets, rng_seed,
                                bug, budget, strict=False)

    def cov(ast) -> frozenset:
        return frozenset(trace_for_source(print_program(ast), bug, budget)
                         .executed_entities)

    passing_cov = [cov(ast) for ast in passing]
    failing_cov = [cov(ast) for ast in failing]

    rows = []
    for m in m_values:
        if m > len(passing_cov):
            for n in range(1, n_max + 1):
                rows.append({"m": m, "n": n, "suspicious": None, "normalized": None})
            continue
        pass_union: set = set()
        for c in passing_cov[:m]:
            pass_union |= c
        for n in range(1, n_max + 1):
            if n - 1 > len(failing_cov):
                rows.append({"m": m, "n": n, "suspicious": None, "normalized": None})
                continue
            inter = set(base)
            for c in failing_cov[:n - 1]:
                inter &= c
            susp = inter - pass_union
            rows.append({"m": m, "n": n, "suspicious": len(susp),
                         "normalized": len(susp) / len(base)})
    return rows


# ---------------------------------------------------------------------------
# Report files
# ---------------------------------------------------------------------------

def _results_csv(results: list[ExperimentResult]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["bug", "strategy", "median_rank", "top1", "top5",
                     "top10", "top20", "suspicious_count",
                     "eliminated_proportion", "m_passing", "n_failing"])
    for r in results:
        writer.writerow([
            r.bug, r.strategy, r.median_rank,
            r.top_n_flags[1], r.top_n_flags[5],
            r.top_n_flags[10], r.top_n_flags[20],
            r.suspicious_count, f"{r.eliminated_proportion:.6f}",
            r.m_passing, r.n_failing,
        ])
    return buf.getvalue()


def summary_table(results: list[ExperimentResult]) -> str:
    """Markdown table: per strategy, bugs localized within each Top-n."""
    strategies = []
    for r in results:
        if r.strategy not in strategies:
            strategies.append(r.strategy)
    lines = ["| Strategy | Total bugs | Top-1 | Top-5 | Top-10 | Top-20 |",
             "|---|---|---|---|---|---|"]
    for strategy in strategies:
        rows = [r for r in results if r.strategy == strategy]
        total = len(rows)
        cells = []
        for level in TOP_N_LEVELS:
            count = sum(1 for r in rows if r.top_n_flags[level])
            pct = round(100.0 * count / total, 1) if total else 0.0
            cells.append(f"{count} ({pct}%)")
        lines.append(f"| {strategy} | {total} | " + " | ".join(cells) + " |")
    return "\n".join(lines) + "\n"


def emit_report(results: list[ExperimentResult], outdir) -> list[Path]:
    """Write results.csv, results.json, and summary.md; returns the paths."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    paths = []
    try:
        csv_path = outdir / "results.csv"
        csv_path.write_text(_results_csv(results))
        paths.append(csv_path)
        json_path = outdir / "results.json"
        json_path.write_text(json.dumps([r.to_json() for r in results],
                                        indent=2, sort_keys=True) + "\n")
        paths.append(json_path)
        md_path = outdir / "summary.md"
        md_path.write_text(summary_table(results))
        paths.append(md_path)
    except OSError as e:
        raise OSError(f"cannot write report under {outdir}: {e}") from e
    return paths


def sweep_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["m", "n", "suspicious", "normalized"])
    for row in rows:
        norm = "" if row["normalized"] is None else f"{row['normalized']:.6f}"
        susp = "" if row["suspicious"] is None else row["suspicious"]
        writer.writerow([row["m"], row["n"], susp, norm])
    return buf.getvalue()
