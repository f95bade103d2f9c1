"""Command-line surface.

Subcommands: ast, rules, run, classify, diff, generate, localize,
experiment, bugs.  Options win over the JSON config file, which wins over
defaults.  Exit codes: 0 success, 1 domain error, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path

from .alignment import AlignmentParams, ast_diff
from .generator import InsufficientCandidates, NoPassingFound, run_pipeline
from .harness import (STRATEGIES, compare_strategies, emit_report,
                      spectrum_from_programs, sweep_counts, sweep_csv)
from .interp import DEFAULT_BUDGET
from .jitfix import bug_registry, get_bug, run_optimized, run_reference
from .localize import rank
from .minilang import MiniSyntaxError, Program, dump_json, parse
from .mutation import DEFAULT_RULES, RuleTable
from .oracle import classify

SOURCE_EXT = ".mjs-mini"


class DomainError(Exception):
    pass


@dataclass
class Config:
    n: int = 30
    rng_seed: int = 1
    bug: str | None = None
    budget: int = DEFAULT_BUDGET
    match_score: int = 2
    mismatch_penalty: int = -1
    gap_penalty: int = -2
    out_dir: str = "out"
    jobs: int = 1
    int_pool: list | None = None
    float_pool: list | None = None
    string_pool: list | None = None
    bool_pool: list | None = None

    def validate(self):
        if self.n < 2 or self.n % 2 != 0:
            raise DomainError("N must be an even integer >= 2")
        if self.budget < 1:
            raise DomainError("step budget must be positive")
        if self.jobs < 1:
            raise DomainError("--jobs must be >= 1")

    def alignment_params(self) -> AlignmentParams:
        return AlignmentParams(self.match_score, self.mismatch_penalty,
                               self.gap_penalty)

    def rules(self) -> RuleTable:
        if not any((self.int_pool, self.float_pool, self.string_pool,
                    self.bool_pool)):
            return DEFAULT_RULES
        return DEFAULT_RULES.with_pools(self.int_pool, self.float_pool,
                                        self.string_pool, self.bool_pool)


_CONFIG_KEYS = {
    "n", "rng_seed", "bug", "budget", "match_score", "mismatch_penalty",
    "gap_penalty", "out_dir", "jobs", "int_pool", "float_pool",
    "string_pool", "bool_pool",
}


def load_config(args) -> Config:
    """Merge precedence: command-line flags, then config file, then
    defaults."""
    config = Config()
    path = getattr(args, "config", None)
    if path:
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as e:
            raise DomainError(f"cannot read config {path}: {e}")
        for key, value in data.items():
            if key not in _CONFIG_KEYS:
                raise DomainError(f"unknown config key {key!r}")
            setattr(config, key, value)
    for key in _CONFIG_KEYS:
        flag = getattr(args, key, None)
        if flag is not None:
            setattr(config, key, flag)
    config.validate()
    return config


def _read_program(path: str) -> Program:
    try:
        return Program(Path(path).stem, Path(path).read_text())
    except OSError as e:
        raise DomainError(f"cannot read {path}: {e}")


def _parse_program(program: Program):
    try:
        return parse(program.source)
    except MiniSyntaxError as e:
        raise DomainError(f"{program.name}: {e}")


def _print_json(payload):
    print(json.dumps(payload, indent=2))


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_ast(args) -> int:
    root = _parse_program(_read_program(args.file))
    print(dump_json(root))
    return 0


def cmd_rules(args) -> int:
    config = load_config(args)
    print(config.rules().to_json())
    return 0


def cmd_run(args) -> int:
    config = load_config(args)
    root = _parse_program(_read_program(args.file))
    if args.mode == "reference":
        observable = run_reference(root, config.budget)
        _print_json(observable.to_json())
    else:
        bug = get_bug(config.bug) if config.bug else None
        observable, trace = run_optimized(root, bug, config.budget)
        _print_json({"observable": observable.to_json(),
                     "trace": trace.to_json()})
    return 0


def cmd_classify(args) -> int:
    config = load_config(args)
    if not config.bug:
        raise DomainError("--bug is required")
    verdict = classify(_read_program(args.file), get_bug(config.bug),
                       config.budget)
    _print_json(verdict.to_json())
    return 0


def cmd_diff(args) -> int:
    config = load_config(args)
    seed = _parse_program(_read_program(args.seed_file))
    other = _parse_program(_read_program(args.other_file))
    result = ast_diff(seed, other, config.alignment_params())
    _print_json({"targets": sorted(result.differing_seed_ids)})
    return 0


def cmd_generate(args) -> int:
    config = load_config(args)
    if not config.bug:
        raise DomainError("--bug is required")
    bug = get_bug(config.bug)
    seed = _read_program(args.seed) if args.seed else bug.seed_program
    try:
        programs, report = run_pipeline(
            seed, config.n, bug, config.rng_seed, config.budget,
            rules=config.rules(), params=config.alignment_params())
    except (NoPassingFound, InsufficientCandidates, ValueError) as e:
        raise DomainError(str(e))
    outdir = Path(config.out_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    for program in programs:
        (outdir / f"{program.name}{SOURCE_EXT}").write_text(program.source)
    (outdir / "report.json").write_text(
        json.dumps(report.to_json(), indent=2, sort_keys=True) + "\n")
    print(f"wrote {len(programs)} programs and report.json to {outdir}")
    return 0


def cmd_localize(args) -> int:
    config = load_config(args)
    if not config.bug:
        raise DomainError("--bug is required")
    bug = get_bug(config.bug)
    directory = Path(args.programs)
    files = sorted(directory.glob(f"*{SOURCE_EXT}"))
    if not files:
        raise DomainError(f"no {SOURCE_EXT} files in {directory}")
    programs = [Program(f.stem, f.read_text()) for f in files]
    matrix = spectrum_from_programs(programs, bug, config.budget, config.jobs)
    report = rank(matrix, bug.ground_truth_function)
    outdir = Path(config.out_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "ranking.json").write_text(
        json.dumps(report.to_json(), indent=2) + "\n")
    with (outdir / "ranking.csv").open("w") as fh:
        fh.write("entity,score,rank\n")
        for entity, score, rank_pos in report.ranked:
            fh.write(f"{entity},{score:.6f},{rank_pos}\n")
    print(f"ground truth {bug.ground_truth_function} "
          f"rank: {report.ground_truth_rank}")
    return 0


def cmd_experiment(args) -> int:
    config = load_config(args)
    bugs = list(bug_registry())
    if args.bugs:
        bugs = [get_bug(b.strip()) for b in args.bugs.split(",")]
    strategies = STRATEGIES if args.strategies == "all" \
        else tuple(s.strip() for s in args.strategies.split(","))
    for s in strategies:
        if s not in STRATEGIES:
            raise DomainError(f"unknown strategy {s!r} (known: {', '.join(STRATEGIES)})")
    seeds = [int(s) for s in args.seeds.split(",")]
    if len(seeds) != 3:
        raise DomainError("exactly 3 rng seeds are required, e.g. --seeds 1,2,3")
    results = compare_strategies(bugs, config.n, seeds, strategies,
                                 config.budget, config.jobs)
    paths = emit_report(results, config.out_dir)
    if args.sweep:
        for bug in bugs:
            rows = sweep_counts(bug, rng_seed=seeds[0], budget=config.budget)
            path = Path(config.out_dir) / f"sweep_{bug.id}.csv"
            path.write_text(sweep_csv(rows))
            paths.append(path)
    print("wrote " + ", ".join(str(p) for p in paths))
    return 0


def cmd_bugs(args) -> int:
    payload = [{"id": bug.id,
                "ground_truth_function": bug.ground_truth_function,
                "seed_name": bug.seed_program.name}
               for bug in bug_registry()]
    _print_json(payload)
    return 0


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------

def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--bug", help="bug id from the registry")
    p.add_argument("-N", dest="n", type=int, help="number of programs to generate")
    p.add_argument("--rng", dest="rng_seed", type=int, help="RNG seed")
    p.add_argument("--budget", type=int, help="interpreter step budget")
    p.add_argument("-o", "--out", dest="out_dir", help="output directory")
    p.add_argument("--jobs", type=int, help="worker processes (default 1)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dirloc",
        description="directed test-program generation and bug localization "
                    "for the bundled mini-JIT fixture")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ast", help="dump a source file's AST as JSON")
    p.add_argument("file")
    p.set_defaults(fn=cmd_ast)

    p = sub.add_parser("rules", help="dump the mutation rule tables as JSON")
    _add_common(p)
    p.set_defaults(fn=cmd_rules)

    p = sub.add_parser("run", help="run a program in one execution mode")
    p.add_argument("file")
    p.add_argument("--mode", choices=("reference", "optimized"),
                   default="reference")
    _add_common(p)
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("classify", help="classify a program against a bug")
    p.add_argument("file")
    _add_common(p)
    p.set_defaults(fn=cmd_classify)

    p = sub.add_parser("diff", help="alignment diff of two programs")
    p.add_argument("seed_file")
    p.add_argument("other_file")
    _add_common(p)
    p.set_defaults(fn=cmd_diff)

    p = sub.add_parser("generate",
                       help="generate N/2 passing and N/2 failing programs")
    p.add_argument("--seed", help=f"seed program file (default: the bug's own seed)")
    _add_common(p)
    p.set_defaults(fn=cmd_generate)

    p = sub.add_parser("localize", help="rank optimizer functions for a bug")
    p.add_argument("--programs", required=True,
                   help=f"directory of *{SOURCE_EXT} files")
    _add_common(p)
    p.set_defaults(fn=cmd_localize)

    p = sub.add_parser("experiment", help="run the strategy comparison suite")
    p.add_argument("--suite", default="fixture", choices=("fixture",))
    p.add_argument("--bugs", help="comma-separated bug ids (default: all)")
    p.add_argument("--strategies", default="all")
    p.add_argument("--seeds", default="1,2,3",
                   help="three comma-separated RNG seeds")
    p.add_argument("--sweep", action="store_true",
                   help="also emit per-bug (m, n) suspicious-count sweeps")
    _add_common(p)
    p.set_defaults(fn=cmd_experiment)

    p = sub.add_parser("bugs", help="list the bug registry")
    p.set_defaults(fn=cmd_bugs)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except DomainError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except KeyError as e:
        print(f"error: {e.args[0] if e.args else e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
