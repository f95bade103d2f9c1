"""Differential test oracle: a program passes when reference and optimized
execution behave identically, fails when they differ, and is invalid when it
cannot be judged (parse error, reference-run error, or budget exhaustion).
"""

from __future__ import annotations

from dataclasses import dataclass

from .interp import DEFAULT_BUDGET, Observable
from .jitfix import BugId, get_bug, run_optimized, run_reference
from .minilang import MiniSyntaxError, Program, parse

PASS = "pass"
FAIL = "fail"
INVALID = "invalid"


@dataclass(frozen=True)
class OracleVerdict:
    verdict: str  # pass | fail | invalid
    reference_output: Observable | None = None
    optimized_output: Observable | None = None

    def to_json(self) -> dict:
        out = {"verdict": self.verdict}
        if self.reference_output is not None:
            out["reference"] = self.reference_output.to_json()
        if self.optimized_output is not None:
            out["optimized"] = self.optimized_output.to_json()
        return out


def _resolve(bug: BugId | str) -> BugId:
    return bug if isinstance(bug, BugId) else get_bug(bug)


def classify(program: Program, bug: BugId | str,
             budget: int = DEFAULT_BUDGET) -> OracleVerdict:
    """Run both modes with the bug active and compare observables."""
    bug = _resolve(bug)
    try:
        root = parse(program.source)
    except MiniSyntaxError:
        return OracleVerdict(INVALID)
    reference = run_reference(root, budget)
    if reference.errored:
        return OracleVerdict(INVALID, reference_output=reference)
    optimized, _ = run_optimized(root, bug, budget)
    verdict = PASS if optimized == reference else FAIL
    return OracleVerdict(verdict, reference, optimized)


def partition(programs: list[Program], bug: BugId | str,
              budget: int = DEFAULT_BUDGET):
    """Split programs into (passing, failing, invalid) buckets."""
    bug = _resolve(bug)
    passing: list[Program] = []
    failing: list[Program] = []
    invalid: list[Program] = []
    for program in programs:
        verdict = classify(program, bug, budget).verdict
        if verdict == PASS:
            passing.append(program)
        elif verdict == FAIL:
            failing.append(program)
        else:
            invalid.append(program)
    return passing, failing, invalid
