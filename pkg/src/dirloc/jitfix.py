"""The subject under test: an "optimizing" execution mode for the mini
language, built from named optimizer pass functions, plus a registry of
injectable bugs with known ground truth.

Optimized execution lowers the program (recording which pass functions
process it), runs analysis and rewrite passes over the tree, then evaluates
the rewritten tree with the reference interpreter.  Each registered bug is a
conditional mis-rewrite inside exactly one named pass function; with no bug
active every pass is semantics-preserving.

Coverage is per run: the set of pass functions that fired (matched at least
one node) together with per-function fire counts.
"""

from __future__ import annotations

from dataclasses import dataclass

from .interp import Interpreter, Observable, DEFAULT_BUDGET, binary_op, call_builtin, unary_op, MiniRuntimeError
from .minilang import AstNode, Program, parse, structural_key, walk


@dataclass(frozen=True)
class CoverageTrace:
    executed_entities: frozenset
    per_entity_counts: dict

    def to_json(self) -> dict:
        return {
            "entities": sorted(self.executed_entities),
            "counts": {k: self.per_entity_counts[k]
                       for k in sorted(self.per_entity_counts)},
        }


class _Ctx:
    def __init__(self, buggy_function: str | None):
        self.counts: dict[str, int] = {}
        self.buggy_function = buggy_function

    def record(self, name: str, n: int = 1):
        if n > 0:
            self.counts[name] = self.counts.get(name, 0) + n


# ---------------------------------------------------------------------------
# Lowering and analysis: record-only walks
# ---------------------------------------------------------------------------

def _is_lit(n: AstNode) -> bool:
    return n.kind in ("NumberLit", "StringLit", "BoolLit")


def _is_number_lit(n: AstNode) -> bool:
    return n.kind == "NumberLit" and not isinstance(n.value, bool)


def _binop_pred(op):
    return lambda n: n.kind == "BinaryOp" and n.value == op


def _unop_pred(ops):
    return lambda n: n.kind == "UnaryOp" and n.value in ops


_LOWERING = [
    ("lower_function", lambda n: n.kind == "Function"),
    ("lower_let", lambda n: n.kind == "Let"),
    ("lower_assign", lambda n: n.kind == "Assign"),
    ("lower_if", lambda n: n.kind == "If"),
    ("lower_while", lambda n: n.kind == "While"),
    ("lower_return", lambda n: n.kind == "Return"),
    ("lower_call_user", lambda n: n.kind == "Call" and n.children[0].kind == "Identifier"),
    ("lower_call_builtin", lambda n: n.kind == "Call" and n.children[0].kind == "BuiltinRef"),
    ("lower_literal", _is_lit),
    ("lower_add", _binop_pred("+")),
    ("lower_sub", _binop_pred("-")),
    ("lower_mul", _binop_pred("*")),
    ("lower_div", _binop_pred("/")),
    ("lower_mod", _binop_pred("%")),
    ("lower_eq", _binop_pred("==")),
    ("lower_ne", _binop_pred("!=")),
    ("lower_lt", _binop_pred("<")),
    ("lower_le", _binop_pred("<=")),
    ("lower_gt", _binop_pred(">")),
    ("lower_ge", _binop_pred(">=")),
    ("lower_logic_and", _binop_pred("&&")),
    ("lower_logic_or", _binop_pred("||")),
    ("lower_neg", _unop_pred(("-",))),
    ("lower_unary_plus", _unop_pred(("+",))),
    ("lower_bitnot", _unop_pred(("~",))),
    ("lower_logic_not", _unop_pred(("!",))),
]

_ANALYSIS = [
    ("analyze_arith_ranges",
     lambda n: n.kind == "BinaryOp" and n.value in ("+", "-", "*", "/", "%")),
    ("analyze_branch_targets", lambda n: n.kind in ("If", "While")),
]


def _run_recording_pass(name: str, pred, root: AstNode, ctx: _Ctx) -> AstNode:
    ctx.record(name, sum(1 for n in walk(root) if pred(n)))
    return root


# ---------------------------------------------------------------------------
# Rewrite passes
# ---------------------------------------------------------------------------

def _lit(value) -> AstNode:
    if isinstance(value, bool):
        return AstNode(0, "BoolLit", value, ())
    if isinstance(value, (int, float)):
        return AstNode(0, "NumberLit", value, ())
    return AstNode(0, "StringLit", value, ())


def _rewrite_bottom_up(root: AstNode, fn):
    """Apply fn post-order; fn returns a replacement node or None.  Each
    position is rewritten at most once per pass."""
    count = [0]

    def rec(n: AstNode) -> AstNode:
        n = AstNode(n.id, n.kind, n.value, tuple(rec(c) for c in n.children))
        replacement = fn(n)
        if replacement is not None:
            count[0] += 1
            return replacement
        return n

    return rec(root), count[0]


def _is_zero_lit(n: AstNode) -> bool:
    return _is_number_lit(n) and n.value == 0


def _is_int_lit(n: AstNode, value: int) -> bool:
    return (_is_number_lit(n) and isinstance(n.value, int) and n.value == value)


def _is_neg_zero_pattern(n: AstNode) -> bool:
    return (n.kind == "UnaryOp" and n.value == "-"
            and _is_zero_lit(n.children[0]))


def _provably_numeric(n: AstNode) -> bool:
    if _is_number_lit(n):
        return True
    if n.kind == "UnaryOp" and n.value in ("-", "+", "~"):
        return True
    if n.kind == "BinaryOp" and n.value in ("-", "*", "/", "%"):
        return True
    if n.kind == "Call" and n.children[0].kind == "BuiltinRef" \
            and n.children[0].value.startswith("Math."):
        return True
    return False


def _try_const(fn_compute):
    try:
        return _lit(fn_compute())
    except (MiniRuntimeError, ValueError, OverflowError):
        return None


def fold_add_negzero(root: AstNode, ctx: _Ctx) -> AstNode:
    """Folds additions with a negated zero right operand.

    Healthy behavior folds only fully constant `lit + -0`; the injectable bug
    drops the `+ -0` for any left operand, which loses the int-to-float
    promotion (and the zero sign) the addition would have produced.
    """
    buggy = ctx.buggy_function == "fold_add_negzero"

    def rw(n: AstNode):
        if n.kind != "BinaryOp" or n.value != "+":
            return None
        left, right = n.children
        if not _is_neg_zero_pattern(right):
            return None
        if buggy:
            return left
        if _is_number_lit(left):
            return _try_const(
                lambda: binary_op("+", left.value, unary_op("-", right.children[0].value)))
        return None

    root, n = _rewrite_bottom_up(root, rw)
    ctx.record("fold_add_negzero", n)
    return root


def fold_eq_self(root: AstNode, ctx: _Ctx) -> AstNode:
    """Folds `e == e` comparisons of structurally identical sides.

    Healthy behavior folds only non-float literals; the injectable bug folds
    any structurally equal sides to true, which is wrong when the operand
    evaluates to NaN.
    """
    buggy = ctx.buggy_function == "fold_eq_self"

    def rw(n: AstNode):
        if n.kind != "BinaryOp" or n.value != "==":
            return None
        a, b = n.children
        if structural_key(a) != structural_key(b):
            return None
        if buggy:
            return _lit(True)
        if (a.kind in ("StringLit", "BoolLit")
                or (_is_number_lit(a) and isinstance(a.value, int))):
            return _lit(True)
        return None

    root, n = _rewrite_bottom_up(root, rw)
    ctx.record("fold_eq_self", n)
    return root


def reduce_mul_two(root: AstNode, ctx: _Ctx) -> AstNode:
    """Strength-reduces `e * 2` to `e + e`.

    Healthy behavior requires the operand to be provably numeric; the
    injectable bug applies the reduction to anything, turning a numeric
    coercion of a string operand into string concatenation.
    """
    buggy = ctx.buggy_function == "reduce_mul_two"

    def rw(n: AstNode):
        if n.kind != "BinaryOp" or n.value != "*":
            return None
        left, right = n.children
        if not _is_int_lit(right, 2):
            return None
        if buggy or _provably_numeric(left):
            return AstNode(0, "BinaryOp", "+", (left, left))
        return None

    root, n = _rewrite_bottom_up(root, rw)
    ctx.record("reduce_mul_two", n)
    return root


def specialize_minmax(root: AstNode, ctx: _Ctx) -> AstNode:
    """Specializes Math.max/Math.min calls.

    Healthy behavior folds fully constant calls; the injectable bug assumes
    the non-constant operand of `Math.max(e, 0)` dominates and rewrites the
    call to `e`, which is wrong for negative values.
    """
    buggy = ctx.buggy_function == "specialize_minmax"

    def rw(n: AstNode):
        if n.kind != "Call" or n.children[0].kind != "BuiltinRef":
            return None
        name = n.children[0].value
        if name not in ("Math.max", "Math.min"):
            return None
        args = n.children[1:]
        if len(args) != 2:
            return None
        if buggy and name == "Math.max":
            if _is_int_lit(args[1], 0):
                return args[0]
            if _is_int_lit(args[0], 0):
                return args[1]
        if _is_number_lit(args[0]) and _is_number_lit(args[1]):
            return _try_const(lambda: call_builtin(name, [a.value for a in args]))
        return None

    root, n = _rewrite_bottom_up(root, rw)
    ctx.record("specialize_minmax", n)
    return root


def fold_mod_sign(root: AstNode, ctx: _Ctx) -> AstNode:
    """Folds and specializes modulo expressions.

    Healthy behavior folds fully constant `lit % lit`; the injectable bug
    rewrites `e % 2` to `Math.abs(e) % 2`, losing the dividend's sign for
    negative operands.
    """
    buggy = ctx.buggy_function == "fold_mod_sign"

    def rw(n: AstNode):
        if n.kind != "BinaryOp" or n.value != "%":
            return None
        left, right = n.children
        if buggy and _is_int_lit(right, 2):
            abs_call = AstNode(0, "Call", None,
                               (AstNode(0, "BuiltinRef", "Math.abs", ()), left))
            return AstNode(0, "BinaryOp", "%", (abs_call, right))
        if _is_number_lit(left) and _is_number_lit(right):
            return _try_const(lambda: binary_op("%", left.value, right.value))
        return None

    root, n = _rewrite_bottom_up(root, rw)
    ctx.record("fold_mod_sign", n)
    return root


def simplify_mul_one(root: AstNode, ctx: _Ctx) -> AstNode:
    """Rewrites `e * 1` to `e` for provably numeric operands."""

    def rw(n: AstNode):
        if n.kind == "BinaryOp" and n.value == "*" \
                and _is_int_lit(n.children[1], 1) \
                and _provably_numeric(n.children[0]):
            return n.children[0]
        return None

    root, n = _rewrite_bottom_up(root, rw)
    ctx.record("simplify_mul_one", n)
    return root


def simplify_double_neg(root: AstNode, ctx: _Ctx) -> AstNode:
    """Rewrites `-(-e)` to `e` for provably numeric operands."""

    def rw(n: AstNode):
        if n.kind == "UnaryOp" and n.value == "-":
            inner = n.children[0]
            if inner.kind == "UnaryOp" and inner.value == "-" \
                    and _provably_numeric(inner.children[0]):
                return inner.children[0]
        return None

    root, n = _rewrite_bottom_up(root, rw)
    ctx.record("simplify_double_neg", n)
    return root


def fold_const_unary(root: AstNode, ctx: _Ctx) -> AstNode:
    """Folds unary operators over literals."""

    def rw(n: AstNode):
        if n.kind == "UnaryOp" and _is_lit(n.children[0]):
            return _try_const(lambda: unary_op(n.value, n.children[0].value))
        return None

    root, n = _rewrite_bottom_up(root, rw)
    ctx.record("fold_const_unary", n)
    return root


def fold_const_arith(root: AstNode, ctx: _Ctx) -> AstNode:
    """Folds arithmetic over literal operands; folds that would raise at
    runtime (integer division by zero) are left in place."""

    def rw(n: AstNode):
        if n.kind == "BinaryOp" and n.value in ("+", "-", "*", "/", "%") \
                and _is_lit(n.children[0]) and _is_lit(n.children[1]):
            return _try_const(
                lambda: binary_op(n.value, n.children[0].value, n.children[1].value))
        return None

    root, n = _rewrite_bottom_up(root, rw)
    ctx.record("fold_const_arith", n)
    return root


def fold_const_compare(root: AstNode, ctx: _Ctx) -> AstNode:
    """Folds comparisons over literal operands."""

    def rw(n: AstNode):
        if n.kind == "BinaryOp" and n.value in ("==", "!=", "<", "<=", ">", ">=") \
                and _is_lit(n.children[0]) and _is_lit(n.children[1]):
            return _try_const(
                lambda: binary_op(n.value, n.children[0].value, n.children[1].value))
        return None

    root, n = _rewrite_bottom_up(root, rw)
    ctx.record("fold_const_compare", n)
    return root


def fold_builtin_const(root: AstNode, ctx: _Ctx) -> AstNode:
    """Folds builtin calls whose arguments are all literals."""

    def rw(n: AstNode):
        if n.kind == "Call" and n.children[0].kind == "BuiltinRef" \
                and all(_is_lit(a) for a in n.children[1:]):
            name = n.children[0].value
            args = [a.value for a in n.children[1:]]
            return _try_const(lambda: call_builtin(name, args))
        return None

    root, n = _rewrite_bottom_up(root, rw)
    ctx.record("fold_builtin_const", n)
    return root


def eliminate_dead_branch(root: AstNode, ctx: _Ctx) -> AstNode:
    """Removes branches with literal conditions."""

    def rw(n: AstNode):
        if n.kind == "If" and n.children[0].kind == "BoolLit":
            if n.children[0].value:
                return n.children[1]
            if len(n.children) == 3:
                return n.children[2]
            return AstNode(0, "Block", None, ())
        if n.kind == "While" and n.children[0].kind == "BoolLit" \
                and not n.children[0].value:
            return AstNode(0, "Block", None, ())
        return None

    root, n = _rewrite_bottom_up(root, rw)
    ctx.record("eliminate_dead_branch", n)
    return root


_REWRITES = [
    fold_add_negzero,
    fold_eq_self,
    reduce_mul_two,
    specialize_minmax,
    fold_mod_sign,
    simplify_mul_one,
    simplify_double_neg,
    fold_const_unary,
    fold_const_arith,
    fold_const_compare,
    fold_builtin_const,
    eliminate_dead_branch,
]

ENTITY_NAMES: tuple[str, ...] = tuple(
    [name for name, _ in _LOWERING]
    + [name for name, _ in _ANALYSIS]
    + [fn.__name__ for fn in _REWRITES]
)


def optimize(root: AstNode, buggy_function: str | None = None):
    """Run the full pass pipeline; returns (rewritten tree, CoverageTrace)."""
    ctx = _Ctx(buggy_function)
    for name, pred in _LOWERING:
        root = _run_recording_pass(name, pred, root, ctx)
    for name, pred in _ANALYSIS:
        root = _run_recording_pass(name, pred, root, ctx)
    for fn in _REWRITES:
        root = fn(root, ctx)
    trace = CoverageTrace(frozenset(ctx.counts), dict(ctx.counts))
    return root, trace


# ---------------------------------------------------------------------------
# Bug registry and execution modes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BugId:
    id: str
    ground_truth_function: str
    seed_program: Program


# Each seed pairs the trigger function with an uncalled, operator-complete
# decoy.  The decoy keeps every operator entity, a folded negated constant,
# and a constant-arithmetic site inside every run's coverage, so mutation
# artifacts on the failing side cannot outscore the buggy function.

_NEGZERO_SEED = """\
function foo(x) {
  let y = x + -0;
  let z = Math.max(x, y);
  if (y == z && x <= y) {
    return y;
  }
  return z;
}
function spare(u) {
  let a = u * 7 + (255 - 9) / 5 % 3;
  let b = ~u + -6;
  let c = +a;
  if (a < b && b <= c || a > 0) {
    return b >= c == (a != 1);
  }
  return Math.floor(c);
}
foo(-0.0);
"""

_NAN_SEED = """\
function check(x, y) {
  let lhs = 0 - x;
  let same = lhs / y == lhs / y;
  if (same) {
    return 1;
  }
  return 2;
}
function spare(u) {
  let a = u / 7 - (255 + 9) * 5 % 4;
  let b = ~u + -3;
  let c = +b;
  if (a <= b && b < c || a >= 0) {
    return a > c == (b != 6);
  }
  return Math.ceil(a);
}
check(0.0, 0.0);
"""

_STRRED_SEED = """\
function dup(x) {
  let y = x * 2;
  if (y == 6) {
    return true;
  }
  return false;
}
function spare(u) {
  let a = u % 7 * 255 + (9 - 5) / 3;
  let b = ~u + -8;
  let c = +a;
  if (a > b || b >= c && a != 0) {
    return a < c == (b <= 4);
  }
  return Math.sqrt(c);
}
dup("3");
"""

_MINMAX_SEED = """\
function clamp(a, b) {
  let x = a - b;
  let y = Math.max(x, 0);
  if (y == 0) {
    return true;
  }
  return false;
}
function spare(u) {
  let p = u / 9 + (7 - 255) * 3 % 5;
  let q = ~u + -4;
  let r = +p;
  if (p != q && q < r || p >= 6) {
    return p > q == (r <= 1);
  }
  return Math.abs(r);
}
clamp(1, 6);
"""

_MODSIGN_SEED = """\
function parity(d) {
  let n = 0 - d;
  let r = n % 2;
  if (r == 0 - 1) {
    return true;
  }
  return false;
}
function spare(u) {
  let a = u * 9 + (255 + 7) / 5 % 6;
  let b = ~u + -5;
  let c = +b;
  if (a >= b || b > c && a <= 0) {
    return a < b == (c != 3);
  }
  return Math.sqrt(a);
}
parity(7);
"""

_REGISTRY = (
    BugId("negzero-fold", "fold_add_negzero",
          Program("negzero-fold-seed", _NEGZERO_SEED)),
    BugId("nan-compare-fold", "fold_eq_self",
          Program("nan-compare-fold-seed", _NAN_SEED)),
    BugId("float-strength-reduction", "reduce_mul_two",
          Program("float-strength-reduction-seed", _STRRED_SEED)),
    BugId("minmax-specialize", "specialize_minmax",
          Program("minmax-specialize-seed", _MINMAX_SEED)),
    BugId("modulo-sign-fold", "fold_mod_sign",
          Program("modulo-sign-fold-seed", _MODSIGN_SEED)),
)


def bug_registry() -> tuple[BugId, ...]:
    return _REGISTRY


def get_bug(bug_id: str) -> BugId:
    for bug in _REGISTRY:
        if bug.id == bug_id:
            return bug
    known = ", ".join(b.id for b in _REGISTRY)
    raise KeyError(f"unknown bug {bug_id!r} (known: {known})")


def run_reference(root: AstNode, budget: int = DEFAULT_BUDGET) -> Observable:
    return Interpreter(budget).run(root)


def run_optimized(root: AstNode, bug: BugId | None = None,
                  budget: int = DEFAULT_BUDGET):
    """Optimize then evaluate; returns (Observable, CoverageTrace)."""
    buggy_fn = bug.ground_truth_function if bug is not None else None
    rewritten, trace = optimize(root, buggy_fn)
    return Interpreter(budget).run(rewritten), trace


def trace_for_source(source: str, bug: BugId | None,
                     budget: int = DEFAULT_BUDGET) -> CoverageTrace:
    _, trace = run_optimized(parse(source), bug, budget)
    return trace
