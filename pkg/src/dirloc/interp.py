"""Big-step reference interpreter for the mini language.

Semantics (fixed here; the optimizer must preserve them):
  - numbers are ints (arbitrary precision) or IEEE doubles; mixed arithmetic
    promotes to float; int / and % truncate toward zero with the remainder
    taking the dividend's sign; int division or modulo by zero is a runtime
    error, float follows IEEE (inf/NaN)
  - `+` concatenates when either operand is a string, otherwise adds
  - `-` `*` `/` `%`, relational operators, and numeric unaries coerce
    numeric-looking strings to numbers and reject everything else
  - `==`/`!=` compare numerically across int/float (so -0.0 == 0 and
    NaN != NaN), exactly within strings/bools, and are false across types
  - `&&` `||` `!` use truthiness (false, 0, -0.0, NaN, "" are falsy) and
    always return a bool
  - a function that falls off its end returns int 0

Observables record the value of every top-level expression statement plus the
termination status; observable equality is bit-exact on floats (it
distinguishes -0.0 from 0.0) and exact on ints/strings/bools.
"""

from __future__ import annotations

import math
import re
import struct
from dataclasses import dataclass

from .minilang import AstNode, BUILTIN_ARITY

DEFAULT_BUDGET = 10 ** 6
_CALL_DEPTH_LIMIT = 100

_INT_RE = re.compile(r"[+-]?\d+\Z")
_FLOAT_RE = re.compile(r"[+-]?(\d+\.\d*|\.\d+|\d+)([eE][+-]?\d+)?\Z")


class MiniRuntimeError(Exception):
    """Runtime failure; `kind` is a stable machine-readable tag."""

    def __init__(self, kind: str, message: str = ""):
        super().__init__(message or kind)
        self.kind = kind


class BudgetExceeded(MiniRuntimeError):
    def __init__(self):
        super().__init__("step-budget", "step budget exceeded")


def value_bits(v):
    """Canonical comparison key: type tag plus exact content (float NaNs all
    compare equal; zero signs are distinguished)."""
    if isinstance(v, bool):
        return ("bool", v)
    if isinstance(v, int):
        return ("int", v)
    if isinstance(v, float):
        if math.isnan(v):
            return ("float", "nan")
        return ("float", struct.pack(">d", v))
    return ("str", v)


def value_to_json(v) -> dict:
    if isinstance(v, bool):
        return {"type": "bool", "value": v}
    if isinstance(v, int):
        return {"type": "int", "value": v}
    if isinstance(v, float):
        return {"type": "float", "repr": repr(v)}
    return {"type": "string", "value": v}


@dataclass(frozen=True, eq=False)
class Observable:
    """Per-run observable behavior: one value per top-level expression
    statement, plus how the run ended."""

    values: tuple = ()
    termination: tuple = ("normal", None)  # or ("error", kind)

    def __eq__(self, other):
        if not isinstance(other, Observable):
            return NotImplemented
        return (self.termination == other.termination
                and len(self.values) == len(other.values)
                and all(value_bits(a) == value_bits(b)
                        for a, b in zip(self.values, other.values)))

    def __hash__(self):
        return hash((tuple(value_bits(v) for v in self.values), self.termination))

    @property
    def errored(self) -> bool:
        return self.termination[0] == "error"

    def to_json(self) -> dict:
        term = {"kind": self.termination[0]}
        if self.termination[1] is not None:
            term["error"] = self.termination[1]
        return {"values": [value_to_json(v) for v in self.values],
                "termination": term}


def is_number(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def to_number(v):
    if isinstance(v, bool):
        raise MiniRuntimeError("type-error", "bool used as number")
    if isinstance(v, (int, float)):
        return v
    if isinstance(v, str):
        s = v.strip()
        if _INT_RE.fullmatch(s):
            return int(s)
        if s and _FLOAT_RE.fullmatch(s):
            return float(s)
        raise MiniRuntimeError("type-error", f"cannot convert {v!r} to number")
    raise MiniRuntimeError("type-error", "not a number")


def to_string(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return repr(v)
    return v


def truthy(v) -> bool:
    if isinstance(v, bool):
        return v
    if isinstance(v, int):
        return v != 0
    if isinstance(v, float):
        return v != 0.0 and not math.isnan(v)
    return v != ""


def _int_div(a: int, b: int) -> int:
    if b == 0:
        raise MiniRuntimeError("zero-division", "integer division by zero")
    q = abs(a) // abs(b)
    return -q if (a < 0) != (b < 0) else q


def _int_mod(a: int, b: int) -> int:
    if b == 0:
        raise MiniRuntimeError("zero-division", "integer modulo by zero")
    r = abs(a) % abs(b)
    return -r if a < 0 else r


def _float_div(a: float, b: float) -> float:
    if b == 0.0:
        if a == 0.0 or math.isnan(a):
            return float("nan")
        return math.copysign(float("inf"), a) * math.copysign(1.0, b)
    return a / b


def _float_mod(a: float, b: float) -> float:
    if b == 0.0 or math.isnan(a) or math.isnan(b) or math.isinf(a):
        return float("nan")
    if math.isinf(b):
        return a
    try:
        return math.fmod(a, b)
    except ValueError:
        return float("nan")


def arith_binop(op: str, a, b):
    """`- * / %` and numeric `+`; both operands already numbers."""
    if isinstance(a, int) and isinstance(b, int):
        if op == "+":
            return a + b
        if op == "-":
            return a - b
        if op == "*":
            return a * b
        if op == "/":
            return _int_div(a, b)
        if op == "%":
            return _int_mod(a, b)
    fa, fb = float(a), float(b)
    if op == "+":
        return fa + fb
    if op == "-":
        return fa - fb
    if op == "*":
        return fa * fb
    if op == "/":
        return _float_div(fa, fb)
    if op == "%":
        return _float_mod(fa, fb)
    raise ValueError(op)


def equals(a, b) -> bool:
    if is_number(a) and is_number(b):
        return a == b  # numeric: NaN != NaN, -0.0 == 0
    if isinstance(a, bool) and isinstance(b, bool):
        return a == b
    if isinstance(a, str) and isinstance(b, str):
        return a == b
    return False


def binary_op(op: str, a, b):
    if op == "+":
        if isinstance(a, str) or isinstance(b, str):
            return to_string(a) + to_string(b)
        return arith_binop("+", to_number(a), to_number(b))
    if op in ("-", "*", "/", "%"):
        return arith_binop(op, to_number(a), to_number(b))
    if op == "==":
        return equals(a, b)
    if op == "!=":
        return not equals(a, b)
    if op in ("<", "<=", ">", ">="):
        na, nb = to_number(a), to_number(b)
        if op == "<":
            return na < nb
        if op == "<=":
            return na <= nb
        if op == ">":
            return na > nb
        return na >= nb
    raise ValueError(f"unknown binary operator {op}")


def unary_op(op: str, v):
    if op == "!":
        return not truthy(v)
    n = to_number(v)
    if op == "-":
        return -n
    if op == "+":
        return n
    if op == "~":
        if isinstance(n, float) and (math.isnan(n) or math.isinf(n)):
            n = 0.0  # JS-style ToInt32 of non-finite values
        return ~int(n)  # truncate floats toward zero first
    raise ValueError(f"unknown unary operator {op}")


def _zero_sign_positive(v) -> bool:
    if isinstance(v, float):
        return math.copysign(1.0, v) > 0
    return True


def call_builtin(name: str, args: list):
    if name in ("Math.max", "Math.min"):
        a, b = to_number(args[0]), to_number(args[1])
        if (isinstance(a, float) and math.isnan(a)) or \
                (isinstance(b, float) and math.isnan(b)):
            return float("nan")
        if a == b:  # zero-sign tie: max prefers +0, min prefers -0
            if name == "Math.max":
                return a if _zero_sign_positive(a) else b
            return a if not _zero_sign_positive(a) else b
        if name == "Math.max":
            return a if a > b else b
        return a if a < b else b
    if name == "Math.pow":
        a, b = float(to_number(args[0])), float(to_number(args[1]))
        try:
            return math.pow(a, b)
        except OverflowError:
            return math.copysign(float("inf"), 1.0)
        except ValueError:
            return float("nan")
    if name == "Math.abs":
        n = to_number(args[0])
        return abs(n)
    if name == "Math.sqrt":
        n = float(to_number(args[0]))
        if math.isnan(n) or n < 0:
            return float("nan")
        return math.sqrt(n)
    if name in ("Math.floor", "Math.ceil"):
        n = to_number(args[0])
        if isinstance(n, int):
            return n
        if math.isnan(n) or math.isinf(n):
            return n
        r = math.floor(n) if name == "Math.floor" else math.ceil(n)
        out = float(r)
        if out == 0.0 and math.copysign(1.0, n) < 0:
            return -0.0
        return out
    if name == "Str.concat":
        return to_string(args[0]) + to_string(args[1])
    if name == "Str.substring":
        s = to_string(args[0])
        start = int(to_number(args[1]))
        start = max(0, min(len(s), start))
        return s[start:]
    if name == "Str.length":
        return len(to_string(args[0]))
    raise MiniRuntimeError("unknown-builtin", name)


class _Return(Exception):
    def __init__(self, value):
        self.value = value


class Interpreter:
    """Evaluates a parsed program; counts one step per node visited."""

    def __init__(self, budget: int = DEFAULT_BUDGET):
        self.budget = budget
        self.steps = 0
        self.functions: dict[str, AstNode] = {}
        self.globals: dict[str, object] = {}
        self.depth = 0

    def _tick(self):
        self.steps += 1
        if self.steps > self.budget:
            raise BudgetExceeded()

    def run(self, root: AstNode) -> Observable:
        values = []
        try:
            for stmt in root.children:
                v = self._exec(stmt, self.globals)
                if v is not None:
                    values.append(v)
            return Observable(tuple(values), ("normal", None))
        except MiniRuntimeError as e:
            return Observable(tuple(values), ("error", e.kind))

    def _exec(self, stmt: AstNode, env: dict):
        """Execute one statement; returns the value for top-level expression
        statements (env is globals) and None otherwise."""
        self._tick()
        kind = stmt.kind
        if kind == "Function":
            self.functions[stmt.value] = stmt
            return None
        if kind == "Let":
            env[stmt.value] = self._eval(stmt.children[0], env)
            return None
        if kind == "Assign":
            name = stmt.value
            target = env if name in env else (
                self.globals if name in self.globals else None)
            if target is None:
                raise MiniRuntimeError("undefined-variable", name)
            target[name] = self._eval(stmt.children[0], env)
            return None
        if kind == "If":
            cond = self._eval(stmt.children[0], env)
            if truthy(cond):
                self._exec_block(stmt.children[1], env)
            elif len(stmt.children) == 3:
                self._exec_block(stmt.children[2], env)
            return None
        if kind == "While":
            while truthy(self._eval(stmt.children[0], env)):
                self._exec_block(stmt.children[1], env)
            return None
        if kind == "Return":
            if self.depth == 0:
                raise MiniRuntimeError("return-at-top-level")
            value = self._eval(stmt.children[0], env) if stmt.children else 0
            raise _Return(value)
        if kind == "Block":
            self._exec_block(stmt, env)
            return None
        value = self._eval(stmt, env)
        return value if env is self.globals else None

    def _exec_block(self, block: AstNode, env: dict):
        for stmt in block.children:
            self._exec(stmt, env)

    def _eval(self, expr: AstNode, env: dict):
        self._tick()
        kind = expr.kind
        if kind == "NumberLit" or kind == "StringLit" or kind == "BoolLit":
            return expr.value
        if kind == "Identifier":
            if expr.value in env:
                return env[expr.value]
            if expr.value in self.globals:
                return self.globals[expr.value]
            raise MiniRuntimeError("undefined-variable", expr.value)
        if kind == "BinaryOp":
            op = expr.value
            if op == "&&":
                left = self._eval(expr.children[0], env)
                if not truthy(left):
                    return False
                return truthy(self._eval(expr.children[1], env))
            if op == "||":
                left = self._eval(expr.children[0], env)
                if truthy(left):
                    return True
                return truthy(self._eval(expr.children[1], env))
            a = self._eval(expr.children[0], env)
            b = self._eval(expr.children[1], env)
            return binary_op(op, a, b)
        if kind == "UnaryOp":
            return unary_op(expr.value, self._eval(expr.children[0], env))
        if kind == "Call":
            callee = expr.children[0]
            args = [self._eval(a, env) for a in expr.children[1:]]
            if callee.kind == "BuiltinRef":
                want = BUILTIN_ARITY[callee.value]
                if len(args) != want:
                    raise MiniRuntimeError("arity-mismatch", callee.value)
                return call_builtin(callee.value, args)
            return self._call_function(callee.value, args)
        raise MiniRuntimeError("type-error", f"cannot evaluate {kind}")

    def _call_function(self, name: str, args: list):
        fn = self.functions.get(name)
        if fn is None:
            raise MiniRuntimeError("unknown-function", name)
        params = fn.children[:-1]
        if len(args) != len(params):
            raise MiniRuntimeError("arity-mismatch", name)
        if self.depth >= _CALL_DEPTH_LIMIT:
            raise MiniRuntimeError("recursion-limit", name)
        env = {p.value: a for p, a in zip(params, args)}
        self.depth += 1
        try:
            self._exec_block(fn.children[-1], env)
            return 0
        except _Return as r:
            return r.value
        finally:
            self.depth -= 1


def run_reference(root: AstNode, budget: int = DEFAULT_BUDGET) -> Observable:
    """Evaluate without any optimizer pass; errors surface in the
    observable's termination."""
    return Interpreter(budget).run(root)
