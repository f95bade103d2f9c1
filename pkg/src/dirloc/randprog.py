"""Grammar-directed random program generation for differential fuzzing and
round-trip property tests.

Programs are built to terminate: while loops only appear in a bounded
counter shape, and every generated function ends with a return.  Division
and coercion can still error at runtime, so callers that need clean programs
filter on a reference run.
"""

from __future__ import annotations

import random

from .interp import DEFAULT_BUDGET
from .jitfix import run_reference
from .minilang import AstNode, node, parse, print_program, renumber

_INT_LITS = (0, 1, 2, 3, 5, 7, 255)
_FLOAT_LITS = (0.0, 1.0, 0.5, 2.5)
_STRING_LITS = ("a", "b", "42", "3")
_ARITH = ("+", "-", "*", "/", "%")
_COMPARE = ("==", "!=", "<", "<=", ">", ">=")
_LOGICAL = ("&&", "||")
_MATH_1 = ("Math.abs", "Math.sqrt", "Math.floor", "Math.ceil")
_MATH_2 = ("Math.max", "Math.min", "Math.pow")


def _literal(rng: random.Random) -> AstNode:
    roll = rng.random()
    if roll < 0.55:
        return node("NumberLit", rng.choice(_INT_LITS))
    if roll < 0.8:
        return node("NumberLit", rng.choice(_FLOAT_LITS))
    if roll < 0.9:
        return node("StringLit", rng.choice(_STRING_LITS))
    return node("BoolLit", rng.choice((True, False)))


def _numeric_expr(rng: random.Random, vars_: list[str], depth: int) -> AstNode:
    if depth <= 0 or rng.random() < 0.35:
        if vars_ and rng.random() < 0.5:
            return node("Identifier", rng.choice(vars_))
        if rng.random() < 0.75:
            return node("NumberLit", rng.choice(_INT_LITS))
        return node("NumberLit", rng.choice(_FLOAT_LITS))
    roll = rng.random()
    if roll < 0.5:
        return node("BinaryOp", rng.choice(_ARITH),
                    (_numeric_expr(rng, vars_, depth - 1),
                     _numeric_expr(rng, vars_, depth - 1)))
    if roll < 0.65:
        return node("UnaryOp", rng.choice(("-", "+", "~")),
                    (_numeric_expr(rng, vars_, depth - 1),))
    if roll < 0.85:
        return node("Call", None,
                    (node("BuiltinRef", rng.choice(_MATH_1)),
                     _numeric_expr(rng, vars_, depth - 1)))
    return node("Call", None,
                (node("BuiltinRef", rng.choice(_MATH_2)),
                 _numeric_expr(rng, vars_, depth - 1),
                 _numeric_expr(rng, vars_, depth - 1)))


def _bool_expr(rng: random.Random, vars_: list[str], depth: int) -> AstNode:
    left = _numeric_expr(rng, vars_, depth - 1)
    right = _numeric_expr(rng, vars_, depth - 1)
    cmp = node("BinaryOp", rng.choice(_COMPARE), (left, right))
    if depth > 1 and rng.random() < 0.4:
        other = _bool_expr(rng, vars_, depth - 1)
        return node("BinaryOp", rng.choice(_LOGICAL), (cmp, other))
    if rng.random() < 0.15:
        return node("UnaryOp", "!", (cmp,))
    return cmp


def _string_expr(rng: random.Random, vars_: list[str]) -> AstNode:
    a = node("StringLit", rng.choice(_STRING_LITS))
    if rng.random() < 0.5:
        b = node("StringLit", rng.choice(_STRING_LITS))
        name = rng.choice(("Str.concat", "Str.substring"))
        arg2 = b if name == "Str.concat" else node("NumberLit", rng.choice((0, 1, 2)))
        return node("Call", None, (node("BuiltinRef", name), a, arg2))
    return node("Call", None, (node("BuiltinRef", "Str.length"), a))


def _statements(rng: random.Random, vars_: list[str], count: int,
                fresh_prefix: str) -> list[AstNode]:
    out = []
    for k in range(count):
        roll = rng.random()
        if roll < 0.45 or not vars_:
            name = f"{fresh_prefix}{k}"
            kind = rng.random()
            if kind < 0.7:
                out.append(node("Let", name, (_numeric_expr(rng, vars_, 3),)))
            elif kind < 0.85:
                out.append(node("Let", name, (_bool_expr(rng, vars_, 2),)))
            else:
                out.append(node("Let", name, (_string_expr(rng, vars_),)))
            vars_.append(name)
        elif roll < 0.6:
            out.append(node("Assign", rng.choice(vars_),
                            (_numeric_expr(rng, vars_, 2),)))
        elif roll < 0.8:
            then = node("Block", None,
                        (node("Assign", rng.choice(vars_),
                              (_numeric_expr(rng, vars_, 2),)),))
            if rng.random() < 0.5:
                other = node("Block", None,
                             (node("Assign", rng.choice(vars_),
                                   (_numeric_expr(rng, vars_, 2),)),))
                out.append(node("If", None, (_bool_expr(rng, vars_, 2), then, other)))
            else:
                out.append(node("If", None, (_bool_expr(rng, vars_, 2), then)))
        else:
            # bounded counter loop so generated programs terminate
            counter = f"{fresh_prefix}i{k}"
            bound = rng.choice((1, 2, 3))
            body = node("Block", None, (
                node("Assign", rng.choice(vars_), (_numeric_expr(rng, vars_, 2),)),
                node("Assign", counter,
                     (node("BinaryOp", "+",
                           (node("Identifier", counter), node("NumberLit", 1))),)),
            ))
            out.append(node("Let", counter, (node("NumberLit", 0),)))
            out.append(node("While", None, (
                node("BinaryOp", "<",
                     (node("Identifier", counter), node("NumberLit", bound))),
                body)))
    return out


def random_tree(rng: random.Random) -> AstNode:
    """A random valid program tree (pre-order numbered)."""
    params = [f"p{i}" for i in range(rng.choice((1, 1, 2)))]
    vars_ = list(params)
    body_stmts = _statements(rng, vars_, rng.randint(1, 4), "v")
    ret = node("Return", None, (_numeric_expr(rng, vars_, 3),))
    fn = node("Function", "main",
              tuple(node("Param", p) for p in params)
              + (node("Block", None, tuple(body_stmts) + (ret,)),))
    args = tuple(_literal(rng) for _ in params)
    call = node("Call", None, (node("Identifier", "main"),) + args)
    top = [fn, call]
    if rng.random() < 0.3:
        top.append(node("Call", None, (node("Identifier", "main"),)
                        + tuple(_literal(rng) for _ in params)))
    return renumber(node("Block", None, tuple(top)))


def random_source(rng: random.Random) -> str:
    return print_program(random_tree(rng))


def random_valid_programs(count: int, seed: int,
                          budget: int = DEFAULT_BUDGET) -> list[str]:
    """Sources whose reference run terminates normally within the budget."""
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        source = random_source(rng)
        if not run_reference(parse(source), budget).errored:
            out.append(source)
    return out
