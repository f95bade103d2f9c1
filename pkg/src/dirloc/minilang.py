"""A small JavaScript-like mini language: AST, parser, and pretty-printer.

The language is deliberately closed (no objects, arrays, or closures) so the
whole generation/localization pipeline can run hermetically.  Statements:
function declarations, `let`, assignment, `if`/`else`, `while`, `return`, and
expression statements.  Expressions: binary operators
(+ - * / % == != < <= > >= && ||), unary operators (+ - ~ !), calls to
builtins (Math.max, Math.min, Math.pow, Math.abs, Math.sqrt, Math.floor,
Math.ceil, Str.concat, Str.substring, Str.length) or to declared functions,
and literals (int, float, string, bool).

Trees are immutable.  Node ids are assigned by pre-order traversal, 1-based;
`-0` parses as UnaryOp(-) over NumberLit(0), never as a negative literal.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from typing import Iterator, Optional

NODE_KINDS = frozenset({
    "Function", "Param", "Block", "Let", "Assign", "If", "While", "Return",
    "BinaryOp", "UnaryOp", "Call", "BuiltinRef", "Identifier",
    "NumberLit", "StringLit", "BoolLit",
})

BINARY_OPS = ("+", "-", "*", "/", "%", "==", "!=", "<", "<=", ">", ">=", "&&", "||")
UNARY_OPS = ("+", "-", "~", "!")

BUILTIN_NAMESPACES = {
    "Math": ("max", "min", "pow", "abs", "sqrt", "floor", "ceil"),
    "Str": ("concat", "substring", "length"),
}

BUILTIN_ARITY = {
    "Math.max": 2, "Math.min": 2, "Math.pow": 2,
    "Math.abs": 1, "Math.sqrt": 1, "Math.floor": 1, "Math.ceil": 1,
    "Str.concat": 2, "Str.substring": 2, "Str.length": 1,
}

KEYWORDS = frozenset({"function", "let", "if", "else", "while", "return", "true", "false"})


class MiniSyntaxError(Exception):
    """Parse failure with source position."""

    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{message} (line {line}, col {col})")
        self.message = message
        self.line = line
        self.col = col


@dataclass(frozen=True)
class AstNode:
    """One numbered syntax-tree node.

    `value` holds the payload: operator string for BinaryOp/UnaryOp, dotted
    builtin name for BuiltinRef, identifier for Function/Param/Let/Assign/
    Identifier, and the literal itself for NumberLit/StringLit/BoolLit.
    """

    id: int
    kind: str
    value: object
    children: tuple["AstNode", ...] = ()

    def __repr__(self):  # compact, for test failure output
        v = "" if self.value is None else f" {self.value!r}"
        return f"<{self.id}:{self.kind}{v} [{len(self.children)}]>"


def node(kind: str, value: object = None, children: tuple = ()) -> AstNode:
    return AstNode(0, kind, value, tuple(children))


def walk(root: AstNode) -> Iterator[AstNode]:
    """Pre-order traversal."""
    stack = [root]
    while stack:
        n = stack.pop()
        yield n
        stack.extend(reversed(n.children))


def size(root: AstNode) -> int:
    return sum(1 for _ in walk(root))


def renumber(root: AstNode) -> AstNode:
    """Return a copy whose ids are the pre-order sequence 1..size."""
    counter = [0]

    def rec(n: AstNode) -> AstNode:
        counter[0] += 1
        nid = counter[0]
        return AstNode(nid, n.kind, n.value, tuple(rec(c) for c in n.children))

    return rec(root)


def get_node(root: AstNode, node_id: int) -> AstNode:
    for n in walk(root):
        if n.id == node_id:
            return n
    raise IndexError(f"no node with id {node_id} (tree size {size(root)})")


def payload_key(value: object):
    """Canonical, hashable payload identity.

    Floats compare by bit pattern so that -0.0 and 0.0 are distinct; bool is
    checked before int because bool subclasses int in Python.
    """
    if value is None:
        return None
    if isinstance(value, bool):
        return ("b", value)
    if isinstance(value, int):
        return ("i", value)
    if isinstance(value, float):
        return ("f", struct.pack(">d", value))
    return ("s", value)


def node_label(n: AstNode) -> tuple:
    return (n.kind, payload_key(n.value))


def structural_key(root: AstNode) -> tuple:
    """Identity of a tree ignoring ids; used for dedup and equality."""
    return (root.kind, payload_key(root.value),
            tuple(structural_key(c) for c in root.children))


def trees_equal(a: AstNode, b: AstNode) -> bool:
    return structural_key(a) == structural_key(b)


def to_json_dict(root: AstNode) -> dict:
    """AST dump as {id, kind, value, children[]} with stable field order."""
    return {
        "id": root.id,
        "kind": root.kind,
        "value": root.value,
        "children": [to_json_dict(c) for c in root.children],
    }


def dump_json(root: AstNode) -> str:
    return json.dumps(to_json_dict(root), indent=2)


# ---------------------------------------------------------------------------
# Lexer
# ---------------------------------------------------------------------------

_TWO_CHAR = ("==", "!=", "<=", ">=", "&&", "||")
_ONE_CHAR = "+-*/%<>!~=(){},;."


@dataclass(frozen=True)
class _Token:
    type: str  # ident, keyword, int, float, string, op, eof
    text: str
    value: object
    line: int
    col: int


def _lex(source: str) -> list[_Token]:
    tokens = []
    i, line, col = 0, 1, 1
    n = len(source)
    while i < n:
        ch = source[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if source.startswith("//", i):
            while i < n and source[i] != "\n":
                i += 1
            continue
        start_line, start_col = line, col
        if ch.isdigit():
            j = i
            while j < n and source[j].isdigit():
                j += 1
            is_float = False
            if j < n and source[j] == "." and j + 1 < n and source[j + 1].isdigit():
                is_float = True
                j += 1
                while j < n and source[j].isdigit():
                    j += 1
            if j < n and source[j] in "eE":
                k = j + 1
                if k < n and source[k] in "+-":
                    k += 1
                if k < n and source[k].isdigit():
                    is_float = True
                    j = k
                    while j < n and source[j].isdigit():
                        j += 1
            text = source[i:j]
            value = float(text) if is_float else int(text)
            tokens.append(_Token("float" if is_float else "int", text, value,
                                 start_line, start_col))
            col += j - i
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (source[j].isalnum() or source[j] == "_"):
                j += 1
            text = source[i:j]
            ttype = "keyword" if text in KEYWORDS else "ident"
            tokens.append(_Token(ttype, text, text, start_line, start_col))
            col += j - i
            i = j
            continue
        if ch == '"':
            j = i + 1
            chars = []
            while j < n and source[j] != '"':
                c = source[j]
                if c == "\n":
                    raise MiniSyntaxError("unterminated string", start_line, start_col)
                if c == "\\":
                    j += 1
                    if j >= n:
                        raise MiniSyntaxError("unterminated string", start_line, start_col)
                    esc = source[j]
                    mapped = {"n": "\n", "t": "\t", '"': '"', "\\": "\\"}.get(esc)
                    if mapped is None:
                        raise MiniSyntaxError(f"bad escape \\{esc}", start_line, start_col)
                    chars.append(mapped)
                else:
                    chars.append(c)
                j += 1
            if j >= n:
                raise MiniSyntaxError("unterminated string", start_line, start_col)
            text = source[i:j + 1]
            tokens.append(_Token("string", text, "".join(chars), start_line, start_col))
            col += j + 1 - i
            i = j + 1
            continue
        two = source[i:i + 2]
        if two in _TWO_CHAR:
            tokens.append(_Token("op", two, two, start_line, start_col))
            i += 2
            col += 2
            continue
        if ch in _ONE_CHAR:
            tokens.append(_Token("op", ch, ch, start_line, start_col))
            i += 1
            col += 1
            continue
        raise MiniSyntaxError(f"unexpected character {ch!r}", line, col)
    tokens.append(_Token("eof", "", None, line, col))
    return tokens


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

# binding strength, loosest first; parser climbs these levels
_BINARY_LEVELS = [
    ("||",),
    ("&&",),
    ("==", "!="),
    ("<", "<=", ">", ">="),
    ("+", "-"),
    ("*", "/", "%"),
]


class _Parser:
    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def error(self, message: str):
        tok = self.peek()
        raise MiniSyntaxError(message, tok.line, tok.col)

    def expect(self, ttype: str, text: Optional[str] = None) -> _Token:
        tok = self.peek()
        if tok.type != ttype or (text is not None and tok.text != text):
            want = text if text is not None else ttype
            self.error(f"expected {want!r}, found {tok.text or tok.type!r}")
        return self.advance()

    def at(self, ttype: str, text: Optional[str] = None) -> bool:
        tok = self.peek()
        return tok.type == ttype and (text is None or tok.text == text)

    def parse_program(self) -> AstNode:
        stmts = []
        while not self.at("eof"):
            stmts.append(self.parse_statement(top_level=True))
        return node("Block", None, tuple(stmts))

    def parse_statement(self, top_level: bool = False) -> AstNode:
        if self.at("keyword", "function"):
            if not top_level:
                self.error("nested function declarations are not supported")
            return self.parse_function()
        if self.at("keyword", "let"):
            self.advance()
            name = self.expect("ident").text
            self.expect("op", "=")
            expr = self.parse_expression()
            self.expect("op", ";")
            return node("Let", name, (expr,))
        if self.at("keyword", "if"):
            return self.parse_if()
        if self.at("keyword", "while"):
            self.advance()
            self.expect("op", "(")
            cond = self.parse_expression()
            self.expect("op", ")")
            body = self.parse_body()
            return node("While", None, (cond, body))
        if self.at("keyword", "return"):
            self.advance()
            if self.at("op", ";"):
                self.advance()
                return node("Return", None, ())
            expr = self.parse_expression()
            self.expect("op", ";")
            return node("Return", None, (expr,))
        if self.at("ident") and self.tokens[self.pos + 1].text == "=" \
                and self.tokens[self.pos + 1].type == "op":
            name = self.advance().text
            self.advance()  # '='
            expr = self.parse_expression()
            self.expect("op", ";")
            return node("Assign", name, (expr,))
        expr = self.parse_expression()
        self.expect("op", ";")
        return expr

    def parse_function(self) -> AstNode:
        self.expect("keyword", "function")
        name = self.expect("ident").text
        self.expect("op", "(")
        params = []
        if not self.at("op", ")"):
            while True:
                params.append(node("Param", self.expect("ident").text))
                if self.at("op", ","):
                    self.advance()
                    continue
                break
        self.expect("op", ")")
        body = self.parse_block()
        return node("Function", name, tuple(params) + (body,))

    def parse_if(self) -> AstNode:
        self.expect("keyword", "if")
        self.expect("op", "(")
        cond = self.parse_expression()
        self.expect("op", ")")
        then = self.parse_body()
        if self.at("keyword", "else"):
            self.advance()
            if self.at("keyword", "if"):
                otherwise = node("Block", None, (self.parse_if(),))
            else:
                otherwise = self.parse_body()
            return node("If", None, (cond, then, otherwise))
        return node("If", None, (cond, then))

    def parse_body(self) -> AstNode:
        """Brace block, or a single statement wrapped in a Block."""
        if self.at("op", "{"):
            return self.parse_block()
        return node("Block", None, (self.parse_statement(),))

    def parse_block(self) -> AstNode:
        self.expect("op", "{")
        stmts = []
        while not self.at("op", "}"):
            if self.at("eof"):
                self.error("unterminated block")
            stmts.append(self.parse_statement())
        self.expect("op", "}")
        return node("Block", None, tuple(stmts))

    def parse_expression(self) -> AstNode:
        return self.parse_binary(0)

    def parse_binary(self, level: int) -> AstNode:
        if level >= len(_BINARY_LEVELS):
            return self.parse_unary()
        lhs = self.parse_binary(level + 1)
        ops = _BINARY_LEVELS[level]
        while self.at("op") and self.peek().text in ops:
            op = self.advance().text
            rhs = self.parse_binary(level + 1)
            lhs = node("BinaryOp", op, (lhs, rhs))
        return lhs

    def parse_unary(self) -> AstNode:
        if self.at("op") and self.peek().text in UNARY_OPS:
            op = self.advance().text
            operand = self.parse_unary()
            return node("UnaryOp", op, (operand,))
        return self.parse_primary()

    def parse_primary(self) -> AstNode:
        tok = self.peek()
        if tok.type == "int" or tok.type == "float":
            self.advance()
            return node("NumberLit", tok.value)
        if tok.type == "string":
            self.advance()
            return node("StringLit", tok.value)
        if tok.type == "keyword" and tok.text in ("true", "false"):
            self.advance()
            return node("BoolLit", tok.text == "true")
        if tok.type == "op" and tok.text == "(":
            self.advance()
            expr = self.parse_expression()
            self.expect("op", ")")
            return expr
        if tok.type == "ident":
            name = self.advance().text
            if self.at("op", "."):
                if name not in BUILTIN_NAMESPACES:
                    self.error(f"unknown namespace {name!r}")
                self.advance()
                member = self.expect("ident").text
                if member not in BUILTIN_NAMESPACES[name]:
                    self.error(f"unknown builtin {name}.{member}")
                callee = node("BuiltinRef", f"{name}.{member}")
                return self.parse_call(callee)
            if self.at("op", "("):
                return self.parse_call(node("Identifier", name))
            return node("Identifier", name)
        self.error(f"unexpected token {tok.text or tok.type!r}")

    def parse_call(self, callee: AstNode) -> AstNode:
        self.expect("op", "(")
        args = []
        if not self.at("op", ")"):
            while True:
                args.append(self.parse_expression())
                if self.at("op", ","):
                    self.advance()
                    continue
                break
        self.expect("op", ")")
        return node("Call", None, (callee,) + tuple(args))


def parse(source: str) -> AstNode:
    """Parse source text into a pre-order-numbered AST rooted at a Block."""
    return renumber(_Parser(_lex(source)).parse_program())


# ---------------------------------------------------------------------------
# Printer
# ---------------------------------------------------------------------------

_PRECEDENCE = {}
for _lvl, _ops in enumerate(_BINARY_LEVELS, start=1):
    for _op in _ops:
        _PRECEDENCE[_op] = _lvl
_UNARY_PRECEDENCE = len(_BINARY_LEVELS) + 1


def _escape(s: str) -> str:
    out = []
    for c in s:
        if c == "\\":
            out.append("\\\\")
        elif c == '"':
            out.append('\\"')
        elif c == "\n":
            out.append("\\n")
        elif c == "\t":
            out.append("\\t")
        else:
            out.append(c)
    return "".join(out)


def _print_number(v) -> str:
    if isinstance(v, int):
        return str(v)
    return repr(v)


def _print_expr(n: AstNode, parent_prec: int = 0) -> str:
    if n.kind == "NumberLit":
        return _print_number(n.value)
    if n.kind == "StringLit":
        return f'"{_escape(n.value)}"'
    if n.kind == "BoolLit":
        return "true" if n.value else "false"
    if n.kind == "Identifier":
        return n.value
    if n.kind == "BuiltinRef":
        return n.value
    if n.kind == "Call":
        callee = _print_expr(n.children[0])
        args = ", ".join(_print_expr(a) for a in n.children[1:])
        return f"{callee}({args})"
    if n.kind == "UnaryOp":
        operand = n.children[0]
        inner = _print_expr(operand, _UNARY_PRECEDENCE)
        # keep -(-x) and -(-1) unambiguous for the lexer
        if operand.kind == "UnaryOp" or inner.startswith(("-", "+")):
            inner = f"({inner})"
        text = f"{n.value}{inner}"
        return f"({text})" if parent_prec > _UNARY_PRECEDENCE else text
    if n.kind == "BinaryOp":
        prec = _PRECEDENCE[n.value]
        left = _print_expr(n.children[0], prec)
        right = _print_expr(n.children[1], prec + 1)
        text = f"{left} {n.value} {right}"
        return f"({text})" if parent_prec > prec else text
    raise ValueError(f"not an expression node: {n.kind}")


def _print_stmt(n: AstNode, indent: int, out: list):
    pad = "  " * indent
    if n.kind == "Function":
        params = ", ".join(p.value for p in n.children[:-1])
        out.append(f"{pad}function {n.value}({params}) {{")
        _print_block_body(n.children[-1], indent + 1, out)
        out.append(f"{pad}}}")
    elif n.kind == "Let":
        out.append(f"{pad}let {n.value} = {_print_expr(n.children[0])};")
    elif n.kind == "Assign":
        out.append(f"{pad}{n.value} = {_print_expr(n.children[0])};")
    elif n.kind == "If":
        out.append(f"{pad}if ({_print_expr(n.children[0])}) {{")
        _print_block_body(n.children[1], indent + 1, out)
        if len(n.children) == 3:
            out.append(f"{pad}}} else {{")
            _print_block_body(n.children[2], indent + 1, out)
        out.append(f"{pad}}}")
    elif n.kind == "While":
        out.append(f"{pad}while ({_print_expr(n.children[0])}) {{")
        _print_block_body(n.children[1], indent + 1, out)
        out.append(f"{pad}}}")
    elif n.kind == "Return":
        if n.children:
            out.append(f"{pad}return {_print_expr(n.children[0])};")
        else:
            out.append(f"{pad}return;")
    elif n.kind == "Block":
        out.append(f"{pad}{{")
        _print_block_body(n, indent + 1, out)
        out.append(f"{pad}}}")
    else:
        out.append(f"{pad}{_print_expr(n)};")


def _print_block_body(block: AstNode, indent: int, out: list):
    for stmt in block.children:
        _print_stmt(stmt, indent, out)


def print_program(root: AstNode) -> str:
    """Render a tree back to source; parse(print_program(t)) round-trips
    structurally for any parser-produced tree."""
    if root.kind != "Block":
        return _print_expr(root)
    out: list = []
    _print_block_body(root, 0, out)
    return "\n".join(out) + ("\n" if out else "")


@dataclass(frozen=True)
class Program:
    """A named source text; the unit the oracle classifies."""

    name: str
    source: str
