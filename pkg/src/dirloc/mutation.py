"""Replacement-only, category-preserving mutation of mini-language trees.

Every mutable payload belongs to exactly one rule group whose members are
mutually substitutable (same node kind, same arity, same syntactic slot).
Mutation never adds or removes nodes and never picks the payload already in
place.  Identifiers, declarations, and structural nodes are immutable.
"""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass

from .minilang import AstNode, get_node, payload_key, size, walk

INT_MIN32 = -(2 ** 31)
INT_MAX32 = 2 ** 31 - 1


@dataclass(frozen=True)
class RuleGroup:
    """A set of interchangeable payloads for one syntactic slot."""

    name: str
    members: tuple


OPERATOR_GROUPS = (
    RuleGroup("arith-binary", ("+", "-", "*", "/", "%")),
    RuleGroup("compare-binary", ("==", "!=", "<", "<=", ">", ">=")),
    RuleGroup("logical-binary", ("&&", "||")),
    RuleGroup("numeric-unary", ("+", "-", "~")),
    RuleGroup("logical-unary", ("!",)),
)

BUILTIN_GROUPS = (
    RuleGroup("math-builtin-1arg", ("Math.abs", "Math.sqrt", "Math.floor", "Math.ceil")),
    RuleGroup("math-builtin-2arg", ("Math.max", "Math.min", "Math.pow")),
    RuleGroup("string-builtin-2arg", ("Str.concat", "Str.substring")),
    RuleGroup("string-builtin-1arg", ("Str.length",)),
)

# Value pools are fixed and small so runs are reproducible; they include
# boundary values likely to flip optimizer behavior.  Floats stay NaN- and
# infinity-free because those have no literal syntax.
VALUE_GROUPS = (
    RuleGroup("int-value", (0, 1, -1, 2, 7, 255, INT_MAX32, INT_MIN32)),
    RuleGroup("float-value", (0.0, -0.0, 1.0, -1.0, 0.5, 2.5, 1000000.0)),
    RuleGroup("string-value", ("", "a", "ab", "0", "1", "42")),
    RuleGroup("bool-value", (True, False)),
)

ALL_GROUPS = OPERATOR_GROUPS + BUILTIN_GROUPS + VALUE_GROUPS

_LOGICAL_BINARY = {"&&", "||"}
_COMPARE_BINARY = {"==", "!=", "<", "<=", ">", ">="}


@dataclass(frozen=True)
class RuleTable:
    """Lookup from node to its rule group; value pools may be overridden."""

    groups: tuple[RuleGroup, ...] = ALL_GROUPS

    def _by_name(self, name: str) -> RuleGroup:
        for g in self.groups:
            if g.name == name:
                return g
        raise KeyError(name)

    def group_for(self, node: AstNode) -> RuleGroup | None:
        kind = node.kind
        if kind == "BinaryOp":
            if node.value in _LOGICAL_BINARY:
                return self._by_name("logical-binary")
            if node.value in _COMPARE_BINARY:
                return self._by_name("compare-binary")
            return self._by_name("arith-binary")
        if kind == "UnaryOp":
            if node.value == "!":
                return self._by_name("logical-unary")
            return self._by_name("numeric-unary")
        if kind == "BuiltinRef":
            for g in BUILTIN_GROUPS:
                if node.value in self._by_name(g.name).members:
                    return self._by_name(g.name)
            return None
        if kind == "NumberLit":
            if isinstance(node.value, bool):
                return None
            if isinstance(node.value, int):
                return self._by_name("int-value")
            return self._by_name("float-value")
        if kind == "StringLit":
            return self._by_name("string-value")
        if kind == "BoolLit":
            return self._by_name("bool-value")
        return None

    def replacements(self, node: AstNode) -> tuple:
        """Group members distinct from the node's current payload."""
        group = self.group_for(node)
        if group is None:
            return ()
        current = payload_key(node.value)
        return tuple(m for m in group.members if payload_key(m) != current)

    def with_pools(self, int_pool=None, float_pool=None,
                   string_pool=None, bool_pool=None) -> "RuleTable":
        override = {
            "int-value": int_pool,
            "float-value": float_pool,
            "string-value": string_pool,
            "bool-value": bool_pool,
        }
        groups = tuple(
            RuleGroup(g.name, tuple(override[g.name])) if override.get(g.name) else g
            for g in self.groups
        )
        return RuleTable(groups)

    def to_json(self) -> str:
        return json.dumps({g.name: list(g.members) for g in self.groups}, indent=2)


DEFAULT_RULES = RuleTable()


def value_pool(group_name: str, rules: RuleTable = DEFAULT_RULES) -> tuple:
    """The fixed replacement pool of a value group."""
    group = rules._by_name(group_name)
    if not group_name.endswith("-value"):
        raise ValueError(f"{group_name} is not a value group")
    return group.members


def mutable_node(node: AstNode, rules: RuleTable = DEFAULT_RULES) -> bool:
    """True iff some replacement rule can change this node's payload."""
    return len(rules.replacements(node)) > 0


def mutable_ids(root: AstNode, rules: RuleTable = DEFAULT_RULES) -> list[int]:
    return [n.id for n in walk(root) if mutable_node(n, rules)]


def derive_rng(seed: int, *parts) -> random.Random:
    """Deterministic RNG stream keyed by the run seed plus context parts."""
    h = hashlib.sha256(repr((int(seed),) + parts).encode()).digest()
    return random.Random(int.from_bytes(h[:8], "big"))


def _replace_payload(root: AstNode, node_id: int, new_value) -> AstNode:
    def rec(n: AstNode) -> AstNode:
        if n.id == node_id:
            return AstNode(n.id, n.kind, new_value, n.children)
        return AstNode(n.id, n.kind, n.value, tuple(rec(c) for c in n.children))

    return rec(root)


def mutate(tree: AstNode, i: int, rng: random.Random,
           rules: RuleTable = DEFAULT_RULES) -> AstNode:
    """Return a copy of `tree` with node i's payload replaced by a uniformly
    chosen different member of its rule group; an identical copy if node i is
    immutable.  Tree shape and all other nodes are unchanged."""
    if i < 1 or i > size(tree):
        raise IndexError(f"node id {i} out of range 1..{size(tree)}")
    target = get_node(tree, i)
    options = rules.replacements(target)
    if not options:
        return AstNode(tree.id, tree.kind, tree.value, tree.children)
    return _replace_payload(tree, i, rng.choice(options))
