"""Parser configurations and the two bottom-up transition systems.

The non-binary system has ``SHIFT``, ``REDUCE-X#k`` (pop k items, push X
over their combined span) and ``FINISH``.  The binary baseline replaces the
reduce with ``REDUCE-LEFT-X`` / ``REDUCE-RIGHT-X`` (pop two) and
``REDUCE-UNARY-X``; it needs binarized trees.

Configurations are immutable; ``apply`` returns a new one.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, NamedTuple, Sequence

from .treebank import (DEFAULT_UNARY_CAP, TEMP_SUFFIX, Constituent, Token, Tree,
                       TreeError)

__all__ = [
    "Transition", "SHIFT", "FINISH", "reduce", "reduce_left", "reduce_right",
    "reduce_unary", "StackItem", "Configuration", "IllegalTransition",
    "NonBinarySystem", "BinarySystem", "initial", "legal", "apply",
    "static_oracle_nb", "static_oracle_bin", "extract_tree", "count_transitions",
    "replay", "format_transitions", "parse_transitions",
]

SHIFT_KIND = "shift"
REDUCE_KIND = "reduce"
FINISH_KIND = "finish"
LEFT_KIND = "reduce-left"
RIGHT_KIND = "reduce-right"
UNARY_KIND = "reduce-unary"

_KIND_ORDER = {SHIFT_KIND: 0, REDUCE_KIND: 1, LEFT_KIND: 1, RIGHT_KIND: 1,
               UNARY_KIND: 1, FINISH_KIND: 2}


@dataclass(frozen=True)
class Transition:
    kind: str
    label: str | None = None
    arity: int = 0

    def __str__(self):
        if self.kind == SHIFT_KIND:
            return "SHIFT"
        if self.kind == FINISH_KIND:
            return "FINISH"
        if self.kind == REDUCE_KIND:
            return f"REDUCE-{self.label}#{self.arity}"
        return f"{self.kind.upper()}-{self.label}"

    @property
    def sort_key(self) -> tuple:
        """Canonical tie-break order: shift, reduces by (label, arity), finish."""
        return (_KIND_ORDER[self.kind], self.kind, self.label or "", self.arity)

    @property
    def is_unary(self) -> bool:
        return self.kind == UNARY_KIND or (self.kind == REDUCE_KIND and self.arity == 1)

    @classmethod
    def parse(cls, text: str) -> "Transition":
        text = text.strip()
        if text == "SHIFT":
            return SHIFT
        if text == "FINISH":
            return FINISH
        for kind in (LEFT_KIND, RIGHT_KIND, UNARY_KIND):
            prefix = kind.upper() + "-"
            if text.startswith(prefix) and len(text) > len(prefix):
                return cls(kind, text[len(prefix):])
        m = re.fullmatch(r"REDUCE-(.+)#(\d+)", text)
        if m and int(m.group(2)) >= 1:
            return cls(REDUCE_KIND, m.group(1), int(m.group(2)))
        raise ValueError(f"cannot parse transition {text!r}")


SHIFT = Transition(SHIFT_KIND)
FINISH = Transition(FINISH_KIND)


def reduce(label: str, arity: int) -> Transition:
    if arity < 1:
        raise ValueError("reduce arity must be positive")
    return Transition(REDUCE_KIND, label, arity)


def reduce_left(label: str) -> Transition:
    return Transition(LEFT_KIND, label)


def reduce_right(label: str) -> Transition:
    return Transition(RIGHT_KIND, label)


def reduce_unary(label: str) -> Transition:
    return Transition(UNARY_KIND, label)


def format_transitions(seq: Iterable[Transition]) -> str:
    return "\n".join(str(t) for t in seq)


def parse_transitions(text: str) -> list[Transition]:
    return [Transition.parse(line) for line in text.splitlines() if line.strip()]


class StackItem(NamedTuple):
    """A stack element.  ``chain`` lists the nonterminal labels stacked over
    this exact span (bottom first) and ``unary`` how many of them came from
    unary reductions; both feed the unary cap and the oracle."""
    label: str
    l: int
    r: int
    node: Tree | Token
    unary: int
    chain: tuple
    arity: int

    @property
    def is_token(self) -> bool:
        return isinstance(self.node, Token)


class _Built(NamedTuple):
    item: Constituent
    prev: "_Built | None"


@dataclass(frozen=True)
class Configuration:
    sentence: tuple
    stack: tuple = ()
    i: int = 0
    finished: bool = False
    built_list: _Built | None = None
    history: tuple = ()

    @property
    def n(self) -> int:
        return len(self.sentence)

    @property
    def top(self) -> StackItem | None:
        return self.stack[-1] if self.stack else None

    @cached_property
    def built_counts(self) -> Counter:
        """Nonterminal constituents created so far (multiset).  Read-only."""
        out: Counter = Counter()
        node = self.built_list
        while node is not None:
            out[node.item] += 1
            node = node.prev
        return out

    def built(self) -> Counter:
        return Counter(self.built_counts)

    def gamma(self) -> Counter:
        """The full built set, word constituents included."""
        out = self.built()
        for k in range(self.i):
            out[Constituent(self.sentence[k].form, k, k + 1)] += 1
        return out

    @property
    def is_terminal(self) -> bool:
        return self.finished


class IllegalTransition(ValueError):
    pass


def initial(sentence: Sequence[Token]) -> Configuration:
    if len(sentence) == 0:
        raise ValueError("cannot parse an empty sentence")
    return Configuration(tuple(sentence))


def _shift(c: Configuration) -> Configuration:
    tok = c.sentence[c.i]
    item = StackItem(tok.form, c.i, c.i + 1, tok, 0, (), 0)
    return Configuration(c.sentence, c.stack + (item,), c.i + 1, False, c.built_list,
                         (c.history + (SHIFT,))[-2:])


def _reduce(c: Configuration, t: Transition, k: int, head: int | None) -> Configuration:
    popped = c.stack[-k:]
    l, r = popped[0].l, popped[-1].r
    node = Tree(t.label, [p.node for p in popped], l, head)
    if k == 1:
        prev = popped[0]
        item = StackItem(t.label, l, r, node, prev.unary + 1, prev.chain + (t.label,), 1)
    else:
        item = StackItem(t.label, l, r, node, 0, (t.label,), k)
    return Configuration(c.sentence, c.stack[:-k] + (item,), c.i, False,
                         _Built(Constituent(t.label, l, r), c.built_list),
                         (c.history + (t,))[-2:])


def _finish(c: Configuration) -> Configuration:
    return Configuration(c.sentence, c.stack, c.i, True, c.built_list,
                         (c.history + (FINISH,))[-2:])


class _System:
    unary_cap: int

    def initial(self, sentence: Sequence[Token]) -> Configuration:
        return initial(sentence)

    def why_illegal(self, c: Configuration, t: Transition) -> str | None:
        raise NotImplementedError

    def legal(self, c: Configuration, t: Transition) -> bool:
        return self.why_illegal(c, t) is None

    def _check_finish(self, c: Configuration) -> str | None:
        if c.finished:
            return "configuration already finished"
        if c.i != len(c.sentence):
            return "buffer not empty"
        if len(c.stack) != 1:
            return f"stack holds {len(c.stack)} items, need exactly 1"
        if c.stack[0].is_token:
            return "stack top is a bare word"
        return None

    def _check_shift(self, c: Configuration) -> str | None:
        if c.finished:
            return "configuration already finished"
        if c.i >= len(c.sentence):
            return "buffer empty"
        return None

    def _check_unary(self, c: Configuration) -> str | None:
        if c.stack and c.stack[-1].unary >= self.unary_cap:
            return f"unary cap {self.unary_cap} reached"
        return None

    def apply(self, c: Configuration, t: Transition) -> Configuration:
        reason = self.why_illegal(c, t)
        if reason is not None:
            raise IllegalTransition(f"{t} is illegal: {reason}")
        return self._apply(c, t)

    def _apply(self, c: Configuration, t: Transition) -> Configuration:
        if t.kind == SHIFT_KIND:
            return _shift(c)
        if t.kind == FINISH_KIND:
            return _finish(c)
        if t.kind == REDUCE_KIND:
            return _reduce(c, t, t.arity, None)
        if t.kind == UNARY_KIND:
            return _reduce(c, t, 1, None)
        return _reduce(c, t, 2, 0 if t.kind == RIGHT_KIND else 1)

    def force(self, c: Configuration, t: Transition) -> Configuration:
        """Apply ignoring the label inventory (decoder fallback)."""
        return self._apply(c, t)


class NonBinarySystem(_System):
    """Shift / Reduce-X#k / Finish.

    ``inventory`` restricts reduces to observed (label, arity) pairs.  With
    ``inventory=None`` any arity is allowed for labels in ``labels`` (or any
    label at all when ``labels`` is None as well).
    """

    def __init__(self, inventory: Iterable[tuple[str, int]] | None = None,
                 labels: Iterable[str] | None = None,
                 unary_cap: int = DEFAULT_UNARY_CAP):
        self.inventory = frozenset(inventory) if inventory is not None else None
        if labels is None and self.inventory is not None:
            labels = {x for x, _ in self.inventory}
        self.labels = tuple(sorted(labels)) if labels is not None else None
        self.unary_cap = unary_cap
        if self.inventory is not None:
            self._by_arity: dict[int, list[str]] = {}
            for x, k in sorted(self.inventory):
                self._by_arity.setdefault(k, []).append(x)

    def open(self) -> "NonBinarySystem":
        """Same labels, any arity."""
        return NonBinarySystem(None, self.labels, self.unary_cap)

    def why_illegal(self, c: Configuration, t: Transition) -> str | None:
        if t.kind == SHIFT_KIND:
            return self._check_shift(c)
        if t.kind == FINISH_KIND:
            return self._check_finish(c)
        if t.kind != REDUCE_KIND:
            return f"{t.kind} does not belong to the non-binary system"
        if c.finished:
            return "configuration already finished"
        if len(c.stack) < t.arity:
            return f"stack holds {len(c.stack)} items, need {t.arity}"
        if self.inventory is not None:
            if (t.label, t.arity) not in self.inventory:
                return f"({t.label}, {t.arity}) not in the label inventory"
        elif self.labels is not None and t.label not in self.labels:
            return f"unknown label {t.label}"
        if t.arity == 1:
            return self._check_unary(c)
        return None

    def legal_transitions(self, c: Configuration) -> list[Transition]:
        if c.finished:
            return []
        out = []
        if c.i < len(c.sentence):
            out.append(SHIFT)
        depth = len(c.stack)
        unary_ok = bool(c.stack) and c.stack[-1].unary < self.unary_cap
        reduces = []
        if self.inventory is not None:
            for k, labels in self._by_arity.items():
                if k <= depth and (k > 1 or unary_ok):
                    reduces.extend(Transition(REDUCE_KIND, x, k) for x in labels)
        elif self.labels is not None:
            for x in self.labels:
                for k in range(1 if unary_ok else 2, depth + 1):
                    reduces.append(Transition(REDUCE_KIND, x, k))
        else:
            raise ValueError("cannot enumerate reduces without a label set")
        reduces.sort(key=lambda t: t.sort_key)
        out.extend(reduces)
        if self._check_finish(c) is None:
            out.append(FINISH)
        return out


class BinarySystem(_System):
    """Shift / Reduce-Left-X / Reduce-Right-X / Reduce-Unary-X / Finish.

    Reduce-Right keeps the left child as head, Reduce-Left the right one.
    Temporary ``X*`` labels may not be unary parents or the final root.
    """

    def __init__(self, left: Iterable[str] | None = None, right: Iterable[str] | None = None,
                 unary: Iterable[str] | None = None, unary_cap: int = DEFAULT_UNARY_CAP):
        self.allowed = {
            LEFT_KIND: frozenset(left) if left is not None else None,
            RIGHT_KIND: frozenset(right) if right is not None else None,
            UNARY_KIND: frozenset(unary) if unary is not None else None,
        }
        self.unary_cap = unary_cap

    def why_illegal(self, c: Configuration, t: Transition) -> str | None:
        if t.kind == SHIFT_KIND:
            return self._check_shift(c)
        if t.kind == FINISH_KIND:
            reason = self._check_finish(c)
            if reason is None and c.stack[0].label.endswith(TEMP_SUFFIX):
                return "temporary label at the root"
            return reason
        if t.kind not in self.allowed:
            return f"{t.kind} does not belong to the binary system"
        if c.finished:
            return "configuration already finished"
        allowed = self.allowed[t.kind]
        if allowed is not None and t.label not in allowed:
            return f"{t} not in the label inventory"
        if t.kind == UNARY_KIND:
            if not c.stack:
                return "stack empty"
            if t.label.endswith(TEMP_SUFFIX):
                return "temporary label on a unary node"
            return self._check_unary(c)
        if len(c.stack) < 2:
            return "binary reduce needs two stack items"
        return None

    def legal_transitions(self, c: Configuration) -> list[Transition]:
        if c.finished:
            return []
        cands = [SHIFT, FINISH]
        for kind, labels in self.allowed.items():
            if labels is None:
                raise ValueError("cannot enumerate reduces without a label set")
            cands.extend(Transition(kind, x) for x in labels)
        out = [t for t in cands if self.why_illegal(c, t) is None]
        out.sort(key=lambda t: t.sort_key)
        return out


_OPEN_NB = NonBinarySystem()
_OPEN_BIN = BinarySystem()


def _default_system(t: Transition) -> _System:
    return _OPEN_NB if t.kind in (SHIFT_KIND, FINISH_KIND, REDUCE_KIND) else _OPEN_BIN


def legal(c: Configuration, t: Transition, system: _System | None = None) -> bool:
    return (system or _default_system(t)).legal(c, t)


def apply(c: Configuration, t: Transition, system: _System | None = None) -> Configuration:
    return (system or _default_system(t)).apply(c, t)


def replay(sentence: Sequence[Token], transitions: Iterable[Transition],
           system: _System | None = None) -> Configuration:
    c = initial(sentence)
    for t in transitions:
        c = apply(c, t, system)
    return c


def static_oracle_nb(tree: Tree) -> list[Transition]:
    out: list[Transition] = []

    def visit(node: Tree):
        for child in node.children:
            if isinstance(child, Token):
                out.append(SHIFT)
            else:
                visit(child)
        out.append(Transition(REDUCE_KIND, node.label, len(node.children)))

    visit(tree)
    out.append(FINISH)
    return out


def static_oracle_bin(tree: Tree) -> list[Transition]:
    """Gold sequence for a binarized tree (see ``treebank.binarize``)."""
    out: list[Transition] = []

    def visit(node: Tree):
        for child in node.children:
            if isinstance(child, Token):
                out.append(SHIFT)
            else:
                visit(child)
        k = len(node.children)
        if k == 1:
            out.append(Transition(UNARY_KIND, node.label))
        elif k == 2:
            if node.head not in (0, 1):
                raise TreeError(f"binary node {node.label!r} {node.span} has no head annotation")
            out.append(Transition(RIGHT_KIND if node.head == 0 else LEFT_KIND, node.label))
        else:
            raise TreeError(f"node {node.label!r} {node.span} has {k} children")

    visit(tree)
    out.append(FINISH)
    return out


def extract_tree(c: Configuration) -> Tree:
    if not c.finished:
        raise ValueError("configuration is not terminal")
    if len(c.stack) != 1 or c.stack[0].is_token:
        raise ValueError("terminal configuration does not hold a single tree")
    return c.stack[0].node


def count_transitions(tree: Tree) -> int:
    """Length of the non-binary derivation: n + |N| + 1."""
    return tree.n + sum(1 for _ in tree.subtrees()) + 1
