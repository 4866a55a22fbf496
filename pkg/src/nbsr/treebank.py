"""Constituent trees: PTB bracket I/O, decomposition into labeled spans,
head-rule binarization and its inverse.

Trees are built bottom-up with absolute word offsets, so every node knows
its span ``(l, r)`` (``r`` exclusive).  Leaves are :class:`Token` objects
that carry the POS tag; preterminals are therefore never internal nodes.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass
from importlib import resources
from typing import Iterable, Iterator, NamedTuple, Sequence, Union

__all__ = [
    "Token",
    "Tree",
    "Constituent",
    "HeadRuleTable",
    "PTBParseError",
    "TreeError",
    "read_ptb",
    "write_ptb",
    "decompose",
    "binarize",
    "unbinarize",
    "unary_chain_length",
    "check_unary_cap",
    "DEFAULT_UNARY_CAP",
]

DEFAULT_UNARY_CAP = 3
TEMP_SUFFIX = "*"


class PTBParseError(ValueError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class TreeError(ValueError):
    pass


@dataclass(frozen=True)
class Token:
    form: str
    pos: str

    def __post_init__(self):
        for name, value in (("form", self.form), ("pos", self.pos)):
            if not value or re.search(r"[\s()]", value):
                raise TreeError(f"invalid token {name}: {value!r}")


class Constituent(NamedTuple):
    label: str
    l: int
    r: int


Child = Union["Tree", Token]


class Tree:
    """An internal node.  ``head`` is the index of the head child, set only
    on binarized nodes."""

    __slots__ = ("label", "children", "head", "span")

    def __init__(self, label: str, children: Sequence[Child], start: int = 0,
                 head: int | None = None):
        if not label:
            raise TreeError("empty nonterminal label")
        if not children:
            raise TreeError(f"node {label!r} has no children")
        pos = start
        for child in children:
            if isinstance(child, Tree):
                if child.span[0] != pos:
                    raise TreeError(
                        f"child {child.label!r} starts at {child.span[0]}, expected {pos}")
                pos = child.span[1]
            else:
                pos += 1
        self.label = label
        self.children = tuple(children)
        self.head = head
        self.span = (start, pos)

    @classmethod
    def of(cls, label: str, children: Sequence[Child], head: int | None = None) -> "Tree":
        """Build a node whose start is taken from its first child.  A node
        whose first child is a token must be built with an explicit start."""
        first = children[0]
        if not isinstance(first, Tree):
            raise TreeError("cannot infer start from a token child")
        return cls(label, children, first.span[0], head)

    @property
    def n(self) -> int:
        return self.span[1] - self.span[0]

    def tokens(self) -> list[Token]:
        out: list[Token] = []
        stack: list[Child] = [self]
        while stack:
            node = stack.pop()
            if isinstance(node, Token):
                out.append(node)
            else:
                stack.extend(reversed(node.children))
        return out

    def subtrees(self) -> Iterator["Tree"]:
        """Internal nodes in pre-order."""
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(c for c in reversed(node.children) if isinstance(c, Tree))

    def __eq__(self, other):
        if not isinstance(other, Tree):
            return NotImplemented
        return (self.label == other.label and self.span == other.span
                and self.children == other.children)

    def __hash__(self):
        return hash((self.label, self.span, self.children))

    def __repr__(self):
        return write_ptb(self)


# ---------------------------------------------------------------------------
# reading and writing

_TOKEN_RE = re.compile(r"\(|\)|[^\s()]+")
_FUNCTION_TAG_RE = re.compile(r"^([^-=]+)[-=].*$")


def _strip_function_tags(label: str) -> str:
    m = _FUNCTION_TAG_RE.match(label)
    return m.group(1) if m else label


def _scan(text: str) -> Iterator[tuple[str, int, int]]:
    line_starts = [0] + [m.end() for m in re.finditer("\n", text)]
    line = 0
    for m in _TOKEN_RE.finditer(text):
        while line + 1 < len(line_starts) and line_starts[line + 1] <= m.start():
            line += 1
        yield m.group(), line + 1, m.start() - line_starts[line] + 1


class _Raw:
    """Intermediate bracket node before span assignment."""
    __slots__ = ("label", "children", "line", "col")

    def __init__(self, label, line, col):
        self.label = label
        self.children: list = []
        self.line = line
        self.col = col


def _raw_trees(text: str) -> Iterator[_Raw]:
    stack: list[_Raw] = []
    expect_label = False
    last = (1, 1)
    for tok, line, col in _scan(text):
        last = (line, col)
        if expect_label:
            expect_label = False
            node = stack[-1]
            if tok == ")":
                raise PTBParseError("empty bracket", line, col)
            if tok != "(":
                node.label = tok
                continue
        if tok == "(":
            node = _Raw("", line, col)
            if stack:
                stack[-1].children.append(node)
            stack.append(node)
            expect_label = True
        elif tok == ")":
            if not stack:
                raise PTBParseError("unbalanced ')'", line, col)
            node = stack.pop()
            if not stack:
                yield node
        else:
            if not stack:
                raise PTBParseError(f"word {tok!r} outside brackets", line, col)
            stack[-1].children.append((tok, line, col))
    if stack:
        raise PTBParseError(f"unbalanced '(': {len(stack)} bracket(s) left open",
                            *last) from None


def _convert(raw: _Raw, strip_functions: bool, strip_traces: bool,
             is_root: bool) -> "_Pending | None":
    if not raw.label:
        if is_root and len(raw.children) == 1 and isinstance(raw.children[0], _Raw):
            return _convert(raw.children[0], strip_functions, strip_traces, True)
        raise PTBParseError("empty nonterminal label", raw.line, raw.col)
    built: list = []
    has_word = any(not isinstance(c, _Raw) for c in raw.children)
    if has_word:
        raise PTBParseError(f"word directly under phrase {raw.label!r}",
                            raw.line, raw.col)
    for child in raw.children:
        words = [c for c in child.children if not isinstance(c, _Raw)]
        if words:
            # preterminal
            if len(child.children) != 1 or not child.label:
                raise PTBParseError("malformed preterminal", child.line, child.col)
            form = words[0][0]
            if strip_traces and child.label == "-NONE-":
                continue
            built.append(Token(form, child.label))
        else:
            sub = _convert(child, strip_functions, strip_traces, False)
            if sub is None:
                continue
            built.append(sub)
    if not built:
        if is_root:
            raise PTBParseError("tree has no words", raw.line, raw.col)
        return None
    label = _strip_function_tags(raw.label) if strip_functions else raw.label
    return _Pending(label, built)


class _Pending:
    """A node with relative children, turned into a Tree once offsets are known."""
    __slots__ = ("label", "children", "n")

    def __init__(self, label, children):
        self.label = label
        self.children = children
        self.n = sum(c.n if isinstance(c, _Pending) else 1 for c in children)


def _place(p: _Pending, start: int) -> Tree:
    children: list[Child] = []
    pos = start
    for c in p.children:
        if isinstance(c, _Pending):
            t = _place(c, pos)
            children.append(t)
            pos = t.span[1]
        else:
            children.append(c)
            pos += 1
    return Tree(p.label, children, start)


def read_ptb(text: str, strip_functions: bool = True,
             strip_traces: bool = True) -> list[Tree]:
    """Parse one or more bracketed trees.

    ``(S (NP (DT The) (NN cat)) (VP (VBZ sleeps)))`` becomes a tree whose
    leaves are ``Token(form, pos)``.  An outer bracket with no label is
    dropped.  Function tags (``NP-SBJ``, ``NP=2``) and ``-NONE-`` elements
    are removed unless the corresponding flag is off.
    """
    trees = []
    for raw in _raw_trees(text):
        if raw.children and all(not isinstance(c, _Raw) for c in raw.children):
            raise PTBParseError("tree has no phrase above its preterminal",
                                raw.line, raw.col)
        trees.append(_place(_convert(raw, strip_functions, strip_traces, True), 0))
    return trees


def read_ptb_file(path, **kwargs) -> list[Tree]:
    with open(path, encoding="utf-8") as f:
        return read_ptb(f.read(), **kwargs)


def write_ptb(tree: Tree) -> str:
    parts: list[str] = []

    def visit(node: Child):
        if isinstance(node, Token):
            parts.append(f"({node.pos} {node.form})")
            return
        parts.append(f"({node.label}")
        for c in node.children:
            parts.append(" ")
            visit(c)
        parts.append(")")

    visit(tree)
    return "".join(parts)


# ---------------------------------------------------------------------------
# decomposition and structural checks

def decompose(tree: Tree) -> Counter:
    """Multiset of labeled spans, one per internal node (preterminals are
    excluded).  Same-span unary chains with a repeated label count twice."""
    return Counter(Constituent(t.label, *t.span) for t in tree.subtrees())


def unary_chain_length(tree: Tree) -> int:
    """Longest run of consecutive single-child internal nodes."""
    best = 0

    def visit(node: Tree) -> int:
        nonlocal best
        below = [visit(c) for c in node.children if isinstance(c, Tree)]
        run = (1 + (below[0] if below else 0)) if len(node.children) == 1 else 0
        best = max(best, run)
        return run

    visit(tree)
    return best


def check_unary_cap(tree: Tree, cap: int = DEFAULT_UNARY_CAP) -> None:
    length = unary_chain_length(tree)
    if length > cap:
        raise TreeError(f"unary chain of length {length} exceeds cap {cap}")


# ---------------------------------------------------------------------------
# head rules and binarization

class HeadRuleTable:
    """Parent label -> (scan direction, child label priorities).

    For each priority label in order, children are scanned in the rule's
    direction and the first match is the head; with no match the first
    child in scan direction wins.  Parents without a rule take the
    leftmost child.
    """

    def __init__(self, rules: dict[str, tuple[str, tuple[str, ...]]] | None = None):
        self.rules = dict(rules or {})
        for parent, (direction, _) in self.rules.items():
            if direction not in ("left", "right"):
                raise ValueError(f"bad direction {direction!r} for {parent}")

    @classmethod
    def parse(cls, text: str) -> "HeadRuleTable":
        rules = {}
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            fields = line.split()
            if len(fields) < 2 or fields[1] not in ("left", "right"):
                raise ValueError(f"head rule line {lineno}: expected "
                                 f"'PARENT left|right CHILD...', got {line!r}")
            rules[fields[0]] = (fields[1], tuple(fields[2:]))
        return cls(rules)

    @classmethod
    def from_file(cls, path) -> "HeadRuleTable":
        with open(path, encoding="utf-8") as f:
            return cls.parse(f.read())

    @classmethod
    def english(cls) -> "HeadRuleTable":
        text = resources.files("nbsr").joinpath("data/english.headrules").read_text("utf-8")
        return cls.parse(text)

    def head_index(self, parent: str, children: Sequence[str]) -> int:
        rule = self.rules.get(_strip_temp(parent))
        if rule is None:
            return 0
        direction, priorities = rule
        order = range(len(children)) if direction == "left" else range(len(children) - 1, -1, -1)
        for label in priorities:
            for i in order:
                if children[i] == label:
                    return i
        return order[0]


def _strip_temp(label: str) -> str:
    return label[:-1] if label.endswith(TEMP_SUFFIX) else label


def _child_label(c: Child) -> str:
    return c.pos if isinstance(c, Token) else c.label


def binarize(tree: Tree, rules: HeadRuleTable) -> Tree:
    """Head-outward binarization.

    The head child first absorbs its right siblings (innermost first), then
    its left siblings; every intermediate node is labeled ``X*`` and only
    the outermost keeps ``X``.  ``head`` on each binary node is 0 when the
    head is the left child and 1 when it is the right child.
    """
    children = [binarize(c, rules) if isinstance(c, Tree) else c for c in tree.children]
    start = tree.span[0]
    if len(children) == 1:
        return Tree(tree.label, children, start)
    h = rules.head_index(tree.label, [_child_label(c) for c in tree.children])
    steps = [(j, 0) for j in range(h + 1, len(children))] + [(j, 1) for j in range(h - 1, -1, -1)]
    current: Child = children[h]
    cur_start = start + sum(_width(c) for c in children[:h])
    for step, (j, head) in enumerate(steps):
        label = tree.label if step == len(steps) - 1 else tree.label + TEMP_SUFFIX
        if head == 0:
            pair = [current, children[j]]
        else:
            pair = [children[j], current]
            cur_start -= _width(children[j])
        current = Tree(label, pair, cur_start, head)
    return current


def _width(c: Child) -> int:
    return 1 if isinstance(c, Token) else c.n


def unbinarize(tree: Tree) -> Tree:
    """Dissolve every ``X*`` node into its parent."""
    if tree.label.endswith(TEMP_SUFFIX):
        raise TreeError(f"temporary node {tree.label!r} at the root")
    return _unbin(tree)


def _unbin(tree: Tree) -> Tree:
    out: list[Child] = []
    for c in tree.children:
        if isinstance(c, Token):
            out.append(c)
            continue
        c = _unbin(c)
        if c.label.endswith(TEMP_SUFFIX):
            out.extend(c.children)
        else:
            out.append(c)
    return Tree(tree.label, out, tree.span[0])


def relabel_root(tree: Tree, label: str) -> Tree:
    return Tree(label, tree.children, tree.span[0], tree.head)


def iter_constituent_arities(tree: Tree) -> Iterable[tuple[Constituent, int]]:
    for t in tree.subtrees():
        yield Constituent(t.label, *t.span), len(t.children)
