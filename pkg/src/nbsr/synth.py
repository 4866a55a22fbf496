"""Random trees and random parser walks for tests, audits and benchmarks."""

from __future__ import annotations

import random
from typing import Sequence

from .transitions import Configuration, NonBinarySystem, initial
from .treebank import DEFAULT_UNARY_CAP, Token, Tree, read_ptb

POS_TAGS = ("DT", "NN", "VB", "JJ", "IN", "RB")


def random_tree(rng: random.Random, n: int, labels: Sequence[str] = ("S", "NP", "VP"),
                max_arity: int = 5, unary_cap: int = DEFAULT_UNARY_CAP,
                unary_prob: float = 0.25, words: Sequence[str] | None = None) -> Tree:
    """A random tree over ``n`` words.  Every node has at most ``max_arity``
    children and unary chains never exceed ``unary_cap``."""
    if n < 1:
        raise ValueError("n must be positive")
    if unary_cap < 1 and n == 1:
        raise ValueError("a one-word tree needs at least one unary node")
    vocab = words or [f"w{i}" for i in range(n)]
    tokens = [Token(vocab[i % len(vocab)], rng.choice(POS_TAGS)) for i in range(n)]

    def chain(node, l: int, force: bool):
        count = 0
        while count < unary_cap and rng.random() < unary_prob:
            count += 1
        if force and count == 0:
            count = 1
        for _ in range(count):
            node = Tree(rng.choice(labels), [node], l)
        return node

    def build(l: int, r: int, root: bool):
        if r - l == 1:
            return chain(tokens[l], l, root)
        k = rng.randint(2, min(max_arity, r - l))
        cuts = sorted(rng.sample(range(l + 1, r), k - 1))
        bounds = [l] + cuts + [r]
        kids = [build(a, b, False) for a, b in zip(bounds, bounds[1:])]
        return chain(Tree(rng.choice(labels), kids, l), l, False)

    return build(0, n, True)


def right_branching_tree(n: int, label: str = "X") -> Tree:
    tokens = [Token(f"w{i}", "NN") for i in range(n)]
    node: Tree | Token = Tree(label, [tokens[-1]], n - 1)
    for i in range(n - 2, -1, -1):
        node = Tree(label, [tokens[i], node], i)
    return node


def random_walk(rng: random.Random, sentence: Sequence[Token], system: NonBinarySystem,
                steps: int) -> Configuration:
    """Apply up to ``steps`` uniformly chosen legal transitions."""
    c = initial(sentence)
    for _ in range(steps):
        options = system.legal_transitions(c)
        if not options:
            break
        c = system.apply(c, rng.choice(options))
    return c



_LEX = {
    "DT": ["the", "a", "every"], "NN": ["dog", "cat", "report", "market", "idea"],
    "NNP": ["John", "Mary", "Paris"], "JJ": ["big", "green", "new"], "RB": ["very", "quite"],
    "VBZ": ["sees", "likes"], "VBD": ["saw", "liked"],
}


def _w(rng: random.Random, pos: str) -> str:
    return f"({pos} {rng.choice(_LEX[pos])})"


def _toy_np(rng: random.Random, depth: int) -> str:
    pick = rng.random()
    if pick < 0.25:
        return f"(NP {_w(rng, 'NNP')})"
    kids = [_w(rng, "DT")]
    if pick < 0.55:
        kids.append(_w(rng, "JJ"))
    kids.append(_w(rng, "NN"))
    out = f"(NP {' '.join(kids)})"
    if depth < 1 and rng.random() < 0.2:
        out = f"(NP {out} (PP (IN of) {_toy_np(rng, depth + 1)}))"
    return out


def toy_tree(rng: random.Random) -> Tree:
    """A sentence from a small unambiguous English-like grammar."""
    subj = _toy_np(rng, 0)
    pick = rng.random()
    if pick < 0.35:
        vp = f"(VP {_w(rng, 'VBZ')} {_toy_np(rng, 0)})"
    elif pick < 0.6:
        prep = rng.choice(["with", "in"])
        vp = f"(VP {_w(rng, 'VBD')} {_toy_np(rng, 1)} (PP (IN {prep}) {_toy_np(rng, 1)}))"
    elif pick < 0.85:
        vp = f"(VP (VBZ is) (ADJP {_w(rng, 'RB')} {_w(rng, 'JJ')}))"
    else:
        vp = "(VP (VBD slept))"
    if rng.random() < 0.2:
        text = (f"(S (S {subj} {vp}) (, ,) (S {_toy_np(rng, 1)} (VP (VBD slept))) (. .))")
    else:
        text = f"(S {subj} {vp} (. .))"
    return read_ptb(text)[0]


def toy_corpus(size: int, seed: int = 0) -> list[Tree]:
    rng = random.Random(seed)
    return [toy_tree(rng) for _ in range(size)]
