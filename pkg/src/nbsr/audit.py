"""Check the closed-form loss against exhaustive search.

Two regimes: every configuration reachable within a few transitions for
every small tree of a family, and random configurations of random trees.
"""

from __future__ import annotations

import itertools
import random
import time
from dataclasses import asdict, dataclass, field
from typing import Callable, Iterator, Sequence

from .oracle import BruteForce, GoldSet, loss
from .synth import random_tree
from .transitions import Configuration, NonBinarySystem, Transition, initial
from .treebank import DEFAULT_UNARY_CAP, Token, Tree, write_ptb

LossFn = Callable[[Configuration, GoldSet, int], int]


def closed_form(c: Configuration, gold: GoldSet, cap: int) -> int:
    return loss(c, gold, cap).loss


def without_stack_condition(c: Configuration, gold: GoldSet, cap: int) -> int:
    return loss(c, gold, cap, stack_condition=False).loss


FAULTS = {"none": closed_form, "no-stack-condition": without_stack_condition}


@dataclass
class Mismatch:
    tree: str
    transitions: list[str]
    loss: int
    brute_force: int


@dataclass
class AuditReport:
    mode: str
    trees: int = 0
    configurations: int = 0
    mismatches: list[Mismatch] = field(default_factory=list)
    seconds: float = 0.0

    @property
    def ok(self) -> bool:
        return not self.mismatches

    def to_dict(self) -> dict:
        d = asdict(self)
        d["ok"] = self.ok
        d["mismatch_count"] = len(self.mismatches)
        return d

    def summary(self) -> str:
        return (f"{self.mode}: {self.trees} trees, {self.configurations} configurations, "
                f"{len(self.mismatches)} mismatches ({self.seconds:.1f}s)")


def _shapes(l: int, r: int) -> Iterator[list]:
    """Bracketings of [l, r) without unary nodes: ('tok', i) or ('node', kids)."""
    if r - l == 1:
        yield ("tok", l)
        return
    for k in range(2, r - l + 1):
        for cuts in itertools.combinations(range(l + 1, r), k - 1):
            bounds = (l,) + cuts + (r,)
            for kids in itertools.product(*[list(_shapes(a, b)) for a, b in zip(bounds, bounds[1:])]):
                yield ("node", list(kids))


def enumerate_trees(n: int, labels: Sequence[str], extra_unaries: int = 1,
                    unary_cap: int = DEFAULT_UNARY_CAP) -> list[Tree]:
    """Every tree over ``n`` words with internal labels from ``labels`` and
    at most ``extra_unaries`` unary nodes (a one-word tree additionally gets
    its mandatory root chain, up to the cap)."""
    tokens = [Token(f"w{i}", "T") for i in range(n)]
    out: list[Tree] = []

    def label_shape(shape) -> Iterator:
        if shape[0] == "tok":
            yield tokens[shape[1]]
            return
        kids_options = [list(label_shape(k)) for k in shape[1]]
        for kids in itertools.product(*kids_options):
            for x in labels:
                yield Tree(x, list(kids), _start(kids[0]))

    def with_unaries(node, budget: int) -> Iterator:
        """Insert up to ``budget`` unary nodes anywhere in ``node``."""
        yield node, 0
        if budget == 0:
            return
        # a unary over this node
        for inner, used in with_unaries(node, budget - 1):
            if isinstance(inner, Tree) and _top_chain(inner) >= unary_cap:
                continue
            if isinstance(inner, Token) and _top_chain(inner) >= unary_cap:
                continue
            for x in labels:
                yield Tree(x, [inner], _start(inner)), used + 1
        if isinstance(node, Tree):
            kids = list(node.children)
            for idx, kid in enumerate(kids):
                for new_kid, used in with_unaries(kid, budget):
                    if used == 0:
                        continue
                    yield Tree(node.label, kids[:idx] + [new_kid] + kids[idx + 1:],
                               node.span[0]), used

    seen = set()
    for shape in _shapes(0, n):
        for base in label_shape(shape):
            if isinstance(base, Token):
                for length in range(1, unary_cap + 1):
                    for chain in itertools.product(labels, repeat=length):
                        node: Tree | Token = base
                        for x in chain:
                            node = Tree(x, [node], 0)
                        out.append(node)
                continue
            for tree, _ in with_unaries(base, extra_unaries):
                key = write_ptb(tree)
                if key not in seen:
                    seen.add(key)
                    out.append(tree)
    return out


def _start(node) -> int:
    return node.span[0] if isinstance(node, Tree) else int(node.form[1:])


def _top_chain(node) -> int:
    length = 0
    while isinstance(node, Tree) and len(node.children) == 1:
        length += 1
        node = node.children[0]
    return length


def reachable_configurations(sentence: Sequence[Token], system: NonBinarySystem,
                             depth: int) -> list[tuple[Configuration, tuple]]:
    """Distinct configurations within ``depth`` transitions of the initial
    one, each with the first transition sequence found to reach it."""
    def key(c: Configuration):
        return (tuple((s.label, s.l, s.r, s.unary, s.chain) for s in c.stack), c.i,
                c.finished, tuple(sorted(c.built_counts.items())))

    start = initial(sentence)
    seen = {key(start): (start, ())}
    frontier = [(start, ())]
    for _ in range(depth):
        nxt = []
        for c, trace in frontier:
            for t in system.legal_transitions(c):
                c2 = system.apply(c, t)
                k = key(c2)
                if k not in seen:
                    seen[k] = (c2, trace + (t,))
                    nxt.append(seen[k])
        frontier = nxt
    return list(seen.values())


def _check(tree: Tree, configs, system: NonBinarySystem, loss_fn: LossFn,
           report: AuditReport, max_reported: int):
    gold = GoldSet.from_tree(tree)
    bf = BruteForce(gold, system)
    report.trees += 1
    for c, trace in configs:
        report.configurations += 1
        got = loss_fn(c, gold, system.unary_cap)
        want = bf.min_loss(c)
        if got != want and len(report.mismatches) < max_reported:
            report.mismatches.append(Mismatch(write_ptb(tree), [str(t) for t in trace], got, want))
        elif got != want:
            report.mismatches.append(report.mismatches[-1])


DEFAULT_EXTRA_UNARIES = {1: 1, 2: 1, 3: 1, 4: 0}


def exhaustive_audit(max_n: int = 4, labels: Sequence[str] = ("A", "B"), depth: int = 8,
                     extra_unaries: int | dict[int, int] | None = None,
                     unary_cap: int = DEFAULT_UNARY_CAP,
                     loss_fn: LossFn = closed_form, max_reported: int = 20,
                     trees_per_n: dict[int, list[Tree]] | None = None) -> AuditReport:
    """``extra_unaries`` is either one budget for every length or a per-length
    map; by default lengths up to 3 get one extra unary and length 4 none."""
    report = AuditReport("exhaustive")
    t0 = time.perf_counter()
    system = NonBinarySystem(labels=labels, unary_cap=unary_cap)
    if extra_unaries is None:
        extra_unaries = DEFAULT_EXTRA_UNARIES
    for n in range(1, max_n + 1):
        budget = extra_unaries if isinstance(extra_unaries, int) else extra_unaries.get(n, 0)
        trees = (trees_per_n or {}).get(n) or enumerate_trees(n, labels, budget, unary_cap)
        configs = reachable_configurations(trees[0].tokens(), system, depth)
        for tree in trees:
            _check(tree, configs, system, loss_fn, report, max_reported)
    report.seconds = time.perf_counter() - t0
    return report


def sampled_audit(samples: int = 1000, max_n: int = 6, labels: Sequence[str] = ("A", "B"),
                  distractor: str = "C", seed: int = 0, max_arity: int = 4,
                  unary_cap: int = DEFAULT_UNARY_CAP, loss_fn: LossFn = closed_form,
                  max_reported: int = 20) -> AuditReport:
    """Random trees over ``labels``; the parser may also use ``distractor``."""
    report = AuditReport("sampled")
    t0 = time.perf_counter()
    rng = random.Random(seed)
    system = NonBinarySystem(labels=tuple(labels) + ((distractor,) if distractor else ()),
                             unary_cap=unary_cap)
    for _ in range(samples):
        n = rng.randint(1, max_n)
        tree = random_tree(rng, n, labels, max_arity=max_arity, unary_cap=unary_cap)
        while True:
            c = initial(tree.tokens())
            trace: list[Transition] = []
            for _ in range(rng.randint(0, 3 * n + 3)):
                options = system.legal_transitions(c)
                if not options:
                    break
                t = rng.choice(options)
                trace.append(t)
                c = system.apply(c, t)
            if not c.finished:
                break
        _check(tree, [(c, tuple(trace))], system, loss_fn, report, max_reported)
    report.seconds = time.perf_counter() - t0
    return report
