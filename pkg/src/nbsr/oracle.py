"""Exact dynamic oracle for the non-binary system.

A gold constituent (X, l, r) is still buildable from a configuration with
buffer index j when it was already built, when it lies in the buffer
(j <= l), or when l is the left end of some stack item and j <= r.  The
minimum Hamming loss over all completions is then the number of gold
constituents that fail this test plus the wrong constituents already built.

Two details go beyond that statement.  Constituents are counted as
multisets, so X(X(a)) needs two X over the same span.  And because unary
reductions are capped, the gold constituents still missing over the span of
the top stack item compete for the remaining unary budget of that item.
"""

from __future__ import annotations

import random
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .transitions import (FINISH_KIND, REDUCE_KIND, SHIFT_KIND, Configuration,
                          NonBinarySystem, Transition)
from .treebank import DEFAULT_UNARY_CAP, Constituent, Tree, decompose, unary_chain_length

__all__ = [
    "GoldSet", "ReachabilityReport", "OracleError", "BruteForceLimitExceeded",
    "is_reachable", "loss", "transition_cost", "zero_cost_transitions",
    "brute_force_min_loss", "BruteForce", "ExplorationPolicy", "explore", "best_scored",
]


class OracleError(RuntimeError):
    pass


class BruteForceLimitExceeded(RuntimeError):
    pass


class GoldSet:
    """Gold constituents of one sentence, indexed by span."""

    def __init__(self, constituents: Mapping[Constituent, int], n: int, max_unary: int | None = None):
        self.counts = Counter({Constituent(*k): v for k, v in constituents.items() if v > 0})
        self.n = n
        self.by_span: dict[tuple[int, int], Counter] = defaultdict(Counter)
        for (x, l, r), v in self.counts.items():
            if not 0 <= l < r <= n:
                raise ValueError(f"gold constituent {(x, l, r)} outside [0, {n}]")
            self.by_span[(l, r)][x] += v
        self.by_span = dict(self.by_span)
        spans = sorted(self.by_span, key=lambda s: (s[0], -s[1]))
        open_ends: list[int] = []
        for l, r in spans:
            while open_ends and open_ends[-1] <= l:
                open_ends.pop()
            if open_ends and r > open_ends[-1]:
                raise ValueError(f"gold span {(l, r)} crosses another constituent")
            open_ends.append(r)
        self.span_size = {s: sum(c.values()) for s, c in self.by_span.items()}
        self.by_left: dict[int, list[tuple[int, int]]] = defaultdict(list)
        for (l, r), size in self.span_size.items():
            self.by_left[l].append((r, size))
        if max_unary is None:
            # longest same-span run, counting only nodes that are unary
            max_unary = max((v - (1 if r - l > 1 else 0) for (l, r), v in self.span_size.items()),
                            default=0)
        self.max_unary = max_unary
        self.labels = frozenset(x for x, _, _ in self.counts)

    @classmethod
    def from_tree(cls, tree: Tree) -> "GoldSet":
        return cls(decompose(tree), tree.n, unary_chain_length(tree))

    def __len__(self):
        return sum(self.counts.values())

    def size_right_of(self, l: int, j: int, strict: bool) -> int:
        """Gold constituents with left end l and right end >= j (> j if strict)."""
        return sum(size for r, size in self.by_left.get(l, ()) if r > j or (r == j and not strict))


@dataclass
class ReachabilityReport:
    reachable: Counter = field(default_factory=Counter)
    unreachable: Counter = field(default_factory=Counter)
    false_positives: Counter = field(default_factory=Counter)

    @property
    def loss(self) -> int:
        return sum(self.unreachable.values()) + sum(self.false_positives.values())


def is_reachable(c: Configuration, g: Constituent) -> bool:
    """The three per-constituent conditions, ignoring multiplicities."""
    x, l, r = g
    j = c.i
    if c.built_counts[Constituent(x, l, r)] > 0:
        return True
    if j <= l < r:
        return True
    return j <= r and any(item.l == l for item in c.stack)


def _check_cap(gold: GoldSet, unary_cap: int):
    if gold.max_unary > unary_cap:
        raise ValueError(f"gold tree has unary chains of length {gold.max_unary}, "
                         f"above the cap {unary_cap}")


def _top_state(c: Configuration, gold: GoldSet, unary_cap: int):
    """Missing gold count over the top span and the unary budget left there."""
    top = c.stack[-1]
    wanted = gold.by_span.get((top.l, top.r))
    if not wanted:
        return 0, unary_cap - top.unary, wanted
    have = Counter(top.chain)
    missing = sum(max(0, v - have[x]) for x, v in wanted.items())
    return missing, unary_cap - top.unary, wanted


def loss(c: Configuration, gold: GoldSet, unary_cap: int = DEFAULT_UNARY_CAP,
         stack_condition: bool = True) -> ReachabilityReport:
    """Reachable / unreachable gold constituents and wrong built ones.

    ``stack_condition=False`` drops the stack left-end condition; it exists
    only so audits can check that they catch a broken oracle.
    """
    _check_cap(gold, unary_cap)
    built = c.built_counts
    report = ReachabilityReport()
    for x, v in built.items():
        extra = v - gold.counts.get(x, 0)
        if extra > 0:
            report.false_positives[x] = extra
    j = c.i
    lefts = {item.l for item in c.stack}
    top_span = (c.stack[-1].l, j) if c.stack else None
    budget = unary_cap - c.stack[-1].unary if c.stack else 0
    for (l, r), labels in gold.by_span.items():
        missing = {}
        for x in sorted(labels):
            key = Constituent(x, l, r)
            have = min(labels[x], built.get(key, 0))
            if have:
                report.reachable[key] += have
            if labels[x] > have:
                missing[key] = labels[x] - have
        if not missing:
            continue
        if c.finished:
            room = 0
        elif (l, r) == top_span:
            room = budget
        elif j <= l or (stack_condition and l in lefts and j <= r):
            room = sum(missing.values())
        else:
            room = 0
        for key, m in missing.items():
            take = min(m, room)
            room -= take
            if take:
                report.reachable[key] += take
            if m > take:
                report.unreachable[key] += m - take
    return report


def transition_cost(c: Configuration, t: Transition, gold: GoldSet,
                    unary_cap: int = DEFAULT_UNARY_CAP) -> int:
    """loss(apply(c, t)) - loss(c), computed from the affected spans only.

    ``t`` must be legal in ``c``.
    """
    j = c.i
    stack = c.stack
    if t.kind == SHIFT_KIND:
        if not stack:
            return 0
        cost = sum(gold.span_size.get((item.l, j), 0) for item in stack[:-1])
        missing, budget, _ = _top_state(c, gold, unary_cap)
        return cost + min(missing, budget)
    if t.kind == FINISH_KIND:
        missing, budget, _ = _top_state(c, gold, unary_cap)
        return min(missing, budget)
    if t.kind != REDUCE_KIND:
        raise ValueError(f"no dynamic oracle for {t}")
    k = t.arity
    if k == 1:
        missing, budget, wanted = _top_state(c, gold, unary_cap)
        if wanted and wanted[t.label] > stack[-1].chain.count(t.label):
            return 0
        return 1 + (1 if missing >= budget else 0)
    popped = stack[-k:]
    cost = 0
    for item in popped[1:-1]:
        cost += gold.size_right_of(item.l, j, strict=False)
    missing, budget, _ = _top_state(c, gold, unary_cap)
    cost += gold.size_right_of(popped[-1].l, j, strict=True) + min(missing, budget)
    new_span = (popped[0].l, j)
    size = gold.span_size.get(new_span, 0)
    wanted = gold.by_span.get(new_span)
    if wanted and wanted[t.label] > 0:
        cost += max(0, size - 1 - unary_cap)
    else:
        cost += 1 + max(0, size - unary_cap)
    return cost


def _system_for(gold: GoldSet, system: NonBinarySystem | None) -> NonBinarySystem:
    return system if system is not None else NonBinarySystem(labels=gold.labels)


def zero_cost_transitions(c: Configuration, gold: GoldSet,
                          system: NonBinarySystem | None = None) -> list[Transition]:
    """Legal transitions that keep the loss unchanged, in canonical order."""
    system = _system_for(gold, system)
    _check_cap(gold, system.unary_cap)
    return [t for t in system.legal_transitions(c)
            if transition_cost(c, t, gold, system.unary_cap) == 0]


# ---------------------------------------------------------------------------
# exhaustive search, used only to check the closed form

class BruteForce:
    """Minimum final Hamming loss over every legal completion.

    The search runs its own compact simulation of the transition rules on
    an abstract state: the left ends of the stack items, the buffer index,
    the labels stacked over the top span and the unary count there.  Stack
    labels below the top cannot influence anything that follows, so the
    abstraction is exact.  A span's contribution to the loss is settled as
    soon as it stops being the top span, since no later constituent can
    share it.
    """

    def __init__(self, gold: GoldSet, system: NonBinarySystem | None = None,
                 depth_limit: int | None = None):
        self.gold = gold
        self.system = _system_for(gold, system)
        self.depth_limit = depth_limit
        self.cap = self.system.unary_cap
        if self.system.inventory is not None:
            self._reduces = sorted(self.system.inventory, key=lambda p: (p[1], p[0]))
        elif self.system.labels is not None:
            self._reduces = None
        else:
            raise ValueError("brute force needs a finite label set")
        self._memo: dict = {}

    def _span_cost(self, span, labels) -> int:
        wanted = self.gold.by_span.get(span)
        have = Counter(labels)
        if not wanted:
            return sum(have.values())
        keys = set(wanted) | set(have)
        return sum(abs(wanted.get(x, 0) - have.get(x, 0)) for x in keys) - sum(wanted.values())

    def _reduce_options(self, depth: int):
        if self._reduces is not None:
            return [(x, k) for x, k in self._reduces if k <= depth]
        return [(x, k) for k in range(1, depth + 1) for x in self.system.labels]

    def _future(self, lefts: tuple, j: int, unary: int, chain: tuple, token: bool) -> int:
        key = (lefts, j, unary, chain, token)
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        n = self.gold.n
        settle = self._span_cost((lefts[-1], j), chain) if lefts else 0
        best = None
        if j < n:
            best = settle + self._future(lefts + (j,), j + 1, 0, (), True)
        if j == n and len(lefts) == 1 and not token:
            if best is None or settle < best:
                best = settle
        for x, k in self._reduce_options(len(lefts)):
            if k == 1:
                if unary >= self.cap:
                    continue
                value = self._future(lefts, j, unary + 1, tuple(sorted(chain + (x,))), False)
            else:
                value = settle + self._future(lefts[:-k] + (lefts[-k],), j, 0, (x,), False)
            if best is None or value < best:
                best = value
        if best is None:
            raise OracleError("dead end: no legal transition from a non-terminal configuration")
        self._memo[key] = best
        return best

    def _max_remaining(self, c: Configuration) -> int:
        cap = self.cap
        shifts = c.n - c.i
        merges = max(0, len(c.stack) + shifts - 1)
        top_room = cap - c.stack[-1].unary if c.stack else 0
        return shifts + merges + top_room + cap * (shifts + merges) + 1

    def min_loss(self, c: Configuration) -> int:
        if c.n != self.gold.n:
            raise ValueError("configuration and gold set disagree on sentence length")
        if self.depth_limit is not None and not c.finished and self._max_remaining(c) > self.depth_limit:
            raise BruteForceLimitExceeded(
                f"completions may need {self._max_remaining(c)} transitions, "
                f"limit is {self.depth_limit}")
        by_span: dict = defaultdict(list)
        node = c.built_list
        while node is not None:
            x, l, r = node.item
            by_span[(l, r)].append(x)
            node = node.prev
        top = c.stack[-1] if c.stack else None
        live = (top.l, top.r) if top is not None and not c.finished else None
        total = len(self.gold)
        for span, labels in by_span.items():
            if span != live:
                total += self._span_cost(span, labels)
        if c.finished:
            return total
        lefts = tuple(item.l for item in c.stack)
        if top is None:
            return total + self._future(lefts, c.i, 0, (), False)
        return total + self._future(lefts, c.i, top.unary, tuple(sorted(top.chain)), top.is_token)


def brute_force_min_loss(c: Configuration, gold: GoldSet, depth_limit: int | None = None,
                         system: NonBinarySystem | None = None) -> int:
    return BruteForce(gold, system, depth_limit).min_loss(c)


# ---------------------------------------------------------------------------
# exploration

@dataclass(frozen=True)
class ExplorationPolicy:
    """``margin`` is the aggressive criterion (follow the best wrong
    transition when it scores within ``margin`` of the best correct one);
    ``probability`` the regular one (follow it with this probability when it
    outscores the best correct one)."""

    margin: float | None = None
    probability: float | None = None

    @classmethod
    def parse(cls, spec: str) -> "ExplorationPolicy":
        """``"aggr=1.0,reg=0.1"``, ``"aggr-1.0|reg-0.1"``, ``"reg-0.2"`` or ``"none"``."""
        margin = probability = None
        spec = spec.strip().lower()
        if spec in ("", "none"):
            return cls()
        for part in spec.replace("∨", ",").replace("|", ",").split(","):
            part = part.strip()
            if not part:
                continue
            for sep in ("=", "-"):
                if sep in part:
                    name, value = part.split(sep, 1)
                    break
            else:
                raise ValueError(f"bad exploration term {part!r}")
            if name == "aggr":
                margin = float(value)
            elif name == "reg":
                probability = float(value)
            else:
                raise ValueError(f"unknown exploration criterion {name!r}")
        if probability is not None and not 0.0 <= probability <= 1.0:
            raise ValueError("regular exploration probability must lie in [0, 1]")
        return cls(margin, probability)

    def __str__(self):
        parts = []
        if self.margin is not None:
            parts.append(f"aggr-{self.margin:g}")
        if self.probability is not None:
            parts.append(f"reg-{self.probability:g}")
        return " | ".join(parts) or "none"


def best_scored(candidates: Sequence[Transition], scores: Mapping[Transition, float]) -> Transition:
    """Highest score; ties go to the canonically smallest transition."""
    return min(candidates, key=lambda t: (-scores.get(t, 0.0), t.sort_key))


def choose(scores: Mapping[Transition, float], legal: Sequence[Transition],
           zero: Sequence[Transition], policy: ExplorationPolicy,
           rng: random.Random) -> Transition:
    if not zero:
        raise OracleError("no zero-cost transition")
    z = best_scored(zero, scores)
    zero_set = set(zero)
    wrong = [t for t in legal if t not in zero_set]
    if not wrong:
        return z
    w = best_scored(wrong, scores)
    sz, sw = scores.get(z, 0.0), scores.get(w, 0.0)
    if policy.margin is not None and sw >= sz - policy.margin:
        return w
    if policy.probability is not None and sw > sz and rng.random() < policy.probability:
        return w
    return z


def explore(c: Configuration, scores: Mapping[Transition, float], gold: GoldSet,
            policy: ExplorationPolicy, rng: random.Random,
            system: NonBinarySystem | None = None) -> Transition:
    system = _system_for(gold, system)
    legal = system.legal_transitions(c)
    if not legal:
        raise OracleError("no legal transition")
    return choose(scores, legal, zero_cost_transitions(c, gold, system), policy, rng)
