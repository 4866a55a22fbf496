"""Greedy training with the static or the dynamic oracle, and greedy decoding."""

from __future__ import annotations

import logging
import random
import time
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Iterable, NamedTuple, Sequence

from .features import featurize
from .oracle import ExplorationPolicy, GoldSet, OracleError, best_scored, choose, loss, transition_cost
from .scorer import DEFAULT_BITS, LinearModel
from .transitions import (FINISH, SHIFT, BinarySystem, NonBinarySystem, Transition, extract_tree,
                          initial, reduce, static_oracle_bin, static_oracle_nb)
from .treebank import (DEFAULT_UNARY_CAP, TEMP_SUFFIX, HeadRuleTable, Token, Tree, TreeError,
                       binarize, check_unary_cap, unbinarize)

log = logging.getLogger(__name__)

SYSTEMS = ("nonbinary", "binary")
ORACLES = ("static", "dynamic")


class ConfigError(ValueError):
    pass


@dataclass
class TrainConfig:
    oracle: str = "static"
    system: str = "nonbinary"
    policy: ExplorationPolicy = field(default_factory=ExplorationPolicy)
    epochs: int = 10
    seed: int = 0
    unary_cap: int = DEFAULT_UNARY_CAP
    bits: int = DEFAULT_BITS
    inventory: Sequence[Transition] | None = None
    head_rules: HeadRuleTable | None = None
    check_monotone: bool = False

    def validate(self) -> None:
        if self.system not in SYSTEMS:
            raise ConfigError(f"unknown system {self.system!r}")
        if self.oracle not in ORACLES:
            raise ConfigError(f"unknown oracle {self.oracle!r}")
        if self.oracle == "dynamic" and self.system != "nonbinary":
            raise ConfigError("the dynamic oracle exists only for the non-binary system")
        if self.epochs < 0:
            raise ConfigError("epochs must be >= 0")
        if self.unary_cap < 0:
            raise ConfigError("unary cap must be >= 0")


@dataclass
class EpochStats:
    epoch: int
    transitions: int
    correct: int
    updates: int
    seconds: float

    @property
    def accuracy(self) -> float:
        return 100.0 * self.correct / self.transitions if self.transitions else 0.0


@dataclass
class TrainReport:
    oracle: str
    system: str
    policy: str
    sentences: int = 0
    skipped: int = 0
    epochs: list[EpochStats] = field(default_factory=list)

    def to_dict(self) -> dict:
        d = asdict(self)
        for e, stats in zip(d["epochs"], self.epochs):
            e["accuracy"] = round(stats.accuracy, 4)
        return d

    def format(self) -> str:
        lines = [f"oracle={self.oracle} system={self.system} policy={self.policy} "
                 f"sentences={self.sentences} skipped={self.skipped}"]
        for e in self.epochs:
            lines.append(f"epoch {e.epoch:3d}  acc {e.accuracy:6.2f}  updates {e.updates:7d}  "
                         f"{e.seconds:7.2f}s")
        return "\n".join(lines)


class Prepared(NamedTuple):
    tree: Tree
    gold: list[Transition]


def _prepare(corpus: Sequence[Tree], config: TrainConfig, report: TrainReport) -> list[Prepared]:
    out = []
    rules = config.head_rules
    if config.system == "binary" and rules is None:
        rules = HeadRuleTable.english()
    for k, tree in enumerate(corpus):
        try:
            check_unary_cap(tree, config.unary_cap)
            if config.system == "binary":
                gold = static_oracle_bin(binarize(tree, rules))
            else:
                gold = static_oracle_nb(tree)
        except TreeError as e:
            log.warning("skipping tree %d: %s", k, e)
            report.skipped += 1
            continue
        out.append(Prepared(tree, gold))
    return out


def _new_model(data: list[Prepared], corpus: Sequence[Tree], config: TrainConfig) -> LinearModel:
    if config.inventory is not None:
        inventory = set(config.inventory)
    else:
        inventory = {t for p in data for t in p.gold}
    inventory |= {SHIFT, FINISH}
    roots = Counter(t.label for t in corpus)
    root = min(roots, key=lambda x: (-roots[x], x)) if roots else "S"
    return LinearModel(inventory, config.bits, config.system, config.unary_cap, root)


def train(corpus: Sequence[Tree], config: TrainConfig) -> tuple[LinearModel, TrainReport]:
    """Train and return the averaged model with its report."""
    config.validate()
    report = TrainReport(config.oracle, config.system, str(config.policy))
    data = _prepare(corpus, config, report)
    report.sentences = len(data)
    if not data and config.epochs > 0:
        raise ConfigError("no usable training trees")
    model = _new_model(data, corpus, config)
    rng = random.Random(config.seed)
    order = list(range(len(data)))
    if config.oracle == "static":
        system = model.system()
    else:
        labels = sorted({x.label for p in data for x in p.tree.subtrees()})
        system = NonBinarySystem(labels=labels, unary_cap=config.unary_cap)
    for epoch in range(1, config.epochs + 1):
        t0 = time.perf_counter()
        rng.shuffle(order)
        stats = EpochStats(epoch, 0, 0, 0, 0.0)
        for k in order:
            if config.oracle == "static":
                _static_sentence(model, system, data[k], stats)
            else:
                # one exploration stream per (epoch, sentence), derived from the seed
                sub = random.Random(f"{config.seed}:{epoch}:{k}")
                _dynamic_sentence(model, system, data[k].tree, config, sub, stats)
        stats.seconds = time.perf_counter() - t0
        report.epochs.append(stats)
        log.info("epoch %d: accuracy %.2f, %d updates", epoch, stats.accuracy, stats.updates)
    return model.averaged(), report


def train_static(corpus: Sequence[Tree], config: TrainConfig | None = None) -> LinearModel:
    config = config or TrainConfig()
    if config.oracle != "static":
        raise ConfigError("train_static needs oracle='static'")
    return train(corpus, config)[0]


def train_dynamic(corpus: Sequence[Tree], config: TrainConfig | None = None) -> LinearModel:
    config = config or TrainConfig(oracle="dynamic")
    if config.oracle != "dynamic":
        raise ConfigError("train_dynamic needs oracle='dynamic'")
    return train(corpus, config)[0]


def _static_sentence(model: LinearModel, system, item: Prepared, stats: EpochStats):
    c = initial(item.tree.tokens())
    for gold in item.gold:
        legal = system.legal_transitions(c)
        feats = featurize(c)
        predicted = best_scored(legal, model.score_map(feats, legal))
        stats.transitions += 1
        if predicted == gold:
            stats.correct += 1
        else:
            model.update(feats, gold, predicted)
            stats.updates += 1
        model.tick()
        c = system.apply(c, gold)


def _dynamic_sentence(model: LinearModel, system: NonBinarySystem, tree: Tree,
                      config: TrainConfig, rng: random.Random, stats: EpochStats):
    gold = GoldSet.from_tree(tree)
    cap = config.unary_cap
    c = initial(tree.tokens())
    before = loss(c, gold, cap).loss if config.check_monotone else 0
    while not c.finished:
        legal = system.legal_transitions(c)
        zero = [t for t in legal if transition_cost(c, t, gold, cap) == 0]
        if not zero:
            raise OracleError(f"no zero-cost transition after {c.history} on {tree!r}")
        feats = featurize(c)
        scores = model.score_map(feats, legal)
        predicted = best_scored(legal, scores)
        stats.transitions += 1
        if predicted in zero:
            stats.correct += 1
        else:
            model.update(feats, best_scored(zero, scores), predicted)
            stats.updates += 1
        model.tick()
        c = system.apply(c, choose(scores, legal, zero, config.policy, rng))
        if config.check_monotone:
            after = loss(c, gold, cap).loss
            if after < before:
                raise OracleError(f"loss decreased from {before} to {after}")
            before = after


# ---------------------------------------------------------------------------
# decoding

class ParseResult(NamedTuple):
    tree: Tree
    transitions: list[Transition]
    fallback: bool


def decode(model: LinearModel, sentence: Sequence[Token], system=None) -> ParseResult:
    """Greedy best-first decoding with a forced completion when stuck."""
    system = system or model.system()
    c = initial(sentence)
    n = len(sentence)
    limit = 2 * (n + model.unary_cap * n + 1)
    trace: list[Transition] = []
    fallback = False
    while not c.finished:
        legal = system.legal_transitions(c)
        if not legal or len(trace) >= limit:
            fallback = True
            for t in _completion(c, model.root_label):
                c = system.force(c, t)
                trace.append(t)
            break
        t = best_scored(legal, model.score_map(featurize(c), legal))
        c = system.apply(c, t)
        trace.append(t)
    tree = extract_tree(c)
    if isinstance(system, BinarySystem):
        tree = unbinarize(tree)
    return ParseResult(tree, trace, fallback)


def _completion(c, root: str) -> list[Transition]:
    out = [SHIFT] * (c.n - c.i)
    depth = len(c.stack) + len(out)
    top = c.stack[-1] if c.stack else None
    if depth > 1 or top is None or top.is_token or top.label.endswith(TEMP_SUFFIX) or out:
        out.append(reduce(root, depth))
    out.append(FINISH)
    return out


def parse(model: LinearModel, sentence: Sequence[Token]) -> Tree:
    return decode(model, sentence).tree


def parse_many(model: LinearModel, sentences: Iterable[Sequence[Token]],
               threads: int = 1) -> list[ParseResult]:
    """Decode in input order; the model is only read, so threads may share it."""
    sentences = list(sentences)
    system = model.system()
    if threads <= 1:
        return [decode(model, s, system) for s in sentences]
    with ThreadPoolExecutor(threads) as pool:
        return list(pool.map(lambda s: decode(model, s, system), sentences))
