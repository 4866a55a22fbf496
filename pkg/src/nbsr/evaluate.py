"""Labeled bracketing scores, arity buckets, transition counts and timing."""

from __future__ import annotations

import gc
import time
from collections import Counter
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .transitions import count_transitions, static_oracle_bin
from .treebank import HeadRuleTable, Tree, binarize, decompose, iter_constituent_arities

MAX_ARITY_BUCKET = 5


class EvalError(ValueError):
    pass


def prf(matched: int, gold: int, predicted: int) -> tuple[float, float, float]:
    """Precision, recall and F1 as percentages."""
    p = 100.0 * matched / predicted if predicted else 0.0
    r = 100.0 * matched / gold if gold else 0.0
    f = 2 * p * r / (p + r) if p + r else 0.0
    return p, r, f


@dataclass
class BucketScore:
    matched: int
    gold: int
    predicted: int

    @property
    def scores(self) -> tuple[float, float, float]:
        return prf(self.matched, self.gold, self.predicted)

    @property
    def f1(self) -> float:
        return self.scores[2]


@dataclass
class EvalResult:
    precision: float
    recall: float
    f1: float
    matched: int
    gold: int
    predicted: int
    sentences: int
    by_arity: dict[int, BucketScore] = field(default_factory=dict)
    transitions_per_sentence: float | None = None
    sentences_per_second: float | None = None

    def to_records(self) -> list[dict]:
        out = [{"metric": k, "value": getattr(self, k)} for k in
               ("precision", "recall", "f1", "matched", "gold", "predicted", "sentences",
                "transitions_per_sentence", "sentences_per_second")
               if getattr(self, k) is not None]
        for arity, b in sorted(self.by_arity.items()):
            p, r, f = b.scores
            out.append({"metric": "arity", "arity": _bucket_name(arity), "precision": p,
                        "recall": r, "f1": f, **asdict(b)})
        return out

    def format(self) -> str:
        lines = [f"sentences  {self.sentences}",
                 f"brackets   matched {self.matched}  gold {self.gold}  predicted {self.predicted}",
                 f"LP {self.precision:6.2f}  LR {self.recall:6.2f}  F1 {self.f1:6.2f}"]
        if self.transitions_per_sentence is not None:
            lines.append(f"tran./sent. {self.transitions_per_sentence:.2f}")
        if self.sentences_per_second is not None:
            lines.append(f"sent./s.    {self.sentences_per_second:.1f}")
        if self.by_arity:
            lines.append("arity   gold  pred  match      P       R      F1")
            for arity, b in sorted(self.by_arity.items()):
                p, r, f = b.scores
                lines.append(f"{_bucket_name(arity):>5} {b.gold:6d} {b.predicted:5d} {b.matched:6d} "
                             f"{p:7.2f} {r:7.2f} {f:7.2f}")
        return "\n".join(lines)


def _bucket_name(arity: int) -> str:
    return f"{arity}+" if arity >= MAX_ARITY_BUCKET else str(arity)


def _check_aligned(gold: Sequence[Tree], pred: Sequence[Tree]) -> None:
    if len(gold) != len(pred):
        raise EvalError(f"{len(gold)} gold trees but {len(pred)} predicted trees")
    for i, (g, p) in enumerate(zip(gold, pred)):
        if g.n != p.n:
            raise EvalError(f"sentence {i}: gold has {g.n} tokens, prediction has {p.n}")


def _arity_brackets(tree: Tree) -> Counter:
    return Counter((c, min(k, MAX_ARITY_BUCKET)) for c, k in iter_constituent_arities(tree))


def arity_f1(gold: Sequence[Tree], pred: Sequence[Tree]) -> dict[int, BucketScore]:
    """Scores per child-count bucket (5 means five or more).  A bracket
    counts as matched in a bucket only when label, span and bucket agree."""
    _check_aligned(gold, pred)
    out: dict[int, BucketScore] = {}
    for g, p in zip(gold, pred):
        gb, pb = _arity_brackets(g), _arity_brackets(p)
        for (_, arity), k in gb.items():
            out.setdefault(arity, BucketScore(0, 0, 0)).gold += k
        for (_, arity), k in pb.items():
            out.setdefault(arity, BucketScore(0, 0, 0)).predicted += k
        for (_, arity), k in (gb & pb).items():
            out[arity].matched += k
    return out


def evaluate(gold: Sequence[Tree], pred: Sequence[Tree], by_arity: bool = False) -> EvalResult:
    _check_aligned(gold, pred)
    matched = n_gold = n_pred = 0
    for g, p in zip(gold, pred):
        gb, pb = decompose(g), decompose(p)
        matched += sum((gb & pb).values())
        n_gold += sum(gb.values())
        n_pred += sum(pb.values())
    p, r, f = prf(matched, n_gold, n_pred)
    result = EvalResult(p, r, f, matched, n_gold, n_pred, len(gold))
    if by_arity:
        result.by_arity = arity_f1(gold, pred)
    return result


@dataclass
class TransitionStats:
    system: str
    per_sentence: list[int]

    @property
    def mean(self) -> float:
        return sum(self.per_sentence) / len(self.per_sentence) if self.per_sentence else 0.0


def stats(corpus: Sequence[Tree], system: str = "nonbinary",
          rules: HeadRuleTable | None = None) -> TransitionStats:
    """Oracle derivation length of each tree under the given system."""
    if system == "nonbinary":
        return TransitionStats(system, [count_transitions(t) for t in corpus])
    if system == "binary":
        rules = rules or HeadRuleTable.english()
        return TransitionStats(system, [len(static_oracle_bin(binarize(t, rules))) for t in corpus])
    raise ValueError(f"unknown system {system!r}")


@dataclass
class TimingProfile:
    records: list[tuple[int, float]]
    slope: float | None = None
    intercept: float | None = None
    r2: float | None = None

    def to_records(self) -> list[dict]:
        return [{"length": n, "seconds": s} for n, s in self.records]


def linear_fit(xs: Sequence[float], ys: Sequence[float]) -> tuple[float, float, float]:
    """Least-squares slope, intercept and coefficient of determination."""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 - float((resid ** 2).sum()) / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(intercept), r2


def timing_profile(model, sentences: Sequence[Sequence], repeats: int = 1) -> TimingProfile:
    """Wall time of greedy decoding per sentence (best of ``repeats``)."""
    from .trainer import decode

    system = model.system()
    sentences = list(sentences)
    # like timeit: collector pauses are noise, not decoding cost
    was_enabled = gc.isenabled()
    gc.disable()
    best = [float("inf")] * len(sentences)
    try:
        # interleave repeats so a slow stretch of the machine hits every length
        for _ in range(max(1, repeats)):
            for k, s in enumerate(sentences):
                t0 = time.perf_counter()
                decode(model, s, system)
                best[k] = min(best[k], time.perf_counter() - t0)
    finally:
        if was_enabled:
            gc.enable()
    records = [(len(s), t) for s, t in zip(sentences, best)]
    profile = TimingProfile(records)
    if len({n for n, _ in records}) >= 2:
        profile.slope, profile.intercept, profile.r2 = linear_fit(*zip(*records))
    return profile
