"""Averaged perceptron over hashed (feature, transition) buckets."""

from __future__ import annotations

import json
import struct
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import kernels
from .features import TEMPLATE_SET, featurize, transition_id
from .transitions import (BinarySystem, Configuration, NonBinarySystem, Transition,
                          LEFT_KIND, RIGHT_KIND, REDUCE_KIND, UNARY_KIND)
from .treebank import DEFAULT_UNARY_CAP

MAGIC = b"NBSRMODL"
FORMAT_VERSION = 1
DEFAULT_BITS = 22


class ModelFormatError(ValueError):
    pass


class LinearModel:
    """Weights for every (feature, transition) pair, folded into ``2**bits``
    buckets.  ``totals`` and ``step`` carry the averaging accumulators."""

    def __init__(self, transitions: Iterable[Transition], bits: int = DEFAULT_BITS,
                 system: str = "nonbinary", unary_cap: int = DEFAULT_UNARY_CAP,
                 root_label: str = "S"):
        if not 1 <= bits <= 40:
            raise ValueError("bits must be in [1, 40]")
        self.transitions = sorted(set(transitions), key=lambda t: t.sort_key)
        self.bits = bits
        self.mask = (1 << bits) - 1
        self.system_name = system
        self.unary_cap = unary_cap
        self.root_label = root_label
        self.weights = np.zeros(1 << bits)
        self.totals = np.zeros(1 << bits)
        self.step = 1
        self._ids = self._transition_ids(self.transitions)

    @staticmethod
    def _transition_ids(ts: Sequence[Transition]) -> np.ndarray:
        return np.fromiter((transition_id(t) for t in ts), dtype=np.uint64, count=len(ts))

    def system(self):
        """The transition system the model decodes with."""
        if self.system_name == "nonbinary":
            inv = [(t.label, t.arity) for t in self.transitions if t.kind == REDUCE_KIND]
            return NonBinarySystem(inventory=inv, unary_cap=self.unary_cap)
        by_kind = {k: [t.label for t in self.transitions if t.kind == k]
                   for k in (LEFT_KIND, RIGHT_KIND, UNARY_KIND)}
        return BinarySystem(by_kind[LEFT_KIND], by_kind[RIGHT_KIND], by_kind[UNARY_KIND],
                            self.unary_cap)

    def scores(self, feats: np.ndarray, transitions: Sequence[Transition]) -> np.ndarray:
        ids = self._ids if transitions is self.transitions else self._transition_ids(transitions)
        out = np.empty(len(transitions))
        kernels.score(self.weights, feats, ids, self.mask, out)
        return out

    def score_map(self, feats: np.ndarray, transitions: Sequence[Transition]) -> dict:
        return dict(zip(transitions, self.scores(feats, transitions).tolist()))

    def update(self, feats: np.ndarray, correct: Transition, predicted: Transition) -> None:
        if correct == predicted:
            return
        kernels.update(self.weights, self.totals, feats, transition_id(correct),
                       transition_id(predicted), self.mask, float(self.step))

    def tick(self) -> None:
        """Advance the averaging clock by one training instance."""
        self.step += 1

    def averaged(self) -> "LinearModel":
        out = self._empty_like()
        out.weights = self.weights - self.totals / self.step
        return out

    def _empty_like(self) -> "LinearModel":
        out = LinearModel.__new__(LinearModel)
        out.__dict__.update(self.__dict__)
        out.weights = np.zeros(1 << self.bits)
        out.totals = np.zeros(1 << self.bits)
        out.step = 1
        return out

    def header(self) -> dict:
        return {
            "bits": self.bits,
            "root_label": self.root_label,
            "step": self.step,
            "system": self.system_name,
            "templates": TEMPLATE_SET,
            "transitions": [str(t) for t in self.transitions],
            "unary_cap": self.unary_cap,
        }

    def to_bytes(self) -> bytes:
        head = json.dumps(self.header(), sort_keys=True, separators=(",", ":")).encode()
        idx = np.flatnonzero((self.weights != 0) | (self.totals != 0)).astype("<u8")
        parts = [MAGIC, struct.pack("<II", FORMAT_VERSION, len(head)), head,
                 struct.pack("<Q", len(idx)), idx.tobytes(),
                 self.weights[idx].astype("<f8").tobytes(),
                 self.totals[idx].astype("<f8").tobytes()]
        return b"".join(parts)

    @classmethod
    def from_bytes(cls, data: bytes) -> "LinearModel":
        if data[:len(MAGIC)] != MAGIC:
            raise ModelFormatError("not a model file")
        pos = len(MAGIC)
        try:
            version, hlen = struct.unpack_from("<II", data, pos)
        except struct.error as e:
            raise ModelFormatError("truncated model file") from e
        if version != FORMAT_VERSION:
            raise ModelFormatError(f"model format version {version}, expected {FORMAT_VERSION}")
        pos += 8
        try:
            head = json.loads(data[pos:pos + hlen])
            pos += hlen
            (count,) = struct.unpack_from("<Q", data, pos)
        except (ValueError, struct.error) as e:
            raise ModelFormatError("corrupt model header") from e
        pos += 8
        if head.get("templates") != TEMPLATE_SET:
            raise ModelFormatError(f"feature templates {head.get('templates')!r} not supported")
        if len(data) != pos + 24 * count:
            raise ModelFormatError("model file size does not match its header")
        idx = np.frombuffer(data, "<u8", count, pos)
        w = np.frombuffer(data, "<f8", count, pos + 8 * count)
        u = np.frombuffer(data, "<f8", count, pos + 16 * count)
        model = cls([Transition.parse(t) for t in head["transitions"]], head["bits"],
                    head["system"], head["unary_cap"], head["root_label"])
        if count and idx.max() > model.mask:
            raise ModelFormatError("weight index out of range")
        model.weights[idx] = w
        model.totals[idx] = u
        model.step = head["step"]
        return model

    def save(self, path) -> None:
        Path(path).write_bytes(self.to_bytes())

    @classmethod
    def load(cls, path) -> "LinearModel":
        return cls.from_bytes(Path(path).read_bytes())


def score_all(model: LinearModel, c: Configuration) -> Mapping[Transition, float]:
    """Score of every inventory transition; legality is the caller's business."""
    return model.score_map(featurize(c), model.transitions)


def score(model: LinearModel, c: Configuration, transitions: Sequence[Transition]) -> dict:
    return model.score_map(featurize(c), list(transitions))


def update(model: LinearModel, c: Configuration, correct: Transition,
           predicted: Transition) -> LinearModel:
    model.update(featurize(c), correct, predicted)
    return model
