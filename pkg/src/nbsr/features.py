"""Feature templates over parser configurations.

Each feature is a ``template=value`` string hashed to a 64-bit id: the
template index sits in the high 32 bits and the CRC-32 of the string in the
low 32, so the ids are stable across processes and platforms.
"""

from __future__ import annotations

import zlib

import numpy as np

from .transitions import Configuration, StackItem

TEMPLATE_SET = "nbsr-v1"
NONE = "<none>"


def _width_bucket(w: int) -> str:
    if w <= 4:
        return str(w)
    if w <= 8:
        return "5-8"
    if w <= 16:
        return "9-16"
    return "17+"


def _describe(c: Configuration, item: StackItem | None):
    """label, first word, last word, first POS, last POS, width bucket."""
    if item is None:
        return NONE, NONE, NONE, NONE, NONE, NONE
    first = c.sentence[item.l]
    last = c.sentence[item.r - 1]
    label = "t:" + first.pos if item.is_token else item.label
    return label, first.form.lower(), last.form.lower(), first.pos, last.pos, _width_bucket(item.r - item.l)


def feature_strings(c: Configuration) -> list[str]:
    stack = c.stack
    s = [_describe(c, stack[-k] if len(stack) >= k else None) for k in (1, 2, 3)]
    b = []
    for k in range(3):
        if c.i + k < c.n:
            tok = c.sentence[c.i + k]
            b.append((tok.form.lower(), tok.pos))
        else:
            b.append((NONE, NONE))
    hist = [str(t) for t in c.history[::-1]] + [NONE, NONE]
    top = stack[-1] if stack else None
    arity = f"{top.arity}/{top.unary}" if top is not None else NONE

    out = ["bias"]
    for k, (label, fw, lw, fp, lp, width) in enumerate(s):
        out += [f"s{k}.l={label}", f"s{k}.lw={lw}", f"s{k}.lp={lp}"]
        if k < 2:
            out += [f"s{k}.fw={fw}", f"s{k}.fp={fp}", f"s{k}.wd={width}",
                    f"s{k}.l.wd={label}|{width}", f"s{k}.l.lw={label}|{lw}"]
    for k, (w, p) in enumerate(b):
        out += [f"b{k}.w={w}", f"b{k}.p={p}"]
    out += [f"a1={hist[0]}", f"a2={hist[1]}", f"a12={hist[0]}|{hist[1]}", f"s0.ar={arity}",
            f"depth={min(len(stack), 6)}"]
    s0, s1, s2 = (x[0] for x in s)
    out += [
        f"s0s1={s0}|{s1}", f"s0s1s2={s0}|{s1}|{s2}", f"s0b0={s0}|{b[0][1]}",
        f"s1b0={s1}|{b[0][1]}", f"s0s1b0={s0}|{s1}|{b[0][1]}", f"b0b1={b[0][1]}|{b[1][1]}",
        f"s0a1={s0}|{hist[0]}", f"s0ar.b0={arity}|{b[0][1]}", f"s0w.b0w={s[0][2]}|{b[0][0]}",
        f"s0l.b0w={s0}|{b[0][0]}", f"s1lw.s0lw={s[1][2]}|{s[0][2]}", f"s0ar.s0={arity}|{s0}",
        f"end={c.i == c.n}|{min(len(stack), 4)}",
    ]
    return out


def hash_strings(strings: list[str]) -> np.ndarray:
    out = np.empty(len(strings), dtype=np.uint64)
    for k, s in enumerate(strings):
        name = s.split("=", 1)[0]
        out[k] = (zlib.crc32(name.encode()) << 32) | zlib.crc32(s.encode("utf-8"))
    return out


def featurize(c: Configuration) -> np.ndarray:
    """Sorted, de-duplicated 64-bit feature ids for a configuration."""
    return np.unique(hash_strings(feature_strings(c)))


def transition_id(t) -> int:
    return zlib.crc32(str(t).encode("utf-8")) | (1 << 32)
