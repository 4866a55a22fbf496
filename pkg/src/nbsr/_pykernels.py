"""Numpy versions of the compiled kernels; same hashing, same results."""

from __future__ import annotations

import numpy as np

_K0 = np.uint64(0x9E3779B97F4A7C15)
_K1 = np.uint64(0xBF58476D1CE4E5B9)
_K2 = np.uint64(0x94D049BB133111EB)
_S30, _S27, _S31 = np.uint64(30), np.uint64(27), np.uint64(31)


def _mix(f, t):
    with np.errstate(over="ignore"):
        z = (np.asarray(f, dtype=np.uint64) * _K0) ^ np.asarray(t, dtype=np.uint64)
        z = (z ^ (z >> _S30)) * _K1
        z = (z ^ (z >> _S27)) * _K2
    return z ^ (z >> _S31)


def bucket(f: int, t: int, mask: int) -> int:
    return int(_mix(np.uint64(f), np.uint64(t)) & np.uint64(mask))


def score(weights, feats, trans, mask, out):
    if len(trans) == 0:
        return
    idx = _mix(feats[:, None], trans[None, :]) & np.uint64(mask)
    vals = weights[idx]
    # accumulate row by row so the float sums match the compiled loop
    acc = np.zeros(len(trans))
    for row in vals:
        acc += row
    out[:] = acc


def update(weights, totals, feats, good, bad, mask, step):
    m = np.uint64(mask)
    for f in feats:
        b = int(_mix(f, np.uint64(good)) & m)
        weights[b] += 1.0
        totals[b] += step
        b = int(_mix(f, np.uint64(bad)) & m)
        weights[b] -= 1.0
        totals[b] -= step
