"""Compare the compiled kernels with the numpy fallback.

    python benchmarks/bench_kernels.py --rounds 2000
"""

import argparse
import random
import time

import numpy as np

from nbsr import _pykernels
from nbsr.features import featurize, transition_id
from nbsr.synth import toy_corpus
from nbsr.transitions import apply, initial, static_oracle_nb

try:
    from nbsr import _kernels
except ImportError:
    _kernels = None


def workload(sentences: int, seed: int):
    """Feature arrays of real parser states plus a transition inventory."""
    feats, inventory = [], set()
    for tree in toy_corpus(sentences, seed):
        c = initial(tree.tokens())
        for t in static_oracle_nb(tree):
            feats.append(featurize(c))
            inventory.add(t)
            c = apply(c, t)
    ids = np.array(sorted(transition_id(t) for t in inventory), dtype=np.uint64)
    return feats, ids


def run(impl, feats, ids, bits: int, rounds: int, seed: int) -> tuple[float, float, np.ndarray]:
    mask = (1 << bits) - 1
    w = np.zeros(1 << bits)
    u = np.zeros(1 << bits)
    out = np.empty(len(ids))
    rng = random.Random(seed)
    t0 = time.perf_counter()
    for k in range(rounds):
        f = feats[k % len(feats)]
        impl.update(w, u, f, int(ids[rng.randrange(len(ids))]), int(ids[rng.randrange(len(ids))]),
                    mask, float(k + 1))
    t_update = time.perf_counter() - t0
    t0 = time.perf_counter()
    for k in range(rounds):
        impl.score(w, feats[k % len(feats)], ids, mask, out)
    t_score = time.perf_counter() - t0
    return t_update, t_score, w


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--rounds", type=int, default=2000)
    ap.add_argument("--bits", type=int, default=22)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    feats, ids = workload(50, args.seed)
    print(f"{len(feats)} states, {len(ids)} transitions, {feats[0].size} features per state")
    rows = [("python", _pykernels)] + ([("cython", _kernels)] if _kernels else [])
    results = {}
    for name, impl in rows:
        tu, ts, w = run(impl, feats, ids, args.bits, args.rounds, args.seed)
        results[name] = (tu, ts, w)
        print(f"{name:7s} update {1e6 * tu / args.rounds:8.1f} us/call   "
              f"score {1e6 * ts / args.rounds:8.1f} us/call")
    if "cython" in results:
        same = np.array_equal(results["python"][2], results["cython"][2])
        pu, ps, _ = results["python"]
        cu, cs, _ = results["cython"]
        print(f"speedup update x{pu / cu:.1f}  score x{ps / cs:.1f}  identical weights: {same}")
    else:
        print("compiled kernels not built")


if __name__ == "__main__":
    main()
