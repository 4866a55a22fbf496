import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from nbsr.evaluate import (EvalError, arity_f1, evaluate, linear_fit, prf, stats,
                           timing_profile)
from nbsr.scorer import LinearModel
from nbsr.synth import random_tree
from nbsr.transitions import FINISH, SHIFT, reduce
from nbsr.treebank import Token, decompose, read_ptb


def tree(text):
    return read_ptb(text)[0]


def test_identity(example):
    r = evaluate([example], [example], by_arity=True)
    assert (r.precision, r.recall, r.f1) == (100.0, 100.0, 100.0)
    assert all(b.f1 == 100.0 for b in r.by_arity.values())


def test_four_of_five():
    gold = tree("(S (A (X x)) (B (X x)) (C (X x)) (D (X x)))")
    pred = tree("(S (A (X x)) (B (X x)) (C (X x)) (X x))")
    r = evaluate([gold], [pred])
    assert (r.gold, r.predicted, r.matched) == (5, 4, 4)
    assert r.precision == 100.0 and r.recall == 80.0
    assert r.f1 == pytest.approx(2 * 0.8 / 1.8 * 100)
    assert round(r.f1, 2) == 88.89


def test_f1_zero_when_nothing_matches():
    assert prf(0, 3, 2) == (0.0, 0.0, 0.0)
    assert prf(0, 0, 0) == (0.0, 0.0, 0.0)


def test_arity_bucket_mismatch():
    gold = tree("(X (A a) (B b) (C c))")
    pred = tree("(X (Y (A a) (B b)) (C c))")
    buckets = arity_f1([gold], [pred])
    assert buckets[3].gold == 1 and buckets[3].matched == 0
    assert buckets[3].scores[1] == 0.0


def test_arity_counts_preterminals(example):
    buckets = arity_f1([example], [example])
    # S and VP have three children each, NP two, ADVP and ADJP one
    assert {k: b.gold for k, b in buckets.items()} == {1: 2, 2: 1, 3: 2}


def test_arity_five_plus():
    wide = tree("(X " + " ".join(f"(A a{i})" for i in range(7)) + ")")
    assert set(arity_f1([wide], [wide])) == {5}


def test_token_mismatch_names_index(example):
    with pytest.raises(EvalError, match="sentence 1"):
        evaluate([example, example], [example, tree("(S (A a))")])
    with pytest.raises(EvalError):
        evaluate([example], [])


def test_stats_example(example):
    assert stats([example], "nonbinary").mean == 12
    assert stats([example], "binary").mean == 14
    assert stats([tree("(X (A a))")], "nonbinary").mean == 3


def _random_pairs(seed, count=6):
    rng = random.Random(seed)
    gold, pred = [], []
    for _ in range(count):
        n = rng.randint(1, 9)
        g = random_tree(rng, n, ("S", "NP", "VP"))
        p = random_tree(rng, n, ("S", "NP", "VP"))
        gold.append(g)
        pred.append(p)
    return gold, pred


@given(st.integers(0, 10**6))
def test_swap_symmetry(seed):
    gold, pred = _random_pairs(seed)
    a, b = evaluate(gold, pred), evaluate(pred, gold)
    assert a.precision == b.recall and a.recall == b.precision and a.f1 == pytest.approx(b.f1)
    assert 0 <= a.f1 <= 100


@given(st.integers(0, 10**6))
def test_arity_matches_sum(seed):
    gold, pred = _random_pairs(seed)
    buckets = arity_f1(gold, pred)
    total = evaluate(gold, pred)
    assert sum(b.gold for b in buckets.values()) == total.gold
    assert sum(b.predicted for b in buckets.values()) == total.predicted
    assert sum(b.matched for b in buckets.values()) <= total.matched
    same = arity_f1(gold, gold)
    assert sum(b.matched for b in same.values()) == evaluate(gold, gold).matched


@given(st.integers(0, 10**6))
def test_nonbinary_never_longer(seed):
    rng = random.Random(seed)
    t = random_tree(rng, rng.randint(1, 15), ("S", "NP", "VP"))
    nb, bi = stats([t], "nonbinary").mean, stats([t], "binary").mean
    assert nb <= bi
    if any(len(x.children) >= 3 for x in t.subtrees()):
        assert nb < bi


def test_timing_profile_shapes():
    m = LinearModel([SHIFT, FINISH, reduce("X", 2)], bits=10)
    assert timing_profile(m, []).records == []
    sent = [Token("a", "A"), Token("b", "B")]
    p = timing_profile(m, [sent, sent])
    assert [n for n, _ in p.records] == [2, 2]
    assert p.r2 is None


def test_linear_fit_exact():
    slope, intercept, r2 = linear_fit([1, 2, 3, 4], [3, 5, 7, 9])
    assert slope == pytest.approx(2) and intercept == pytest.approx(1) and r2 == pytest.approx(1)


def test_records_output(example):
    r = evaluate([example], [example], by_arity=True)
    recs = r.to_records()
    assert {"metric": "f1", "value": 100.0} in recs
    assert any(x.get("arity") == "3" for x in recs)
    assert "F1 100.00" in r.format()
    assert decompose(example)
