from nbsr.audit import (FAULTS, enumerate_trees, exhaustive_audit, reachable_configurations,
                        sampled_audit)
from nbsr.transitions import NonBinarySystem
from nbsr.treebank import Token, check_unary_cap, write_ptb


def test_enumeration_counts():
    # one word: a chain of 1..3 labels over it, 2 + 4 + 8 trees
    assert len(enumerate_trees(1, ["A", "B"])) == 14
    assert len(enumerate_trees(2, ["A", "B"], extra_unaries=0)) == 2
    assert len(enumerate_trees(3, ["A", "B"], extra_unaries=0)) == 10


def test_enumerated_trees_distinct_and_capped():
    ts = enumerate_trees(3, ["A", "B"], extra_unaries=1)
    assert len({write_ptb(t) for t in ts}) == len(ts)
    for t in ts:
        check_unary_cap(t, 3)


def test_reachable_configurations_depth():
    system = NonBinarySystem(labels=["A"])
    configs = reachable_configurations([Token("a", "A")], system, 2)
    traces = sorted(len(trace) for _, trace in configs)
    assert traces == [0, 1, 2]


def test_exhaustive_small():
    report = exhaustive_audit(max_n=2, depth=6)
    assert report.ok and report.trees == 14 + len(enumerate_trees(2, ["A", "B"], 1))
    assert "0 mismatches" in report.summary()


def test_sampled_small():
    report = sampled_audit(samples=100, seed=3)
    assert report.ok and report.configurations == 100


def test_fault_caught():
    report = sampled_audit(samples=200, seed=0, loss_fn=FAULTS["no-stack-condition"])
    assert not report.ok
    m = report.mismatches[0]
    assert m.loss != m.brute_force and m.transitions
    assert report.to_dict()["mismatch_count"] == len(report.mismatches)
