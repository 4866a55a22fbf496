import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from golden import EXAMPLE_TREE, EXAMPLE_BINARIZED
from strategies import trees
from nbsr.synth import random_tree
from nbsr.treebank import (Constituent, HeadRuleTable, PTBParseError, Token, Tree, TreeError,
                           binarize, check_unary_cap, decompose, read_ptb, unary_chain_length,
                           unbinarize, write_ptb)

ENGLISH = HeadRuleTable.english()


def test_read_example(example):
    assert example.label == "S"
    assert example.span == (0, 6)
    assert [t.form for t in example.tokens()] == ["The", "public", "is", "still", "cautious", "."]
    assert example.tokens()[1] == Token("public", "NN")


def test_minimal_tree():
    (t,) = read_ptb("(X (A a))")
    assert t.label == "X" and t.span == (0, 1)
    assert t.tokens() == [Token("a", "A")]
    assert write_ptb(t) == "(X (A a))"


@pytest.mark.parametrize("text", ["(S (NP", "(S (NP (DT a)))))", "(S ())", "(S (NP (DT a) b))"])
def test_malformed(text):
    with pytest.raises(PTBParseError):
        read_ptb(text)


def test_error_position():
    with pytest.raises(PTBParseError) as err:
        read_ptb("(S (NP (DT a)))\n(S (NP (DT b)) ))")
    assert err.value.line == 2
    assert err.value.column == 17


def test_wrapper_and_multiple_trees():
    ts = read_ptb("( (S (NP (DT a) (NN b))) )\n(S (VP (VB c)))")
    assert [t.label for t in ts] == ["S", "S"]
    assert ts[0].n == 2


def test_empty_label_inside_tree_rejected():
    with pytest.raises(PTBParseError):
        read_ptb("(S ( (NN a)) (VP (VB b)))")


def test_function_tags_and_traces():
    text = "(S (NP-SBJ=1 (-NONE- *T*-1)) (NP-SBJ (NNP John)) (VP (VBD slept)))"
    (t,) = read_ptb(text)
    assert write_ptb(t) == "(S (NP (NNP John)) (VP (VBD slept)))"
    (raw,) = read_ptb(text, strip_functions=False, strip_traces=False)
    assert raw.children[0].label == "NP-SBJ=1"
    assert raw.n == 3


def test_escaped_brackets_preserved():
    text = "(NP (-LRB- -LRB-) (NN x) (-RRB- -RRB-))"
    assert write_ptb(read_ptb(text)[0]) == text


def test_token_validation():
    with pytest.raises(TreeError):
        Token("a b", "NN")
    with pytest.raises(TreeError):
        Token("a(", "NN")


def test_tree_requires_contiguous_children():
    a, b = Token("a", "A"), Token("b", "B")
    inner = Tree("X", [b], 3)
    with pytest.raises(TreeError):
        Tree("S", [a, inner], 0)


def test_decompose_example(example):
    assert set(decompose(example)) == {("S", 0, 6), ("NP", 0, 2), ("VP", 2, 5), ("ADVP", 3, 4),
                                    ("ADJP", 4, 5)}
    assert decompose(read_ptb("(X (A a))")[0]) == {Constituent("X", 0, 1): 1}


def test_decompose_small_binary():
    (t,) = read_ptb("(S (NP (DT a) (NN b)) (VB c))")
    assert set(decompose(t)) == {("S", 0, 3), ("NP", 0, 2)}


def test_decompose_keeps_repeated_unaries():
    (t,) = read_ptb("(X (X (A a)))")
    assert decompose(t)[Constituent("X", 0, 1)] == 2


def test_unary_chain_length():
    (t,) = read_ptb("(S (A (B (C (D d)))) (E e))")
    assert unary_chain_length(t) == 3
    check_unary_cap(t, 3)
    with pytest.raises(TreeError):
        check_unary_cap(t, 2)


def test_binarize_example(example):
    b = binarize(example, ENGLISH)
    assert write_ptb(b) == EXAMPLE_BINARIZED
    heads = {n.label: n.head for n in b.subtrees() if len(n.children) == 2}
    # head children: public, VP*, is, VP, S*
    assert heads == {"S": 1, "NP": 1, "S*": 0, "VP": 0, "VP*": 0}
    assert unbinarize(b) == example


def test_binarize_flat_left_headed():
    (t,) = read_ptb("(X (A a) (B b) (C c) (D d))")
    rules = HeadRuleTable.parse("X left A")
    assert write_ptb(binarize(t, rules)) == "(X (X* (X* (A a) (B b)) (C c)) (D d))"


def test_binarize_head_in_middle():
    (t,) = read_ptb("(X (A a) (B b) (C c) (D d))")
    b = binarize(t, HeadRuleTable.parse("X left B"))
    assert write_ptb(b) == "(X (A a) (X* (X* (B b) (C c)) (D d)))"
    assert unbinarize(b) == t


def test_binarize_already_binary_adds_heads():
    (t,) = read_ptb("(S (NP (DT a) (NN b)) (VP (VB c)))")
    b = binarize(t, ENGLISH)
    assert write_ptb(b) == write_ptb(t)
    assert b.head is not None and b.children[0].head == 1


def test_unbinarize_right_chain():
    (t,) = read_ptb("(X (A a) (X* (B b) (X* (C c) (D d))))")
    assert write_ptb(unbinarize(t)) == "(X (A a) (B b) (C c) (D d))"


def test_unbinarize_plain_tree_is_identity(example):
    assert unbinarize(example) == example


def test_unbinarize_temp_root_rejected():
    (t,) = read_ptb("(X* (A a) (B b))")
    with pytest.raises(TreeError):
        unbinarize(t)


def test_head_rules_default_and_fallback():
    rules = HeadRuleTable.parse("# comment\nNP right NN NNS\nVP left VB")
    assert rules.head_index("NP", ["DT", "NN", "NN"]) == 2
    assert rules.head_index("NP", ["DT", "JJ"]) == 1  # no match: first from the right
    assert rules.head_index("VP", ["RB", "VB"]) == 1
    assert rules.head_index("QQ", ["A", "B", "C"]) == 0  # no rule: leftmost
    with pytest.raises(ValueError):
        HeadRuleTable.parse("NP sideways NN")


@given(trees(max_n=15))
def test_ptb_round_trip(t):
    assert read_ptb(write_ptb(t))[0] == t


@given(trees(max_n=15))
def test_binarize_inverse(t):
    b = binarize(t, ENGLISH)
    assert all(len(n.children) <= 2 for n in b.subtrees())
    assert unbinarize(b) == t


@given(trees(max_n=10), st.sampled_from(["left", "right"]))
def test_binarize_inverse_any_table(t, direction):
    rules = HeadRuleTable({x: (direction, ()) for x in ("S", "NP", "VP", "PP")})
    assert unbinarize(binarize(t, rules)) == t


@given(trees(max_n=15))
def test_decompose_bounds_and_size(t):
    d = decompose(t)
    assert sum(d.values()) == sum(1 for _ in t.subtrees())
    assert all(0 <= c.l < c.r <= t.n for c in d)


def test_random_trees_respect_cap():
    rng = random.Random(3)
    for _ in range(200):
        t = random_tree(rng, rng.randint(1, 10), unary_prob=0.6)
        check_unary_cap(t, 3)
