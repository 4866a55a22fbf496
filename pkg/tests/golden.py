"""Golden examples shared by the tests."""

from nbsr.transitions import parse_transitions

EXAMPLE_TREE = "(S (NP (DT The) (NN public)) (VP (VBZ is) (ADVP (RB still)) (ADJP (JJ cautious))) (. .))"
EXAMPLE_BINARIZED = ("(S (NP (DT The) (NN public)) (S* (VP (VP* (VBZ is) (ADVP (RB still))) "
               "(ADJP (JJ cautious))) (. .)))")

EXAMPLE_NB = parse_transitions("""
SHIFT
SHIFT
REDUCE-NP#2
SHIFT
SHIFT
REDUCE-ADVP#1
SHIFT
REDUCE-ADJP#1
REDUCE-VP#3
SHIFT
REDUCE-S#3
FINISH
""")

EXAMPLE_BIN = parse_transitions("""
SHIFT
SHIFT
REDUCE-LEFT-NP
SHIFT
SHIFT
REDUCE-UNARY-ADVP
REDUCE-RIGHT-VP*
SHIFT
REDUCE-UNARY-ADJP
REDUCE-RIGHT-VP
SHIFT
REDUCE-RIGHT-S*
REDUCE-LEFT-S
FINISH
""")
