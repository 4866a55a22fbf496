"""Non-binary bottom-up shift-reduce constituent parsing with an exact dynamic oracle."""

from .kernels import BACKEND
from .oracle import ExplorationPolicy, GoldSet, loss, zero_cost_transitions
from .scorer import LinearModel
from .trainer import TrainConfig, parse, train, train_dynamic, train_static
from .transitions import (FINISH, SHIFT, BinarySystem, Configuration, NonBinarySystem, Transition,
                          static_oracle_bin, static_oracle_nb)
from .treebank import HeadRuleTable, Token, Tree, binarize, read_ptb, unbinarize, write_ptb

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "ExplorationPolicy", "GoldSet", "loss", "zero_cost_transitions", "LinearModel",
    "TrainConfig", "parse", "train", "train_dynamic", "train_static", "FINISH", "SHIFT",
    "BinarySystem", "Configuration", "NonBinarySystem", "Transition", "static_oracle_bin",
    "static_oracle_nb", "HeadRuleTable", "Token", "Tree", "binarize", "read_ptb", "unbinarize",
    "write_ptb",
]
