"""Dependency-parsing toolkit: CoNLL-U I/O and treebank QA, transition- and
graph-based neural parsers over a small autodiff engine, a POS tagger, and
a UAS/LAS + minimal-pair benchmark harness."""

__version__ = "0.1.0"

from .conllu import (
    Token,
    Tree,
    Treebank,
    ValidationReport,
    is_projective,
    parse_conllu,
    read_conllu,
    serialize_conllu,
    validate_tree,
    write_conllu,
)
from .evalreport import AttachmentScores, BenchmarkReport, BenchmarkRow, attachment_scores, minimal_pair_report
from .graph import GraphParser, ScoreMatrix, brute_force_arborescence, decode_single_root_mst
from .kernels import BACKEND as KERNEL_BACKEND
from .tagger import Tagger
from .transition import (
    ARC_EAGER,
    ARC_STANDARD,
    NonProjectiveError,
    ParserState,
    Transition,
    TransitionParser,
    apply_transition,
    feature_token_indices,
    legal_transitions,
    static_oracle,
)
from .treebank import (
    AgreementResult,
    SplitSpec,
    attachment_agreement,
    cohen_kappa,
    extract_trees,
    filter_trees,
    stratified_split,
)
