"""Graph-based parsing: deep biaffine arc/label scoring plus
root-constrained maximum-arborescence decoding.

arc_scores is an (n+1) x n matrix: entry [h, d-1] scores head h (0 = root)
for dependent d, with self-arcs masked to -inf. The root constraint
(exactly one child of node 0) is enforced by re-decoding once per candidate
root with all other root edges masked and keeping the best total.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import kernels
from .conllu import Tree, Treebank
from .features import EncoderConfig, LookupEncoder, TokenFeatures, Vocab
from .neural import (
    ParameterStore,
    Tensor,
    add,
    concat,
    cross_entropy,
    dropout,
    matmul,
    mul,
    relu,
    reshape,
    sum_,
    take_rows,
    transpose,
)
from .transition import _resolve_tags


@dataclass
class ScoreMatrix:
    """Arc scores (n+1) x n with masked diagonal; label scores n x L for the
    chosen head of each dependent (None until heads are picked)."""

    arc_scores: np.ndarray
    label_scores: np.ndarray | None = None

    @property
    def n_tokens(self) -> int:
        return self.arc_scores.shape[1]


def _check_scores(arc_scores: np.ndarray) -> np.ndarray:
    arc_scores = np.asarray(arc_scores, dtype=np.float64)
    if arc_scores.ndim != 2 or arc_scores.shape[0] != arc_scores.shape[1] + 1:
        raise ValueError(f"arc score matrix must be (n+1) x n, got {arc_scores.shape}")
    if arc_scores.shape[1] == 0:
        raise ValueError("empty sentence")
    return arc_scores


def _full_matrix(arc_scores: np.ndarray) -> np.ndarray:
    """(n+1) x (n+1) matrix over nodes 0..n with forbidden arcs at NEG."""
    n = arc_scores.shape[1]
    full = np.full((n + 1, n + 1), kernels.NEG)
    full[:, 1:] = np.where(np.isfinite(arc_scores), arc_scores, kernels.NEG)
    np.fill_diagonal(full, kernels.NEG)
    return full


def decode_single_root_mst(arc_scores: np.ndarray) -> list[int]:
    """Maximum arborescence with exactly one child of the root node.

    Runs Chu-Liu/Edmonds once per candidate root token (all other root
    edges masked) and keeps the best total; ties go to the lowest root.
    """
    arc_scores = _check_scores(arc_scores)
    full = _full_matrix(arc_scores)
    n = arc_scores.shape[1]
    best_heads: list[int] | None = None
    best_total = -np.inf
    for root in range(1, n + 1):
        masked = full.copy()
        masked[0, :] = kernels.NEG
        masked[0, root] = full[0, root]
        heads = kernels.chu_liu_edmonds(masked)
        total = sum(full[heads[d], d] for d in range(1, n + 1))
        if total > best_total:
            best_total = total
            best_heads = [int(h) for h in heads[1:]]
    return best_heads


def brute_force_arborescence(arc_scores: np.ndarray) -> list[int]:
    """Exhaustive single-root maximum arborescence (test oracle, n <= 7).

    Ties resolve to the lexicographically smallest head sequence.
    """
    arc_scores = _check_scores(arc_scores)
    n = arc_scores.shape[1]
    if n > 7:
        raise ValueError(f"brute force limited to n <= 7, got {n}")
    best_heads: list[int] | None = None
    best_total = -np.inf
    candidates = [[h for h in range(n + 1) if h != d] for d in range(1, n + 1)]
    for heads in itertools.product(*candidates):
        if sum(1 for h in heads if h == 0) != 1:
            continue
        if _has_cycle(heads):
            continue
        total = sum(arc_scores[h, d] for d, h in enumerate(heads))
        if total > best_total:
            best_total = total
            best_heads = list(heads)
    return best_heads


def _has_cycle(heads) -> bool:
    n = len(heads)
    for start in range(1, n + 1):
        cur = start
        for _ in range(n + 1):
            if cur == 0:
                break
            cur = heads[cur - 1]
        else:
            return True
    return False


class GraphParser:
    """Biaffine scorer over lookup-encoder features with MST decoding.

    Head and dependent representations come from separate 1-hidden-layer
    ReLU MLPs; the arc biaffine is bias-augmented on the head side only,
    the label biaffine on both sides (one (q+1) x (q+1) slice per label).
    Labels are decoded conditioned on the decoded heads.
    """

    def __init__(
        self,
        encoder_cfg: EncoderConfig,
        vocab: Vocab,
        labels,
        hidden_dim: int = 256,
        arc_mlp_dim: int = 256,
        label_mlp_dim: int = 64,
        store: ParameterStore | None = None,
    ):
        self.encoder_cfg = encoder_cfg
        self.vocab = vocab
        self.labels = sorted(set(labels))
        self.hidden_dim = hidden_dim
        self.arc_mlp_dim = arc_mlp_dim
        self.label_mlp_dim = label_mlp_dim
        self.store = store if store is not None else ParameterStore()
        self.encoder = LookupEncoder(encoder_cfg, vocab, self.store)
        self.history: list[dict] = []

    # -- network ---------------------------------------------------------

    def _mlp(self, name: str, x: Tensor, out_dim: int, train, rng, dropout_p) -> Tensor:
        d = x.data.shape[1]
        w1 = self.store.parameter(f"{name}.w1", (d, self.hidden_dim))
        b1 = self.store.parameter(f"{name}.b1", (self.hidden_dim,), init="zeros")
        h = relu(add(matmul(x, w1), b1))
        if train and dropout_p > 0.0:
            h = dropout(h, dropout_p, rng=rng, train=True)
        w2 = self.store.parameter(f"{name}.w2", (self.hidden_dim, out_dim))
        b2 = self.store.parameter(f"{name}.b2", (out_dim,), init="zeros")
        return add(matmul(h, w2), b2)

    @staticmethod
    def _augment(x: Tensor) -> Tensor:
        ones = Tensor(np.ones((x.data.shape[0], 1), dtype=x.data.dtype))
        return concat([x, ones], axis=1)

    def _score_parts(self, feats: TokenFeatures, train=False, rng=None, dropout_p=0.0):
        """Arc logits (n+1, n) with masked diagonal, plus label-MLP outputs."""
        n = len(feats)
        mat = feats.matrix
        dep_rows = np.arange(1, n + 1)
        arc_head = self._mlp("arc_head", mat, self.arc_mlp_dim, train, rng, dropout_p)
        arc_dep = self._mlp("arc_dep", take_rows(mat, dep_rows), self.arc_mlp_dim, train, rng, dropout_p)
        u_arc = self.store.parameter("arc_U", (self.arc_mlp_dim + 1, self.arc_mlp_dim))
        arc_logits = matmul(matmul(self._augment(arc_head), u_arc), transpose(arc_dep))
        mask = np.zeros((n + 1, n), dtype=arc_logits.data.dtype)
        mask[dep_rows, dep_rows - 1] = -np.inf  # self-arcs
        arc_logits = add(arc_logits, Tensor(mask))
        lab_head = self._mlp("lab_head", mat, self.label_mlp_dim, train, rng, dropout_p)
        lab_dep = self._mlp("lab_dep", take_rows(mat, dep_rows), self.label_mlp_dim, train, rng, dropout_p)
        return arc_logits, lab_head, lab_dep

    def _label_logits(self, lab_head: Tensor, lab_dep: Tensor, heads) -> Tensor:
        """Bilinear label scores (n, L) at the given head of each dependent."""
        n = lab_dep.data.shape[0]
        q = self.label_mlp_dim + 1
        n_labels = len(self.labels)
        hs = self._augment(take_rows(lab_head, np.asarray(heads, dtype=np.int64)))
        ds = self._augment(lab_dep)
        u_lab = self.store.parameter("lab_U", (n_labels, q, q), fan=(q, q))
        u_flat = reshape(u_lab, (n_labels * q, q))
        mixed = reshape(matmul(ds, transpose(u_flat)), (n, n_labels, q))
        prod = mul(mixed, reshape(hs, (n, 1, q)))
        return sum_(prod, axis=2)

    # -- public scoring/decoding -----------------------------------------

    def score_arcs_labels(self, tree: Tree, pos_tags=None) -> ScoreMatrix:
        """ScoreMatrix for a sentence; label scores conditioned on the
        MST-decoded heads."""
        feats = self._encode(tree, pos_tags)
        arc_logits, lab_head, lab_dep = self._score_parts(feats)
        arc = arc_logits.data.astype(np.float64)
        heads = decode_single_root_mst(arc)
        labels = self._label_logits(lab_head, lab_dep, heads).data
        return ScoreMatrix(arc_scores=arc, label_scores=np.asarray(labels))

    def _encode(self, tree: Tree, pos_tags, train=False, rng=None, dropout_p=0.0) -> TokenFeatures:
        tags = _resolve_tags(self.encoder_cfg.pos_mode, tree, pos_tags)
        return self.encoder.encode(tree.forms(), tags, train=train, rng=rng, dropout_p=dropout_p)

    def loss(self, tree: Tree, pos_tags=None, train=False, rng=None, dropout_p=0.0) -> Tensor:
        """Mean head cross-entropy over dependents plus mean label
        cross-entropy at the gold arcs."""
        feats = self._encode(tree, pos_tags, train=train, rng=rng, dropout_p=dropout_p)
        arc_logits, lab_head, lab_dep = self._score_parts(feats, train=train, rng=rng, dropout_p=dropout_p)
        gold_heads = [tok.head for tok in tree.tokens]
        arc_loss = cross_entropy(transpose(arc_logits), gold_heads)
        label_ids = [self.labels.index(tok.deprel) for tok in tree.tokens]
        label_logits = self._label_logits(lab_head, lab_dep, gold_heads)
        return add(arc_loss, cross_entropy(label_logits, label_ids))

    def parse_tree(self, tree: Tree, pos_tags=None) -> Tree:
        tags = _resolve_tags(self.encoder_cfg.pos_mode, tree, pos_tags)
        feats = self.encoder.encode(tree.forms(), tags)
        arc_logits, lab_head, lab_dep = self._score_parts(feats)
        heads = decode_single_root_mst(arc_logits.data.astype(np.float64))
        label_logits = self._label_logits(lab_head, lab_dep, heads).data
        deprels = [self.labels[int(i)] for i in np.argmax(label_logits, axis=1)]
        tokens = [
            tok.copy(head=heads[i], deprel=deprels[i], upos=tags[i] if tags else tok.upos)
            for i, tok in enumerate(tree.tokens)
        ]
        return Tree(tokens=tokens, comments=list(tree.comments))

    # -- persistence -----------------------------------------------------

    def config(self) -> dict:
        cfg = self.encoder_cfg
        return {
            "kind": "graph",
            "labels": self.labels,
            "vocab": self.vocab.itos,
            "hidden_dim": self.hidden_dim,
            "arc_mlp_dim": self.arc_mlp_dim,
            "label_mlp_dim": self.label_mlp_dim,
            "word_dim": cfg.word_dim,
            "pos_mode": cfg.pos_mode,
            "pos_dim": cfg.pos_dim,
            "augment": cfg.augment,
            "supertoken_filter_sizes": list(cfg.supertoken_filter_sizes),
            "supertoken_dim": cfg.supertoken_dim,
        }

    @classmethod
    def from_config(cls, config: dict, store: ParameterStore) -> "GraphParser":
        cfg = EncoderConfig(
            word_dim=config["word_dim"],
            pos_mode=config["pos_mode"],
            pos_dim=config["pos_dim"],
            augment=config["augment"],
            supertoken_filter_sizes=tuple(config["supertoken_filter_sizes"]),
            supertoken_dim=config["supertoken_dim"],
        )
        return cls(
            encoder_cfg=cfg,
            vocab=Vocab.from_list(config["vocab"]),
            labels=config["labels"],
            hidden_dim=config["hidden_dim"],
            arc_mlp_dim=config["arc_mlp_dim"],
            label_mlp_dim=config["label_mlp_dim"],
            store=store,
        )
