"""Per-token feature extraction.

The final representation of each token is the concatenation of a word
embedding, an optional POS embedding, and (when augmentation is on) a
sentence embedding shared by all tokens plus per-position super-token
embeddings from token-window convolutions. Word and sentence vectors come
from a trainable lookup encoder; the encoder slot is pluggable so a
pretrained back-end with the same interface can replace it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .conllu import UPOS_TAGS, Treebank
from .neural import ParameterStore, Tensor, concat, conv1d, dropout, mean, sum_, take_rows
from .neural import tensor as T

POS_MODES = ("gold", "auto", "none")

# Dedicated row for the artificial root in the POS embedding table.
_ROOT_POS_INDEX = len(UPOS_TAGS)
_POS_INDEX = {tag: i for i, tag in enumerate(UPOS_TAGS)}


class Vocab:
    """Token-to-index map. Index 0 is the unknown token, index 1 the root."""

    UNK = 0
    ROOT = 1
    _RESERVED = ("<unk>", "<root>")

    def __init__(self, forms=()):
        self.itos = list(self._RESERVED) + sorted(set(forms) - set(self._RESERVED))
        self.stoi = {form: i for i, form in enumerate(self.itos)}

    def __len__(self) -> int:
        return len(self.itos)

    def index(self, form: str) -> int:
        return self.stoi.get(form, self.UNK)

    def encode(self, forms) -> np.ndarray:
        return np.array([self.index(f) for f in forms], dtype=np.int64)

    @classmethod
    def from_treebank(cls, tb: Treebank) -> "Vocab":
        return cls(tok.form for tree in tb.trees for tok in tree.tokens)

    @classmethod
    def from_list(cls, itos) -> "Vocab":
        vocab = cls()
        vocab.itos = list(itos)
        vocab.stoi = {form: i for i, form in enumerate(vocab.itos)}
        if vocab.itos[:2] != list(cls._RESERVED):
            raise ValueError("vocabulary must reserve index 0 for UNK and 1 for ROOT")
        return vocab

    def to_file(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for form in self.itos:
                fh.write(form + "\n")

    @classmethod
    def from_file(cls, path) -> "Vocab":
        with open(path, encoding="utf-8") as fh:
            return cls.from_list([line.rstrip("\n") for line in fh if line != "\n"])


@dataclass
class EncoderConfig:
    word_dim: int = 128
    pos_mode: str = "gold"
    pos_dim: int = 32
    augment: bool = False
    supertoken_filter_sizes: tuple[int, ...] = (2, 3, 4, 5)
    supertoken_dim: int = 192

    def __post_init__(self) -> None:
        if self.pos_mode not in POS_MODES:
            raise ValueError(f"pos_mode must be one of {POS_MODES}, got {self.pos_mode!r}")
        if any(k < 2 for k in self.supertoken_filter_sizes):
            raise ValueError("super-token filter sizes must be >= 2")
        if min(self.word_dim, self.pos_dim, self.supertoken_dim) < 1:
            raise ValueError("embedding dims must be >= 1")

    @property
    def supertoken_total(self) -> int:
        return len(self.supertoken_filter_sizes) * self.supertoken_dim

    @property
    def feature_dim(self) -> int:
        dim = self.word_dim
        if self.pos_mode != "none":
            dim += self.pos_dim
        if self.augment:
            dim += self.word_dim + self.supertoken_total
        return dim


@dataclass
class TokenFeatures:
    """Feature matrix with the synthetic root at row 0 and tokens at 1..n."""

    matrix: Tensor
    feature_dim: int

    def __len__(self) -> int:
        return self.matrix.data.shape[0] - 1


def sentence_embedding(word_embs: Tensor) -> Tensor:
    """Mean over token rows; the shared vector every token is concatenated
    with (stand-in for a pretrained encoder's pooled sentence output)."""
    return mean(word_embs, axis=0, keepdims=True)


class LookupEncoder:
    """Trainable lookup-table encoder producing TokenFeatures.

    Parameters are created lazily in the given store under `prefix`. The
    root row uses dedicated learned vectors for every slice and is excluded
    from the sentence mean. Encoding over a read-only store is safe to run
    concurrently across sentences.
    """

    def __init__(self, cfg: EncoderConfig, vocab: Vocab, store: ParameterStore, prefix: str = "encoder"):
        self.cfg = cfg
        self.vocab = vocab
        self.store = store
        self.prefix = prefix

    def _param(self, name: str, shape, **kw) -> Tensor:
        return self.store.parameter(f"{self.prefix}.{name}", shape, **kw)

    def word_table(self) -> Tensor:
        return self._param("word_emb", (len(self.vocab), self.cfg.word_dim), init="embedding")

    def super_token_embeddings(self, word_embs: Tensor) -> Tensor:
        """Per-position window convolutions, one output block per filter size."""
        cfg = self.cfg
        blocks = []
        for k in cfg.supertoken_filter_sizes:
            w = self._param(
                f"conv{k}.w",
                (cfg.supertoken_dim, k, cfg.word_dim),
                fan=(k * cfg.word_dim, cfg.supertoken_dim),
            )
            b = self._param(f"conv{k}.b", (cfg.supertoken_dim,), init="zeros")
            blocks.append(conv1d(word_embs, w, b))
        return concat(blocks, axis=1)

    def encode(
        self,
        forms,
        pos_tags=None,
        train: bool = False,
        rng: np.random.Generator | None = None,
        dropout_p: float = 0.0,
    ) -> TokenFeatures:
        cfg = self.cfg
        n = len(forms)
        if n < 1:
            raise ValueError("cannot encode an empty sentence")
        if cfg.pos_mode != "none" and pos_tags is None:
            raise ValueError(f"pos_mode={cfg.pos_mode!r} requires pos tags")

        table = self.word_table()
        tok_word = take_rows(table, self.vocab.encode(forms))
        root_word = take_rows(table, [Vocab.ROOT])
        tok_parts = [tok_word]
        root_parts = [root_word]

        if cfg.pos_mode != "none":
            if len(pos_tags) != n:
                raise ValueError(f"{n} tokens but {len(pos_tags)} pos tags")
            unknown = [t for t in pos_tags if t not in _POS_INDEX]
            if unknown:
                raise ValueError(f"unknown UPOS tags: {sorted(set(unknown))}")
            pos_table = self._param("pos_emb", (len(UPOS_TAGS) + 1, cfg.pos_dim), init="embedding")
            pos_idx = np.array([_POS_INDEX[t] for t in pos_tags], dtype=np.int64)
            tok_parts.append(take_rows(pos_table, pos_idx))
            root_parts.append(take_rows(pos_table, [_ROOT_POS_INDEX]))

        if cfg.augment:
            sent = sentence_embedding(tok_word)
            tok_parts.append(_repeat_row(sent, n))
            root_parts.append(self._param("root_sent", (1, cfg.word_dim), init="embedding"))
            tok_parts.append(self.super_token_embeddings(tok_word))
            root_parts.append(self._param("root_super", (1, cfg.supertoken_total), init="embedding"))

        matrix = concat(
            [concat(root_parts, axis=1), concat(tok_parts, axis=1)], axis=0
        )
        if train and dropout_p > 0.0:
            matrix = dropout(matrix, dropout_p, rng=rng, train=True)
        assert matrix.data.shape == (n + 1, cfg.feature_dim)
        return TokenFeatures(matrix=matrix, feature_dim=cfg.feature_dim)


def _repeat_row(row: Tensor, n: int) -> Tensor:
    """Tile a (1, d) tensor to (n, d); gradient sums back over the copies."""
    return take_rows(row, np.zeros(n, dtype=np.int64))
