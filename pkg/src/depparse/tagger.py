"""POS tagging: a linear classifier over token embeddings, trained
end-to-end with the lookup encoder. Auto-tagged output is cached per
treebank so every auto-POS parser run shares the same tags."""

from __future__ import annotations

import hashlib
from pathlib import Path

import numpy as np

from .conllu import UPOS_TAGS, Tree, Treebank, parse_conllu, serialize_conllu
from .features import Vocab
from .neural import ParameterStore, Tensor, add, cross_entropy, dropout, matmul, take_rows

AUTO_POS_COMMENT = "# upos_source = auto"

_UPOS_INDEX = {tag: i for i, tag in enumerate(UPOS_TAGS)}


class Tagger:
    """Token classifier over the 17-tag UPOS alphabet, no hidden layers."""

    def __init__(self, vocab: Vocab, word_dim: int = 128, store: ParameterStore | None = None):
        self.vocab = vocab
        self.word_dim = word_dim
        self.store = store if store is not None else ParameterStore()
        self.history: list[dict] = []

    def _logits(self, forms, train=False, rng=None, dropout_p=0.0) -> Tensor:
        table = self.store.parameter("tagger.word_emb", (len(self.vocab), self.word_dim), init="embedding")
        emb = take_rows(table, self.vocab.encode(forms))
        if train and dropout_p > 0.0:
            emb = dropout(emb, dropout_p, rng=rng, train=True)
        w = self.store.parameter("tagger.w", (self.word_dim, len(UPOS_TAGS)))
        b = self.store.parameter("tagger.b", (len(UPOS_TAGS),), init="zeros")
        return add(matmul(emb, w), b)

    def loss(self, tree: Tree, train=False, rng=None, dropout_p=0.0) -> Tensor:
        targets = []
        for tok in tree.tokens:
            if tok.upos not in _UPOS_INDEX:
                raise ValueError(f"token {tok.id} has no usable gold UPOS ({tok.upos!r})")
            targets.append(_UPOS_INDEX[tok.upos])
        logits = self._logits(tree.forms(), train=train, rng=rng, dropout_p=dropout_p)
        return cross_entropy(logits, targets)

    def tag_sentence(self, forms) -> list[str]:
        """Argmax UPOS per token; score ties resolve to the tag earliest in
        the canonical (alphabetical) UPOS ordering."""
        logits = self._logits(forms).data
        return [UPOS_TAGS[int(i)] for i in np.argmax(logits, axis=1)]

    def accuracy(self, tb: Treebank) -> float:
        hits = 0
        total = 0
        for tree in tb.trees:
            pred = self.tag_sentence(tree.forms())
            for tok, tag in zip(tree.tokens, pred):
                total += 1
                hits += tok.upos == tag
        return hits / total if total else 0.0

    def config(self) -> dict:
        return {"kind": "tagger", "vocab": self.vocab.itos, "word_dim": self.word_dim}

    @classmethod
    def from_config(cls, config: dict, store: ParameterStore) -> "Tagger":
        return cls(vocab=Vocab.from_list(config["vocab"]), word_dim=config["word_dim"], store=store)


def tag_treebank(tb: Treebank, tagger: Tagger) -> Treebank:
    """Copy of the treebank with predicted UPOS and an auto-source comment."""
    trees = []
    for tree in tb.trees:
        tags = tagger.tag_sentence(tree.forms())
        tokens = [tok.copy(upos=tag) for tok, tag in zip(tree.tokens, tags)]
        comments = list(tree.comments)
        if AUTO_POS_COMMENT not in comments:
            comments.append(AUTO_POS_COMMENT)
        trees.append(Tree(tokens=tokens, comments=comments))
    return Treebank(trees=trees, name=tb.name)


def treebank_digest(tb: Treebank) -> str:
    return hashlib.sha256(serialize_conllu(tb).encode("utf-8")).hexdigest()[:16]


def auto_pos_cached(tb: Treebank, tagger: Tagger, cache_dir) -> Treebank:
    """Tag once per treebank content; later calls reuse the cached file."""
    cache_dir = Path(cache_dir)
    cache_dir.mkdir(parents=True, exist_ok=True)
    path = cache_dir / f"autopos-{treebank_digest(tb)}.conllu"
    if path.exists():
        cached = parse_conllu(path.read_text(encoding="utf-8"), name=tb.name)
        cached.name = tb.name
        return cached
    tagged = tag_treebank(tb, tagger)
    path.write_text(serialize_conllu(tagged), encoding="utf-8")
    return tagged
