"""Training loops for the parsers and the tagger.

All three follow the same regime: seeded shuffling, gradient accumulation
over mini-batches of sentences, Adam with linear warmup/decay, a dev
evaluation each epoch, and restoration of the best-dev checkpoint (LAS for
parsers, accuracy for the tagger). Runs are bitwise deterministic given
(seed, data order, schedule) on a fixed kernel backend.
"""

from __future__ import annotations

import math

import numpy as np

from .config import RunConfig
from .conllu import Treebank
from .evalreport import AttachmentScores, attachment_scores
from .features import EncoderConfig, Vocab
from .graph import GraphParser
from .neural import ParameterStore, TrainSchedule, adam_step, mul
from .tagger import Tagger
from .transition import NonProjectiveError, TransitionParser


def _encoder_config(cfg: RunConfig) -> EncoderConfig:
    return EncoderConfig(
        word_dim=cfg.word_dim,
        pos_mode=cfg.pos_mode,
        pos_dim=cfg.pos_dim,
        augment=cfg.augment,
        supertoken_filter_sizes=cfg.supertoken_filter_sizes,
        supertoken_dim=cfg.supertoken_dim,
    )


def _store(cfg: RunConfig) -> ParameterStore:
    return ParameterStore(
        seed=cfg.seed,
        beta1=cfg.adam_beta1,
        beta2=cfg.adam_beta2,
        eps=cfg.adam_eps,
        weight_decay=cfg.weight_decay,
    )


def _schedule(cfg: RunConfig, n_items: int, epochs: int, batch_size: int, peak_lr: float) -> TrainSchedule:
    steps_per_epoch = max(1, math.ceil(n_items / batch_size))
    return TrainSchedule(
        peak_lr=peak_lr,
        warmup_ratio=cfg.warmup_ratio,
        total_steps=max(1, epochs * steps_per_epoch),
        batch_size=batch_size,
        epochs=epochs,
        dropout_p=cfg.dropout,
        seed=cfg.seed,
    )


def _labels(tb: Treebank) -> list[str]:
    return sorted({tok.deprel for tree in tb.trees for tok in tree.tokens if tok.deprel})


def _batches(n: int, batch_size: int, rng: np.random.Generator):
    order = rng.permutation(n)
    for lo in range(0, n, batch_size):
        yield order[lo : lo + batch_size]


def _mean_loss(losses):
    total = losses[0]
    for loss in losses[1:]:
        total = total + loss
    return mul(total, 1.0 / len(losses))


def parse_treebank(parser, tb: Treebank, tags_list=None) -> Treebank:
    """Parse every sentence; tags_list supplies per-sentence POS sequences
    for pos_mode=auto models."""
    trees = [
        parser.parse_tree(tree, tags_list[i] if tags_list else None)
        for i, tree in enumerate(tb.trees)
    ]
    return Treebank(trees=trees, name=tb.name)


def _dev_eval(parser, dev: Treebank, dev_tags) -> AttachmentScores:
    return attachment_scores(dev, parse_treebank(parser, dev, dev_tags))


def _run_epochs(store, schedule, n_items, batch_loss, on_epoch, log):
    """Shared optimization loop; on_epoch returns (metric, record)."""
    rng = np.random.default_rng(schedule.seed)
    best_metric = -np.inf
    best_snap = store.snapshot()
    history = []
    step = 0
    for epoch in range(1, schedule.epochs + 1):
        epoch_loss = 0.0
        n_batches = 0
        for batch in _batches(n_items, schedule.batch_size, rng):
            loss = batch_loss(batch, rng)
            loss.backward()
            step += 1
            adam_step(store, schedule, step)
            epoch_loss += float(loss.data)
            n_batches += 1
        metric, record = on_epoch()
        record = {"epoch": epoch, "train_loss": epoch_loss / max(1, n_batches), **record}
        history.append(record)
        if log:
            log("  " + " ".join(f"{k}={v:.4f}" if isinstance(v, float) else f"{k}={v}" for k, v in record.items()))
        if metric > best_metric:
            best_metric = metric
            best_snap = store.snapshot()
    store.restore(best_snap)
    return history


def train_transition_parser(
    train: Treebank,
    dev: Treebank,
    system: str,
    cfg: RunConfig,
    train_tags=None,
    dev_tags=None,
    log=None,
) -> TransitionParser:
    """Cross-entropy over static-oracle transitions; non-projective training
    trees are excluded from supervision (their count is reported)."""
    if not train.trees:
        raise ValueError("empty train set")
    parser = TransitionParser(
        system=system,
        encoder_cfg=_encoder_config(cfg),
        vocab=Vocab.from_treebank(train),
        labels=_labels(train),
        hidden_dim=cfg.hidden_dim,
        store=_store(cfg),
    )
    usable = []
    skipped = 0
    for i, tree in enumerate(train.trees):
        try:
            items = parser.oracle_items(tree)
        except NonProjectiveError:
            skipped += 1
            continue
        usable.append((tree, items, train_tags[i] if train_tags else None))
    if log and skipped:
        log(f"  excluded {skipped} non-projective tree(s) from oracle supervision")
    if not usable:
        raise ValueError("empty train set after excluding non-projective trees")

    schedule = _schedule(cfg, len(usable), cfg.epochs, cfg.batch_size, cfg.learning_rate)

    def batch_loss(batch, rng):
        losses = [
            parser.loss(tree, items, tags, train=True, rng=rng, dropout_p=schedule.dropout_p)
            for tree, items, tags in (usable[i] for i in batch)
        ]
        return _mean_loss(losses)

    def on_epoch():
        if not dev.trees:
            return 0.0, {}
        scores = _dev_eval(parser, dev, dev_tags)
        return scores.las, {"dev_uas": scores.uas, "dev_las": scores.las}

    parser.history = _run_epochs(parser.store, schedule, len(usable), batch_loss, on_epoch, log)
    return parser


def train_graph_parser(
    train: Treebank,
    dev: Treebank,
    cfg: RunConfig,
    train_tags=None,
    dev_tags=None,
    log=None,
) -> GraphParser:
    """Head cross-entropy per dependent plus label cross-entropy at gold
    arcs; non-projective trees train fine here."""
    if not train.trees:
        raise ValueError("empty train set")
    parser = GraphParser(
        encoder_cfg=_encoder_config(cfg),
        vocab=Vocab.from_treebank(train),
        labels=_labels(train),
        hidden_dim=cfg.hidden_dim,
        arc_mlp_dim=cfg.arc_mlp_dim,
        label_mlp_dim=cfg.label_mlp_dim,
        store=_store(cfg),
    )
    schedule = _schedule(cfg, len(train.trees), cfg.epochs, cfg.batch_size, cfg.learning_rate)

    def batch_loss(batch, rng):
        losses = [
            parser.loss(
                train.trees[i],
                train_tags[i] if train_tags else None,
                train=True,
                rng=rng,
                dropout_p=schedule.dropout_p,
            )
            for i in batch
        ]
        return _mean_loss(losses)

    def on_epoch():
        if not dev.trees:
            return 0.0, {}
        scores = _dev_eval(parser, dev, dev_tags)
        return scores.las, {"dev_uas": scores.uas, "dev_las": scores.las}

    parser.history = _run_epochs(parser.store, schedule, len(train.trees), batch_loss, on_epoch, log)
    return parser


def train_tagger(train: Treebank, dev: Treebank, cfg: RunConfig, log=None) -> Tagger:
    """Per-token cross-entropy, best-dev-accuracy checkpoint."""
    if not train.trees:
        raise ValueError("empty train set")
    tagger = Tagger(vocab=Vocab.from_treebank(train), word_dim=cfg.word_dim, store=_store(cfg))
    schedule = _schedule(
        cfg, len(train.trees), cfg.tagger_epochs, cfg.tagger_batch_size, cfg.learning_rate
    )

    def batch_loss(batch, rng):
        losses = [
            tagger.loss(train.trees[i], train=True, rng=rng, dropout_p=schedule.dropout_p)
            for i in batch
        ]
        return _mean_loss(losses)

    def on_epoch():
        if not dev.trees:
            return 0.0, {}
        acc = tagger.accuracy(dev)
        return acc, {"dev_acc": acc}

    tagger.history = _run_epochs(tagger.store, schedule, len(train.trees), batch_loss, on_epoch, log)
    return tagger
