"""Benchmark harness: trains/loads the design-grid of models on one or more
treebanks, writes per-model prediction files, and assembles the report with
all minimal-pair analyses. Existing model files are reused unless forced."""

from __future__ import annotations

import dataclasses
from itertools import product
from pathlib import Path

from .config import RunConfig
from .conllu import Treebank, read_conllu, write_conllu
from .evalreport import BenchmarkReport, BenchmarkRow, attachment_scores
from .graph import GraphParser
from .neural import load_model, save_model
from .tagger import Tagger, auto_pos_cached
from .training import parse_treebank, train_graph_parser, train_tagger, train_transition_parser
from .transition import ARC_EAGER, ARC_STANDARD, TransitionParser


def model_id(parser: str, encoder: str, augmented: bool, pos_mode: str) -> str:
    return f"{parser}.{encoder}.{'aug' if augmented else 'plain'}.{pos_mode}"


def save_parser(path, model) -> None:
    """Model file plus a sidecar .vocab listing (one token per line)."""
    path = Path(path)
    save_model(path, model.config(), model.store)
    model.vocab.to_file(path.with_suffix(".vocab"))


def load_parser(path):
    config, store = load_model(path)
    kind = config.get("kind")
    if kind == "transition":
        return TransitionParser.from_config(config, store)
    if kind == "graph":
        return GraphParser.from_config(config, store)
    if kind == "tagger":
        return Tagger.from_config(config, store)
    raise ValueError(f"{path}: unknown model kind {kind!r}")


def _treebank_triples(cfg: RunConfig):
    if cfg.treebanks:
        for prefix in cfg.treebanks:
            name = Path(prefix).name
            yield name, (
                f"{prefix}-train.conllu",
                f"{prefix}-dev.conllu",
                f"{prefix}-test.conllu",
            )
    else:
        if not (cfg.train_path and cfg.dev_path and cfg.test_path):
            raise ValueError("benchmark needs either `treebanks` prefixes or train/dev/test paths")
        name = Path(cfg.test_path).stem.replace("-test", "")
        yield name, (cfg.train_path, cfg.dev_path, cfg.test_path)


def _train_one(parser_kind: str, train, dev, run_cfg, tags, log):
    if parser_kind == "graph":
        return train_graph_parser(train, dev, run_cfg, tags[0], tags[1], log=log)
    system = ARC_STANDARD if parser_kind == "transition-standard" else ARC_EAGER
    return train_transition_parser(train, dev, system, run_cfg, tags[0], tags[1], log=log)


def benchmark_matrix(cfg: RunConfig, force: bool = False, log=None) -> BenchmarkReport:
    """Run the grid (grid_parsers x grid_augment x grid_pos_modes, all with
    the configured encoder) on every treebank and score the test splits."""
    out = Path(cfg.output_dir)
    models_dir = out / "models"
    preds_dir = out / "preds"
    cache_dir = out / "autopos"
    models_dir.mkdir(parents=True, exist_ok=True)
    preds_dir.mkdir(parents=True, exist_ok=True)

    rows: list[BenchmarkRow] = []
    for tb_name, (train_path, dev_path, test_path) in _treebank_triples(cfg):
        train = read_conllu(train_path, name=tb_name)
        dev = read_conllu(dev_path, name=tb_name)
        test = read_conllu(test_path, name=tb_name)

        auto_splits: dict[str, Treebank] = {}
        if "auto" in cfg.grid_pos_modes:
            tagger_path = models_dir / f"tagger.{tb_name}.tudp"
            if tagger_path.exists() and not force:
                tagger = load_parser(tagger_path)
            else:
                if log:
                    log(f"[{tb_name}] training tagger")
                tagger = train_tagger(train, dev, cfg, log=log)
                save_parser(tagger_path, tagger)
            auto_splits = {
                "train": auto_pos_cached(train, tagger, cache_dir),
                "dev": auto_pos_cached(dev, tagger, cache_dir),
                "test": auto_pos_cached(test, tagger, cache_dir),
            }

        for parser_kind, augmented, pos_mode in product(
            cfg.grid_parsers, cfg.grid_augment, cfg.grid_pos_modes
        ):
            mid = model_id(parser_kind, cfg.encoder, augmented, pos_mode)
            path = models_dir / f"{mid}.{tb_name}.tudp"
            run_cfg = dataclasses.replace(
                cfg, parser=parser_kind, augment=augmented, pos_mode=pos_mode
            )
            tags = (None, None)
            test_tags = None
            if pos_mode == "auto":
                tags = (
                    [t.upos_tags() for t in auto_splits["train"].trees],
                    [t.upos_tags() for t in auto_splits["dev"].trees],
                )
                test_tags = [t.upos_tags() for t in auto_splits["test"].trees]
            if path.exists() and not force:
                if log:
                    log(f"[{tb_name}] reusing {path.name}")
                model = load_parser(path)
            else:
                if log:
                    log(f"[{tb_name}] training {mid}")
                model = _train_one(parser_kind, train, dev, run_cfg, tags, log)
                save_parser(path, model)
            pred = parse_treebank(model, test, test_tags)
            write_conllu(pred, preds_dir / f"{mid}.{tb_name}.test.pred.conllu")
            scores = attachment_scores(test, pred)
            rows.append(
                BenchmarkRow(
                    model_id=mid,
                    treebank=tb_name,
                    parser=parser_kind,
                    encoder=cfg.encoder,
                    augmented=augmented,
                    pos_mode=pos_mode,
                    uas=scores.uas,
                    las=scores.las,
                )
            )
            if log:
                log(f"[{tb_name}] {mid}: {scores}")

    report = BenchmarkReport(rows=rows)
    report.run_analyses()
    return report
