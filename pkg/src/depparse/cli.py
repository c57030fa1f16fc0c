"""Command-line entry point.

Subcommands: validate, extract, split, agreement, train-tagger, tag,
train-parser, parse, eval, benchmark. Exit codes: 0 success, 1 data error,
2 usage error. Flags override config-file values; DEPPARSE_SEED is the
fallback seed.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import config as config_mod
from .bench import benchmark_matrix, load_parser, save_parser
from .config import ConfigError, RunConfig
from .conllu import ConlluError, read_conllu, serialize_conllu, validate_tree, write_conllu
from .evalreport import attachment_scores
from .graph import GraphParser
from .tagger import Tagger, tag_treebank
from .training import parse_treebank, train_graph_parser, train_tagger, train_transition_parser
from .transition import ARC_EAGER, ARC_STANDARD
from .treebank import (
    SplitSpec,
    agreement_report,
    extract_trees,
    filter_trees,
    format_agreement,
    stratified_split,
)


class CliError(Exception):
    """Data-level failure; maps to exit code 1."""


def _add_config_flags(sub: argparse.ArgumentParser, keys) -> None:
    for key in keys:
        sub.add_argument(f"--{key.replace('_', '-')}", dest=key, default=None)


_MODEL_KEYS = (
    "parser", "pos_mode", "augment", "encoder",
    "word_dim", "pos_dim", "supertoken_filter_sizes", "supertoken_dim",
    "hidden_dim", "arc_mlp_dim", "label_mlp_dim",
    "learning_rate", "warmup_ratio", "weight_decay",
    "adam_beta1", "adam_beta2", "adam_eps",
    "batch_size", "epochs", "dropout",
    "tagger_batch_size", "tagger_epochs", "seed",
)


def _build_config(args) -> RunConfig:
    overrides = {}
    for key in _MODEL_KEYS + ("output_dir", "treebanks", "train_path", "dev_path", "test_path"):
        raw = getattr(args, key, None)
        if raw is not None:
            overrides[key] = config_mod._parse_value(key, str(raw))
    if getattr(args, "config", None):
        return config_mod.load_config(args.config, overrides)
    return config_mod.apply_overrides(RunConfig(), overrides)


def _read(path):
    try:
        return read_conllu(path)
    except FileNotFoundError as exc:
        raise CliError(f"cannot read {path}: {exc}") from exc
    except ConlluError as exc:
        raise CliError(f"{path}: {exc}") from exc


def _cmd_validate(args) -> int:
    status = 0
    for path in args.files:
        tb = _read(path)
        invalid = 0
        for i, tree in enumerate(tb.trees, start=1):
            report = validate_tree(tree)
            if not report.valid:
                invalid += 1
                for rule, tok, msg in report.violations:
                    where = f" token {tok}" if tok is not None else ""
                    print(f"{path} sentence {i}{where}: {rule}: {msg}")
        print(f"{path}: {len(tb.trees) - invalid}/{len(tb.trees)} trees valid")
    return status


def _cmd_extract(args) -> int:
    tb = _read(args.input)
    pieces = [t for tree in tb.trees for t in extract_trees(tree)]
    if args.filter:
        kept, discarded = filter_trees(pieces)
        for _, reason in discarded:
            print(f"discarded tree ({reason})")
        print(f"extracted {len(pieces)} trees, kept {len(kept)}, discarded {len(discarded)}")
        pieces = kept
    else:
        print(f"extracted {len(pieces)} trees")
    tb.trees = pieces
    write_conllu(tb, args.out)
    return 0


def _cmd_split(args) -> int:
    tb = _read(args.input)
    try:
        parts = [float(x) for x in args.ratios.split(":")]
    except ValueError as exc:
        raise CliError(f"bad --ratios {args.ratios!r}") from exc
    total = sum(parts)
    if len(parts) != 3 or total <= 0:
        raise CliError(f"bad --ratios {args.ratios!r}")
    spec = SplitSpec(
        ratios=tuple(p / total for p in parts),
        seed=args.seed,
        min_label_count=args.min_label_count,
    )
    try:
        train, dev, test = stratified_split(tb, spec)
    except ValueError as exc:
        raise CliError(str(exc)) from exc
    prefix = args.out_prefix or str(Path(args.input).with_suffix(""))
    for part, suffix in ((train, "train"), (dev, "dev"), (test, "test")):
        path = f"{prefix}-{suffix}.conllu"
        write_conllu(part, path)
        print(f"{path}: {len(part.trees)} trees")
    return 0


def _cmd_agreement(args) -> int:
    a, b = _read(args.file_a), _read(args.file_b)
    try:
        result = agreement_report(a, b)
    except ValueError as exc:
        raise CliError(str(exc)) from exc
    sys.stdout.write(format_agreement(result))
    return 0


def _cmd_train_tagger(args) -> int:
    cfg = _build_config(args)
    train = _read(args.train)
    dev = _read(args.dev)
    tagger = train_tagger(train, dev, cfg, log=print)
    save_parser(args.out, tagger)
    print(f"saved tagger to {args.out}")
    return 0


def _cmd_tag(args) -> int:
    model = load_parser(args.model)
    if not isinstance(model, Tagger):
        raise CliError(f"{args.model} is not a tagger model")
    tb = _read(args.input)
    write_conllu(tag_treebank(tb, model), args.out)
    print(f"tagged {len(tb.trees)} sentences -> {args.out}")
    return 0


def _cmd_train_parser(args) -> int:
    cfg = _build_config(args)
    train = _read(args.train)
    dev = _read(args.dev)
    tags = (None, None)
    if cfg.pos_mode == "auto":
        if not args.tagger:
            raise CliError("pos_mode=auto training needs --tagger")
        tagger = load_parser(args.tagger)
        tags = (
            [tagger.tag_sentence(t.forms()) for t in train.trees],
            [tagger.tag_sentence(t.forms()) for t in dev.trees],
        )
    if cfg.parser == "graph":
        model = train_graph_parser(train, dev, cfg, tags[0], tags[1], log=print)
    else:
        system = ARC_STANDARD if cfg.parser == "transition-standard" else ARC_EAGER
        model = train_transition_parser(train, dev, system, cfg, tags[0], tags[1], log=print)
    save_parser(args.out, model)
    print(f"saved parser to {args.out}")
    return 0


def _cmd_parse(args) -> int:
    model = load_parser(args.model)
    if isinstance(model, Tagger):
        raise CliError(f"{args.model} is a tagger, not a parser")
    tb = _read(args.input)
    tags_list = None
    pos_mode = model.encoder_cfg.pos_mode
    if pos_mode == "auto":
        if not args.tagger:
            raise CliError("this model needs auto POS tags; pass --tagger")
        tagger = load_parser(args.tagger)
        tags_list = [tagger.tag_sentence(t.forms()) for t in tb.trees]
    pred = parse_treebank(model, tb, tags_list)
    write_conllu(pred, args.out)
    print(f"parsed {len(tb.trees)} sentences -> {args.out}")
    return 0


def _cmd_eval(args) -> int:
    gold = _read(args.gold)
    pred = _read(args.pred)
    try:
        scores = attachment_scores(gold, pred)
    except ValueError as exc:
        raise CliError(str(exc)) from exc
    print(str(scores))
    return 0


def _cmd_benchmark(args) -> int:
    overrides = {}
    for key in ("output_dir", "treebanks", "train_path", "dev_path", "test_path", "seed"):
        raw = getattr(args, key, None)
        if raw is not None:
            overrides[key] = config_mod._parse_value(key, str(raw))
    cfg = config_mod.load_config(args.grid, overrides) if args.grid else config_mod.apply_overrides(
        RunConfig(), overrides
    )
    report = benchmark_matrix(cfg, force=args.force, log=print)
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.txt").write_text(report.render_text(), encoding="utf-8")
    (out / "report.tsv").write_text(report.to_tsv(), encoding="utf-8")
    sys.stdout.write(report.render_text())
    print(f"report written to {out / 'report.txt'} and {out / 'report.tsv'}")
    return 0


def build_arg_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="depparse", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="report tree-validity violations per sentence")
    p.add_argument("files", nargs="+")
    p.set_defaults(fn=_cmd_validate)

    p = sub.add_parser("extract", help="split annotations into connected trees")
    p.add_argument("input")
    p.add_argument("--out", required=True)
    p.add_argument("--no-filter", dest="filter", action="store_false",
                   help="keep invalid trees instead of discarding them")
    p.set_defaults(fn=_cmd_extract, filter=True)

    p = sub.add_parser("split", help="stratified train/dev/test split")
    p.add_argument("input")
    p.add_argument("--ratios", default="8:1:1")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--min-label-count", type=int, default=3)
    p.add_argument("--out-prefix", default=None)
    p.set_defaults(fn=_cmd_split)

    p = sub.add_parser("agreement", help="two-annotation agreement report")
    p.add_argument("file_a")
    p.add_argument("file_b")
    p.set_defaults(fn=_cmd_agreement)

    p = sub.add_parser("train-tagger", help="train the POS tagger")
    p.add_argument("--train", required=True)
    p.add_argument("--dev", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--config", default=None)
    _add_config_flags(p, _MODEL_KEYS)
    p.set_defaults(fn=_cmd_train_tagger)

    p = sub.add_parser("tag", help="tag a treebank with a trained tagger")
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_tag)

    p = sub.add_parser("train-parser", help="train a dependency parser")
    p.add_argument("--train", required=True)
    p.add_argument("--dev", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--config", default=None)
    p.add_argument("--tagger", default=None, help="tagger model for pos_mode=auto")
    _add_config_flags(p, _MODEL_KEYS)
    p.set_defaults(fn=_cmd_train_parser)

    p = sub.add_parser("parse", help="parse a treebank with a trained model")
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--tagger", default=None)
    p.set_defaults(fn=_cmd_parse)

    p = sub.add_parser("eval", help="UAS/LAS of a prediction against gold")
    p.add_argument("--gold", required=True)
    p.add_argument("--pred", required=True)
    p.set_defaults(fn=_cmd_eval)

    p = sub.add_parser("benchmark", help="train and evaluate the design grid")
    p.add_argument("--grid", default=None, help="config file with grid_* keys")
    p.add_argument("--force", action="store_true", help="retrain even if model files exist")
    p.add_argument("--output-dir", dest="output_dir", default=None)
    p.add_argument("--treebanks", default=None)
    p.add_argument("--train-path", dest="train_path", default=None)
    p.add_argument("--dev-path", dest="dev_path", default=None)
    p.add_argument("--test-path", dest="test_path", default=None)
    p.add_argument("--seed", default=None)
    p.set_defaults(fn=_cmd_benchmark)
    return ap


def dispatch(argv) -> int:
    ap = build_arg_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.fn(args)
    except (CliError, ConfigError, ConlluError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))
