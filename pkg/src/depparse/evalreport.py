"""Attachment scoring and minimal-pair/triplet benchmark analysis.

UAS/LAS count every token, punctuation included (noted in report headers).
Minimal pairs compare model rows that differ in exactly one design choice;
ties count as wins for neither side, so reported fractions are
conservative.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .conllu import Treebank

PARSERS = ("transition-standard", "transition-eager", "graph")
POS_ORDER = ("gold", "auto", "none")


@dataclass
class AttachmentScores:
    uas: float  # percent of tokens with the correct head
    las: float  # percent with correct head and deprel
    token_count: int

    def __str__(self) -> str:
        return f"UAS {self.uas:.2f} LAS {self.las:.2f}"


def attachment_scores(gold: Treebank, pred: Treebank) -> AttachmentScores:
    """Token-level attachment scores; alignment is by sentence order and
    token forms, and any divergence is an error naming the first bad
    sentence."""
    if len(gold.trees) != len(pred.trees):
        raise ValueError(f"sentence count mismatch: gold {len(gold.trees)} vs pred {len(pred.trees)}")
    head_hits = 0
    both_hits = 0
    total = 0
    for i, (g, p) in enumerate(zip(gold.trees, pred.trees)):
        if g.forms() != p.forms():
            raise ValueError(f"sentence {i + 1}: token forms diverge")
        for gt, pt in zip(g.tokens, p.tokens):
            total += 1
            if gt.head == pt.head:
                head_hits += 1
                if gt.deprel == pt.deprel:
                    both_hits += 1
    if total == 0:
        raise ValueError("empty treebanks")
    return AttachmentScores(
        uas=100.0 * head_hits / total,
        las=100.0 * both_hits / total,
        token_count=total,
    )


@dataclass(frozen=True)
class BenchmarkRow:
    """One evaluated model: its four design coordinates plus scores."""

    model_id: str
    treebank: str
    parser: str  # transition-standard | transition-eager | graph
    encoder: str
    augmented: bool
    pos_mode: str
    uas: float
    las: float


@dataclass
class PairwiseCount:
    """Strict win counts between two values of one design dimension."""

    dimension: str
    value_a: str
    value_b: str
    n: int
    uas_wins_a: int = 0
    uas_wins_b: int = 0
    las_wins_a: int = 0
    las_wins_b: int = 0

    def describe(self) -> str:
        return (
            f"{self.dimension}: {self.value_b} beats {self.value_a} "
            f"in UAS in {self.uas_wins_b}/{self.n} and in LAS in {self.las_wins_b}/{self.n}"
        )


class IncompleteGridError(ValueError):
    """The row set does not form a full grid for the requested dimension."""


def _row_value(row: BenchmarkRow, dimension: str) -> str:
    if dimension == "encoder":
        return row.encoder
    if dimension == "augment":
        return "augmented" if row.augmented else "plain"
    if dimension == "transition-system":
        return {"transition-standard": "standard", "transition-eager": "eager"}[row.parser]
    if dimension == "pos":
        return row.pos_mode
    raise ValueError(f"unknown dimension {dimension!r}")


def _group_key(row: BenchmarkRow, dimension: str):
    coords = {
        "treebank": row.treebank,
        "parser": row.parser,
        "encoder": row.encoder,
        "augment": row.augmented,
        "pos": row.pos_mode,
    }
    varied = {
        "encoder": ("encoder",),
        "augment": ("augment",),
        "transition-system": ("parser",),
        "pos": ("pos",),
    }[dimension]
    return tuple((k, v) for k, v in coords.items() if k not in varied)


def _value_order(dimension: str, values) -> list[str]:
    if dimension == "pos":
        return [v for v in POS_ORDER if v in values]
    return sorted(values)


def minimal_pair_report(rows, dimension: str) -> list[PairwiseCount]:
    """Group rows into minimal pairs along one design dimension and count
    strict UAS/LAS wins per side.

    Dimensions: encoder, augment, transition-system (over transition rows
    only), pos (all mode pairs within each triplet), and parser-family
    (graph vs the higher-LAS transition model of each standard/eager pair).
    """
    rows = list(rows)
    if dimension == "parser-family":
        return _family_report(rows)
    if dimension == "transition-system":
        rows = [r for r in rows if r.parser.startswith("transition-")]
    values = sorted({_row_value(r, dimension) for r in rows})
    if len(values) < 2:
        return []
    groups: dict[tuple, dict[str, BenchmarkRow]] = {}
    for row in rows:
        slot = groups.setdefault(_group_key(row, dimension), {})
        value = _row_value(row, dimension)
        if value in slot:
            raise IncompleteGridError(f"duplicate row for {value} at {_group_key(row, dimension)}")
        slot[value] = row
    missing = [
        (key, value)
        for key, slot in sorted(groups.items())
        for value in values
        if value not in slot
    ]
    if missing:
        raise IncompleteGridError(f"grid incomplete for {dimension}: missing {missing}")

    ordered = _value_order(dimension, values)
    out = []
    for i, a in enumerate(ordered):
        for b in ordered[i + 1 :]:
            count = PairwiseCount(dimension=dimension, value_a=a, value_b=b, n=len(groups))
            for slot in groups.values():
                _tally(count, slot[a], slot[b])
            out.append(count)
    return out


def _tally(count: PairwiseCount, ra: BenchmarkRow, rb: BenchmarkRow) -> None:
    if ra.uas > rb.uas:
        count.uas_wins_a += 1
    elif rb.uas > ra.uas:
        count.uas_wins_b += 1
    if ra.las > rb.las:
        count.las_wins_a += 1
    elif rb.las > ra.las:
        count.las_wins_b += 1


def _family_report(rows) -> list[PairwiseCount]:
    """Graph vs transition: per standard/eager pair, the higher-LAS
    transition model (ties: arc-standard) represents the family."""
    groups: dict[tuple, dict[str, BenchmarkRow]] = {}
    for row in rows:
        key = (row.treebank, row.encoder, row.augmented, row.pos_mode)
        slot = groups.setdefault(key, {})
        if row.parser in slot:
            raise IncompleteGridError(f"duplicate row for {row.parser} at {key}")
        slot[row.parser] = row
    missing = [
        (key, parser)
        for key, slot in sorted(groups.items())
        for parser in PARSERS
        if parser not in slot
    ]
    if missing:
        raise IncompleteGridError(f"grid incomplete for parser-family: missing {missing}")
    count = PairwiseCount(
        dimension="parser-family", value_a="graph", value_b="transition", n=len(groups)
    )
    for slot in groups.values():
        standard = slot["transition-standard"]
        eager = slot["transition-eager"]
        best_transition = eager if eager.las > standard.las else standard
        _tally(count, slot["graph"], best_transition)
    return [count]


DIMENSIONS = ("encoder", "parser-family", "transition-system", "augment", "pos")


@dataclass
class BenchmarkReport:
    rows: list[BenchmarkRow]
    analyses: dict[str, list[PairwiseCount]] = field(default_factory=dict)

    def run_analyses(self) -> None:
        for dimension in DIMENSIONS:
            try:
                self.analyses[dimension] = minimal_pair_report(self.rows, dimension)
            except IncompleteGridError:
                self.analyses[dimension] = []

    def to_tsv(self) -> str:
        lines = ["model_id\ttreebank\tparser\tencoder\taugmented\tpos_mode\tuas\tlas"]
        for r in sorted(self.rows, key=lambda r: (r.treebank, r.model_id)):
            lines.append(
                f"{r.model_id}\t{r.treebank}\t{r.parser}\t{r.encoder}"
                f"\t{int(r.augmented)}\t{r.pos_mode}\t{r.uas:.2f}\t{r.las:.2f}"
            )
        return "\n".join(lines) + "\n"

    def render_text(self) -> str:
        """Aligned grid (rows = architectures, column pairs = treebank x pos
        mode) followed by the minimal-pair analyses."""
        treebanks = sorted({r.treebank for r in self.rows})
        pos_modes = [m for m in POS_ORDER if any(r.pos_mode == m for r in self.rows)]
        archs = sorted({(r.parser, r.encoder, r.augmented) for r in self.rows})
        by_coord = {
            (r.parser, r.encoder, r.augmented, r.treebank, r.pos_mode): r for r in self.rows
        }
        lines = ["benchmark results (UAS/LAS, all tokens incl. punctuation)"]
        header = f"{'model':36s}"
        for tb in treebanks:
            for mode in pos_modes:
                header += f" {tb + ':' + mode:>16s}"
        lines.append(header)
        for parser, encoder, augmented in archs:
            name = f"{parser}+{encoder}" + ("+aug" if augmented else "")
            line = f"{name:36s}"
            for tb in treebanks:
                for mode in pos_modes:
                    row = by_coord.get((parser, encoder, augmented, tb, mode))
                    cell = f"{row.uas:.2f}/{row.las:.2f}" if row else "-"
                    line += f" {cell:>16s}"
            lines.append(line)
        for dimension in DIMENSIONS:
            for count in self.analyses.get(dimension, []):
                lines.append(count.describe())
        return "\n".join(lines) + "\n"
