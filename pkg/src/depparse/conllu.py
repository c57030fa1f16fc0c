"""Reading, writing, and validating CoNLL-U dependency trees.

Wire format: 10 tab-separated columns ID FORM LEMMA UPOS XPOS FEATS HEAD
DEPREL DEPS MISC, "_" for an empty field, '#'-prefixed comment lines, and a
blank line after each sentence. Multiword-token ranges and empty nodes (ids
containing '-' or '.') are skipped with a warning. All values are plain text
and all operations here are pure, so shared Treebank objects are safe to
read from multiple threads.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace

UPOS_TAGS = (
    "ADJ", "ADP", "ADV", "AUX", "CCONJ", "DET", "INTJ", "NOUN", "NUM",
    "PART", "PRON", "PROPN", "PUNCT", "SCONJ", "SYM", "VERB", "X",
)


class ConlluError(ValueError):
    """Malformed CoNLL-U input."""


class ConlluWarning(UserWarning):
    """Recoverable oddity in CoNLL-U input (skipped line etc.)."""


@dataclass
class Token:
    """One syntactic word. head 0 means the artificial root; None means unset."""

    id: int
    form: str
    lemma: str | None = None
    upos: str | None = None
    xpos: str | None = None
    feats: str | None = None
    head: int | None = None
    deprel: str | None = None
    deps: str | None = None
    misc: str | None = None

    def copy(self, **changes) -> "Token":
        return replace(self, **changes)


@dataclass
class Tree:
    """One sentence: tokens with ids 1..n in order, plus its comment lines."""

    tokens: list[Token]
    comments: list[str] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.tokens)

    def __iter__(self):
        return iter(self.tokens)

    def forms(self) -> list[str]:
        return [t.form for t in self.tokens]

    def heads(self) -> list[int | None]:
        return [t.head for t in self.tokens]

    def deprels(self) -> list[str | None]:
        return [t.deprel for t in self.tokens]

    def upos_tags(self) -> list[str | None]:
        return [t.upos for t in self.tokens]


@dataclass
class Treebank:
    trees: list[Tree]
    name: str = ""

    def __len__(self) -> int:
        return len(self.trees)

    def __iter__(self):
        return iter(self.trees)

    def __getitem__(self, i):
        return self.trees[i]


@dataclass
class ValidationReport:
    """Accumulated rule violations; `valid` iff none. Entries are
    (rule_id, token_id or None, message)."""

    violations: list[tuple[str, int | None, str]] = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return not self.violations

    def rules(self) -> set[str]:
        return {rule for rule, _, _ in self.violations}


_EMPTY = "_"


def _field_out(value: str | None) -> str:
    return _EMPTY if value is None or value == "" else value


def _field_in(value: str) -> str | None:
    return None if value == _EMPTY else value


def parse_conllu(text: str, name: str = "") -> Treebank:
    """Parse CoNLL-U text into a Treebank, one Tree per sentence block."""
    trees: list[Tree] = []
    comments: list[str] = []
    tokens: list[Token] = []

    def flush(lineno: int) -> None:
        nonlocal comments, tokens
        if not tokens and not comments:
            return
        if not tokens:
            raise ConlluError(f"line {lineno}: comment block without token lines")
        for pos, tok in enumerate(tokens, start=1):
            if tok.id != pos:
                raise ConlluError(
                    f"line {lineno}: sentence ending here has non-contiguous "
                    f"ids (token {pos} has id {tok.id})"
                )
        trees.append(Tree(tokens=tokens, comments=comments))
        comments, tokens = [], []

    lineno = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip("\r")
        if not line.strip():
            flush(lineno)
            continue
        if line.startswith("#"):
            comments.append(line)
            continue
        fields = line.split("\t")
        if len(fields) != 10:
            raise ConlluError(
                f"line {lineno}: expected 10 tab-separated fields, got {len(fields)}"
            )
        tok_id = fields[0]
        if "-" in tok_id or "." in tok_id:
            warnings.warn(
                f"line {lineno}: skipping multiword-token/empty-node line (id {tok_id!r})",
                ConlluWarning,
                stacklevel=2,
            )
            continue
        if not tok_id.isdigit():
            raise ConlluError(f"line {lineno}: non-numeric token id {tok_id!r}")
        head_field = fields[6]
        if head_field == _EMPTY:
            head = None
        elif head_field.isdigit():
            head = int(head_field)
        else:
            raise ConlluError(f"line {lineno}: non-numeric head {head_field!r}")
        tokens.append(
            Token(
                id=int(tok_id),
                form=fields[1],
                lemma=_field_in(fields[2]),
                upos=_field_in(fields[3]),
                xpos=_field_in(fields[4]),
                feats=_field_in(fields[5]),
                head=head,
                deprel=_field_in(fields[7]),
                deps=_field_in(fields[8]),
                misc=_field_in(fields[9]),
            )
        )
    flush(lineno + 1)
    return Treebank(trees=trees, name=name)


def serialize_conllu(tb: Treebank) -> str:
    """Inverse of parse_conllu: emits comments, token lines, blank separators."""
    chunks: list[str] = []
    for tree in tb.trees:
        for comment in tree.comments:
            chunks.append(comment + "\n")
        for tok in tree.tokens:
            head = _EMPTY if tok.head is None else str(tok.head)
            chunks.append(
                "\t".join(
                    (
                        str(tok.id),
                        tok.form,
                        _field_out(tok.lemma),
                        _field_out(tok.upos),
                        _field_out(tok.xpos),
                        _field_out(tok.feats),
                        head,
                        _field_out(tok.deprel),
                        _field_out(tok.deps),
                        _field_out(tok.misc),
                    )
                )
                + "\n"
            )
        chunks.append("\n")
    return "".join(chunks)


def read_conllu(path, name: str | None = None) -> Treebank:
    with open(path, encoding="utf-8") as fh:
        return parse_conllu(fh.read(), name=name if name is not None else str(path))


def write_conllu(tb: Treebank, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize_conllu(tb))


# Rule ids used by validate_tree and the treebank QA tooling.
R1_SINGLE_TOKEN = "R1"
R2_INCOMPLETE_LABELS = "R2"
R3_ROOT_COUNT = "R3"
R4_HEAD_RANGE = "R4"
R5_UNREACHABLE = "R5"


def validate_tree(tree: Tree) -> ValidationReport:
    """Check tree-validity rules, accumulating every violation.

    R1: more than one token. R2: upos/head/deprel set on every token.
    R3: exactly one head-0 token. R4: heads within 0..n. R5: every token
    reaches the root by following heads (no cycles, no dangling chains).
    """
    report = ValidationReport()
    n = len(tree.tokens)
    if n <= 1:
        report.violations.append(
            (R1_SINGLE_TOKEN, None, f"tree has {n} token(s); need at least 2")
        )
    for tok in tree.tokens:
        missing = [
            name
            for name, value in (("upos", tok.upos), ("head", tok.head), ("deprel", tok.deprel))
            if value is None
        ]
        if missing:
            report.violations.append(
                (R2_INCOMPLETE_LABELS, tok.id, f"unlabeled fields: {', '.join(missing)}")
            )
    roots = [tok.id for tok in tree.tokens if tok.head == 0]
    if len(roots) != 1:
        report.violations.append(
            (R3_ROOT_COUNT, None, f"expected exactly 1 root, found {len(roots)}")
        )
    heads = {tok.id: tok.head for tok in tree.tokens}
    for tok in tree.tokens:
        if tok.head is not None and not 0 <= tok.head <= n:
            report.violations.append(
                (R4_HEAD_RANGE, tok.id, f"head {tok.head} outside 0..{n}")
            )
    for tok in tree.tokens:
        seen = set()
        cur: int | None = tok.id
        while cur not in (None, 0):
            if cur in seen or cur not in heads:
                report.violations.append(
                    (R5_UNREACHABLE, tok.id, "head chain never reaches the root")
                )
                break
            seen.add(cur)
            cur = heads[cur]
        else:
            if cur is None:
                report.violations.append(
                    (R5_UNREACHABLE, tok.id, "head chain hits an unset head")
                )
    return report


def is_projective(tree: Tree) -> bool:
    """True iff no two arcs cross: for every arc (h, d), each token strictly
    between them is a descendant of h. The root arc is anchored at 0."""
    report = validate_tree(tree)
    if not report.valid:
        raise ValueError(f"is_projective requires a valid tree; violations: {report.violations}")
    n = len(tree.tokens)
    heads = [0] * (n + 1)
    for tok in tree.tokens:
        heads[tok.id] = tok.head
    # descends[a][b] iff b is a (non-strict) descendant of a
    ancestors: list[set[int]] = [set() for _ in range(n + 1)]
    for d in range(1, n + 1):
        cur = d
        while cur != 0:
            ancestors[d].add(cur)
            cur = heads[cur]
        ancestors[d].add(0)
    for d in range(1, n + 1):
        h = heads[d]
        lo, hi = min(h, d), max(h, d)
        for between in range(lo + 1, hi):
            if h not in ancestors[between]:
                return False
    return True
