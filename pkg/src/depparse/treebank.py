"""Treebank postprocessing, splitting, and annotation-agreement tools.

Everything here is a pure function over Treebank values. The split
balancing mechanizes the usual manual fix-up for rare labels as a
deterministic greedy swap loop.
"""

from __future__ import annotations

import math
import random
import warnings
from collections import Counter
from dataclasses import dataclass

from .conllu import Token, Tree, Treebank, validate_tree


@dataclass
class SplitSpec:
    ratios: tuple[float, float, float] = (0.8, 0.1, 0.1)
    seed: int = 0
    min_label_count: int = 3

    def __post_init__(self) -> None:
        if len(self.ratios) != 3 or any(r < 0 for r in self.ratios):
            raise ValueError("ratios must be three non-negative reals")
        if abs(sum(self.ratios) - 1.0) > 1e-9:
            raise ValueError(f"ratios must sum to 1, got {sum(self.ratios)}")
        if self.min_label_count < 1:
            raise ValueError("min_label_count must be >= 1")


@dataclass
class AgreementResult:
    kappa_upos: float
    kappa_deprel: float
    unlabeled_agreement: float
    labeled_agreement: float
    token_count: int


class SplitCoverageWarning(UserWarning):
    """A required label could not be represented in every split."""


def extract_trees(tree: Tree) -> list[Tree]:
    """Split a (possibly disconnected) annotation into its connected trees.

    Tokens are grouped by the undirected components of the head graph; heads
    pointing outside 1..n (0, unset, or out of range) start a new component.
    Each component is renumbered 1..k in surface order with heads remapped;
    a component root gets head 0. Components that are internally cyclic come
    out without a head-0 token and are left for validation to reject.
    """
    n = len(tree.tokens)
    parent = list(range(n + 1))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def union(a: int, b: int) -> None:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb

    for tok in tree.tokens:
        if tok.head is not None and 1 <= tok.head <= n and tok.head != tok.id:
            union(tok.id, tok.head)

    groups: dict[int, list[Token]] = {}
    for tok in tree.tokens:
        groups.setdefault(find(tok.id), []).append(tok)

    out: list[Tree] = []
    for _, members in sorted(groups.items(), key=lambda kv: kv[1][0].id):
        members.sort(key=lambda t: t.id)
        renumber = {tok.id: i for i, tok in enumerate(members, start=1)}
        new_tokens = []
        for tok in members:
            if tok.head in renumber and tok.head != tok.id:
                head = renumber[tok.head]
            else:
                head = 0
            new_tokens.append(tok.copy(id=renumber[tok.id], head=head))
        out.append(Tree(tokens=new_tokens, comments=list(tree.comments)))
    return out


def filter_trees(trees) -> tuple[list[Tree], list[tuple[Tree, str]]]:
    """Keep trees whose validation report is clean; pair rejects with the
    violated rule ids (e.g. "R1", "R3+R5")."""
    kept: list[Tree] = []
    discarded: list[tuple[Tree, str]] = []
    for tree in trees:
        report = validate_tree(tree)
        if report.valid:
            kept.append(tree)
        else:
            discarded.append((tree, "+".join(sorted(report.rules()))))
    return kept, discarded


def _tree_labels(tree: Tree) -> Counter:
    labels: Counter = Counter()
    for tok in tree.tokens:
        if tok.upos is not None:
            labels[("upos", tok.upos)] += 1
        if tok.deprel is not None:
            labels[("deprel", tok.deprel)] += 1
    return labels


def _split_sizes(n: int, ratios: tuple[float, float, float]) -> list[int]:
    # Largest-remainder rounding so sizes sum to n and match ratios within 1.
    raw = [n * r for r in ratios]
    sizes = [math.floor(x) for x in raw]
    rest = n - sum(sizes)
    order = sorted(range(3), key=lambda i: raw[i] - sizes[i], reverse=True)
    for i in range(rest):
        sizes[order[i]] += 1
    return sizes


def stratified_split(
    tb: Treebank, spec: SplitSpec | None = None
) -> tuple[Treebank, Treebank, Treebank]:
    """Random 3-way split plus greedy swaps for rare-label coverage.

    After the seeded shuffle-and-cut, trees are swapped pairwise between
    splits until every upos/deprel label with total count >= min_label_count
    occurs in all three splits, no swap strictly reduces the number of
    missing (split, label) pairs, or 10,000 swaps were made. Labels that
    cannot be covered are reported with a SplitCoverageWarning.
    """
    spec = spec or SplitSpec()
    if len(tb.trees) < 10:
        raise ValueError(f"need at least 10 trees to split, got {len(tb.trees)}")

    rng = random.Random(spec.seed)
    order = list(range(len(tb.trees)))
    rng.shuffle(order)
    sizes = _split_sizes(len(order), spec.ratios)
    splits: list[list[int]] = [
        order[: sizes[0]],
        order[sizes[0] : sizes[0] + sizes[1]],
        order[sizes[0] + sizes[1] :],
    ]

    tree_labels = [_tree_labels(t) for t in tb.trees]
    totals: Counter = Counter()
    for c in tree_labels:
        totals.update(c)
    required = {label for label, count in totals.items() if count >= spec.min_label_count}

    split_counts = [Counter() for _ in range(3)]
    for si, members in enumerate(splits):
        for ti in members:
            split_counts[si].update(tree_labels[ti])

    def missing_pairs() -> list[tuple[int, tuple]]:
        out = []
        for si in range(3):
            for label in sorted(required):
                if split_counts[si][label] == 0:
                    out.append((si, label))
        return out

    def deficit_after_swap(si: int, i_pos: int, sj: int, j_pos: int) -> int:
        ti, tj = splits[si][i_pos], splits[sj][j_pos]
        for counts, gone, added in (
            (split_counts[si], tree_labels[ti], tree_labels[tj]),
            (split_counts[sj], tree_labels[tj], tree_labels[ti]),
        ):
            counts.subtract(gone)
            counts.update(added)
        deficit = len(missing_pairs())
        for counts, gone, added in (
            (split_counts[si], tree_labels[tj], tree_labels[ti]),
            (split_counts[sj], tree_labels[ti], tree_labels[tj]),
        ):
            counts.subtract(gone)
            counts.update(added)
        return deficit

    swaps = 0
    while swaps < 10_000:
        missing = missing_pairs()
        if not missing:
            break
        best = None  # (deficit, si, i_pos, sj, j_pos)
        si, label = missing[0]
        for sj in range(3):
            if sj == si:
                continue
            donors = [p for p, ti in enumerate(splits[sj]) if tree_labels[ti][label] > 0]
            for j_pos in donors:
                for i_pos in range(len(splits[si])):
                    deficit = deficit_after_swap(si, i_pos, sj, j_pos)
                    if best is None or deficit < best[0]:
                        best = (deficit, si, i_pos, sj, j_pos)
        if best is None or best[0] >= len(missing):
            break  # no improving swap exists
        _, si, i_pos, sj, j_pos = best
        ti, tj = splits[si][i_pos], splits[sj][j_pos]
        splits[si][i_pos], splits[sj][j_pos] = tj, ti
        split_counts[si].subtract(tree_labels[ti])
        split_counts[si].update(tree_labels[tj])
        split_counts[sj].subtract(tree_labels[tj])
        split_counts[sj].update(tree_labels[ti])
        swaps += 1

    for si, label in missing_pairs():
        warnings.warn(
            f"label {label[1]!r} ({label[0]}) cannot be represented in split {si}",
            SplitCoverageWarning,
            stacklevel=2,
        )

    names = ("train", "dev", "test")
    return tuple(
        Treebank(
            trees=[tb.trees[ti] for ti in sorted(members)],
            name=f"{tb.name}-{names[si]}" if tb.name else names[si],
        )
        for si, members in enumerate(splits)
    )


def cohen_kappa(a, b) -> float:
    """Chance-corrected agreement between two label sequences.

    kappa = (p_o - p_e) / (1 - p_e) with p_e from the per-annotator marginal
    distributions. Returns 1.0 for the degenerate all-agreeing case p_e = 1.
    """
    a, b = list(a), list(b)
    if len(a) != len(b):
        raise ValueError(f"length mismatch: {len(a)} vs {len(b)}")
    if not a:
        raise ValueError("empty label sequences")
    n = len(a)
    p_o = sum(1 for x, y in zip(a, b) if x == y) / n
    marg_a, marg_b = Counter(a), Counter(b)
    p_e = sum(marg_a[lab] * marg_b.get(lab, 0) for lab in marg_a) / (n * n)
    if p_e >= 1.0 - 1e-12:
        return 1.0
    return (p_o - p_e) / (1.0 - p_e)


def attachment_agreement(a: Tree, b: Tree) -> tuple[float, float]:
    """(unlabeled, labeled) agreement between two annotations of one sentence."""
    if len(a.tokens) != len(b.tokens) or a.forms() != b.forms():
        raise ValueError("trees must annotate the same token sequence")
    n = len(a.tokens)
    same_head = sum(1 for x, y in zip(a.tokens, b.tokens) if x.head == y.head)
    same_both = sum(
        1
        for x, y in zip(a.tokens, b.tokens)
        if x.head == y.head and x.deprel == y.deprel
    )
    return same_head / n, same_both / n


def agreement_report(tb_a: Treebank, tb_b: Treebank) -> AgreementResult:
    """Corpus-level agreement between two annotations of the same sentences.

    All tokens count, punctuation included. Kappas are computed over the
    concatenated upos/deprel sequences; attachment agreement over heads.
    """
    if len(tb_a.trees) != len(tb_b.trees):
        raise ValueError(f"tree count mismatch: {len(tb_a.trees)} vs {len(tb_b.trees)}")
    upos_a: list[str] = []
    upos_b: list[str] = []
    deprel_a: list[str] = []
    deprel_b: list[str] = []
    heads_match = 0
    both_match = 0
    total = 0
    for i, (ta, tbee) in enumerate(zip(tb_a.trees, tb_b.trees)):
        if ta.forms() != tbee.forms():
            raise ValueError(f"sentence {i + 1}: token forms differ")
        for x, y in zip(ta.tokens, tbee.tokens):
            total += 1
            upos_a.append(x.upos or "")
            upos_b.append(y.upos or "")
            deprel_a.append(x.deprel or "")
            deprel_b.append(y.deprel or "")
            if x.head == y.head:
                heads_match += 1
                if x.deprel == y.deprel:
                    both_match += 1
    return AgreementResult(
        kappa_upos=cohen_kappa(upos_a, upos_b),
        kappa_deprel=cohen_kappa(deprel_a, deprel_b),
        unlabeled_agreement=heads_match / total,
        labeled_agreement=both_match / total,
        token_count=total,
    )


def format_agreement(result: AgreementResult) -> str:
    """Text table plus machine-readable key=value lines."""
    lines = [
        "annotation agreement (all tokens, punctuation included)",
        f"  {'tokens compared':24s} {result.token_count:>10d}",
        f"  {'kappa (upos)':24s} {result.kappa_upos:>10.4f}",
        f"  {'kappa (deprel)':24s} {result.kappa_deprel:>10.4f}",
        f"  {'unlabeled agreement':24s} {result.unlabeled_agreement:>10.4f}",
        f"  {'labeled agreement':24s} {result.labeled_agreement:>10.4f}",
        "",
        f"token_count = {result.token_count}",
        f"kappa_upos = {result.kappa_upos:.6f}",
        f"kappa_deprel = {result.kappa_deprel:.6f}",
        f"unlabeled_agreement = {result.unlabeled_agreement:.6f}",
        f"labeled_agreement = {result.labeled_agreement:.6f}",
    ]
    return "\n".join(lines) + "\n"
