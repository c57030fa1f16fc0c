import random
from collections import Counter

import pytest

from depparse.conllu import Tree, Treebank, validate_tree
from depparse.treebank import (
    SplitCoverageWarning,
    SplitSpec,
    agreement_report,
    attachment_agreement,
    cohen_kappa,
    extract_trees,
    filter_trees,
    format_agreement,
    stratified_split,
)
from helpers import make_tree, random_valid_tree, toy_corpus


def test_extract_components():
    # token 3 alone; {1,2} and {4,5} linked
    tree = make_tree([2, 0, 0, 5, 0])
    pieces = extract_trees(tree)
    assert [len(p) for p in pieces] == [2, 1, 2]
    for piece in pieces:
        ids = [t.id for t in piece.tokens]
        assert ids == list(range(1, len(ids) + 1))
        assert sum(1 for t in piece.tokens if t.head == 0) == 1


def test_extract_connected_tree_is_identity_up_to_renumbering():
    tree = make_tree([2, 0, 2, 3])
    pieces = extract_trees(tree)
    assert len(pieces) == 1
    assert [t.head for t in pieces[0].tokens] == [2, 0, 2, 3]
    assert [t.form for t in pieces[0].tokens] == tree.forms()


def test_extract_all_unset_heads():
    tree = make_tree([0, 0, 0])
    for tok in tree.tokens:
        tok.head = None
    pieces = extract_trees(tree)
    assert [len(p) for p in pieces] == [1, 1, 1]
    assert all(p.tokens[0].head == 0 for p in pieces)


def test_extract_out_of_range_head_starts_component():
    tree = make_tree([2, 0, 9])
    pieces = extract_trees(tree)
    assert [len(p) for p in pieces] == [2, 1]
    assert pieces[1].tokens[0].head == 0


def test_extract_partitions_tokens_and_outputs_pass_r4_r5():
    rng = random.Random(11)
    for _ in range(100):
        n = rng.randint(1, 10)
        # acyclic partial annotation: heads point to earlier tokens, 0, or unset
        heads = []
        for i in range(1, n + 1):
            r = rng.random()
            if r < 0.3 or i == 1:
                heads.append(0 if rng.random() < 0.5 else None)
            else:
                heads.append(rng.randint(1, i - 1))
        tree = make_tree([h if h is not None else 0 for h in heads])
        for tok, h in zip(tree.tokens, heads):
            tok.head = h
        pieces = extract_trees(tree)
        assert sum(len(p) for p in pieces) == n
        for piece in pieces:
            rules = validate_tree(piece).rules()
            assert "R4" not in rules and "R5" not in rules


def test_extract_keeps_cyclic_components_for_validation():
    tree = make_tree([2, 1])
    pieces = extract_trees(tree)
    assert len(pieces) == 1
    assert {"R3", "R5"} <= validate_tree(pieces[0]).rules()


def test_filter_trees_reasons():
    good = make_tree([2, 0], deprels=["nsubj", "root"])
    single = make_tree([0])
    unlabeled = make_tree([2, 0])
    unlabeled.tokens[0].deprel = None
    kept, discarded = filter_trees([good, single, unlabeled])
    assert kept == [good]
    assert [reason for _, reason in discarded] == ["R1", "R2"]


def test_filter_all_valid():
    trees = [make_tree([2, 0], deprels=["nsubj", "root"]) for _ in range(3)]
    kept, discarded = filter_trees(trees)
    assert len(kept) == 3 and discarded == []


def test_cohen_kappa_cases():
    assert cohen_kappa(list("NVNN"), list("NVNN")) == 1.0
    assert cohen_kappa(list("NVNN"), list("NVVN")) == pytest.approx(0.5)
    assert cohen_kappa(["N", "N"], ["V", "V"]) == pytest.approx(0.0)
    with pytest.raises(ValueError):
        cohen_kappa(["N"], ["N", "V"])


def test_cohen_kappa_relabeling_invariance():
    rng = random.Random(3)
    labels = ["A", "B", "C", "D"]
    mapping = {"A": "x", "B": "y", "C": "z", "D": "w"}
    for _ in range(50):
        a = [rng.choice(labels) for _ in range(30)]
        b = [rng.choice(labels) for _ in range(30)]
        assert cohen_kappa(a, b) == pytest.approx(
            cohen_kappa([mapping[x] for x in a], [mapping[x] for x in b])
        )


def test_attachment_agreement_cases():
    base = make_tree([2, 0, 2, 2], deprels=["nsubj", "root", "obj", "punct"])
    assert attachment_agreement(base, base) == (1.0, 1.0)
    label_diff = make_tree([2, 0, 2, 2], deprels=["nsubj", "root", "iobj", "punct"])
    assert attachment_agreement(base, label_diff) == (1.0, 0.75)
    head_diff = make_tree([2, 0, 2, 3], deprels=["nsubj", "root", "obj", "punct"])
    assert attachment_agreement(base, head_diff) == (0.75, 0.75)


def test_attachment_agreement_requires_same_tokens():
    with pytest.raises(ValueError):
        attachment_agreement(make_tree([0, 1]), make_tree([0, 1, 1]))


def test_labeled_never_exceeds_unlabeled():
    rng = random.Random(9)
    for _ in range(200):
        n = rng.randint(2, 8)
        a, b = random_valid_tree(rng, n), random_valid_tree(rng, n)
        b = Tree(tokens=[t.copy(form=a.tokens[i].form) for i, t in enumerate(b.tokens)])
        unlabeled, labeled = attachment_agreement(a, b)
        assert labeled <= unlabeled + 1e-12


def test_split_sizes_and_determinism():
    tb = Treebank(trees=[make_tree([2, 0], deprels=["nsubj", "root"]) for _ in range(100)])
    spec = SplitSpec(seed=7)
    train, dev, test = stratified_split(tb, spec)
    assert (len(train.trees), len(dev.trees), len(test.trees)) == (80, 10, 10)
    train2, dev2, test2 = stratified_split(tb, SplitSpec(seed=7))
    assert train.trees == train2.trees and dev.trees == dev2.trees and test.trees == test2.trees


def test_split_disjoint_union():
    tb = toy_corpus(2, 60)
    train, dev, test = stratified_split(tb, SplitSpec(seed=1, min_label_count=10**9))
    got = sorted(
        (tuple(t.forms()) for part in (train, dev, test) for t in part.trees)
    )
    assert got == sorted(tuple(t.forms()) for t in tb.trees)
    assert len(train.trees) + len(dev.trees) + len(test.trees) == len(tb.trees)


def test_split_rare_label_coverage():
    trees = [make_tree([2, 0], deprels=["nsubj", "root"]) for _ in range(97)]
    trees += [make_tree([2, 0], deprels=["dislocated", "root"]) for _ in range(3)]
    tb = Treebank(trees=trees)
    train, dev, test = stratified_split(tb, SplitSpec(seed=5, min_label_count=3))
    for part in (train, dev, test):
        count = sum(
            1 for t in part.trees for tok in t.tokens if tok.deprel == "dislocated"
        )
        assert count == 1
    assert (len(train.trees), len(dev.trees), len(test.trees)) == (80, 10, 10)


def test_split_impossible_coverage_warns():
    trees = [make_tree([2, 0], deprels=["nsubj", "root"]) for _ in range(11)]
    trees.append(make_tree([2, 0], deprels=["vocative", "root"]))
    tb = Treebank(trees=trees)
    with pytest.warns(SplitCoverageWarning):
        stratified_split(tb, SplitSpec(seed=0, min_label_count=1))


def test_split_needs_ten_trees():
    tb = Treebank(trees=[make_tree([2, 0])] * 9)
    with pytest.raises(ValueError):
        stratified_split(tb, SplitSpec())


def test_split_spec_validation():
    with pytest.raises(ValueError):
        SplitSpec(ratios=(0.5, 0.5, 0.5))


def test_agreement_report_and_format():
    a = toy_corpus(4, 20, name="a")
    b = Treebank(trees=[t for t in a.trees], name="b")
    result = agreement_report(a, b)
    assert result.kappa_upos == 1.0 and result.labeled_agreement == 1.0
    assert result.labeled_agreement <= result.unlabeled_agreement
    text = format_agreement(result)
    assert "kappa_upos = 1.000000" in text
    assert "labeled_agreement" in text
