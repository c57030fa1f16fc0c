import random

import pytest

from depparse.conllu import (
    ConlluError,
    ConlluWarning,
    Token,
    Tree,
    Treebank,
    is_projective,
    parse_conllu,
    serialize_conllu,
    validate_tree,
)
from helpers import make_tree, random_treebank, random_valid_tree

MINIMAL = "1\tกิน\t_\tVERB\t_\t_\t0\troot\t_\t_\n\n"


def test_parse_minimal_sentence():
    tb = parse_conllu(MINIMAL)
    assert len(tb.trees) == 1
    tok = tb.trees[0].tokens[0]
    assert (tok.id, tok.form, tok.upos, tok.head, tok.deprel) == (1, "กิน", "VERB", 0, "root")
    assert tok.lemma is None and tok.misc is None


def test_parse_empty_input():
    assert len(parse_conllu("").trees) == 0
    assert len(parse_conllu("\n\n\n").trees) == 0


def test_three_token_roundtrip_byte_identical():
    text = (
        "# sent_id = demo\n"
        "1\tI\t_\tPRON\t_\t_\t2\tnsubj\t_\t_\n"
        "2\teat\t_\tVERB\t_\t_\t0\troot\t_\t_\n"
        "3\trice\t_\tNOUN\t_\t_\t2\tobj\t_\t_\n"
        "\n"
    )
    tb = parse_conllu(text)
    assert serialize_conllu(tb) == text


def test_serialize_empty_and_single():
    assert serialize_conllu(Treebank(trees=[])) == ""
    one = Treebank(trees=[Tree(tokens=[Token(id=1, form="x")])])
    out = serialize_conllu(one)
    assert out == "1\tx\t_\t_\t_\t_\t_\t_\t_\t_\n\n"


def test_roundtrip_random_treebanks():
    rng = random.Random(42)
    for _ in range(40):
        tb = random_treebank(rng, rng.randint(1, 6))
        assert parse_conllu(serialize_conllu(tb)) == Treebank(trees=tb.trees, name="")


def test_multiword_and_empty_nodes_skipped_with_warning():
    text = (
        "1-2\tdel\t_\t_\t_\t_\t_\t_\t_\t_\n"
        "1\tde\t_\tADP\t_\t_\t2\tcase\t_\t_\n"
        "2\tel\t_\tNOUN\t_\t_\t0\troot\t_\t_\n"
        "2.1\tghost\t_\t_\t_\t_\t_\t_\t_\t_\n"
        "\n"
    )
    with pytest.warns(ConlluWarning):
        tb = parse_conllu(text)
    assert [t.form for t in tb.trees[0].tokens] == ["de", "el"]


@pytest.mark.parametrize(
    "bad, line_no",
    [
        ("1\tonly\tthree\n\n", 1),
        ("x\tform\t_\t_\t_\t_\t0\troot\t_\t_\n\n", 1),
        ("1\tform\t_\t_\t_\t_\tzz\troot\t_\t_\n\n", 1),
    ],
)
def test_parse_errors_name_line(bad, line_no):
    with pytest.raises(ConlluError, match=f"line {line_no}"):
        parse_conllu(bad)


def test_non_contiguous_ids_rejected():
    text = (
        "1\ta\t_\t_\t_\t_\t2\tdep\t_\t_\n"
        "3\tb\t_\t_\t_\t_\t0\troot\t_\t_\n"
        "\n"
    )
    with pytest.raises(ConlluError, match="non-contiguous"):
        parse_conllu(text)


def test_validate_single_token_tree():
    report = validate_tree(make_tree([0]))
    assert not report.valid
    assert report.rules() == {"R1"}


def test_validate_good_tree():
    report = validate_tree(make_tree([2, 0, 2], deprels=["nsubj", "root", "obj"]))
    assert report.valid and report.violations == []


def test_validate_cycle_and_missing_root():
    report = validate_tree(make_tree([2, 1]))
    assert {"R3", "R5"} <= report.rules()
    assert not report.valid


def test_validate_unlabeled_and_range():
    tree = make_tree([2, 0, 2])
    tree.tokens[0].upos = None
    report = validate_tree(tree)
    assert "R2" in report.rules()
    tree2 = make_tree([9, 0, 2])
    assert "R4" in validate_tree(tree2).rules()


def test_projectivity_examples():
    assert is_projective(make_tree([2, 0, 2]))
    assert not is_projective(make_tree([3, 4, 0, 3]))
    assert is_projective(make_tree([0, 1, 2, 3]))


def test_projectivity_requires_valid_tree():
    with pytest.raises(ValueError):
        is_projective(make_tree([2, 1]))


def _crossing_bruteforce(tree) -> bool:
    arcs = [(min(t.head, t.id), max(t.head, t.id)) for t in tree.tokens]
    for i, (a1, b1) in enumerate(arcs):
        for a2, b2 in arcs[i + 1 :]:
            if a1 < a2 < b1 < b2 or a2 < a1 < b2 < b1:
                return True
    return False


def test_projectivity_matches_crossing_check():
    rng = random.Random(5)
    seen = {True: 0, False: 0}
    for _ in range(400):
        tree = random_valid_tree(rng, rng.randint(2, 6))
        got = is_projective(tree)
        assert got == (not _crossing_bruteforce(tree))
        seen[got] += 1
    assert min(seen.values()) > 20  # both outcomes exercised
