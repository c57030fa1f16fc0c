"""Corpus generators shared by the test suite.

The projective sampler builds trees by recursive span decomposition, so
projectivity holds by construction (independent of any parser machinery).
The toy grammar produces projective sentences whose heads are predictable
from word classes; the `mx*` modifier forms are deliberately ambiguous
between ADJ/amod and NUM/nummod so that POS-agnostic models face an
irreducible labeled-attachment ceiling while heads stay learnable.
"""

import random

from depparse.conllu import Token, Tree, Treebank

DEPRELS = ["advmod", "amod", "case", "det", "nmod", "nsubj", "obj", "obl", "punct"]
UPOS_SAMPLE = ["ADJ", "ADP", "ADV", "DET", "NOUN", "PRON", "PUNCT", "VERB"]


def make_tree(heads, deprels=None, forms=None, upos=None, comments=()):
    n = len(heads)
    deprels = deprels or ["root" if h == 0 else "dep" for h in heads]
    forms = forms or [f"w{i}" for i in range(1, n + 1)]
    upos = upos or ["NOUN"] * n
    tokens = [
        Token(id=i + 1, form=forms[i], upos=upos[i], head=heads[i], deprel=deprels[i])
        for i in range(n)
    ]
    return Tree(tokens=tokens, comments=list(comments))


def _blocks(rng, lo, hi):
    out = []
    start = lo
    while start <= hi:
        end = rng.randint(start, hi)
        out.append((start, end))
        start = end + 1
    return out


def random_projective_tree(rng: random.Random, n: int) -> Tree:
    """Uniform-support projective tree via random span decomposition."""
    heads = [0] * (n + 1)

    def build(lo, hi, head):
        if lo > hi:
            return
        top = rng.randint(lo, hi)
        heads[top] = head
        for a, b in _blocks(rng, lo, top - 1):
            build(a, b, top)
        for a, b in _blocks(rng, top + 1, hi):
            build(a, b, top)

    build(1, n, 0)
    deprels = ["root" if heads[i] == 0 else rng.choice(DEPRELS) for i in range(1, n + 1)]
    upos = [rng.choice(UPOS_SAMPLE) for _ in range(n)]
    return make_tree(heads[1:], deprels=deprels, upos=upos)


def random_valid_tree(rng: random.Random, n: int) -> Tree:
    """Arbitrary single-rooted tree (often non-projective): tokens attach to
    a uniformly chosen earlier-inserted token."""
    order = list(range(1, n + 1))
    rng.shuffle(order)
    heads = [0] * (n + 1)
    inserted = [order[0]]
    for tok in order[1:]:
        heads[tok] = rng.choice(inserted)
        inserted.append(tok)
    deprels = ["root" if heads[i] == 0 else rng.choice(DEPRELS) for i in range(1, n + 1)]
    upos = [rng.choice(UPOS_SAMPLE) for _ in range(n)]
    return make_tree(heads[1:], deprels=deprels, upos=upos)


def random_treebank(rng: random.Random, n_trees: int, max_len: int = 8) -> Treebank:
    """Valid treebank with assorted optional fields for round-trip tests."""
    forms_pool = ["กิน", "ข้าว", "แมว", "maison", "x", "a-b", "1,5", "?!"]
    trees = []
    for i in range(n_trees):
        n = rng.randint(2, max_len)
        tree = random_valid_tree(rng, n)
        for tok in tree.tokens:
            tok.form = rng.choice(forms_pool) + str(rng.randint(0, 99))
            if rng.random() < 0.5:
                tok.lemma = tok.form.lower()
            if rng.random() < 0.3:
                tok.xpos = "X" + str(rng.randint(0, 9))
            if rng.random() < 0.3:
                tok.feats = "Num=Sing"
            if rng.random() < 0.2:
                tok.misc = "SpaceAfter=No"
        if rng.random() < 0.7:
            tree.comments = [f"# sent_id = s{i}", "# text = " + " ".join(tree.forms())]
        trees.append(tree)
    return Treebank(trees=trees, name="random")


# ---------------------------------------------------------------------------
# Toy grammar (vocabulary 111 forms, sentence length 2..12, all projective).

NOUNS = [f"nn{i:02d}" for i in range(40)]
VERBS = [f"vb{i:02d}" for i in range(20)]
DETS = [f"dt{i}" for i in range(5)]
ADJS = [f"aj{i:02d}" for i in range(15)]
AMBIG_MODS = [f"mx{i:02d}" for i in range(15)]
ADVS = [f"av{i}" for i in range(8)]
ADPS = [f"ad{i}" for i in range(5)]
PUNCT = [".", "!", "?"]

TOY_VOCAB = NOUNS + VERBS + DETS + ADJS + AMBIG_MODS + ADVS + ADPS + PUNCT


def _noun_phrase(rng, words, role, allow_det=True):
    """Append one NP; returns the index (0-based in `words`) of its head noun.

    words entries are [form, upos, head, deprel] with head fixed up later via
    absolute 1-based positions.
    """
    if allow_det and rng.random() < 0.55:
        words.append([rng.choice(DETS), "DET", None, "det"])
    if rng.random() < 0.5:
        if rng.random() < 0.5:
            words.append([rng.choice(ADJS), "ADJ", None, "amod"])
        else:
            # ambiguous form: the label is unrecoverable without the POS tag
            if rng.random() < 0.5:
                words.append([rng.choice(AMBIG_MODS), "ADJ", None, "amod"])
            else:
                words.append([rng.choice(AMBIG_MODS), "NUM", None, "nummod"])
    noun_pos = len(words)
    words.append([rng.choice(NOUNS), "NOUN", None, role])
    for entry in words[:noun_pos]:
        if entry[2] is None and entry[3] in ("det", "amod", "nummod"):
            entry[2] = noun_pos + 1  # 1-based position of the noun
    return noun_pos


def toy_sentence(rng: random.Random) -> Tree:
    words: list[list] = []
    subj = _noun_phrase(rng, words, "nsubj")
    if rng.random() < 0.3:
        words.append([rng.choice(ADVS), "ADV", None, "advmod"])
    verb_pos = len(words)
    words.append([rng.choice(VERBS), "VERB", 0, "root"])
    if rng.random() < 0.7:
        _noun_phrase(rng, words, "obj")
    if rng.random() < 0.4:
        adp_pos = len(words)
        words.append([rng.choice(ADPS), "ADP", None, "case"])
        pp_noun = _noun_phrase(rng, words, "obl", allow_det=False)
        words[adp_pos][2] = pp_noun + 1
    if rng.random() < 0.9:
        words.append([rng.choice(PUNCT), "PUNCT", None, "punct"])
    verb_id = verb_pos + 1
    for entry in words:
        if entry[2] is None:
            entry[2] = verb_id
    assert 2 <= len(words) <= 12
    tokens = [
        Token(id=i + 1, form=form, upos=upos, head=head, deprel=deprel)
        for i, (form, upos, head, deprel) in enumerate(words)
    ]
    return Tree(tokens=tokens)


def toy_corpus(seed: int, n_trees: int, name: str = "toy") -> Treebank:
    rng = random.Random(seed)
    return Treebank(trees=[toy_sentence(rng) for _ in range(n_trees)], name=name)
