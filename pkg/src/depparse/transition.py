"""Arc-standard and arc-eager transition parsing.

States are immutable values, so replay and search never alias. The oracle
networks are single-hidden-layer feedforward classifiers over the features
of 3 state-determined tokens, with a joint softmax over
{shift, reduce} + {left-arc, right-arc} x labels.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .conllu import Token, Tree, Treebank, is_projective, validate_tree
from .features import EncoderConfig, LookupEncoder, TokenFeatures, Vocab
from .neural import (
    ParameterStore,
    Tensor,
    TrainSchedule,
    add,
    adam_step,
    concat,
    cross_entropy,
    dropout,
    matmul,
    relu,
    reshape,
    take_rows,
)

ARC_STANDARD = "arc-standard"
ARC_EAGER = "arc-eager"
SYSTEMS = (ARC_STANDARD, ARC_EAGER)

SHIFT = "shift"
LEFT_ARC = "left-arc"
RIGHT_ARC = "right-arc"
REDUCE = "reduce"

# Canonical action-kind order; ties in scoring resolve to the lowest index.
_KIND_ORDER = (SHIFT, LEFT_ARC, RIGHT_ARC, REDUCE)


class NonProjectiveError(ValueError):
    """Gold tree cannot be derived by a projective transition system."""


class OracleError(RuntimeError):
    """Static oracle reached a state it cannot act in (broken input)."""


@dataclass(frozen=True)
class Transition:
    kind: str
    label: str | None = None

    def __post_init__(self):
        creates_arc = self.kind in (LEFT_ARC, RIGHT_ARC)
        if creates_arc != (self.label is not None):
            raise ValueError(f"label must be present iff the transition creates an arc: {self}")


@dataclass(frozen=True)
class ParserState:
    """Stack/buffer configuration; `heads` maps dependent -> (head, label)
    in arc-creation order."""

    stack: tuple[int, ...]
    buffer: tuple[int, ...]
    heads: tuple[tuple[int, tuple[int, str]], ...] = ()
    history: tuple[Transition, ...] = ()

    @classmethod
    def initial(cls, n_tokens: int) -> "ParserState":
        return cls(stack=(0,), buffer=tuple(range(1, n_tokens + 1)))

    def head_map(self) -> dict[int, tuple[int, str]]:
        return dict(self.heads)

    def arcs(self) -> set[tuple[int, int, str]]:
        return {(head, dep, label) for dep, (head, label) in self.heads}

    def is_attached(self, tok: int) -> bool:
        return any(dep == tok for dep, _ in self.heads)


def legal_transitions(state: ParserState, system: str) -> set[str]:
    """Kinds applicable in `state`; empty set means the state is terminal."""
    legal: set[str] = set()
    if system == ARC_STANDARD:
        if state.buffer:
            legal.add(SHIFT)
        if len(state.stack) >= 2:
            legal.add(RIGHT_ARC)
            if state.stack[-2] != 0:
                legal.add(LEFT_ARC)
    elif system == ARC_EAGER:
        top = state.stack[-1] if state.stack else None
        attached = top is not None and state.is_attached(top)
        if state.buffer:
            legal.add(SHIFT)
            legal.add(RIGHT_ARC)
            if top not in (None, 0) and not attached:
                legal.add(LEFT_ARC)
        if attached:
            legal.add(REDUCE)
    else:
        raise ValueError(f"unknown system {system!r}")
    return legal


def apply_transition(state: ParserState, t: Transition, system: str) -> ParserState:
    if t.kind not in legal_transitions(state, system):
        raise ValueError(f"illegal transition {t} in state {state}")
    stack, buffer, heads = state.stack, state.buffer, state.heads
    if t.kind == SHIFT:
        stack = stack + (buffer[0],)
        buffer = buffer[1:]
    elif system == ARC_STANDARD:
        if t.kind == LEFT_ARC:  # top takes second-from-top as dependent
            heads = heads + ((stack[-2], (stack[-1], t.label)),)
            stack = stack[:-2] + (stack[-1],)
        else:  # RIGHT_ARC: second-from-top takes top
            heads = heads + ((stack[-1], (stack[-2], t.label)),)
            stack = stack[:-1]
    else:  # arc-eager
        if t.kind == LEFT_ARC:  # buffer front takes stack top
            heads = heads + ((stack[-1], (buffer[0], t.label)),)
            stack = stack[:-1]
        elif t.kind == RIGHT_ARC:  # stack top takes buffer front, which is pushed
            heads = heads + ((buffer[0], (stack[-1], t.label)),)
            stack = stack + (buffer[0],)
            buffer = buffer[1:]
        else:  # REDUCE
            stack = stack[:-1]
    return ParserState(stack=stack, buffer=buffer, heads=heads, history=state.history + (t,))


def feature_token_indices(state: ParserState, system: str):
    """The 3 token ids whose features feed the oracle network (None = absent).

    Arc-standard looks at the stack pair being decided plus the next buffer
    token; arc-eager at the stack top plus the next two buffer tokens.
    """
    if system == ARC_STANDARD:
        return (
            state.stack[-2] if len(state.stack) >= 2 else None,
            state.stack[-1] if state.stack else None,
            state.buffer[0] if state.buffer else None,
        )
    if system == ARC_EAGER:
        return (
            state.stack[-1] if state.stack else None,
            state.buffer[0] if state.buffer else None,
            state.buffer[1] if len(state.buffer) >= 2 else None,
        )
    raise ValueError(f"unknown system {system!r}")


def static_oracle(gold: Tree, system: str) -> list[Transition]:
    """Canonical gold transition sequence; replaying it rebuilds the gold
    arc set exactly. Raises NonProjectiveError for non-projective input."""
    report = validate_tree(gold)
    if not report.valid:
        raise ValueError(f"static_oracle needs a valid tree: {report.violations}")
    if not is_projective(gold):
        raise NonProjectiveError("gold tree is not projective")

    n = len(gold.tokens)
    gold_head = {tok.id: tok.head for tok in gold.tokens}
    gold_label = {tok.id: tok.deprel for tok in gold.tokens}
    n_deps = {i: 0 for i in range(n + 1)}
    for tok in gold.tokens:
        n_deps[tok.head] += 1

    out: list[Transition] = []
    state = ParserState.initial(n)
    collected = {i: 0 for i in range(n + 1)}

    while True:
        legal = legal_transitions(state, system)
        if not legal:
            break
        t = _oracle_action(state, system, gold_head, gold_label, n_deps, collected, legal)
        if t.kind == LEFT_ARC:
            dep = state.stack[-2] if system == ARC_STANDARD else state.stack[-1]
            collected[gold_head[dep]] += 1
        elif t.kind == RIGHT_ARC:
            dep = state.stack[-1] if system == ARC_STANDARD else state.buffer[0]
            collected[gold_head[dep]] += 1
        out.append(t)
        state = apply_transition(state, t, system)

    if state.arcs() != {(tok.head, tok.id, tok.deprel) for tok in gold.tokens}:
        raise OracleError("oracle replay failed to rebuild the gold arc set")
    return out


def _oracle_action(state, system, gold_head, gold_label, n_deps, collected, legal) -> Transition:
    if system == ARC_STANDARD:
        if len(state.stack) >= 2:
            top, second = state.stack[-1], state.stack[-2]
            if second != 0 and gold_head[second] == top:
                return Transition(LEFT_ARC, gold_label[second])
            if gold_head.get(top) == second and collected[top] == n_deps[top]:
                return Transition(RIGHT_ARC, gold_label[top])
        if SHIFT in legal:
            return Transition(SHIFT)
        raise OracleError(f"arc-standard oracle stuck in {state}")
    top = state.stack[-1]
    front = state.buffer[0] if state.buffer else None
    if front is not None:
        if top != 0 and not state.is_attached(top) and gold_head[top] == front:
            return Transition(LEFT_ARC, gold_label[top])
        if gold_head[front] == top:
            return Transition(RIGHT_ARC, gold_label[front])
    if REDUCE in legal and all(gold_head[b] != top for b in state.buffer):
        return Transition(REDUCE)
    if SHIFT in legal:
        return Transition(SHIFT)
    raise OracleError(f"arc-eager oracle stuck in {state}")


class ActionSpace:
    """Joint transition+label inventory in canonical order: SHIFT, then
    left-arcs and right-arcs with labels alphabetical, then REDUCE
    (arc-eager only)."""

    def __init__(self, labels, system: str):
        self.system = system
        self.labels = sorted(set(labels))
        self.transitions: list[Transition] = [Transition(SHIFT)]
        self.transitions += [Transition(LEFT_ARC, lab) for lab in self.labels]
        self.transitions += [Transition(RIGHT_ARC, lab) for lab in self.labels]
        if system == ARC_EAGER:
            self.transitions.append(Transition(REDUCE))
        self.index = {t: i for i, t in enumerate(self.transitions)}
        self._kind_slices = {
            SHIFT: [0],
            LEFT_ARC: list(range(1, 1 + len(self.labels))),
            RIGHT_ARC: list(range(1 + len(self.labels), 1 + 2 * len(self.labels))),
        }
        if system == ARC_EAGER:
            self._kind_slices[REDUCE] = [len(self.transitions) - 1]

    def __len__(self) -> int:
        return len(self.transitions)

    def encode(self, t: Transition) -> int:
        return self.index[t]

    def legal_mask(self, state: ParserState) -> np.ndarray:
        mask = np.zeros(len(self.transitions), dtype=bool)
        for kind in legal_transitions(state, self.system):
            mask[self._kind_slices[kind]] = True
        return mask


NULL_INDEX_OFFSET = 1  # the learned null-feature row sits after the n+1 feature rows


def _state_feature_rows(indices, n_tokens: int):
    """Map (t1, t2, t3) token ids to rows of [features; null] (None -> null row)."""
    null_row = n_tokens + 1
    return [null_row if i is None else i for i in indices]


class TransitionParser:
    """Greedy parser with a feedforward oracle network over 3-token features."""

    def __init__(
        self,
        system: str,
        encoder_cfg: EncoderConfig,
        vocab: Vocab,
        labels,
        hidden_dim: int = 256,
        store: ParameterStore | None = None,
    ):
        if system not in SYSTEMS:
            raise ValueError(f"unknown system {system!r}")
        self.system = system
        self.encoder_cfg = encoder_cfg
        self.vocab = vocab
        self.actions = ActionSpace(labels, system)
        self.hidden_dim = hidden_dim
        self.store = store if store is not None else ParameterStore()
        self.encoder = LookupEncoder(encoder_cfg, vocab, self.store)
        self.history: list[dict] = []

    # -- network ---------------------------------------------------------

    def _feature_matrix(self, feats: TokenFeatures) -> Tensor:
        null = self.store.parameter("oracle.null", (1, feats.feature_dim), init="embedding")
        return concat([feats.matrix, null], axis=0)

    def _logits(self, mat: Tensor, row_triples, train=False, rng=None, dropout_p=0.0) -> Tensor:
        flat = np.asarray(row_triples, dtype=np.int64).reshape(-1)
        d = mat.data.shape[1]
        x = reshape(take_rows(mat, flat), (len(row_triples), 3 * d))
        w1 = self.store.parameter("oracle.w1", (3 * d, self.hidden_dim))
        b1 = self.store.parameter("oracle.b1", (self.hidden_dim,), init="zeros")
        h = relu(add(matmul(x, w1), b1))
        if train and dropout_p > 0.0:
            h = dropout(h, dropout_p, rng=rng, train=True)
        w2 = self.store.parameter("oracle.w2", (self.hidden_dim, len(self.actions)))
        b2 = self.store.parameter("oracle.b2", (len(self.actions),), init="zeros")
        return add(matmul(h, w2), b2)

    def _encode(self, tree: Tree, pos_tags, train=False, rng=None, dropout_p=0.0) -> TokenFeatures:
        tags = _resolve_tags(self.encoder_cfg.pos_mode, tree, pos_tags)
        return self.encoder.encode(tree.forms(), tags, train=train, rng=rng, dropout_p=dropout_p)

    # -- supervision -----------------------------------------------------

    def oracle_items(self, gold: Tree) -> list[tuple[list[int], int]]:
        """(feature-row triple, gold action id) for every oracle state."""
        n = len(gold.tokens)
        items = []
        state = ParserState.initial(n)
        for t in static_oracle(gold, self.system):
            rows = _state_feature_rows(feature_token_indices(state, self.system), n)
            items.append((rows, self.actions.encode(t)))
            state = apply_transition(state, t, self.system)
        return items

    def loss(self, tree: Tree, items, pos_tags=None, train=False, rng=None, dropout_p=0.0) -> Tensor:
        feats = self._encode(tree, pos_tags, train=train, rng=rng, dropout_p=dropout_p)
        mat = self._feature_matrix(feats)
        logits = self._logits(mat, [rows for rows, _ in items], train=train, rng=rng, dropout_p=dropout_p)
        return cross_entropy(logits, [action for _, action in items])

    # -- inference -------------------------------------------------------

    def parse_tree(self, tree: Tree, pos_tags=None) -> Tree:
        """Greedy decode; guaranteed to return a tree satisfying R3-R5."""
        n = len(tree.tokens)
        tags = _resolve_tags(self.encoder_cfg.pos_mode, tree, pos_tags)
        feats = self.encoder.encode(tree.forms(), tags)
        mat = self._feature_matrix(feats)
        state = ParserState.initial(n)
        while True:
            mask = self.actions.legal_mask(state)
            if not mask.any():
                break
            rows = _state_feature_rows(feature_token_indices(state, self.system), n)
            scores = self._logits(mat, [rows]).data[0]
            scores = np.where(mask, scores, -np.inf)
            t = self.actions.transitions[int(np.argmax(scores))]
            state = apply_transition(state, t, self.system)
        heads, deprels = _finish_parse(state, n)
        tokens = [
            tok.copy(head=heads[i], deprel=deprels[i], upos=tags[i] if tags else tok.upos)
            for i, tok in enumerate(tree.tokens)
        ]
        return Tree(tokens=tokens, comments=list(tree.comments))

    # -- persistence -----------------------------------------------------

    def config(self) -> dict:
        cfg = self.encoder_cfg
        return {
            "kind": "transition",
            "system": self.system,
            "labels": self.actions.labels,
            "vocab": self.vocab.itos,
            "hidden_dim": self.hidden_dim,
            "word_dim": cfg.word_dim,
            "pos_mode": cfg.pos_mode,
            "pos_dim": cfg.pos_dim,
            "augment": cfg.augment,
            "supertoken_filter_sizes": list(cfg.supertoken_filter_sizes),
            "supertoken_dim": cfg.supertoken_dim,
        }

    @classmethod
    def from_config(cls, config: dict, store: ParameterStore) -> "TransitionParser":
        cfg = EncoderConfig(
            word_dim=config["word_dim"],
            pos_mode=config["pos_mode"],
            pos_dim=config["pos_dim"],
            augment=config["augment"],
            supertoken_filter_sizes=tuple(config["supertoken_filter_sizes"]),
            supertoken_dim=config["supertoken_dim"],
        )
        return cls(
            system=config["system"],
            encoder_cfg=cfg,
            vocab=Vocab.from_list(config["vocab"]),
            labels=config["labels"],
            hidden_dim=config["hidden_dim"],
            store=store,
        )


def _resolve_tags(pos_mode: str, tree: Tree, pos_tags):
    if pos_mode == "none":
        return None
    if pos_tags is not None:
        return list(pos_tags)
    if pos_mode == "gold":
        tags = tree.upos_tags()
        if any(t is None for t in tags):
            raise ValueError("gold pos_mode needs UPOS on every token")
        return tags
    raise ValueError("pos_mode=auto needs explicit pos_tags")


def _finish_parse(state: ParserState, n: int) -> tuple[list[int], list[str]]:
    """Make the arc set a single-rooted tree: designate the first-produced
    root, reattach extra roots and stranded tokens to it with 'dep', or make
    token 1 the root when no root was produced."""
    heads: list[int | None] = [None] * (n + 1)
    deprels: list[str | None] = [None] * (n + 1)
    root = None
    for dep, (head, label) in state.heads:
        heads[dep] = head
        deprels[dep] = label
        if head == 0 and root is None:
            root = dep
    if root is None:
        root = 1
        heads[1], deprels[1] = 0, "root"
    for tok in range(1, n + 1):
        if tok == root:
            continue
        if heads[tok] == 0 and tok != root:
            heads[tok], deprels[tok] = root, "dep"
        elif heads[tok] is None:
            heads[tok], deprels[tok] = root, "dep"
    return heads[1:], deprels[1:]


def count_nonprojective(tb: Treebank) -> int:
    return sum(0 if is_projective(tree) else 1 for tree in tb.trees)
