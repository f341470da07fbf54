"""Binary decision tree grown by greedy log-likelihood gain.

Growth starts from a single root leaf holding every corpus word. At each step
the (leaf, question) pair with the largest likelihood gain is split, until the
leaf budget is reached, the best gain falls below the threshold, or no valid
split remains. Words move as whole types: a question partitions a leaf's word
set, and every token of a word follows its word.

Determinism rules: question ties break toward the smallest question id, leaf
ties toward the earliest-created leaf, and a split creates its yes child
before its no child. Leaf letters ("a", "b", ..., "aa" after 26) name the
current leaves in creation order; the letter recorded in a trace row is the
split leaf's letter at that step, and the final tree's letters are therefore
contiguous starting at "a".
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import ConfigError, ModelFormatError, ValidationError
from .gaussian import ProsodySample, _ll_from_moments, accumulate
from .phonetics import PhonemeClassTable, Question, WordEntry, answer_question, question_index

__all__ = [
    "InternalNode",
    "LeafNode",
    "TreeNode",
    "DecisionTree",
    "SplitRecord",
    "GrowthTrace",
    "leaf_letter",
    "best_split_for_leaf",
    "grow_tree",
    "route_word",
]


def leaf_letter(index: int) -> str:
    """Letter for a leaf index: 0 -> "a", 25 -> "z", 26 -> "aa"."""
    if index < 0:
        raise ValueError(f"leaf index must be non-negative, got {index}")
    letters: list[str] = []
    index += 1
    while index:
        index, rem = divmod(index - 1, 26)
        letters.append(chr(ord("a") + rem))
    return "".join(reversed(letters))


@dataclass(frozen=True)
class InternalNode:
    question_id: int
    yes_child: int
    no_child: int


@dataclass(frozen=True)
class LeafNode:
    leaf_index: int


TreeNode = InternalNode | LeafNode


@dataclass(frozen=True)
class DecisionTree:
    """Immutable fitted tree; node 0 is the root."""

    nodes: tuple[TreeNode, ...]
    leaf_letters: tuple[str, ...]

    @property
    def num_leaves(self) -> int:
        return len(self.leaf_letters)

    def letter(self, leaf_index: int) -> str:
        return self.leaf_letters[leaf_index]

    def validate(self) -> None:
        """Structural check for trees read from files."""
        if not self.nodes:
            raise ModelFormatError("tree has no nodes")
        referenced: set[int] = set()
        leaf_indices: list[int] = []
        for pos, node in enumerate(self.nodes):
            if isinstance(node, InternalNode):
                for child in (node.yes_child, node.no_child):
                    if not (0 <= child < len(self.nodes)) or child == pos:
                        raise ModelFormatError(f"node {pos}: child index {child} out of range")
                    if child in referenced:
                        raise ModelFormatError(f"node {child} has multiple parents")
                    if child == 0:
                        raise ModelFormatError("root node cannot be a child")
                    referenced.add(child)
            else:
                leaf_indices.append(node.leaf_index)
        if len(referenced) != len(self.nodes) - 1:
            raise ModelFormatError("tree nodes are not a single rooted structure")
        if sorted(leaf_indices) != list(range(len(self.leaf_letters))):
            raise ModelFormatError(
                "leaf indices must cover 0..num_leaves-1 exactly once"
            )
        expected = tuple(leaf_letter(i) for i in range(len(self.leaf_letters)))
        if self.leaf_letters != expected:
            raise ModelFormatError("leaf letters are not contiguous from 'a'")


@dataclass(frozen=True)
class SplitRecord:
    step: int
    leaf_split: str
    question_id: int
    gain: float
    total_leaf_ll: float
    avg_samples_per_leaf: float


@dataclass(frozen=True)
class GrowthTrace:
    """Per-split growth log, plus the initial single-leaf state.

    After step k the tree has k+1 leaves; ``records`` is empty for a fit that
    never split.
    """

    initial_ll: float
    num_tokens: int
    records: tuple[SplitRecord, ...] = ()


# ---------------------------------------------------------------------------
# growth internals


@dataclass(eq=False)
class _Leaf:
    node_pos: int
    widx: np.ndarray
    n_tokens: int
    ll: float
    best: tuple[int, float] | None = None  # (question column, gain)
    seq: int = 0


class _Growth:
    """Per-fit arrays: word stats, question answers, and split evaluation."""

    def __init__(
        self,
        entries: Sequence[WordEntry],
        matrices: Sequence[np.ndarray],
        questions: Sequence[Question],
        classes: PhonemeClassTable,
        floor: float,
        min_leaf: int,
    ) -> None:
        self.floor = floor
        self.min_child = max(min_leaf, 1)
        dim = matrices[0].shape[1]
        self.counts = np.array([m.shape[0] for m in matrices], dtype=np.int64)
        self.sums = np.array([m.sum(axis=0) for m in matrices])
        self.sumsqs = np.array([(m * m).sum(axis=0) for m in matrices])
        self.qids = np.array([q.id for q in questions], dtype=np.int64)
        self.answers = np.zeros((len(entries), len(questions)), dtype=bool)
        for wi, entry in enumerate(entries):
            for qi, q in enumerate(questions):
                self.answers[wi, qi] = answer_question(q, entry, classes)
        self.dim = dim

    def leaf_stats(self, widx: np.ndarray) -> tuple[int, np.ndarray, np.ndarray]:
        return (
            int(self.counts[widx].sum()),
            self.sums[widx].sum(axis=0),
            self.sumsqs[widx].sum(axis=0),
        )

    def leaf_ll(self, widx: np.ndarray) -> float:
        n, s, ss = self.leaf_stats(widx)
        return float(_ll_from_moments(n, s, ss, self.floor))

    def best_split(self, leaf: _Leaf) -> tuple[int, float] | None:
        """Best (question column, gain) for a leaf, or None if nothing is valid."""
        widx = leaf.widx
        answers = self.answers[widx]
        n_parent = int(self.counts[widx].sum())
        a_int = answers.astype(np.int64)
        n_yes = a_int.T @ self.counts[widx]
        n_no = n_parent - n_yes
        valid = np.flatnonzero((n_yes >= self.min_child) & (n_no >= self.min_child))
        if valid.size == 0:
            return None
        # both sides go through the same matmul path: questions inducing
        # complementary or identical partitions then tie bitwise, so the
        # first-max argmax resolves them to the smallest question id
        a_flt = answers.astype(np.float64)
        b_flt = (~answers).astype(np.float64)
        sum_yes = a_flt.T @ self.sums[widx]
        sumsq_yes = a_flt.T @ self.sumsqs[widx]
        sum_no = b_flt.T @ self.sums[widx]
        sumsq_no = b_flt.T @ self.sumsqs[widx]
        ll_yes = _ll_from_moments(n_yes[valid], sum_yes[valid], sumsq_yes[valid], self.floor)
        ll_no = _ll_from_moments(n_no[valid], sum_no[valid], sumsq_no[valid], self.floor)
        gains = ll_yes + ll_no - leaf.ll
        # first-maximum argmax over id-ordered columns gives the smallest-id tie-break
        pos = int(np.argmax(gains))
        return int(valid[pos]), float(gains[pos])


def _sorted_questions(questions: Sequence[Question]) -> list[Question]:
    index = question_index(questions)
    return [index[qid] for qid in sorted(index)]


def _lexicon_map(
    lexicon: Sequence[WordEntry] | Mapping[str, WordEntry]
) -> Mapping[str, WordEntry]:
    if isinstance(lexicon, Mapping):
        return lexicon
    out: dict[str, WordEntry] = {}
    for entry in lexicon:
        if entry.word in out:
            raise ValidationError(f"duplicate word {entry.word!r} in lexicon")
        out[entry.word] = entry
    return out


def best_split_for_leaf(
    samples_by_word: Mapping[WordEntry, Sequence[ProsodySample]],
    questions: Sequence[Question],
    classes: PhonemeClassTable,
    *,
    floor: float = 1e-6,
    min_leaf: int = 10,
) -> tuple[int, float] | None:
    """Question maximizing the split gain for one leaf's samples.

    Returns ``(question_id, gain)`` for the best split sending at least
    ``min_leaf`` tokens to each side, or None when no question yields a valid
    partition. Ties break toward the smallest question id.
    """
    entries = list(samples_by_word)
    if not entries:
        raise ValidationError("leaf has no words")
    flat: list[ProsodySample] = []
    matrices = []
    for entry in entries:
        group = samples_by_word[entry]
        if not group:
            raise ValidationError(f"word {entry.word!r} has no samples")
        flat.extend(group)
        matrices.append(np.stack([s.embedding for s in group]))
    accumulate(flat)  # dimension consistency check
    ordered = _sorted_questions(questions)
    for q in ordered:
        q.validate_against(classes)
    growth = _Growth(entries, matrices, ordered, classes, floor, min_leaf)
    widx = np.arange(len(entries))
    leaf = _Leaf(node_pos=0, widx=widx, n_tokens=int(growth.counts.sum()), ll=growth.leaf_ll(widx))
    found = growth.best_split(leaf)
    if found is None:
        return None
    col, gain = found
    return int(growth.qids[col]), gain


def grow_tree(
    lexicon: Sequence[WordEntry] | Mapping[str, WordEntry],
    samples: Sequence[ProsodySample],
    questions: Sequence[Question],
    classes: PhonemeClassTable,
    *,
    max_leaves: int = 10,
    min_gain: float = 0.0,
    min_leaf: int = 10,
    floor: float = 1e-6,
) -> tuple[DecisionTree, GrowthTrace]:
    """Grow the tree over a corpus of word tokens.

    Stops when the leaf count reaches ``max_leaves``, when the best available
    gain drops below ``min_gain``, or when no leaf can be split with at least
    ``min_leaf`` tokens per child. Deterministic for identical inputs.
    """
    if max_leaves < 1:
        raise ConfigError(f"max_leaves must be at least 1, got {max_leaves}")
    if min_gain < 0.0:
        raise ConfigError(f"min_gain must be non-negative, got {min_gain}")
    if min_leaf < 0:
        raise ConfigError(f"min_leaf must be non-negative, got {min_leaf}")
    if floor <= 0.0:
        raise ConfigError(f"variance floor must be positive, got {floor}")
    if not samples:
        raise ValidationError("corpus is empty")
    words = _lexicon_map(lexicon)

    by_word: dict[str, list[np.ndarray]] = {}
    for sample in samples:
        if sample.word not in words:
            raise ValidationError(f"word {sample.word!r} is not in the lexicon")
        by_word.setdefault(sample.word, []).append(sample.embedding)
    entries = [words[w] for w in by_word]  # first-appearance order
    matrices = [np.stack(vectors) for vectors in by_word.values()]
    accumulate(samples)  # dimension consistency check across the corpus

    ordered = _sorted_questions(questions)
    for q in ordered:
        q.validate_against(classes)
    growth = _Growth(entries, matrices, ordered, classes, floor, min_leaf)
    total_tokens = int(growth.counts.sum())

    root_widx = np.arange(len(entries))
    root = _Leaf(
        node_pos=0,
        widx=root_widx,
        n_tokens=total_tokens,
        ll=growth.leaf_ll(root_widx),
        seq=0,
    )
    root.best = growth.best_split(root)
    nodes: list[TreeNode | None] = [None]
    leaves: list[_Leaf] = [root]  # creation order
    records: list[SplitRecord] = []
    total_ll = root.ll
    next_seq = 1

    while len(leaves) < max_leaves:
        best_leaf: _Leaf | None = None
        for leaf in leaves:
            if leaf.best is None:
                continue
            if best_leaf is None or leaf.best[1] > best_leaf.best[1]:
                best_leaf = leaf
        if best_leaf is None:
            break
        col, gain = best_leaf.best
        if gain < min_gain:
            break

        letter = leaf_letter(leaves.index(best_leaf))
        mask = growth.answers[best_leaf.widx, col]
        children: list[_Leaf] = []
        for side_widx in (best_leaf.widx[mask], best_leaf.widx[~mask]):
            child = _Leaf(
                node_pos=len(nodes),
                widx=side_widx,
                n_tokens=int(growth.counts[side_widx].sum()),
                ll=growth.leaf_ll(side_widx),
                seq=next_seq,
            )
            next_seq += 1
            child.best = growth.best_split(child)
            nodes.append(None)
            children.append(child)
        yes_child, no_child = children
        nodes[best_leaf.node_pos] = InternalNode(
            question_id=int(growth.qids[col]),
            yes_child=yes_child.node_pos,
            no_child=no_child.node_pos,
        )
        leaves.remove(best_leaf)
        leaves.extend(children)
        total_ll += gain
        records.append(
            SplitRecord(
                step=len(records) + 1,
                leaf_split=letter,
                question_id=int(growth.qids[col]),
                gain=gain,
                total_leaf_ll=total_ll,
                avg_samples_per_leaf=total_tokens / len(leaves),
            )
        )

    for index, leaf in enumerate(leaves):
        nodes[leaf.node_pos] = LeafNode(leaf_index=index)
    tree = DecisionTree(
        nodes=tuple(nodes),  # type: ignore[arg-type]
        leaf_letters=tuple(leaf_letter(i) for i in range(len(leaves))),
    )
    trace = GrowthTrace(
        initial_ll=root.ll, num_tokens=total_tokens, records=tuple(records)
    )
    return tree, trace


def route_word(
    tree: DecisionTree,
    word: WordEntry,
    questions: Sequence[Question] | Mapping[int, Question],
    classes: PhonemeClassTable,
) -> str:
    """Route a word (seen or unseen) to its leaf letter.

    Any structurally valid word routes successfully; a question id stored in
    the tree but absent from the question set means the model is corrupt.
    """
    index = question_index(questions)
    pos = 0
    for _ in range(len(tree.nodes)):
        node = tree.nodes[pos]
        if isinstance(node, LeafNode):
            return tree.leaf_letters[node.leaf_index]
        try:
            question = index[node.question_id]
        except KeyError:
            raise ModelFormatError(
                f"tree references unknown question id {node.question_id}"
            ) from None
        pos = node.yes_child if answer_question(question, word, classes) else node.no_child
    raise ModelFormatError("tree walk did not terminate; node graph is cyclic")
