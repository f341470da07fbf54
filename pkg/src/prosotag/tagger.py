"""Two-stage word prosody tagger: question tree, then per-leaf mixtures.

``fit`` grows the decision tree over all tokens, then fits one GMM per leaf
on that leaf's embeddings. A tag pairs the leaf letter with the chosen
mixture component, written "d3" style. The fitted model serializes to a
single self-contained JSON document (questions and phoneme classes embedded)
so tagging never needs side files.

Per-leaf EM seeds are ``config.seed XOR leaf_index``: reproducible, and a
changed question set cannot silently reshuffle every leaf's initialization.
A leaf holding fewer tokens than ``m`` falls back to one component per token;
its later tag digits simply never occur.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, replace
from pathlib import Path
from typing import IO, Mapping, Sequence

import numpy as np

from .errors import (
    ConfigError,
    DimensionMismatchError,
    ModelFormatError,
    ParseError,
    ValidationError,
)
from .gaussian import ProsodySample
from .gmm import LeafGmm, assign_component, fit_gmm
from .phonetics import (
    PhonemeClassTable,
    Question,
    QuestionKind,
    WordEntry,
    question_index,
)
from .tree import (
    DecisionTree,
    GrowthTrace,
    InternalNode,
    LeafNode,
    SplitRecord,
    TreeNode,
    grow_tree,
    route_word,
)

__all__ = [
    "FORMAT_VERSION",
    "ProsodyTag",
    "TaggerConfig",
    "TaggerModel",
    "fit",
    "tag",
    "tag_inventory",
    "save_model",
    "load_model",
]

FORMAT_VERSION = 1

_TAG_RE = re.compile(r"^([a-z]+)([0-9]+)$")


@dataclass(frozen=True, order=True)
class ProsodyTag:
    """Leaf letter plus component index; prints as e.g. "d3"."""

    leaf: str
    component: int

    def __post_init__(self) -> None:
        if not self.leaf or not self.leaf.isalpha() or not self.leaf.islower():
            raise ValidationError(f"tag leaf must be lowercase alphabetic, got {self.leaf!r}")
        if self.component < 0:
            raise ValidationError(f"tag component must be non-negative, got {self.component}")

    def __str__(self) -> str:
        return f"{self.leaf}{self.component}"

    @classmethod
    def parse(cls, text: str) -> "ProsodyTag":
        match = _TAG_RE.match(text)
        if match is None:
            raise ValidationError(f"malformed prosody tag {text!r}")
        return cls(leaf=match.group(1), component=int(match.group(2)))


@dataclass(frozen=True)
class TaggerConfig:
    """Fit-time knobs. ``d`` may be None before fitting (inferred from data)."""

    d: int | None = None
    m: int = 5
    max_leaves: int = 10
    min_gain: float = 0.0
    min_leaf: int = 10
    floor: float = 1e-6
    seed: int = 0

    def __post_init__(self) -> None:
        if self.d is not None and self.d < 1:
            raise ConfigError(f"embedding dimension must be positive, got {self.d}")
        if self.m < 1:
            raise ConfigError(f"components per leaf must be at least 1, got {self.m}")
        if self.max_leaves < 1:
            raise ConfigError(f"max_leaves must be at least 1, got {self.max_leaves}")
        if self.min_gain < 0.0:
            raise ConfigError(f"min_gain must be non-negative, got {self.min_gain}")
        if self.min_leaf < 0:
            raise ConfigError(f"min_leaf must be non-negative, got {self.min_leaf}")
        if self.floor <= 0.0:
            raise ConfigError(f"variance floor must be positive, got {self.floor}")
        if self.seed < 0:
            raise ConfigError(f"seed must be non-negative, got {self.seed}")


@dataclass(frozen=True)
class TaggerModel:
    """A fitted two-stage tagger; immutable and safe to share across threads."""

    config: TaggerConfig
    classes: PhonemeClassTable
    questions: tuple[Question, ...]
    tree: DecisionTree
    gmms: Mapping[str, LeafGmm]
    growth_trace: GrowthTrace
    format_version: int = FORMAT_VERSION

    def __post_init__(self) -> None:
        object.__setattr__(self, "questions", tuple(self.questions))
        object.__setattr__(self, "gmms", dict(self.gmms))
        if self.format_version != FORMAT_VERSION:
            raise ModelFormatError(
                f"model format version {self.format_version} is not supported; "
                f"this build reads version {FORMAT_VERSION}"
            )
        if self.config.d is None:
            raise ConfigError("a fitted model must record the embedding dimension")
        for letter in self.tree.leaf_letters:
            gmm = self.gmms.get(letter)
            if gmm is None:
                raise ModelFormatError(f"leaf {letter!r} has no mixture")
            if gmm.leaf != letter:
                raise ModelFormatError(
                    f"mixture stored under {letter!r} is labeled {gmm.leaf!r}"
                )
            if gmm.d != self.config.d:
                raise ModelFormatError(
                    f"leaf {letter!r} mixture dimension {gmm.d} does not match model d={self.config.d}"
                )
        extra = set(self.gmms) - set(self.tree.leaf_letters)
        if extra:
            raise ModelFormatError(f"mixtures for unknown leaves: {sorted(extra)}")

    @property
    def num_leaves(self) -> int:
        return self.tree.num_leaves

    @property
    def num_tags(self) -> int:
        return sum(self.gmms[letter].m for letter in self.tree.leaf_letters)


def fit(
    lexicon: Sequence[WordEntry] | Mapping[str, WordEntry],
    samples: Sequence[ProsodySample],
    questions: Sequence[Question],
    classes: PhonemeClassTable,
    config: TaggerConfig,
) -> TaggerModel:
    """Fit both stages on a token corpus. Deterministic given config.seed."""
    if not samples:
        raise ValidationError("corpus is empty")
    dim = samples[0].embedding.shape[0]
    if config.d is not None and config.d != dim:
        raise DimensionMismatchError(
            f"config.d={config.d} but embeddings have dimension {dim}"
        )
    tree, trace = grow_tree(
        lexicon,
        samples,
        questions,
        classes,
        max_leaves=config.max_leaves,
        min_gain=config.min_gain,
        min_leaf=config.min_leaf,
        floor=config.floor,
    )
    words = {e.word: e for e in lexicon} if not isinstance(lexicon, Mapping) else lexicon
    qindex = question_index(questions)
    letter_of: dict[str, str] = {}
    by_leaf: dict[str, list[np.ndarray]] = {letter: [] for letter in tree.leaf_letters}
    for sample in samples:
        letter = letter_of.get(sample.word)
        if letter is None:
            letter = route_word(tree, words[sample.word], qindex, classes)
            letter_of[sample.word] = letter
        by_leaf[letter].append(sample.embedding)

    gmms: dict[str, LeafGmm] = {}
    for leaf_index, letter in enumerate(tree.leaf_letters):
        x = np.stack(by_leaf[letter])
        m_eff = min(config.m, x.shape[0])
        gmm, _ = fit_gmm(
            x,
            m_eff,
            config.seed ^ leaf_index,
            leaf=letter,
            floor=config.floor,
        )
        gmms[letter] = gmm
    return TaggerModel(
        config=replace(config, d=dim),
        classes=classes,
        questions=tuple(questions),
        tree=tree,
        gmms=gmms,
        growth_trace=trace,
    )


def tag(model: TaggerModel, word: WordEntry, e: np.ndarray) -> ProsodyTag:
    """Tag one token: route the word, then pick the maximum-posterior component."""
    e = np.asarray(e, dtype=np.float64)
    if e.ndim != 1 or e.shape[0] != model.config.d:
        raise DimensionMismatchError(
            f"embedding shape {e.shape} does not match model dimension {model.config.d}"
        )
    letter = route_word(model.tree, word, model.questions, model.classes)
    return ProsodyTag(leaf=letter, component=assign_component(e, model.gmms[letter]))


def tag_inventory(model: TaggerModel) -> list[ProsodyTag]:
    """All emittable tags: leaves in letter order, components ascending."""
    return [
        ProsodyTag(leaf=letter, component=k)
        for letter in model.tree.leaf_letters
        for k in range(model.gmms[letter].m)
    ]


# ---------------------------------------------------------------------------
# model file

def _node_to_obj(node: TreeNode) -> dict:
    if isinstance(node, InternalNode):
        return {
            "question_id": node.question_id,
            "yes_child": node.yes_child,
            "no_child": node.no_child,
        }
    return {"leaf_index": node.leaf_index}


def _node_from_obj(obj: dict, pos: int) -> TreeNode:
    if not isinstance(obj, dict):
        raise ModelFormatError(f"tree node {pos} is not an object")
    if "leaf_index" in obj:
        return LeafNode(leaf_index=int(obj["leaf_index"]))
    try:
        return InternalNode(
            question_id=int(obj["question_id"]),
            yes_child=int(obj["yes_child"]),
            no_child=int(obj["no_child"]),
        )
    except KeyError as exc:
        raise ModelFormatError(f"tree node {pos} is missing field {exc}") from None


def _trace_to_rows(trace: GrowthTrace) -> list[dict]:
    rows = [
        {
            "step": 0,
            "leaf_split": None,
            "question_id": None,
            "gain": None,
            "total_leaf_ll": trace.initial_ll,
            "avg_samples_per_leaf": float(trace.num_tokens),
            "num_tokens": trace.num_tokens,
        }
    ]
    for r in trace.records:
        rows.append(
            {
                "step": r.step,
                "leaf_split": r.leaf_split,
                "question_id": r.question_id,
                "gain": r.gain,
                "total_leaf_ll": r.total_leaf_ll,
                "avg_samples_per_leaf": r.avg_samples_per_leaf,
            }
        )
    return rows


def _trace_from_rows(rows: list) -> GrowthTrace:
    if not isinstance(rows, list) or not rows:
        raise ModelFormatError("growth_trace must be a non-empty array")
    head = rows[0]
    if not isinstance(head, dict) or head.get("step") != 0:
        raise ModelFormatError("growth_trace must start with the step-0 row")
    try:
        records = tuple(
            SplitRecord(
                step=int(r["step"]),
                leaf_split=str(r["leaf_split"]),
                question_id=int(r["question_id"]),
                gain=float(r["gain"]),
                total_leaf_ll=float(r["total_leaf_ll"]),
                avg_samples_per_leaf=float(r["avg_samples_per_leaf"]),
            )
            for r in rows[1:]
        )
        return GrowthTrace(
            initial_ll=float(head["total_leaf_ll"]),
            num_tokens=int(head["num_tokens"]),
            records=records,
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFormatError(f"malformed growth_trace row: {exc}") from exc


def model_to_json(model: TaggerModel) -> str:
    """Canonical JSON text for a model; identical models give identical text."""
    cfg = model.config
    doc = {
        "format_version": model.format_version,
        "config": {
            "d": cfg.d,
            "m": cfg.m,
            "max_leaves": cfg.max_leaves,
            "min_gain": cfg.min_gain,
            "min_leaf": cfg.min_leaf,
            "floor": cfg.floor,
            "seed": cfg.seed,
        },
        "classes": model.classes.to_dict(),
        "questions": [q.to_dict() for q in model.questions],
        "tree": {
            "nodes": [_node_to_obj(n) for n in model.tree.nodes],
            "leaf_letters": list(model.tree.leaf_letters),
        },
        "gmms": {
            letter: {
                "weights": model.gmms[letter].weights.tolist(),
                "means": model.gmms[letter].means.tolist(),
                "vars": model.gmms[letter].variances.tolist(),
                "n_samples": model.gmms[letter].n_samples,
            }
            for letter in model.tree.leaf_letters
        },
        "growth_trace": _trace_to_rows(model.growth_trace),
    }
    # tolist() yields Python floats; json emits the shortest exact repr
    return json.dumps(doc, ensure_ascii=False, sort_keys=False, indent=1) + "\n"


def save_model(model: TaggerModel, sink: str | Path | IO[bytes]) -> None:
    data = model_to_json(model).encode("utf-8")
    if isinstance(sink, (str, Path)):
        Path(sink).write_bytes(data)
    else:
        sink.write(data)


def _require(doc: dict, key: str) -> object:
    try:
        return doc[key]
    except KeyError:
        raise ModelFormatError(f"model file is missing {key!r}") from None


def load_model(source: str | Path | IO[bytes]) -> TaggerModel:
    """Parse and validate a model file; never returns a partial model."""
    if isinstance(source, (str, Path)):
        data = Path(source).read_bytes()
    else:
        data = source.read()
    try:
        doc = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ParseError(f"model file is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ModelFormatError("model file must contain a JSON object")

    version = _require(doc, "format_version")
    if version != FORMAT_VERSION:
        raise ModelFormatError(
            f"model format version {version!r} is not supported; "
            f"this build reads version {FORMAT_VERSION}"
        )
    raw_cfg = _require(doc, "config")
    if not isinstance(raw_cfg, dict):
        raise ModelFormatError("config must be an object")
    try:
        config = TaggerConfig(
            d=int(raw_cfg["d"]),
            m=int(raw_cfg["m"]),
            max_leaves=int(raw_cfg["max_leaves"]),
            min_gain=float(raw_cfg["min_gain"]),
            min_leaf=int(raw_cfg["min_leaf"]),
            floor=float(raw_cfg["floor"]),
            seed=int(raw_cfg["seed"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFormatError(f"malformed config: {exc}") from exc

    raw_classes = _require(doc, "classes")
    if not isinstance(raw_classes, dict):
        raise ModelFormatError("classes must be an object")
    try:
        classes = PhonemeClassTable(
            {name: frozenset(members) for name, members in raw_classes.items()}
        )
    except (TypeError, ValidationError) as exc:
        raise ModelFormatError(f"malformed class table: {exc}") from exc

    raw_questions = _require(doc, "questions")
    if not isinstance(raw_questions, list):
        raise ModelFormatError("questions must be an array")
    questions: list[Question] = []
    for obj in raw_questions:
        try:
            q = Question(
                id=int(obj["id"]),
                kind=QuestionKind(obj["kind"]),
                int_param=obj.get("int_param"),
                class_param=obj.get("class_param"),
            )
            q.validate_against(classes)
        except (KeyError, TypeError, ValueError, ConfigError, ValidationError) as exc:
            raise ModelFormatError(f"malformed question record: {exc}") from exc
        questions.append(q)

    raw_tree = _require(doc, "tree")
    if not isinstance(raw_tree, dict):
        raise ModelFormatError("tree must be an object")
    raw_nodes = raw_tree.get("nodes")
    raw_letters = raw_tree.get("leaf_letters")
    if not isinstance(raw_nodes, list) or not isinstance(raw_letters, list):
        raise ModelFormatError("tree must carry nodes and leaf_letters arrays")
    try:
        tree = DecisionTree(
            nodes=tuple(_node_from_obj(o, i) for i, o in enumerate(raw_nodes)),
            leaf_letters=tuple(str(s) for s in raw_letters),
        )
    except (TypeError, ValueError) as exc:
        raise ModelFormatError(f"malformed tree: {exc}") from exc
    tree.validate()

    raw_gmms = _require(doc, "gmms")
    if not isinstance(raw_gmms, dict):
        raise ModelFormatError("gmms must be an object")
    gmms: dict[str, LeafGmm] = {}
    for letter, obj in raw_gmms.items():
        if not isinstance(obj, dict):
            raise ModelFormatError(f"gmm for leaf {letter!r} is not an object")
        try:
            gmms[letter] = LeafGmm(
                leaf=letter,
                weights=np.asarray(obj["weights"], dtype=np.float64),
                means=np.asarray(obj["means"], dtype=np.float64),
                variances=np.asarray(obj["vars"], dtype=np.float64),
                n_samples=int(obj["n_samples"]),
            )
        except (KeyError, TypeError, ValueError, ValidationError) as exc:
            raise ModelFormatError(f"malformed gmm for leaf {letter!r}: {exc}") from exc

    trace = _trace_from_rows(_require(doc, "growth_trace"))
    try:
        return TaggerModel(
            config=config,
            classes=classes,
            questions=tuple(questions),
            tree=tree,
            gmms=gmms,
            growth_trace=trace,
        )
    except (ConfigError, ValidationError) as exc:
        raise ModelFormatError(f"inconsistent model: {exc}") from exc
