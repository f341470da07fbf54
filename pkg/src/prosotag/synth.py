"""Synthetic corpora with planted two-stage structure, plus evaluation.

The generator plants both layers the tagger is supposed to find. Archetype i
gets words of exactly 3*(i+1) phonemes (3, 6, 9, ...), so a PhonemeCountGt
question between adjacent counts separates archetypes perfectly: counts
{3, 6} split on "more than 4 phonemes". Within an archetype, each token's
embedding is drawn from one of ``components_per_archetype`` planted
Gaussians whose means sit ``component_separation`` apart (within-component
sigma fixed at 1, so separation is the single difficulty knob).

Geometry: archetype base means are spaced along embedding coordinate 0;
component means within an archetype sit at separation/sqrt(2) along distinct
later coordinates, a regular simplex with exact pairwise distance equal to
the separation. This needs d >= components_per_archetype + 1.

``adjusted_rand_index`` scores recovered tags against the planted labels;
``growth_report`` tabulates the tree-growth trace for plotting.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Hashable, Mapping

import numpy as np

from .errors import ConfigError, ParseError, ValidationError
from .gaussian import ProsodySample
from .phonetics import (
    PhonemeClassTable,
    Question,
    QuestionKind,
    WordEntry,
    default_classes,
)
from .tree import GrowthTrace

__all__ = [
    "SynthSpec",
    "GroundTruth",
    "generate",
    "adjusted_rand_index",
    "growth_report",
    "write_growth_csv",
    "save_ground_truth",
    "load_ground_truth",
]

# profiles use one phoneme-count slot per archetype; word length caps at 78
MAX_ARCHETYPES = 26


@dataclass(frozen=True)
class SynthSpec:
    """Generator knobs; all counts are per the level above them."""

    num_leaf_archetypes: int = 10
    words_per_archetype: int = 50
    tokens_per_word: int = 10
    components_per_archetype: int = 5
    d: int = 16
    component_separation: float = 8.0
    seed: int = 0
    class_distinctions: bool = False

    def __post_init__(self) -> None:
        for name in (
            "num_leaf_archetypes",
            "words_per_archetype",
            "tokens_per_word",
            "components_per_archetype",
            "d",
        ):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be at least 1, got {getattr(self, name)}")
        if self.component_separation <= 0.0:
            raise ConfigError(
                f"component_separation must be positive, got {self.component_separation}"
            )
        if self.num_leaf_archetypes > MAX_ARCHETYPES:
            raise ConfigError(
                f"cannot construct {self.num_leaf_archetypes} distinct phonetic "
                f"profiles; at most {MAX_ARCHETYPES} are supported"
            )
        if self.d < self.components_per_archetype + 1:
            raise ConfigError(
                f"d={self.d} is too small to separate {self.components_per_archetype} "
                f"components; need d >= components_per_archetype + 1"
            )
        if self.seed < 0:
            raise ConfigError(f"seed must be non-negative, got {self.seed}")

    @property
    def total_tokens(self) -> int:
        return self.num_leaf_archetypes * self.words_per_archetype * self.tokens_per_word


@dataclass(frozen=True)
class GroundTruth:
    """Planted label per token: (archetype index, component index)."""

    labels: Mapping[str, tuple[int, int]]

    def __post_init__(self) -> None:
        frozen = {
            token: (int(a), int(c)) for token, (a, c) in self.labels.items()
        }
        object.__setattr__(self, "labels", frozen)
        if not frozen:
            raise ValidationError("ground truth has no tokens")

    def __len__(self) -> int:
        return len(self.labels)


def _phoneme_count(archetype: int) -> int:
    return 3 * (archetype + 1)


def _planted_questions(spec: SynthSpec) -> list[Question]:
    questions: list[Question] = []
    for a in range(spec.num_leaf_archetypes - 1):
        # counts 3(a+1) vs 3(a+2): any threshold between them works; pick count+1
        questions.append(
            Question(
                id=len(questions),
                kind=QuestionKind.PHONEME_COUNT_GT,
                int_param=_phoneme_count(a) + 1,
            )
        )
    if spec.class_distinctions:
        questions.append(
            Question(
                id=len(questions),
                kind=QuestionKind.STARTS_WITH_CLASS,
                class_param="Vowel",
            )
        )
    return questions


def _component_means(spec: SynthSpec) -> np.ndarray:
    """(components, d) simplex with exact pairwise distance = separation."""
    means = np.zeros((spec.components_per_archetype, spec.d))
    for k in range(spec.components_per_archetype):
        means[k, 1 + k] = spec.component_separation / np.sqrt(2.0)
    return means


def _make_word(
    name: str,
    archetype: int,
    rng: np.random.Generator,
    vowels: list[str],
    consonants: list[str],
    vowel_initial: bool,
) -> WordEntry:
    count = _phoneme_count(archetype)
    phonemes: list[str] = []
    for j in range(count):
        pool = vowels if j % 3 == 1 else consonants
        phonemes.append(pool[rng.integers(len(pool))])
    if vowel_initial:
        phonemes[0] = vowels[rng.integers(len(vowels))]
    breaks = tuple(range(0, count, 3))
    stress = int(rng.integers(len(breaks)))
    return WordEntry(
        word=name,
        phonemes=tuple(phonemes),
        syllable_breaks=breaks,
        stress_syllable=stress,
    )


def generate(
    spec: SynthSpec, classes: PhonemeClassTable | None = None
) -> tuple[list[WordEntry], list[Question], list[ProsodySample], GroundTruth]:
    """Build a corpus with planted structure; identical bytes for one seed."""
    if classes is None:
        classes = default_classes()
    vowels = sorted(classes.members("Vowel"))
    consonant_set: set[str] = set()
    for name in classes.classes:
        if name != "Vowel":
            consonant_set |= classes.members(name)
    consonants = sorted(consonant_set - set(vowels))
    if not consonants:
        raise ConfigError("class table has no consonant phonemes to build words from")

    rng = np.random.default_rng(spec.seed)
    comp_means = _component_means(spec)
    lexicon: list[WordEntry] = []
    samples: list[ProsodySample] = []
    labels: dict[str, tuple[int, int]] = {}
    for a in range(spec.num_leaf_archetypes):
        base = np.zeros(spec.d)
        base[0] = a * spec.component_separation
        vowel_initial = spec.class_distinctions and a % 2 == 1
        for w in range(spec.words_per_archetype):
            name = f"w{a:02d}_{w:03d}"
            entry = _make_word(name, a, rng, vowels, consonants, vowel_initial)
            lexicon.append(entry)
            for t in range(spec.tokens_per_word):
                comp = t % spec.components_per_archetype
                token_id = f"{name}:{t:03d}"
                vec = base + comp_means[comp] + rng.standard_normal(spec.d)
                samples.append(ProsodySample(token_id=token_id, word=name, embedding=vec))
                labels[token_id] = (a, comp)
    return lexicon, _planted_questions(spec), samples, GroundTruth(labels)


# ---------------------------------------------------------------------------
# evaluation


def _pairs(counts: np.ndarray) -> float:
    c = counts.astype(np.float64)
    return float((c * (c - 1.0) / 2.0).sum())


def adjusted_rand_index(
    pred: Mapping[str, Hashable], truth: "GroundTruth | Mapping[str, Hashable]"
) -> float:
    """Chance-corrected partition agreement over a shared token set."""
    truth_map: Mapping[str, Hashable] = truth.labels if isinstance(truth, GroundTruth) else truth
    if pred.keys() != truth_map.keys():
        only_pred = len(pred.keys() - truth_map.keys())
        only_truth = len(truth_map.keys() - pred.keys())
        raise ValidationError(
            f"token sets differ: {only_pred} only in prediction, {only_truth} only in truth"
        )
    tokens = sorted(pred)
    _, row = np.unique([str(pred[t]) for t in tokens], return_inverse=True)
    _, col = np.unique([str(truth_map[t]) for t in tokens], return_inverse=True)
    table = np.zeros((row.max() + 1, col.max() + 1), dtype=np.int64)
    np.add.at(table, (row, col), 1)

    index = _pairs(table.ravel())
    sum_rows = _pairs(table.sum(axis=1))
    sum_cols = _pairs(table.sum(axis=0))
    total = _pairs(np.array([len(tokens)]))
    expected = sum_rows * sum_cols / total if total > 0 else 0.0
    max_index = 0.5 * (sum_rows + sum_cols)
    if max_index == expected:
        # both partitions trivial (all-singletons or one cluster): agreement is exact
        return 1.0
    return (index - expected) / (max_index - expected)


def growth_report(trace: GrowthTrace) -> list[tuple[int, float, float]]:
    """Rows of (num_leaves, total_leaf_ll, avg_samples_per_leaf), initial row first."""
    rows = [(1, trace.initial_ll, float(trace.num_tokens))]
    for r in trace.records:
        rows.append((r.step + 1, r.total_leaf_ll, r.avg_samples_per_leaf))
    return rows


def write_growth_csv(trace: GrowthTrace, sink: str | Path | IO[str]) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["num_leaves", "total_leaf_ll", "avg_samples_per_leaf"])
    for num_leaves, total_ll, avg in growth_report(trace):
        writer.writerow([num_leaves, repr(total_ll), repr(avg)])
    text = buf.getvalue()
    if isinstance(sink, (str, Path)):
        Path(sink).write_text(text, encoding="utf-8")
    else:
        sink.write(text)


# ---------------------------------------------------------------------------
# ground-truth file


def save_ground_truth(truth: GroundTruth, sink: str | Path | IO[bytes]) -> None:
    lines = [
        json.dumps({"token_id": token, "archetype": a, "component": c})
        for token, (a, c) in truth.labels.items()
    ]
    data = ("\n".join(lines) + "\n").encode("utf-8")
    if isinstance(sink, (str, Path)):
        Path(sink).write_bytes(data)
    else:
        sink.write(data)


def load_ground_truth(source: str | Path | IO[bytes]) -> GroundTruth:
    if isinstance(source, (str, Path)):
        data = Path(source).read_bytes()
    else:
        data = source.read()
    labels: dict[str, tuple[int, int]] = {}
    for lineno, raw in enumerate(data.decode("utf-8").split("\n"), start=1):
        if not raw.strip():
            continue
        try:
            obj = json.loads(raw)
            token = obj["token_id"]
            pair = (int(obj["archetype"]), int(obj["component"]))
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"line {lineno}: malformed ground-truth record: {exc}") from exc
        if token in labels:
            raise ParseError(f"line {lineno}: duplicate token id {token!r}")
        labels[token] = pair
    return GroundTruth(labels)
