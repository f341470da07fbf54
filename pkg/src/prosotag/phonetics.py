"""Words, phonetic questions, and the class table the questions consult.

A word is represented by its phoneme string plus syllable structure; questions
are boolean predicates over that structure (counts, class membership, stress
placement). All types here are immutable after construction and question
evaluation is stateless, so everything in this module is safe to share across
threads.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import IO, Iterable, Iterator, Mapping, Sequence

from .errors import ConfigError, ParseError, ValidationError

__all__ = [
    "QuestionKind",
    "WordEntry",
    "Question",
    "PhonemeClassTable",
    "answer_question",
    "describe_question",
    "load_lexicon",
    "save_lexicon",
    "load_questions",
    "save_questions",
    "load_classes",
    "save_classes",
    "default_classes",
    "default_questions",
]


class QuestionKind(str, Enum):
    PHONEME_COUNT_GT = "PhonemeCountGt"
    SYLLABLE_COUNT_GT = "SyllableCountGt"
    ENDS_CLOSED_SYLLABLE = "EndsClosedSyllable"
    STARTS_WITH_CLASS = "StartsWithClass"
    ENDS_WITH_CLASS = "EndsWithClass"
    CONTAINS_CLASS = "ContainsClass"
    STRESS_ON_SYLLABLE = "StressOnSyllable"


_INT_KINDS = frozenset(
    {
        QuestionKind.PHONEME_COUNT_GT,
        QuestionKind.SYLLABLE_COUNT_GT,
        QuestionKind.STRESS_ON_SYLLABLE,
    }
)
_CLASS_KINDS = frozenset(
    {
        QuestionKind.STARTS_WITH_CLASS,
        QuestionKind.ENDS_WITH_CLASS,
        QuestionKind.CONTAINS_CLASS,
    }
)


@dataclass(frozen=True)
class WordEntry:
    """A word type: identifier, phoneme string, and syllable structure.

    ``syllable_breaks`` lists the phoneme indices where syllables start; the
    first break is always 0, so a word has ``len(syllable_breaks)`` syllables.
    ``stress_syllable`` is the index of the primary-stress syllable, or None
    when stress is unmarked.
    """

    word: str
    phonemes: tuple[str, ...]
    syllable_breaks: tuple[int, ...]
    stress_syllable: int | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "phonemes", tuple(self.phonemes))
        object.__setattr__(self, "syllable_breaks", tuple(self.syllable_breaks))
        if not self.word:
            raise ValidationError("word identifier must be non-empty")
        if not self.phonemes:
            raise ValidationError(f"word {self.word!r}: phoneme list is empty")
        breaks = self.syllable_breaks
        if not breaks or breaks[0] != 0:
            raise ValidationError(
                f"word {self.word!r}: syllable_breaks must start at 0, got {list(breaks)}"
            )
        if any(b >= c for b, c in zip(breaks, breaks[1:])):
            raise ValidationError(
                f"word {self.word!r}: syllable_breaks must be strictly increasing"
            )
        if breaks[-1] >= len(self.phonemes):
            raise ValidationError(
                f"word {self.word!r}: syllable break {breaks[-1]} is out of range "
                f"for {len(self.phonemes)} phonemes"
            )
        if self.stress_syllable is not None and not (
            0 <= self.stress_syllable < len(breaks)
        ):
            raise ValidationError(
                f"word {self.word!r}: stress syllable {self.stress_syllable} "
                f"out of range for {len(breaks)} syllables"
            )

    @property
    def num_syllables(self) -> int:
        return len(self.syllable_breaks)

    def to_dict(self) -> dict:
        return {
            "word": self.word,
            "phonemes": list(self.phonemes),
            "syllable_breaks": list(self.syllable_breaks),
            "stress_syllable": self.stress_syllable,
        }


@dataclass(frozen=True)
class PhonemeClassTable:
    """Named phoneme classes, e.g. ``"Vowel" -> {AA, IY, ...}``.

    Class sets must be non-empty and a "Vowel" class must exist because the
    closed-syllable question is defined against it.
    """

    classes: Mapping[str, frozenset[str]]

    def __post_init__(self) -> None:
        frozen = {name: frozenset(members) for name, members in self.classes.items()}
        object.__setattr__(self, "classes", frozen)
        for name, members in frozen.items():
            if not members:
                raise ValidationError(f"phoneme class {name!r} is empty")
        if "Vowel" not in frozen:
            raise ValidationError('class table must define a "Vowel" class')

    def __contains__(self, name: str) -> bool:
        return name in self.classes

    def members(self, name: str) -> frozenset[str]:
        try:
            return self.classes[name]
        except KeyError:
            raise ConfigError(f"unknown phoneme class {name!r}") from None

    def is_in(self, name: str, phoneme: str) -> bool:
        return phoneme in self.members(name)

    def to_dict(self) -> dict:
        return {name: sorted(members) for name, members in self.classes.items()}


@dataclass(frozen=True)
class Question:
    """One phonetic predicate, identified by a set-unique id.

    Count and stress kinds carry ``int_param``; class kinds carry
    ``class_param`` naming an entry of the class table.
    """

    id: int
    kind: QuestionKind
    int_param: int | None = None
    class_param: str | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", QuestionKind(self.kind))
        if self.id < 0:
            raise ValidationError(f"question id must be non-negative, got {self.id}")
        if self.kind in _INT_KINDS:
            if self.int_param is None or self.int_param < 0:
                raise ValidationError(
                    f"question {self.id}: kind {self.kind.value} requires int_param >= 0"
                )
        elif self.kind in _CLASS_KINDS:
            if not self.class_param:
                raise ValidationError(
                    f"question {self.id}: kind {self.kind.value} requires class_param"
                )

    def validate_against(self, classes: PhonemeClassTable) -> None:
        if self.kind in _CLASS_KINDS and self.class_param not in classes:
            raise ConfigError(
                f"question {self.id}: unknown phoneme class {self.class_param!r}"
            )

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "kind": self.kind.value,
            "int_param": self.int_param,
            "class_param": self.class_param,
        }


def answer_question(q: Question, w: WordEntry, classes: PhonemeClassTable) -> bool:
    """Evaluate one question against one word. Pure and deterministic.

    A word "ends with a closed syllable" iff its final phoneme is not in the
    "Vowel" class. A stress question answers False for words with unmarked
    stress. Unknown class names raise :class:`ConfigError`.
    """
    kind = q.kind
    if kind is QuestionKind.PHONEME_COUNT_GT:
        return len(w.phonemes) > q.int_param
    if kind is QuestionKind.SYLLABLE_COUNT_GT:
        return w.num_syllables > q.int_param
    if kind is QuestionKind.ENDS_CLOSED_SYLLABLE:
        return not classes.is_in("Vowel", w.phonemes[-1])
    if kind is QuestionKind.STARTS_WITH_CLASS:
        return classes.is_in(q.class_param, w.phonemes[0])
    if kind is QuestionKind.ENDS_WITH_CLASS:
        return classes.is_in(q.class_param, w.phonemes[-1])
    if kind is QuestionKind.CONTAINS_CLASS:
        members = classes.members(q.class_param)
        return any(p in members for p in w.phonemes)
    if kind is QuestionKind.STRESS_ON_SYLLABLE:
        return w.stress_syllable == q.int_param
    raise ConfigError(f"unhandled question kind {kind!r}")


def describe_question(q: Question) -> str:
    """Short human-readable rendering, used by the tree inspector."""
    kind = q.kind
    if kind is QuestionKind.PHONEME_COUNT_GT:
        return f"phoneme count > {q.int_param}"
    if kind is QuestionKind.SYLLABLE_COUNT_GT:
        return f"syllable count > {q.int_param}"
    if kind is QuestionKind.ENDS_CLOSED_SYLLABLE:
        return "ends with a closed syllable"
    if kind is QuestionKind.STARTS_WITH_CLASS:
        return f"first phoneme in {q.class_param}"
    if kind is QuestionKind.ENDS_WITH_CLASS:
        return f"last phoneme in {q.class_param}"
    if kind is QuestionKind.CONTAINS_CLASS:
        return f"contains a phoneme in {q.class_param}"
    return f"primary stress on syllable {q.int_param}"


# ---------------------------------------------------------------------------
# file I/O
#
# Lexicon and question files are UTF-8 JSON lines; the class table is one JSON
# object. Loaders accept a path or a binary file object.


def _read_bytes(source: str | Path | IO[bytes]) -> bytes:
    if isinstance(source, (str, Path)):
        return Path(source).read_bytes()
    return source.read()


def _write_bytes(sink: str | Path | IO[bytes], data: bytes) -> None:
    if isinstance(sink, (str, Path)):
        Path(sink).write_bytes(data)
    else:
        sink.write(data)


def _json_lines(data: bytes) -> Iterator[tuple[int, dict]]:
    for lineno, raw in enumerate(data.decode("utf-8").split("\n"), start=1):
        if not raw.strip():
            continue
        try:
            obj = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise ParseError(f"line {lineno}: invalid JSON: {exc.msg}") from exc
        if not isinstance(obj, dict):
            raise ParseError(f"line {lineno}: expected a JSON object")
        yield lineno, obj


def load_lexicon(source: str | Path | IO[bytes]) -> list[WordEntry]:
    """Read a JSON-lines lexicon. Duplicate word identifiers are an error."""
    entries: list[WordEntry] = []
    seen: set[str] = set()
    for lineno, obj in _json_lines(_read_bytes(source)):
        try:
            entry = WordEntry(
                word=obj["word"],
                phonemes=tuple(obj["phonemes"]),
                syllable_breaks=tuple(obj["syllable_breaks"]),
                stress_syllable=obj.get("stress_syllable"),
            )
        except (KeyError, TypeError) as exc:
            raise ParseError(f"line {lineno}: malformed lexicon record: {exc}") from exc
        if entry.word in seen:
            raise ParseError(f"line {lineno}: duplicate word {entry.word!r}")
        seen.add(entry.word)
        entries.append(entry)
    return entries


def save_lexicon(entries: Iterable[WordEntry], sink: str | Path | IO[bytes]) -> None:
    lines = [json.dumps(e.to_dict(), ensure_ascii=False) for e in entries]
    _write_bytes(sink, ("\n".join(lines) + "\n" if lines else "").encode("utf-8"))


def load_questions(
    source: str | Path | IO[bytes], classes: PhonemeClassTable
) -> list[Question]:
    """Read a JSON-lines question set and validate it against the class table."""
    questions: list[Question] = []
    seen: set[int] = set()
    for lineno, obj in _json_lines(_read_bytes(source)):
        try:
            q = Question(
                id=obj["id"],
                kind=QuestionKind(obj["kind"]),
                int_param=obj.get("int_param"),
                class_param=obj.get("class_param"),
            )
        except (KeyError, TypeError) as exc:
            raise ParseError(f"line {lineno}: malformed question record: {exc}") from exc
        except ValueError as exc:
            raise ParseError(f"line {lineno}: unknown question kind {obj.get('kind')!r}") from exc
        if q.id in seen:
            raise ParseError(f"line {lineno}: duplicate question id {q.id}")
        q.validate_against(classes)
        seen.add(q.id)
        questions.append(q)
    return questions


def save_questions(questions: Iterable[Question], sink: str | Path | IO[bytes]) -> None:
    lines = [json.dumps(q.to_dict()) for q in questions]
    _write_bytes(sink, ("\n".join(lines) + "\n" if lines else "").encode("utf-8"))


def load_classes(source: str | Path | IO[bytes]) -> PhonemeClassTable:
    try:
        obj = json.loads(_read_bytes(source).decode("utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"class table: invalid JSON: {exc.msg}") from exc
    if not isinstance(obj, dict) or not all(
        isinstance(v, list) for v in obj.values()
    ):
        raise ParseError("class table must be a JSON object of name -> [phonemes]")
    return PhonemeClassTable({name: frozenset(members) for name, members in obj.items()})


def save_classes(classes: PhonemeClassTable, sink: str | Path | IO[bytes]) -> None:
    _write_bytes(sink, (json.dumps(classes.to_dict(), indent=2) + "\n").encode("utf-8"))


# ---------------------------------------------------------------------------
# shipped defaults
#
# A representative general-purpose set over ARPABET-style symbols. Both the
# class table and the question set are data: tools accept substitutes from
# files in the formats above.

_DEFAULT_CLASSES = {
    "Vowel": [
        "AA", "AE", "AH", "AO", "AW", "AY", "EH", "ER", "EY",
        "IH", "IY", "OW", "OY", "UH", "UW",
    ],
    "Nasal": ["M", "N", "NG"],
    "Plosive": ["B", "D", "G", "K", "P", "T"],
    "Fricative": ["DH", "F", "HH", "S", "SH", "TH", "V", "Z", "ZH"],
    "Affricate": ["CH", "JH"],
    "Approximant": ["L", "R", "W", "Y"],
}


def default_classes() -> PhonemeClassTable:
    return PhonemeClassTable({k: frozenset(v) for k, v in _DEFAULT_CLASSES.items()})


def default_questions(classes: PhonemeClassTable | None = None) -> list[Question]:
    """The shipped question set: counts 2..8, syllable counts, stress, and
    class membership at the first, last, and any position."""
    if classes is None:
        classes = default_classes()
    specs: list[tuple[QuestionKind, int | None, str | None]] = []
    for threshold in range(2, 9):
        specs.append((QuestionKind.PHONEME_COUNT_GT, threshold, None))
    for threshold in range(1, 4):
        specs.append((QuestionKind.SYLLABLE_COUNT_GT, threshold, None))
    specs.append((QuestionKind.ENDS_CLOSED_SYLLABLE, None, None))
    for cls in ("Vowel", "Nasal", "Plosive"):
        specs.append((QuestionKind.STARTS_WITH_CLASS, None, cls))
    specs.append((QuestionKind.ENDS_WITH_CLASS, None, "Nasal"))
    for cls in ("Nasal", "Fricative"):
        specs.append((QuestionKind.CONTAINS_CLASS, None, cls))
    for syllable in range(3):
        specs.append((QuestionKind.STRESS_ON_SYLLABLE, syllable, None))
    questions = [
        Question(id=i, kind=kind, int_param=ip, class_param=cp)
        for i, (kind, ip, cp) in enumerate(specs)
    ]
    for q in questions:
        q.validate_against(classes)
    return questions


def question_index(questions: Sequence[Question] | Mapping[int, Question]) -> dict[int, Question]:
    """Index a question collection by id, rejecting duplicates."""
    if isinstance(questions, Mapping):
        return dict(questions)
    index: dict[int, Question] = {}
    for q in questions:
        if q.id in index:
            raise ValidationError(f"duplicate question id {q.id}")
        index[q.id] = q
    return index
