"""Words, questions, class tables, and their file formats."""

from __future__ import annotations

import io

import numpy as np
import pytest
from hypothesis import given, strategies as st

from prosotag import (
    ConfigError,
    ParseError,
    PhonemeClassTable,
    Question,
    QuestionKind,
    ValidationError,
    WordEntry,
    answer_question,
    default_classes,
    default_questions,
    describe_question,
    load_classes,
    load_lexicon,
    load_questions,
    save_classes,
    save_lexicon,
    save_questions,
)
from conftest import random_question, random_word


def make_word(phonemes, breaks=(0,), stress=None, name="w"):
    return WordEntry(
        word=name, phonemes=tuple(phonemes), syllable_breaks=tuple(breaks), stress_syllable=stress
    )


class TestWordEntry:
    def test_valid_word(self):
        w = make_word(["K", "AE", "T"], (0,), 0)
        assert w.num_syllables == 1

    def test_two_syllables(self):
        w = make_word(["B", "AH", "T", "ER"], (0, 2), 1)
        assert w.num_syllables == 2

    def test_empty_phonemes_rejected(self):
        with pytest.raises(ValidationError):
            make_word([])

    def test_empty_word_id_rejected(self):
        with pytest.raises(ValidationError):
            make_word(["K"], name="")

    def test_breaks_must_start_at_zero(self):
        with pytest.raises(ValidationError):
            make_word(["K", "AE"], breaks=(1,))

    def test_breaks_strictly_increasing(self):
        with pytest.raises(ValidationError):
            make_word(["K", "AE", "T"], breaks=(0, 2, 2))

    def test_break_out_of_range(self):
        with pytest.raises(ValidationError):
            make_word(["K", "AE"], breaks=(0, 2))

    def test_stress_out_of_range(self):
        with pytest.raises(ValidationError):
            make_word(["K", "AE"], breaks=(0,), stress=1)

    def test_unmarked_stress_ok(self):
        assert make_word(["K"], stress=None).stress_syllable is None


class TestClassTable:
    def test_requires_vowel_class(self):
        with pytest.raises(ValidationError):
            PhonemeClassTable({"Nasal": frozenset({"M"})})

    def test_empty_class_rejected(self):
        with pytest.raises(ValidationError):
            PhonemeClassTable({"Vowel": frozenset()})

    def test_membership(self):
        table = default_classes()
        assert table.is_in("Vowel", "AA")
        assert not table.is_in("Vowel", "K")
        assert "Nasal" in table

    def test_unknown_class_raises(self):
        with pytest.raises(ConfigError):
            default_classes().members("Sibilant")


class TestQuestionValidation:
    def test_int_kind_requires_param(self):
        with pytest.raises(ValidationError):
            Question(id=0, kind=QuestionKind.PHONEME_COUNT_GT)

    def test_class_kind_requires_param(self):
        with pytest.raises(ValidationError):
            Question(id=0, kind=QuestionKind.STARTS_WITH_CLASS)

    def test_negative_id_rejected(self):
        with pytest.raises(ValidationError):
            Question(id=-1, kind=QuestionKind.ENDS_CLOSED_SYLLABLE)

    def test_unknown_class_param(self, classes):
        q = Question(id=0, kind=QuestionKind.CONTAINS_CLASS, class_param="Sibilant")
        with pytest.raises(ConfigError):
            q.validate_against(classes)

    def test_kind_coerced_from_string(self):
        q = Question(id=3, kind="PhonemeCountGt", int_param=4)
        assert q.kind is QuestionKind.PHONEME_COUNT_GT


class TestAnswers:
    """Hand-evaluated cases, one per question kind."""

    def test_phoneme_count_gt_is_strict(self, classes):
        q = Question(id=0, kind=QuestionKind.PHONEME_COUNT_GT, int_param=3)
        assert not answer_question(q, make_word(["K", "AE", "T"]), classes)
        assert answer_question(q, make_word(["K", "AE", "T", "S"]), classes)

    def test_syllable_count_gt(self, classes):
        q = Question(id=0, kind=QuestionKind.SYLLABLE_COUNT_GT, int_param=1)
        assert not answer_question(q, make_word(["K", "AE", "T"], (0,)), classes)
        assert answer_question(q, make_word(["B", "AH", "T", "ER"], (0, 2)), classes)

    def test_ends_closed_syllable(self, classes):
        q = Question(id=0, kind=QuestionKind.ENDS_CLOSED_SYLLABLE)
        assert answer_question(q, make_word(["K", "AE", "T"]), classes)
        assert not answer_question(q, make_word(["S", "IY"]), classes)

    def test_final_phoneme_outside_all_classes_counts_as_closed(self, classes):
        q = Question(id=0, kind=QuestionKind.ENDS_CLOSED_SYLLABLE)
        assert answer_question(q, make_word(["K", "ZZ"]), classes)

    def test_starts_with_class(self, classes):
        q = Question(id=0, kind=QuestionKind.STARTS_WITH_CLASS, class_param="Nasal")
        assert answer_question(q, make_word(["M", "AE", "P"]), classes)
        assert not answer_question(q, make_word(["K", "AE", "P"]), classes)

    def test_ends_with_class(self, classes):
        q = Question(id=0, kind=QuestionKind.ENDS_WITH_CLASS, class_param="Nasal")
        assert answer_question(q, make_word(["HH", "AE", "NG"]), classes)
        assert not answer_question(q, make_word(["HH", "AE", "T"]), classes)

    def test_contains_class(self, classes):
        q = Question(id=0, kind=QuestionKind.CONTAINS_CLASS, class_param="Fricative")
        assert answer_question(q, make_word(["S", "AE", "T"]), classes)
        assert not answer_question(q, make_word(["K", "AE", "T"]), classes)

    def test_stress_on_syllable(self, classes):
        q = Question(id=0, kind=QuestionKind.STRESS_ON_SYLLABLE, int_param=1)
        w = make_word(["B", "AH", "T", "ER"], (0, 2), stress=1)
        assert answer_question(q, w, classes)
        assert not answer_question(q, make_word(["B", "AH", "T", "ER"], (0, 2), 0), classes)

    def test_unmarked_stress_answers_false(self, classes):
        q = Question(id=0, kind=QuestionKind.STRESS_ON_SYLLABLE, int_param=0)
        assert not answer_question(q, make_word(["K", "AE"], stress=None), classes)

    def test_unknown_class_at_answer_time(self):
        table = PhonemeClassTable({"Vowel": frozenset({"AA"})})
        q = Question(id=0, kind=QuestionKind.CONTAINS_CLASS, class_param="Nasal")
        with pytest.raises(ConfigError):
            answer_question(q, make_word(["AA"]), table)


@given(seed=st.integers(0, 10_000))
def test_answer_question_total_over_random_inputs(seed):
    # any valid (question, word) pair evaluates to a plain bool, never raises
    rng = np.random.default_rng(seed)
    table = default_classes()
    word = random_word(rng, "w", table)
    question = random_question(rng, 0, table)
    result = answer_question(question, word, table)
    assert result in (True, False)


class TestLexiconIO:
    def test_round_trip(self, tmp_path):
        entries = [
            make_word(["K", "AE", "T"], (0,), 0, name="cat"),
            make_word(["B", "AH", "T", "ER"], (0, 2), 1, name="butter"),
            make_word(["S", "IY"], (0,), None, name="sea"),
        ]
        path = tmp_path / "lex.jsonl"
        save_lexicon(entries, path)
        assert load_lexicon(path) == entries

    def test_duplicate_word_rejected(self):
        data = b'{"word":"x","phonemes":["K"],"syllable_breaks":[0]}\n' * 2
        with pytest.raises(ParseError):
            load_lexicon(io.BytesIO(data))

    def test_malformed_record(self):
        with pytest.raises(ParseError):
            load_lexicon(io.BytesIO(b'{"word":"x"}\n'))

    def test_invalid_json_line_numbered(self):
        data = b'{"word":"x","phonemes":["K"],"syllable_breaks":[0]}\nnot json\n'
        with pytest.raises(ParseError, match="line 2"):
            load_lexicon(io.BytesIO(data))

    def test_blank_lines_skipped(self):
        data = b'\n{"word":"x","phonemes":["K"],"syllable_breaks":[0]}\n\n'
        assert len(load_lexicon(io.BytesIO(data))) == 1


class TestQuestionIO:
    def test_round_trip(self, tmp_path, classes):
        questions = default_questions(classes)
        path = tmp_path / "qs.jsonl"
        save_questions(questions, path)
        assert load_questions(path, classes) == questions

    def test_duplicate_id_rejected(self, classes):
        data = b'{"id":1,"kind":"EndsClosedSyllable"}\n' * 2
        with pytest.raises(ParseError):
            load_questions(io.BytesIO(data), classes)

    def test_unknown_kind_rejected(self, classes):
        with pytest.raises(ParseError):
            load_questions(io.BytesIO(b'{"id":1,"kind":"RhymesWith"}\n'), classes)

    def test_unknown_class_rejected(self, classes):
        data = b'{"id":1,"kind":"ContainsClass","class_param":"Sibilant"}\n'
        with pytest.raises(ConfigError):
            load_questions(io.BytesIO(data), classes)


class TestClassIO:
    def test_round_trip(self, tmp_path, classes):
        path = tmp_path / "classes.json"
        save_classes(classes, path)
        assert load_classes(path).classes == classes.classes

    def test_not_an_object(self):
        with pytest.raises(ParseError):
            load_classes(io.BytesIO(b"[1, 2]"))

    def test_invalid_json(self):
        with pytest.raises(ParseError):
            load_classes(io.BytesIO(b"{not json"))


class TestDefaults:
    def test_default_questions_have_contiguous_ids(self, classes):
        questions = default_questions(classes)
        assert [q.id for q in questions] == list(range(len(questions)))
        assert len(questions) == 20

    def test_default_questions_cover_every_kind(self, classes):
        kinds = {q.kind for q in default_questions(classes)}
        assert kinds == set(QuestionKind)

    def test_describe_is_total(self, classes):
        for q in default_questions(classes):
            text = describe_question(q)
            assert text and isinstance(text, str)
