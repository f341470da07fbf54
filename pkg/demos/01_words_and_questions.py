"""Phonetic words and the yes/no questions that probe them."""

from prosotag import WordEntry, answer_question, default_classes, default_questions, describe_question

classes = default_classes()
questions = default_questions(classes)

words = [
    WordEntry("cat", ("K", "AE", "T"), (0,), 0),
    WordEntry("window", ("W", "IH", "N", "D", "OW"), (0, 3), 0),
    WordEntry("arena", ("AH", "R", "IY", "N", "AH"), (0, 1, 3), 1),
    WordEntry("strengths", ("S", "T", "R", "EH", "NG", "TH", "S"), (0,), 0),
]

print(f"{len(questions)} questions, {len(words)} words\n")

header = "question".ljust(38) + "".join(w.word.rjust(10) for w in words)
print(header)
print("-" * len(header))
for q in questions:
    row = describe_question(q).ljust(38)
    for w in words:
        row += ("yes" if answer_question(q, w, classes) else ".").rjust(10)
    print(row)

# stress questions answer False when stress is unmarked
bare = WordEntry("hmm", ("HH", "AH", "M"), (0,), None)
stressed = [q for q in questions if q.kind.value == "StressOnSyllable"]
print()
for q in stressed:
    print(f"{bare.word} (no stress mark): {describe_question(q)} -> {answer_question(q, bare, classes)}")
