import pytest

import bookend

START = "A husband and wife wanted to find a new home."
STOP = "The husband and wife love their new home."


def test_tokenize_and_split():
    assert bookend.tokenize("Hello, World!") == ["hello", "world"]
    assert bookend.split_sentences("One. Two? Three!") == ["One.", "Two?", "Three!"]


def test_metrics():
    assert bookend.dice_overlap(START, START) == 1.0
    assert bookend.distinct_ngrams(["a", "b", "c"]) == 1.0
    story = [START, "They looked around.", STOP]
    assert bookend.bleu([story], [story]) == 100.0
    assert bookend.normalized_tree_kernel("(S (NP) (VP))", "(S (NP) (VP))") == pytest.approx(1.0)


def test_phrase_list():
    assert bookend.extract_phrase_list(START, STOP) == ["husband", "and", "wife", "new", "home"]


def test_samples():
    story = ["A one.", "B two.", "C three.", "D four.", "E five."]
    samples = bookend.infill_samples(story)
    assert [s[1] for s in samples] == story[1:4]
    positives = [p for p in bookend.position_samples(story, seed=1) if p["missing"]]
    assert len(positives) == 1


def test_infill_story_is_deterministic():
    a = bookend.infill_story(START, STOP, n=6, seed=2)
    b = bookend.infill_story(START, STOP, n=6, seed=2)
    assert a == b
    assert len(a["sentences"]) == 6
    assert len(a["trace"]) == 4
    assert a["sentences"][0] == START and a["sentences"][-1] == STOP


def test_evaluate():
    story = [START, "They looked.", START]
    report = bookend.evaluate([story], [story])
    assert report["story_count"] == 1
    assert report["bleu_corpus"] == 100.0


def test_errors_carry_codes():
    with pytest.raises(bookend.BookendError) as info:
        bookend.extract_phrase_list(START, STOP, gamma=1.5)
    assert info.value.code == "invalid_argument"
