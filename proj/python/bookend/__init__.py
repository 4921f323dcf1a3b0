"""Python bindings for the bookend story generator core."""

import json

from ._bookend import (
    BookendError,
    bleu,
    dice_overlap,
    distinct_ngrams,
    extract_phrase_list,
    infill_samples,
    infill_story,
    normalized_tree_kernel,
    position_samples,
    split_sentences,
    tokenize,
)


def evaluate(stories, references=None):
    """Aggregate report for stories given as lists of sentence strings."""
    from ._bookend import evaluate_json

    return json.loads(evaluate_json(stories, references))


__all__ = [
    "BookendError",
    "bleu",
    "dice_overlap",
    "distinct_ngrams",
    "evaluate",
    "extract_phrase_list",
    "infill_samples",
    "infill_story",
    "normalized_tree_kernel",
    "position_samples",
    "split_sentences",
    "tokenize",
]
