"""Python access to the imgquiz core: ranking, statistics, answer parsing and runs."""
import json

from . import _core
from ._core import Error, canonicalize_option, popularity, zscores, pearson, spearman

__all__ = [
    "Error", "canonicalize_option", "popularity", "zscores", "pearson", "spearman",
    "rank_images", "should_trigger_contrastive", "select_bundle", "ablate_quiz_size",
    "kruskal_wallis", "anova_oneway", "parse_final_answer", "validate_question", "validate_document",
    "normalize_quiz", "rank", "matrix",
]


def _text(doc):
    return doc if isinstance(doc, str) else json.dumps(doc)


def matrix(rows, question_count=None, concept_id="concept", quiz_kind="base"):
    """Builds a matrix document from {image_id: (label, [cells])} or row dicts."""
    if isinstance(rows, dict):
        rows = [{"image_id": k, "label": v[0], "cells": list(v[1])} for k, v in rows.items()]
    if question_count is None:
        question_count = len(rows[0]["cells"]) if rows else 0
    return {"concept_id": concept_id, "quiz_kind": quiz_kind, "question_count": question_count,
            "rows": rows}


def rank_images(matrix_doc):
    return _core.rank_images(_text(matrix_doc))


def should_trigger_contrastive(matrix_doc, threshold=2):
    return _core.should_trigger_contrastive(_text(matrix_doc), threshold)


def select_bundle(matrix_doc, budget):
    return _core.select_bundle(_text(matrix_doc), budget)


def ablate_quiz_size(matrix_doc, sizes, repetitions=100, seed=0, exhaustive=False):
    return _core.ablate_quiz_size(_text(matrix_doc), list(sizes), repetitions, seed, exhaustive)


def kruskal_wallis(*groups):
    return _core.kruskal_wallis([list(g) for g in groups])


def anova_oneway(*groups):
    return _core.anova_oneway([list(g) for g in groups])


def parse_final_answer(raw, options):
    """Returns (kind, option_index); index is None unless kind == "selected"."""
    return _core.parse_final_answer(raw, list(options))


def validate_question(question, blocklist=()):
    """Violation names for one record {question, options, correct_answer}."""
    return _core.validate_document(json.dumps([question]), list(blocklist))[0]


def validate_document(document, blocklist=()):
    """Violation names per record of a question document."""
    return _core.validate_document(_text(document), list(blocklist))


def normalize_quiz(quiz_doc):
    return json.loads(_core.normalize_quiz(_text(quiz_doc)))


def rank(concept, **config):
    """Runs the full pipeline; returns (exit_code, stdout, stderr)."""
    config["concept"] = concept
    return _core.rank(json.dumps(config))
