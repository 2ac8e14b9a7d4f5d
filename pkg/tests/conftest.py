from __future__ import annotations

from pathlib import Path

import pytest

from rationeval.corpus import Instance, parse_dataset
from rationeval.model import from_function, train_builtin
from rationeval.text import tokenize

DATA_DIR = Path(__file__).resolve().parent.parent / "src" / "rationeval" / "data"

FIXTURE_JSONL = DATA_DIR / "fixture_corpus.jsonl"
FIXTURE_TSV = DATA_DIR / "fixture_corpus.tsv"
FIXTURE_TRAIN = DATA_DIR / "fixture_train.jsonl"


def make_instance(
    text: str,
    id: str = "x",
    label: int = 1,
    difficulty: int = 1,
    labelers=(),
    pre=None,
) -> Instance:
    return Instance(
        id=id,
        text=text,
        tokens=tuple(tokenize(text)),
        gold_label=label,
        difficulty=difficulty,
        labeler_rationales=tuple(frozenset(s) for s in labelers),
        pre_aggregated=pre,
    )


@pytest.fixture(scope="session")
def fixture_corpus():
    return parse_dataset(FIXTURE_JSONL, format="jsonl")


@pytest.fixture(scope="session")
def fixture_model():
    docs = [(i.text, i.gold_label) for i in parse_dataset(FIXTURE_JSONL, format="jsonl")]
    return train_builtin(docs, alpha=1.0, name="fixture-nb")


@pytest.fixture()
def rule_model():
    """Positive iff the sentence contains the word 'good'."""
    return from_function(
        lambda text: 0.95 if "good" in text.lower().split() else 0.05, name="rule-good"
    )


@pytest.fixture()
def constant_model():
    return from_function(lambda text: 0.5, name="const")
