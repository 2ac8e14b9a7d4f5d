import io
import json

import pytest
from hypothesis import given, strategies as st

from rationeval.corpus import (
    aggregate_rationales,
    corpus_stats,
    parse_dataset,
    serialize_dataset,
)
from rationeval.errors import MissingAnnotationError, ParseError, ValidationError

from conftest import FIXTURE_JSONL, FIXTURE_TSV, make_instance


def test_parse_tsv_table_row():
    row = "beautiful to watch and holds a certain charm\t1\t1\tbeautiful charm\tbeautiful charm\n"
    insts = parse_dataset(row.encode(), format="tsv")
    assert len(insts) == 1
    inst = insts[0]
    assert inst.gold_label == 1 and inst.difficulty == 1
    assert aggregate_rationales(inst, "union").words == {"beautiful", "charm"}


def test_parse_tsv_difficulty4_empty_rationales():
    row = "not even the hanson brothers can save it\t0\t4\t\t\n"
    inst = parse_dataset(row.encode(), format="tsv")[0]
    assert aggregate_rationales(inst, "union").words == frozenset()
    assert aggregate_rationales(inst, "intersection").words == frozenset()


def test_parse_tsv_word_not_in_sentence():
    row = "a plain sentence\t1\t1\tmissingword\t\n"
    with pytest.raises(ValidationError) as exc:
        parse_dataset(row.encode(), format="tsv")
    assert "missingword" in str(exc.value)


def test_parse_tsv_lenient_drops_word():
    row = "a plain sentence\t1\t1\tplain missingword\tplain\n"
    inst = parse_dataset(row.encode(), format="tsv", lenient=True)[0]
    assert aggregate_rationales(inst, "union").words == {"plain"}


def test_parse_tsv_bad_difficulty():
    row = "some sentence here\t1\t9\t\t\n"
    with pytest.raises(ValidationError):
        parse_dataset(row.encode(), format="tsv")


def test_parse_tsv_malformed_row_number():
    data = "good line\t1\t1\tgood\tgood\nbadline-without-tabs\n"
    with pytest.raises(ParseError) as exc:
        parse_dataset(data.encode(), format="tsv")
    assert exc.value.line == 2


def test_parse_tsv_header_detection():
    insts = parse_dataset(FIXTURE_TSV, format="tsv")
    assert len(insts) == 8  # header row skipped


def test_parse_jsonl_fixture():
    insts = parse_dataset(FIXTURE_JSONL, format="jsonl")
    assert [i.id for i in insts] == [f"t{k}" for k in range(1, 9)]
    assert insts[0].token_types >= {"beautiful", "charm"}


def test_parse_jsonl_labelers():
    line = json.dumps(
        {
            "id": "a",
            "text": "it turns out to be smarter and more diabolical",
            "label": 1,
            "difficulty": 1,
            "labelers": [["smarter", "more", "diabolical"], ["smarter", "diabolical"]],
        }
    )
    inst = parse_dataset(line.encode(), format="jsonl")[0]
    assert aggregate_rationales(inst, "union").words == {"smarter", "more", "diabolical"}
    assert aggregate_rationales(inst, "intersection").words == {"smarter", "diabolical"}


def test_parse_jsonl_bad_json_line_number():
    data = b'{"id":"a","text":"fine text","label":1,"difficulty":1}\n{broken\n'
    with pytest.raises(ParseError) as exc:
        parse_dataset(data, format="jsonl")
    assert exc.value.line == 2


def test_parse_jsonl_label_out_of_range():
    line = json.dumps({"id": "a", "text": "w", "label": 2, "difficulty": 1})
    with pytest.raises(ValidationError):
        parse_dataset(line.encode(), format="jsonl")


def test_parse_duplicate_ids_rejected():
    line = json.dumps({"id": "a", "text": "w x", "label": 1, "difficulty": 1})
    with pytest.raises(ValidationError):
        parse_dataset((line + "\n" + line).encode(), format="jsonl")


def test_difficulty4_with_rationales_rejected():
    line = json.dumps(
        {"id": "a", "text": "w x", "label": 1, "difficulty": 4, "union": ["w"],
         "intersection": []}
    )
    with pytest.raises(ValidationError):
        parse_dataset(line.encode(), format="jsonl")


def test_intersection_must_be_subset_of_union():
    line = json.dumps(
        {"id": "a", "text": "w x y", "label": 1, "difficulty": 1, "union": ["w"],
         "intersection": ["x"]}
    )
    with pytest.raises(ValidationError):
        parse_dataset(line.encode(), format="jsonl")


def test_aggregate_single_labeler_identity():
    inst = make_instance("a grief shared", labelers=[{"grief"}])
    assert aggregate_rationales(inst, "union").words == {"grief"}
    assert aggregate_rationales(inst, "intersection").words == {"grief"}


def test_aggregate_missing_annotation():
    inst = make_instance("no annotations here")
    with pytest.raises(MissingAnnotationError):
        aggregate_rationales(inst, "union")


def test_aggregate_prefers_labelers_when_present():
    inst = make_instance(
        "w x y",
        labelers=[{"w"}, {"w", "x"}],
        pre=(frozenset({"y"}), frozenset({"y"})),
    )
    assert aggregate_rationales(inst, "union").words == {"w", "x"}


def test_normalization_lowercases_rationales():
    row = "Beautiful To Watch\t1\t1\tBEAUTIFUL\tBeautiful\n"
    inst = parse_dataset(row.encode(), format="tsv")[0]
    assert aggregate_rationales(inst, "union").words == {"beautiful"}


def test_stats_fixture_frozen_values(fixture_corpus):
    report = corpus_stats(fixture_corpus)
    assert report.total.sentences == 8
    assert {d: b.sentences for d, b in report.by_difficulty.items()} == {1: 3, 2: 1, 3: 2, 4: 2}
    assert report.total.words_per_sentence == pytest.approx(19.375)
    assert report.total.union_words == pytest.approx(1.875)
    assert report.total.intersection_words == pytest.approx(1.5)
    assert report.total.empty_intersections == 2
    assert report.by_difficulty[1].words_per_sentence == pytest.approx(13.0)
    assert report.by_difficulty[3].words_per_sentence == pytest.approx(34.5)
    assert report.by_difficulty[4].union_words == 0.0


def test_stats_single_instance():
    inst = make_instance(
        "one two three four five six seven eight nine ten",
        pre=(frozenset({"one", "two"}), frozenset({"one"})),
    )
    report = corpus_stats([inst])
    assert report.total.words_per_sentence == 10.0
    assert report.total.union_words == 2.0


def test_stats_counts_empty_intersections():
    a = make_instance("w x", pre=(frozenset({"w"}), frozenset()))
    b = make_instance("y z", id="b", pre=(frozenset({"y"}), frozenset({"y"})))
    assert corpus_stats([a, b]).total.empty_intersections == 1


def test_stats_empty_input():
    report = corpus_stats([])
    assert report.total.sentences == 0
    assert report.total.empty_intersections == 0


def test_stats_per_difficulty_sums_to_total(fixture_corpus):
    report = corpus_stats(fixture_corpus)
    assert sum(b.sentences for b in report.by_difficulty.values()) == report.total.sentences
    assert (
        sum(b.empty_intersections for b in report.by_difficulty.values())
        == report.total.empty_intersections
    )


def test_roundtrip_fixture(fixture_corpus):
    payload = serialize_dataset(fixture_corpus)
    again = parse_dataset(payload, format="jsonl")
    assert again == fixture_corpus


_word = st.sampled_from(["good", "bad", "film", "plot", "dull", "sharp", "warm", "flat"])


@st.composite
def _instances(draw):
    words = draw(st.lists(_word, min_size=1, max_size=8))
    text = " ".join(words)
    difficulty = draw(st.sampled_from([1, 2, 3]))
    n_labelers = draw(st.integers(1, 3))
    labelers = [
        draw(st.sets(st.sampled_from(sorted(set(words))), max_size=len(set(words))))
        for _ in range(n_labelers)
    ]
    return {
        "id": draw(st.uuids()).hex,
        "text": text,
        "label": draw(st.sampled_from([0, 1])),
        "difficulty": difficulty,
        "labelers": [sorted(s) for s in labelers],
    }


@given(st.lists(_instances(), min_size=1, max_size=6, unique_by=lambda o: o["id"]))
def test_roundtrip_property(objs):
    raw = "\n".join(json.dumps(o) for o in objs).encode()
    insts = parse_dataset(raw, format="jsonl")
    again = parse_dataset(serialize_dataset(insts), format="jsonl")
    assert again == insts
    for inst in insts:
        union = aggregate_rationales(inst, "union").words
        inter = aggregate_rationales(inst, "intersection").words
        assert inter <= union
        assert union <= inst.token_types
