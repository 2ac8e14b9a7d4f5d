import pytest

from rationeval.explainers import Explanation
from rationeval.faithfulness import (
    faithfulness_accuracy,
    rationale_only_text,
    selected_tokens,
)

from conftest import make_instance


def identity_explanation(instance, weight=1.0, explainer="lime"):
    types = []
    for tok in instance.tokens:
        if tok.normalized not in types:
            types.append(tok.normalized)
    return Explanation(
        explainer=explainer,
        instance_id=instance.id,
        predicted_label=1,
        items=tuple((t, weight) for t in types),
        confidence=1.0,
        sample_budget_used=0,
    )


def make_explanation(instance, items, explainer="lime"):
    return Explanation(
        explainer=explainer,
        instance_id=instance.id,
        predicted_label=1,
        items=tuple(items),
        confidence=1.0,
        sample_budget_used=0,
    )


def test_epsilon_zero_identity_reproduces_sentence():
    inst = make_instance("beautiful to watch and holds a certain charm")
    e = identity_explanation(inst)
    assert rationale_only_text(inst, e, 0.0) == inst.text


def test_threshold_filter_by_hand():
    inst = make_instance("beautiful to watch and holds a certain charm")
    e = make_explanation(inst, [("beautiful", 0.4), ("charm", 0.25), ("a", 0.05)])
    assert rationale_only_text(inst, e, 0.1) == "beautiful charm"


def test_epsilon_above_every_weight_empty():
    inst = make_instance("w x y")
    e = make_explanation(inst, [("w", 0.2), ("x", -0.3)])
    assert rationale_only_text(inst, e, 0.5) == ""


def test_negative_weights_count_by_magnitude():
    inst = make_instance("w x y")
    e = make_explanation(inst, [("w", -0.9), ("x", 0.1)])
    assert selected_tokens(e, 0.5) == {"w"}


def test_duplicates_and_order_preserved():
    inst = make_instance("good film good plot")
    e = make_explanation(inst, [("good", 0.8), ("plot", 0.6)])
    assert rationale_only_text(inst, e, 0.5) == "good good plot"


def test_anchors_ignore_epsilon():
    inst = make_instance("good film plot")
    e = make_explanation(inst, [("good", 0.97)], explainer="anchors")
    assert rationale_only_text(inst, e, 99.0) == "good"


def test_selected_sets_shrink_with_epsilon():
    inst = make_instance("a b c d e")
    e = make_explanation(
        inst, [("a", 0.05), ("b", 0.15), ("c", -0.25), ("d", 0.35), ("e", 0.55)]
    )
    grid = [0.1, 0.2, 0.3, 0.5]
    previous = selected_tokens(e, 0.0)
    for eps in grid:
        current = selected_tokens(e, eps)
        assert current <= previous
        previous = current


def test_identity_explainer_matches_baseline(fixture_corpus, fixture_model):
    pairs = [(inst, identity_explanation(inst)) for inst in fixture_corpus]
    rec = faithfulness_accuracy(fixture_model, pairs, 0.0)
    assert rec.accuracy_on_rationales == rec.baseline_accuracy
    assert rec.delta == 0.0
    assert rec.num_instances == len(fixture_corpus)
    assert rec.num_empty_rationales == 0


def test_rule_model_decided_by_good(rule_model):
    insts = [
        make_instance("a good film", id="p1", label=1),
        make_instance("good stuff here", id="p2", label=1),
        make_instance("dull and flat", id="n1", label=0),
    ]
    pairs = [
        (insts[0], make_explanation(insts[0], [("good", 1.0)])),
        (insts[1], make_explanation(insts[1], [("good", 1.0)])),
        (insts[2], make_explanation(insts[2], [("dull", 1.0)])),
    ]
    rec = faithfulness_accuracy(rule_model, pairs, 0.5)
    assert rec.accuracy_on_rationales == rec.baseline_accuracy == 1.0


def test_empty_rationales_predicted_not_skipped(fixture_model):
    inst = make_instance("some words here", label=0)
    e = make_explanation(inst, [("some", 0.01)])
    rec = faithfulness_accuracy(fixture_model, [(inst, e)], 0.9)
    assert rec.num_empty_rationales == 1
    assert rec.num_instances == 1
    # empty text scores the model prior (p=0.625 on the fixture corpus),
    # predicted label 1, gold 0: accuracy 0
    assert rec.accuracy_on_rationales == 0.0


def test_delta_identity(fixture_corpus, fixture_model):
    pairs = [(inst, identity_explanation(inst, weight=0.3)) for inst in fixture_corpus]
    rec = faithfulness_accuracy(fixture_model, pairs, 0.25)
    assert rec.delta == pytest.approx(
        rec.accuracy_on_rationales - rec.baseline_accuracy, abs=1e-12
    )


def test_fidelity_reference_mode(fixture_corpus, fixture_model):
    pairs = [(inst, identity_explanation(inst)) for inst in fixture_corpus]
    rec = faithfulness_accuracy(fixture_model, pairs, 0.0, reference="model")
    assert rec.baseline_accuracy == 1.0  # full sentences agree with themselves
    assert rec.accuracy_on_rationales == 1.0


def test_mixed_explainers_rejected(fixture_corpus, fixture_model):
    a = identity_explanation(fixture_corpus[0], explainer="lime")
    b = identity_explanation(fixture_corpus[1], explainer="shap")
    with pytest.raises(ValueError):
        faithfulness_accuracy(fixture_model, [(fixture_corpus[0], a), (fixture_corpus[1], b)], 0.0)
