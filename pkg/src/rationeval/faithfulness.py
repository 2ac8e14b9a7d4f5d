"""Rationale-only re-prediction: do the extracted words carry the sentiment?

Tokens whose attribution magnitude clears a threshold are fed back to the
model on their own (all occurrences, original order) and accuracy against
the gold labels is compared to full-sentence accuracy.  Anchor explanations
carry a single rule confidence, so they bypass the threshold.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .corpus import Instance
from .explainers import Explanation
from .model import ModelHandle

REFERENCE_MODES = ("gold", "model")


@dataclass(frozen=True)
class FaithfulnessRecord:
    model: str
    explainer: str
    epsilon: float | None  # None for anchors (no threshold applies)
    accuracy_on_rationales: float
    baseline_accuracy: float
    delta: float
    num_instances: int
    num_empty_rationales: int


def selected_tokens(e: Explanation, epsilon: float) -> frozenset[str]:
    """Token types whose |weight| clears epsilon; anchors keep everything."""
    if e.explainer == "anchors":
        return frozenset(t for t, _ in e.items)
    return frozenset(t for t, w in e.items if abs(w) >= epsilon)


def rationale_only_text(instance: Instance, e: Explanation, epsilon: float) -> str:
    """All occurrences of the selected token types, in sentence order."""
    keep = selected_tokens(e, epsilon)
    return " ".join(tok.surface for tok in instance.tokens if tok.normalized in keep)


def faithfulness_accuracy(
    model: ModelHandle,
    pairs: Sequence[tuple[Instance, Explanation]],
    epsilon: float,
    reference: str = "gold",
) -> FaithfulnessRecord:
    """Accuracy when the model sees only the extracted rationales.

    ``reference="gold"`` scores against gold labels; ``"model"`` scores
    agreement with the model's own full-sentence predictions (fidelity).
    """
    if reference not in REFERENCE_MODES:
        raise ValueError(f"unknown reference mode {reference!r}")
    if not pairs:
        raise ValueError("pairs must be non-empty")
    explainers = {e.explainer for _, e in pairs}
    if len(explainers) != 1:
        raise ValueError(f"pairs mix explainers: {sorted(explainers)}")
    explainer = explainers.pop()

    rationale_texts = [rationale_only_text(inst, e, epsilon) for inst, e in pairs]
    # the same join the rationale path uses, so an all-token selection
    # reproduces the baseline input byte for byte
    full_texts = [" ".join(tok.surface for tok in inst.tokens) for inst, _ in pairs]
    num_empty = sum(1 for t in rationale_texts if not t)

    rationale_labels = [1 if p >= 0.5 else 0 for p in model.predict_batch(rationale_texts)]
    full_labels = [1 if p >= 0.5 else 0 for p in model.predict_batch(full_texts)]
    targets = [inst.gold_label for inst, _ in pairs] if reference == "gold" else full_labels

    n = len(pairs)
    acc = sum(1 for got, want in zip(rationale_labels, targets) if got == want) / n
    baseline = sum(1 for got, want in zip(full_labels, targets) if got == want) / n
    return FaithfulnessRecord(
        model=model.name,
        explainer=explainer,
        epsilon=None if explainer == "anchors" else epsilon,
        accuracy_on_rationales=acc,
        baseline_accuracy=baseline,
        delta=acc - baseline,
        num_instances=n,
        num_empty_rationales=num_empty,
    )
