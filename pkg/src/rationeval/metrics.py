"""Plausibility scores between an explanation and a human rationale set.

Six information-retrieval-style metrics over token-type sets: precision,
recall and fallout, each in an unweighted and a contribution-weighted
variant.  Undefined cases (empty explanation, empty rationale, rationale
covering the whole sentence) are explicit ``None`` values, never silent
zeros; aggregation layers skip them and report skip counts.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

from .corpus import Instance, RationaleSet
from .errors import DomainError, EmptyWeightError
from .explainers import Explanation

Score = float | None  # None encodes UNDEFINED

WEIGHT_NORMS = ("max", "none")


@dataclass(frozen=True)
class WeightedSet:
    """Token types with positive contribution weights."""

    elements: Mapping[str, float]

    def __post_init__(self):
        for token, weight in self.elements.items():
            if weight <= 0:
                raise DomainError(f"non-positive weight {weight} for token {token!r}")

    def mass(self, subset: Iterable[str] | None = None) -> float:
        if subset is None:
            return sum(self.elements.values())
        return sum(w for t, w in self.elements.items() if t in subset)


@dataclass(frozen=True)
class MetricsRecord:
    precision: Score
    recall: Score
    fallout: Score
    precision_w: Score
    recall_w: Score
    fallout_w: Score
    size_e: int
    size_l: int
    size_s: int
    size_l_and_e: int
    aggregation_mode: str


def _check_domain(E: frozenset[str], L: frozenset[str], S: frozenset[str]) -> None:
    if not E <= S:
        raise DomainError(f"explanation tokens {sorted(E - S)} outside the sentence")
    if not L <= S:
        raise DomainError(f"rationale tokens {sorted(L - S)} outside the sentence")


def plausibility(
    E: Iterable[str], L: Iterable[str], S: Iterable[str]
) -> tuple[Score, Score, Score]:
    """Unweighted precision, recall, fallout of E against rationale L in S."""
    E, L, S = frozenset(E), frozenset(L), frozenset(S)
    _check_domain(E, L, S)
    hit = len(L & E)
    precision = hit / len(E) if E else None
    recall = hit / len(L) if L else None
    non_relevant = S - L
    fallout = len(non_relevant & E) / len(non_relevant) if non_relevant else None
    return precision, recall, fallout


def weighted_plausibility(
    E_w: WeightedSet, L: Iterable[str], S: Iterable[str]
) -> tuple[Score, Score, Score]:
    """Weighted variants; recall and fallout denominators stay unweighted."""
    L, S = frozenset(L), frozenset(S)
    E = frozenset(E_w.elements)
    _check_domain(E, L, S)
    total = E_w.mass()
    hit = E_w.mass(L)
    precision_w = hit / total if E else None
    recall_w = hit / len(L) if L else None
    non_relevant = S - L
    fallout_w = E_w.mass(non_relevant) / len(non_relevant) if non_relevant else None
    return precision_w, recall_w, fallout_w


def explanation_to_weighted_set(e: Explanation, norm: str = "max") -> WeightedSet:
    """Magnitudes of the explanation weights, optionally scaled by their max."""
    if norm not in WEIGHT_NORMS:
        raise ValueError(f"unknown weight norm {norm!r}")
    magnitudes = {token: abs(w) for token, w in e.items if w != 0.0}
    if not magnitudes:
        raise EmptyWeightError(f"explanation for {e.instance_id} has no nonzero weights")
    if norm == "max":
        top = max(magnitudes.values())
        magnitudes = {t: w / top for t, w in magnitudes.items()}
    return WeightedSet(magnitudes)


def score_explanation(
    e: Explanation,
    rationale: RationaleSet,
    instance: Instance,
    norm: str = "max",
) -> MetricsRecord:
    """Full six-metric record for one explanation against one rationale set.

    The explanation's retrieved set E is its nonzero-weight token types.
    """
    S = instance.token_types
    L = rationale.words
    try:
        E_w: WeightedSet | None = explanation_to_weighted_set(e, norm=norm)
    except EmptyWeightError:
        E_w = None

    if E_w is None:
        E: frozenset[str] = frozenset()
        non_relevant = S - L
        precision = precision_w = None
        recall = recall_w = 0.0 if L else None
        fallout = fallout_w = 0.0 if non_relevant else None
    else:
        E = frozenset(E_w.elements)
        precision, recall, fallout = plausibility(E, L, S)
        precision_w, recall_w, fallout_w = weighted_plausibility(E_w, L, S)

    return MetricsRecord(
        precision=precision,
        recall=recall,
        fallout=fallout,
        precision_w=precision_w,
        recall_w=recall_w,
        fallout_w=fallout_w,
        size_e=len(E),
        size_l=len(L),
        size_s=len(S),
        size_l_and_e=len(L & E),
        aggregation_mode=rationale.mode,
    )
