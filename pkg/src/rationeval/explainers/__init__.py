"""Black-box explainers: local linear surrogate, Shapley attribution, anchors.

All three operate on the same interpretable units: the instance's distinct
normalized token types in first-occurrence order.  Masking a unit toggles
every position where that type occurs.  Weights are oriented toward the
predicted class, so a positive weight always supports the prediction.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from ..corpus import Instance
from ..errors import ConfigError
from ..model import ModelHandle
from ..text import PerturbationStrategy, Token, UNK_REPLACE

EXPLAINER_NAMES = ("lime", "anchors", "shap")


@dataclass(frozen=True)
class ExplainerConfig:
    num_samples: int = 1000
    kernel_width_sigma: float = 25.0
    ridge_lambda: float = 1.0
    shap_exact_threshold: int = 12
    anchor_tau: float = 0.95
    anchor_delta: float = 0.1
    beam_width: int = 4
    anchor_budget: int = 20000
    seed: int = 0

    def __post_init__(self):
        for name in ("num_samples", "shap_exact_threshold", "beam_width", "anchor_budget"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if not (0.0 < self.anchor_tau < 1.0) or not (0.0 < self.anchor_delta < 1.0):
            raise ConfigError("anchor_tau and anchor_delta must lie in (0, 1)")
        if self.kernel_width_sigma <= 0 or self.ridge_lambda <= 0:
            raise ConfigError("kernel_width_sigma and ridge_lambda must be positive")

    def with_seed(self, seed: int) -> "ExplainerConfig":
        return replace(self, seed=seed)


@dataclass(frozen=True)
class Explanation:
    explainer: str
    instance_id: str
    predicted_label: int
    items: tuple[tuple[str, float], ...]
    confidence: float
    sample_budget_used: int
    certified: bool = True

    def weights_by_token(self) -> dict[str, float]:
        return {token: weight for token, weight in self.items}

    def to_json(self) -> dict:
        return {
            "instance_id": self.instance_id,
            "explainer": self.explainer,
            "predicted_label": self.predicted_label,
            "items": [{"token": t, "weight": w} for t, w in self.items],
            "confidence": self.confidence,
            "samples_used": self.sample_budget_used,
            "certified": self.certified,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Explanation":
        return cls(
            explainer=obj["explainer"],
            instance_id=obj["instance_id"],
            predicted_label=int(obj["predicted_label"]),
            items=tuple((d["token"], float(d["weight"])) for d in obj["items"]),
            confidence=float(obj["confidence"]),
            sample_budget_used=int(obj["samples_used"]),
            certified=bool(obj.get("certified", True)),
        )


def feature_basis(instance: Instance) -> tuple[list[str], list[list[int]]]:
    """Distinct token types in first-occurrence order, with their positions."""
    types: list[str] = []
    positions: dict[str, list[int]] = {}
    for tok in instance.tokens:
        if tok.normalized not in positions:
            positions[tok.normalized] = []
            types.append(tok.normalized)
        positions[tok.normalized].append(tok.position)
    return types, [positions[t] for t in types]


def expand_feature_mask(
    feature_keep: Sequence[int] | np.ndarray,
    positions: Sequence[Sequence[int]],
    n_tokens: int,
) -> np.ndarray:
    """Lift a keep-mask over token types to a keep-mask over positions."""
    keep = np.zeros(n_tokens, dtype=np.uint8)
    for j, bit in enumerate(feature_keep):
        if bit:
            keep[list(positions[j])] = 1
    return keep


def perturbed_texts(
    tokens: Sequence[Token],
    feature_masks: np.ndarray,
    positions: Sequence[Sequence[int]],
    strategy: PerturbationStrategy,
    rng: np.random.Generator | None,
) -> list[str]:
    from ..text import apply_mask

    n = len(tokens)
    return [
        apply_mask(tokens, expand_feature_mask(fm, positions, n), strategy, rng)
        for fm in feature_masks
    ]


def oriented(weights: np.ndarray, predicted_label: int) -> np.ndarray:
    """Flip p_pos-scale attributions so positive weight supports the prediction."""
    return weights if predicted_label == 1 else -weights


from .anchors import AnchorRule, explain_anchors, find_anchor, kl_lucb_bounds  # noqa: E402
from .lime import explain_lime  # noqa: E402
from .shap import exact_shapley, explain_kernel_shap  # noqa: E402

EXPLAINERS = {
    "lime": explain_lime,
    "shap": explain_kernel_shap,
    "anchors": explain_anchors,
}


def explain(
    name: str,
    model: ModelHandle,
    instance: Instance,
    cfg: ExplainerConfig,
    strategy: PerturbationStrategy = UNK_REPLACE,
) -> Explanation:
    try:
        fn = EXPLAINERS[name]
    except KeyError:
        raise ConfigError(f"unknown explainer {name!r}") from None
    return fn(model, instance, cfg, strategy=strategy)


__all__ = [
    "AnchorRule",
    "EXPLAINERS",
    "EXPLAINER_NAMES",
    "Explanation",
    "ExplainerConfig",
    "exact_shapley",
    "explain",
    "explain_anchors",
    "explain_kernel_shap",
    "explain_lime",
    "feature_basis",
    "find_anchor",
    "kl_lucb_bounds",
]
