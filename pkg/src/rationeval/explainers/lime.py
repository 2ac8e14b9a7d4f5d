"""Local linear surrogate explainer.

Fits a weighted ridge regression of the model's positive-class probability
on Bernoulli keep-masks drawn around the instance, with an exponential
kernel over the cosine distance between each mask and the unperturbed
all-ones mask.  Every token type receives a coefficient; no top-K cut is
applied here, threshold selection happens downstream.
"""

from __future__ import annotations

import numpy as np

from ..corpus import Instance
from ..errors import SurrogateFitError
from ..model import ModelHandle
from ..text import PerturbationStrategy, UNK_REPLACE, sample_masks
from . import (
    ExplainerConfig,
    Explanation,
    feature_basis,
    oriented,
    perturbed_texts,
)


def _kernel_weights(masks: np.ndarray, sigma: float) -> np.ndarray:
    d = masks.shape[1]
    k = masks.sum(axis=1).astype(np.float64)
    # cosine similarity of a binary mask with the all-ones vector is
    # sqrt(k/d); the empty mask gets similarity 0 by convention
    sim = np.sqrt(k / d)
    dist = 1.0 - sim
    return np.exp(-(dist**2) / sigma**2)


def _ridge_fit(
    masks: np.ndarray, y: np.ndarray, weights: np.ndarray, ridge_lambda: float
) -> np.ndarray:
    """Weighted ridge with an unpenalized intercept; returns coefficients."""
    n, d = masks.shape
    design = np.empty((n, d + 1), dtype=np.float64)
    design[:, 0] = 1.0
    design[:, 1:] = masks
    wd = design * weights[:, None]
    gram = design.T @ wd
    penalty = np.full(d + 1, ridge_lambda)
    penalty[0] = 0.0
    gram[np.diag_indices_from(gram)] += penalty
    rhs = wd.T @ y
    coef = np.linalg.solve(gram, rhs)
    return coef[1:]


def explain_lime(
    model: ModelHandle,
    instance: Instance,
    cfg: ExplainerConfig,
    strategy: PerturbationStrategy = UNK_REPLACE,
) -> Explanation:
    types, positions = feature_basis(instance)
    d = len(types)
    rng = np.random.default_rng(cfg.seed)

    masks = sample_masks(d, cfg.num_samples, rng)
    if (masks == masks[0]).all():
        raise SurrogateFitError("all sampled masks are identical; cannot fit a surrogate")

    texts = perturbed_texts(instance.tokens, masks, positions, strategy, rng)
    y = np.asarray(model.predict_batch(texts), dtype=np.float64)

    weights = _kernel_weights(masks, cfg.kernel_width_sigma)
    coef = _ridge_fit(masks.astype(np.float64), y, weights, cfg.ridge_lambda)

    predicted_label = 1 if y[0] >= 0.5 else 0  # first mask is the identity
    coef = oriented(coef, predicted_label)
    return Explanation(
        explainer="lime",
        instance_id=instance.id,
        predicted_label=predicted_label,
        items=tuple((t, float(c)) for t, c in zip(types, coef)),
        confidence=1.0,
        sample_budget_used=int(cfg.num_samples),
    )
