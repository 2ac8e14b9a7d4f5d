"""Shapley-value attribution: exact enumeration oracle and sampled variant.

The coalition game evaluates the model on the sentence with non-coalition
token types masked out per the perturbation strategy; the baseline is the
fully-masked sentence (empty string under drop).  Small instances are
solved exactly over all 2^d coalitions; larger ones by Shapley-kernel
weighted least squares constrained to local accuracy.
"""

from __future__ import annotations

import math

import numpy as np

from .. import _kernels
from ..corpus import Instance
from ..errors import SizeError, SurrogateFitError
from ..model import ModelHandle
from ..text import PerturbationStrategy, UNK_REPLACE, sample_masks
from . import (
    ExplainerConfig,
    Explanation,
    feature_basis,
    oriented,
    perturbed_texts,
)

# Hard cap for exhaustive enumeration regardless of configuration.
EXACT_ENUMERATION_LIMIT = 20


def _subset_weights(d: int) -> np.ndarray:
    """Classical Shapley subset weights w[k] = k!(d-1-k)!/d! for k < d."""
    fact = [math.factorial(i) for i in range(d + 1)]
    return np.asarray([fact[k] * fact[d - 1 - k] / fact[d] for k in range(d)], dtype=np.float64)


def _coalition_values(
    model: ModelHandle,
    instance: Instance,
    types: list[str],
    positions: list[list[int]],
    strategy: PerturbationStrategy,
    rng: np.random.Generator | None,
) -> np.ndarray:
    d = len(types)
    size = 1 << d
    masks = np.zeros((size, d), dtype=np.uint8)
    for j in range(d):
        bit = 1 << j
        masks[:, j] = (np.arange(size) & bit) > 0
    texts = perturbed_texts(instance.tokens, masks, positions, strategy, rng)
    return np.asarray(model.predict_batch(texts), dtype=np.float64)


def exact_shapley(
    model: ModelHandle,
    instance: Instance,
    strategy: PerturbationStrategy = UNK_REPLACE,
    rng: np.random.Generator | None = None,
    limit: int = EXACT_ENUMERATION_LIMIT,
) -> list[tuple[str, float]]:
    """Exact Shapley values by full coalition enumeration (the test oracle)."""
    types, positions = feature_basis(instance)
    d = len(types)
    if d > limit:
        raise SizeError(f"{d} token types exceed the exact enumeration limit of {limit}")
    values = _coalition_values(model, instance, types, positions, strategy, rng)
    phi = _kernels.shapley_from_coalitions(values, d, _subset_weights(d))
    return list(zip(types, (float(p) for p in phi)))


def _sampled_shapley(
    model: ModelHandle,
    instance: Instance,
    types: list[str],
    positions: list[list[int]],
    cfg: ExplainerConfig,
    strategy: PerturbationStrategy,
    rng: np.random.Generator,
) -> tuple[np.ndarray, float, float, int]:
    """Shapley-kernel weighted least squares with the efficiency constraint."""
    d = len(types)
    n_tokens = len(instance.tokens)

    masks = sample_masks(d, cfg.num_samples, rng)
    sizes = masks.sum(axis=1)
    interior = masks[(sizes > 0) & (sizes < d)]
    if interior.shape[0] == 0 or (interior == interior[0]).all():
        raise SurrogateFitError("sampled coalitions are degenerate; cannot fit attributions")

    from ..text import apply_mask
    from . import expand_feature_mask

    full_text = apply_mask(instance.tokens, np.ones(n_tokens, dtype=np.uint8), strategy, rng)
    empty_text = apply_mask(instance.tokens, np.zeros(n_tokens, dtype=np.uint8), strategy, rng)
    texts = [full_text, empty_text] + [
        apply_mask(instance.tokens, expand_feature_mask(m, positions, n_tokens), strategy, rng)
        for m in interior
    ]
    y = np.asarray(model.predict_batch(texts), dtype=np.float64)
    v_full, v_empty = float(y[0]), float(y[1])
    y_interior = y[2:]

    k = interior.sum(axis=1).astype(np.float64)
    kernel = (d - 1) / (np.array([math.comb(d, int(s)) for s in k]) * k * (d - k))

    # Enforce local accuracy by eliminating the last coefficient:
    # phi[d-1] = (v_full - v_empty) - sum(phi[:d-1]).
    z = interior.astype(np.float64)
    z_last = z[:, -1]
    target = y_interior - v_empty - z_last * (v_full - v_empty)
    design = z[:, :-1] - z_last[:, None]
    sw = np.sqrt(kernel)
    coef, *_ = np.linalg.lstsq(design * sw[:, None], target * sw, rcond=None)
    phi = np.empty(d, dtype=np.float64)
    phi[:-1] = coef
    phi[-1] = (v_full - v_empty) - coef.sum()
    return phi, v_full, v_empty, len(texts)


def explain_kernel_shap(
    model: ModelHandle,
    instance: Instance,
    cfg: ExplainerConfig,
    strategy: PerturbationStrategy = UNK_REPLACE,
) -> Explanation:
    types, positions = feature_basis(instance)
    d = len(types)
    rng = np.random.default_rng(cfg.seed)

    if d <= cfg.shap_exact_threshold:
        values = _coalition_values(model, instance, types, positions, strategy, rng)
        phi = _kernels.shapley_from_coalitions(values, d, _subset_weights(d))
        v_full = float(values[-1])
        used = 1 << d
    else:
        phi, v_full, _, used = _sampled_shapley(
            model, instance, types, positions, cfg, strategy, rng
        )

    predicted_label = 1 if v_full >= 0.5 else 0
    phi = oriented(np.asarray(phi, dtype=np.float64), predicted_label)
    return Explanation(
        explainer="shap",
        instance_id=instance.id,
        predicted_label=predicted_label,
        items=tuple((t, float(p)) for t, p in zip(types, phi)),
        confidence=1.0,
        sample_budget_used=used,
    )
