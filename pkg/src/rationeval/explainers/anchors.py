"""Anchor rules: minimal token sets whose presence fixes the prediction.

Beam search over candidate token-type sets.  A candidate's precision is
the fraction of perturbations (anchor tokens held fixed, every other token
independently kept or perturbed with probability 1/2) whose predicted
label matches the unperturbed prediction.  Candidates are compared with
KL-LUCB best-arm confidence bounds; a candidate is certified once its
precision lower bound clears the target precision.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import _kernels
from ..corpus import Instance
from ..model import ModelHandle
from ..text import PerturbationStrategy, UNK_REPLACE
from . import ExplainerConfig, Explanation, feature_basis, perturbed_texts

SAMPLE_BATCH = 32
# Stop refining a best-arm comparison once the contested interval is this
# small; certification still requires the strict lower-bound test.
SEPARATION_GAP = 0.1


def kl_lucb_bounds(successes: int, trials: int, beta: float) -> tuple[float, float]:
    """Extreme q with trials * KL(successes/trials || q) <= beta, by bisection."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if not 0 <= successes <= trials:
        raise ValueError("successes must lie in [0, trials]")
    if beta <= 0:
        raise ValueError("beta must be positive")
    lower, upper = _kernels.kl_bernoulli_bounds(successes, trials, beta)
    return float(lower), float(upper)


def _beta_explore(t: int, n_arms: int, delta: float) -> float:
    # KL-LUCB exploration rate with alpha = 1.1, k = 405.5
    v = np.log(405.5 * max(n_arms, 1) * t**1.1 / delta)
    return float(v + np.log(v))


def _beta_certify(anchor_size: int, n_features: int, delta: float) -> float:
    # union bound over the candidates examined up to this anchor size
    return float(np.log((1 + anchor_size * max(n_features, 1)) / delta))


@dataclass(frozen=True)
class AnchorRule:
    predicate_tokens: frozenset[str]
    precision_estimate: float
    precision_lower_bound: float
    coverage_estimate: float


class _AnchorSearch:
    def __init__(
        self,
        model: ModelHandle,
        instance: Instance,
        cfg: ExplainerConfig,
        strategy: PerturbationStrategy,
    ):
        self.model = model
        self.instance = instance
        self.cfg = cfg
        self.strategy = strategy
        self.types, self.positions = feature_basis(instance)
        self.d = len(self.types)
        self.rng = np.random.default_rng(cfg.seed)
        self.used = 0
        self.stats: dict[tuple[int, ...], list[int]] = {}  # candidate -> [trials, successes]
        full = " ".join(t.surface for t in instance.tokens)
        self.y0 = 1 if model.predict(full) >= 0.5 else 0
        self.used += 1

    def draw(self, candidate: tuple[int, ...], batch: int) -> int:
        batch = min(batch, self.cfg.anchor_budget - self.used)
        if batch <= 0:
            return 0
        masks = (self.rng.random((batch, self.d)) < 0.5).astype(np.uint8)
        for j in candidate:
            masks[:, j] = 1
        texts = perturbed_texts(
            self.instance.tokens, masks, self.positions, self.strategy, self.rng
        )
        probs = self.model.predict_batch(texts)
        self.used += batch
        st = self.stats.setdefault(candidate, [0, 0])
        for p in probs:
            st[0] += 1
            if (1 if p >= 0.5 else 0) == self.y0:
                st[1] += 1
        return batch

    def mean(self, candidate: tuple[int, ...]) -> float:
        st = self.stats.get(candidate, [0, 0])
        return st[1] / st[0] if st[0] else 0.0

    def bounds(self, candidate: tuple[int, ...], beta: float) -> tuple[float, float]:
        st = self.stats[candidate]
        if st[0] == 0:
            return 0.0, 1.0
        return kl_lucb_bounds(st[1], st[0], beta)

    def lucb_select(self, candidates: list[tuple[int, ...]], top_n: int) -> list[tuple[int, ...]]:
        """Top candidates by precision via KL-LUCB critical-pair sampling.

        Selection is best-effort within a budget slice (certification is
        where rigor lives): arms tied across the top_n boundary would
        otherwise absorb unbounded samples.
        """
        slice_start = self.used
        slice_cap = max(self.cfg.num_samples, 2 * SAMPLE_BATCH * len(candidates))
        for c in candidates:
            if self.stats.get(c, [0, 0])[0] == 0:
                self.draw(c, SAMPLE_BATCH)
        if len(candidates) <= top_n:
            order = np.argsort([-self.mean(c) for c in candidates], kind="stable")
            return [candidates[i] for i in order]
        t = 1
        while self.used < self.cfg.anchor_budget and self.used - slice_start < slice_cap:
            means = np.asarray([self.mean(c) for c in candidates])
            order = np.argsort(-means, kind="stable")
            top, rest = order[:top_n], order[top_n:]
            beta = _beta_explore(t, len(candidates), self.cfg.anchor_delta)
            top_lbs = [self.bounds(candidates[i], beta)[0] for i in top]
            rest_ubs = [self.bounds(candidates[i], beta)[1] for i in rest]
            weakest = top[int(np.argmin(top_lbs))]
            strongest = rest[int(np.argmax(rest_ubs))]
            if max(rest_ubs) - min(top_lbs) < SEPARATION_GAP:
                break
            self.draw(candidates[weakest], SAMPLE_BATCH)
            self.draw(candidates[strongest], SAMPLE_BATCH)
            t += 1
        means = np.asarray([self.mean(c) for c in candidates])
        order = np.argsort(-means, kind="stable")
        return [candidates[i] for i in order[:top_n]]

    def certify(self, candidate: tuple[int, ...], size: int) -> bool | None:
        """True: lower bound cleared tau.  False: upper bound fell below tau.
        None: budget ran out undecided."""
        beta = _beta_certify(size, self.d, self.cfg.anchor_delta)
        tau = self.cfg.anchor_tau
        if self.stats.get(candidate, [0, 0])[0] == 0 and self.draw(candidate, SAMPLE_BATCH) == 0:
            return None
        while True:
            lb, ub = self.bounds(candidate, beta)
            if lb >= tau:
                return True
            if ub < tau:
                return False
            if self.draw(candidate, SAMPLE_BATCH) == 0:
                return None

    def rule_for(self, candidate: tuple[int, ...], size: int) -> AnchorRule:
        beta = _beta_certify(size, self.d, self.cfg.anchor_delta)
        st = self.stats.get(candidate, [0, 0])
        lb = self.bounds(candidate, beta)[0] if st[0] else 0.0
        return AnchorRule(
            predicate_tokens=frozenset(self.types[j] for j in candidate),
            precision_estimate=self.mean(candidate),
            precision_lower_bound=lb,
            coverage_estimate=0.5 ** len(candidate),
        )

    def best_seen(self) -> tuple[tuple[int, ...], int]:
        """Highest-precision candidate sampled so far; ties: smaller, earlier."""
        best, best_key = (), (-1.0, 0)
        for cand, st in self.stats.items():
            if st[0] == 0:
                continue
            key = (st[1] / st[0], -len(cand))
            if key > best_key:
                best, best_key = cand, key
        return best, len(best)


def find_anchor(
    model: ModelHandle,
    instance: Instance,
    cfg: ExplainerConfig,
    strategy: PerturbationStrategy = UNK_REPLACE,
) -> tuple[AnchorRule, int, int, bool]:
    """Run the beam search.

    Returns ``(rule, predicted_label, samples_used, certified)``; when the
    budget is exhausted before any candidate certifies, the rule reports the
    best candidate seen and ``certified`` is False.
    """
    search = _AnchorSearch(model, instance, cfg, strategy)

    empty: tuple[int, ...] = ()
    search.draw(empty, SAMPLE_BATCH)
    verdict = search.certify(empty, 0)
    if verdict is True:
        return search.rule_for(empty, 0), search.y0, search.used, True

    beam: list[tuple[int, ...]] = [empty]
    for size in range(1, search.d + 1):
        if search.used >= cfg.anchor_budget:
            break
        candidates: list[tuple[int, ...]] = []
        seen = set()
        for parent in beam:
            for j in range(search.d):
                if j in parent:
                    continue
                cand = tuple(sorted(parent + (j,)))
                if cand not in seen:
                    seen.add(cand)
                    candidates.append(cand)
        if not candidates:
            break
        top = search.lucb_select(candidates, min(cfg.beam_width, len(candidates)))
        for cand in top:
            verdict = search.certify(cand, size)
            if verdict is True:
                return search.rule_for(cand, size), search.y0, search.used, True
            if verdict is None:
                break
        beam = top

    best, best_size = search.best_seen()
    return search.rule_for(best, best_size), search.y0, search.used, False


def explain_anchors(
    model: ModelHandle,
    instance: Instance,
    cfg: ExplainerConfig,
    strategy: PerturbationStrategy = UNK_REPLACE,
) -> Explanation:
    rule, predicted_label, used, certified = find_anchor(model, instance, cfg, strategy)
    types, _ = feature_basis(instance)
    ordered = [t for t in types if t in rule.predicate_tokens]
    confidence = rule.precision_estimate
    return Explanation(
        explainer="anchors",
        instance_id=instance.id,
        predicted_label=predicted_label,
        items=tuple((t, confidence) for t in ordered),
        confidence=confidence,
        sample_budget_used=used,
        certified=certified,
    )
