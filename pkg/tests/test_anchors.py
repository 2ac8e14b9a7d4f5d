import math

import numpy as np
import pytest

from rationeval.explainers import (
    ExplainerConfig,
    explain_anchors,
    find_anchor,
    kl_lucb_bounds,
)
from rationeval.model import from_function
from rationeval.text import DROP

from conftest import make_instance


def kl_bound_oracle(successes, trials, beta):
    """Independent bisection of trials*KL(p||q) <= beta (plain Python)."""

    def kl(p, q):
        q = min(max(q, 1e-16), 1 - 1e-16)
        out = 0.0
        if p > 0:
            out += p * math.log(p / q)
        if p < 1:
            out += (1 - p) * math.log((1 - p) / (1 - q))
        return out

    p = successes / trials
    target = beta / trials
    if successes == 0:
        lower = 0.0
    else:
        lo, hi = 0.0, p
        while hi - lo > 1e-9:
            mid = (lo + hi) / 2
            if kl(p, mid) > target:
                lo = mid
            else:
                hi = mid
        lower = hi
    if successes == trials:
        upper = 1.0
    else:
        lo, hi = p, 1.0
        while hi - lo > 1e-9:
            mid = (lo + hi) / 2
            if kl(p, mid) > target:
                hi = mid
            else:
                lo = mid
        upper = lo
    return lower, upper


def test_bounds_all_successes_upper_is_one():
    for trials in (1, 10, 100):
        _, upper = kl_lucb_bounds(trials, trials, 1.0)
        assert upper == 1.0


def test_bounds_zero_successes_lower_is_zero():
    for trials in (1, 10, 100):
        lower, _ = kl_lucb_bounds(0, trials, 1.0)
        assert lower == 0.0


def test_bounds_bracket_the_estimate():
    lower, upper = kl_lucb_bounds(80, 100, math.log(1 / 0.05))
    assert lower <= 0.8 <= upper
    want_lower, want_upper = kl_bound_oracle(80, 100, math.log(1 / 0.05))
    assert lower == pytest.approx(want_lower, abs=1e-6)
    assert upper == pytest.approx(want_upper, abs=1e-6)


def test_bounds_match_oracle_randomized():
    rng = np.random.default_rng(77)
    for _ in range(200):
        trials = int(rng.integers(1, 400))
        successes = int(rng.integers(0, trials + 1))
        beta = float(rng.uniform(0.01, 8.0))
        got = kl_lucb_bounds(successes, trials, beta)
        want = kl_bound_oracle(successes, trials, beta)
        assert got[0] == pytest.approx(want[0], abs=1e-6)
        assert got[1] == pytest.approx(want[1], abs=1e-6)


def test_bounds_input_validation():
    with pytest.raises(ValueError):
        kl_lucb_bounds(1, 0, 1.0)
    with pytest.raises(ValueError):
        kl_lucb_bounds(5, 3, 1.0)
    with pytest.raises(ValueError):
        kl_lucb_bounds(1, 2, 0.0)


def test_decisive_token_anchor(rule_model):
    inst = make_instance("the film was good overall")
    cfg = ExplainerConfig(seed=13, anchor_budget=8000)
    rule, label, used, certified = find_anchor(rule_model, inst, cfg)
    assert certified
    assert label == 1
    assert rule.predicate_tokens == {"good"}
    assert rule.precision_lower_bound >= cfg.anchor_tau
    assert rule.precision_estimate >= rule.precision_lower_bound
    assert 0 < used <= cfg.anchor_budget


def test_anchor_explanation_items_carry_confidence(rule_model):
    inst = make_instance("good and dull and slow")
    cfg = ExplainerConfig(seed=3, anchor_budget=8000)
    expl = explain_anchors(rule_model, inst, cfg)
    assert expl.explainer == "anchors"
    assert expl.certified
    assert [t for t, _ in expl.items] == ["good"]
    for _, w in expl.items:
        assert w == expl.confidence
    assert expl.confidence >= cfg.anchor_tau


def test_constant_model_empty_anchor(constant_model):
    inst = make_instance("any words at all here")
    cfg = ExplainerConfig(seed=21)
    expl = explain_anchors(constant_model, inst, cfg)
    assert expl.certified
    assert expl.items == ()
    assert expl.confidence == 1.0


def test_determinism(rule_model):
    inst = make_instance("a good little film")
    cfg = ExplainerConfig(seed=17, anchor_budget=6000)
    assert explain_anchors(rule_model, inst, cfg) == explain_anchors(rule_model, inst, cfg)


def test_budget_exhaustion_returns_uncertified():
    # parity model: label flips with every dropped token, so no candidate
    # gets anywhere near tau under the drop strategy
    parity = from_function(
        lambda t: 0.9 if len(t.split()) % 2 == 0 else 0.1, name="parity"
    )
    inst = make_instance("w1 w2 w3 w4 w5 w6")
    cfg = ExplainerConfig(seed=5, anchor_budget=600)
    expl = explain_anchors(parity, inst, cfg, strategy=DROP)
    assert not expl.certified
    assert expl.sample_budget_used <= cfg.anchor_budget
    assert 0.0 <= expl.confidence <= 1.0


def test_anchor_tokens_subset_of_instance(rule_model):
    inst = make_instance("good bad good bad ugly")
    cfg = ExplainerConfig(seed=8, anchor_budget=6000)
    expl = explain_anchors(rule_model, inst, cfg)
    assert {t for t, _ in expl.items} <= inst.token_types
