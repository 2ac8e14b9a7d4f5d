"""Pure NumPy reference implementation of the hot kernels.

Kept algorithmically identical to the Cython backend so that the two are
interchangeable; the equivalence is asserted by tests.
"""

import math

import numpy as np

BACKEND = "pure"

# Interval width after 50 halvings of [0, 1] is ~1e-15, comfortably below
# the 1e-6 bracketing contract.
_BISECT_ITERS = 50
_EPS = 1e-16


def _kl_bernoulli(p: float, q: float) -> float:
    q = min(max(q, _EPS), 1.0 - _EPS)
    out = 0.0
    if p > 0.0:
        out += p * math.log(p / q)
    if p < 1.0:
        out += (1.0 - p) * math.log((1.0 - p) / (1.0 - q))
    return out


def kl_bernoulli_bounds(successes: int, trials: int, beta: float):
    """Extreme q in [0, 1] with trials * KL(successes/trials || q) <= beta.

    Returns ``(lower, upper)`` bracketed by bisection.
    """
    p = successes / trials
    target = beta / trials

    if successes == 0:
        lower = 0.0
    else:
        lo, hi = 0.0, p
        for _ in range(_BISECT_ITERS):
            mid = 0.5 * (lo + hi)
            if _kl_bernoulli(p, mid) > target:
                lo = mid
            else:
                hi = mid
        lower = hi

    if successes == trials:
        upper = 1.0
    else:
        lo, hi = p, 1.0
        for _ in range(_BISECT_ITERS):
            mid = 0.5 * (lo + hi)
            if _kl_bernoulli(p, mid) > target:
                hi = mid
            else:
                lo = mid
        upper = lo

    return lower, upper


def nb_score_batch(indices, indptr, delta_ll, prior_delta):
    """Positive-class probability per document.

    ``indices``/``indptr`` hold the vocabulary indices of each document's
    in-vocabulary tokens in CSR layout; ``delta_ll[t]`` is the per-token
    log-likelihood difference (positive minus negative class) and
    ``prior_delta`` the log-prior difference.
    """
    indices = np.asarray(indices, dtype=np.int64)
    indptr = np.asarray(indptr, dtype=np.int64)
    delta_ll = np.asarray(delta_ll, dtype=np.float64)
    n_docs = indptr.shape[0] - 1
    out = np.empty(n_docs, dtype=np.float64)
    for i in range(n_docs):
        score = prior_delta
        for j in range(indptr[i], indptr[i + 1]):
            score += delta_ll[indices[j]]
        if score >= 0.0:
            out[i] = 1.0 / (1.0 + math.exp(-score))
        else:
            e = math.exp(score)
            out[i] = e / (1.0 + e)
    return out


def shapley_from_coalitions(values, d, weights):
    """Shapley values from the full 2^d table of coalition payoffs.

    ``values[s]`` is the payoff of the coalition whose members are the set
    bits of ``s``; ``weights[k]`` is the classical subset weight
    k!(d-1-k)!/d! for coalitions of size k.
    """
    values = np.asarray(values, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.float64)
    size = 1 << d
    # popcount per subset index, built by doubling
    pc = np.zeros(size, dtype=np.int64)
    for i in range(d):
        half = 1 << i
        pc[half : 2 * half] = pc[:half] + 1
    all_s = np.arange(size, dtype=np.int64)
    phi = np.empty(d, dtype=np.float64)
    for i in range(d):
        bit = 1 << i
        without = all_s[(all_s & bit) == 0]
        gains = values[without | bit] - values[without]
        phi[i] = float(np.dot(weights[pc[without]], gains))
    return phi
