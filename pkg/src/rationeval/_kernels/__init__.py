"""Numeric hot-path kernels.

Three inner loops dominate a full evaluation run: Naive Bayes scoring of
perturbed texts, Bernoulli-KL confidence-bound bisection inside the anchor
search, and Shapley aggregation over enumerated coalitions.  They are
implemented twice with identical semantics: a Cython extension (``_core``)
and a pure NumPy fallback (``_pure``).  The compiled backend is selected at
import when present; set ``RATIONEVAL_PURE=1`` to force the fallback.
"""

import os

from . import _pure

if os.environ.get("RATIONEVAL_PURE"):
    _impl = _pure
else:
    try:
        from . import _core as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _pure

BACKEND: str = _impl.BACKEND

kl_bernoulli_bounds = _impl.kl_bernoulli_bounds
nb_score_batch = _impl.nb_score_batch
shapley_from_coalitions = _impl.shapley_from_coalitions

__all__ = [
    "BACKEND",
    "kl_bernoulli_bounds",
    "nb_score_batch",
    "shapley_from_coalitions",
]
