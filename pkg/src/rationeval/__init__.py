"""rationeval: faithfulness and plausibility evaluation of sentiment-classifier
explanations.

Subpackages and modules map one-to-one onto the evaluation pipeline:
``corpus`` (annotated rationales), ``text`` (tokenization, perturbation),
``model`` (black-box classifier handles), ``explainers`` (lime / shap /
anchors), ``metrics`` (plausibility scores), ``faithfulness``
(rationale-only re-prediction), ``harness`` (matrix runs and reports).
"""

from ._kernels import BACKEND as kernel_backend

__version__ = "0.1.0"

__all__ = ["kernel_backend", "__version__"]
