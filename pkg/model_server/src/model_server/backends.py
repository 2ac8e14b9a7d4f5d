"""Classifier backends behind the server.

``nb:<train.jsonl>`` trains a small self-contained multinomial Naive
Bayes at startup (deterministic, no dependencies).  ``hf:<model-id>``
wraps a transformers sentiment pipeline when that stack is installed.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence


@dataclass
class ServerConfig:
    backend: str
    device: str = "cpu"
    max_batch: int = 256
    label_names: tuple[str, str] = ("negative", "positive")


class NaiveBayesBackend:
    """Multinomial NB with Laplace smoothing over lowercased word types."""

    name = "nb"

    def __init__(self, train_path: str | Path, alpha: float = 1.0):
        docs = []
        for raw in Path(train_path).read_text(encoding="utf-8").splitlines():
            if raw.strip():
                obj = json.loads(raw)
                docs.append((str(obj["text"]), int(obj["label"])))
        labels = {label for _, label in docs}
        if labels != {0, 1}:
            raise ValueError(f"training data must contain both labels, got {sorted(labels)}")
        counts = [Counter(), Counter()]
        n_docs = [0, 0]
        for text, label in docs:
            n_docs[label] += 1
            counts[label].update(w.lower() for w in text.split())
        vocab = sorted(set(counts[0]) | set(counts[1]))
        v = len(vocab)
        self._delta = {}
        for word in vocab:
            like = []
            for c in (0, 1):
                total = sum(counts[c].values())
                like.append(math.log((counts[c][word] + alpha) / (total + alpha * v)))
            self._delta[word] = like[1] - like[0]
        self._prior_delta = math.log(n_docs[1] / len(docs)) - math.log(n_docs[0] / len(docs))
        self.name = f"nb:{Path(train_path).stem}"

    def predict_batch(self, texts: Sequence[str]) -> list[float]:
        out = []
        for text in texts:
            score = self._prior_delta
            for word in text.split():
                score += self._delta.get(word.lower(), 0.0)
            if score >= 0:
                out.append(1.0 / (1.0 + math.exp(-score)))
            else:
                e = math.exp(score)
                out.append(e / (1.0 + e))
        return out


class TransformersBackend:
    """Sentiment pipeline adapter; requires the optional hf extra."""

    def __init__(self, model_id: str, device: str = "cpu",
                 label_names: tuple[str, str] = ("NEGATIVE", "POSITIVE")):
        try:
            from transformers import pipeline
        except ImportError as exc:
            raise RuntimeError("transformers is not installed (pip install .[hf])") from exc
        self._positive = label_names[1]
        self._pipe = pipeline(
            "sentiment-analysis", model=model_id, device=-1 if device == "cpu" else 0,
            top_k=None,
        )
        self.name = f"hf:{model_id}"

    def predict_batch(self, texts: Sequence[str]) -> list[float]:
        if not texts:
            return []
        results = self._pipe(list(texts), truncation=True)
        out = []
        for scores in results:
            by_label = {s["label"]: float(s["score"]) for s in scores}
            if self._positive not in by_label:
                raise ValueError(
                    f"pipeline labels {sorted(by_label)} lack positive label "
                    f"{self._positive!r}; pass --labels NEG:POS"
                )
            out.append(by_label[self._positive])
        return out


def open_backend(spec: str, device: str = "cpu",
                 label_names: tuple[str, str] = ("negative", "positive")):
    if spec.startswith("nb:"):
        return NaiveBayesBackend(spec[len("nb:"):])
    if spec.startswith("hf:"):
        return TransformersBackend(spec[len("hf:"):], device=device,
                                   label_names=label_names)
    raise ValueError(f"unknown backend spec {spec!r} (expected nb:<train.jsonl> or hf:<id>)")
