"""Uniform black-box interface to the classifier under explanation.

Every handle exposes one scalar contract: probability of the positive
class for a text.  Backends: a builtin multinomial Naive Bayes reference
classifier, an arbitrary Python callable (plumbing for fixtures and rule
models), and clients for external servers speaking the newline-delimited
JSON protocol over a subprocess pipe or HTTP.
"""

from __future__ import annotations

import json
import shlex
import subprocess
import threading
import urllib.error
import urllib.request
from collections import Counter
from pathlib import Path
from queue import Empty, Queue
from typing import Callable, Iterable, Sequence

import numpy as np

from . import _kernels
from .errors import (
    CapabilityError,
    ProtocolError,
    StartupError,
    TrainingError,
    TransportError,
)

PROTOCOL_VERSION = 1
DEFAULT_HANDSHAKE_TIMEOUT = 30.0
DEFAULT_REQUEST_TIMEOUT = 120.0
DEFAULT_RETRIES = 2


class ModelHandle:
    """Black-box text -> probability-of-positive function."""

    name: str = "model"
    backend: str = "builtin"
    label_names: tuple[str, str] = ("negative", "positive")

    def predict_batch(self, texts: Sequence[str]) -> list[float]:
        raise NotImplementedError

    def predict(self, text: str) -> float:
        return self.predict_batch([text])[0]

    def predicted_label(self, text: str) -> int:
        return 1 if self.predict(text) >= 0.5 else 0

    def close(self) -> None:
        pass

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


class CallableModel(ModelHandle):
    """Wraps a plain ``text -> p_pos`` callable."""

    def __init__(self, fn: Callable[[str], float], name: str = "callable"):
        self.fn = fn
        self.name = name
        self.backend = "builtin"

    def predict_batch(self, texts: Sequence[str]) -> list[float]:
        return [float(self.fn(t)) for t in texts]


def from_function(fn: Callable[[str], float], name: str = "callable") -> ModelHandle:
    return CallableModel(fn, name=name)


class BuiltinNB(ModelHandle):
    """Multinomial Naive Bayes over normalized token types.

    Tokens outside the training vocabulary are ignored at prediction time,
    so an empty (or fully out-of-vocabulary) text scores the class prior.
    """

    def __init__(
        self,
        vocabulary: dict[str, int],
        log_priors: np.ndarray,
        log_likelihoods: np.ndarray,
        smoothing_alpha: float,
        name: str = "builtin-nb",
    ):
        self.vocabulary = vocabulary
        self.log_priors = np.asarray(log_priors, dtype=np.float64)
        self.log_likelihoods = np.asarray(log_likelihoods, dtype=np.float64)
        self.smoothing_alpha = smoothing_alpha
        self.name = name
        self.backend = "builtin"
        if abs(float(np.exp(self.log_priors).sum()) - 1.0) > 1e-9:
            raise TrainingError("class priors do not sum to 1")
        if not np.isfinite(self.log_likelihoods).all():
            raise TrainingError("non-finite log likelihoods")
        # Only the class difference matters for p_pos.
        self._delta_ll = self.log_likelihoods[1] - self.log_likelihoods[0]
        self._prior_delta = float(self.log_priors[1] - self.log_priors[0])

    def token_log_odds(self, token: str) -> float:
        """Per-occurrence contribution of one token to the positive log odds."""
        idx = self.vocabulary.get(token.lower())
        return float(self._delta_ll[idx]) if idx is not None else 0.0

    def _encode(self, texts: Sequence[str]) -> tuple[np.ndarray, np.ndarray]:
        indices: list[int] = []
        indptr = np.empty(len(texts) + 1, dtype=np.int64)
        indptr[0] = 0
        vocab = self.vocabulary
        for i, text in enumerate(texts):
            for word in text.split():
                idx = vocab.get(word.lower())
                if idx is not None:
                    indices.append(idx)
            indptr[i + 1] = len(indices)
        return np.asarray(indices, dtype=np.int64), indptr

    def predict_batch(self, texts: Sequence[str]) -> list[float]:
        if not texts:
            return []
        indices, indptr = self._encode(texts)
        probs = _kernels.nb_score_batch(indices, indptr, self._delta_ll, self._prior_delta)
        return [float(p) for p in probs]


def train_builtin(
    corpus: Iterable[tuple[str, int]], alpha: float = 1.0, name: str = "builtin-nb"
) -> BuiltinNB:
    """Train the builtin NB classifier; deterministic for a fixed corpus."""
    if alpha <= 0:
        raise TrainingError("smoothing alpha must be positive")
    docs = list(corpus)
    labels = {label for _, label in docs}
    if labels != {0, 1}:
        raise TrainingError(f"training corpus must contain both labels, got {sorted(labels)}")

    counts = [Counter(), Counter()]
    doc_counts = [0, 0]
    for text, label in docs:
        doc_counts[label] += 1
        counts[label].update(w.lower() for w in text.split())

    vocab_words = sorted(set(counts[0]) | set(counts[1]))
    vocabulary = {w: i for i, w in enumerate(vocab_words)}
    v = len(vocabulary)
    log_likelihoods = np.empty((2, v), dtype=np.float64)
    for c in (0, 1):
        total = sum(counts[c].values())
        denom = total + alpha * v
        for w, i in vocabulary.items():
            log_likelihoods[c, i] = np.log((counts[c][w] + alpha) / denom)
    log_priors = np.log(np.asarray(doc_counts, dtype=np.float64) / len(docs))
    return BuiltinNB(vocabulary, log_priors, log_likelihoods, alpha, name=name)


def load_training_corpus(path: str | Path) -> list[tuple[str, int]]:
    """Read a JSONL training file with ``text`` and ``label`` fields."""
    docs = []
    for ln, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        if not raw.strip():
            continue
        obj = json.loads(raw)
        docs.append((str(obj["text"]), int(obj["label"])))
    return docs


def _validate_hello(obj: dict) -> tuple[str, tuple[str, str]]:
    if obj.get("type") != "hello":
        raise ProtocolError(f"expected hello message, got {obj.get('type')!r}")
    labels = obj.get("labels")
    if not isinstance(labels, list) or len(labels) != 2:
        n = len(labels) if isinstance(labels, list) else "no"
        raise CapabilityError(f"server advertises {n} labels, need exactly 2")
    if obj.get("version") != PROTOCOL_VERSION:
        raise ProtocolError(f"unsupported protocol version {obj.get('version')!r}")
    return str(obj.get("name", "external")), (str(labels[0]), str(labels[1]))


def _parse_probs_reply(obj: dict, request_id: int, n_texts: int) -> list[float]:
    if obj.get("type") == "error":
        raise TransportError(f"backend error: {obj.get('message')}")
    if obj.get("type") != "probs":
        raise ProtocolError(f"expected probs message, got {obj.get('type')!r}")
    if obj.get("id") != request_id:
        raise ProtocolError(f"response id {obj.get('id')} does not echo request id {request_id}")
    probs = obj.get("probs")
    if not isinstance(probs, list) or len(probs) != n_texts:
        raise ProtocolError("probs length does not match texts length")
    out = [float(p) for p in probs]
    if any(p < 0.0 or p > 1.0 for p in out):
        raise ProtocolError("probability outside [0, 1]")
    return out


class SubprocessModel(ModelHandle):
    """Client for a protocol server on a child process's stdio."""

    def __init__(
        self,
        argv: list[str],
        handshake_timeout: float = DEFAULT_HANDSHAKE_TIMEOUT,
        request_timeout: float = DEFAULT_REQUEST_TIMEOUT,
    ):
        self.backend = "subprocess"
        self._timeout = request_timeout
        self._lock = threading.Lock()
        self._next_id = 0
        try:
            self._proc = subprocess.Popen(
                argv,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                text=True,
                encoding="utf-8",
                bufsize=1,
            )
        except OSError as exc:
            raise TransportError(f"cannot start {argv[0]!r}: {exc}") from exc
        self._queue: Queue[str | None] = Queue()
        self._reader = threading.Thread(target=self._read_loop, daemon=True)
        self._reader.start()
        line = self._next_line(handshake_timeout, during_handshake=True)
        try:
            hello = json.loads(line)
        except json.JSONDecodeError as exc:
            self.close()
            raise ProtocolError(f"malformed hello line: {line!r}") from exc
        try:
            self.name, self.label_names = _validate_hello(hello)
        except Exception:
            self.close()
            raise

    def _read_loop(self):
        assert self._proc.stdout is not None
        for line in self._proc.stdout:
            self._queue.put(line)
        self._queue.put(None)

    def _next_line(self, timeout: float, during_handshake: bool = False) -> str:
        try:
            line = self._queue.get(timeout=timeout)
        except Empty:
            self.close()
            if during_handshake:
                raise StartupError(f"no hello within {timeout:.0f} s") from None
            raise TransportError(f"no reply within {timeout:.0f} s") from None
        if line is None:
            self.close()
            raise ProtocolError("server closed its output stream")
        return line

    def predict_batch(self, texts: Sequence[str]) -> list[float]:
        texts = list(texts)
        with self._lock:
            self._next_id += 1
            request_id = self._next_id
            message = json.dumps(
                {"type": "predict", "id": request_id, "texts": texts}, ensure_ascii=False
            )
            try:
                assert self._proc.stdin is not None
                self._proc.stdin.write(message + "\n")
                self._proc.stdin.flush()
            except (OSError, ValueError) as exc:
                raise TransportError(f"cannot write to backend: {exc}") from exc
            line = self._next_line(self._timeout)
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ProtocolError(f"malformed reply line: {line!r}") from exc
        return _parse_probs_reply(obj, request_id, len(texts))

    def close(self):
        proc = getattr(self, "_proc", None)
        if proc is None or proc.poll() is not None:
            return
        try:
            if proc.stdin:
                proc.stdin.close()
            proc.terminate()
            proc.wait(timeout=5)
        except Exception:
            proc.kill()


class HttpModel(ModelHandle):
    """Client for a protocol server over HTTP (GET /hello, POST /predict)."""

    def __init__(
        self,
        base_url: str,
        handshake_timeout: float = DEFAULT_HANDSHAKE_TIMEOUT,
        request_timeout: float = DEFAULT_REQUEST_TIMEOUT,
        retries: int = DEFAULT_RETRIES,
    ):
        self.backend = "http"
        if "://" not in base_url:
            base_url = "http://" + base_url
        self._base = base_url.rstrip("/")
        self._timeout = request_timeout
        self._retries = retries
        self._lock = threading.Lock()
        self._next_id = 0
        body = self._get(f"{self._base}/hello", handshake_timeout)
        try:
            hello = json.loads(body)
        except json.JSONDecodeError as exc:
            raise ProtocolError(f"malformed hello body: {body!r}") from exc
        self.name, self.label_names = _validate_hello(hello)

    def _get(self, url: str, timeout: float) -> str:
        return self._with_retries(lambda: urllib.request.urlopen(url, timeout=timeout))

    def _post(self, url: str, payload: dict, timeout: float) -> str:
        data = json.dumps(payload, ensure_ascii=False).encode("utf-8")

        def attempt():
            req = urllib.request.Request(
                url, data=data, headers={"Content-Type": "application/json"}
            )
            return urllib.request.urlopen(req, timeout=timeout)

        return self._with_retries(attempt)

    def _with_retries(self, attempt: Callable):
        last: Exception | None = None
        for _ in range(self._retries + 1):
            try:
                with attempt() as resp:
                    return resp.read().decode("utf-8")
            except (urllib.error.URLError, OSError) as exc:
                last = exc
        raise TransportError(
            f"backend unreachable after {self._retries + 1} attempts: {last}"
        ) from last

    def predict_batch(self, texts: Sequence[str]) -> list[float]:
        texts = list(texts)
        with self._lock:
            self._next_id += 1
            request_id = self._next_id
        body = self._post(
            f"{self._base}/predict",
            {"type": "predict", "id": request_id, "texts": texts},
            self._timeout,
        )
        try:
            obj = json.loads(body)
        except json.JSONDecodeError as exc:
            raise ProtocolError(f"malformed reply body: {body!r}") from exc
        return _parse_probs_reply(obj, request_id, len(texts))


def open_external(
    spec: str,
    handshake_timeout: float = DEFAULT_HANDSHAKE_TIMEOUT,
    request_timeout: float = DEFAULT_REQUEST_TIMEOUT,
    retries: int = DEFAULT_RETRIES,
) -> ModelHandle:
    """Open a model handle from a ``cmd:<argv>`` or ``http:<url>`` spec."""
    if spec.startswith("cmd:"):
        argv = shlex.split(spec[len("cmd:"):])
        if not argv:
            raise TransportError("empty command in model spec")
        return SubprocessModel(argv, handshake_timeout, request_timeout)
    if spec.startswith("http:"):
        return HttpModel(spec[len("http:"):], handshake_timeout, request_timeout, retries)
    raise ValueError(f"unrecognized external model spec {spec!r}")


def open_model(spec: str, **kwargs) -> ModelHandle:
    """Open any CLI model spec: builtin-nb:<train.jsonl> | cmd:... | http:..."""
    if spec.startswith("builtin-nb:"):
        path = Path(spec[len("builtin-nb:"):])
        docs = load_training_corpus(path)
        return train_builtin(docs, name=f"builtin-nb:{path.stem}")
    return open_external(spec, **kwargs)
