"""Message encoding for the wire protocol.

Probabilities are serialized with exactly six decimal places so golden
transcripts are byte-stable.
"""

from __future__ import annotations

import json

PROTOCOL_VERSION = 1


def hello_message(name: str, labels: tuple[str, str]) -> str:
    return json.dumps(
        {"type": "hello", "name": name, "labels": list(labels), "version": PROTOCOL_VERSION},
        ensure_ascii=False,
    )


def probs_message(request_id, probs) -> str:
    body = "[" + ", ".join(f"{p:.6f}" for p in probs) + "]"
    return f'{{"type": "probs", "id": {json.dumps(request_id)}, "probs": {body}}}'


def error_message(request_id, message: str) -> str:
    return json.dumps(
        {"type": "error", "id": request_id, "message": message}, ensure_ascii=False
    )


def parse_predict_request(line: str):
    """Returns (request_id, texts); raises ValueError on malformed input."""
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ValueError(f"invalid JSON: {exc}") from exc
    if not isinstance(obj, dict) or obj.get("type") != "predict":
        raise ValueError(f"expected a predict message, got {obj!r}"
                         if not isinstance(obj, dict) else
                         f"expected type 'predict', got {obj.get('type')!r}")
    texts = obj.get("texts")
    if not isinstance(texts, list) or not all(isinstance(t, str) for t in texts):
        raise ValueError("'texts' must be a list of strings")
    return obj.get("id"), texts


def request_id_of(line: str):
    """Best-effort id extraction for error replies to malformed requests."""
    try:
        obj = json.loads(line)
        return obj.get("id") if isinstance(obj, dict) else None
    except json.JSONDecodeError:
        return None
