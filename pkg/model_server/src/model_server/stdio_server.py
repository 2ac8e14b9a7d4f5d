"""Serve the protocol on stdin/stdout, strictly sequentially."""

from __future__ import annotations

import sys

from .backends import ServerConfig
from .protocol import (
    error_message,
    hello_message,
    parse_predict_request,
    probs_message,
    request_id_of,
)


def serve_stdio(backend, config: ServerConfig, stdin=None, stdout=None) -> None:
    """Hello first, then answer until EOF; errors stay in-band."""
    stdin = stdin if stdin is not None else sys.stdin
    stdout = stdout if stdout is not None else sys.stdout

    def emit(line: str) -> None:
        stdout.write(line + "\n")
        stdout.flush()

    emit(hello_message(getattr(backend, "name", "model"), config.label_names))
    for line in stdin:
        if not line.strip():
            continue
        try:
            request_id, texts = parse_predict_request(line)
        except ValueError as exc:
            emit(error_message(request_id_of(line), str(exc)))
            continue
        if len(texts) > config.max_batch:
            emit(error_message(
                request_id, f"batch of {len(texts)} exceeds max batch {config.max_batch}"
            ))
            continue
        try:
            probs = backend.predict_batch(texts)
        except Exception as exc:  # backend failure must not kill the loop
            emit(error_message(request_id, f"backend error: {exc}"))
            continue
        emit(probs_message(request_id, probs))
