"""Serve the protocol over HTTP: GET /hello, POST /predict.

Request and response bodies are exactly the stdio messages.  Prediction
calls are serialized behind a lock, so any backend is safe to share.
"""

from __future__ import annotations

import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from .backends import ServerConfig
from .protocol import (
    error_message,
    hello_message,
    parse_predict_request,
    probs_message,
    request_id_of,
)


def make_server(backend, config: ServerConfig, port: int, host: str = "127.0.0.1"):
    """Bind and return the HTTP server; raises OSError if the port is busy."""
    lock = threading.Lock()
    hello = hello_message(getattr(backend, "name", "model"), config.label_names)

    class Handler(BaseHTTPRequestHandler):
        def log_message(self, *args):
            pass

        def _send(self, body: str, status: int = 200):
            payload = body.encode("utf-8")
            self.send_response(status)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(payload)))
            self.end_headers()
            self.wfile.write(payload)

        def do_GET(self):
            if self.path.rstrip("/") in ("", "/hello"):
                self._send(hello)
            else:
                self._send(error_message(None, f"unknown path {self.path}"), status=404)

        def do_POST(self):
            if self.path.rstrip("/") != "/predict":
                self._send(error_message(None, f"unknown path {self.path}"), status=404)
                return
            length = int(self.headers.get("Content-Length", 0))
            line = self.rfile.read(length).decode("utf-8")
            try:
                request_id, texts = parse_predict_request(line)
            except ValueError as exc:
                self._send(error_message(request_id_of(line), str(exc)))
                return
            if len(texts) > config.max_batch:
                self._send(error_message(
                    request_id,
                    f"batch of {len(texts)} exceeds max batch {config.max_batch}",
                ))
                return
            try:
                with lock:
                    probs = backend.predict_batch(texts)
            except Exception as exc:
                self._send(error_message(request_id, f"backend error: {exc}"))
                return
            self._send(probs_message(request_id, probs))

    return ThreadingHTTPServer((host, port), Handler)


def serve_http(backend, config: ServerConfig, port: int, host: str = "127.0.0.1") -> None:
    server = make_server(backend, config, port, host)
    try:
        server.serve_forever()
    finally:
        server.server_close()
