"""CLI: rationeval-server serve --backend nb:train.jsonl [--http PORT]."""

from __future__ import annotations

import argparse
import sys

from .backends import ServerConfig, open_backend
from .http_server import serve_http
from .stdio_server import serve_stdio


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rationeval-server")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("serve", help="serve a sentiment model over the wire protocol")
    p.add_argument("--backend", required=True,
                   help="nb:<train.jsonl> | hf:<model-id>")
    p.add_argument("--http", type=int, default=None, metavar="PORT",
                   help="serve over HTTP instead of stdio")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--max-batch", type=int, default=256)
    p.add_argument("--device", default="cpu")
    p.add_argument("--labels", default="negative:positive",
                   help="NEG:POS label names to advertise / map")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    neg, _, pos = args.labels.partition(":")
    if not neg or not pos:
        print("error: --labels must be NEG:POS", file=sys.stderr)
        return 1
    config = ServerConfig(
        backend=args.backend,
        device=args.device,
        max_batch=args.max_batch,
        label_names=(neg, pos),
    )
    try:
        backend = open_backend(args.backend, device=args.device,
                               label_names=config.label_names)
    except Exception as exc:
        print(f"error: cannot open backend: {exc}", file=sys.stderr)
        return 1
    try:
        if args.http is not None:
            serve_http(backend, config, args.http, args.host)
        else:
            serve_stdio(backend, config)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except KeyboardInterrupt:
        pass
    return 0


if __name__ == "__main__":
    sys.exit(main())
