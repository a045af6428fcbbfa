"""Command-line entry points: serve, finetune, make-tiny."""

from __future__ import annotations

import argparse
import logging


def main(argv: list[str] | None = None) -> None:
    parser = argparse.ArgumentParser(prog="scorer-service")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("serve", help="run the HTTP inference service")
    p.add_argument("--model", required=True, help="checkpoint dir or model id")
    p.add_argument("--pooling", choices=["mean", "cls"], default="mean")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8400)

    p = sub.add_parser("finetune", help="fine-tune the cross-encoder head")
    p.add_argument("--pairs", required=True,
                   help="JSONL of {query, text, label} records")
    p.add_argument("--model", required=True, help="base checkpoint dir or id")
    p.add_argument("--out", required=True, help="output checkpoint dir")
    p.add_argument("--epochs", type=int, default=10)
    p.add_argument("--batch-size", type=int, default=4)
    p.add_argument("--lr", type=float, default=2e-5)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("make-tiny", help="write a small offline test bundle")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)

    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")

    if args.command == "serve":
        import uvicorn

        from .app import create_app
        uvicorn.run(create_app(model_path=args.model, pooling=args.pooling),
                    host=args.host, port=args.port)
    elif args.command == "finetune":
        from .finetune import TrainConfig, finetune
        config = TrainConfig(epochs=args.epochs, batch_size=args.batch_size,
                             learning_rate=args.lr, seed=args.seed)
        out = finetune(args.pairs, args.model, args.out, config)
        print(f"checkpoint saved to {out}")
    elif args.command == "make-tiny":
        from .tiny import create_tiny_bundle
        out = create_tiny_bundle(args.out, seed=args.seed)
        print(f"tiny bundle written to {out}")


if __name__ == "__main__":
    main()
