"""emb-export command line: encode a corpus file into an EMB1 embedding file."""

from __future__ import annotations

import argparse
import sys

from .encoders import DEFAULT_ENCODER, EncoderLoadError
from .exporter import ExportError, ExportJob, export


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="emb-export",
        description="Encode each text of a corpus to a fixed-dim vector and write an EMB1 file.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("export", help="run one export job")
    p.add_argument("--input", required=True, help="corpus file (JSONL or CSV with a text column)")
    p.add_argument("--format", choices=["jsonl", "csv"], default="jsonl")
    p.add_argument("--output", required=True, help="EMB1 output path")
    p.add_argument(
        "--encoder",
        default=DEFAULT_ENCODER,
        help="encoder name: use, use-large, sbert:<model>, hash-trigram[:<dim>]",
    )
    p.add_argument("--batch-size", type=int, default=64)
    p.add_argument("--expect-dim", type=int, help="fail unless the encoder emits this dimension")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    job = ExportJob(
        input_path=args.input,
        output_path=args.output,
        format=args.format,
        encoder=args.encoder,
        batch_size=args.batch_size,
        expect_dim=args.expect_dim,
    )
    try:
        sidecar = export(job)
    except (ExportError, EncoderLoadError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(
        f"wrote {sidecar['rows']} x {sidecar['dim']} embeddings "
        f"({sidecar['encoder']}) to {args.output}"
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
