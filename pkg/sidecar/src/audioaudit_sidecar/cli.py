"""CLI: extract AEMB embeddings from a dataset manifest."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .audio import AudioLoadError
from .encoders import EncoderError
from .extract import ExtractionError, ExtractionJob, extract
from .segmentation import DEFAULT_HOP_S, DEFAULT_SEGMENT_S


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="audio-audit-extract",
        description="Encode a WAV dataset into AEMB v1 segment embeddings.",
    )
    parser.add_argument("--manifest", required=True, help="dataset manifest JSON")
    parser.add_argument("--dataset-root", default=None,
                        help="directory audio paths resolve against "
                             "(default: the manifest's directory)")
    parser.add_argument("--encoder", required=True,
                        help="mel_stats, torchscript, or a research encoder name")
    parser.add_argument("--checkpoint", default=None, help="encoder checkpoint path")
    parser.add_argument("--segment-s", type=float, default=DEFAULT_SEGMENT_S)
    parser.add_argument("--hop-s", type=float, default=DEFAULT_HOP_S)
    parser.add_argument("--out", required=True,
                        help="output path prefix; writes <out>.aemb and <out>.json")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    manifest_path = Path(args.manifest)
    job = ExtractionJob(
        dataset_dir=Path(args.dataset_root) if args.dataset_root else manifest_path.parent,
        manifest_path=manifest_path,
        encoder=args.encoder,
        checkpoint=Path(args.checkpoint) if args.checkpoint else None,
        out_prefix=Path(args.out),
        segment_s=args.segment_s,
        hop_s=args.hop_s,
    )
    try:
        meta, binary = extract(job)
    except (EncoderError, ExtractionError, AudioLoadError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {binary} and {meta}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
