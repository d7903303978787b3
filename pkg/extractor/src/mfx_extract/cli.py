"""mfx-extract: embed material frame pairs into an MFX feature file."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .backends import available_backends, get_backend
from .extract import ExtractJob
from .preprocess import AugmentationPolicy


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mfx-extract", description=__doc__)
    parser.add_argument("--frames", required=True, help="root directory the pair paths resolve against")
    parser.add_argument("--pairs", required=True, help="CSV: material_id,non_specular,near_specular[,frame_non,frame_near]")
    parser.add_argument("--augment", help="augmentation policy JSON (omit for canonical only)")
    parser.add_argument("-o", "--output", required=True, help="MFX manifest path (blob at <path>.bin)")
    parser.add_argument("--backend", default="vitb32", choices=available_backends())
    parser.add_argument("--model-ref", default="openai/clip-vit-base-patch32",
                        help="weights directory or hub id for the vitb32 backend")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        pairs = ExtractJob.read_pairs_csv(args.pairs, frames_root=args.frames)
        policy = AugmentationPolicy.from_json(args.augment) if args.augment else AugmentationPolicy()
        if args.backend == "vitb32":
            backend = get_backend("vitb32", model_ref=args.model_ref)
        else:
            backend = get_backend(args.backend)
        from .extract import run_extract

        summary = run_extract(ExtractJob(pairs=pairs, output=Path(args.output), policy=policy), backend)
    except RuntimeError as exc:
        print(f"missing dependency: {exc}", file=sys.stderr)
        return 3
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(
        f"embedded {summary['materials']} materials ({summary['rows']} rows, "
        f"{summary['failures']} failures) -> {summary['output']}"
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
