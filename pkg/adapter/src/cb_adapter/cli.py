"""`contour-bench-extract`: dump model activations over a stimulus tree."""

from __future__ import annotations

import argparse
import sys

from .extract import ExtractionJob, extract, manifest_labels


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="contour-bench-extract",
        description="Emit penultimate activations (and logits, when the "
                    "model has a 1000-class head) as ACTF files")
    parser.add_argument("command", choices=["extract"])
    parser.add_argument("--model", required=True,
                        help="torchvision model name, e.g. resnet18")
    parser.add_argument("--in", dest="input_dir", required=True)
    parser.add_argument("--out", dest="output_prefix", required=True)
    parser.add_argument("--layer", default="penultimate",
                        help="'penultimate' or a named module")
    parser.add_argument("--batch", type=int, default=16)
    parser.add_argument("--weights", default=None,
                        help="weights tag, e.g. IMAGENET1K_V1 (default: none)")
    parser.add_argument("--device", default="cpu")
    parser.add_argument("--manifest", default=None,
                        help="dataset manifest.json for category labels")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    labels_for = manifest_labels(args.manifest) if args.manifest else None
    job = ExtractionJob(model=args.model, input_dir=args.input_dir,
                        output_prefix=args.output_prefix, layer=args.layer,
                        batch_size=args.batch, weights=args.weights,
                        device=args.device)
    try:
        summary = extract(job, labels_for=labels_for)
    except ValueError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    print(f"rows={summary['rows']} cols={summary['cols']} "
          f"features={summary['features']} logits={summary['logits']}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
