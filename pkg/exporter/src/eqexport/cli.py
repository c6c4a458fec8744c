"""One-shot command: corpus file in, interchange file + manifest out."""

from __future__ import annotations

import argparse
import sys

from .export import LAYER_POLICIES, ExportError, ModelError, export_embeddings


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="eqcluster-export",
        description="Run a pretrained language model over a corpus and write "
        "token-level embeddings in the eqcluster interchange format.",
    )
    parser.add_argument("--corpus", required=True, help="corpus JSON file")
    parser.add_argument("--model", required=True,
                        help="model name or local path (anything AutoModel loads)")
    parser.add_argument("--layers", choices=LAYER_POLICIES, default="last",
                        help="hidden-state policy: last layer, or mean of all "
                        "layers including the embedding layer (default: last)")
    parser.add_argument("--out", required=True, help="interchange output path")
    parser.add_argument("--max-length", type=int,
                        help="cap the per-chunk sequence length below the model's limit")
    parser.add_argument("--manifest",
                        help="manifest path (default: <out>.manifest.json)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        manifest = export_embeddings(
            corpus_path=args.corpus,
            model_name=args.model,
            out_path=args.out,
            layer_policy=args.layers,
            max_length=args.max_length,
            manifest_path=args.manifest,
        )
    except ExportError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ModelError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    print(f"wrote {args.out} ({len(manifest.documents)} docs, dim {manifest.dim}, "
          f"{len(manifest.skipped)} skipped)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
