"""Command line for the exporter: pickled sklearn model in, JSON out."""

from __future__ import annotations

import argparse
import pickle
import sys

from .exporter import ExportError, export_ensemble, export_iforest


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="export")
    parser.add_argument("--model", required=True,
                        help="path to a pickled fitted sklearn model")
    parser.add_argument("--out", required=True, help="output JSON path")
    parser.add_argument("--iforest", action="store_true",
                        help="treat the model as an isolation forest")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        with open(args.model, "rb") as f:
            model = pickle.load(f)
        if args.iforest:
            manifest = export_iforest(model, args.out)
        else:
            manifest = export_ensemble(model, args.out)
    except (ExportError, OSError, pickle.UnpicklingError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"exported {manifest.tree_count} trees "
          f"({manifest.source_kind}, depth <= {manifest.depth_bound}) "
          f"-> {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
