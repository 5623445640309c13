"""export-embeddings: write vector files for a corpus.

Exit codes: 0 ok, 1 export error, 2 usage, 3 missing input file.
"""

from __future__ import annotations

import argparse
import sys

from .corpus import CorpusError, alphabet, load_corpus, vocabulary
from .export import export_chars, export_contextual, export_static

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_USAGE = 2
EXIT_MISSING_FILE = 3


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="export-embeddings",
        description="Materialize static, character and contextual vectors "
                    "into the coreference engine's file formats")
    p.add_argument("--corpus", required=True, help="corpus JSON-lines file")
    p.add_argument("--static-out", help="static word-vector file to write")
    p.add_argument("--static-source",
                   help="source word-vector file (required with --static-out)")
    p.add_argument("--ctx-out", help="contextual binary file to write")
    p.add_argument("--ctx-model", default="hash3-1024",
                   help="contextual model id (default: hash3-1024)")
    p.add_argument("--chars-out", help="character vector file to write")
    p.add_argument("--char-dim", type=int, default=300)
    p.add_argument("--seed", type=int, default=0)
    return p


def run(args) -> int:
    if not any((args.static_out, args.ctx_out, args.chars_out)):
        print("error: nothing to export (pass --static-out, --ctx-out "
              "and/or --chars-out)", file=sys.stderr)
        return EXIT_USAGE
    if args.static_out and not args.static_source:
        print("error: --static-out requires --static-source", file=sys.stderr)
        return EXIT_USAGE
    docs = load_corpus(args.corpus)
    if args.static_out:
        n = export_static(vocabulary(docs), args.static_source, args.static_out)
        print(f"static: {n} words -> {args.static_out}")
    if args.ctx_out:
        records = export_contextual(docs, args.ctx_model, args.ctx_out)
        print(f"contextual: {len(records)} tokens ({args.ctx_model}) "
              f"-> {args.ctx_out}")
    if args.chars_out:
        table = export_chars(alphabet(docs), args.char_dim, args.chars_out,
                             seed=args.seed)
        print(f"characters: {len(table)} chars -> {args.chars_out}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return run(args)
    except FileNotFoundError as exc:
        print(f"error: missing file: {exc.filename or exc}", file=sys.stderr)
        return EXIT_MISSING_FILE
    except (CorpusError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
