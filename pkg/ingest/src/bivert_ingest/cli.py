"""CLI: bivert-ingest backtranslate | embed | snapshot."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .backtranslate import back_translate_file
from .embed import dump_embeddings
from .manifest import IngestError
from .snapshot import ApiConfig, HttpSenseApi, fetch_graph_snapshot


def _read_lines(path) -> list[str]:
    with open(path, encoding="utf-8") as handle:
        return [line.rstrip("\n") for line in handle if line.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bivert-ingest",
                                     description="Produce bivert input files")
    sub = parser.add_subparsers(dest="command", required=True)

    p_bt = sub.add_parser("backtranslate", help="translate texts back to the source language")
    p_bt.add_argument("--model", required=True,
                      help="MT model id ('identity' or a MarianMT checkpoint)")
    p_bt.add_argument("--lang-pair", required=True, help="e.g. eng-rus")
    p_bt.add_argument("--in", dest="in_path", required=True, help="one text per line")
    p_bt.add_argument("--out", required=True)

    p_emb = sub.add_parser("embed", help="dump per-token embeddings with word maps")
    p_emb.add_argument("--encoder", default="hash:16",
                       help="hash:<dim> or hf:<model> (default hash:16)")
    p_emb.add_argument("--layer", type=int, default=-1,
                       help="hidden layer for hf encoders (default last)")
    p_emb.add_argument("--lang-pair", required=True, help="e.g. eng-rus; embeds in the source language")
    p_emb.add_argument("--src", required=True, help="source texts, one per line")
    p_emb.add_argument("--back", required=True, help="back-translations, one per line")
    p_emb.add_argument("--system", default="unknown", help="translation system tag")
    p_emb.add_argument("--scores", help="optional human scores, one float per line")
    p_emb.add_argument("--no-preprocess", action="store_true",
                       help="inputs are already preprocessed")
    p_emb.add_argument("--out", required=True)

    p_snap = sub.add_parser("snapshot", help="export a sense-graph snapshot")
    p_snap.add_argument("--lemmas", required=True, help="lemma list file, one per line")
    p_snap.add_argument("--lang", default="eng")
    p_snap.add_argument("--depth", type=int, default=2)
    p_snap.add_argument("--api-url", required=True)
    p_snap.add_argument("--api-key-env", default="BABELNET_KEY")
    p_snap.add_argument("--api-version", default="5.2")
    p_snap.add_argument("--out", required=True)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "backtranslate":
            manifest = back_translate_file(args.in_path, args.out, args.lang_pair,
                                           args.model)
        elif args.command == "embed":
            lang = args.lang_pair.split("-")[0]
            scores = None
            if args.scores:
                scores = [float(s) for s in _read_lines(args.scores)]
            manifest = dump_embeddings(
                _read_lines(args.src), _read_lines(args.back), args.encoder,
                args.out, lang=lang, system=args.system, human_scores=scores,
                layer=args.layer, apply_preprocess=not args.no_preprocess)
        else:
            config = ApiConfig(base_url=args.api_url, key_env=args.api_key_env,
                               version=args.api_version, lang=args.lang)
            manifest = fetch_graph_snapshot(_read_lines(args.lemmas), args.lang,
                                            HttpSenseApi(config), args.out,
                                            depth=args.depth,
                                            version=args.api_version)
    except (IngestError, OSError, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    sys.stderr.write(f"wrote {args.out} ({manifest.counts})\n")
    if manifest.partial:
        sys.stderr.write(f"warning: partial output; failures: {manifest.failures}\n")
    return 0


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
