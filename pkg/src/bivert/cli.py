"""Command-line surface: score, train, align, sense-path, importances.

Exit codes: 0 success, 2 missing resources or usage errors, 3 parse/schema
errors in input files, 4 training records without human scores, 5 unknown
record id or lemma.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

from .boosting import (FEATURE_NAMES, Hyperparams, feature_importances, load_model,
                       predict, save_model, train_gbr, train_linear)
from .corpus import load_dataset
from .errors import BivertError, ParseError, SchemaError
from .relations import LexiconBundle, bundled_lexicons
from .scoring import (ScoredRecord, normalize_labels_with_bounds, sentence_features,
                      system_level_report)
from .sense_graph import (RELATION_TYPES, SenseScorer, SenseSearchConfig,
                          load_sense_graph, path_score, senses_of,
                          shortest_sense_path)
from .word_align import align_words, render_pairing

EXIT_OK = 0
EXIT_MISSING_RESOURCE = 2
EXIT_PARSE = 3
EXIT_MISSING_LABELS = 4
EXIT_UNKNOWN_KEY = 5

CACHE_DIR_ENV = "BIVERT_CACHE_DIR"


@dataclass
class RunConfig:
    """One run's resources and knobs; round-trips through JSON."""

    dataset: str | None = None
    graph: str | None = None
    lexicons: str | None = None
    model: str | None = None
    lang_pair: str | None = None
    max_depth: int = 7
    relations: tuple[str, ...] = ("hypernym",)
    mode: str = "gbr"
    seed: int = 0
    jobs: int | None = None
    n_estimators: int = 100
    tree_depth: int = 6
    learning_rate: float = 0.1
    min_samples_leaf: int = 5
    out: str | None = None
    report: str | None = None
    exclude_system: str | None = None

    def to_json(self) -> str:
        obj = asdict(self)
        obj["relations"] = list(self.relations)
        return json.dumps(obj, sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        obj = json.loads(text)
        known = {f.name for f in fields(cls)}
        unknown = set(obj) - known
        if unknown:
            raise SchemaError(f"unknown config keys: {sorted(unknown)}")
        if "relations" in obj:
            obj["relations"] = tuple(obj["relations"])
        return cls(**obj)

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        return cls.from_json(Path(path).read_text("utf-8"))


def _apply_flags(config: RunConfig, args: argparse.Namespace) -> RunConfig:
    overrides = {}
    for f in fields(RunConfig):
        value = getattr(args, f.name, None)
        if value is not None:
            overrides[f.name] = value
    return replace(config, **overrides)


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    config = RunConfig.from_file(args.config) if getattr(args, "config", None) else RunConfig()
    return _apply_flags(config, args)


def _check_paths(config: RunConfig, names) -> str | None:
    for name in names:
        value = getattr(config, name)
        if value is None:
            return f"--{name.replace('_', '-')} is required"
        if not Path(value).exists():
            return f"{name} path does not exist: {value}"
    return None


def _lexicons(config: RunConfig) -> LexiconBundle:
    if config.lexicons:
        return LexiconBundle.from_dir(config.lexicons)
    return bundled_lexicons()


def _sense_config(config: RunConfig) -> SenseSearchConfig:
    return SenseSearchConfig(max_depth=config.max_depth,
                             allowed_relations=frozenset(config.relations))


def _log_manifest(dataset_path: str) -> None:
    manifest = Path(str(dataset_path) + ".manifest.json")
    if manifest.exists():
        sys.stderr.write(f"manifest {manifest}: {manifest.read_text('utf-8').strip()}\n")


def _sense_scorer(config: RunConfig, store, lexicon, lang: str) -> SenseScorer:
    cache_path = None
    cache_dir = os.environ.get(CACHE_DIR_ENV)
    if cache_dir:
        digest = hashlib.sha256(Path(config.graph).read_bytes()).hexdigest()[:12]
        relations = "-".join(sorted(config.relations))
        cache_path = Path(cache_dir) / f"sense-{lang}-{digest}-d{config.max_depth}-{relations}.json"
    return SenseScorer(store, lexicon, lang, _sense_config(config), cache_path=cache_path)


def _write_text(path: str | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)


def _compute_features(config: RunConfig, records, lexicon, scorer):
    jobs = config.jobs or os.cpu_count() or 1
    if jobs <= 1 or len(records) <= 1:
        return [sentence_features(r, lexicon, scorer) for r in records]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(lambda r: sentence_features(r, lexicon, scorer), records))


def cmd_score(config: RunConfig) -> int:
    problem = _check_paths(config, ("dataset", "graph", "model"))
    if problem:
        sys.stderr.write(problem + "\n")
        return EXIT_MISSING_RESOURCE
    try:
        records = load_dataset(config.dataset)
        model = load_model(config.model)
        store = load_sense_graph(config.graph)
        lexicon = _lexicons(config)
    except (ParseError, SchemaError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_PARSE
    _log_manifest(config.dataset)
    if not records:
        _write_text(config.out, "")
        return EXIT_OK
    lang = records[0].source.lang
    scorer = _sense_scorer(config, store, lexicon, lang)
    features = _compute_features(config, records, lexicon, scorer)
    scored = [
        ScoredRecord(id=r.id, system=r.system, human_score=r.human_score,
                     predicted=predict(model, fv))
        for r, fv in zip(records, features)
    ]
    scorer.save_cache()
    lines = "".join(f"{s.id}\t{s.predicted:.6f}\n" for s in scored)
    _write_text(config.out, lines)
    if all(s.human_score is not None for s in scored):
        report = system_level_report(scored, exclude_system=config.exclude_system)
        _write_text(config.report, report.render())
    else:
        sys.stderr.write("report skipped: some records have no human score\n")
    return EXIT_OK


def cmd_train(config: RunConfig) -> int:
    problem = _check_paths(config, ("dataset", "graph"))
    if problem is None and config.model is None:
        problem = "--model output path is required"
    if problem:
        sys.stderr.write(problem + "\n")
        return EXIT_MISSING_RESOURCE
    try:
        records = load_dataset(config.dataset)
        store = load_sense_graph(config.graph)
        lexicon = _lexicons(config)
    except (ParseError, SchemaError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_PARSE
    _log_manifest(config.dataset)
    missing = [r.id for r in records if r.human_score is None]
    if missing or not records:
        sys.stderr.write(f"records without human_score: {missing or 'empty dataset'}\n")
        return EXIT_MISSING_LABELS
    lang = records[0].source.lang
    scorer = _sense_scorer(config, store, lexicon, lang)
    features = _compute_features(config, records, lexicon, scorer)
    scorer.save_cache()
    labels, bounds = normalize_labels_with_bounds([r.human_score for r in records])
    meta = {"label_bounds": list(bounds), "lang_pair": config.lang_pair,
            "label_normalization": "clamp-negative-then-minmax"}
    matrix = [fv.as_array() for fv in features]
    if config.mode == "linear":
        model = train_linear(matrix, labels, train_meta=meta)
    else:
        hp = Hyperparams(n_estimators=config.n_estimators, max_depth=config.tree_depth,
                         learning_rate=config.learning_rate, seed=config.seed,
                         min_samples_leaf=config.min_samples_leaf)
        model = train_gbr(matrix, labels, hp, train_meta=meta)
    save_model(model, config.model)
    importances = feature_importances(model)
    summary = "".join(f"{name}\t{value:.3f}\n"
                      for name, value in zip(FEATURE_NAMES, importances))
    sys.stdout.write(summary)
    return EXIT_OK


def cmd_align(config: RunConfig, record_id: str) -> int:
    problem = _check_paths(config, ("dataset",))
    if problem:
        sys.stderr.write(problem + "\n")
        return EXIT_MISSING_RESOURCE
    try:
        records = load_dataset(config.dataset)
    except (ParseError, SchemaError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_PARSE
    record = next((r for r in records if r.id == record_id), None)
    if record is None:
        sys.stderr.write(f"unknown record id: {record_id}\n")
        return EXIT_UNKNOWN_KEY
    pairing = align_words(record.source, record.back, record.source_emb, record.back_emb)
    sys.stdout.write(render_pairing(record.source, record.back, pairing) + "\n")
    return EXIT_OK


def cmd_sense_path(config: RunConfig, lemma_x: str, lemma_y: str) -> int:
    problem = _check_paths(config, ("graph",))
    if problem:
        sys.stderr.write(problem + "\n")
        return EXIT_MISSING_RESOURCE
    try:
        store = load_sense_graph(config.graph)
    except (ParseError, SchemaError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_PARSE
    lang = (config.lang_pair or "eng-eng").split("-")[0]
    known_x = any(senses_of(lemma_x, lang, pos, store) for pos in ("noun", "verb"))
    known_y = any(senses_of(lemma_y, lang, pos, store) for pos in ("noun", "verb"))
    if not known_x or not known_y:
        unknown = lemma_x if not known_x else lemma_y
        sys.stderr.write(f"unknown lemma: {unknown}\n")
        return EXIT_UNKNOWN_KEY
    sense_config = _sense_config(config)
    for pos in ("noun", "verb"):
        result = shortest_sense_path(lemma_x, lemma_y, lang, store, sense_config, pos=pos)
        if result.found:
            for edge in result.edges:
                sys.stdout.write(f"{edge.source}\t{edge.relation}\t{edge.target}"
                                 f"\tdepth={edge.depth}\tweight={edge.weight:.6f}\n")
            sys.stdout.write(f"TOTAL\t{result.total_weight:.6f}\n")
            sys.stdout.write(f"SCORE\t{path_score(result):.6f}\n")
            return EXIT_OK
    sys.stdout.write("NO PATH\n")
    return EXIT_OK


def cmd_importances(config: RunConfig) -> int:
    problem = _check_paths(config, ("model",))
    if problem:
        sys.stderr.write(problem + "\n")
        return EXIT_MISSING_RESOURCE
    try:
        model = load_model(config.model)
    except (ParseError, SchemaError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_PARSE
    for name, value in zip(model.feature_names, feature_importances(model)):
        sys.stdout.write(f"{name}\t{value:.3f}\n")
    return EXIT_OK


def _add_common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON config file; flags override its values")
    parser.add_argument("--dataset", help="line-delimited dataset file")
    parser.add_argument("--graph", help="sense graph snapshot file")
    parser.add_argument("--lexicons", help="lexicon directory (default: bundled)")
    parser.add_argument("--model", help="model file (input for score, output for train)")
    parser.add_argument("--lang-pair", dest="lang_pair", help="e.g. eng-deu")
    parser.add_argument("--max-depth", dest="max_depth", type=int,
                        help="sense graph search depth (default 7)")
    parser.add_argument("--relations", type=lambda s: tuple(s.split(",")),
                        help="comma-separated relation types (default hypernym)")
    parser.add_argument("--mode", choices=("gbr", "linear"), help="model kind (default gbr)")
    parser.add_argument("--seed", type=int, help="seed recorded with trained models")
    parser.add_argument("--jobs", type=int, help="parallel sentence workers")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bivert",
                                     description="Reference-free translation quality scoring")
    sub = parser.add_subparsers(dest="command", required=True)

    p_score = sub.add_parser("score", help="score a dataset with a trained model")
    _add_common_flags(p_score)
    p_score.add_argument("--out", help="write per-sentence scores here (default stdout)")
    p_score.add_argument("--report", help="write the system-level report here")
    p_score.add_argument("--exclude-system", dest="exclude_system",
                         help="drop one system from the report correlation")

    p_train = sub.add_parser("train", help="train a model on labeled records")
    _add_common_flags(p_train)
    p_train.add_argument("--estimators", dest="n_estimators", type=int,
                         help="boosting stages (default 100)")
    p_train.add_argument("--tree-depth", dest="tree_depth", type=int,
                         help="regression tree depth (default 6)")
    p_train.add_argument("--learning-rate", dest="learning_rate", type=float,
                         help="shrinkage (default 0.1)")
    p_train.add_argument("--min-samples-leaf", dest="min_samples_leaf", type=int,
                         help="minimum samples per leaf (default 5)")

    p_align = sub.add_parser("align", help="print the word alignment of one record")
    _add_common_flags(p_align)
    p_align.add_argument("record_id")

    p_path = sub.add_parser("sense-path", help="print the sense path between two lemmas")
    _add_common_flags(p_path)
    p_path.add_argument("lemma_x")
    p_path.add_argument("lemma_y")

    p_imp = sub.add_parser("importances", help="print a model's feature importances")
    _add_common_flags(p_imp)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = _config_from_args(args)
    except (OSError, json.JSONDecodeError, SchemaError) as exc:
        sys.stderr.write(f"bad config: {exc}\n")
        return EXIT_MISSING_RESOURCE
    try:
        if args.command == "score":
            return cmd_score(config)
        if args.command == "train":
            return cmd_train(config)
        if args.command == "align":
            return cmd_align(config, args.record_id)
        if args.command == "sense-path":
            return cmd_sense_path(config, args.lemma_x, args.lemma_y)
        if args.command == "importances":
            return cmd_importances(config)
    except BivertError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_PARSE
    raise AssertionError(f"unhandled command {args.command}")


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
