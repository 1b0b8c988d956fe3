"""Operator command line: ingest, train, calibrate, eval, query, serve.

Exit codes: 0 success, 1 data error, 2 usage error. Machine-readable JSON is
the default output; --pretty switches to human-oriented text where offered.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace

from . import __version__
from .config import ServiceConfig, load_config, build_state
from .corpus import (
    chunk_document,
    parse_timestamp,
    read_corpus_jsonl,
    read_corpus_legacy,
)
from .encoder import (
    DEFAULT_DIM,
    DEFAULT_FEATURES,
    DEFAULT_SEED,
    EncoderPair,
    load_model,
    read_training_jsonl,
    save_model,
    train,
)
from .engine import answer_question, trace_to_json
from .errors import RaggateError
from .evaluation import (
    format_report_table,
    read_judgments_jsonl,
    reports_to_json,
    run_benchmark,
)
from .gate import calibrate_threshold, holdout_similarities, write_calibration_report
from .index import SimilarityMetric, VectorIndex


def _load_encoder(args) -> EncoderPair:
    if getattr(args, "model", None):
        return load_model(args.model)
    return EncoderPair.initialize(dim=args.dim, n_features=args.features, seed=args.seed)


def _add_encoder_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--model", help="path to a saved encoder model")
    parser.add_argument("--dim", type=int, default=DEFAULT_DIM,
                        help="embedding dimension when no model is given")
    parser.add_argument("--features", type=int, default=DEFAULT_FEATURES,
                        help="feature dimension when no model is given")
    parser.add_argument("--seed", type=int, default=DEFAULT_SEED,
                        help="encoder init seed when no model is given")


def cmd_ingest(args, parser) -> int:
    enc = _load_encoder(args)
    reader = read_corpus_legacy if args.legacy else read_corpus_jsonl
    ix = VectorIndex(enc.dim)
    docs = 0
    chunks = 0
    try:
        for doc in reader(args.corpus):
            batch = chunk_document(doc, args.chunk_limit)
            ix.add_chunks([(c, enc.encode_key(c.text)) for c in batch])
            docs += 1
            chunks += len(batch)
    except (ValueError, RaggateError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    ix.save(args.index)
    print(f"{docs} documents, {chunks} chunks")
    return 0


def cmd_train(args, parser) -> int:
    if args.epochs < 1:
        parser.error("--epochs must be >= 1")
    if args.lr <= 0:
        parser.error("--lr must be > 0")
    enc = EncoderPair.initialize(dim=args.dim, n_features=args.features, seed=args.init_seed)
    try:
        data = read_training_jsonl(args.data)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if not data:
        print("error: training data is empty", file=sys.stderr)
        return 1
    try:
        report = train(enc, data, epochs=args.epochs, lr=args.lr, seed=args.seed)
    except RaggateError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    save_model(enc, args.out)
    print(json.dumps({
        "epochs": report.epochs,
        "learning_rate": report.learning_rate,
        "initial_objective": report.initial_objective,
        "epoch_objectives": report.epoch_objectives,
        "examples": len(data),
        "model": args.out,
    }))
    return 0


def cmd_calibrate(args, parser) -> int:
    if not 0.0 < args.quantile < 1.0:
        parser.error("--quantile must lie in (0, 1)")
    try:
        enc = load_model(args.model)
        pairs = []
        with open(args.holdout, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                obj = json.loads(line)
                pairs.append((str(obj["query_text"]), str(obj["positive_text"])))
    except (OSError, json.JSONDecodeError, KeyError, RaggateError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    metric = SimilarityMetric.parse(args.metric)
    try:
        c = calibrate_threshold(enc, pairs, metric, args.quantile)
    except RaggateError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if args.report:
        sims = holdout_similarities(enc, pairs, metric)
        write_calibration_report(args.report, sims, args.quantile, c)
    print(json.dumps({"threshold": c, "n": len(pairs), "quantile": args.quantile,
                      "metric": metric.value}))
    return 0


def cmd_eval(args, parser) -> int:
    try:
        docs = list(read_corpus_jsonl(args.corpus))
        judgments = read_judgments_jsonl(args.judgments)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    encoders = []
    if args.model:
        encoders.append(("trained", load_model(args.model)))
    if args.with_untrained or not args.model:
        encoders.append(("untrained", EncoderPair.initialize(
            dim=args.dim, n_features=args.features, seed=args.seed)))
    metrics = [SimilarityMetric.parse(m) for m in args.metrics.split(",")]
    try:
        reports = run_benchmark(docs, judgments, encoders, metrics, k=args.k,
                                chunk_limit=args.chunk_limit)
    except RaggateError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if args.pretty:
        print(format_report_table(reports))
    else:
        print(json.dumps(reports_to_json(reports)))
    return 0


def cmd_query(args, parser) -> int:
    cfg = ServiceConfig()
    if args.config:
        cfg = load_config(args.config)
    cfg = replace(cfg, index_path=args.index or cfg.index_path,
                  model_path=args.model or cfg.model_path)
    if args.threshold is not None:
        cfg = replace(cfg, threshold=args.threshold)
    if args.fixture_dir:
        cfg = replace(cfg, web_mode="fixture", web_fixture_dir=args.fixture_dir)
    if args.search_url:
        cfg = replace(cfg, web_mode="http", web_search_url=args.search_url)
    if args.no_web:
        cfg = replace(cfg, use_web=False)
    if args.no_kb:
        cfg = replace(cfg, use_kb=False)
    if args.k is not None:
        cfg = replace(cfg, k=args.k)
    if args.j is not None:
        cfg = replace(cfg, j=args.j)
    if args.metric:
        cfg = replace(cfg, metric=args.metric)
    if cfg.use_web and cfg.web_mode == "none":
        parser.error("web search enabled but no client configured; "
                     "pass --fixture-dir/--search-url or --no-web")
    try:
        state = build_state(cfg)
        question_date = parse_timestamp(args.date) if args.date else None
        result = answer_question(state, args.question, question_date)
    except (ValueError, RaggateError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if args.pretty:
        print(result.answer)
        if result.citations_text:
            print()
            print(result.citations_text)
        trace = result.trace
        print(f"\n[gate] local_max={trace.local_max_score} web_calls={trace.web_calls} "
              f"kb_added={trace.kb_documents_added} results={trace.result_count}")
    else:
        print(json.dumps({
            "answer": result.answer,
            "citations": result.citations,
            "citations_text": result.citations_text,
            "retrieved": result.retrieved,
            "gate": trace_to_json(result.trace),
            "question_date": result.question_date.strftime("%Y-%m-%d %H:%M:%S"),
        }, ensure_ascii=False))
    return 0


def cmd_serve(args, parser) -> int:
    import uvicorn

    from .service import create_app

    try:
        cfg = load_config(args.config)
        state = build_state(cfg)
    except (ValueError, RaggateError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    app = create_app(state, cors_origin=cfg.cors_origin,
                     max_request_bytes=cfg.max_request_bytes)
    uvicorn.run(app, host=cfg.host, port=cfg.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="raggate",
                                     description="Gated hybrid retrieval QA engine")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="build an index snapshot from a corpus file")
    p.add_argument("--corpus", required=True, help="JSONL corpus (or legacy text with --legacy)")
    p.add_argument("--index", required=True, help="output index snapshot path")
    p.add_argument("--legacy", action="store_true", help="parse the ';'-separated legacy format")
    p.add_argument("--chunk-limit", type=int, default=250)
    _add_encoder_flags(p)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("train", help="train the dual encoder")
    p.add_argument("--data", required=True, help="training examples JSONL")
    p.add_argument("--epochs", type=int, default=5)
    p.add_argument("--lr", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED, help="shuffle seed")
    p.add_argument("--init-seed", type=int, default=DEFAULT_SEED, help="parameter init seed")
    p.add_argument("--dim", type=int, default=DEFAULT_DIM)
    p.add_argument("--features", type=int, default=DEFAULT_FEATURES)
    p.add_argument("--out", required=True, help="output model path")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("calibrate", help="calibrate the gate threshold on a holdout set")
    p.add_argument("--holdout", required=True,
                   help="JSONL of {query_text, positive_text} pairs")
    p.add_argument("--model", required=True)
    p.add_argument("--quantile", type=float, default=0.01)
    p.add_argument("--metric", default="cosine")
    p.add_argument("--report", help="write the calibration report JSON here")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("eval", help="run the retrieval benchmark")
    p.add_argument("--corpus", required=True)
    p.add_argument("--judgments", required=True)
    p.add_argument("--metrics", default="cosine", help="comma-separated metric names")
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--chunk-limit", type=int, default=250)
    p.add_argument("--with-untrained", action="store_true",
                   help="also score a fresh untrained encoder")
    p.add_argument("--pretty", action="store_true")
    _add_encoder_flags(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("query", help="answer one question through the pipeline")
    p.add_argument("question")
    p.add_argument("--config", help="service config file (.toml or .json)")
    p.add_argument("--index", help="index snapshot path")
    p.add_argument("--model", help="encoder model path")
    p.add_argument("--threshold", type=float)
    p.add_argument("--fixture-dir", help="use the fixture web client from this directory")
    p.add_argument("--search-url", help="use the HTTP web client against this endpoint")
    p.add_argument("--no-web", action="store_true")
    p.add_argument("--no-kb", action="store_true")
    p.add_argument("--k", type=int)
    p.add_argument("--j", type=int)
    p.add_argument("--metric")
    p.add_argument("--date", help="question date, 'YYYY-MM-DD HH:MM:SS'")
    p.add_argument("--pretty", action="store_true")
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args, parser)


if __name__ == "__main__":
    sys.exit(main())
