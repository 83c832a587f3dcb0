"""Command-line entry points for the whole experiment flow."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .annotation import AnnotationServer, AnnotationStore, build_tasks, load_tasks, save_tasks
from .corpus import read_timed
from .evaluation import bleu, change_stats, contrastive_accuracy, read_suite
from .pipeline import (
    ExperimentConfig,
    build_pools,
    toy_experiment_config,
    docrepair_scorer,
    evaluate_experiment,
    load_mt,
    load_repair,
    load_tokenizers,
    repair_documents,
    run_experiment,
    sentence_mt_scorer,
    train_docrepair,
    train_sentence_mt,
    train_tokenizers,
    translate_sentences,
)
from .toy import ToySizes, make_toy_corpus


def _parse_value(raw: str):
    try:
        return json.loads(raw)
    except json.JSONDecodeError:
        return raw


def _load_config(args) -> ExperimentConfig:
    if not args.config:
        raise SystemExit("--config is required for this command")
    cfg = ExperimentConfig.load(args.config)
    for override in args.set or []:
        if "=" not in override:
            raise SystemExit(f"bad override {override!r}, expected key=value")
        key, _, raw = override.partition("=")
        cfg = cfg.override(key, _parse_value(raw))
    if args.seed is not None:
        cfg = cfg.override("seed", args.seed)
    return cfg


def _write_groups(groups, path):
    with open(path, "w", encoding="utf-8") as f:
        for i, group in enumerate(groups):
            if i:
                f.write("\n")
            for sentence in group:
                f.write(sentence + "\n")


def _read_groups(path):
    groups, current = [], []
    with open(path, encoding="utf-8") as f:
        for line in f:
            line = line.rstrip("\n")
            if not line:
                if current:
                    groups.append(current)
                    current = []
            else:
                current.append(line)
    if current:
        groups.append(current)
    return groups


def cmd_make_toy(args):
    sizes = ToySizes()
    if args.quick:
        sizes = ToySizes(
            train_docs=60,
            dev_docs=8,
            test_docs=12,
            mono_docs=80,
            suite_dev_per_cell=2,
            suite_test_per_cell=5,
        )
    out = Path(args.out)
    seed = args.seed if args.seed is not None else 0
    make_toy_corpus(seed, sizes, out / "data")
    cfg = toy_experiment_config(out / "work", out / "data", seed=seed, quick=args.quick)
    cfg.save(out / "config.json")
    print(f"toy corpus and config written under {out}")


def cmd_tokenize(args):
    cfg = _load_config(args)
    src_tok, tgt_tok = train_tokenizers(cfg)
    print(f"source vocabulary: {len(src_tok.vocab)} tokens")
    print(f"target vocabulary: {len(tgt_tok.vocab)} tokens")


def cmd_train_mt(args):
    cfg = _load_config(args)
    ckpt = train_sentence_mt(cfg, args.direction)
    print(f"trained mt_{args.direction} to step {ckpt.training_step}")


def cmd_build_pools(args):
    cfg = _load_config(args)
    pool = build_pools(cfg)
    print(f"pool entries: {len(pool)} sentences x {pool.n} samples")


def cmd_train_docrepair(args):
    cfg = _load_config(args)
    ckpt = train_docrepair(cfg)
    print(f"trained repair model to step {ckpt.training_step}")


def cmd_translate(args):
    cfg = _load_config(args)
    src_tok, tgt_tok = load_tokenizers(cfg)
    ckpt = load_mt(cfg, args.direction)
    tok_in, tok_out = (src_tok, tgt_tok) if args.direction == "fwd" else (tgt_tok, src_tok)
    with open(args.input, encoding="utf-8") as f:
        sentences = [line.strip() for line in f if line.strip()]
    translations = translate_sentences(sentences, ckpt, tok_in, tok_out, cfg.beam_size)
    out = open(args.output, "w", encoding="utf-8") if args.output else sys.stdout
    for t in translations:
        out.write(t + "\n")
    if args.output:
        out.close()


def cmd_repair(args):
    cfg = _load_config(args)
    src_tok, tgt_tok = load_tokenizers(cfg)
    output = repair_documents(
        cfg,
        read_timed(cfg.data_path(f"{args.split}_src")),
        read_timed(cfg.data_path(f"{args.split}_tgt")),
        load_mt(cfg, "fwd"),
        load_repair(cfg),
        src_tok,
        tgt_tok,
    )
    _write_groups(output.baseline_groups, cfg.work_path("reports", "baseline_groups.txt"))
    _write_groups(output.repaired_groups, cfg.work_path("reports", "repaired_groups.txt"))
    _write_groups(output.reference_groups, cfg.work_path("reports", "reference_groups.txt"))
    print(
        f"repaired {len(output.repaired_groups)} groups "
        f"({output.fallback_count} fallbacks) into {cfg.work_path('reports')}"
    )


def cmd_bleu(args):
    with open(args.hypotheses, encoding="utf-8") as f:
        hyps = [line.rstrip("\n") for line in f if line.strip()]
    with open(args.references, encoding="utf-8") as f:
        refs = [line.rstrip("\n") for line in f if line.strip()]
    print(f"{bleu(hyps, refs, lowercase=not args.case_sensitive):.2f}")


def cmd_contrastive(args):
    cfg = _load_config(args)
    src_tok, tgt_tok = load_tokenizers(cfg)
    suite = read_suite(args.suite if args.suite else cfg.data_path("contrastive_test"))
    fwd = load_mt(cfg, "fwd")
    if args.scorer == "baseline":
        scorer = sentence_mt_scorer(fwd, src_tok, tgt_tok)
    else:
        repair = load_repair(cfg)
        scorer = docrepair_scorer(
            fwd, repair.params, repair.config, src_tok, tgt_tok, cfg.beam_size
        )
    report = contrastive_accuracy(suite, scorer)
    print(report.format_table())


def cmd_change_stats(args):
    base = _read_groups(args.baseline)
    rep = _read_groups(args.repaired)
    ref = _read_groups(args.references)
    stats = change_stats(base, rep, ref)
    print(json.dumps(stats.to_dict(), indent=2, sort_keys=True))


def cmd_run(args):
    cfg = _load_config(args)
    report = run_experiment(cfg)
    print(json.dumps(report["bleu"], indent=2, sort_keys=True))
    print(f"baseline consistency: {report['contrastive']['baseline']['accuracy']:.3f}")
    print(f"repaired consistency: {report['contrastive']['repaired']['accuracy']:.3f}")


def cmd_evaluate(args):
    cfg = _load_config(args)
    report = evaluate_experiment(cfg)
    print(json.dumps(report["bleu"], indent=2, sort_keys=True))


def cmd_serve_anno(args):
    cfg = _load_config(args)
    tasks_path = cfg.work_path("annotation", "tasks.jsonl")
    if args.rebuild_tasks or not tasks_path.exists():
        base = _read_groups(cfg.work_path("reports", "baseline_groups.txt"))
        rep = _read_groups(cfg.work_path("reports", "repaired_groups.txt"))
        src_docs = read_timed(cfg.data_path(f"{args.split}_src"))
        sources = []
        k = cfg.group_size
        for doc in src_docs:
            for start in range(0, len(doc.sentences), k):
                sources.append(doc.sentences[start : start + k])
        tasks = build_tasks(sources, base, rep, cfg.seed)
        save_tasks(tasks, tasks_path)
    else:
        tasks = load_tasks(tasks_path)
    store = AnnotationStore(tasks, cfg.work_path("annotation", "judgments.jsonl"))
    server = AnnotationServer(store, host=args.host, port=args.port, static_dir=args.static)
    host, port = server.address
    print(f"serving {len(tasks)} tasks on http://{host}:{port}/ (ctrl-c to stop)")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        server.shutdown()


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="docrepair",
        description="sentence-level MT with monolingual document-group repair",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="experiment config JSON")
    common.add_argument("--seed", type=int, default=None, help="override the config seed")
    common.add_argument(
        "--set",
        action="append",
        metavar="KEY=VALUE",
        help="override a config entry (dotted path, JSON value)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("make-toy", parents=[common], help="generate the toy corpus family")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--quick", action="store_true", help="small sizes for smoke runs")
    p.set_defaults(fn=cmd_make_toy)

    p = sub.add_parser("tokenize", parents=[common], help="train BPE tables")
    p.set_defaults(fn=cmd_tokenize)

    p = sub.add_parser("train-mt", parents=[common], help="train a sentence-level MT model")
    p.add_argument("--direction", choices=["fwd", "rev"], required=True)
    p.set_defaults(fn=cmd_train_mt)

    p = sub.add_parser("build-pools", parents=[common], help="precompute sample pools")
    p.set_defaults(fn=cmd_build_pools)

    p = sub.add_parser("train-docrepair", parents=[common], help="train the repair model")
    p.set_defaults(fn=cmd_train_docrepair)

    p = sub.add_parser("translate", parents=[common], help="translate sentences (one per line)")
    p.add_argument("--direction", choices=["fwd", "rev"], default="fwd")
    p.add_argument("--input", required=True)
    p.add_argument("--output")
    p.set_defaults(fn=cmd_translate)

    p = sub.add_parser("repair", parents=[common], help="two-step translate + repair a split")
    p.add_argument("--split", choices=["dev", "test"], default="test")
    p.set_defaults(fn=cmd_repair)

    p = sub.add_parser("bleu", parents=[common], help="corpus BLEU between two files")
    p.add_argument("--hypotheses", required=True)
    p.add_argument("--references", required=True)
    p.add_argument("--case-sensitive", action="store_true")
    p.set_defaults(fn=cmd_bleu)

    p = sub.add_parser("contrastive", parents=[common], help="consistency accuracy tables")
    p.add_argument("--scorer", choices=["baseline", "repair"], required=True)
    p.add_argument("--suite", help="suite path (default: configured test suite)")
    p.set_defaults(fn=cmd_contrastive)

    p = sub.add_parser("change-stats", parents=[common], help="changed-sentence statistics")
    p.add_argument("--baseline", required=True)
    p.add_argument("--repaired", required=True)
    p.add_argument("--references", required=True)
    p.set_defaults(fn=cmd_change_stats)

    p = sub.add_parser("run", parents=[common], help="run every stage end to end")
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("evaluate", parents=[common], help="re-run evaluations on artifacts")
    p.set_defaults(fn=cmd_evaluate)

    p = sub.add_parser("serve-anno", parents=[common], help="start the annotation service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8765)
    p.add_argument("--static", help="static asset directory (the browser UI)")
    p.add_argument("--split", choices=["dev", "test"], default="test")
    p.add_argument("--rebuild-tasks", action="store_true")
    p.set_defaults(fn=cmd_serve_anno)

    args = parser.parse_args(argv)
    args.fn(args)
    return 0


if __name__ == "__main__":
    sys.exit(main())
