"""Command-line operator surface.

Commands: synth-data, train-estimator, train, eval, generate, analyze,
serve.  Each reads one declarative config file (``--config``) plus
overriding flags, writes its artifacts into a run directory and honors
``--seed`` everywhere.  Exit codes: 0 success, 1 failure (config schema
violations print the offending field path), 2 usage errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict
from pathlib import Path

from hear import __version__

RUN_ROOT_ENV = "HEAR_RUN_ROOT"


def _run_root(args) -> Path:
    if getattr(args, "out", None):
        return Path(args.out)
    return Path(os.environ.get(RUN_ROOT_ENV, "runs"))


def _load_config(args) -> dict:
    from hear.runconfig import load_config
    return load_config(getattr(args, "config", None))


def _corpus_dir(args, cfg) -> Path:
    if getattr(args, "corpus", None):
        return Path(args.corpus)
    if cfg["corpus"].get("dir"):
        return Path(cfg["corpus"]["dir"])
    return _run_root(args) / "corpus"


def _load_corpus(args, cfg):
    from hear.synth import load_corpus_dir
    corpus_dir = _corpus_dir(args, cfg)
    if not (corpus_dir / "dialogues.json").exists():
        raise FileNotFoundError(
            f"no corpus at {corpus_dir} (run `hear synth-data` first)")
    return load_corpus_dir(corpus_dir)


def _apply_seed(args, section: dict) -> dict:
    if getattr(args, "seed", None) is not None:
        section = dict(section)
        section["seed"] = args.seed
    return section


def cmd_synth_data(args) -> int:
    from hear.synth import SynthCorpusConfig, save_corpus_dir, synth_corpus
    cfg = _load_config(args)
    synth_cfg = SynthCorpusConfig(**_apply_seed(args, cfg["synth"]))
    corpus, labels = synth_corpus(synth_cfg)
    out = _corpus_dir(args, cfg)
    save_corpus_dir(corpus, labels, out)
    n_inst = len(corpus.instances)
    print(f"wrote {len(corpus)} clips / {n_inst} instances to {out}")
    return 0


def cmd_train_estimator(args) -> int:
    from hear.estimator import (AudioRelatednessEstimator,
                                build_estimator_labels, save_labeled_set)
    cfg = _load_config(args)
    corpus, _ = _load_corpus(args, cfg)
    params = _apply_seed(args, cfg["estimator"])
    swap_fraction = params.pop("swap_fraction", 0.5)
    seed = params.get("seed", 0)
    labeled = build_estimator_labels(corpus.question_texts(),
                                     swap_fraction=swap_fraction, seed=seed)
    est = AudioRelatednessEstimator(**params).fit(labeled)
    out = _run_root(args)
    out.mkdir(parents=True, exist_ok=True)
    est.save(out / "estimator.npz")
    save_labeled_set(labeled, out / "labeled_set.jsonl")
    (out / "estimator_report.json").write_text(json.dumps(
        {"val_auc": est.val_auc_, "labeled": len(labeled)}, indent=1))
    print(f"estimator saved to {out / 'estimator.npz'} "
          f"(held-out AUC {est.val_auc_:.4f})")
    return 0


def _maybe_estimator(args, out: Path):
    from hear.estimator import AudioRelatednessEstimator
    path = getattr(args, "estimator", None)
    if path:
        return AudioRelatednessEstimator.load(path)
    default = out / "estimator.npz"
    if default.exists():
        return AudioRelatednessEstimator.load(default)
    return None


def cmd_train(args) -> int:
    from hear.training import TrainConfig, train
    cfg = _load_config(args)
    corpus, _ = _load_corpus(args, cfg)
    train_cfg = TrainConfig(**_apply_seed(args, cfg["train"]))
    out = _run_root(args)
    estimator = _maybe_estimator(args, out)
    result = train(train_cfg, corpus, estimator=estimator, out_dir=out)
    if result.estimator is not None and not (out / "estimator.npz").exists():
        result.estimator.save(out / "estimator.npz")
    print(f"best epoch {result.best_epoch} "
          f"(validation loss {result.best_val:.6f}); artifacts in {out}")
    return 0


def _decode_kwargs(cfg) -> dict:
    d = cfg["decode"]
    return {"beam_size": d.get("beam_size", 5),
            "max_len": d.get("max_len", 20),
            "length_penalty": d.get("length_penalty", 0.3)}


def cmd_eval(args) -> int:
    from hear.checkpoint import load_checkpoint
    from hear.evaluation import evaluate
    from hear.synth import load_corpus_dir
    cfg = _load_config(args)
    corpus_dir = _corpus_dir(args, cfg)
    corpus, labels = load_corpus_dir(corpus_dir)
    out = _run_root(args)
    ckpt_path = Path(args.checkpoint) if args.checkpoint else out / "checkpoint.npz"
    bundle = load_checkpoint(ckpt_path)
    estimator = _maybe_estimator(args, out)
    sal_mode = bundle.meta.get("train_config", {}).get("sal_mode", "estimator")
    if estimator is None and sal_mode in ("estimator", "both"):
        sal_mode = "keyword"
    report = evaluate(bundle.model, corpus, estimator=estimator, labels=labels,
                      sal_mode=sal_mode, audio_ablation=args.audio_ablation,
                      **_decode_kwargs(cfg))
    out.mkdir(parents=True, exist_ok=True)
    report_path = out / "eval_report.json"
    if args.bucket:
        if args.bucket not in report.buckets:
            raise KeyError(f"unknown bucket {args.bucket!r}; "
                           f"have {sorted(report.buckets)}")
        payload = {"bucket": args.bucket,
                   "metrics": report.buckets[args.bucket]}
        report_path.write_text(json.dumps(payload, indent=1))
        print(json.dumps(payload, indent=1))
    else:
        report.to_json(report_path)
        summary = {k: round(v, 4) if isinstance(v, float) else v
                   for k, v in report.overall.items()}
        print(json.dumps(summary, indent=1))
    print(f"report written to {report_path}")
    return 0


def cmd_generate(args) -> int:
    from hear.checkpoint import load_checkpoint
    from hear.decoding import DecodeConfig
    from hear.service import ServingBundle, Session
    cfg = _load_config(args)
    corpus, _ = _load_corpus(args, cfg)
    out = _run_root(args)
    ckpt_path = Path(args.checkpoint) if args.checkpoint else out / "checkpoint.npz"
    bundle = load_checkpoint(ckpt_path)
    estimator = _maybe_estimator(args, out)
    sal_mode = bundle.meta.get("train_config", {}).get("sal_mode", "estimator")
    if estimator is None and sal_mode in ("estimator", "both"):
        sal_mode = "keyword"
    dk = _decode_kwargs(cfg)
    serving = ServingBundle(
        model=bundle.model, vocab=bundle.vocab, corpus=corpus,
        estimator=estimator, sal_mode=sal_mode,
        decode=DecodeConfig(eos_id=bundle.model.config.eos_id, **dk))
    session = Session(session_id="cli", clip_id=args.clip)
    record = serving.answer(session, args.question)
    print(json.dumps(record.to_json(), indent=1))
    return 0


def cmd_analyze(args) -> int:
    from hear.evaluation import keyword_proportions
    cfg = _load_config(args)
    corpus, labels = _load_corpus(args, cfg)
    out = _run_root(args)
    out.mkdir(parents=True, exist_ok=True)
    did_something = False
    if args.keywords:
        shares = keyword_proportions(corpus.question_texts())
        (out / "keyword_proportions.json").write_text(
            json.dumps(shares, indent=1))
        for kw, share in sorted(shares.items(), key=lambda kv: -kv[1]):
            print(f"{kw:10s} {share:6.3f}")
        did_something = True
    if args.audio_ablation:
        from hear.checkpoint import load_checkpoint
        from hear.evaluation import evaluate
        ckpt_path = (Path(args.checkpoint) if args.checkpoint
                     else out / "checkpoint.npz")
        bundle = load_checkpoint(ckpt_path)
        estimator = _maybe_estimator(args, out)
        sal_mode = bundle.meta.get("train_config", {}).get("sal_mode",
                                                           "estimator")
        if estimator is None and sal_mode in ("estimator", "both"):
            sal_mode = "keyword"
        report = evaluate(bundle.model, corpus, estimator=estimator,
                          labels=labels, sal_mode=sal_mode,
                          audio_ablation=True, **_decode_kwargs(cfg))
        (out / "audio_ablation.json").write_text(json.dumps(
            {"with_audio": report.buckets["all"],
             "without_audio": report.buckets["all_no_audio"],
             "changed_answers": report.meta["no_audio_changed_answers"]},
            indent=1))
        print(json.dumps({
            "with_audio": report.buckets["all"]["cider_d"],
            "without_audio": report.buckets["all_no_audio"]["cider_d"],
            "changed_answers": report.meta["no_audio_changed_answers"]},
            indent=1))
        did_something = True
    if not did_something:
        print("nothing to analyze: pass --keywords and/or --audio-ablation",
              file=sys.stderr)
        return 2
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from hear.checkpoint import load_checkpoint
    from hear.decoding import DecodeConfig
    from hear.service import ServingBundle, build_app
    cfg = _load_config(args)
    corpus, _ = _load_corpus(args, cfg)
    out = _run_root(args)
    ckpt_path = Path(args.checkpoint) if args.checkpoint else out / "checkpoint.npz"
    bundle = load_checkpoint(ckpt_path)
    estimator = _maybe_estimator(args, out)
    sal_mode = bundle.meta.get("train_config", {}).get("sal_mode", "estimator")
    if estimator is None and sal_mode in ("estimator", "both"):
        sal_mode = "keyword"
    serve_cfg = cfg["serve"]
    dk = _decode_kwargs(cfg)
    serving = ServingBundle(
        model=bundle.model, vocab=bundle.vocab, corpus=corpus,
        estimator=estimator, sal_mode=sal_mode,
        decode=DecodeConfig(eos_id=bundle.model.config.eos_id, **dk),
        max_question_tokens=serve_cfg.get("max_question_tokens", 50))
    app = build_app(serving, journal=serve_cfg.get("journal"),
                    static_dir=args.static_dir or serve_cfg.get("static_dir"))
    uvicorn.run(app, host=args.host or serve_cfg.get("host", "127.0.0.1"),
                port=args.port or serve_cfg.get("port", 8080))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hear",
        description="train, evaluate and serve the listening-enhanced "
                    "dialogue model")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, corpus=True):
        p.add_argument("--config", help="declarative run config (YAML/JSON)")
        p.add_argument("--seed", type=int, help="override the config seed")
        p.add_argument("--out", help=f"run directory (default ${RUN_ROOT_ENV} "
                                     f"or ./runs)")
        if corpus:
            p.add_argument("--corpus", help="corpus directory")

    p = sub.add_parser("synth-data", help="generate the synthetic toy corpus")
    common(p)
    p.set_defaults(fn=cmd_synth_data)

    p = sub.add_parser("train-estimator",
                       help="fit the audio-relatedness estimator")
    common(p)
    p.set_defaults(fn=cmd_train_estimator)

    p = sub.add_parser("train", help="run the alternating training loop")
    common(p)
    p.add_argument("--estimator", help="estimator checkpoint (.npz)")
    p.set_defaults(fn=cmd_train)

    p = sub.add_parser("eval", help="decode and score a corpus")
    common(p)
    p.add_argument("--checkpoint", help="model checkpoint (.npz)")
    p.add_argument("--estimator", help="estimator checkpoint (.npz)")
    p.add_argument("--bucket", help="report only this bucket (e.g. keyword, "
                                    "estimator, audio_gt)")
    p.add_argument("--audio-ablation", action="store_true",
                   help="also re-decode with audio zeroed")
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("generate", help="answer one question for one clip")
    common(p)
    p.add_argument("--checkpoint", help="model checkpoint (.npz)")
    p.add_argument("--estimator", help="estimator checkpoint (.npz)")
    p.add_argument("--clip", required=True)
    p.add_argument("--question", required=True)
    p.set_defaults(fn=cmd_generate)

    p = sub.add_parser("analyze", help="corpus and model analyses")
    common(p)
    p.add_argument("--keywords", action="store_true",
                   help="keyword share among audio-related questions")
    p.add_argument("--audio-ablation", action="store_true",
                   help="compare decoding with and without audio")
    p.add_argument("--checkpoint", help="model checkpoint (.npz)")
    p.add_argument("--estimator", help="estimator checkpoint (.npz)")
    p.set_defaults(fn=cmd_analyze)

    p = sub.add_parser("serve", help="run the HTTP session service")
    common(p)
    p.add_argument("--checkpoint", help="model checkpoint (.npz)")
    p.add_argument("--estimator", help="estimator checkpoint (.npz)")
    p.add_argument("--host")
    p.add_argument("--port", type=int)
    p.add_argument("--static-dir", help="serve a built web UI from this dir")
    p.set_defaults(fn=cmd_serve)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    from hear.runconfig import ConfigError
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except (FileNotFoundError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
