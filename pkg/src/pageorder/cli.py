"""Command-line surface: gen, train, bench, figures, gradcheck, transfer, embed.

Every command is driven by a JSON config file (unknown keys are errors)
plus a few overriding flags, and echoes its effective configuration into
the output directory so a run can be reproduced from its artifacts.
Exit codes: 0 success, 1 runtime failure, 2 usage or config error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .bench import (
    emit_figures,
    locality_experiment,
    read_report_csv,
    render_report_text,
    run_benchmark,
    transfer_experiment,
    write_report_csv,
)
from .bench.report import atomic_write_text
from .corpus import (
    CorpusConfig,
    EmbedServiceError,
    LengthBucket,
    bucket_of,
    fetch_embeddings,
    generate_corpus,
    load_corpus,
    save_corpus,
    split_corpus,
)
from .errors import ConfigError, DomainError
from .gradgate import run_gradient_gate
from .models import Arch, PeVariant, build_model, desk_config, load_checkpoint, save_checkpoint
from .training import (
    Strategy,
    TrainConfig,
    fit,
    read_training_log,
    write_training_log,
)

DEFAULT_CONFIG: dict = {
    "seed": 0,
    "corpus": {
        "n_docs": 2000,
        "dim": 64,
        "length_weights": [22.8, 30.8, 22.0, 14.4, 9.9],
        "n_page_types": 12,
        "chrono_dim": 8,
        "chrono_strength": 0.6,
        "type_noise": 1.0,
        "page_noise": 0.15,
        "seed": 0,
    },
    "model": {"seed": 1},
    "train": {
        "epochs": 30,
        "batch_size": 16,
        "lr": 1e-3,
        "lr_final_stage": None,
        "clip_norm": 1.0,
        "weight_factor": 5.0,
        "seed": 7,
        "reshuffle_per_epoch": False,
    },
    "bench": {"models": ["all"], "eval_seed": 99},
    "embed": {"endpoint": "", "batch_size": 64, "expected_dim": None},
}


def _merge_section(defaults: dict, overrides: dict, path: str) -> dict:
    merged = dict(defaults)
    for key, value in overrides.items():
        if key not in defaults:
            raise ConfigError(f"unknown config key {path}{key}")
        if isinstance(defaults[key], dict) and isinstance(value, dict):
            merged[key] = _merge_section(defaults[key], value, f"{path}{key}.")
        else:
            merged[key] = value
    return merged


def load_config(path: str | None) -> dict:
    if path is None:
        return json.loads(json.dumps(DEFAULT_CONFIG))
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config file must hold a JSON object")
    return _merge_section(DEFAULT_CONFIG, raw, "")


def _echo_config(config: dict, out_dir: Path, extras: dict | None = None) -> None:
    payload = dict(config)
    if extras:
        payload = {**payload, "run": extras}
    out_dir.mkdir(parents=True, exist_ok=True)
    atomic_write_text(out_dir / "effective_config.json", json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _corpus_config(config: dict, seed_override: int | None) -> CorpusConfig:
    section = dict(config["corpus"])
    if seed_override is not None:
        section["seed"] = seed_override
    section["length_weights"] = tuple(section["length_weights"])
    return CorpusConfig(**section)


def _train_config(config: dict, strategy: Strategy, target: LengthBucket | None, seed_override: int | None) -> TrainConfig:
    section = dict(config["train"])
    if seed_override is not None:
        section["seed"] = seed_override
    return TrainConfig(strategy=strategy, target_bucket=target, **section)


def _bucket_from_label(label: str) -> LengthBucket:
    for bucket in LengthBucket:
        if bucket.label == label or bucket.name == label:
            return bucket
    raise ConfigError(f"unknown length bucket {label!r} (use e.g. 6-10)")


def _print_histogram(docs) -> None:
    counts = {b: 0 for b in LengthBucket}
    for d in docs:
        counts[bucket_of(d.n_pages)] += 1
    total = max(1, len(docs))
    print("bucket  docs  share")
    for b in LengthBucket:
        print(f"{b.label:>6}  {counts[b]:>4}  {counts[b] / total:6.1%}")


def cmd_gen(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    out = Path(args.out)
    corpus_cfg = _corpus_config(config, args.seed)
    docs = generate_corpus(corpus_cfg)
    out.mkdir(parents=True, exist_ok=True)
    save_corpus(docs, out / "corpus.jsonl")
    _echo_config(config, out, {"command": "gen", "corpus_digest": corpus_cfg.digest()})
    print(f"wrote {len(docs)} documents to {out / 'corpus.jsonl'} (digest {corpus_cfg.digest()})")
    _print_histogram(docs)
    return 0


ARCH_CHOICES = {
    "bilstm_pos": (Arch.BILSTM_POS, None),
    "pointer_mlp": (Arch.POINTER_MLP, None),
    "pointer_lstm": (Arch.POINTER_LSTM, None),
    "seq2seq_learned": (Arch.SEQ2SEQ, PeVariant.LEARNED),
    "seq2seq_sinusoidal": (Arch.SEQ2SEQ, PeVariant.SINUSOIDAL),
    "seq2seq_none": (Arch.SEQ2SEQ, PeVariant.NONE),
    "pairwise": (Arch.PAIRWISE_RANK, None),
}


def cmd_train(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    docs = load_corpus(args.corpus)
    splits = split_corpus(docs, seed=config["seed"])
    strategy = Strategy(args.strategy)
    target = _bucket_from_label(args.target_bucket) if args.target_bucket else None
    train_cfg = _train_config(config, strategy, target, args.seed)
    arch, pe = ARCH_CHOICES[args.arch]

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    prior_history: list[dict] = []
    if args.resume:
        model = load_checkpoint(args.resume, expected_arch=arch)
        log_path = Path(args.resume).with_name("log.csv")
        if log_path.exists():
            prior_history = read_training_log(log_path)
    else:
        model_cfg = desk_config(arch, input_dim=docs[0].dim, seed=config["model"]["seed"], pe_variant=pe or PeVariant.LEARNED)
        model = build_model(model_cfg)

    result = fit(model, splits[0], splits[1], train_cfg)
    offset = len(prior_history)
    for record in result.history:
        record.epoch += offset
    save_checkpoint(model, out / "model.ckpt")
    from .training import record_from_log_row

    merged = [record_from_log_row(row) for row in prior_history] + result.history
    write_training_log(merged, out / "log.csv")
    _echo_config(config, out, {"command": "train", "arch": args.arch, "strategy": strategy.value})
    best = max(r.val_tau_overall for r in result.history)
    print(f"trained {args.arch} ({strategy.value}); best validation tau {best:.4f}")
    print(f"checkpoint: {out / 'model.ckpt'}; log: {out / 'log.csv'}")
    return 0


def cmd_bench(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    docs = load_corpus(args.corpus)
    splits = split_corpus(docs, seed=config["seed"])
    corpus_cfg = _corpus_config(config, None)
    train_cfg = _train_config(config, Strategy.UNIVERSAL, None, args.seed)
    menu = tuple(args.models.split(",")) if args.models else tuple(config["bench"]["models"])
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    result = run_benchmark(
        splits,
        menu,
        train_cfg,
        corpus_digest=corpus_cfg.digest(),
        input_dim=docs[0].dim,
        eval_seed=config["bench"]["eval_seed"],
        model_seed=config["model"]["seed"],
        jobs=args.jobs,
        progress=lambda msg: print(msg, file=sys.stderr),
    )
    write_report_csv(result.report, out / "report.csv")
    atomic_write_text(out / "report.txt", render_report_text(result.report))
    logs_dir = out / "logs"
    logs_dir.mkdir(exist_ok=True)
    for name, history in result.logs.items():
        write_training_log(history, logs_dir / f"{name}.csv")
    emit_figures(result.report, result.logs, out / "figures")

    short_name, long_name = "specialized_direct", "specialized_direct"
    if short_name in result.models and result.models[short_name] is not None:
        ensemble = result.models[short_name]
        comparison = locality_experiment(
            ensemble.models[LengthBucket.B2_5],
            ensemble.models[LengthBucket.B21_25],
            splits[2],
            eval_seed=config["bench"]["eval_seed"],
        )
        lines = [
            "metric,short,long,ratio,reference_short,reference_long,reference_ratio",
            f"local_fraction,{comparison.short.local_fraction!r},{comparison.long.local_fraction!r},"
            f",{comparison.reference_short.local_fraction!r},{comparison.reference_long.local_fraction!r},",
            f"avg_distance,{comparison.short.avg_distance!r},{comparison.long.avg_distance!r},"
            f"{comparison.ratio!r},{comparison.reference_short.avg_distance!r},{comparison.reference_long.avg_distance!r},{comparison.reference_ratio!r}",
        ]
        atomic_write_text(out / "locality.csv", "\n".join(lines) + "\n")
    _echo_config(config, out, {"command": "bench", "models": list(menu)})
    print(render_report_text(result.report))
    return 0


def cmd_figures(args: argparse.Namespace) -> int:
    bench_dir = Path(args.report)
    report_path = bench_dir / "report.csv" if bench_dir.is_dir() else bench_dir
    report = read_report_csv(report_path)
    logs: dict = {}
    logs_dir = report_path.parent / "logs"
    if logs_dir.is_dir():
        for log_file in sorted(logs_dir.glob("*.csv")):
            logs[log_file.stem] = read_training_log(log_file)
    out = Path(args.out)
    paths = emit_figures(report, logs, out)
    for p in paths:
        print(f"wrote {p}")
    return 0


def cmd_gradcheck(args: argparse.Namespace) -> int:
    gate = run_gradient_gate(tolerance=args.tolerance)
    print(gate.summary())
    if not gate.passed:
        print("gradient gate FAILED", file=sys.stderr)
        return 1
    print("gradient gate passed")
    return 0


def cmd_transfer(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    docs = load_corpus(args.corpus)
    splits = split_corpus(docs, seed=config["seed"])
    train_cfg = _train_config(config, Strategy.UNIVERSAL, None, args.seed)
    result = transfer_experiment(
        splits,
        train_cfg,
        input_dim=docs[0].dim,
        eval_seed=config["bench"]["eval_seed"],
        model_seed=config["model"]["seed"],
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    lines = [
        "tau_in_domain,tau_transfer,n_train_docs,reference_in_domain,reference_transfer",
        f"{result.tau_in_domain!r},{result.tau_transfer!r},{result.n_train_docs},"
        f"{result.reference_in_domain!r},{result.reference_transfer!r}",
    ]
    atomic_write_text(out / "transfer.csv", "\n".join(lines) + "\n")
    _echo_config(config, out, {"command": "transfer"})
    print(
        f"in-domain tau {result.tau_in_domain:.4f}, transfer tau {result.tau_transfer:.4f} "
        f"(reference: {result.reference_in_domain} -> {result.reference_transfer})"
    )
    return 0


def cmd_embed(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    endpoint = args.endpoint or config["embed"]["endpoint"]
    if not endpoint:
        raise ConfigError("no embedding endpoint configured")
    credentials = os.environ.get("EMBED_API_KEY")
    if not credentials:
        raise ConfigError("EMBED_API_KEY is not set")
    texts = [line.rstrip("\n") for line in Path(args.input).read_text(encoding="utf-8").splitlines() if line.strip()]
    vectors = fetch_embeddings(
        texts,
        endpoint,
        credentials,
        expected_dim=config["embed"]["expected_dim"],
        batch_size=config["embed"]["batch_size"],
    )
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", encoding="utf-8") as fh:
        for text, vector in zip(texts, vectors):
            fh.write(json.dumps({"text": text, "embedding": [float(x) for x in vector]}) + "\n")
    print(f"embedded {len(texts)} texts -> {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pageorder", description="Page-order recovery laboratory")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON config file (defaults apply when omitted)")
        p.add_argument("--seed", type=int, default=None, help="override the command's seed")

    p_gen = sub.add_parser("gen", help="generate and save a synthetic corpus")
    common(p_gen)
    p_gen.add_argument("--out", required=True)
    p_gen.set_defaults(fn=cmd_gen)

    p_train = sub.add_parser("train", help="train one configuration")
    common(p_train)
    p_train.add_argument("--corpus", required=True)
    p_train.add_argument("--arch", required=True, choices=sorted(ARCH_CHOICES))
    p_train.add_argument("--strategy", default="universal", choices=[s.value for s in Strategy])
    p_train.add_argument("--target-bucket", default=None, help="bucket label, e.g. 6-10")
    p_train.add_argument("--resume", default=None, help="checkpoint to continue from")
    p_train.add_argument("--out", required=True)
    p_train.set_defaults(fn=cmd_train)

    p_bench = sub.add_parser("bench", help="train and evaluate the configured menu")
    common(p_bench)
    p_bench.add_argument("--corpus", required=True)
    p_bench.add_argument("--models", default=None, help="comma-separated row names or 'all'")
    p_bench.add_argument("--jobs", type=int, default=1)
    p_bench.add_argument("--out", required=True)
    p_bench.set_defaults(fn=cmd_bench)

    p_fig = sub.add_parser("figures", help="emit figure data from a bench output directory")
    p_fig.add_argument("--report", required=True, help="bench output dir or report.csv path")
    p_fig.add_argument("--out", required=True)
    p_fig.set_defaults(fn=cmd_figures)

    p_grad = sub.add_parser("gradcheck", help="verify every layer and loss against finite differences")
    p_grad.add_argument("--tolerance", type=float, default=1e-3)
    p_grad.set_defaults(fn=cmd_gradcheck)

    p_transfer = sub.add_parser("transfer", help="short-to-long transfer experiment")
    common(p_transfer)
    p_transfer.add_argument("--corpus", required=True)
    p_transfer.add_argument("--out", required=True)
    p_transfer.set_defaults(fn=cmd_transfer)

    p_embed = sub.add_parser("embed", help="fetch embeddings from a remote service")
    common(p_embed)
    p_embed.add_argument("--endpoint", default=None)
    p_embed.add_argument("--input", required=True, help="text file, one text per line")
    p_embed.add_argument("--out", required=True)
    p_embed.set_defaults(fn=cmd_embed)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (ConfigError, DomainError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except EmbedServiceError as exc:
        print(f"embedding service error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
