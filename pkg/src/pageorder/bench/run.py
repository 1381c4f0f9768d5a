"""End-to-end experiment orchestration.

Trains or loads every requested configuration, evaluates all of them on
bit-identical shuffled test instances, and assembles the report. Also
hosts the short-to-long transfer experiment and the attention-locality
comparison between short and long specialists.
"""

from __future__ import annotations

import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..corpus import Document, LengthBucket, ShuffledInstance, bucket_of, shuffle_instance
from ..errors import ConfigError
from ..heuristics import order_greedy_nn, order_random, order_tsp_nn
from ..metrics import LocalityStats, attention_locality, mean_tau
from ..models import Arch, Model, PeVariant, build_model, desk_config
from ..numcore import RngStream
from ..training import SpecialistEnsemble, Strategy, TrainConfig, fit, route
from .report import EvalReport, ReportRow

__all__ = [
    "MENU",
    "BenchResult",
    "TransferResult",
    "LocalityComparison",
    "run_benchmark",
    "transfer_experiment",
    "locality_experiment",
]

MENU = (
    "random",
    "greedy_nn",
    "tsp_nn",
    "bilstm_pos",
    "pointer_mlp",
    "pointer_lstm",
    "seq2seq_learned",
    "seq2seq_sinusoidal",
    "seq2seq_none",
    "pairwise",
    "specialized_direct",
    "specialized_curriculum",
)

HEURISTIC_ROWS = ("random", "greedy_nn", "tsp_nn")

REFERENCE_TRANSFER_IN_DOMAIN = 0.8817
REFERENCE_TRANSFER = 0.1618
REFERENCE_LOCAL_SHORT = LocalityStats(local_fraction=0.779, avg_distance=1.53)
REFERENCE_LOCAL_LONG = LocalityStats(local_fraction=0.208, avg_distance=7.59)
REFERENCE_LOCALITY_RATIO = 4.96


@dataclass
class BenchResult:
    report: EvalReport
    logs: dict
    models: dict


@dataclass
class TransferResult:
    tau_in_domain: float
    tau_transfer: float
    n_train_docs: int
    reference_in_domain: float = REFERENCE_TRANSFER_IN_DOMAIN
    reference_transfer: float = REFERENCE_TRANSFER


@dataclass
class LocalityComparison:
    short: LocalityStats
    long: LocalityStats
    ratio: float
    window: int
    reference_short: LocalityStats = field(default=REFERENCE_LOCAL_SHORT)
    reference_long: LocalityStats = field(default=REFERENCE_LOCAL_LONG)
    reference_ratio: float = REFERENCE_LOCALITY_RATIO


def _config_seed(name: str, base: int) -> int:
    return (zlib.crc32(name.encode("utf-8")) ^ base) & 0x7FFFFFFF


def _heuristic_predict(name: str, inst: ShuffledInstance, eval_seed: int) -> np.ndarray:
    if name == "random":
        return order_random(inst.n_pages, RngStream(eval_seed).split("random-baseline").split(inst.doc_id))
    if name == "greedy_nn":
        return order_greedy_nn(inst.pages, RngStream(eval_seed).split("greedy-start").split(inst.doc_id))
    if name == "tsp_nn":
        return order_tsp_nn(inst.pages)
    raise ConfigError(f"unknown heuristic {name}")


def _predict_all(predict, instances: list[ShuffledInstance], jobs: int) -> list[np.ndarray]:
    if jobs <= 1:
        return [predict(inst) for inst in instances]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(predict, instances))


def _train_single(arch: Arch, pe: PeVariant | None, splits, train_cfg: TrainConfig, input_dim: int, seed: int):
    cfg = desk_config(arch, input_dim, seed=seed, pe_variant=pe or PeVariant.LEARNED)
    model = build_model(cfg)
    result = fit(model, splits[0], splits[1], train_cfg)
    return model, result.history


def _train_specialists(splits, train_cfg: TrainConfig, strategy: Strategy, input_dim: int, base_seed: int):
    models = {}
    logs = {}
    for bucket in LengthBucket:
        cfg = TrainConfig(
            epochs=train_cfg.epochs,
            batch_size=train_cfg.batch_size,
            lr=train_cfg.lr,
            lr_final_stage=train_cfg.lr_final_stage,
            clip_norm=train_cfg.clip_norm,
            strategy=strategy,
            target_bucket=bucket,
            weight_factor=train_cfg.weight_factor,
            seed=train_cfg.seed,
            reshuffle_per_epoch=train_cfg.reshuffle_per_epoch,
        )
        seed = _config_seed(f"{strategy.value}.{bucket.label}", base_seed)
        model = build_model(desk_config(Arch.PAIRWISE_RANK, input_dim, seed=seed))
        result = fit(model, splits[0], splits[1], cfg)
        models[bucket] = model
        logs[bucket.label] = result.history
    return SpecialistEnsemble(models=models), logs


ARCH_ROWS = {
    "bilstm_pos": (Arch.BILSTM_POS, None),
    "pointer_mlp": (Arch.POINTER_MLP, None),
    "pointer_lstm": (Arch.POINTER_LSTM, None),
    "seq2seq_learned": (Arch.SEQ2SEQ, PeVariant.LEARNED),
    "seq2seq_sinusoidal": (Arch.SEQ2SEQ, PeVariant.SINUSOIDAL),
    "seq2seq_none": (Arch.SEQ2SEQ, PeVariant.NONE),
    "pairwise": (Arch.PAIRWISE_RANK, None),
}


def run_benchmark(
    splits: tuple[list[Document], list[Document], list[Document]],
    menu: tuple[str, ...],
    train_cfg: TrainConfig,
    *,
    corpus_digest: str,
    input_dim: int,
    eval_seed: int,
    model_seed: int = 1,
    jobs: int = 1,
    progress=None,
) -> BenchResult:
    """Train and evaluate every configuration named in ``menu``.

    Every configuration sees the same shuffled test instances, fixed by
    ``eval_seed``. Returns the report plus per-configuration training
    logs keyed by row name (specialists get one log per bucket).
    """
    names = list(MENU) if menu in (("all",), ["all"]) else list(menu)
    unknown = [n for n in names if n not in MENU]
    if unknown:
        raise ConfigError(f"unknown benchmark configurations: {unknown}")
    test_instances = [shuffle_instance(d, eval_seed) for d in splits[2]]
    docs_by_bucket = {b: 0 for b in LengthBucket}
    for inst in test_instances:
        docs_by_bucket[bucket_of(inst.n_pages)] += 1

    rows: list[ReportRow] = []
    logs: dict = {}
    models: dict = {}
    for name in names:
        if progress:
            progress(f"configuration {name}")
        if name in HEURISTIC_ROWS:
            predictions = _predict_all(lambda i: _heuristic_predict(name, i, eval_seed), test_instances, jobs)
            param_count = 0
            models[name] = None
        elif name in ARCH_ROWS:
            arch, pe = ARCH_ROWS[name]
            model, history = _train_single(
                arch, pe, splits, train_cfg, input_dim, _config_seed(name, model_seed)
            )
            logs[name] = history
            models[name] = model
            predictions = _predict_all(lambda i: model.order(i.pages), test_instances, jobs)
            param_count = model.param_count()
        elif name == "specialized_direct":
            ensemble, spec_logs = _train_specialists(
                splits, train_cfg, Strategy.SPECIALIZED_DIRECT, input_dim, model_seed
            )
            models[name] = ensemble
            logs.update({f"{name}.{k}": v for k, v in spec_logs.items()})
            predictions = _predict_all(lambda i: route(ensemble, i).order(i.pages), test_instances, jobs)
            param_count = ensemble.param_count()
        elif name == "specialized_curriculum":
            ensemble, spec_logs = _train_specialists(
                splits, train_cfg, Strategy.SPECIALIZED_CURRICULUM, input_dim, model_seed
            )
            models[name] = ensemble
            logs.update({f"{name}.{k}": v for k, v in spec_logs.items()})
            predictions = _predict_all(lambda i: route(ensemble, i).order(i.pages), test_instances, jobs)
            param_count = ensemble.param_count()
        else:  # pragma: no cover - guarded above
            raise ConfigError(name)
        result = mean_tau(test_instances, predictions)
        rows.append(
            ReportRow(
                name=name,
                tau_by_bucket=dict(result.per_bucket),
                tau_overall=result.overall,
                param_count=param_count,
                docs_by_bucket=dict(docs_by_bucket),
            )
        )
    report = EvalReport(
        rows=rows,
        corpus_digest=corpus_digest,
        seeds={"eval": eval_seed, "model": model_seed, "train": train_cfg.seed},
    )
    return BenchResult(report=report, logs=logs, models=models)


def transfer_experiment(
    splits: tuple[list[Document], list[Document], list[Document]],
    train_cfg: TrainConfig,
    *,
    input_dim: int,
    eval_seed: int,
    model_seed: int = 1,
) -> TransferResult:
    """Train the pairwise model on 2-5 page documents only, test both extremes."""
    short = LengthBucket.B2_5
    long_b = LengthBucket.B21_25
    short_train = [d for d in splits[0] if short.min_len <= d.n_pages <= short.max_len]
    short_val = [d for d in splits[1] if short.min_len <= d.n_pages <= short.max_len]
    if not short_train or not short_val:
        raise ConfigError("corpus has no short documents to train on")
    test_short = [shuffle_instance(d, eval_seed) for d in splits[2] if bucket_of(d.n_pages) is short]
    test_long = [shuffle_instance(d, eval_seed) for d in splits[2] if bucket_of(d.n_pages) is long_b]
    if not test_short or not test_long:
        raise ConfigError("corpus is missing 2-5 or 21-25 page test documents")
    model = build_model(
        desk_config(Arch.PAIRWISE_RANK, input_dim, seed=_config_seed("transfer", model_seed))
    )
    fit(model, short_train, short_val, train_cfg)
    tau_in = mean_tau(test_short, [model.order(i.pages) for i in test_short]).overall
    tau_out = mean_tau(test_long, [model.order(i.pages) for i in test_long]).overall
    return TransferResult(tau_in_domain=tau_in, tau_transfer=tau_out, n_train_docs=len(short_train))


def locality_experiment(
    short_model: Model,
    long_model: Model,
    test_docs: list[Document],
    *,
    eval_seed: int,
    window: int = 2,
) -> LocalityComparison:
    """Compare encoder attention locality of a short vs a long specialist.

    Each specialist is probed on the test documents of its own bucket;
    rows of every layer and head weigh equally. The ratio is the long
    specialist's average attention distance over the short one's.
    """
    short_stacks = []
    long_stacks = []
    for doc in test_docs:
        bucket = bucket_of(doc.n_pages)
        if bucket is LengthBucket.B2_5:
            inst = shuffle_instance(doc, eval_seed)
            short_stacks.append(short_model.encoder_attention(inst.pages))
        elif bucket is LengthBucket.B21_25:
            inst = shuffle_instance(doc, eval_seed)
            long_stacks.append(long_model.encoder_attention(inst.pages))
    if not short_stacks or not long_stacks:
        raise ConfigError("need test documents in both the 2-5 and 21-25 buckets")
    stats_short = attention_locality(short_stacks, window=window)
    stats_long = attention_locality(long_stacks, window=window)
    ratio = stats_long.avg_distance / stats_short.avg_distance if stats_short.avg_distance > 0 else float("inf")
    return LocalityComparison(short=stats_short, long=stats_long, ratio=ratio, window=window)
