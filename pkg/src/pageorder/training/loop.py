"""Seeded, deterministic training loops with per-epoch validation tau."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..corpus import Document, LengthBucket, ShuffledInstance, bucket_of, shuffle_instance
from ..errors import ConfigError, DomainError
from ..metrics import BucketMeans, mean_tau
from ..models import Arch, Model
from ..numcore import RngStream, Tensor, TrainingDivergedError, adam_step, clip_global_norm, init_adam
from .losses import loss_pairwise, loss_pointer, loss_position, make_pairwise_targets
from .schedule import CurriculumStage, Strategy, curriculum_schedule, specialization_weight

__all__ = [
    "TrainConfig",
    "EpochRecord",
    "FitResult",
    "SpecialistEnsemble",
    "fit",
    "evaluate",
    "route",
    "write_training_log",
    "read_training_log",
]


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 30
    batch_size: int = 16
    lr: float = 1e-3
    lr_final_stage: float | None = None  # defaults to lr * stage scale
    clip_norm: float = 1.0
    strategy: Strategy = Strategy.UNIVERSAL
    target_bucket: LengthBucket | None = None
    weight_factor: float = 5.0
    seed: int = 0
    reshuffle_per_epoch: bool = False

    def __post_init__(self):
        if self.weight_factor < 1.0:
            raise ConfigError("weight_factor must be >= 1")
        if self.strategy is not Strategy.UNIVERSAL and self.target_bucket is None:
            raise ConfigError(f"strategy {self.strategy.value} requires a target bucket")
        if self.epochs < 1 or self.batch_size < 1:
            raise ConfigError("epochs and batch_size must be positive")


@dataclass
class EpochRecord:
    epoch: int
    stage: int
    stage_min_len: int
    stage_max_len: int
    lr: float
    train_loss: float
    val_tau_overall: float
    val_tau_by_bucket: dict
    lengths_seen: list[int]


@dataclass
class FitResult:
    model: Model
    history: list[EpochRecord]
    val_tau_series: np.ndarray
    best_epoch: int


@dataclass
class SpecialistEnsemble:
    """One trained model per length bucket."""

    models: dict

    def __post_init__(self):
        missing = [b for b in LengthBucket if b not in self.models]
        if missing:
            raise ConfigError(f"ensemble is missing buckets: {[b.label for b in missing]}")

    def param_count(self) -> int:
        return sum(m.param_count() for m in self.models.values())


def route(ensemble: SpecialistEnsemble, instance: ShuffledInstance) -> Model:
    """Pick the specialist whose bucket covers the instance length."""
    return ensemble.models[bucket_of(instance.n_pages)]


def _per_doc_loss(model: Model, pages: Tensor, truth: np.ndarray) -> Tensor:
    arch = model.config.arch
    if arch is Arch.PAIRWISE_RANK:
        s, _ = model.score_matrix(pages)
        return loss_pairwise(s, make_pairwise_targets(truth))
    if arch is Arch.BILSTM_POS:
        return loss_position(model.position_scores(pages), truth)
    if arch in (Arch.POINTER_MLP, Arch.POINTER_LSTM, Arch.SEQ2SEQ):
        logits, sel, valid = model.teacher_logits(pages, truth)
        return loss_pointer(logits, sel, valid)
    raise ConfigError(f"no training path for {arch}")


def evaluate(model_or_ensemble, instances: list[ShuffledInstance]) -> BucketMeans:
    """Mean tau of greedy predictions, per bucket and overall."""
    predictions = []
    for inst in instances:
        model = (
            route(model_or_ensemble, inst)
            if isinstance(model_or_ensemble, SpecialistEnsemble)
            else model_or_ensemble
        )
        predictions.append(model.order(inst.pages))
    return mean_tau(instances, predictions)


def _stages_for(cfg: TrainConfig) -> list[CurriculumStage]:
    if cfg.strategy is Strategy.SPECIALIZED_CURRICULUM:
        assert cfg.target_bucket is not None
        return curriculum_schedule(cfg.target_bucket, cfg.epochs)
    from ..corpus import MAX_PAGES, MIN_PAGES

    return [CurriculumStage(MIN_PAGES, MAX_PAGES, cfg.epochs, 1.0)]


def _batches(indices: list[int], lengths: list[int], batch_size: int, order: np.ndarray) -> list[list[int]]:
    """Group same-length documents into batches, batch order seeded."""
    by_length: dict[int, list[int]] = {}
    for pos in order:
        idx = indices[pos]
        by_length.setdefault(lengths[pos], []).append(idx)
    batches = []
    for length in sorted(by_length):
        group = by_length[length]
        for start in range(0, len(group), batch_size):
            batches.append(group[start : start + batch_size])
    return batches


def fit(model: Model, train_docs: list[Document], val_docs: list[Document], cfg: TrainConfig) -> FitResult:
    """Train under the configured strategy; returns the best-validation snapshot.

    Validation tau is recorded after every epoch. Curriculum stages see
    only documents inside their length range, and each epoch record keeps
    the set of lengths that actually entered batches for auditing.
    """
    if not train_docs or not val_docs:
        raise ConfigError("need non-empty train and validation splits")
    stages = _stages_for(cfg)
    run_rng = RngStream(cfg.seed).split("fit")
    val_instances = [shuffle_instance(d, cfg.seed) for d in val_docs]
    base_instances = [shuffle_instance(d, cfg.seed) for d in train_docs]

    params = model.parameters()
    state = init_adam(params, learning_rate=cfg.lr)
    best_state: dict | None = None
    best_tau = -np.inf
    best_epoch = -1
    history: list[EpochRecord] = []

    epoch = 0
    for stage_idx, stage in enumerate(stages):
        stage_lr = cfg.lr * stage.lr_scale
        if stage.lr_scale != 1.0 and cfg.lr_final_stage is not None:
            stage_lr = cfg.lr_final_stage
        state.learning_rate = stage_lr
        stage_positions = [i for i, d in enumerate(train_docs) if stage.contains(d.n_pages)]
        if not stage_positions:
            raise ConfigError(f"no training documents with {stage.min_len}-{stage.max_len} pages")
        for _ in range(stage.epochs):
            if cfg.reshuffle_per_epoch:
                epoch_rng = RngStream(cfg.seed).split("reshuffle").split(epoch)
                instances = [
                    shuffle_instance(train_docs[i], epoch_rng.split(train_docs[i].doc_id))
                    for i in stage_positions
                ]
            else:
                instances = [base_instances[i] for i in stage_positions]
            lengths = [inst.n_pages for inst in instances]
            order = run_rng.split(f"order-ep{epoch}").permutation(len(instances))
            batches = _batches(list(range(len(instances))), lengths, cfg.batch_size, order)

            total_weighted_loss = 0.0
            total_weight = 0.0
            seen_lengths: set[int] = set()
            for batch in batches:
                insts = [instances[i] for i in batch]
                n = insts[0].n_pages
                seen_lengths.add(n)
                pages = Tensor(np.stack([inst.pages for inst in insts]).astype(model.dtype))
                truth = np.stack([inst.truth_rank for inst in insts])
                if cfg.strategy is Strategy.SPECIALIZED_DIRECT:
                    weights = np.array(
                        [specialization_weight(n, cfg.target_bucket, cfg.weight_factor) for _ in insts],
                        dtype=model.dtype,
                    )
                else:
                    weights = np.ones(len(insts), dtype=model.dtype)
                model.zero_grad()
                per_doc = _per_doc_loss(model, pages, truth)
                weight_sum = float(weights.sum())
                batch_loss = (per_doc * weights).sum() * (1.0 / weight_sum)
                loss_value = batch_loss.item()
                if not np.isfinite(loss_value):
                    raise TrainingDivergedError(f"non-finite loss at epoch {epoch}")
                batch_loss.backward()
                grads = [p.grad if p.grad is not None else np.zeros_like(p.data) for p in params]
                clip_global_norm(grads, cfg.clip_norm)
                adam_step(params, grads, state)
                total_weighted_loss += loss_value * weight_sum
                total_weight += weight_sum

            val = evaluate(model, val_instances)
            record = EpochRecord(
                epoch=epoch,
                stage=stage_idx,
                stage_min_len=stage.min_len,
                stage_max_len=stage.max_len,
                lr=stage_lr,
                train_loss=total_weighted_loss / total_weight,
                val_tau_overall=val.overall,
                val_tau_by_bucket=dict(val.per_bucket),
                lengths_seen=sorted(seen_lengths),
            )
            history.append(record)
            if val.overall > best_tau:
                best_tau = val.overall
                best_epoch = epoch
                best_state = model.state_arrays()
            epoch += 1

    assert best_state is not None
    model.load_state_arrays(best_state)
    series = np.array([r.val_tau_overall for r in history], dtype=np.float64)
    return FitResult(model=model, history=history, val_tau_series=series, best_epoch=best_epoch)


LOG_COLUMNS = ["epoch", "stage", "stage_min_len", "stage_max_len", "lr", "train_loss", "val_tau_overall"] + [
    f"val_tau_{b.label}" for b in LengthBucket
]


def write_training_log(history: list[EpochRecord], path: str | Path) -> None:
    """One CSV record per epoch; absent buckets stay empty."""
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(LOG_COLUMNS)
        for r in history:
            row = [
                r.epoch,
                r.stage,
                r.stage_min_len,
                r.stage_max_len,
                repr(r.lr),
                repr(r.train_loss),
                repr(r.val_tau_overall),
            ]
            for bucket in LengthBucket:
                value = r.val_tau_by_bucket.get(bucket)
                row.append("" if value is None else repr(value))
            writer.writerow(row)


def record_from_log_row(row: dict) -> EpochRecord:
    """Rebuild an EpochRecord from a parsed log row (lengths are not logged)."""
    return EpochRecord(
        epoch=row["epoch"],
        stage=row["stage"],
        stage_min_len=row["stage_min_len"],
        stage_max_len=row["stage_max_len"],
        lr=row["lr"],
        train_loss=row["train_loss"],
        val_tau_overall=row["val_tau_overall"],
        val_tau_by_bucket={
            b: row[f"val_tau_{b.label}"] for b in LengthBucket if row[f"val_tau_{b.label}"] is not None
        },
        lengths_seen=[],
    )


def read_training_log(path: str | Path) -> list[dict]:
    """Parse a training log back into per-epoch dictionaries."""
    with Path(path).open("r", newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != LOG_COLUMNS:
            raise DomainError(f"unexpected training log columns: {reader.fieldnames}")
        rows = []
        for raw in reader:
            row: dict = {
                "epoch": int(raw["epoch"]),
                "stage": int(raw["stage"]),
                "stage_min_len": int(raw["stage_min_len"]),
                "stage_max_len": int(raw["stage_max_len"]),
                "lr": float(raw["lr"]),
                "train_loss": float(raw["train_loss"]),
                "val_tau_overall": float(raw["val_tau_overall"]),
            }
            for bucket in LengthBucket:
                cell = raw[f"val_tau_{bucket.label}"]
                row[f"val_tau_{bucket.label}"] = float(cell) if cell else None
            rows.append(row)
        return rows
