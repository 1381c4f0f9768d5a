import numpy as np
import pytest

from pageorder.corpus import CorpusConfig, Document, LengthBucket, generate_corpus, split_corpus
from pageorder.errors import ConfigError, DomainError
from pageorder.models import Arch, ModelConfig, build_model
from pageorder.numcore import Tensor, grad_check
from pageorder.training import (
    ConsistencyError,
    CurriculumStage,
    Strategy,
    TrainConfig,
    curriculum_schedule,
    fit,
    loss_pairwise,
    loss_pointer,
    loss_position,
    make_pairwise_targets,
    read_training_log,
    route,
    specialization_weight,
    write_training_log,
)
from pageorder.training.loop import SpecialistEnsemble

DIM = 12


def tiny(arch, seed=3, dtype=np.float32, **kw):
    defaults = dict(input_dim=DIM, hidden_dim=8, layers=1, heads=2, seed=seed)
    defaults.update(kw)
    return build_model(ModelConfig(arch=arch, **defaults), dtype=dtype)


class TestPairwiseTargets:
    def test_identity_truth(self):
        y = make_pairwise_targets(np.array([0, 1]))
        assert y[0, 1] and not y[1, 0] and not y[0, 0]

    def test_swapped_truth(self):
        y = make_pairwise_targets(np.array([1, 0]))
        assert y[1, 0] and not y[0, 1]

    def test_antisymmetric_off_diagonal(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            n = int(rng.integers(2, 12))
            y = make_pairwise_targets(rng.permutation(n))
            assert not y.diagonal().any()
            off = ~np.eye(n, dtype=bool)
            assert (y ^ y.T)[off].all()


class TestLossPairwise:
    def test_zero_scores_give_ln2(self):
        s = Tensor(np.zeros((1, 3, 3), dtype=np.float64))
        y = make_pairwise_targets(np.array([0, 1, 2]))
        assert loss_pairwise(s, y).item() == pytest.approx(np.log(2.0))

    def test_confident_correct_scores_vanish(self):
        truth = np.array([0, 1, 2])
        y = make_pairwise_targets(truth)
        s = np.where(y, 50.0, -50.0).astype(np.float64)
        loss = loss_pairwise(Tensor(s[None]), y)
        assert loss.item() == pytest.approx(0.0, abs=1e-6)

    def test_gradient_against_finite_differences(self):
        model = tiny(Arch.PAIRWISE_RANK, dtype=np.float64)
        pages = np.random.default_rng(1).normal(size=(1, 3, DIM))
        y = make_pairwise_targets(np.array([2, 0, 1]))

        def f():
            s, _ = model.score_matrix(Tensor(pages))
            return loss_pairwise(s, y).sum()

        report = grad_check(f, model.named_parameters(), epsilon=1e-5, tolerance=1e-3)
        assert report.passed, report.summary()


class TestLossPointer:
    def test_uniform_logits_give_log_k(self):
        n = 4
        logits = Tensor(np.zeros((1, n, n), dtype=np.float64))
        sel = np.arange(n)[None, :]
        valid = np.ones((1, n, n), dtype=bool)
        for t in range(1, n):
            valid[0, t, :t] = False
        expected = np.mean([np.log(n - t) for t in range(n)])
        assert loss_pointer(logits, sel, valid).item() == pytest.approx(expected)

    def test_perfect_logits_vanish(self):
        n = 3
        raw = np.full((1, n, n), -60.0)
        for t in range(n):
            raw[0, t, t] = 60.0
        valid = np.ones((1, n, n), dtype=bool)
        for t in range(1, n):
            valid[0, t, :t] = False
        loss = loss_pointer(Tensor(raw.astype(np.float64)), np.arange(n)[None], valid)
        assert loss.item() == pytest.approx(0.0, abs=1e-6)

    def test_masked_label_is_inconsistent(self):
        logits = Tensor(np.zeros((1, 2, 2), dtype=np.float64))
        valid = np.array([[[True, True], [True, False]]])
        with pytest.raises(ConsistencyError):
            loss_pointer(logits, np.array([[1, 1]]), valid)

    @pytest.mark.parametrize("arch", [Arch.POINTER_MLP, Arch.POINTER_LSTM, Arch.SEQ2SEQ])
    def test_gradient_through_each_decoder(self, arch):
        model = tiny(arch, dtype=np.float64)
        rng = np.random.default_rng(2)
        pages = rng.normal(size=(1, 4, DIM))
        truth = rng.permutation(4)[None, :]

        def f():
            logits, sel, valid = model.teacher_logits(Tensor(pages), truth)
            return loss_pointer(logits, sel, valid).sum()

        report = grad_check(f, model.named_parameters(), epsilon=1e-5, tolerance=1e-3)
        assert report.passed, report.summary()


class TestLossPosition:
    def test_exact_scores_give_zero(self):
        truth = np.array([[1, 0, 2]])
        scores = Tensor(truth.astype(np.float64) / 2.0)
        assert loss_position(scores, truth).item() == pytest.approx(0.0)

    def test_flat_half_scores_two_pages(self):
        scores = Tensor(np.full((1, 2), 0.5, dtype=np.float64))
        assert loss_position(scores, np.array([[0, 1]])).item() == pytest.approx(0.25)

    def test_too_few_pages(self):
        with pytest.raises(DomainError):
            loss_position(Tensor(np.zeros((1, 1))), np.array([[0]]))

    def test_gradient_through_bilstm(self):
        model = tiny(Arch.BILSTM_POS, dtype=np.float64)
        rng = np.random.default_rng(3)
        pages = rng.normal(size=(1, 3, DIM))
        truth = rng.permutation(3)[None, :]

        def f():
            return loss_position(model.position_scores(Tensor(pages)), truth).sum()

        report = grad_check(f, model.named_parameters(), epsilon=1e-5, tolerance=1e-3)
        assert report.passed, report.summary()


class TestSpecializationWeight:
    def test_target_bucket_upweighted(self):
        assert specialization_weight(12, LengthBucket.B11_15, 5.0) == 5.0

    def test_other_bucket_unit_weight(self):
        assert specialization_weight(3, LengthBucket.B11_15, 5.0) == 1.0

    def test_factor_one_is_universal(self):
        for length in range(2, 26):
            assert specialization_weight(length, LengthBucket.B6_10, 1.0) == 1.0


class TestCurriculumSchedule:
    def test_b6_10_hundred_epochs(self):
        stages = curriculum_schedule(LengthBucket.B6_10, 100)
        assert [(s.min_len, s.max_len, s.epochs, s.lr_scale) for s in stages] == [
            (2, 5, 15, 1.0),
            (4, 7, 15, 1.0),
            (6, 10, 50, 1.0),
            (6, 10, 20, 0.1),
        ]

    def test_b2_5_collapses_to_two_stages(self):
        stages = curriculum_schedule(LengthBucket.B2_5, 100)
        assert [(s.min_len, s.max_len, s.epochs, s.lr_scale) for s in stages] == [
            (2, 5, 80, 1.0),
            (2, 5, 20, 0.1),
        ]

    @pytest.mark.parametrize("bucket", list(LengthBucket))
    def test_stage_lengths_never_exceed_target(self, bucket):
        for stages in (curriculum_schedule(bucket, 20), curriculum_schedule(bucket, 100)):
            assert all(s.max_len <= bucket.max_len for s in stages)
            assert sum(s.epochs for s in stages) in (20, 100)

    def test_epochs_below_four_rejected(self):
        with pytest.raises(ConfigError):
            curriculum_schedule(LengthBucket.B6_10, 3)

    def test_stage_validation(self):
        with pytest.raises(ConfigError):
            CurriculumStage(5, 3, 10, 1.0)
        with pytest.raises(ConfigError):
            CurriculumStage(2, 5, 0, 1.0)


class TestTrainConfig:
    def test_specialized_requires_target(self):
        with pytest.raises(ConfigError):
            TrainConfig(strategy=Strategy.SPECIALIZED_DIRECT)

    def test_weight_factor_floor(self):
        with pytest.raises(ConfigError):
            TrainConfig(weight_factor=0.5)


@pytest.fixture(scope="module")
def small_corpus():
    docs = generate_corpus(CorpusConfig(n_docs=120, dim=DIM, chrono_dim=4, seed=21))
    return split_corpus(docs, seed=21)


class TestFit:
    def test_deterministic_tau_series(self, small_corpus):
        train, val, _ = small_corpus
        runs = []
        for _ in range(2):
            model = tiny(Arch.PAIRWISE_RANK, seed=8)
            result = fit(model, train, val, TrainConfig(epochs=2, batch_size=8, seed=5))
            runs.append(result.val_tau_series)
        assert np.array_equal(runs[0], runs[1])

    def test_bit_identical_parameter_trajectories(self, small_corpus):
        train, val, _ = small_corpus
        states = []
        for _ in range(2):
            model = tiny(Arch.BILSTM_POS, seed=8)
            fit(model, train, val, TrainConfig(epochs=1, batch_size=8, seed=5))
            states.append(model.state_arrays())
        for name in states[0]:
            assert np.array_equal(states[0][name], states[1][name]), name

    def test_strategy_reduction_bit_exact(self, small_corpus):
        train, val, _ = small_corpus
        universal = tiny(Arch.PAIRWISE_RANK, seed=8)
        res_u = fit(universal, train, val, TrainConfig(epochs=2, batch_size=8, seed=5))
        specialized = tiny(Arch.PAIRWISE_RANK, seed=8)
        res_s = fit(
            specialized,
            train,
            val,
            TrainConfig(
                epochs=2,
                batch_size=8,
                seed=5,
                strategy=Strategy.SPECIALIZED_DIRECT,
                target_bucket=LengthBucket.B6_10,
                weight_factor=1.0,
            ),
        )
        assert np.array_equal(res_u.val_tau_series, res_s.val_tau_series)

    def test_curriculum_respects_stage_ranges(self, small_corpus):
        train, val, _ = small_corpus
        model = tiny(Arch.PAIRWISE_RANK, seed=9)
        cfg = TrainConfig(
            epochs=8,
            batch_size=8,
            seed=6,
            strategy=Strategy.SPECIALIZED_CURRICULUM,
            target_bucket=LengthBucket.B6_10,
        )
        result = fit(model, train, val, cfg)
        stages = curriculum_schedule(LengthBucket.B6_10, 8)
        bounds = []
        for idx, stage in enumerate(stages):
            bounds.extend([(stage.min_len, stage.max_len)] * stage.epochs)
        assert len(result.history) == 8
        for record, (lo, hi) in zip(result.history, bounds):
            assert record.stage_min_len == lo and record.stage_max_len == hi
            assert all(lo <= length <= hi for length in record.lengths_seen)

    def test_returns_best_validation_snapshot(self, small_corpus):
        train, val, _ = small_corpus
        model = tiny(Arch.PAIRWISE_RANK, seed=10)
        result = fit(model, train, val, TrainConfig(epochs=3, batch_size=8, seed=7))
        assert result.best_epoch == int(np.argmax(result.val_tau_series))

    def test_training_log_round_trip(self, small_corpus, tmp_path):
        train, val, _ = small_corpus
        model = tiny(Arch.BILSTM_POS, seed=11)
        result = fit(model, train, val, TrainConfig(epochs=2, batch_size=8, seed=7))
        path = tmp_path / "log.csv"
        write_training_log(result.history, path)
        rows = read_training_log(path)
        assert len(rows) == 2
        assert rows[0]["epoch"] == 0
        assert rows[1]["val_tau_overall"] == result.history[1].val_tau_overall


class TestRouting:
    def test_route_by_length(self, small_corpus):
        models = {b: tiny(Arch.PAIRWISE_RANK, seed=i) for i, b in enumerate(LengthBucket)}
        ensemble = SpecialistEnsemble(models=models)
        from pageorder.corpus import shuffle_instance

        doc = Document(doc_id="d", pages=np.zeros((7, DIM), dtype=np.float32))
        inst = shuffle_instance(doc, 1)
        assert route(ensemble, inst) is models[LengthBucket.B6_10]
        doc25 = Document(doc_id="e", pages=np.zeros((25, DIM), dtype=np.float32))
        assert route(ensemble, shuffle_instance(doc25, 1)) is models[LengthBucket.B21_25]

    def test_missing_bucket_rejected(self):
        models = {b: tiny(Arch.PAIRWISE_RANK) for b in list(LengthBucket)[:-1]}
        with pytest.raises(ConfigError):
            SpecialistEnsemble(models=models)

    def test_out_of_range_length_rejected(self):
        with pytest.raises(DomainError):
            Document(doc_id="too-big", pages=np.zeros((26, DIM), dtype=np.float32))
