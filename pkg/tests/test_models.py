import itertools

import numpy as np
import pytest

from pageorder.errors import ConfigError
from pageorder.metrics import require_permutation
from pageorder.models import (
    Arch,
    ArchMismatchError,
    CheckpointDigestError,
    CheckpointVersionError,
    LengthError,
    ModelConfig,
    PairwiseScores,
    PeVariant,
    aggregate_scores,
    build_model,
    desk_config,
    load_checkpoint,
    save_checkpoint,
)
from pageorder.numcore import Tensor

DIM = 16


def tiny_config(arch, **kw):
    defaults = dict(input_dim=DIM, hidden_dim=16, layers=1, heads=2, seed=5)
    defaults.update(kw)
    return ModelConfig(arch=arch, **defaults)


class TestModelConfig:
    def test_heads_must_divide_hidden(self):
        with pytest.raises(ConfigError):
            ModelConfig(arch=Arch.SEQ2SEQ, input_dim=8, hidden_dim=10, heads=4)

    def test_max_len_floor(self):
        with pytest.raises(ConfigError):
            ModelConfig(arch=Arch.SEQ2SEQ, input_dim=8, hidden_dim=8, heads=2, max_len=10)

    def test_round_trip_dict(self):
        cfg = desk_config(Arch.POINTER_LSTM, 64, seed=9)
        assert ModelConfig.from_dict(cfg.to_dict()) == cfg


class TestOrderingContracts:
    @pytest.mark.parametrize("arch", list(Arch))
    def test_valid_permutations_all_lengths(self, arch):
        model = build_model(tiny_config(arch))
        rng = np.random.default_rng(0)
        for n in (2, 3, 9, 25):
            order = model.order(rng.normal(size=(n, DIM)).astype(np.float32))
            require_permutation(order, n)

    def test_bilstm_sorts_ascending_by_score(self):
        model = build_model(tiny_config(Arch.BILSTM_POS))
        scores = np.array([0.9, 0.1, 0.5])
        assert np.argsort(scores, kind="stable").tolist() == [1, 2, 0]
        # the model's own ordering is argsort of its scores
        pages = np.random.default_rng(1).normal(size=(3, DIM)).astype(np.float32)
        from pageorder.numcore import no_grad

        with no_grad():
            model_scores = model.position_scores(Tensor(pages[None])).data[0]
        assert model.order(pages).tolist() == np.argsort(model_scores, kind="stable").tolist()

    def test_tied_scores_break_by_slot_index(self):
        from pageorder.models.bilstm import ordering_from_scores

        assert ordering_from_scores(np.array([0.5, 0.5])).tolist() == [0, 1]
        assert ordering_from_scores(np.array([0.3, 0.5, 0.3, 0.1])).tolist() == [3, 0, 2, 1]

    def test_pointer_equal_logits_prefer_low_slots(self):
        model = build_model(tiny_config(Arch.POINTER_MLP))
        pages = np.tile(np.random.default_rng(3).normal(size=(1, DIM)).astype(np.float32), (5, 1))
        assert model.order(pages).tolist() == [0, 1, 2, 3, 4]

    @pytest.mark.parametrize("arch", [Arch.POINTER_MLP, Arch.POINTER_LSTM])
    def test_no_slot_selected_twice(self, arch):
        model = build_model(tiny_config(arch))
        rng = np.random.default_rng(4)
        for _ in range(50):
            n = int(rng.integers(2, 26))
            order = model.order(rng.normal(size=(n, DIM)).astype(np.float32))
            assert len(set(order.tolist())) == n

    def test_pointer_lstm_25_page_decode_under_50ms(self):
        import time

        model = build_model(desk_config(Arch.POINTER_LSTM, input_dim=64, seed=0))
        pages = np.random.default_rng(5).normal(size=(25, 64)).astype(np.float32)
        model.order(pages)  # warm-up
        timings = []
        for _ in range(5):
            t0 = time.perf_counter()
            model.order(pages)
            timings.append(time.perf_counter() - t0)
        assert min(timings) < 0.050, f"decode took {min(timings) * 1000:.1f}ms"


class TestSeq2Seq:
    def test_learned_pe_rejects_long_input(self):
        model = build_model(tiny_config(Arch.SEQ2SEQ, pe_variant=PeVariant.LEARNED))
        pages = np.zeros((26, DIM), dtype=np.float32)
        with pytest.raises(LengthError):
            model.order(pages)

    def test_learned_pe_table_has_max_len_rows(self):
        model = build_model(tiny_config(Arch.SEQ2SEQ, pe_variant=PeVariant.LEARNED, max_len=30))
        assert model.params["pe.table"].shape == (30, 16)

    def test_no_pe_variant_has_no_table(self):
        model = build_model(tiny_config(Arch.SEQ2SEQ, pe_variant=PeVariant.NONE))
        assert "pe.table" not in model.params

    def test_pe_none_logits_permutation_equivariant(self):
        model = build_model(tiny_config(Arch.SEQ2SEQ, pe_variant=PeVariant.NONE), dtype=np.float64)
        rng = np.random.default_rng(5)
        pages = rng.normal(size=(4, DIM)).astype(np.float64)
        base_order, _, base_logits = model.order_with_attention(pages)
        for perm in itertools.permutations(range(4)):
            perm = np.asarray(perm)
            order_p, _, logits_p = model.order_with_attention(pages[perm])
            # the same pages get chosen in the same content order
            assert np.array_equal(perm[order_p], base_order)
            # pre-mask pointer logits permute with the slots at every step:
            # slot j of the permuted input holds original page perm[j]
            assert np.allclose(logits_p, base_logits[:, perm], atol=1e-9)

    def test_returns_encoder_attention_stack(self):
        model = build_model(tiny_config(Arch.SEQ2SEQ))
        pages = np.random.default_rng(6).normal(size=(5, DIM)).astype(np.float32)
        _, attn, _ = model.order_with_attention(pages)
        assert attn.shape == (1, 2, 5, 5)
        assert np.allclose(attn.sum(axis=-1), 1.0, atol=1e-5)


class TestPairwise:
    def test_shapes_and_finiteness(self):
        model = build_model(tiny_config(Arch.PAIRWISE_RANK))
        rng = np.random.default_rng(7)
        for n in (2, 7, 25):
            scores, attns = model.pairwise_scores(rng.normal(size=(n, DIM)).astype(np.float32))
            assert scores.s.shape == (n, n)
            off = scores.s[~np.eye(n, dtype=bool)]
            assert np.isfinite(off).all()

    @pytest.mark.parametrize("n", [3, 4])
    def test_encoder_and_scorer_equivariance(self, n):
        model = build_model(tiny_config(Arch.PAIRWISE_RANK), dtype=np.float64)
        pages = np.random.default_rng(8).normal(size=(n, DIM)).astype(np.float64)
        base, _ = model.pairwise_scores(pages)
        for perm in itertools.permutations(range(n)):
            perm = np.asarray(perm)
            permuted, _ = model.pairwise_scores(pages[perm])
            # s_perm[a, b] scores pages (perm[a], perm[b])
            assert np.allclose(permuted.s, base.s[np.ix_(perm, perm)], atol=1e-9)

    def test_identical_pages_give_antisymmetric_differences(self):
        model = build_model(tiny_config(Arch.PAIRWISE_RANK), dtype=np.float64)
        page = np.random.default_rng(9).normal(size=(1, DIM)).astype(np.float64)
        pages = np.vstack([page, page, np.random.default_rng(10).normal(size=(1, DIM))]).astype(np.float64)
        scores, _ = model.pairwise_scores(pages)
        # pages 0 and 1 are identical: d_02 = d_12, so rows/cols agree
        assert scores.s[0, 2] == pytest.approx(scores.s[1, 2], abs=1e-9)
        assert scores.s[2, 0] == pytest.approx(scores.s[2, 1], abs=1e-9)


class TestAggregateScores:
    def test_two_page_hand_example(self):
        scores = PairwiseScores(n=2, s=np.array([[0.0, 1.0], [-1.0, 0.0]]))
        position, ordering = aggregate_scores(scores)
        assert position.tolist() == [-1.0, 1.0]
        assert ordering.tolist() == [0, 1]

    @pytest.mark.parametrize("n", range(2, 26))
    def test_consistent_matrix_recovers_truth(self, n):
        rng = np.random.default_rng(n)
        for _ in range(5):
            truth = rng.permutation(n)
            s = np.where(truth[None, :] > truth[:, None], 1.0, -1.0)
            _, ordering = aggregate_scores(PairwiseScores(n=n, s=s))
            assert np.array_equal(truth[ordering], np.arange(n))

    def test_all_zero_matrix_falls_back_to_slot_order(self):
        _, ordering = aggregate_scores(PairwiseScores(n=4, s=np.zeros((4, 4))))
        assert ordering.tolist() == [0, 1, 2, 3]

    def test_descending_flag_reverses(self):
        truth = np.array([1, 0, 2])
        s = np.where(truth[None, :] > truth[:, None], 1.0, -1.0)
        _, asc = aggregate_scores(PairwiseScores(n=3, s=s))
        _, desc = aggregate_scores(PairwiseScores(n=3, s=s), descending=True)
        assert asc.tolist() == desc[::-1].tolist()


class TestCheckpoints:
    def test_round_trip_preserves_inference(self, tmp_path):
        model = build_model(tiny_config(Arch.PAIRWISE_RANK))
        pages = np.random.default_rng(11).normal(size=(6, DIM)).astype(np.float32)
        before = model.order(pages)
        scores_before, _ = model.pairwise_scores(pages)
        path = tmp_path / "model.ckpt"
        save_checkpoint(model, path)
        restored = load_checkpoint(path)
        assert np.array_equal(restored.order(pages), before)
        scores_after, _ = restored.pairwise_scores(pages)
        assert np.array_equal(scores_before.s, scores_after.s)

    def test_parameters_bit_identical(self, tmp_path):
        model = build_model(tiny_config(Arch.POINTER_LSTM))
        path = tmp_path / "m.ckpt"
        save_checkpoint(model, path)
        restored = load_checkpoint(path)
        for (na, a), (nb, b) in zip(model.named_parameters(), restored.named_parameters()):
            assert na == nb
            assert np.array_equal(a.data, b.data)

    def test_corrupted_byte_fails_digest(self, tmp_path):
        model = build_model(tiny_config(Arch.BILSTM_POS))
        path = tmp_path / "m.ckpt"
        save_checkpoint(model, path)
        blob = bytearray(path.read_bytes())
        blob[len(blob) // 2] ^= 0xFF
        path.write_bytes(bytes(blob))
        with pytest.raises(CheckpointDigestError):
            load_checkpoint(path)

    def test_arch_mismatch_detected(self, tmp_path):
        model = build_model(tiny_config(Arch.PAIRWISE_RANK))
        path = tmp_path / "m.ckpt"
        save_checkpoint(model, path)
        with pytest.raises(ArchMismatchError):
            load_checkpoint(path, expected_arch=Arch.SEQ2SEQ)

    def test_version_mismatch_detected(self, tmp_path):
        import hashlib

        model = build_model(tiny_config(Arch.BILSTM_POS))
        path = tmp_path / "m.ckpt"
        save_checkpoint(model, path)
        blob = bytearray(path.read_bytes())
        blob[4:6] = (99).to_bytes(2, "little")  # bump the version field
        body = bytes(blob[:-32])
        path.write_bytes(body + hashlib.sha256(body).digest())
        with pytest.raises(CheckpointVersionError):
            load_checkpoint(path)

    def test_param_count_matches_checkpoint_contents(self, tmp_path):
        model = build_model(tiny_config(Arch.SEQ2SEQ))
        path = tmp_path / "m.ckpt"
        save_checkpoint(model, path)
        restored = load_checkpoint(path)
        assert restored.param_count() == model.param_count()
