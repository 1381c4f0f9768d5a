import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pageorder.numcore import (
    DegenerateMaskError,
    ShapeError,
    Tensor,
    concat,
    embedding_lookup,
    grad_check,
    log_softmax,
    masked_fill,
    no_grad,
    softmax,
    stack,
)


def t64(arr, requires_grad=True):
    return Tensor(np.asarray(arr, dtype=np.float64), requires_grad=requires_grad)


class TestMatmul:
    def test_identity_times_anything(self):
        a = np.array([[2.0, -1.0], [0.5, 3.0]])
        out = Tensor(np.eye(2)) @ Tensor(a)
        assert np.allclose(out.data, a)

    def test_hand_product(self):
        out = Tensor(np.array([[1.0, 2.0], [3.0, 4.0]])) @ Tensor(np.array([[1.0], [1.0]]))
        assert np.array_equal(out.data, np.array([[3.0], [7.0]]))

    def test_zeros_annihilate(self):
        out = Tensor(np.zeros((2, 3))) @ Tensor(np.random.default_rng(0).normal(size=(3, 4)))
        assert np.array_equal(out.data, np.zeros((2, 4)))

    def test_dimension_mismatch(self):
        with pytest.raises(ShapeError):
            Tensor(np.zeros((2, 3))) @ Tensor(np.zeros((2, 3)))

    def test_gradients_flow_to_both_sides(self):
        a = t64([[1.0, 2.0], [3.0, 4.0]])
        b = t64([[1.0], [1.0]])
        (a @ b).sum().backward()
        assert np.allclose(a.grad, np.ones((2, 2)))
        assert np.allclose(b.grad, np.array([[4.0], [6.0]]))

    def test_batched_against_per_item(self):
        rng = np.random.default_rng(1)
        a = rng.normal(size=(3, 4, 5))
        w = rng.normal(size=(5, 2))
        out = Tensor(a) @ Tensor(w)
        for i in range(3):
            assert np.allclose(out.data[i], a[i] @ w)

    def test_shared_weight_gradient_sums_over_batch(self):
        rng = np.random.default_rng(2)
        a = t64(rng.normal(size=(3, 4, 5)))
        w = t64(rng.normal(size=(5, 2)))
        (a @ w).sum().backward()
        expected = sum(a.data[i].T @ np.ones((4, 2)) for i in range(3))
        assert np.allclose(w.grad, expected)


class TestSoftmax:
    def test_uniform_on_equal_logits(self):
        out = softmax(Tensor(np.zeros(3)))
        assert np.allclose(out.data, np.full(3, 1.0 / 3.0))

    def test_no_overflow_on_huge_logits(self):
        out = softmax(Tensor(np.array([1000.0, 0.0])))
        assert np.isfinite(out.data).all()
        assert out.data[0] == pytest.approx(1.0)
        assert out.data[1] == pytest.approx(0.0, abs=1e-30)

    def test_single_survivor_mask(self):
        out = softmax(Tensor(np.array([3.0, 5.0])), mask=np.array([True, False]))
        assert out.data[0] == 1.0
        assert out.data[1] == 0.0

    def test_fully_masked_row_rejected(self):
        with pytest.raises(DegenerateMaskError):
            softmax(Tensor(np.zeros((2, 3))), mask=np.array([[True, True, True], [False, False, False]]))

    @given(st.lists(st.floats(-30, 30), min_size=2, max_size=8))
    @settings(max_examples=50, deadline=None)
    def test_rows_sum_to_one(self, logits):
        out = softmax(Tensor(np.array(logits, dtype=np.float32)))
        assert abs(out.data.sum() - 1.0) < 1e-6

    def test_masked_entries_exactly_zero(self):
        x = Tensor(np.random.default_rng(3).normal(size=(4, 6)).astype(np.float32))
        mask = np.random.default_rng(4).random((4, 6)) > 0.4
        mask[:, 0] = True
        out = softmax(x, mask=mask)
        assert (out.data[~mask] == 0.0).all()
        assert np.allclose(out.data.sum(axis=-1), 1.0, atol=1e-6)


class TestElementwiseGradients:
    """Every primitive's backward pass against central differences."""

    @pytest.mark.parametrize(
        "fn",
        [
            lambda x: (x * x).sum(),
            lambda x: (x + 2.0 * x).mean(),
            lambda x: (x - x * 0.3).sum(),
            lambda x: x.tanh().sum(),
            lambda x: x.sigmoid().sum(),
            lambda x: (x * x + 0.5).log().sum(),
            lambda x: x.exp().mean(),
            lambda x: x.relu().sum(),
            lambda x: x.softplus().sum(),
            lambda x: (x ** 3.0).sum(),
            lambda x: x.reshape(6).sum(),
            lambda x: x.transpose((1, 0)).sum(axis=0).sum(),
            lambda x: x[1:, :].sum(),
            lambda x: softmax(x).sum(axis=-1).mean() + (softmax(x) * softmax(x)).sum(),
            lambda x: (log_softmax(x) * 0.25).sum(),
            lambda x: masked_fill(x, np.array([[True, False, False], [False, False, True]]), 0.0).sum(),
        ],
    )
    def test_against_finite_differences(self, fn):
        x = t64(np.random.default_rng(5).normal(size=(2, 3)))
        report = grad_check(lambda: fn(x), [("x", x)], epsilon=1e-6, tolerance=1e-7)
        assert report.passed, report.summary()

    def test_concat_and_stack_gradients(self):
        a = t64(np.random.default_rng(6).normal(size=(2, 3)))
        b = t64(np.random.default_rng(7).normal(size=(2, 3)))

        def f():
            return (concat([a, b], axis=-1) * 0.5).sum() + (stack([a, b], axis=0) ** 2.0).sum()

        report = grad_check(f, [("a", a), ("b", b)], epsilon=1e-6, tolerance=1e-7)
        assert report.passed, report.summary()

    def test_embedding_lookup_gradient_scatters(self):
        table = t64(np.random.default_rng(8).normal(size=(5, 3)))
        idx = np.array([0, 2, 2, 4])
        out = embedding_lookup(table, idx)
        out.sum().backward()
        expected = np.zeros((5, 3))
        for i in idx:
            expected[i] += 1.0
        assert np.allclose(table.grad, expected)


class TestGraphMechanics:
    def test_no_grad_blocks_recording(self):
        x = t64([1.0, 2.0])
        with no_grad():
            y = (x * 3.0).sum()
        assert not y.requires_grad
        assert y._backward is None

    def test_gradient_accumulates_across_uses(self):
        x = t64([2.0])
        y = x * 3.0 + x * 4.0
        y.sum().backward()
        assert np.allclose(x.grad, [7.0])

    def test_backward_requires_scalar(self):
        x = t64([1.0, 2.0])
        with pytest.raises(ShapeError):
            (x * 2.0).backward()

    def test_values_stay_finite(self):
        x = Tensor(np.array([60.0, -60.0], dtype=np.float32), requires_grad=True)
        for out in (x.sigmoid(), x.softplus(), softmax(x), x.tanh()):
            assert np.isfinite(out.data).all()
