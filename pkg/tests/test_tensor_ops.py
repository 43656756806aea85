"""Forward-value checks for the tensor op set."""

import numpy as np
import pytest

from drivescape.errors import DegenerateNormalizationError, RankError, ShapeError
from drivescape.tensor import (
    Tensor,
    concat,
    feature_norm,
    no_grad,
    scaled_attention,
    unfold3x3,
)


def triple_loop_matmul(a, b):
    n, k = a.shape
    k2, m = b.shape
    assert k == k2
    out = np.zeros((n, m), dtype=a.dtype)
    for i in range(n):
        for j in range(m):
            s = 0.0
            for l in range(k):
                s += a[i, l] * b[l, j]
            out[i, j] = s
    return out


class TestMatmul:
    def test_against_triple_loop(self):
        rng = np.random.default_rng(7)
        for _ in range(5):
            a = rng.standard_normal((4, 6))
            b = rng.standard_normal((6, 3))
            got = Tensor(a).matmul(Tensor(b)).data
            want = triple_loop_matmul(a, b)
            np.testing.assert_allclose(got, want, rtol=0, atol=1e-12)

    def test_batched_broadcast(self):
        rng = np.random.default_rng(8)
        a = rng.standard_normal((2, 5, 3, 4))
        b = rng.standard_normal((4, 6))
        got = Tensor(a).matmul(Tensor(b)).data
        assert got.shape == (2, 5, 3, 6)
        np.testing.assert_allclose(got[1, 2], a[1, 2] @ b, atol=1e-12)

    def test_inner_dim_mismatch_reports_both_shapes(self):
        with pytest.raises(ShapeError) as ei:
            Tensor(np.ones((2, 3))).matmul(Tensor(np.ones((4, 2))))
        assert "(2, 3)" in str(ei.value) and "(4, 2)" in str(ei.value)

    def test_vector_operand_rejected(self):
        with pytest.raises(RankError):
            Tensor(np.ones(3)).matmul(Tensor(np.ones((3, 2))))


class TestElementwise:
    def test_silu_known_values(self):
        x = Tensor(np.array([0.0, -20.0]))
        y = x.silu().data
        assert y[0] == 0.0
        assert y[1] == pytest.approx(-20.0 / (1.0 + np.exp(20.0)), rel=1e-6)
        assert abs(y[1] + 4.1e-8) < 1e-8

    def test_silu_extreme_inputs_stay_finite(self):
        x = Tensor(np.array([-1e4, -100.0, 100.0, 1e4]))
        y = x.silu().data
        assert np.all(np.isfinite(y))
        assert y[2] == pytest.approx(100.0)

    def test_exp_overflow_clamped(self):
        y = Tensor(np.array([1000.0])).exp().data
        assert np.isfinite(y[0])

    def test_sigmoid_bounds(self):
        y = Tensor(np.array([-1e6, 0.0, 1e6])).sigmoid().data
        assert np.all(np.isfinite(y))
        assert y[1] == 0.5

    def test_pow_and_sqrt(self):
        x = Tensor(np.array([4.0, 9.0]))
        np.testing.assert_allclose(x.sqrt().data, [2.0, 3.0])
        np.testing.assert_allclose((x**2).data, [16.0, 81.0])


class TestSoftmax:
    def test_rows_sum_to_one(self):
        rng = np.random.default_rng(3)
        x = Tensor(rng.standard_normal((4, 7)) * 30)
        y = x.softmax(axis=-1).data
        np.testing.assert_allclose(y.sum(axis=-1), np.ones(4), atol=1e-12)

    def test_large_logits_no_overflow(self):
        x = Tensor(np.array([[1000.0, 1000.0, -1000.0]]))
        y = x.softmax(axis=-1).data
        np.testing.assert_allclose(y, [[0.5, 0.5, 0.0]], atol=1e-12)

    def test_uniform_logits(self):
        y = Tensor(np.zeros((2, 4))).softmax(axis=-1).data
        np.testing.assert_allclose(y, np.full((2, 4), 0.25))


class TestFeatureNorm:
    def test_zero_mean_unit_var(self):
        rng = np.random.default_rng(5)
        x = Tensor(rng.standard_normal((3, 8, 6)) * 4 + 2)
        y = feature_norm(x, stats_axes=(-2,)).data
        np.testing.assert_allclose(y.mean(axis=-2), 0.0, atol=1e-10)
        np.testing.assert_allclose(y.var(axis=-2), 1.0, atol=1e-3)

    def test_two_element_example(self):
        x = Tensor(np.array([[1.0], [3.0]]))
        y = feature_norm(x, stats_axes=(0,)).data
        np.testing.assert_allclose(y[:, 0], [-0.99999, 0.99999], rtol=1e-4)

    def test_single_element_rejected(self):
        with pytest.raises(DegenerateNormalizationError):
            feature_norm(Tensor(np.array([[1.0]])), stats_axes=(0,))

    def test_affine_applied(self):
        x = Tensor(np.array([[1.0, 2.0], [3.0, 4.0]]))
        g = Tensor(np.array([2.0, 2.0]))
        b = Tensor(np.array([1.0, 1.0]))
        y = feature_norm(x, g, b, stats_axes=(0,)).data
        base = feature_norm(x, stats_axes=(0,)).data
        np.testing.assert_allclose(y, base * 2 + 1)


class TestShapes:
    def test_reshape_transpose_roundtrip(self):
        rng = np.random.default_rng(11)
        a = rng.standard_normal((2, 3, 4))
        t = Tensor(a).transpose((2, 0, 1)).transpose((1, 2, 0)).data
        np.testing.assert_array_equal(t, a)

    def test_concat_and_getitem(self):
        a = Tensor(np.array([[1.0, 2.0]]))
        b = Tensor(np.array([[3.0, 4.0]]))
        c = concat([a, b], axis=0)
        np.testing.assert_array_equal(c.data, [[1, 2], [3, 4]])
        np.testing.assert_array_equal(c[1].data, [3, 4])

    def test_broadcast_to(self):
        x = Tensor(np.array([[1.0], [2.0]]))
        y = x.broadcast_to((2, 3)).data
        np.testing.assert_array_equal(y, [[1, 1, 1], [2, 2, 2]])

    def test_unfold3x3_center_and_edges(self):
        h, w, c = 3, 3, 1
        a = np.arange(9, dtype=np.float64).reshape(h, w, 1)
        u = unfold3x3(Tensor(a)).data
        # center cell sees the full 3x3 block in row-major order
        np.testing.assert_array_equal(u[1, 1], np.arange(9))
        # top-left corner is zero-padded above and to the left
        np.testing.assert_array_equal(u[0, 0], [0, 0, 0, 0, 0, 1, 0, 3, 4])


class TestAttention:
    def test_single_token_identity(self):
        q = Tensor(np.array([[1.0, 0.0]]))
        k = Tensor(np.array([[5.0, 5.0]]))
        v = Tensor(np.array([[2.0, 7.0]]))
        out = scaled_attention(q, k, v, heads=1).data
        np.testing.assert_allclose(out, [[2.0, 7.0]], atol=1e-12)

    def test_matches_manual_reference(self):
        rng = np.random.default_rng(13)
        q = rng.standard_normal((5, 8))
        k = rng.standard_normal((6, 8))
        v = rng.standard_normal((6, 8))
        got = scaled_attention(Tensor(q), Tensor(k), Tensor(v), heads=2).data
        dh = 4
        want = np.zeros((5, 8))
        for h in range(2):
            qs = q[:, h * dh : (h + 1) * dh]
            ks = k[:, h * dh : (h + 1) * dh]
            vs = v[:, h * dh : (h + 1) * dh]
            s = qs @ ks.T / np.sqrt(dh)
            e = np.exp(s - s.max(axis=-1, keepdims=True))
            w = e / e.sum(axis=-1, keepdims=True)
            want[:, h * dh : (h + 1) * dh] = w @ vs
        np.testing.assert_allclose(got, want, atol=1e-12)


class TestGradMode:
    def test_no_grad_suppresses_tape(self):
        x = Tensor(np.ones(3), requires_grad=True)
        with no_grad():
            y = (x * 2).sum()
        assert not y.requires_grad
        assert y._vjps == ()

    def test_no_grad_is_thread_local(self):
        import threading

        results = {}

        def worker():
            x = Tensor(np.ones(2), requires_grad=True)
            results["inner"] = (x * 3).sum().requires_grad

        with no_grad():
            t = threading.Thread(target=worker)
            t.start()
            t.join()
        assert results["inner"] is True

    def test_nonscalar_backward_rejected(self):
        x = Tensor(np.ones(3), requires_grad=True)
        with pytest.raises(RankError):
            (x * 2).backward()
