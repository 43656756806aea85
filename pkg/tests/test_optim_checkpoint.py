"""Optimizer trace oracle and checkpoint round-trip."""

import numpy as np
import pytest

from drivescape.errors import CheckpointError
from drivescape.tensor import (
    AdamW,
    Linear,
    Module,
    ModuleList,
    Parameter,
    Tensor,
    load_checkpoint,
    save_checkpoint,
)


def scalar_adamw_reference(p0, grads, lr, b1, b2, eps, wd, mult=1.0):
    """Hand-stepped AdamW on a single scalar."""
    p, m, v = p0, 0.0, 0.0
    trace = []
    for t, g in enumerate(grads, start=1):
        m = b1 * m + (1 - b1) * g
        v = b2 * v + (1 - b2) * g * g
        mhat = m / (1 - b1**t)
        vhat = v / (1 - b2**t)
        p = p - lr * mult * (mhat / (np.sqrt(vhat) + eps) + wd * p)
        trace.append(p)
    return trace


class TestAdamW:
    def test_matches_scalar_reference(self):
        rng = np.random.default_rng(11)
        grads = rng.standard_normal(3)
        p = Parameter(np.array([0.7]))
        opt = AdamW({"p": p}, lr=0.05, weight_decay=0.01)
        want = scalar_adamw_reference(0.7, grads, 0.05, 0.9, 0.999, 1e-8, 0.01)
        for g, ref in zip(grads, want):
            p.grad = np.array([g])
            opt.step()
            assert p.data[0] == pytest.approx(ref, rel=1e-12)

    def test_lr_multiplier_scales_update(self):
        rng = np.random.default_rng(11)
        grads = rng.standard_normal(3)
        p = Parameter(np.array([0.7]), lr_multiplier=10.0)
        opt = AdamW({"p": p}, lr=0.05, weight_decay=0.01)
        want = scalar_adamw_reference(
            0.7, grads, 0.05, 0.9, 0.999, 1e-8, 0.01, mult=10.0
        )
        for g, ref in zip(grads, want):
            p.grad = np.array([g])
            opt.step()
            assert p.data[0] == pytest.approx(ref, rel=1e-12)

    def test_zero_grad_param_untouched(self):
        p = Parameter(np.array([1.0]))
        q = Parameter(np.array([1.0]))
        opt = AdamW({"p": p, "q": q}, lr=0.1)
        p.grad = np.array([1.0])
        opt.step()
        assert q.data[0] == 1.0
        assert p.data[0] != 1.0

    def test_decay_is_decoupled(self):
        # with zero gradient moments stay zero, only decay applies
        p = Parameter(np.array([2.0]))
        opt = AdamW({"p": p}, lr=0.1, weight_decay=0.5)
        p.grad = np.array([0.0])
        opt.step()
        assert p.data[0] == pytest.approx(2.0 * (1 - 0.1 * 0.5))


class TinyNet(Module):
    def __init__(self, rng):
        super().__init__()
        self.inp = Linear(3, 4, rng)
        self.blocks = ModuleList([Linear(4, 4, rng) for _ in range(2)])
        self.out = Linear(4, 1, rng, zero_init=True, lr_multiplier=10.0)

    def __call__(self, x):
        h = self.inp(x).silu()
        for b in self.blocks:
            h = b(h).silu()
        return self.out(h)


class TestModuleNaming:
    def test_dotted_names(self):
        net = TinyNet(np.random.default_rng(0))
        names = set(net.parameters_dict())
        assert "inp.weight" in names
        assert "blocks.0.weight" in names
        assert "blocks.1.bias" in names
        assert "out.weight" in names

    def test_zero_init_output_layer(self):
        net = TinyNet(np.random.default_rng(0))
        assert np.all(net.out.weight.data == 0.0)
        assert net.out.weight.lr_multiplier == 10.0
        assert net.inp.weight.lr_multiplier == 1.0

    def test_aliased_parameter_rejected(self):
        net = TinyNet(np.random.default_rng(0))
        net.alias = net.inp.weight
        with pytest.raises(Exception):
            net.parameters_dict()


class TestCheckpoint:
    def test_roundtrip_bit_exact(self, tmp_path):
        rng = np.random.default_rng(21)
        arrays = {
            "a.weight": rng.standard_normal((4, 3)).astype(np.float32),
            "b.bias": rng.standard_normal(7).astype(np.float32),
            "c.scale": rng.standard_normal((2, 2, 2)),
        }
        path = tmp_path / "net.ckpt"
        save_checkpoint(path, arrays, manifest={"step": 5, "note": "x"})
        loaded, manifest = load_checkpoint(path)
        assert manifest == {"step": 5, "note": "x"}
        for k, v in arrays.items():
            assert loaded[k].dtype == v.dtype
            np.testing.assert_array_equal(loaded[k], v)

    def test_rewrite_is_byte_identical(self, tmp_path):
        rng = np.random.default_rng(22)
        arrays = {"w": rng.standard_normal((5, 5)).astype(np.float32)}
        p1 = tmp_path / "a.ckpt"
        p2 = tmp_path / "b.ckpt"
        save_checkpoint(p1, arrays, manifest={"k": 1})
        loaded, man = load_checkpoint(p1)
        save_checkpoint(p2, loaded, manifest=man)
        assert p1.read_bytes() == p2.read_bytes()

    def test_truncated_file_rejected(self, tmp_path):
        path = tmp_path / "t.ckpt"
        save_checkpoint(path, {"w": np.ones(4, dtype=np.float32)})
        data = path.read_bytes()
        path.write_bytes(data[:-8])
        with pytest.raises(CheckpointError):
            load_checkpoint(path)

    def test_bad_version_rejected(self, tmp_path):
        import json
        import struct

        header = json.dumps(
            {"format_version": 999, "manifest": {}, "tensors": []}
        ).encode()
        path = tmp_path / "v.ckpt"
        path.write_bytes(struct.pack("<Q", len(header)) + header)
        with pytest.raises(CheckpointError) as ei:
            load_checkpoint(path)
        assert "format_version" in str(ei.value)

    def test_optimizer_state_roundtrip(self, tmp_path):
        rng = np.random.default_rng(23)
        net = TinyNet(rng)
        params = net.parameters_dict()
        opt = AdamW(params, lr=0.01)
        x = Tensor(rng.standard_normal((2, 3)))
        for _ in range(3):
            net.zero_grad()
            (net(x) ** 2).sum().backward()
            opt.step()
        state = dict(net.state_arrays())
        state.update(opt.state_arrays())
        path = tmp_path / "opt.ckpt"
        save_checkpoint(path, state)
        arrays, _ = load_checkpoint(path)

        net2 = TinyNet(np.random.default_rng(99))
        net2.load_state_arrays(arrays)
        opt2 = AdamW(net2.parameters_dict(), lr=0.01)
        opt2.load_state_arrays(arrays)
        assert opt2.step_count == 3
        for k in params:
            np.testing.assert_allclose(
                net2.parameters_dict()[k].data, params[k].data, atol=1e-7
            )
            np.testing.assert_allclose(opt2.m[k], opt.m[k], atol=1e-7)
