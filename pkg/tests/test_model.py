import numpy as np
import pytest

from npmixer import checkpoint
from npmixer import tensor as T
from npmixer.errors import ConfigurationError, DimensionError, StateError
from npmixer.model import (ModelConfig, NPMixer, RevIN, build_variant, count_params_flops,
                           create_model, final_projection)
from npmixer.tensor import Tensor

from gradcheck import check

TINY = dict(channels=1, lookback=4, horizon=2, patch_size=2, wavelet_levels=1, wavelet="db1",
            d_model=2, d_ff=2, e_layers=1, n_heads=1, mp_depth=2, dropout=0.0)


def small(**kw):
    base = dict(channels=3, lookback=16, horizon=8, patch_size=4, wavelet_levels=2, wavelet="db2",
                d_model=8, d_ff=16, e_layers=1, dropout=0.0, seed=3)
    base.update(kw)
    return ModelConfig(**base)


def linear(n_in, n_out):
    return n_in * n_out + n_out


def closed_form_params(C, L, H, P, M, F, d, dff, layers, depth):
    """Hand enumeration, one term per weight matrix or vector."""
    revin = 2 * C
    filters = 4 * F
    layer = 4 * linear(d, d) + 2 * (2 * d) + linear(d, dff) + linear(dff, d)
    encoder = linear(L, d) + layers * layer + linear(d, L)
    N = -(-L // P)
    sp = linear(P, min(dff, 4 * P)) + linear(min(dff, 4 * P), P)
    hierarchy = 0
    for k in range(int(np.floor(np.log2(N))) if N > 1 else 0):
        S = 2 ** k * P
        hierarchy += linear(2 * S, S) + (depth - 1) * linear(S, S) + 1
    branches = (M + 1) * (sp + hierarchy)
    projection = linear(L, L) + linear(L, H)
    return revin + filters + M * encoder + branches + projection


def test_tiny_parameter_count_by_hand():
    # revin 2 + filters 8 + encoder 66 + two branches of 29 + projection 30
    model = NPMixer(ModelConfig(**TINY))
    assert model.num_parameters() == 164
    assert closed_form_params(1, 4, 2, 2, 1, 2, 2, 2, 1, 2) == 164


@pytest.mark.parametrize("kw", [
    dict(), dict(wavelet_levels=3, patch_size=3), dict(e_layers=2, d_ff=40), dict(lookback=20)])
def test_closed_form_matches_other_configs(kw):
    cfg = small(**kw)
    F = len(NPMixer(cfg).bank.h0.data)
    expect = closed_form_params(cfg.channels, cfg.lookback, cfg.horizon, cfg.patch_size,
                                cfg.wavelet_levels, F, cfg.d_model, cfg.d_ff, cfg.e_layers,
                                cfg.mp_depth)
    assert NPMixer(cfg).num_parameters() == expect


def test_every_parameter_counted_once_and_saved_once(tmp_path):
    model = NPMixer(small())
    names = [n for n, _ in model.named_parameters()]
    assert len(names) == len(set(names))
    assert len({id(p) for p in model.parameters()}) == len(names)
    checkpoint.save(tmp_path / "m.ckpt", model)
    _, meta, _ = checkpoint.read(tmp_path / "m.ckpt")
    saved = [e["name"] for e in meta["tensors"]]
    assert len(saved) == len(set(saved))
    assert set(names) <= set(saved)


def test_doubling_d_ff_grows_count():
    assert NPMixer(small(d_ff=32)).num_parameters() > NPMixer(small()).num_parameters()


def test_flops_scale_with_batch_and_are_stable():
    model = NPMixer(small())
    one = count_params_flops(model, 1)
    assert count_params_flops(model, 1) == one
    four = count_params_flops(model, 4)
    assert four["flops"] == 4 * one["flops"]
    assert four["param_count"] == one["param_count"]


# -- forward contracts ---------------------------------------------------------------

@pytest.mark.parametrize("flags", [{}, {"no_swt": True}, {"fixed_swt": True},
                                   {"no_neighboring_mixer": True}, {"no_channel_encoder": True}])
def test_output_shape_for_every_variant(flags, rng):
    model = build_variant(small(), **flags)
    assert model(rng.standard_normal((3, 16))).shape == (3, 8)
    assert model(rng.standard_normal((5, 3, 16))).shape == (5, 3, 8)


def test_wrong_input_shape():
    with pytest.raises(DimensionError):
        NPMixer(small())(np.zeros((3, 15)))


def test_conflicting_flags():
    with pytest.raises(ConfigurationError):
        build_variant(small(), no_swt=True, fixed_swt=True)
    with pytest.raises(ConfigurationError):
        build_variant(small(), no_attention=True)


def test_fixed_swt_filters_get_no_gradient(rng):
    model = build_variant(small(), fixed_swt=True)
    T.backward(T.tsum(T.square(model(rng.standard_normal((2, 3, 16)), training=True))))
    for f in (model.bank.h0, model.bank.h1, model.bank.g0, model.bank.g1):
        assert not f.requires_grad
        assert f.grad is None or not np.any(f.grad)


def test_no_neighboring_mixer_is_smaller():
    assert (build_variant(small(), no_neighboring_mixer=True).num_parameters()
            < NPMixer(small()).num_parameters())


def test_no_swt_has_single_branch_and_no_encoder():
    m = build_variant(small(), no_swt=True)
    assert m.bank is None and m.encoders == [] and len(m.branches) == 1


def zero_residual_updates(model):
    for enc in model.encoders:
        enc.project.zero_()
    for br in model.branches:
        br.sp.mlp.layers[-1].zero_()
        if br.hierarchy is not None:
            for lvl in br.hierarchy.levels:
                lvl.mlp.layers[-1].zero_()
    model.projection.gate.zero_()


@pytest.mark.parametrize("wavelet", ["db1", "db4", "bior3.1"])
def test_zeroed_residuals_reduce_to_affine_map(wavelet, rng):
    model = NPMixer(small(wavelet=wavelet))
    zero_residual_updates(model)
    model.revin.weight.data[...] = rng.uniform(0.5, 2.0, 3)
    model.revin.bias.data[...] = rng.standard_normal(3)
    x = rng.standard_normal((3, 16)) * 4 + 2
    y = model(x, training=False).data
    mu = x.mean(-1, keepdims=True)
    sd = np.sqrt(x.var(-1, keepdims=True) + 1e-5)
    w, b = model.revin.weight.data[:, None], model.revin.bias.data[:, None]
    xn = (x - mu) / sd * w + b
    proj = xn @ model.projection.out.weight.data + model.projection.out.bias.data
    np.testing.assert_allclose(y, (proj - b) / w * sd + mu, atol=1e-10)


def test_mean_persistence_with_identity_core(rng):
    model = NPMixer(small())
    zero_residual_updates(model)
    model.projection.out.weight.data[...] = 1.0 / 16
    model.projection.out.bias.data[...] = 0.0
    x = rng.standard_normal((3, 16)) + rng.standard_normal((3, 1)) * 5
    y = model(x, training=False).data
    np.testing.assert_allclose(y, np.repeat(x.mean(-1, keepdims=True), 8, axis=1), atol=1e-10)


def test_level_shift_moves_forecast(rng):
    model = NPMixer(small())
    x = rng.standard_normal((3, 16))
    shifted = x.copy()
    shifted[1] += 7.5
    a, b = model(x, training=False).data, model(shifted, training=False).data
    np.testing.assert_allclose(b[1] - a[1], 7.5, atol=1e-10)
    np.testing.assert_allclose(b[[0, 2]], a[[0, 2]], atol=1e-12)


# -- revin and projection ---------------------------------------------------------------

def test_revin_round_trip(rng):
    rev = RevIN(4)
    x = Tensor(rng.standard_normal((2, 4, 30)) * 10 + 3)
    n = rev.norm(x)
    np.testing.assert_allclose(n.data.mean(-1), 0.0, atol=1e-12)
    np.testing.assert_allclose(rev.denorm(n).data, x.data, atol=1e-10)


def test_revin_constant_channel():
    rev = RevIN(2)
    rev.bias.data[...] = [0.25, -1.0]
    x = Tensor(np.array([[5.0] * 6, [-2.0] * 6]))
    n = rev.norm(x)
    np.testing.assert_array_equal(n.data, [[0.25] * 6, [-1.0] * 6])
    np.testing.assert_allclose(rev.denorm(n).data, x.data, atol=1e-12)
    assert np.all(rev.std >= np.sqrt(1e-5))


def test_revin_denorm_before_norm():
    with pytest.raises(StateError):
        RevIN(2).denorm(Tensor(np.zeros((2, 3))))


def test_projection_with_disabled_bottleneck(rng):
    x = rng.standard_normal((3, 4))
    W_out, b_out = rng.standard_normal((4, 2)), rng.standard_normal(2)
    y = final_projection(x, np.zeros((4, 4)), np.zeros(4), W_out, b_out).data
    np.testing.assert_allclose(y, x @ W_out + b_out, atol=1e-14)


def test_projection_gradients(rng):
    x = Tensor(rng.standard_normal((3, 4)), requires_grad=True)
    ws = [Tensor(rng.standard_normal(s), requires_grad=True) for s in ((4, 4), (4,), (4, 2), (2,))]
    w = rng.standard_normal((3, 2))
    assert check(lambda: T.tsum(T.mul(final_projection(x, *ws), w)), [x, *ws]) < 1e-4


def test_projection_shape_error():
    with pytest.raises(DimensionError):
        final_projection(np.ones((2, 4)), np.ones((3, 3)), np.ones(3), np.ones((4, 2)), np.ones(2))


# -- gradients, determinism, persistence --------------------------------------------------

def tiny_grad_model(seed=0):
    cfg = ModelConfig(channels=2, lookback=8, horizon=4, patch_size=2, wavelet_levels=1,
                      wavelet="db2", d_model=4, d_ff=8, e_layers=1, dropout=0.0, seed=seed)
    model = NPMixer(cfg)
    for br in model.branches:
        for lvl in br.hierarchy.levels:
            lvl.gate.data[...] = np.random.default_rng(seed).normal()
    return model


def test_end_to_end_finite_differences(rng):
    model = tiny_grad_model()
    x = rng.standard_normal((3, 2, 8))
    w = rng.standard_normal((3, 2, 4))
    err = check(lambda: T.tsum(T.mul(model(x, training=False), w)), model.parameters())
    assert err < 1e-4


def test_same_seed_same_outputs(rng):
    x = rng.standard_normal((2, 3, 16))
    a = NPMixer(small(seed=9))(x).data
    b = NPMixer(small(seed=9))(x).data
    c = NPMixer(small(seed=10))(x).data
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)


def test_checkpoint_round_trip_is_bit_exact(tmp_path, rng):
    model = NPMixer(small(dropout=0.2))
    x = rng.standard_normal((2, 3, 16))
    for p in model.parameters():
        p.data += rng.normal(scale=0.01, size=p.shape)
    before = model(x, training=False).data
    checkpoint.save(tmp_path / "a.ckpt", model, extra={"note": "x"})
    loaded, meta = checkpoint.load(tmp_path / "a.ckpt", expect=small(dropout=0.2))
    np.testing.assert_array_equal(loaded(x, training=False).data, before)
    assert meta["extra"] == {"note": "x"}
    # rng state survives too, so training-mode dropout draws match
    np.testing.assert_array_equal(loaded(x, training=True).data, model(x, training=True).data)


def test_float32_model_round_trip(tmp_path, rng):
    model = create_model(small(precision="float32"))
    assert model.revin.weight.data.dtype == np.float32
    checkpoint.save(tmp_path / "f.ckpt", model)
    loaded, _ = checkpoint.load(tmp_path / "f.ckpt")
    x = rng.standard_normal((3, 16)).astype(np.float32)
    with T.no_grad():
        T.set_default_dtype(np.float32)
        np.testing.assert_array_equal(loaded(x).data, model(x).data)


def test_checkpoint_rejects_bad_magic_and_mismatch(tmp_path):
    path = tmp_path / "b.ckpt"
    checkpoint.save(path, NPMixer(small()))
    with pytest.raises(checkpoint.CheckpointError):
        checkpoint.load(path, expect=small(d_model=16))
    raw = bytearray(path.read_bytes())
    raw[:8] = b"GARBAGE!"
    path.write_bytes(bytes(raw))
    with pytest.raises(checkpoint.CheckpointError, match="magic"):
        checkpoint.read(path)


def test_truncated_checkpoint(tmp_path):
    path = tmp_path / "t.ckpt"
    checkpoint.save(path, NPMixer(small()))
    path.write_bytes(path.read_bytes()[:-40])
    with pytest.raises(checkpoint.CheckpointError):
        checkpoint.read(path)
