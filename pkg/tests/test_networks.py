import math

import pytest
import torch
import torch.nn.functional as F

from conftest import random_complex, tiny_model
from exceptions import InvalidArgumentError, InvalidConfigurationError, ShapeMismatchError, VariantMismatchError
from Networks.cascade import DCCNN, DPOCSENSE, ModelConfig, dccnn_forward, dpocsense_forward
from Networks.data_consistency import DcParam, dc_combined, dc_percoil
from Networks.denoiser import Subnet, conv2d_dilated, init_params, layer_dilations, subnet_forward
from Operators.coils import simulate_sensitivities
from Operators.encoding import adjoint_op, forward_op
from Operators.fourier import fft2c, ifft2c
from Operators.sampling import SamplingMask, apply_mask, generate_mask


def zero_weights(model):
    with torch.no_grad():
        for subnet in model.subnets:
            for layer in subnet.layers:
                layer.weight.zero_()
                layer.bias.zero_()


def scripted_subnet(x, subnet):
    """Layer-by-layer replay of a sub-network on a complex stack (B, n, H, W)."""
    features = torch.stack([x.real, x.imag], dim=2).flatten(1, 2)
    hidden = features
    last = len(subnet.layers) - 1
    for index, layer in enumerate(subnet.layers):
        dilation = 1 if index in (0, last) else subnet.dilation
        hidden = F.conv2d(hidden, layer.weight, layer.bias, padding=dilation, dilation=dilation)
        if index < last:
            hidden = torch.relu(hidden)
    out = features + hidden
    return torch.complex(out[:, 0::2], out[:, 1::2])


def scripted_blend(s_cnn, s_0, mask, lam):
    rows = torch.tensor([line in mask.sampled_lines for line in range(s_cnn.shape[-2])])[:, None]
    return torch.where(rows, lam * s_cnn + (1 - lam) * s_0, s_cnn)


class TestDataConsistency:
    def test_blend_arithmetic(self):
        s_cnn = torch.full((1, 2, 2), 4 + 0j, dtype=torch.complex128)
        s_0 = torch.full((1, 2, 2), 8 + 0j, dtype=torch.complex128)
        out = dc_percoil(s_cnn, s_0, SamplingMask(2, 2, [0]), 0.25)
        assert torch.equal(out[0, 0], torch.full((2,), 7 + 0j, dtype=torch.complex128))
        assert torch.equal(out[0, 1], s_cnn[0, 1])

    def test_hard_and_identity_weights(self):
        s_cnn, s_0 = random_complex((3, 8, 8), seed=1), random_complex((3, 8, 8), seed=2)
        mask = generate_mask(8, 8, 2, 4, seed=0)
        s_0 = apply_mask(s_0, mask)
        hard = dc_percoil(s_cnn, s_0, mask, 0.0)
        assert torch.equal(apply_mask(hard, mask), s_0)
        assert torch.equal(dc_percoil(s_cnn, s_0, mask, 1.0), s_cnn)

    def test_unsampled_entries_keep_network_estimate(self):
        s_cnn, s_0 = random_complex((2, 8, 8), seed=3), random_complex((2, 8, 8), seed=4)
        mask = generate_mask(8, 8, 2, 4, seed=1)
        out = dc_percoil(s_cnn, s_0, mask, 0.3)
        unsampled = [line for line in range(8) if line not in mask.sampled_lines]
        assert torch.equal(out[:, unsampled], s_cnn[:, unsampled])

    def test_lambda_out_of_range(self):
        s = torch.zeros(1, 4, 4, dtype=torch.complex128)
        with pytest.raises(InvalidArgumentError):
            dc_percoil(s, s, SamplingMask.full(4, 4), 1.5)
        with pytest.raises(InvalidArgumentError):
            DcParam(0.0, trainable=True)

    def test_shape_mismatch(self):
        with pytest.raises(ShapeMismatchError):
            dc_percoil(torch.zeros(2, 4, 4, dtype=torch.complex128), torch.zeros(3, 4, 4, dtype=torch.complex128),
                       SamplingMask.full(4, 4), 0.5)

    def test_combined_trace_is_consistent(self):
        maps = simulate_sensitivities(8, 8, 3, seed=2)
        mask = generate_mask(8, 8, 2, 4, seed=3)
        s_0 = apply_mask(random_complex((3, 8, 8), seed=5), mask)
        trace = []
        out = dc_combined(random_complex((8, 8), seed=6), s_0, maps, mask, 0.0, trace)
        assert out.shape == (8, 8) and len(trace) == 1
        assert torch.equal(apply_mask(trace[0], mask), s_0)

    def test_combined_limits(self):
        maps = simulate_sensitivities(8, 8, 3, seed=2)
        mask = generate_mask(8, 8, 2, 4, seed=3)
        s_0 = apply_mask(random_complex((3, 8, 8), seed=5), mask)
        x_cnn = random_complex((8, 8), seed=6)
        support = maps.support

        nothing_acquired = dc_combined(x_cnn, torch.zeros_like(s_0), maps, SamplingMask.empty(8, 8), 0.4)
        assert torch.allclose(nothing_acquired[support], x_cnn[support], atol=1e-12)

        trust_network = dc_combined(x_cnn, s_0, maps, mask, 1.0)
        assert torch.allclose(trust_network[support], x_cnn[support], atol=1e-12)

        no_network = dc_combined(torch.zeros(8, 8, dtype=torch.complex128), s_0, maps, mask, 0.0)
        assert torch.allclose(no_network, adjoint_op(s_0, maps, mask), atol=1e-14)

    def test_hard_consistency_is_idempotent(self):
        mask = generate_mask(8, 8, 2, 4, seed=2)
        s_0 = apply_mask(random_complex((2, 8, 8), seed=3), mask)
        once = dc_percoil(random_complex((2, 8, 8), seed=4), s_0, mask, 0.0)
        assert torch.equal(dc_percoil(once, s_0, mask, 0.0), once)

    def test_gradient_is_lambda_on_sampled_rows(self):
        mask = generate_mask(8, 8, 2, 4, seed=1)
        start = random_complex((2, 8, 8), seed=7)
        re = start.real.clone().requires_grad_(True)
        im = start.imag.clone().requires_grad_(True)
        s_0 = apply_mask(random_complex((2, 8, 8), seed=8), mask)

        out = dc_percoil(torch.complex(re, im), s_0, mask, 0.3)
        grad_re, grad_im = torch.autograd.grad(out.real.sum() + out.imag.sum(), (re, im))

        rows = torch.tensor([line in mask.sampled_lines for line in range(8)])[:, None]
        expected = torch.where(rows, torch.tensor(0.3, dtype=torch.float64),
                               torch.tensor(1.0, dtype=torch.float64)).expand(2, 8, 8)
        assert torch.allclose(grad_re, expected, rtol=0, atol=1e-15)
        assert torch.allclose(grad_im, expected, rtol=0, atol=1e-15)

    def test_dc_param_sigmoid(self):
        param = DcParam(0.05)
        assert math.isclose(param.lambda_value, 0.05, rel_tol=1e-12)
        with torch.no_grad():
            param.raw.fill_(80.0)
        assert 0.0 < param.lambda_value <= 1.0
        fixed = DcParam(0.0, trainable=False)
        assert fixed.lambda_value == 0.0 and not list(fixed.parameters())


class TestDenoiser:
    def test_conv_matches_loop(self):
        generator = torch.Generator().manual_seed(0)
        x = torch.randn(1, 2, 7, 6, generator=generator, dtype=torch.float64)
        kernel = torch.randn(3, 2, 3, 3, generator=generator, dtype=torch.float64)
        bias = torch.randn(3, generator=generator, dtype=torch.float64)
        out = conv2d_dilated(x, kernel, bias, dilation=2)
        assert out.shape == (1, 3, 7, 6)
        for o in range(3):
            for i in range(7):
                for j in range(6):
                    total = float(bias[o])
                    for c in range(2):
                        for u in range(3):
                            for v in range(3):
                                y, z = i + 2 * (u - 1), j + 2 * (v - 1)
                                if 0 <= y < 7 and 0 <= z < 6:
                                    total += float(kernel[o, c, u, v] * x[0, c, y, z])
                    assert abs(float(out[0, o, i, j]) - total) < 1e-12

    def test_conv_rejects_bad_shapes(self):
        x = torch.zeros(1, 2, 5, 5, dtype=torch.float64)
        with pytest.raises(ShapeMismatchError):
            conv2d_dilated(x, torch.zeros(1, 3, 3, 3, dtype=torch.float64), torch.zeros(1, dtype=torch.float64), 1)
        with pytest.raises(InvalidArgumentError):
            conv2d_dilated(x, torch.zeros(1, 2, 2, 2, dtype=torch.float64), torch.zeros(1, dtype=torch.float64), 1)

    def test_layer_dilations(self):
        assert layer_dilations(5, 2) == [1, 2, 2, 2, 1]
        assert layer_dilations(1, 2) == [1]

    def test_zero_weights_are_identity(self):
        subnet = Subnet(3, 4, 2)
        with torch.no_grad():
            for layer in subnet.layers:
                layer.weight.zero_()
                layer.bias.zero_()
        x = random_complex((2, 6, 6), seed=1)
        assert torch.equal(subnet(x), x)

    def test_init_is_seeded_and_he_scaled(self):
        first, second = init_params(3, 64, 1, 2, seed=4), init_params(3, 64, 1, 2, seed=4)
        for a, b in zip(first.layers, second.layers):
            assert torch.equal(a.weight, b.weight)
            assert torch.count_nonzero(a.bias) == 0
        hidden = first.layers[1].weight
        assert abs(float(hidden.std()) - math.sqrt(2.0 / (64 * 9))) < 0.01

    def test_batched_and_unbatched_agree(self):
        subnet = init_params(2, 4, 2, 2, seed=1)
        x = random_complex((3, 2, 6, 6), seed=2)
        assert torch.allclose(subnet(x)[1], subnet(x[1]), atol=1e-14)

    def test_wrong_image_count(self):
        with pytest.raises(ShapeMismatchError):
            init_params(2, 4, 2, 2, seed=1)(random_complex((3, 6, 6), seed=2))

    def test_forward_matches_layer_replay(self):
        params = init_params(3, 4, 2, 2, seed=6)
        generator = torch.Generator().manual_seed(7)
        with torch.no_grad():
            for layer in params.layers:
                layer.bias.copy_(torch.randn(layer.bias.shape, generator=generator, dtype=torch.float64))
            x = random_complex((2, 4, 4), seed=8)
            expected = scripted_subnet(x.unsqueeze(0), params)[0]
            assert torch.allclose(subnet_forward(x, params), expected, atol=1e-12)

    def test_single_layer(self):
        params = init_params(1, 4, 2, 2, seed=0)
        assert len(params.layers) == 1
        assert tuple(params.layers[0].weight.shape) == (4, 4, 3, 3)
        assert params.layers[0].dilation == (1, 1)
        with torch.no_grad():
            x = random_complex((1, 2, 5, 5), seed=1)
            assert torch.allclose(params(x), scripted_subnet(x, params), atol=1e-12)


class TestCascade:
    def test_config_validation(self):
        with pytest.raises(InvalidConfigurationError):
            ModelConfig(variant="unet").validate()
        with pytest.raises(InvalidConfigurationError):
            ModelConfig(n_c=0).validate()
        assert ModelConfig.full_scale().n_filters == 64

    def test_dccnn_hard_consistency(self):
        model = tiny_model(DCCNN, n_coil=3, lambda_init=0.0, lambda_trainable=False)
        mask = generate_mask(8, 8, 2, 4, seed=2)
        s_0 = apply_mask(random_complex((3, 8, 8), seed=3), mask)
        trace = []
        out = model(s_0, mask, trace=trace)
        assert len(trace) == model.n_c
        assert torch.allclose(apply_mask(fft2c(out), mask), s_0, rtol=0, atol=1e-6 * float(s_0.abs().max()))
        assert torch.equal(apply_mask(trace[-1], mask), s_0)

    def test_dpocsense_hard_consistency_before_recombination(self):
        model = tiny_model(DPOCSENSE, n_coil=3, lambda_init=0.0, lambda_trainable=False)
        maps = simulate_sensitivities(8, 8, 3, seed=1)
        mask = generate_mask(8, 8, 2, 4, seed=2)
        s_0 = apply_mask(random_complex((3, 8, 8), seed=3), mask)
        trace = []
        out = model(s_0, mask, maps, trace)
        assert out.shape == (8, 8)
        for ksp in trace:
            assert torch.equal(apply_mask(ksp, mask), s_0)

    def test_zero_weight_full_mask_dccnn_returns_truth(self):
        model = tiny_model(DCCNN, n_coil=2)
        zero_weights(model)
        ksp = random_complex((2, 8, 8), seed=4)
        out = model(ksp, SamplingMask.full(8, 8))
        assert torch.allclose(fft2c(out), ksp, atol=1e-12)

    def test_variant_mismatch(self):
        model = tiny_model(DCCNN)
        mask = SamplingMask.full(8, 8)
        with pytest.raises(VariantMismatchError):
            dpocsense_forward(random_complex((2, 8, 8)), simulate_sensitivities(8, 8, 2, 0), mask, model)
        with pytest.raises(VariantMismatchError):
            dccnn_forward(random_complex((2, 8, 8)), mask, tiny_model(DPOCSENSE))

    def test_coil_count_mismatch(self):
        with pytest.raises(ShapeMismatchError):
            tiny_model(DCCNN, n_coil=2)(random_complex((3, 8, 8)), SamplingMask.full(8, 8))

    def test_dpocsense_requires_maps(self):
        with pytest.raises(ShapeMismatchError):
            tiny_model(DPOCSENSE)(random_complex((2, 8, 8)), SamplingMask.full(8, 8))

    def test_shared_lambda(self):
        model = tiny_model(DCCNN, shared_lambda=True, n_c=3)
        assert len(model.unique_dc_params()) == 1
        assert len(model.lambdas()) == 3
        raw_params = [name for name, _ in model.named_parameters() if name.endswith("raw")]
        assert len(raw_params) == 1

    def test_subnets_are_seeded_per_cascade(self):
        model = tiny_model(DPOCSENSE, seed=3)
        assert not torch.equal(model.subnets[0].layers[0].weight, model.subnets[1].layers[0].weight)
        assert torch.equal(model.subnets[1].layers[0].weight, init_params(2, 4, 1, 2, seed=4).layers[0].weight)

    def test_dpocsense_matches_stage_replay(self):
        model = tiny_model(DPOCSENSE, n_coil=3, lambda_init=0.3)
        maps = simulate_sensitivities(8, 8, 3, seed=1)
        mask = generate_mask(8, 8, 2, 4, seed=2)
        s_0 = apply_mask(random_complex((3, 8, 8), seed=3), mask)
        coils = maps.maps
        with torch.no_grad():
            x = torch.sum(coils.conj() * ifft2c(s_0), dim=0)
            for subnet, dc_param in zip(model.subnets, model.dc_params):
                x_cnn = scripted_subnet(x[None, None], subnet)[0, 0]
                s_rec = scripted_blend(fft2c(coils * x_cnn), s_0, mask, dc_param.lambda_value)
                x = torch.sum(coils.conj() * ifft2c(s_rec), dim=0)
            assert torch.allclose(model(s_0, mask, maps), x, atol=1e-10)

    def test_dccnn_matches_stage_replay(self):
        model = tiny_model(DCCNN, n_coil=2, lambda_init=0.3)
        mask = generate_mask(8, 8, 2, 4, seed=5)
        s_0 = apply_mask(random_complex((2, 8, 8), seed=6), mask)
        with torch.no_grad():
            x = ifft2c(s_0)
            for subnet, dc_param in zip(model.subnets, model.dc_params):
                s_cnn = fft2c(scripted_subnet(x[None], subnet)[0])
                x = ifft2c(scripted_blend(s_cnn, s_0, mask, dc_param.lambda_value))
            assert torch.allclose(model(s_0, mask), x, atol=1e-10)

    def test_zero_weight_full_mask_dpocsense_returns_image(self):
        model = tiny_model(DPOCSENSE, n_coil=3)
        zero_weights(model)
        maps = simulate_sensitivities(8, 8, 3, seed=1)
        full = SamplingMask.full(8, 8)
        x = random_complex((8, 8), seed=10)
        with torch.no_grad():
            out = model(forward_op(x, maps, full), full, maps)
        assert torch.allclose(out[maps.support], x[maps.support], atol=1e-10)

    def test_single_cascade_hard_dccnn_is_zero_filled(self):
        model = tiny_model(DCCNN, n_coil=2, n_c=1, lambda_init=0.0, lambda_trainable=False)
        zero_weights(model)
        mask = generate_mask(8, 8, 2, 4, seed=4)
        s_0 = apply_mask(random_complex((2, 8, 8), seed=9), mask)
        with torch.no_grad():
            assert torch.allclose(model(s_0, mask), ifft2c(s_0), atol=1e-12)
