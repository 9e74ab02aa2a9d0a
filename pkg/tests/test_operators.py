import math

import numpy as np
import pytest
import torch

from conftest import random_complex
from exceptions import InvalidArgumentError, InvalidConfigurationError, ShapeMismatchError
from Operators.coils import (
    SensitivityMaps,
    calibration_window,
    combine,
    estimate_sensitivities,
    expand,
    simulate_sensitivities
)
from Operators.encoding import SenseOperator, adjoint_op, forward_op
from Operators.fourier import (
    channels_to_complex,
    complex_to_channels,
    fft2c,
    ifft2c,
    inner_product,
    precision_dtypes
)
from Operators.sampling import SamplingMask, apply_mask, central_lines, generate_mask


class TestFourier:
    def test_centered_impulse_has_flat_spectrum(self):
        impulse = torch.zeros(8, 8, dtype=torch.complex128)
        impulse[4, 4] = 1
        ksp = fft2c(impulse)
        assert torch.allclose(ksp, torch.full((8, 8), 1 / 8, dtype=torch.complex128), atol=1e-15)

    def test_constant_image_is_dc_only(self):
        c = 0.5 - 2j
        ksp = fft2c(torch.full((8, 8), c, dtype=torch.complex128))
        expected = torch.zeros(8, 8, dtype=torch.complex128)
        expected[4, 4] = 8 * c
        assert torch.allclose(ksp, expected, atol=1e-13)

    def test_flat_kspace_inverts_to_center_impulse(self):
        img = ifft2c(torch.full((8, 8), 1 / 8, dtype=torch.complex128))
        expected = torch.zeros(8, 8, dtype=torch.complex128)
        expected[4, 4] = 1
        assert torch.allclose(img, expected, atol=1e-15)

    @pytest.mark.parametrize("shape", [(16, 16), (7, 9), (3, 5, 6)])
    def test_unitarity_and_round_trip(self, shape):
        x = random_complex(shape, seed=1)
        ksp = fft2c(x)
        assert math.isclose(float(torch.linalg.vector_norm(ksp)), float(torch.linalg.vector_norm(x)), rel_tol=1e-12)
        assert float(torch.max(torch.abs(ifft2c(ksp) - x))) <= 1e-12 * float(torch.max(torch.abs(x)))

    def test_single_precision_unitarity(self):
        x = random_complex((16, 16), seed=2, dtype=torch.complex64)
        assert math.isclose(float(torch.linalg.vector_norm(fft2c(x))), float(torch.linalg.vector_norm(x)),
                            rel_tol=1e-6)

    def test_odd_size_center(self):
        impulse = torch.zeros(5, 7, dtype=torch.complex128)
        impulse[2, 3] = 1
        assert torch.allclose(fft2c(impulse).abs(), torch.full((5, 7), 1 / math.sqrt(35), dtype=torch.float64))

    def test_linearity(self):
        x, y = random_complex((6, 6), seed=3), random_complex((6, 6), seed=4)
        alpha, beta = 2 - 1j, 0.5j
        assert torch.allclose(fft2c(alpha * x + beta * y), alpha * fft2c(x) + beta * fft2c(y), atol=1e-12)

    def test_zeros_stay_zero(self):
        assert torch.count_nonzero(ifft2c(torch.zeros(4, 4, dtype=torch.complex128))) == 0

    def test_zero_sized_frame_is_rejected(self):
        with pytest.raises(InvalidArgumentError):
            fft2c(torch.zeros(0, 4, dtype=torch.complex128))

    def test_inner_product_examples(self):
        one = torch.tensor([1 + 0j], dtype=torch.complex128)
        assert complex(inner_product(one, one)) == 1 + 0j
        assert complex(inner_product(torch.tensor([1j]), torch.tensor([1 + 0j]))) == -1j

    def test_inner_product_matches_loop(self):
        a, b = random_complex((4, 4), seed=5), random_complex((4, 4), seed=6)
        expected = sum(complex(a[i, j]).conjugate() * complex(b[i, j]) for i in range(4) for j in range(4))
        assert abs(complex(inner_product(a, b)) - expected) < 1e-12

    def test_inner_product_shape_mismatch(self):
        with pytest.raises(ShapeMismatchError):
            inner_product(torch.zeros(2, 2, dtype=torch.complex128), torch.zeros(2, 3, dtype=torch.complex128))

    def test_channel_conversion_round_trip(self):
        x = random_complex((2, 3, 4, 5), seed=7)
        channels = complex_to_channels(x)
        assert channels.shape == (2, 6, 4, 5)
        assert torch.equal(channels[:, 2], x[:, 1].real)
        assert torch.equal(channels[:, 3], x[:, 1].imag)
        assert torch.equal(channels_to_complex(channels), x)

    def test_precision_names(self):
        assert precision_dtypes("single") == (torch.float32, torch.complex64)
        with pytest.raises(InvalidArgumentError):
            precision_dtypes("half")


class TestSampling:
    def test_256_line_mask(self):
        mask = generate_mask(256, 256, 4, 24, seed=0)
        assert len(mask.sampled_lines) == 64
        assert mask.contains_lines(list(range(116, 140)))

    def test_no_acceleration_samples_everything(self):
        assert generate_mask(16, 16, 1, 0, seed=3).sampled_lines == list(range(16))

    def test_determinism(self):
        assert generate_mask(64, 32, 3, 8, seed=9) == generate_mask(64, 32, 3, 8, seed=9)
        assert generate_mask(64, 32, 3, 8, seed=9) != generate_mask(64, 32, 3, 8, seed=10)

    @pytest.mark.parametrize("height,af", [(64, 4), (100, 6), (37, 2.5)])
    def test_sampled_fraction(self, height, af):
        mask = generate_mask(height, 8, af, 6, seed=1)
        assert abs(mask.fraction - 1 / af) <= 1 / height
        assert all(0 <= line < height for line in mask.sampled_lines)

    def test_too_few_lines_for_calibration(self):
        with pytest.raises(InvalidConfigurationError):
            generate_mask(64, 64, 4, 24, seed=0)

    def test_central_lines(self):
        assert central_lines(256, 24) == list(range(116, 140))
        assert central_lines(9, 3) == [3, 4, 5]

    def test_apply_full_and_empty(self):
        ksp = random_complex((3, 6, 5), seed=1)
        assert torch.equal(apply_mask(ksp, SamplingMask.full(6, 5)), ksp)
        assert torch.count_nonzero(apply_mask(ksp, SamplingMask.empty(6, 5))) == 0

    def test_apply_single_line(self):
        ksp = random_complex((2, 6, 5), seed=2)
        out = apply_mask(ksp, SamplingMask(6, 5, [2]))
        assert torch.equal(out[:, 2], ksp[:, 2])
        assert torch.count_nonzero(out[:, [0, 1, 3, 4, 5]]) == 0

    def test_apply_is_idempotent(self):
        ksp = random_complex((2, 16, 8), seed=3)
        mask = generate_mask(16, 8, 2, 4, seed=1)
        once = apply_mask(ksp, mask)
        assert torch.equal(apply_mask(once, mask), once)

    def test_apply_shape_mismatch(self):
        with pytest.raises(ShapeMismatchError):
            apply_mask(torch.zeros(2, 6, 5, dtype=torch.complex128), SamplingMask.full(5, 5))

    def test_invalid_lines(self):
        with pytest.raises(InvalidArgumentError):
            SamplingMask(4, 4, [4])


class TestCoils:
    def test_single_coil_has_unit_magnitude(self):
        maps = simulate_sensitivities(16, 12, 1, seed=0)
        assert torch.allclose(maps.maps.abs(), torch.ones(1, 16, 12, dtype=torch.float64), atol=1e-12)

    def test_simulated_maps_are_normalized_and_deterministic(self):
        maps = simulate_sensitivities(32, 32, 8, seed=4)
        assert maps.normalization_error() <= 1e-6
        assert torch.equal(maps.maps, simulate_sensitivities(32, 32, 8, seed=4).maps)

    def test_estimate_normalization(self):
        truth = simulate_sensitivities(32, 32, 4, seed=1)
        image = random_complex((32, 32), seed=9)
        ksp = fft2c(expand(image, truth))
        mask = generate_mask(32, 32, 2, 8, seed=0)
        estimate = estimate_sensitivities(apply_mask(ksp, mask), mask, 8)
        assert estimate.normalization_error() <= 1e-6
        off_support = ~estimate.support
        assert torch.count_nonzero(estimate.maps[:, off_support]) == 0

    def test_single_coil_estimate(self):
        truth = simulate_sensitivities(16, 16, 1, seed=2)
        ksp = fft2c(expand(random_complex((16, 16), seed=3), truth))
        mask = generate_mask(16, 16, 2, 8, seed=0)
        estimate = estimate_sensitivities(apply_mask(ksp, mask), mask, 8)
        magnitude = estimate.maps[0].abs()[estimate.support]
        assert torch.allclose(magnitude, torch.ones_like(magnitude), atol=1e-6)

    def test_estimate_requires_calibration_lines(self):
        mask = SamplingMask(16, 16, [0, 1, 2, 3, 4, 5, 6, 7])
        with pytest.raises(InvalidConfigurationError):
            estimate_sensitivities(torch.zeros(2, 16, 16, dtype=torch.complex128), mask, 8)
        with pytest.raises(InvalidArgumentError):
            estimate_sensitivities(torch.zeros(2, 16, 16, dtype=torch.complex128), SamplingMask.full(16, 16), 2)

    def test_undersampled_estimate_matches_fully_sampled_one(self):
        truth = simulate_sensitivities(32, 32, 4, seed=1)
        ksp = fft2c(expand(random_complex((32, 32), seed=4), truth))
        mask = generate_mask(32, 32, 3, 8, seed=2)
        undersampled = estimate_sensitivities(apply_mask(ksp, mask), mask, 8)
        full = estimate_sensitivities(ksp, SamplingMask.full(32, 32), 8)
        assert torch.allclose(undersampled.maps, full.maps, atol=1e-12)

    def test_calibration_window_is_positive(self):
        window = calibration_window(24)
        assert np.all(window > 0) and np.allclose(window, window[::-1])

    def test_combine_inverts_expand_on_support(self, maps_8x8):
        x = random_complex((8, 8), seed=1)
        assert torch.allclose(combine(expand(x, maps_8x8), maps_8x8), x, atol=1e-6)

    def test_combine_matches_pixel_loop(self):
        maps = SensitivityMaps(random_complex((2, 4, 4), seed=2))
        coils = random_complex((2, 4, 4), seed=3)
        out = combine(coils, maps)
        for i in range(4):
            for j in range(4):
                expected = sum(complex(maps.maps[c, i, j]).conjugate() * complex(coils[c, i, j]) for c in range(2))
                assert abs(complex(out[i, j]) - expected) < 1e-12

    def test_zero_inputs(self, maps_8x8):
        assert torch.count_nonzero(combine(torch.zeros(4, 8, 8, dtype=torch.complex128), maps_8x8)) == 0
        assert torch.count_nonzero(expand(torch.zeros(8, 8, dtype=torch.complex128), maps_8x8)) == 0

    def test_expand_combine_are_adjoint(self, maps_8x8):
        x, y = random_complex((8, 8), seed=5), random_complex((4, 8, 8), seed=6)
        lhs = complex(inner_product(expand(x, maps_8x8), y))
        rhs = complex(inner_product(x, combine(y, maps_8x8)))
        assert abs(lhs - rhs) <= 1e-10 * abs(lhs)

    def test_coil_count_mismatch(self, maps_8x8):
        with pytest.raises(ShapeMismatchError):
            combine(torch.zeros(3, 8, 8, dtype=torch.complex128), maps_8x8)


class TestEncoding:
    def test_adjointness_over_random_instances(self):
        for instance in range(50):
            maps = SensitivityMaps(random_complex((4, 8, 8), seed=1000 + instance))
            mask = generate_mask(8, 8, 2, 2, seed=instance)
            x = random_complex((8, 8), seed=2000 + instance)
            y = random_complex((4, 8, 8), seed=3000 + instance)
            lhs = complex(inner_product(forward_op(x, maps, mask), y))
            rhs = complex(inner_product(x, adjoint_op(y, maps, mask)))
            assert abs(lhs - rhs) <= 1e-10 * max(abs(lhs), 1e-12)

    def test_full_mask_recovers_image(self, maps_8x8):
        x = random_complex((8, 8), seed=2)
        full = SamplingMask.full(8, 8)
        assert torch.allclose(adjoint_op(forward_op(x, maps_8x8, full), maps_8x8, full), x, atol=1e-10)

    def test_operator_norm_is_at_most_one(self, maps_8x8):
        mask = generate_mask(8, 8, 2, 4, seed=1)
        x = random_complex((8, 8), seed=3)
        assert float(torch.linalg.vector_norm(forward_op(x, maps_8x8, mask))) <= float(
            torch.linalg.vector_norm(x)) * (1 + 1e-12)

    def test_sense_operator(self, maps_8x8):
        mask = generate_mask(8, 8, 2, 4, seed=1)
        encoder = SenseOperator(maps_8x8, mask)
        x = random_complex((8, 8), seed=4)
        assert torch.equal(encoder(x), forward_op(x, maps_8x8, mask))
        assert torch.allclose(encoder.normal(x), adjoint_op(forward_op(x, maps_8x8, mask), maps_8x8, mask))
        assert torch.count_nonzero(encoder.residual(x, encoder(x))) == 0

    def test_batched_maps_and_masks(self, maps_8x8):
        x = random_complex((2, 8, 8), seed=5)
        maps = torch.stack([maps_8x8.maps, maps_8x8.maps])
        masks = torch.stack([generate_mask(8, 8, 2, 4, seed=s).as_tensor() for s in (1, 2)]).unsqueeze(1)
        batched = forward_op(x, maps, masks)
        single = forward_op(x[1], maps_8x8, generate_mask(8, 8, 2, 4, seed=2))
        assert torch.allclose(batched[1], single)
