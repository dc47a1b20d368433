"""
Unit tests for SuperResolutionModel: initialisation, the single-basis
equivalence with LIIF, upscaling sizes and end-to-end gradients.
"""

import numpy as np
import pytest

from src.services.autodiff import Tensor, ops, precision
from src.services.autodiff.gradcheck import check_gradients
from src.services.exceptions import ContractError
from src.services.network.model import ModelSpec, SuperResolutionModel, output_size
from tests.helpers import make_image, make_spec


# ---------------------------------------------------------------------------
# ModelSpec
# ---------------------------------------------------------------------------
class TestModelSpec:
    def test_defaults_are_valid(self) -> None:
        assert ModelSpec().validate() == []

    def test_zero_k_rejected(self) -> None:
        assert "K must be ≥ 1" in ModelSpec(k=0).validate()

    def test_liif_requires_single_network(self) -> None:
        assert any("liif" in error for error in ModelSpec(mode="liif", k=3).validate())

    def test_unknown_combine(self) -> None:
        assert any("combine" in error for error in ModelSpec(combine="max").validate())

    def test_input_widths(self) -> None:
        spec = ModelSpec(feature_channels=7)
        assert spec.decoder_in_features == 67
        assert spec.expansion_in_features == 65

    def test_initialise_refuses_invalid_spec(self) -> None:
        with pytest.raises(ContractError):
            SuperResolutionModel.initialise(ModelSpec(k=0), seed=0)


# ---------------------------------------------------------------------------
# Initialisation
# ---------------------------------------------------------------------------
class TestInitialise:
    def test_same_seed_same_parameters(self) -> None:
        first = SuperResolutionModel.initialise(make_spec(), seed=4)
        second = SuperResolutionModel.initialise(make_spec(), seed=4)
        for (name_a, a), (name_b, b) in zip(first.named_parameters(), second.named_parameters(), strict=True):
            assert name_a == name_b
            np.testing.assert_array_equal(a.data, b.data)

    def test_parameter_names_unique_and_ordered(self) -> None:
        names = [name for name, _ in SuperResolutionModel.initialise(make_spec(k=2), seed=0).named_parameters()]
        assert len(names) == len(set(names))
        assert names[0].startswith("encoder.")
        assert names[-1].startswith("decoder.basis.1")

    def test_parameter_count_grows_with_k(self) -> None:
        counts = [SuperResolutionModel.initialise(make_spec(k=k), seed=0).parameter_count for k in (1, 2, 3)]
        assert counts[0] < counts[1] < counts[2]

    def test_liif_parameters(self) -> None:
        model = SuperResolutionModel.initialise(make_spec(mode="liif", k=1), seed=0)
        names = [name for name, _ in model.named_parameters()]
        assert any(name.startswith("decoder.mlp") for name in names)
        assert not any("expansion" in name for name in names)


# ---------------------------------------------------------------------------
# Single-basis equivalence
# ---------------------------------------------------------------------------
class TestSingleBasisEquivalence:
    def test_k1_aliif_matches_liif(self) -> None:
        aliif = SuperResolutionModel.initialise(make_spec(mode="aliif", k=1), seed=11)
        liif = SuperResolutionModel.initialise(make_spec(mode="liif", k=1), seed=11)
        image = make_image(6, 5, seed=1)
        coords = np.random.default_rng(2).uniform(-1, 1, size=(1000, 2))
        cells = np.random.default_rng(3).uniform(0.05, 0.5, size=(1000, 2))

        out_a = aliif.query(aliif.encode(image), coords, cells).data
        out_l = liif.query(liif.encode(image), coords, cells).data
        np.testing.assert_allclose(out_a, out_l, atol=1e-6)

    def test_k1_weights_are_one(self) -> None:
        model = SuperResolutionModel.initialise(make_spec(k=1), seed=0)
        np.testing.assert_array_equal(model.mixture_weights(make_image(4, 4), 8, 8), 1.0)


# ---------------------------------------------------------------------------
# Mixture weights
# ---------------------------------------------------------------------------
class TestMixtureWeights:
    def test_probability_rows_on_many_queries(self) -> None:
        model = SuperResolutionModel.initialise(make_spec(k=4), seed=5)
        omega = model.mixture_weights(make_image(10, 10, seed=6), 100, 100)
        assert omega.shape == (100, 100, 4)
        assert omega.min() >= 0.0
        assert np.max(np.abs(omega.sum(axis=2) - 1.0)) < 1e-6

    def test_liif_has_no_mixture(self) -> None:
        model = SuperResolutionModel.initialise(make_spec(mode="liif", k=1), seed=0)
        with pytest.raises(ContractError):
            model.mixture_weights(make_image(4, 4), 4, 4)


# ---------------------------------------------------------------------------
# Upscaling
# ---------------------------------------------------------------------------
class TestUpscale:
    @pytest.fixture(scope="class")
    def model(self) -> SuperResolutionModel:
        return SuperResolutionModel.initialise(make_spec(k=2), seed=1)

    def test_real_scale(self, model: SuperResolutionModel) -> None:
        out = model.upscale(make_image(10, 10), scale=2.5)
        assert out.size == (25, 25)
        assert 0.0 <= out.pixels.min() and out.pixels.max() <= 1.0

    def test_explicit_size(self, model: SuperResolutionModel) -> None:
        assert model.upscale(make_image(5, 7), size=(11, 3)).size == (11, 3)

    def test_one_pixel_input(self, model: SuperResolutionModel) -> None:
        assert model.upscale(make_image(1, 1), scale=4.0).size == (4, 4)

    def test_downscale(self, model: SuperResolutionModel) -> None:
        assert model.upscale(make_image(8, 8), scale=0.5).size == (4, 4)

    def test_needs_exactly_one_target(self, model: SuperResolutionModel) -> None:
        with pytest.raises(ContractError):
            model.upscale(make_image(4, 4))
        with pytest.raises(ContractError):
            model.upscale(make_image(4, 4), scale=2.0, size=(8, 8))

    def test_repeatable(self, model: SuperResolutionModel) -> None:
        image = make_image(6, 6, seed=9)
        np.testing.assert_array_equal(model.upscale(image, scale=1.5).pixels, model.upscale(image, scale=1.5).pixels)


class TestOutputSize:
    def test_matches_rounding_on_random_pairs(self) -> None:
        rng = np.random.default_rng(0)
        for _ in range(200):
            h, w = (int(v) for v in rng.integers(1, 300, size=2))
            scale = float(rng.uniform(0.1, 12.0))
            out_h, out_w = output_size(h, w, scale)
            assert out_h == max(1, round(h * scale))
            assert out_w == max(1, round(w * scale))

    def test_tiny_scale_still_one_pixel(self) -> None:
        assert output_size(3, 3, 0.01) == (1, 1)

    @pytest.mark.parametrize("scale", [0.0, -1.0, float("nan"), float("inf")])
    def test_bad_scale(self, scale: float) -> None:
        with pytest.raises(ContractError):
            output_size(4, 4, scale)


# ---------------------------------------------------------------------------
# End-to-end gradients
# ---------------------------------------------------------------------------
class TestModelGradients:
    @pytest.mark.parametrize("seed", range(20))
    def test_l1_loss_gradients(self, seed: int) -> None:
        with precision(np.float64):
            spec = make_spec(k=2, feature_channels=2, basis_hidden=4, expansion_hidden=4)
            model = SuperResolutionModel.initialise(spec, seed=seed)
            rng = np.random.default_rng(seed)
            # Zero biases park dead ReLUs exactly on their kink.
            for name, tensor in model.named_parameters():
                if name.endswith(".bias"):
                    tensor.data[...] = rng.uniform(-0.3, 0.3, size=tensor.shape)
            image = make_image(4, 4, seed=seed)
            coords = rng.uniform(-1, 1, size=(6, 2))
            cells = np.full((6, 2), 2.0 / 8.0)
            target = Tensor(rng.uniform(size=(6, 3)))

            def loss() -> Tensor:
                return ops.l1_loss(model.query(model.encode(image), coords, cells), target)

            result = check_gradients(loss, model.parameters(), step=1e-5, skip_kinks=True)
        assert result.errors.keys() == {name for name, _ in model.named_parameters()}
        assert result.max_error < 1e-3, result.worst()
        assert result.skipped_fraction < 0.02, (result.skipped, result.checked)
