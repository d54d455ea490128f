"""
Tests for Mixed Float/Quantized Networks
"""

import numpy as np
import pytest

from nibblegemm.gemm import AccumulatorMode, compute_quant_params
from nibblegemm.nn import (
    DEMO_INPUT,
    Activation,
    LayerKind,
    LayerSpec,
    Network,
    ScaledActivation,
    Tensor,
    argmax_agreement,
    build_demo_network,
    float_conv_forward,
    float_forward,
    network_forward,
    reference_conv_forward,
    toy_inputs,
    trace_forward,
)
from nibblegemm.validation import ChannelLimitError, GeometryError, NibbleGemmError

DEMO_SHAPES = [
    (8, 21, 29),
    (8, 19, 27),
    (8, 9, 13),
    (16, 7, 11),
    (16, 3, 5),
    (24, 1, 3),
    (36, 1, 1),
]


def _demo_input(seed=5):
    return Tensor(np.random.default_rng(seed).uniform(0.0, 1.0, size=DEMO_INPUT))


def _approximation_bound(layer, x_real, s_x):
    """D (s_w max|X| + s_x max|W| + s_w s_x) for one quantized layer; s_x in real units."""
    s_w = compute_quant_params(layer.weights, 4).scale
    return layer.depth * (
        s_w * np.abs(x_real).max() + s_x * np.abs(layer.weights).max() + s_w * s_x
    )


class TestDemoNetwork:
    """The 7-layer character classifier."""

    def test_layer_geometry(self, demo_network):
        assert demo_network.output_shapes() == DEMO_SHAPES

    def test_fc_has_72_inputs(self, demo_network):
        fc = demo_network.layers[-1]

        assert fc.kind == LayerKind.FC
        assert fc.in_channels == 72
        assert fc.activation == Activation.SOFTMAX

    def test_parameter_count(self, demo_network):
        conv_params = sum(layer.parameter_count() for layer in demo_network.layers[:-1])

        assert conv_params == 8264
        assert demo_network.parameter_count() == 10892

    def test_depths_fit_signed16(self, demo_network):
        depths = [layer.depth for layer in demo_network.layers[:-1]]

        assert depths == [25, 72, 72, 72, 144, 144]
        assert max(depths) <= 145

    def test_filters_quantized_once(self, demo_network):
        for layer in demo_network.layers[:-1]:
            assert layer.quantized is not None
            assert layer.quantized.config == demo_network.gemm_config

    def test_forward_is_a_distribution(self, demo_network):
        output = network_forward(demo_network, _demo_input())

        assert output.shape == (36,)
        assert output.sum() == pytest.approx(1.0)
        assert np.all(output >= 0)

    def test_trace_types(self, demo_network):
        outputs = trace_forward(demo_network, _demo_input())

        assert [o.shape for o in outputs] == DEMO_SHAPES
        assert all(isinstance(o, ScaledActivation) for o in outputs[:-1])
        assert all(o.data.dtype == np.int16 for o in outputs[:-1])
        assert isinstance(outputs[-1], Tensor)

    def test_seeded_weights_are_reproducible(self, demo_network):
        assert build_demo_network(seed=0) == demo_network
        assert build_demo_network(seed=1) != demo_network

    @pytest.mark.slow
    def test_kernels_match_reference_convolutions(self, demo_network):
        x = _demo_input(seed=11)

        fast = network_forward(demo_network, x)
        slow = network_forward(demo_network, x, reference_conv_forward)

        assert np.array_equal(fast, slow)

    def test_settings_without_overflow_agree(self, demo_network):
        x = _demo_input()
        baseline = network_forward(demo_network, x)

        for net in (
            demo_network.with_settings(accumulator_mode=AccumulatorMode.UNSIGNED16_EXTENDED),
            demo_network.with_settings(kernel_height=8),
            demo_network.with_settings(workers=3),
        ):
            assert np.array_equal(network_forward(net, x), baseline)

    def test_eight_bit_settings(self, demo_network):
        net = demo_network.with_settings(bits=8, accumulator_mode=AccumulatorMode.I32)
        outputs = trace_forward(net, _demo_input())

        assert outputs[0].data.dtype == np.int32
        assert outputs[-1].flatten().sum() == pytest.approx(1.0)

    def test_wrong_input_shape(self, demo_network):
        with pytest.raises(GeometryError, match="does not match"):
            network_forward(demo_network, Tensor(np.zeros((1, 24, 33))))


class TestToyClassifier:
    def test_full_argmax_agreement(self, toy_classifier):
        assert argmax_agreement(toy_classifier, toy_inputs(count=30)) == 1.0

    def test_margins_exceed_layer_bound(self, toy_classifier):
        conv = toy_classifier.layers[0]
        for x, label in toy_inputs(count=30):
            logits = float_conv_forward(conv, x).flatten()
            runner_up = np.sort(logits)[-2]
            bound = _approximation_bound(conv, x.data, compute_quant_params(x.data, 4).scale)

            assert int(np.argmax(logits)) == label
            assert logits[label] - runner_up > bound

            quantized = trace_forward(toy_classifier, x)[0].dequantize().flatten()
            assert np.abs(quantized - logits).max() <= bound

    def test_predicts_labels(self, toy_classifier):
        for x, label in toy_inputs(count=9, seed=3):
            assert int(np.argmax(network_forward(toy_classifier, x))) == label

    def test_no_samples(self, toy_classifier):
        assert argmax_agreement(toy_classifier, []) == 1.0


class TestNetworkValidation:
    def _fconv(self, filters, channels, kernel=1):
        weights = np.ones((filters, channels, kernel, kernel))
        return LayerSpec(LayerKind.FCONV, filters, weights, (kernel, kernel))

    def _qconv(self, filters, channels, kernel=3):
        weights = np.ones((filters, channels, kernel, kernel))
        return LayerSpec(LayerKind.QCONV, filters, weights, (kernel, kernel))

    def test_float_only_network_matches_float_forward(self, rng):
        fc = LayerSpec(LayerKind.FC, 4, rng.normal(size=(4, 2 * 3 * 3)), activation=Activation.SOFTMAX)
        conv = LayerSpec(LayerKind.FCONV, 2, rng.normal(size=(2, 1, 3, 3)), (3, 3), activation="relu")
        net = Network((1, 5, 5), (conv, fc))
        x = Tensor(rng.normal(size=(1, 5, 5)))

        assert np.array_equal(network_forward(net, x), float_forward(net, x))

    def test_channel_limit_names_layer(self):
        layers = (self._fconv(17, 1), self._qconv(4, 17))

        with pytest.raises(ChannelLimitError) as exc_info:
            Network((1, 8, 8), layers)

        assert exc_info.value.message.startswith("Layer 1:")
        assert exc_info.value.limit == 16

    def test_extended_mode_admits_more_channels(self):
        layers = (self._fconv(17, 1), self._qconv(4, 17))
        net = Network((1, 8, 8), layers, accumulator_mode=AccumulatorMode.UNSIGNED16_EXTENDED)

        assert net.output_shapes()[-1] == (4, 6, 6)

    def test_geometry_must_chain(self):
        layers = (self._fconv(4, 1), self._qconv(2, 3))

        with pytest.raises(GeometryError, match="Layer 1:"):
            Network((1, 8, 8), layers)

    def test_kernel_larger_than_input(self):
        with pytest.raises(GeometryError, match="Layer 0:"):
            Network((1, 2, 2), (self._qconv(1, 1),))

    def test_needs_layers(self):
        with pytest.raises(GeometryError):
            Network((1, 4, 4), ())

    def test_bad_settings(self):
        with pytest.raises(NibbleGemmError):
            Network((1, 4, 4), (self._qconv(1, 1),), bits=8)

    def test_equality_ignores_workers(self, demo_network):
        assert demo_network.with_settings(workers=2) == demo_network
        assert demo_network.with_settings(kernel_height=8) != demo_network


class TestLayerwiseApproximation:
    """Quantized layer outputs against real arithmetic, one layer at a time."""

    def _layers(self, rng):
        first = LayerSpec(
            LayerKind.QCONV, 4, rng.normal(size=(4, 2, 3, 3)), (3, 3), activation=Activation.RELU
        )
        second = LayerSpec(LayerKind.QCONV, 3, rng.normal(size=(3, 4, 3, 3)), (3, 3))
        return first, second

    @pytest.mark.parametrize("seed", [0, 1, 2, 3])
    def test_two_quantized_layers(self, seed):
        rng = np.random.default_rng(seed)
        net = Network((2, 8, 8), self._layers(rng))
        first, second = net.layers
        x = Tensor(rng.uniform(-1.0, 1.0, size=(2, 8, 8)))

        a1, a2 = trace_forward(net, x)
        assert isinstance(a2, ScaledActivation)

        exact1 = float_conv_forward(first, x).data
        bound1 = _approximation_bound(first, x.data, compute_quant_params(x.data, 4).scale)
        error1 = np.abs(a1.dequantize().data - exact1).max()
        assert error1 <= bound1

        # second layer against real arithmetic on the activation it actually received
        x2 = a1.dequantize()
        s_x2 = compute_quant_params(a1.data, 4).scale * a1.scale
        bound2 = _approximation_bound(second, x2.data, s_x2)
        approx2 = a2.dequantize().data
        assert np.abs(approx2 - float_conv_forward(second, x2).data).max() <= bound2

        # and against the pure float network, with the first error carried through
        exact2 = float_conv_forward(second, Tensor(exact1)).data
        carried = second.depth * np.abs(second.weights).max() * error1
        assert np.abs(approx2 - exact2).max() <= bound2 + carried
        assert np.allclose(float_forward(net, x), exact2.reshape(-1))

    @pytest.mark.parametrize("seed", [0, 1, 2, 3])
    def test_float_round_trip_adds_one_quantization(self, seed):
        rng = np.random.default_rng(seed)
        first, second = self._layers(rng)
        identity = LayerSpec(LayerKind.FCONV, 4, np.eye(4).reshape(4, 4, 1, 1))
        direct = Network((2, 8, 8), (first, second))
        round_trip = Network((2, 8, 8), (first, identity, second))
        x = Tensor(rng.uniform(-1.0, 1.0, size=(2, 8, 8)))

        a1, direct_out = trace_forward(direct, x)
        b1, middle, round_out = trace_forward(round_trip, x)

        assert np.array_equal(a1.data, b1.data)
        assert isinstance(middle, Tensor)
        assert np.allclose(middle.data, a1.dequantize().data, rtol=0.0, atol=1e-12)

        layer = round_trip.layers[2]
        exact = float_conv_forward(layer, middle).data
        bound = _approximation_bound(layer, middle.data, compute_quant_params(middle.data, 4).scale)
        assert np.abs(round_out.dequantize().data - exact).max() <= bound

        direct_bound = _approximation_bound(
            layer, middle.data, compute_quant_params(a1.data, 4).scale * a1.scale
        )
        difference = np.abs(round_out.dequantize().data - direct_out.dequantize().data).max()
        assert difference <= bound + direct_bound
