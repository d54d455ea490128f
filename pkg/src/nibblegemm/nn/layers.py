"""
Network Layers

Layer descriptions and the two forward paths:

- QCONV: quantized convolution through im2col and the corrected GEMM. Its
  input is quantized on the fly (float input for F -> Q, integer activation
  for Q -> Q) and its output is an integer activation with a composed scale.
- FCONV / FC: ordinary real-valued convolution and fully connected layers.

Convolutions are unpadded. Only float layers may carry a bias.
"""

import logging
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional, Tuple, Union

import numpy as np

from ..gemm import (
    AccumulatorMode,
    GemmConfig,
    PreparedWeights,
    QuantizedMatrix,
    channel_limit,
    compute_quant_params,
    prepare_weights,
    qgemm_prepared,
    quantize,
    quantize_tensor,
)
from ..reference import oracle_quantized_product
from ..validation import ChannelLimitError, GeometryError, NibbleGemmError, validate_finite
from .im2col import conv_output_size, im2col
from .tensor import ScaledActivation, Shape, Tensor

logger = logging.getLogger(__name__)

LayerInput = Union[Tensor, ScaledActivation]


class LayerKind(str, Enum):
    """Layer type."""
    QCONV = "qconv"
    FCONV = "fconv"
    FC = "fc"


class Activation(str, Enum):
    """Activation function applied to a layer's output."""
    RELU = "relu"
    SOFTMAX = "softmax"
    NONE = "none"


@dataclass(frozen=True)
class QuantizedFilters:
    """Unrolled filters quantized once, with their packed form and row sums."""
    prepared: PreparedWeights
    config: GemmConfig

    @property
    def matrix(self) -> QuantizedMatrix:
        return self.prepared.matrix


def _pair(value, name: str) -> Tuple[int, int]:
    if isinstance(value, (int, np.integer)):
        value = (value, value)
    pair = tuple(int(v) for v in value)
    if len(pair) != 2 or min(pair) < 1:
        raise GeometryError(
            f"{name} must be two positive integers, got {value}",
            f"Pass {name} as (height, width)",
            name,
        )
    return pair[0], pair[1]


@dataclass(frozen=True, eq=False)
class LayerSpec:
    """
    One layer of a network.

    Convolution weights have shape (filters, in_channels, kh, kw); fully
    connected weights have shape (filters, in_features). A QCONV layer
    carries its quantized filters once it belongs to a Network.
    """
    kind: LayerKind
    filters: int
    weights: np.ndarray
    kernel: Tuple[int, int] = (1, 1)
    stride: Tuple[int, int] = (1, 1)
    activation: Activation = Activation.NONE
    bias: Optional[np.ndarray] = None
    quantized: Optional[QuantizedFilters] = field(default=None, compare=False, repr=False)

    def __post_init__(self) -> None:
        kind = LayerKind(self.kind)
        activation = Activation(self.activation)
        kernel = _pair(self.kernel, "kernel")
        stride = _pair(self.stride, "stride")
        weights = validate_finite(self.weights, "weights").copy()
        weights.flags.writeable = False

        expected_ndim = 2 if kind == LayerKind.FC else 4
        if weights.ndim != expected_ndim or weights.shape[0] != self.filters:
            layout = "(filters, in_features)" if kind == LayerKind.FC else "(filters, channels, kh, kw)"
            raise GeometryError(
                f"{kind.value} weights of shape {weights.shape} do not match {self.filters} filters",
                f"Weights must be laid out as {layout}",
                "weights",
            )
        if kind != LayerKind.FC and weights.shape[2:] != kernel:
            raise GeometryError(
                f"Weights have a {weights.shape[2]}x{weights.shape[3]} window, "
                f"but the layer declares a {kernel[0]}x{kernel[1]} kernel",
                "Make the kernel match the last two weight dimensions",
                "kernel",
            )
        if kind == LayerKind.FC:
            kernel = stride = (1, 1)

        if kind == LayerKind.QCONV and activation == Activation.SOFTMAX:
            raise NibbleGemmError(
                "Quantized convolutions cannot end in SoftMax",
                "Put SoftMax on a float (FC or FCONV) output layer",
                "activation",
            )
        bias = self.bias
        if bias is not None:
            if kind == LayerKind.QCONV:
                raise NibbleGemmError(
                    "Quantized convolutions have no bias",
                    "Drop the bias or make the layer FCONV",
                    "bias",
                )
            bias = validate_finite(bias, "bias").copy()
            if bias.shape != (self.filters,):
                raise GeometryError(
                    f"Bias of shape {bias.shape} does not match {self.filters} filters",
                    "Pass one bias value per filter",
                    "bias",
                )
            bias.flags.writeable = False

        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "activation", activation)
        object.__setattr__(self, "kernel", kernel)
        object.__setattr__(self, "stride", stride)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "bias", bias)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LayerSpec):
            return NotImplemented
        same_bias = (self.bias is None and other.bias is None) or (
            self.bias is not None
            and other.bias is not None
            and np.array_equal(self.bias, other.bias)
        )
        return (
            self.kind == other.kind
            and self.filters == other.filters
            and self.kernel == other.kernel
            and self.stride == other.stride
            and self.activation == other.activation
            and self.weights.shape == other.weights.shape
            and np.array_equal(self.weights, other.weights)
            and same_bias
        )

    @property
    def is_quantized(self) -> bool:
        return self.kind == LayerKind.QCONV

    @property
    def in_channels(self) -> int:
        """Input channels of a convolution (features for FC)."""
        return int(self.weights.shape[1])

    @property
    def depth(self) -> int:
        """Inner dimension of the layer's matrix product."""
        return int(np.prod(self.weights.shape[1:]))

    def parameter_count(self) -> int:
        return int(self.weights.size) + (int(self.bias.size) if self.bias is not None else 0)

    def output_shape(self, input_shape: Shape) -> Shape:
        """
        Geometry of this layer's output for a given input geometry.

        Raises:
            GeometryError: If the input does not chain into the layer
        """
        channels, height, width = input_shape
        if self.kind == LayerKind.FC:
            features = channels * height * width
            if features != self.in_channels:
                raise GeometryError(
                    f"FC layer expects {self.in_channels} features, got {features} "
                    f"from a {channels}x{height}x{width} input",
                    "Match the weight columns to the flattened input size",
                    "weights",
                )
            return self.filters, 1, 1
        if channels != self.in_channels:
            raise GeometryError(
                f"{self.kind.value} layer expects {self.in_channels} input channels, got {channels}",
                "Match the weights' channel dimension to the previous layer's filters",
                "weights",
            )
        out_h, out_w = conv_output_size(height, width, self.kernel, self.stride)
        return self.filters, out_h, out_w

    def with_quantized_filters(self, config: GemmConfig) -> "LayerSpec":
        """
        Return a copy carrying quantized, packed filters for `config`.

        Raises:
            ChannelLimitError: If the input channels exceed the limit under config
        """
        if self.kind != LayerKind.QCONV:
            return self
        check_channel_limit(self, config)
        unrolled = self.weights.reshape(self.filters, -1)
        params = compute_quant_params(unrolled, config.bits)
        matrix = quantize(unrolled, params)
        quantized = QuantizedFilters(prepare_weights(matrix, config), config)
        logger.debug(
            f"Quantized {self.filters} filters of depth {self.depth}: "
            f"scale={params.scale:.6g} zero_point={params.zero_point}"
        )
        return replace(self, quantized=quantized)


def check_channel_limit(
    layer: LayerSpec, config: GemmConfig, layer_index: Optional[int] = None
) -> None:
    """
    Enforce the input-channel limit of a quantized convolution.

    Raises:
        ChannelLimitError: If the layer has more input channels than fit the accumulators
    """
    kh, kw = layer.kernel
    limit = channel_limit(config.bits, config.accumulator_mode, kh, kw)
    if layer.in_channels > limit:
        raise ChannelLimitError(
            layer.in_channels, limit, layer.kernel, config.accumulator_mode.value, layer_index
        )


def activation_dtype(config: GemmConfig) -> type:
    """int16 on the 4-bit signed16 path, int32 otherwise."""
    if config.bits == 4 and config.accumulator_mode == AccumulatorMode.SIGNED16:
        return np.int16
    return np.int32


def _quantize_input(layer: LayerSpec, x: LayerInput, bits: int) -> Tuple[QuantizedMatrix, float]:
    """Quantize the input (F -> Q or Q -> Q) and unroll it. Returns columns and the incoming scale."""
    layer.output_shape(x.shape)
    incoming = x.scale if isinstance(x, ScaledActivation) else 1.0
    q, params = quantize_tensor(x.data, bits)
    cols = im2col(q, layer.kernel[0], layer.kernel[1], layer.stride[0], layer.stride[1])
    return QuantizedMatrix(cols, params), incoming


def _finish_conv(
    layer: LayerSpec, values: np.ndarray, scale: float, x_shape: Shape, config: GemmConfig
) -> ScaledActivation:
    if layer.activation == Activation.RELU:
        values = np.maximum(values, 0)
    out_shape = layer.output_shape(x_shape)
    data = values.reshape(out_shape).astype(activation_dtype(config))
    return ScaledActivation(data, scale)


def quantized_conv_forward(
    layer: LayerSpec, x: LayerInput, config: Optional[GemmConfig] = None
) -> ScaledActivation:
    """
    Run a QCONV layer.

    The input is quantized with dynamic per-tensor parameters (scale s_x).
    When it is already an integer activation its scale s* carries through,
    so the output scale is s_w * s_x * s*. ReLU acts on the integers
    directly since the result's zero-point is 0.

    Args:
        layer: A QCONV layer
        x: Float tensor (F -> Q) or scaled integer activation (Q -> Q)
        config: GEMM configuration; defaults to the layer's cached one

    Returns:
        ScaledActivation with the layer's output geometry

    Raises:
        GeometryError: If the input does not chain into the layer
        ChannelLimitError: If the layer breaks the channel limit
        OverflowRiskError: If the GEMM depth exceeds the accumulator bound
    """
    if layer.kind != LayerKind.QCONV:
        raise NibbleGemmError(
            f"quantized_conv_forward() cannot run a {layer.kind.value} layer",
            "Use float_layer_forward() for FC and FCONV layers",
            "kind",
        )
    if config is None:
        config = layer.quantized.config if layer.quantized is not None else GemmConfig()
    if layer.quantized is None or layer.quantized.config != config:
        layer = layer.with_quantized_filters(config)
    else:
        check_channel_limit(layer, config)

    cols, incoming = _quantize_input(layer, x, config.bits)
    result = qgemm_prepared(layer.quantized.prepared, cols, config)
    return _finish_conv(layer, result.values, result.result_scale * incoming, x.shape, config)


def reference_conv_forward(
    layer: LayerSpec, x: LayerInput, config: Optional[GemmConfig] = None
) -> ScaledActivation:
    """
    QCONV computed with the naive 32-bit integer oracle instead of the kernels.

    Quantization, scales and activation match quantized_conv_forward(), so
    the two agree exactly.
    """
    if config is None:
        config = layer.quantized.config if layer.quantized is not None else GemmConfig()
    if layer.quantized is None or layer.quantized.config != config:
        layer = layer.with_quantized_filters(config)
    filters = layer.quantized.matrix

    cols, incoming = _quantize_input(layer, x, config.bits)
    values = np.asarray(
        oracle_quantized_product(
            filters.data, filters.params.zero_point, cols.data, cols.params.zero_point
        ),
        dtype=np.int64,
    ).reshape(layer.filters, -1)
    scale = filters.params.scale * cols.params.scale * incoming
    return _finish_conv(layer, values, scale, x.shape, config)


def apply_activation(values: np.ndarray, activation: Activation) -> np.ndarray:
    """Apply an activation to real values; SoftMax normalizes over all entries."""
    if activation == Activation.RELU:
        return np.maximum(values, 0.0)
    if activation == Activation.SOFTMAX:
        shifted = np.exp(values - values.max())
        return shifted / shifted.sum()
    return values


def float_layer_forward(layer: LayerSpec, x: Tensor) -> Tensor:
    """
    Run an FC or FCONV layer in real arithmetic.

    Raises:
        GeometryError: If the input does not chain into the layer
    """
    if layer.kind == LayerKind.QCONV:
        raise NibbleGemmError(
            "float_layer_forward() cannot run a quantized convolution",
            "Use quantized_conv_forward() for QCONV layers",
            "kind",
        )
    out_shape = layer.output_shape(x.shape)
    if layer.kind == LayerKind.FC:
        values = layer.weights @ x.flatten()
    else:
        cols = im2col(x.data, layer.kernel[0], layer.kernel[1], layer.stride[0], layer.stride[1])
        values = layer.weights.reshape(layer.filters, -1) @ cols
    values = values.reshape(layer.filters, -1)
    if layer.bias is not None:
        values = values + layer.bias[:, None]
    return Tensor(apply_activation(values, layer.activation).reshape(out_shape))


def float_conv_forward(layer: LayerSpec, x: Tensor) -> Tensor:
    """Any layer in real arithmetic; QCONV layers run as FCONV with their float weights."""
    if layer.kind == LayerKind.QCONV:
        layer = replace(layer, kind=LayerKind.FCONV, quantized=None)
    return float_layer_forward(layer, x)
