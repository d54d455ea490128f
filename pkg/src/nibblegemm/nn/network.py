"""
Mixed Float/Quantized Networks

A Network is an immutable chain of layers with a fixed input geometry and
one quantization setting. The forward pass applies the four transitions
between float (F) and quantized (Q) layers:

- F -> F: float activations pass straight through.
- F -> Q: the QCONV layer quantizes the float input dynamically.
- Q -> Q: the QCONV layer re-quantizes the integer activation; the incoming
  scale multiplies into the output scale.
- Q -> F: the integer activation is multiplied by its scale.
"""

import logging
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..gemm import AccumulatorMode, GemmConfig
from ..validation import GeometryError, validate_bits, validate_kernel_height, validate_positive_int
from .layers import (
    Activation,
    LayerInput,
    LayerKind,
    LayerSpec,
    check_channel_limit,
    float_conv_forward,
    float_layer_forward,
    quantized_conv_forward,
)
from .tensor import ScaledActivation, Shape, Tensor

logger = logging.getLogger(__name__)

ConvForward = Callable[[LayerSpec, LayerInput, GemmConfig], ScaledActivation]

DEMO_INPUT: Shape = (1, 25, 33)
DEMO_CLASSES = 36

# (filters, kernel, stride) of the quantized convolutions
DEMO_CONVS: Tuple[Tuple[int, int, int], ...] = (
    (8, 5, 1),
    (8, 3, 1),
    (8, 3, 2),
    (16, 3, 1),
    (16, 3, 2),
    (24, 3, 1),
)


@dataclass(frozen=True, eq=False)
class Network:
    """
    Ordered layers plus input geometry and quantization settings.

    Construction checks that the geometries chain, that every QCONV layer
    respects the channel limit, and quantizes the QCONV filters once.
    """
    input_shape: Shape
    layers: Tuple[LayerSpec, ...]
    bits: int = 4
    accumulator_mode: AccumulatorMode = AccumulatorMode.SIGNED16
    kernel_height: int = 24
    workers: int = 1

    def __post_init__(self) -> None:
        bits = validate_bits(self.bits)
        mode = AccumulatorMode(self.accumulator_mode)
        kernel_height = validate_kernel_height(self.kernel_height)
        workers = validate_positive_int(self.workers, "workers")
        input_shape = tuple(int(v) for v in self.input_shape)
        if len(input_shape) != 3 or min(input_shape) < 1:
            raise GeometryError(
                f"Input geometry must be three positive integers, got {self.input_shape}",
                "Pass (channels, height, width)",
                "input_shape",
            )
        if not self.layers:
            raise GeometryError("A network needs at least one layer", "Add a layer", "layers")

        object.__setattr__(self, "bits", bits)
        object.__setattr__(self, "accumulator_mode", mode)
        object.__setattr__(self, "kernel_height", kernel_height)
        object.__setattr__(self, "input_shape", input_shape)
        object.__setattr__(self, "workers", workers)

        config = self.gemm_config
        shape: Shape = input_shape  # type: ignore[assignment]
        prepared: List[LayerSpec] = []
        for index, layer in enumerate(self.layers):
            try:
                shape = layer.output_shape(shape)
            except GeometryError as e:
                raise GeometryError(f"Layer {index}: {e.message}", e.suggestion, e.field) from e
            if layer.kind == LayerKind.QCONV:
                check_channel_limit(layer, config, index)
                layer = layer.with_quantized_filters(config)
            prepared.append(layer)
        object.__setattr__(self, "layers", tuple(prepared))

        logger.debug(
            f"Built network {input_shape} -> {shape} with {len(prepared)} layers "
            f"({bits}-bit, {mode.value})"
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Network):
            return NotImplemented
        return (
            self.input_shape == other.input_shape
            and self.bits == other.bits
            and self.accumulator_mode == other.accumulator_mode
            and self.kernel_height == other.kernel_height
            and len(self.layers) == len(other.layers)
            and all(a == b for a, b in zip(self.layers, other.layers))
        )

    @property
    def gemm_config(self) -> GemmConfig:
        return GemmConfig(
            kernel_height=self.kernel_height,
            accumulator_mode=self.accumulator_mode,
            bits=self.bits,
            workers=self.workers,
        )

    def output_shapes(self) -> List[Shape]:
        """Output geometry of every layer, in order."""
        shapes = []
        shape = self.input_shape
        for layer in self.layers:
            shape = layer.output_shape(shape)
            shapes.append(shape)
        return shapes

    def parameter_count(self) -> int:
        return sum(layer.parameter_count() for layer in self.layers)

    def with_settings(
        self,
        bits: Optional[int] = None,
        accumulator_mode: Optional[AccumulatorMode] = None,
        kernel_height: Optional[int] = None,
        workers: Optional[int] = None,
    ) -> "Network":
        """Same layers and weights under different quantization or execution settings."""
        return Network(
            self.input_shape,
            self.layers,
            bits if bits is not None else self.bits,
            accumulator_mode if accumulator_mode is not None else self.accumulator_mode,
            kernel_height if kernel_height is not None else self.kernel_height,
            workers if workers is not None else self.workers,
        )


def trace_forward(
    net: Network, x: Tensor, conv_forward: Optional[ConvForward] = None
) -> List[Union[Tensor, ScaledActivation]]:
    """
    Run the network and return every layer's output.

    QCONV layers yield ScaledActivations, float layers yield Tensors.

    Args:
        net: The network
        x: Input tensor matching net.input_shape
        conv_forward: Replacement for quantized_conv_forward (e.g. the
            naive reference convolution)

    Raises:
        GeometryError: If the input does not match the network's geometry
    """
    x = x if isinstance(x, Tensor) else Tensor(x)
    if x.shape != net.input_shape:
        raise GeometryError(
            f"Input of shape {x.shape} does not match the network input {net.input_shape}",
            "Resize the input to the declared geometry",
            "input",
        )
    conv = conv_forward or quantized_conv_forward
    config = net.gemm_config
    outputs: List[Union[Tensor, ScaledActivation]] = []
    current: Union[Tensor, ScaledActivation] = x
    for layer in net.layers:
        if layer.kind == LayerKind.QCONV:
            current = conv(layer, current, config)
        else:
            if isinstance(current, ScaledActivation):
                current = current.dequantize()
            current = float_layer_forward(layer, current)
        outputs.append(current)
    return outputs


def network_forward(
    net: Network, x: Tensor, conv_forward: Optional[ConvForward] = None
) -> np.ndarray:
    """
    Run the network and return the final output as a real vector.

    A trailing quantized layer is converted back to floats by its scale.
    """
    last = trace_forward(net, x, conv_forward)[-1]
    if isinstance(last, ScaledActivation):
        last = last.dequantize()
    return last.flatten()


def float_forward(net: Network, x: Tensor) -> np.ndarray:
    """The same network evaluated entirely in real arithmetic."""
    current = x if isinstance(x, Tensor) else Tensor(x)
    for layer in net.layers:
        current = float_conv_forward(layer, current)
    return current.flatten()


def build_demo_network(
    seed: int = 0,
    bits: int = 4,
    accumulator_mode: AccumulatorMode = AccumulatorMode.SIGNED16,
    kernel_height: int = 24,
) -> Network:
    """
    The 7-layer character classifier: six unpadded quantized convolutions
    and a float fully connected SoftMax layer, with seeded random weights.

    A 1x25x33 input shrinks to 1x3x24 before the FC layer, so the FC
    layer has 72 inputs. Every convolution depth is at most 144.
    """
    rng = np.random.default_rng(seed)
    layers: List[LayerSpec] = []
    channels = DEMO_INPUT[0]
    for filters, kernel, stride in DEMO_CONVS:
        fan_in = channels * kernel * kernel
        weights = rng.normal(0.0, np.sqrt(2.0 / fan_in), size=(filters, channels, kernel, kernel))
        layers.append(
            LayerSpec(LayerKind.QCONV, filters, weights, (kernel, kernel), (stride, stride), Activation.RELU)
        )
        channels = filters

    features = channels * 1 * 3
    layers.append(
        LayerSpec(
            LayerKind.FC,
            DEMO_CLASSES,
            rng.normal(0.0, np.sqrt(1.0 / features), size=(DEMO_CLASSES, features)),
            activation=Activation.SOFTMAX,
            bias=rng.normal(0.0, 0.01, size=DEMO_CLASSES),
        )
    )
    return Network(DEMO_INPUT, tuple(layers), bits, accumulator_mode, kernel_height)


TOY_INPUT: Shape = (1, 3, 3)


def build_toy_classifier(
    bits: int = 4, accumulator_mode: AccumulatorMode = AccumulatorMode.SIGNED16
) -> Network:
    """
    Hand-weighted 2-layer classifier of 3x3 images into 3 classes.

    Class k is a bright column k. Filter k weighs column k with +1 and the
    other columns with -0.5, then ReLU; an identity FC layer with SoftMax
    turns the three responses into class probabilities.
    """
    filters = np.full((3, 1, 3, 3), -0.5)
    for k in range(3):
        filters[k, 0, :, k] = 1.0
    conv = LayerSpec(LayerKind.QCONV, 3, filters, (3, 3), (1, 1), Activation.RELU)
    fc = LayerSpec(LayerKind.FC, 3, np.eye(3), activation=Activation.SOFTMAX)
    return Network(TOY_INPUT, (conv, fc), bits, accumulator_mode)


def toy_inputs(noise: float = 0.1, count: int = 10, seed: int = 0) -> List[Tuple[Tensor, int]]:
    """
    Crafted inputs for the toy classifier with their labels.

    Each image is a bright column (1.0) on a dark background plus uniform
    noise in [0, noise), so the class margin stays well above the
    quantization error.
    """
    rng = np.random.default_rng(seed)
    samples = []
    for index in range(count):
        label = index % 3
        image = rng.uniform(0.0, noise, size=TOY_INPUT)
        image[0, :, label] = 1.0
        samples.append((Tensor(image), label))
    return samples


def argmax_agreement(net: Network, samples: Sequence[Tuple[Tensor, int]]) -> float:
    """Fraction of samples where the quantized and float networks pick the same class."""
    if not samples:
        return 1.0
    agree = sum(
        int(np.argmax(network_forward(net, x)) == np.argmax(float_forward(net, x)))
        for x, _ in samples
    )
    return agree / len(samples)
