"""
nibblegemm Networks

CHW tensors, im2col, quantized and float layers, mixed float/quantized
networks and the JSON model format.
"""

# Tensors
from .tensor import Tensor, ScaledActivation

# im2col
from .im2col import im2col, conv_output_size

# Layers
from .layers import (
    LayerKind,
    Activation,
    LayerSpec,
    QuantizedFilters,
    check_channel_limit,
    activation_dtype,
    apply_activation,
    quantized_conv_forward,
    reference_conv_forward,
    float_layer_forward,
    float_conv_forward,
)

# Networks
from .network import (
    Network,
    DEMO_INPUT,
    TOY_INPUT,
    trace_forward,
    network_forward,
    float_forward,
    build_demo_network,
    build_toy_classifier,
    toy_inputs,
    argmax_agreement,
)

# Model files
from .model_io import (
    MODEL_HEADER,
    save_model,
    load_model,
    dumps_model,
    loads_model,
)

__all__ = [
    # Tensors
    "Tensor",
    "ScaledActivation",

    # im2col
    "im2col",
    "conv_output_size",

    # Layers
    "LayerKind",
    "Activation",
    "LayerSpec",
    "QuantizedFilters",
    "check_channel_limit",
    "activation_dtype",
    "apply_activation",
    "quantized_conv_forward",
    "reference_conv_forward",
    "float_layer_forward",
    "float_conv_forward",

    # Networks
    "Network",
    "DEMO_INPUT",
    "TOY_INPUT",
    "trace_forward",
    "network_forward",
    "float_forward",
    "build_demo_network",
    "build_toy_classifier",
    "toy_inputs",
    "argmax_agreement",

    # Model files
    "MODEL_HEADER",
    "save_model",
    "load_model",
    "dumps_model",
    "loads_model",
]
