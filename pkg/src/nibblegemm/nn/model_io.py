"""
Model File Format

A model is one JSON document:

    {
      "header": "nibblegemm-model v1",
      "input": {"channels": 1, "height": 25, "width": 33},
      "bits": 4,
      "accumulator_mode": "signed16",
      "kernel_height": 24,
      "layers": [
        {"kind": "qconv", "filters": 8, "kernel": [5, 5], "stride": [1, 1],
         "activation": "relu",
         "weights": {"shape": [8, 1, 5, 5], "dtype": "<f8", "data": "<base64>"}},
        ...
      ]
    }

Weight blobs are little-endian float arrays ("<f4" or "<f8"), base64
encoded, in C order. Only float weights are stored; quantized filters are
derived when the network is built. Float64 weights round-trip bit-exactly.
"""

import base64
import binascii
import json
import logging
from pathlib import Path
from typing import List, Literal, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from ..gemm import AccumulatorMode
from ..validation import ChannelLimitError, GeometryError, ModelFormatError, NibbleGemmError
from .layers import Activation, LayerKind, LayerSpec
from .network import Network

logger = logging.getLogger(__name__)

MODEL_HEADER = "nibblegemm-model v1"
HEADER_PREFIX = "nibblegemm-model"


class BlobModel(BaseModel):
    """Base64-encoded little-endian float array."""
    model_config = ConfigDict(extra="forbid")

    shape: List[int] = Field(..., min_length=1)
    dtype: Literal["<f4", "<f8"] = "<f8"
    data: str


class InputModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    channels: int = Field(..., ge=1)
    height: int = Field(..., ge=1)
    width: int = Field(..., ge=1)


class LayerModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: LayerKind
    filters: int = Field(..., ge=1)
    kernel: Tuple[int, int] = (1, 1)
    stride: Tuple[int, int] = (1, 1)
    activation: Activation = Activation.NONE
    weights: BlobModel
    bias: Optional[BlobModel] = None


class ModelFile(BaseModel):
    """Schema of a version 1 model file."""
    model_config = ConfigDict(extra="forbid")

    header: Literal["nibblegemm-model v1"]
    input: InputModel
    bits: Literal[4, 8] = 4
    accumulator_mode: AccumulatorMode = AccumulatorMode.SIGNED16
    kernel_height: Literal[8, 24] = 24
    layers: List[LayerModel] = Field(..., min_length=1)


def encode_blob(array: np.ndarray) -> BlobModel:
    """Encode a float array as a little-endian base64 blob."""
    dtype = "<f4" if array.dtype == np.float32 else "<f8"
    raw = np.ascontiguousarray(array, dtype=dtype).tobytes()
    return BlobModel(
        shape=list(array.shape),
        dtype=dtype,  # type: ignore[arg-type]
        data=base64.b64encode(raw).decode("ascii"),
    )


def decode_blob(blob: BlobModel, location: str) -> np.ndarray:
    """
    Decode a blob back into a float64 array.

    Raises:
        ModelFormatError: If the data is not base64 or does not fill the shape
    """
    try:
        raw = base64.b64decode(blob.data, validate=True)
    except (binascii.Error, ValueError) as e:
        raise ModelFormatError(
            f"Invalid base64 data: {e}",
            f"{location}.data",
            "Re-export the model with save_model()",
        )
    if min(blob.shape) < 0:
        raise ModelFormatError(f"Negative dimension in shape {blob.shape}", f"{location}.shape")
    itemsize = np.dtype(blob.dtype).itemsize
    expected = int(np.prod(blob.shape)) * itemsize
    if len(raw) != expected:
        raise ModelFormatError(
            f"Blob holds {len(raw)} bytes, shape {blob.shape} of {blob.dtype} needs {expected}",
            f"{location}.data",
            "The file may be truncated; re-export the model",
        )
    return np.frombuffer(raw, dtype=blob.dtype).reshape(blob.shape).astype(np.float64)


def network_to_document(net: Network) -> ModelFile:
    layers = []
    for layer in net.layers:
        layers.append(
            LayerModel(
                kind=layer.kind,
                filters=layer.filters,
                kernel=layer.kernel,
                stride=layer.stride,
                activation=layer.activation,
                weights=encode_blob(layer.weights),
                bias=encode_blob(layer.bias) if layer.bias is not None else None,
            )
        )
    channels, height, width = net.input_shape
    return ModelFile(
        header=MODEL_HEADER,
        input=InputModel(channels=channels, height=height, width=width),
        bits=net.bits,  # type: ignore[arg-type]
        accumulator_mode=net.accumulator_mode,
        kernel_height=net.kernel_height,  # type: ignore[arg-type]
        layers=layers,
    )


def dumps_model(net: Network) -> str:
    """Serialize a network to the JSON model format."""
    return network_to_document(net).model_dump_json(indent=2, exclude_none=True)


def loads_model(text: Union[str, bytes]) -> Network:
    """
    Parse a JSON model document into a Network.

    Raises:
        ModelFormatError: If the text is not valid JSON, has an unknown
            version or does not match the schema
        ChannelLimitError: If a quantized layer breaks the channel limit
            under the declared accumulator mode
    """
    try:
        raw = json.loads(text)
    except UnicodeDecodeError as e:
        raise ModelFormatError(
            f"Not valid UTF-8: {e.reason}",
            f"byte {e.start}",
            "Save the model file as UTF-8 JSON",
        )
    except json.JSONDecodeError as e:
        raise ModelFormatError(
            e.msg,
            f"line {e.lineno}, column {e.colno}",
            "The file is not valid JSON; it may be truncated",
        )
    _check_header(raw)

    try:
        document = ModelFile.model_validate(raw)
    except ValidationError as e:
        first = e.errors()[0]
        location = ".".join(str(part) for part in first["loc"])
        raise ModelFormatError(first["msg"], location, "Check the field against the model format")

    layers = []
    for index, entry in enumerate(document.layers):
        where = f"layers.{index}"
        weights = decode_blob(entry.weights, f"{where}.weights")
        bias = decode_blob(entry.bias, f"{where}.bias") if entry.bias is not None else None
        try:
            layers.append(
                LayerSpec(
                    kind=entry.kind,
                    filters=entry.filters,
                    weights=weights,
                    kernel=entry.kernel,
                    stride=entry.stride,
                    activation=entry.activation,
                    bias=bias,
                )
            )
        except NibbleGemmError as e:
            raise ModelFormatError(e.message, where, e.suggestion) from e

    shape = (document.input.channels, document.input.height, document.input.width)
    try:
        return Network(
            shape,
            tuple(layers),
            document.bits,
            document.accumulator_mode,
            document.kernel_height,
        )
    except ChannelLimitError:
        raise
    except NibbleGemmError as e:
        location = "layers" if isinstance(e, GeometryError) else e.field
        raise ModelFormatError(e.message, location, e.suggestion) from e


def _check_header(raw: object) -> None:
    if not isinstance(raw, dict):
        raise ModelFormatError(
            "Top level must be a JSON object", "$", "Start the file with the model header object"
        )
    header = raw.get("header")
    if header == MODEL_HEADER:
        return
    if isinstance(header, str) and header.startswith(HEADER_PREFIX):
        raise ModelFormatError(
            f"Unsupported model version '{header}'",
            "header",
            f"This build reads '{MODEL_HEADER}' files",
        )
    raise ModelFormatError(
        f"Missing or unknown header {header!r}",
        "header",
        f"Model files start with \"header\": \"{MODEL_HEADER}\"",
    )


def save_model(net: Network, path: Union[str, Path]) -> Path:
    """Write a network to `path` and return the path."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps_model(net) + "\n", encoding="utf-8")
    logger.info(f"Saved {len(net.layers)}-layer model to {path}")
    return path


def load_model(path: Union[str, Path]) -> Network:
    """
    Read a network from `path`.

    Raises:
        ModelFormatError: If the file is missing or malformed
        ChannelLimitError: If a quantized layer breaks the channel limit
    """
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as e:
        raise ModelFormatError(f"Cannot read model file: {e.strerror}", str(path))
    net = loads_model(data)
    logger.info(f"Loaded {len(net.layers)}-layer model from {path}")
    return net
