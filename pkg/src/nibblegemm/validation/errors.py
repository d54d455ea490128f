"""
nibblegemm Error Hierarchy

Every failure the library reports on purpose derives from NibbleGemmError,
which carries a short message, an optional suggestion for the caller and
the name of the offending field.
"""

from typing import Dict, Optional


class NibbleGemmError(Exception):
    """Base exception with a helpful suggestion and the offending field."""

    def __init__(self, message: str, suggestion: str = "", field: str = ""):
        self.message = message
        self.suggestion = suggestion
        self.field = field
        super().__init__(message)

    def to_dict(self) -> Dict[str, str]:
        """Convert to dictionary for consistent error reports."""
        result = {"error": self.message}
        if self.suggestion:
            result["suggestion"] = self.suggestion
        if self.field:
            result["field"] = self.field
        return result


class QuantizationError(NibbleGemmError):
    """Raised when quantization parameters or inputs are invalid."""
    pass


class PackingError(NibbleGemmError):
    """Raised when an operand cannot be packed or unpacked."""
    pass


class KernelError(NibbleGemmError):
    """Raised when a micro-kernel receives panels that break its contract."""
    pass


class DimensionMismatchError(NibbleGemmError):
    """Raised when matrix inner dimensions do not agree."""
    pass


class OverflowRiskError(NibbleGemmError):
    """Raised when a multiplication depth could wrap the accumulators."""

    def __init__(self, depth: int, limit: int, mode: str, suggestion: str = ""):
        self.depth = depth
        self.limit = limit
        self.mode = mode
        super().__init__(
            f"Depth {depth} exceeds the overflow-safe bound {limit} for {mode} accumulators",
            suggestion,
            "depth",
        )


class ChannelLimitError(NibbleGemmError):
    """Raised when a quantized convolution has too many input channels."""

    def __init__(
        self,
        channels: int,
        limit: int,
        kernel: tuple,
        mode: str,
        layer_index: Optional[int] = None,
    ):
        self.channels = channels
        self.limit = limit
        self.layer_index = layer_index
        where = f"Layer {layer_index}: " if layer_index is not None else ""
        super().__init__(
            f"{where}{channels} input channels exceed the limit of {limit} channels "
            f"for a {kernel[0]}x{kernel[1]} kernel under {mode} accumulators",
            "Reduce the input channels, use a smaller kernel or the unsigned16_extended mode",
            "channels",
        )


class GeometryError(NibbleGemmError):
    """Raised when tensor shapes do not chain through a layer."""
    pass


class ModelFormatError(NibbleGemmError):
    """Raised when a model file cannot be parsed; carries the failing location."""

    def __init__(self, message: str, location: str = "", suggestion: str = ""):
        self.location = location
        text = f"{location}: {message}" if location else message
        super().__init__(text, suggestion, "model")


class BenchConfigError(NibbleGemmError):
    """Raised for invalid benchmark or verification settings."""
    pass


class OracleError(NibbleGemmError):
    """Raised when a reference oracle receives unusable operands."""
    pass
