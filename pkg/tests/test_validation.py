"""
Tests for the Error Hierarchy and Input Validators

Every failure the library reports carries a message, a suggestion and the
offending field, and the validators reject bad settings consistently.
"""

import numpy as np
import pytest

from nibblegemm.validation import (
    BenchConfigError,
    ChannelLimitError,
    KernelError,
    ModelFormatError,
    NibbleGemmError,
    OverflowRiskError,
    QuantizationError,
    parse_int_list,
    parse_name_list,
    validate_bits,
    validate_finite,
    validate_kernel_height,
    validate_positive_int,
)


class TestNibbleGemmError:
    """Test the base error class."""

    def test_error_creation(self):
        """Test creation with all parameters."""
        error = NibbleGemmError("Invalid input", "Please try again", "bits")

        assert error.message == "Invalid input"
        assert error.suggestion == "Please try again"
        assert error.field == "bits"
        assert str(error) == "Invalid input"

    def test_error_to_dict(self):
        """Test conversion to dictionary."""
        error = NibbleGemmError("Invalid input", "Please try again", "bits")

        assert error.to_dict() == {
            "error": "Invalid input",
            "suggestion": "Please try again",
            "field": "bits",
        }

    def test_error_minimal(self):
        """Test with minimal parameters."""
        result = NibbleGemmError("Invalid input").to_dict()

        assert result == {"error": "Invalid input"}

    def test_subclasses_share_base(self):
        for cls in (QuantizationError, KernelError, BenchConfigError):
            assert issubclass(cls, NibbleGemmError)


class TestStructuredErrors:
    """Errors that carry extra context."""

    def test_overflow_risk_error(self):
        error = OverflowRiskError(146, 145, "signed16")

        assert error.depth == 146
        assert error.limit == 145
        assert "146" in error.message and "145" in error.message
        assert error.field == "depth"

    def test_channel_limit_error_names_limit(self):
        error = ChannelLimitError(17, 16, (3, 3), "signed16", layer_index=2)

        assert error.limit == 16
        assert "16 channels" in error.message
        assert error.message.startswith("Layer 2:")

    def test_model_format_error_location(self):
        error = ModelFormatError("bad value", "layers.1.kernel")

        assert error.location == "layers.1.kernel"
        assert str(error) == "layers.1.kernel: bad value"


class TestValidateBits:
    @pytest.mark.parametrize("bits", [4, 8])
    def test_supported(self, bits):
        assert validate_bits(bits) == bits

    @pytest.mark.parametrize("bits", [0, 2, 16, True, "4", None])
    def test_unsupported(self, bits):
        with pytest.raises(QuantizationError) as exc_info:
            validate_bits(bits)
        assert exc_info.value.field == "bits"


class TestValidateKernelHeight:
    @pytest.mark.parametrize("height", [8, 24])
    def test_supported(self, height):
        assert validate_kernel_height(height) == height

    @pytest.mark.parametrize("height", [4, 16, 32, False])
    def test_unsupported(self, height):
        with pytest.raises(KernelError):
            validate_kernel_height(height)


class TestValidateFinite:
    def test_returns_float64(self):
        result = validate_finite([1, 2, 3])
        assert result.dtype == np.float64

    def test_empty(self):
        with pytest.raises(QuantizationError, match="empty"):
            validate_finite([])

    @pytest.mark.parametrize("bad", [np.nan, np.inf, -np.inf])
    def test_non_finite(self, bad):
        with pytest.raises(QuantizationError, match="non-finite"):
            validate_finite([0.0, bad])


class TestValidatePositiveInt:
    def test_valid(self):
        assert validate_positive_int(3, "workers") == 3
        assert validate_positive_int("5", "workers") == 5

    def test_below_minimum(self):
        with pytest.raises(NibbleGemmError, match="at least 1"):
            validate_positive_int(0, "workers")

    def test_not_a_number(self):
        with pytest.raises(NibbleGemmError, match="must be a number"):
            validate_positive_int("many", "workers")

    @pytest.mark.parametrize("value", [1.5, np.float64(2.25), float("nan")])
    def test_rejects_fractions(self, value):
        with pytest.raises(NibbleGemmError, match="whole number") as exc_info:
            validate_positive_int(value, "workers")

        assert exc_info.value.field == "workers"

    def test_integral_float(self):
        assert validate_positive_int(4.0, "workers") == 4


class TestParseLists:
    def test_int_list(self):
        assert parse_int_list("8, 24", "heights") == [8, 24]

    def test_int_list_empty(self):
        with pytest.raises(BenchConfigError, match="cannot be empty"):
            parse_int_list(" , ", "heights")

    @pytest.mark.parametrize("text", ["8,x", "8,0", "-1"])
    def test_int_list_bad_entry(self, text):
        with pytest.raises(BenchConfigError):
            parse_int_list(text, "heights")

    def test_name_list_dedupes_and_lowercases(self):
        assert parse_name_list("U4,f32,u4", ("f32", "u4"), "engines") == ["u4", "f32"]

    def test_name_list_unknown(self):
        with pytest.raises(BenchConfigError, match="Unknown engines: fp16"):
            parse_name_list("f32,fp16", ("f32", "u4"), "engines")

    def test_name_list_empty(self):
        with pytest.raises(BenchConfigError):
            parse_name_list("", ("f32",), "engines")
