"""
Tests for Runtime Settings
"""

import logging
from pathlib import Path

import pytest

from nibblegemm.config import LOG_FORMAT, Settings, configure_logging
from nibblegemm.validation import BenchConfigError


class TestSettings:
    def test_defaults(self):
        settings = Settings.from_env({})

        assert settings.log_level == "INFO"
        assert settings.workers == 1
        assert settings.bench_csv == Path("bench.csv")

    def test_reads_environment(self):
        settings = Settings.from_env(
            {
                "NIBBLEGEMM_LOG_LEVEL": "debug",
                "NIBBLEGEMM_WORKERS": "4",
                "NIBBLEGEMM_BENCH_CSV": "out/results.csv",
            }
        )

        assert settings.log_level == "DEBUG"
        assert settings.workers == 4
        assert settings.bench_csv == Path("out/results.csv")

    def test_empty_values_are_ignored(self):
        assert Settings.from_env({"NIBBLEGEMM_WORKERS": ""}).workers == 1

    def test_invalid_level(self):
        with pytest.raises(BenchConfigError, match="NIBBLEGEMM_LOG_LEVEL") as exc_info:
            Settings.from_env({"NIBBLEGEMM_LOG_LEVEL": "LOUD"})

        assert exc_info.value.field == "log_level"

    @pytest.mark.parametrize("value", ["0", "two"])
    def test_invalid_workers(self, value):
        with pytest.raises(BenchConfigError, match="NIBBLEGEMM_WORKERS"):
            Settings.from_env({"NIBBLEGEMM_WORKERS": value})

    def test_reads_os_environ(self, monkeypatch):
        monkeypatch.setenv("NIBBLEGEMM_WORKERS", "3")
        assert Settings.from_env().workers == 3


class TestConfigureLogging:
    def test_format(self):
        assert LOG_FORMAT == "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

    def test_does_not_raise_on_unknown_level(self):
        configure_logging("verbose")
        assert logging.getLogger().handlers
