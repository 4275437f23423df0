"""Tests for palinsieve.util: error classes, settings, and resource guards."""

import pytest

from palinsieve.util import (
    DEFAULTS,
    DomainError,
    InvalidDenominatorError,
    PalinsieveError,
    PreconditionError,
    ResourceGuardError,
    get_setting,
    guard_memory,
    guard_size,
)


class TestErrors:
    def test_default_exit_code(self):
        assert PalinsieveError("x").exit_code == 2

    def test_custom_exit_code(self):
        assert PalinsieveError("x", exit_code=1).exit_code == 1

    def test_domain_errors_are_value_errors(self):
        assert issubclass(DomainError, ValueError)
        assert issubclass(PreconditionError, ValueError)
        assert issubclass(InvalidDenominatorError, DomainError)


class TestSettings:
    def test_defaults_without_config(self):
        assert get_setting("max_factor_bits") == DEFAULTS["max_factor_bits"]

    def test_config_file_overrides(self, config_dir):
        (config_dir / "config.json").write_text('{"mertens_limit": 4096}')
        assert get_setting("mertens_limit") == 4096

    def test_invalid_json_falls_back(self, config_dir):
        (config_dir / "config.json").write_text("{not json")
        assert get_setting("mertens_limit") == DEFAULTS["mertens_limit"]

    def test_non_object_falls_back(self, config_dir):
        (config_dir / "config.json").write_text("[1, 2, 3]")
        assert get_setting("max_grid") == DEFAULTS["max_grid"]

    @pytest.mark.parametrize("value", ["0", "-5", '"big"', "true", "1.5"])
    def test_bad_values_fall_back(self, config_dir, value):
        (config_dir / "config.json").write_text(f'{{"max_grid": {value}}}')
        assert get_setting("max_grid") == DEFAULTS["max_grid"]

    def test_unknown_key(self):
        with pytest.raises(KeyError):
            get_setting("colour")

    def test_guard_env_override(self, monkeypatch):
        monkeypatch.setenv("PALINSIEVE_GUARD_MB", "64")
        assert get_setting("guard_mb") == 64

    def test_guard_env_beats_config(self, monkeypatch, config_dir):
        (config_dir / "config.json").write_text('{"guard_mb": 1024}')
        assert get_setting("guard_mb") == 1024
        monkeypatch.setenv("PALINSIEVE_GUARD_MB", "8")
        assert get_setting("guard_mb") == 8

    def test_guard_env_not_an_integer(self, monkeypatch):
        monkeypatch.setenv("PALINSIEVE_GUARD_MB", "lots")
        with pytest.raises(PalinsieveError, match="integer"):
            get_setting("guard_mb")

    def test_guard_env_not_positive(self, monkeypatch):
        monkeypatch.setenv("PALINSIEVE_GUARD_MB", "0")
        with pytest.raises(PalinsieveError, match="positive"):
            get_setting("guard_mb")


class TestGuards:
    def test_memory_under_cap(self):
        guard_memory(1024, "small array")

    def test_memory_over_cap(self, monkeypatch):
        monkeypatch.setenv("PALINSIEVE_GUARD_MB", "1")
        with pytest.raises(ResourceGuardError, match="PALINSIEVE_GUARD_MB"):
            guard_memory(2 * 1024 * 1024, "big array")

    def test_size(self, config_dir):
        (config_dir / "config.json").write_text('{"max_grid": 10}')
        guard_size(10, "max_grid", "grid")
        with pytest.raises(ResourceGuardError, match="max_grid"):
            guard_size(11, "max_grid", "grid")
