"""Shared test fixtures."""

import pytest

_ENV_VARS = [
    "PALINSIEVE_GUARD_MB",
    "PALINSIEVE_CONFIG_DIR",
]


@pytest.fixture(autouse=True)
def _isolate_env(monkeypatch, tmp_path):
    """Keep developer-machine PALINSIEVE_* settings out of the test suite."""
    for var in _ENV_VARS:
        monkeypatch.delenv(var, raising=False)
    monkeypatch.setenv("PALINSIEVE_CONFIG_DIR", str(tmp_path / "config"))


@pytest.fixture
def config_dir(tmp_path):
    """The isolated config directory, created."""
    path = tmp_path / "config"
    path.mkdir(parents=True, exist_ok=True)
    return path
