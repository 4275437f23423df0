"""Error classes, configuration, and resource guards."""

import json
import os
from pathlib import Path


class PalinsieveError(Exception):
    """Base error for palinsieve operations."""

    def __init__(self, message: str, exit_code: int = 2):
        super().__init__(message)
        self.exit_code = exit_code


class DomainError(PalinsieveError, ValueError):
    """Argument outside the domain of an operation (n <= 0, q = 0, ...)."""


class InvalidDenominatorError(DomainError):
    """An angle was built with denominator zero."""


class NoInverseError(DomainError):
    """The base has no inverse modulo q."""


class PreconditionError(PalinsieveError, ValueError):
    """A documented precondition of an operation does not hold."""


class ResourceGuardError(PalinsieveError):
    """A computation would exceed a configured size or memory cap."""


class FitError(PalinsieveError):
    """A least-squares fit has too few usable points."""


class NumericError(PalinsieveError, ArithmeticError):
    """A floating-point computation produced NaN."""


def _config_dir() -> Path:
    override = os.environ.get("PALINSIEVE_CONFIG_DIR")
    if override:
        return Path(override)
    return Path.home() / ".config" / "palinsieve"


DEFAULTS = {
    "trial_division_cutoff": 10_000,
    "mertens_limit": 1_000_000,
    "guard_mb": 512,
    "max_coeff_size": 10**8,
    "max_grid": 2**24,
    "max_factor_bits": 128,
}


def _load_config() -> dict:
    """Load palinsieve config with defensive fallback for invalid JSON."""
    path = _config_dir() / "config.json"
    if not path.exists():
        return {}
    try:
        with path.open() as f:
            data = json.load(f)
    except (json.JSONDecodeError, OSError):
        return {}
    if isinstance(data, dict):
        return data
    return {}


def get_setting(key: str) -> int:
    """Return a numeric setting: environment override, then config file, then default.

    Only ``guard_mb`` has an environment override (``PALINSIEVE_GUARD_MB``).
    Values that are not positive integers fall back to the default.
    """
    if key not in DEFAULTS:
        raise KeyError(key)
    if key == "guard_mb":
        raw = os.environ.get("PALINSIEVE_GUARD_MB")
        if raw:
            try:
                value = int(raw)
            except ValueError:
                raise PalinsieveError(
                    f"PALINSIEVE_GUARD_MB must be an integer, got {raw!r}"
                ) from None
            if value <= 0:
                raise PalinsieveError("PALINSIEVE_GUARD_MB must be positive")
            return value
    value = _load_config().get(key)
    if isinstance(value, int) and not isinstance(value, bool) and value > 0:
        return value
    return DEFAULTS[key]


def guard_memory(n_bytes: int, what: str) -> None:
    """Raise ResourceGuardError when an allocation would exceed the memory cap."""
    cap_mb = get_setting("guard_mb")
    if n_bytes > cap_mb * 1024 * 1024:
        raise ResourceGuardError(
            f"{what} needs about {n_bytes // (1024 * 1024)} MB, "
            f"over the {cap_mb} MB cap (set PALINSIEVE_GUARD_MB to raise it)"
        )


def guard_size(size: int, key: str, what: str) -> None:
    """Raise ResourceGuardError when ``size`` exceeds the configured ``key`` cap."""
    cap = get_setting(key)
    if size > cap:
        raise ResourceGuardError(f"{what} is {size}, over the {key} cap of {cap}")
