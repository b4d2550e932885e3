"""Run configuration parsing, validation and rendering.

Config text is a sequence of whitespace-separated ``key=value`` tokens, with an
optional leading bare word naming the command and ``#`` comments. Search bounds
can be overridden from the ``SUPERGRADE_BOUNDS`` environment variable.
"""

import logging
import os
from pathlib import Path
from typing import Any, Mapping, Optional

from pydantic import ValidationError

from .abelian_group import FiniteAbelianGroup, GroupError
from .errors import ConfigError
from .schemas import Bounds, Command, OutputFormat, RunConfig
from .supermatrix import SignatureError, SuperSignature

logger = logging.getLogger(__name__)

BOUNDS_ENV = "SUPERGRADE_BOUNDS"

CONFIG_KEYS = (
    "command", "group", "sig", "theta", "inv", "p", "q", "h", "elements", "k", "perm",
    "embedding", "kind", "claim", "n", "m", "fine_k", "format", "bounds",
)
_INT_KEYS = {"k", "n", "m", "fine_k"}


class ConfigSyntaxError(ConfigError):
    """Malformed config text, with the 1-based position of the offending token."""

    def __init__(self, message: str, line: int, column: int):
        self.line = line
        self.column = column
        super().__init__(f"line {line}, column {column}: {message}")


class ConfigSemanticError(ConfigError):
    """Well-formed config whose values do not fit together."""
    pass


# ========== Validation ==========

def _parse_sizes(text: str) -> tuple[int, ...]:
    return tuple(int(x) for x in text.split(",") if x.strip())


class ConfigValidator:
    """Validates run configurations."""

    @staticmethod
    def validate_bounds(values: Mapping[str, Any]) -> tuple[bool, Optional[str]]:
        """Validate a bounds override mapping.

        Returns:
            Tuple of (is_valid, error_message)
        """
        for key, value in values.items():
            if key not in Bounds.model_fields:
                return False, f"Unknown bound: {key}"
            if not isinstance(value, int) or value < 1:
                return False, f"Bound {key} must be a positive integer, got {value!r}"
        return True, None

    @staticmethod
    def validate_config(config: RunConfig) -> tuple[bool, list[str]]:
        """Check that the values of a config parse and agree with each other.

        Returns:
            Tuple of (is_valid, list of error messages)
        """
        errors = []
        group = None
        sig = None

        if config.group is not None:
            try:
                group = FiniteAbelianGroup.parse(config.group)
            except GroupError as e:
                errors.append(f"group: {e}")

        if config.sig is not None:
            try:
                sig = SuperSignature.parse(config.sig)
            except SignatureError as e:
                errors.append(f"sig: {e}")

        for key in ("p", "q", "perm"):
            value = getattr(config, key)
            if value is None:
                continue
            try:
                sizes = _parse_sizes(value)
            except ValueError:
                errors.append(f"{key}: expected comma-separated integers, got {value!r}")
                continue
            if any(s < 0 for s in sizes):
                errors.append(f"{key}: entries must be non-negative")

        for key in ("k", "n", "m", "fine_k"):
            value = getattr(config, key)
            if value is not None and value < 0:
                errors.append(f"{key}: must be non-negative, got {value}")

        if group is None:
            return len(errors) == 0, errors

        for key in ("theta", "elements", "embedding", "h"):
            value = getattr(config, key)
            if value is None:
                continue
            try:
                parsed = group.parse_elements(value)
            except GroupError as e:
                errors.append(f"{key}: {e}")
                continue
            if key == "theta" and sig is not None and len(parsed) != sig.size:
                errors.append(f"theta: has {len(parsed)} entries, signature ({sig}) needs {sig.size}")
            if key == "elements" and len(set(parsed)) != len(parsed):
                errors.append("elements: distinctness violated, g_i must be pairwise distinct")
            if key == "h" and len(parsed) != 1:
                errors.append(f"h: expected one element, got {len(parsed)}")

        return len(errors) == 0, errors


# ========== Bounds ==========

def parse_bounds(text: str) -> Bounds:
    """Parse 'max_group_order=32,max_size=10' into Bounds over the defaults.

    Raises:
        ConfigError: On unknown keys or non-positive values
    """
    values: dict[str, Any] = {}
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        key, sep, value = part.partition("=")
        if not sep:
            raise ConfigError(f"Bound {part!r} is not key=value")
        try:
            values[key.strip()] = int(value)
        except ValueError:
            raise ConfigError(f"Bound {key.strip()} must be an integer, got {value!r}")
    is_valid, error = ConfigValidator.validate_bounds(values)
    if not is_valid:
        raise ConfigError(error)
    return Bounds(**values)


def render_bounds(bounds: Bounds) -> str:
    return ",".join(f"{key}={getattr(bounds, key)}" for key in Bounds.model_fields)


def bounds_from_env(environ: Optional[Mapping[str, str]] = None) -> Bounds:
    """Default bounds, overridden by SUPERGRADE_BOUNDS when it is set."""
    environ = os.environ if environ is None else environ
    text = environ.get(BOUNDS_ENV)
    if not text:
        return Bounds()
    bounds = parse_bounds(text)
    logger.warning(f"Search bounds overridden from {BOUNDS_ENV}: {render_bounds(bounds)}")
    return bounds


# ========== Parsing ==========

def _tokens(text: str):
    """Yield (token, line, column) with 1-based positions, skipping comments."""
    for line_no, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0]
        col = 0
        while col < len(body):
            if body[col].isspace():
                col += 1
                continue
            start = col
            while col < len(body) and not body[col].isspace():
                col += 1
            yield body[start:col], line_no, start + 1


def parse_config(text: str) -> RunConfig:
    """Parse config text into a RunConfig.

    Raises:
        ConfigSyntaxError: On unknown keys, repeated keys, bare words or bad integers
        ConfigSemanticError: On a missing command or values that do not fit together
    """
    values: dict[str, Any] = {}
    first = True
    for token, line, col in _tokens(text):
        key, sep, value = token.partition("=")
        if not sep:
            if first and key in {c.value for c in Command}:
                values["command"] = key
                first = False
                continue
            raise ConfigSyntaxError(f"expected key=value, got {token!r}", line, col)
        first = False
        if key not in CONFIG_KEYS:
            raise ConfigSyntaxError(f"unknown key {key!r}", line, col)
        if key in values:
            raise ConfigSyntaxError(f"key {key!r} given twice", line, col)
        if not value:
            raise ConfigSyntaxError(f"key {key!r} has an empty value", line, col + len(key) + 1)
        if key in _INT_KEYS:
            try:
                values[key] = int(value)
            except ValueError:
                raise ConfigSyntaxError(f"{key} must be an integer, got {value!r}", line, col + len(key) + 1)
        elif key == "bounds":
            try:
                values[key] = parse_bounds(value)
            except ConfigError as e:
                raise ConfigSyntaxError(str(e), line, col + len(key) + 1)
        else:
            values[key] = value

    if "command" not in values:
        raise ConfigSemanticError("config names no command")
    try:
        config = RunConfig(**values)
    except ValidationError as e:
        raise ConfigSemanticError(f"invalid config: {e.errors()[0]['msg']}") from e

    is_valid, errors = ConfigValidator.validate_config(config)
    if not is_valid:
        logger.error(f"Config validation failed: {'; '.join(errors)}")
        raise ConfigSemanticError("; ".join(errors))
    return config


def render_config(config: RunConfig) -> str:
    """Canonical text form; parse_config(render_config(c)) == c."""
    parts = [config.command.value]
    for key in CONFIG_KEYS[1:]:
        value = getattr(config, key)
        if value is None:
            continue
        if key == "format":
            if value == OutputFormat.JSON:
                continue
            value = value.value
        elif key == "bounds":
            if value == Bounds():
                continue
            value = render_bounds(value)
        parts.append(f"{key}={value}")
    return " ".join(parts)


def load_config_file(path: str | Path) -> RunConfig:
    """Read and parse a config file.

    Raises:
        ConfigError: If the file cannot be read or parsed
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"Cannot read config file {path}: {e}") from e
    logger.debug(f"Loaded config from {path}")
    return parse_config(text)
