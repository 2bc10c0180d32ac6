"""
Flat key/value configuration files.

One ``section.field = value`` assignment per line; ``#`` starts a comment.
Tuples are written ``a,b`` and an unset optional is written ``none``.
The same format is used for ``config.resolved`` in every run directory.
"""

import logging
from pathlib import Path
from typing import Any, Dict, Mapping, Optional

from pydantic import BaseModel, ValidationError

from config.run_config import RunConfig
from utils.errors import ConfigError

logger = logging.getLogger(__name__)


def _format_value(value: Any) -> str:
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (tuple, list)):
        return ",".join(_format_value(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _parse_value(raw: Any) -> Any:
    if isinstance(raw, str) and raw.strip().lower() == "none":
        return None
    return raw.strip() if isinstance(raw, str) else raw


def flatten_config(model: BaseModel, prefix: str = "") -> Dict[str, Any]:
    """Dotted key -> value for every leaf field, in declaration order."""
    flat: Dict[str, Any] = {}
    for name in type(model).model_fields:
        value = getattr(model, name)
        key = f"{prefix}{name}"
        if isinstance(value, BaseModel):
            flat.update(flatten_config(value, key + "."))
        else:
            flat[key] = value
    return flat


def dump_config(config: RunConfig) -> str:
    return "".join(f"{key} = {_format_value(value)}\n" for key, value in flatten_config(config).items())


def write_config(config: RunConfig, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dump_config(config), encoding="utf-8")
    return path


def parse_config_text(text: str, source: str = "<config>") -> Dict[str, str]:
    """Read assignments; raises ConfigError naming the offending line."""
    entries: Dict[str, str] = {}
    for number, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{number}: expected 'key = value', got '{line}'")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError(f"{source}:{number}: missing key")
        entries[key] = value
    return entries


def _validation_error(exc: ValidationError) -> ConfigError:
    first = exc.errors()[0]
    field = ".".join(str(part) for part in first["loc"]) or None
    return ConfigError(first["msg"], field=field)


def apply_overrides(config: RunConfig, overrides: Mapping[str, Any]) -> RunConfig:
    """Return a new config with dotted-key overrides applied and validated."""
    if not overrides:
        return config
    data = config.model_dump()
    for key, raw in overrides.items():
        parts = key.split(".")
        node = data
        for part in parts[:-1]:
            child = node.get(part)
            if not isinstance(child, dict):
                if part in node:
                    raise ConfigError("not a section", field=".".join(parts[: parts.index(part) + 1]))
                child = node[part] = {}
            node = child
        node[parts[-1]] = _parse_value(raw)
    try:
        return RunConfig.model_validate(data)
    except ValidationError as exc:
        raise _validation_error(exc) from exc


def load_config(path: Path, base: Optional[RunConfig] = None) -> RunConfig:
    """Load a config file on top of ``base`` (defaults when omitted)."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    entries = parse_config_text(path.read_text(encoding="utf-8"), source=str(path))
    logger.debug(f"Read {len(entries)} settings from {path}")
    return apply_overrides(base or RunConfig(), entries)
