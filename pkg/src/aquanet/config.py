"""Bundled defaults and JSON config merging."""

from __future__ import annotations

import copy
import json
from importlib import resources
from pathlib import Path
from typing import Any, Mapping

from .errors import ConfigError


def default_config() -> dict[str, Any]:
    text = resources.files("aquanet").joinpath("default_config.json").read_text(encoding="utf-8")
    return json.loads(text)


def merge(base: Mapping, override: Mapping) -> dict:
    """Recursive dict merge; ``override`` wins, nested dicts merge key by key."""
    out = copy.deepcopy(dict(base))
    for k, v in override.items():
        if isinstance(v, Mapping) and isinstance(out.get(k), Mapping):
            out[k] = merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def load_config(path=None) -> dict[str, Any]:
    cfg = default_config()
    if path is None:
        return cfg
    try:
        user = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config ({exc.strerror or exc})") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    if not isinstance(user, dict):
        raise ConfigError(f"{path}: config must be a JSON object")
    return merge(cfg, user)
