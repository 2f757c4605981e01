from __future__ import annotations

import os
from collections.abc import Mapping
from dataclasses import dataclass, replace
from typing import Any

# --- Defaults ----------------------------------------------------------------
DEFAULT_MAX_SHIFT = 64
DEFAULT_SEARCH_BUDGET = 2_000_000
DEFAULT_IMPLICATION_MAX_LEN = 4
DEFAULT_IMPLICATION_MAX_VALUES = 3
DEFAULT_THREADS = 1
DEFAULT_LOG_LEVEL = "WARNING"
DEFAULT_PADDING_MODE = "fresh"

PADDING_MODES = ("fresh", "neighbour")
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")

ENV_PREFIX = "DATALTL_"


@dataclass(slots=True, frozen=True)
class DataLTLConfig:
    max_shift: int
    search_budget: int
    implication_max_len: int
    implication_max_values: int
    threads: int
    log_level: str
    padding_mode: str


def _env_int(env: Mapping[str, str], name: str, default: int, minimum: int = 1) -> int:
    try:
        value = int(env.get(ENV_PREFIX + name, default))
    except (TypeError, ValueError):
        value = default
    return max(minimum, value)


def _env_choice(env: Mapping[str, str], name: str, default: str, choices: tuple[str, ...]) -> str:
    value = str(env.get(ENV_PREFIX + name, default)).strip()
    upper = value.upper() if choices is LOG_LEVELS else value.lower()
    return upper if upper in choices else default


def get_config(overrides: Mapping[str, Any] | None = None, env: Mapping[str, str] | None = None) -> DataLTLConfig:
    """Defaults, then ``DATALTL_*`` environment variables, then explicit overrides.

    Bad environment values fall back to the defaults instead of raising.
    """

    env = os.environ if env is None else env
    cfg = DataLTLConfig(
        max_shift=_env_int(env, "MAX_SHIFT", DEFAULT_MAX_SHIFT, minimum=0),
        search_budget=_env_int(env, "SEARCH_BUDGET", DEFAULT_SEARCH_BUDGET),
        implication_max_len=_env_int(env, "IMPLICATION_MAX_LEN", DEFAULT_IMPLICATION_MAX_LEN),
        implication_max_values=_env_int(env, "IMPLICATION_MAX_VALUES", DEFAULT_IMPLICATION_MAX_VALUES),
        threads=_env_int(env, "THREADS", DEFAULT_THREADS),
        log_level=_env_choice(env, "LOG_LEVEL", DEFAULT_LOG_LEVEL, LOG_LEVELS),
        padding_mode=_env_choice(env, "PADDING_MODE", DEFAULT_PADDING_MODE, PADDING_MODES),
    )
    if overrides:
        cfg = replace(cfg, **{key: value for key, value in overrides.items() if value is not None})
    return cfg
