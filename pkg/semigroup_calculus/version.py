"""Package version, read from version.json next to this module."""

import json
import logging
import os
from datetime import datetime
from functools import lru_cache
from typing import NamedTuple

LOGGER = logging.getLogger(__name__)

VERSION_PATH = os.path.join(os.path.dirname(os.path.abspath(__file__)), "version.json")
FALLBACK_VERSION = "v0.0.0"


class VersionInfo(NamedTuple):
    version: str
    build_date: datetime | None


@lru_cache(maxsize=1)
def load_version_info(path=VERSION_PATH):
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        LOGGER.warning("Cannot read %s: %s", path, e)
        return VersionInfo(FALLBACK_VERSION, None)
    try:
        built = datetime.fromisoformat(data["buildDate"]) if "buildDate" in data else None
    except (TypeError, ValueError):
        LOGGER.warning("Ignoring malformed buildDate %r in %s", data.get("buildDate"), path)
        built = None
    return VersionInfo(str(data.get("version", FALLBACK_VERSION)), built)


def get_current_version():
    return load_version_info().version


def get_build_date():
    built = load_version_info().build_date
    return built.strftime("%Y-%m-%d %H:%M") if built else "unknown build"
