"""Bundled fixtures: sample microdata, a 10-sector IO table, run configs."""

from __future__ import annotations

import os

_DIR = os.path.dirname(os.path.abspath(__file__))


def fixture_path(name: str) -> str:
    path = os.path.join(_DIR, name)
    if not os.path.exists(path):
        raise FileNotFoundError(f"no bundled fixture named {name!r}")
    return path
