"""Canonical JSON for certificates and reports."""

from __future__ import annotations

import json
from pathlib import Path

from .errors import ParseError


def dumps(obj) -> str:
    """Sorted keys and fixed indentation, so equal objects give identical bytes."""
    if hasattr(obj, "to_json"):
        obj = obj.to_json()
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def dump(obj, path) -> None:
    Path(path).write_text(dumps(obj), encoding="utf-8")


def load(path) -> dict:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from exc
