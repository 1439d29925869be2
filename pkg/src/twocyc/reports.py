"""JSON report envelope shared by every command, with schema validation."""

from __future__ import annotations

import json
import time
from importlib import resources
from pathlib import Path
from typing import Any

import jsonschema

from . import __version__

STATUS_EXIT = {"ok": 0, "inconclusive": 2, "violation": 3}


def schema() -> dict:
    return json.loads(resources.files("twocyc").joinpath("data/report.schema.json").read_text())


def make_report(command: str, inputs: dict, result: dict, *, status: str = "ok", budget: float | None = None, elapsed: float | None = None) -> dict:
    return {
        "command": command,
        "version": __version__,
        "status": status,
        "inputs": _plain(inputs),
        "budget": budget,
        "elapsed_seconds": elapsed,
        "generated": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
        "result": _plain(result),
    }


def validate(report: dict) -> None:
    """Raise ``jsonschema.ValidationError`` if the report breaks the published schema."""
    jsonschema.validate(report, schema())


def _plain(obj: Any):
    """Coerce exact numbers and tuples into JSON-friendly values (rationals become strings)."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if obj is None or isinstance(obj, (bool, int, float, str)):
        return obj
    return str(obj)


def dump(report: dict, path: str | Path | None = None) -> str:
    text = json.dumps(report, indent=2, sort_keys=False)
    if path is not None:
        Path(path).write_text(text + "\n")
    return text


def load(path: str | Path) -> dict:
    return json.loads(Path(path).read_text())


# fields that legitimately change between runs of the same command
VOLATILE = {"generated", "elapsed_seconds"}


# result keys naming side files (figures, CSV) rather than computed values
ARTEFACTS = {"csv", "plot"}


def comparable(report: dict) -> dict:
    """The deterministic part of a report, normalized through a JSON round trip."""
    out = json.loads(json.dumps({k: v for k, v in report.items() if k not in VOLATILE}))
    if isinstance(out.get("result"), dict):
        out["result"] = {k: v for k, v in out["result"].items() if k not in ARTEFACTS}
    return out
