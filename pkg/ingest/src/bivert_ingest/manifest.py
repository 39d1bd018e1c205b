"""Dump manifests and atomic file writes shared by all producers."""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path


class IngestError(Exception):
    """A producer could not complete (model load failure, exhausted retries, ...)."""


def atomic_write_text(path, text: str) -> None:
    """Write via a temp file in the same directory, then rename into place."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise


@dataclass
class DumpManifest:
    """Provenance record written alongside every produced file."""

    kind: str
    mt_model: str | None = None
    encoder_model: str | None = None
    tokenizer: str | None = None
    layer: str | None = None
    created_at: str = field(
        default_factory=lambda: datetime.now(timezone.utc).isoformat())
    counts: dict = field(default_factory=dict)
    partial: bool = False
    failures: list = field(default_factory=list)

    def write_alongside(self, dump_path) -> Path:
        manifest_path = Path(str(dump_path) + ".manifest.json")
        atomic_write_text(manifest_path, json.dumps(asdict(self), indent=2,
                                                    sort_keys=True) + "\n")
        return manifest_path
