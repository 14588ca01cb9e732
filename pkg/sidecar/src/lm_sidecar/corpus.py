"""Minimal reader for the JSONL document format.

The sidecar talks to the segmentation toolkit only through its external
formats, so this module parses the documented shape (one JSON object per
line with `id` and `sentences`) rather than importing the toolkit.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .config import SidecarError


@dataclass(frozen=True)
class Document:
    id: str
    sentences: tuple[str, ...]


def load_documents(path: str | Path) -> list[Document]:
    path = Path(path)
    docs: list[Document] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError:
                raise SidecarError(f"{path}: line {lineno}: malformed JSON") from None
            for key in ("id", "sentences"):
                if key not in obj:
                    raise SidecarError(
                        f"{path}: line {lineno}: missing field {key!r}"
                    )
            docs.append(
                Document(str(obj["id"]), tuple(str(s) for s in obj["sentences"]))
            )
    return docs
