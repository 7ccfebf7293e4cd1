"""Pluggable key-to-bytes artifact stores backing channel versions."""

from __future__ import annotations

import os
from pathlib import Path

from .errors import NotFound


class ArtifactStore:
    """Interface: immutable put/get of payload bytes under an opaque key."""

    label = "store"

    def put(self, key: str, data: bytes) -> None:
        raise NotImplementedError

    def get(self, key: str) -> bytes:
        raise NotImplementedError


class MemoryArtifactStore(ArtifactStore):
    label = "memory"

    def __init__(self):
        self._blobs: dict[str, bytes] = {}

    def put(self, key: str, data: bytes) -> None:
        # Writes never replace: versions are immutable once stored.
        self._blobs.setdefault(key, bytes(data))

    def get(self, key: str) -> bytes:
        try:
            return self._blobs[key]
        except KeyError:
            raise NotFound(f"artifact {key} not found") from None


class FileArtifactStore(ArtifactStore):
    """Default embedded backend: one file per artifact under a root directory."""

    label = "embedded"

    def __init__(self, root: str | os.PathLike):
        self._root = Path(root)
        self._root.mkdir(parents=True, exist_ok=True)

    def _path(self, key: str) -> Path:
        safe = "".join(c if c.isalnum() or c in "._-" else "_" for c in key)
        return self._root / safe

    def put(self, key: str, data: bytes) -> None:
        path = self._path(key)
        if path.exists():
            return
        tmp = path.with_suffix(".tmp")
        tmp.write_bytes(data)
        tmp.replace(path)

    def get(self, key: str) -> bytes:
        path = self._path(key)
        if not path.exists():
            raise NotFound(f"artifact {key} not found")
        return path.read_bytes()
